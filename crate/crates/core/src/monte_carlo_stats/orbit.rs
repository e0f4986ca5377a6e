use rand::seq::SliceRandom;

use super::SampleMatrix;
use crate::error::{Error, Result};
use crate::lie_core::PermutationMap;
use crate::rng::stream;
use crate::so3_irreps::{build_generators, rep_matrix, RotationSpec};

const NORM_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WalkConfig {
    pub burn_in: usize,
    pub thin: usize,
}

impl Default for WalkConfig {
    fn default() -> Self {
        Self { burn_in: 100, thin: 10 }
    }
}

/// Random walk on the unit sphere of `R^(2ℓ+1)` driven by conjugated
/// rotations `E_σ⁻¹·φ(g)·E_σ`, returning `steps` recorded states.
pub fn orbit_random_walk(ell: usize, steps: usize, include_odd: bool, start: &[f64], seed: u64) -> Result<SampleMatrix> {
    orbit_random_walk_with(ell, steps, include_odd, start, seed, WalkConfig::default())
}

pub fn orbit_random_walk_with(
    ell: usize,
    steps: usize,
    include_odd: bool,
    start: &[f64],
    seed: u64,
    cfg: WalkConfig,
) -> Result<SampleMatrix> {
    let gens = build_generators(ell)?;
    let n = gens.dim();
    if start.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: start.len() });
    }
    let norm = start.iter().map(|v| v * v).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > NORM_TOL {
        return Err(Error::InvalidArgument(format!("start vector has norm {norm}")));
    }
    if cfg.thin == 0 {
        return Err(Error::InvalidArgument("thinning interval must be positive".into()));
    }
    if steps == 0 {
        return SampleMatrix::from_flat(n, start.to_vec());
    }

    let odd = PermutationMap::transposition(n, 0, 1)?;
    let mut rng = stream(seed, 0);
    let mut idx: Vec<usize> = (0..n).collect();
    let mut v = start.to_vec();
    let mut out = Vec::with_capacity(steps * n);
    let total = cfg.burn_in + steps * cfg.thin;
    for t in 1..=total {
        idx.shuffle(&mut rng);
        let sigma = PermutationMap::new(idx.clone())?;
        let r = rep_matrix(&gens, &RotationSpec::random_haar(&mut rng))?;
        v = sigma.inverse().permute_vector(&r.apply(&sigma.permute_vector(&v)));
        if include_odd {
            v = odd.permute_vector(&v);
        }
        if t > cfg.burn_in && (t - cfg.burn_in).is_multiple_of(cfg.thin) {
            out.extend_from_slice(&v);
        }
    }
    let drift = (v.iter().map(|a| a * a).sum::<f64>().sqrt() - norm).abs();
    if drift > NORM_TOL {
        return Err(Error::InvarianceViolation(drift));
    }
    SampleMatrix::from_flat(n, out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::monte_carlo_stats::{test_uniform_on_sphere, TestConfig};

    fn e0(n: usize) -> Vec<f64> {
        let mut v = vec![0.0; n];
        v[0] = 1.0;
        v
    }

    #[test]
    fn zero_steps_returns_start() {
        let x = orbit_random_walk(1, 0, false, &e0(3), 1).unwrap();
        assert_eq!(x.n(), 1);
        assert_eq!(x.row(0), &[1.0, 0.0, 0.0]);
    }

    #[test]
    fn shape_and_norms() {
        let x = orbit_random_walk(2, 50, true, &e0(5), 2).unwrap();
        assert_eq!((x.n(), x.d()), (50, 5));
        for r in x.rows() {
            assert!((r.iter().map(|a| a * a).sum::<f64>().sqrt() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn bad_start() {
        assert!(orbit_random_walk(1, 5, false, &[1.0, 1.0, 0.0], 1).is_err());
        assert!(orbit_random_walk(1, 5, false, &[1.0, 0.0], 1).is_err());
        assert!(orbit_random_walk(0, 5, false, &[1.0], 1).is_err());
    }

    #[test]
    fn small_walk_looks_uniform() {
        let x = orbit_random_walk(2, 1000, false, &e0(5), 3).unwrap();
        assert!(!test_uniform_on_sphere(&x, &TestConfig::new(199, 0.01, 4)).unwrap().reject);
    }
}
