use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use super::{chunk_sizes, monte_carlo_p_value, SampleMatrix, TestConfig, TestReport};
use crate::error::{Error, Result};
use crate::rng::stream;

const UNIT_TOL: f64 = 1e-8;

/// `n‖v̄‖² + n‖Ĉ − I/d‖²_F / (1 − 1/d)` where `Ĉ` is the mean of `vvᵀ`.
/// Both terms have null mean one.
pub fn sphere_uniformity_statistic(x: &SampleMatrix) -> f64 {
    let (n, d) = (x.n(), x.d());
    let mut mean = vec![0.0; d];
    let mut second = vec![0.0; d * d];
    for row in x.rows() {
        for i in 0..d {
            mean[i] += row[i];
            for j in 0..d {
                second[i * d + j] += row[i] * row[j];
            }
        }
    }
    let nf = n as f64;
    let t1 = mean.iter().map(|m| m * m).sum::<f64>() / nf;
    let mut dev = 0.0;
    for i in 0..d {
        for j in 0..d {
            let target = if i == j { 1.0 / d as f64 } else { 0.0 };
            dev += (second[i * d + j] / nf - target).powi(2);
        }
    }
    t1 + nf * dev / (1.0 - 1.0 / d as f64)
}

fn uniform_sample<R: Rng + ?Sized>(n: usize, d: usize, rng: &mut R) -> SampleMatrix {
    let mut data = Vec::with_capacity(n * d);
    for _ in 0..n {
        let g: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        let r = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        data.extend(g.iter().map(|v| v / r));
    }
    SampleMatrix::from_flat(d, data).expect("finite sample")
}

/// Tests that unit vectors have mean zero and covariance `I/d`, with the
/// critical value calibrated by `n_permutations` exact uniform samples.
pub fn test_uniform_on_sphere(x: &SampleMatrix, cfg: &TestConfig) -> Result<TestReport> {
    cfg.validate()?;
    if x.d() < 2 {
        return Err(Error::InvalidDimension(x.d(), 2));
    }
    for (i, row) in x.rows().enumerate() {
        let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > UNIT_TOL {
            return Err(Error::InvalidArgument(format!("row {i} has norm {norm}")));
        }
    }
    let observed = sphere_uniformity_statistic(x);
    let null: Vec<f64> = chunk_sizes(cfg.n_permutations)
        .into_par_iter()
        .enumerate()
        .flat_map_iter(|(c, width)| {
            let mut rng = stream(cfg.seed, c as u64);
            (0..width)
                .map(|_| sphere_uniformity_statistic(&uniform_sample(x.n(), x.d(), &mut rng)))
                .collect::<Vec<_>>()
        })
        .collect();
    let p = monte_carlo_p_value(observed, &null, 1.0);
    Ok(TestReport::new("uniform_on_sphere", observed, p, cfg.n_permutations, cfg.alpha, cfg.seed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_distr::Distribution;

    /// von Mises–Fisher on S² about the north pole, by inverting the CDF of `cos θ`.
    fn vmf3(kappa: f64, n: usize, seed: u64) -> SampleMatrix {
        let mut rng = crate::rng::seeded(seed);
        let mut rows = Vec::new();
        for _ in 0..n {
            let xi: f64 = rng.random();
            let w = 1.0 + (xi + (1.0 - xi) * (-2.0 * kappa).exp()).ln() / kappa;
            let phi = rng.random_range(0.0..std::f64::consts::TAU);
            let s = (1.0 - w * w).max(0.0).sqrt();
            rows.push(vec![s * phi.cos(), s * phi.sin(), w]);
        }
        SampleMatrix::from_rows(&rows).unwrap()
    }

    #[test]
    fn null_mean_is_about_two() {
        let mut rng = crate::rng::seeded(30);
        let reps = 2000;
        let mean: f64 = (0..reps).map(|_| sphere_uniformity_statistic(&uniform_sample(50, 4, &mut rng))).sum::<f64>()
            / reps as f64;
        assert!((mean - 2.0).abs() < 0.15, "{mean}");
    }

    #[test]
    fn accepts_uniform() {
        let mut rng = crate::rng::seeded(31);
        let x = uniform_sample(2000, 3, &mut rng);
        assert!(!test_uniform_on_sphere(&x, &TestConfig::default()).unwrap().reject);
    }

    #[test]
    fn rejects_von_mises_fisher() {
        let x = vmf3(1.0, 2000, 32);
        assert!(test_uniform_on_sphere(&x, &TestConfig::default()).unwrap().reject);
    }

    #[test]
    fn rejects_non_unit_rows() {
        let x = SampleMatrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 2.0]]).unwrap();
        assert!(test_uniform_on_sphere(&x, &TestConfig::default()).is_err());
    }

    #[test]
    fn rejects_axis_clustering() {
        // Mean zero but concentrated on ±e₁: only the covariance term sees it.
        let mut rng = crate::rng::seeded(33);
        let normal = rand_distr::Normal::new(0.0, 0.3).unwrap();
        let rows: Vec<Vec<f64>> = (0..500)
            .map(|i| {
                let s = if i % 2 == 0 { 1.0 } else { -1.0 };
                let v = [s, normal.sample(&mut rng), normal.sample(&mut rng)];
                let r = v.iter().map(|a| a * a).sum::<f64>().sqrt();
                v.iter().map(|a| a / r).collect()
            })
            .collect();
        let x = SampleMatrix::from_rows(&rows).unwrap();
        assert!(test_uniform_on_sphere(&x, &TestConfig::default()).unwrap().reject);
    }
}
