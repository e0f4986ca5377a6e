use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;

use super::{chunk_sizes, haar_rotation, monte_carlo_p_value, require_rows, SampleMatrix, TestConfig, TestReport};
use crate::error::{Error, Result};
use crate::lie_core::PermutationMap;
use crate::rng::{derive_seed, stream};

const MIN_ROWS: usize = 100;

/// Pairwise Euclidean distances of the rows of `x` stacked over `y`.
fn pooled_distances(x: &SampleMatrix, y: &SampleMatrix) -> DMatrix<f64> {
    let rows: Vec<&[f64]> = x.rows().chain(y.rows()).collect();
    let n = rows.len();
    let mut d = DMatrix::<f64>::zeros(n, n);
    for j in 0..n {
        for i in 0..j {
            let s: f64 = rows[i].iter().zip(rows[j]).map(|(a, b)| (a - b) * (a - b)).sum();
            let v = s.sqrt();
            d[(i, j)] = v;
            d[(j, i)] = v;
        }
    }
    d
}

/// Energy V-statistic of the split `u` (indicator of the first sample),
/// given `du = D·u`, `r = D·1` and `total = 1ᵀD1`.
fn split_statistic(u: &[f64], du: &[f64], r: &[f64], total: f64, n: usize, m: usize) -> f64 {
    let s_xx: f64 = u.iter().zip(du).map(|(a, b)| a * b).sum();
    let ur: f64 = u.iter().zip(r).map(|(a, b)| a * b).sum();
    let s_xy = ur - s_xx;
    let s_yy = total - 2.0 * ur + s_xx;
    let (nf, mf) = (n as f64, m as f64);
    2.0 * s_xy / (nf * mf) - s_xx / (nf * nf) - s_yy / (mf * mf)
}

fn check_pair(x: &SampleMatrix, y: &SampleMatrix) -> Result<()> {
    if x.d() != y.d() {
        return Err(Error::DimensionMismatch { expected: x.d(), got: y.d() });
    }
    Ok(())
}

/// `2·mean‖xᵢ−yⱼ‖ − mean‖xᵢ−xᵢ'‖ − mean‖yⱼ−yⱼ'‖`.
pub fn energy_statistic(x: &SampleMatrix, y: &SampleMatrix) -> Result<f64> {
    check_pair(x, y)?;
    let d = pooled_distances(x, y);
    let (n, m) = (x.n(), y.n());
    let r: Vec<f64> = d.row_sum().iter().copied().collect();
    let total: f64 = r.iter().sum();
    let u: Vec<f64> = (0..n + m).map(|i| if i < n { 1.0 } else { 0.0 }).collect();
    let du: Vec<f64> = (&d * DMatrix::from_column_slice(n + m, 1, &u)).iter().copied().collect();
    Ok(split_statistic(&u, &du, &r, total, n, m))
}

/// How the permutation null reassigns rows to the two samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Relabel {
    /// Any `n` of the pooled rows form the first sample.
    Pooled,
    /// `yᵢ` is a transform of `xᵢ`; each pair is swapped with probability 1/2.
    PairSwap,
}

/// Two-sample energy test with a pooled-relabel permutation null.
pub fn energy_two_sample_test(x: &SampleMatrix, y: &SampleMatrix, cfg: &TestConfig) -> Result<TestReport> {
    energy_test("energy_two_sample", x, y, Relabel::Pooled, cfg)
}

fn energy_test(name: &str, x: &SampleMatrix, y: &SampleMatrix, relabel: Relabel, cfg: &TestConfig) -> Result<TestReport> {
    check_pair(x, y)?;
    cfg.validate()?;
    let (n, m) = (x.n(), y.n());
    debug_assert!(relabel == Relabel::Pooled || n == m);
    let big_n = n + m;
    let d = pooled_distances(x, y);
    // D is symmetric, so its row sums are its column sums.
    let r: Vec<f64> = d.row_sum().iter().copied().collect();
    let total: f64 = r.iter().sum();

    let mut observed_u = vec![0.0; big_n];
    observed_u[..n].fill(1.0);
    let du: Vec<f64> = (&d * DMatrix::from_column_slice(big_n, 1, &observed_u)).iter().copied().collect();
    let observed = split_statistic(&observed_u, &du, &r, total, n, m);

    let null: Vec<f64> = chunk_sizes(cfg.n_permutations)
        .into_par_iter()
        .enumerate()
        .flat_map_iter(|(c, width)| {
            let mut rng = stream(cfg.seed, c as u64);
            let mut u = DMatrix::<f64>::zeros(big_n, width);
            let mut idx: Vec<usize> = (0..big_n).collect();
            for k in 0..width {
                match relabel {
                    Relabel::Pooled => {
                        idx.shuffle(&mut rng);
                        for &i in &idx[..n] {
                            u[(i, k)] = 1.0;
                        }
                    }
                    Relabel::PairSwap => {
                        for i in 0..n {
                            let swap: bool = rng.random();
                            u[(if swap { n + i } else { i }, k)] = 1.0;
                        }
                    }
                }
            }
            let du = &d * &u;
            (0..width)
                .map(|k| split_statistic(u.column(k).as_slice(), du.column(k).as_slice(), &r, total, n, m))
                .collect::<Vec<_>>()
        })
        .collect();

    let scale = total / (big_n * big_n) as f64;
    let p = monte_carlo_p_value(observed, &null, scale);
    Ok(TestReport::new(name, observed, p, cfg.n_permutations, cfg.alpha, cfg.seed))
}

/// Applies `transform` to every row.
fn transform_rows<F>(x: &SampleMatrix, mut transform: F) -> Result<SampleMatrix>
where
    F: FnMut(&[f64]) -> Result<Vec<f64>>,
{
    let mut data = Vec::with_capacity(x.n() * x.d());
    for row in x.rows() {
        data.extend(transform(row)?);
    }
    SampleMatrix::from_flat(x.d(), data)
}

/// Energy test of `x` against `{E_σᵢ xᵢ}` with independent uniform `σᵢ`.
///
/// If the law of `x` is exchangeable then `(xᵢ, E_σᵢ xᵢ)` is an exchangeable
/// pair, so the null is generated by swapping within pairs.
pub fn test_exchangeability(x: &SampleMatrix, cfg: &TestConfig) -> Result<TestReport> {
    require_rows(x, MIN_ROWS)?;
    let mut rng = stream(derive_seed(cfg.seed, 0), u64::MAX);
    let mut idx: Vec<usize> = (0..x.d()).collect();
    let y = transform_rows(x, |row| {
        idx.shuffle(&mut rng);
        Ok(PermutationMap::new(idx.clone())?.permute_vector(row))
    })?;
    let report = energy_test("exchangeability", x, &y, Relabel::PairSwap, &cfg.with_seed(derive_seed(cfg.seed, 1)))?;
    Ok(TestReport { seed: cfg.seed, ..report })
}

/// Energy test of `x` against `{Qᵢ xᵢ}` with independent Haar `Qᵢ`, using the
/// same pair-swap null. With several batches each draws fresh rotations and
/// the p-values are Bonferroni-combined.
pub fn test_rotational_invariance(x: &SampleMatrix, n_rotations: usize, cfg: &TestConfig) -> Result<TestReport> {
    require_rows(x, MIN_ROWS)?;
    if n_rotations == 0 {
        return Err(Error::InvalidArgument("n_rotations must be positive".into()));
    }
    if x.d() < 2 {
        return Err(Error::InvalidDimension(x.d(), 2));
    }
    let mut best: Option<TestReport> = None;
    for b in 0..n_rotations as u64 {
        let batch_seed = derive_seed(cfg.seed, b);
        let mut rng = stream(batch_seed, u64::MAX);
        let rotated = transform_rows(x, |row| Ok(haar_rotation(x.d(), &mut rng)?.apply(row)))?;
        let report =
            energy_test("rotational_invariance", x, &rotated, Relabel::PairSwap, &cfg.with_seed(derive_seed(batch_seed, 1)))?;
        if best.as_ref().is_none_or(|r| report.p_value < r.p_value) {
            best = Some(report);
        }
    }
    let best = best.expect("at least one batch");
    let p = (best.p_value * n_rotations as f64).min(1.0);
    Ok(TestReport::new("rotational_invariance", best.statistic, p, cfg.n_permutations, cfg.alpha, cfg.seed))
}
