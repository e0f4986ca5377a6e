use rand::seq::SliceRandom;
use rayon::prelude::*;

use super::{chunk_sizes, monte_carlo_p_value, require_rows, SampleMatrix, TestConfig, TestReport};
use crate::error::{Error, Result};
use crate::rng::stream;

const MIN_ROWS: usize = 100;
const ZERO_NORM: f64 = 1e-12;

/// Double-centred distance matrix, row-major.
fn centred_distances<F: Fn(usize, usize) -> f64>(n: usize, dist: F) -> Vec<f64> {
    let mut a = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..i {
            let v = dist(i, j);
            a[i * n + j] = v;
            a[j * n + i] = v;
        }
    }
    let row_means: Vec<f64> = a.chunks_exact(n).map(|r| r.iter().sum::<f64>() / n as f64).collect();
    let grand = row_means.iter().sum::<f64>() / n as f64;
    for i in 0..n {
        for j in 0..n {
            a[i * n + j] += grand - row_means[i] - row_means[j];
        }
    }
    a
}

/// `Σᵢⱼ A[π(i), π(j)]·B[i, j] / n²`.
fn permuted_product(a: &[f64], b: &[f64], perm: &[usize]) -> f64 {
    let n = perm.len();
    let mut s = 0.0;
    for (i, brow) in b.chunks_exact(n).enumerate() {
        let arow = &a[perm[i] * n..(perm[i] + 1) * n];
        s += perm.iter().zip(brow).map(|(&pj, bij)| arow[pj] * bij).sum::<f64>();
    }
    s / (n * n) as f64
}

fn radial_angular(x: &SampleMatrix) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let mut radii = Vec::with_capacity(x.n());
    let mut dirs = Vec::with_capacity(x.n());
    for (i, row) in x.rows().enumerate() {
        let r = row.iter().map(|v| v * v).sum::<f64>().sqrt();
        if r < ZERO_NORM {
            return Err(Error::Degenerate(format!("row {i} has norm {r:e}")));
        }
        radii.push(r);
        dirs.push(row.iter().map(|v| v / r).collect());
    }
    Ok((radii, dirs))
}

fn matrices(x: &SampleMatrix) -> Result<(Vec<f64>, Vec<f64>)> {
    let (radii, dirs) = radial_angular(x)?;
    let n = x.n();
    let a = centred_distances(n, |i, j| (radii[i] - radii[j]).abs());
    let b = centred_distances(n, |i, j| {
        dirs[i].iter().zip(&dirs[j]).map(|(p, q)| (p - q) * (p - q)).sum::<f64>().sqrt()
    });
    Ok((a, b))
}

/// Squared distance covariance (V-statistic) between `‖xᵢ‖` and `xᵢ/‖xᵢ‖`.
pub fn distance_covariance(x: &SampleMatrix) -> Result<f64> {
    let (a, b) = matrices(x)?;
    let id: Vec<usize> = (0..x.n()).collect();
    Ok(permuted_product(&a, &b, &id))
}

/// Distance-covariance test of `‖X‖ ⟂ X/‖X‖`, permuting the radial labels.
pub fn test_radial_angular_independence(x: &SampleMatrix, cfg: &TestConfig) -> Result<TestReport> {
    require_rows(x, MIN_ROWS)?;
    cfg.validate()?;
    let n = x.n();
    let (a, b) = matrices(x)?;
    let id: Vec<usize> = (0..n).collect();
    let observed = permuted_product(&a, &b, &id);
    let null: Vec<f64> = chunk_sizes(cfg.n_permutations)
        .into_par_iter()
        .enumerate()
        .flat_map_iter(|(c, width)| {
            let mut rng = stream(cfg.seed, c as u64);
            let mut perm = id.clone();
            (0..width)
                .map(|_| {
                    perm.shuffle(&mut rng);
                    permuted_product(&a, &b, &perm)
                })
                .collect::<Vec<_>>()
        })
        .collect();
    let scale = a.iter().map(|v| v.abs()).fold(0.0, f64::max) * b.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let p = monte_carlo_p_value(observed, &null, scale);
    Ok(TestReport::new("radial_angular_independence", observed, p, cfg.n_permutations, cfg.alpha, cfg.seed))
}
