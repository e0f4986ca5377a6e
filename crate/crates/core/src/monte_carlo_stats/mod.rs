//! Monte Carlo machinery: Haar sampling, permutation tests, and the orbit walk.
//!
//! Every test is deterministic given its seed. Work that fans out (permutation
//! batches, null draws, repetitions) draws unit `k` from the stream
//! `(seed, k)`, so results do not depend on thread scheduling.

mod calibration;
mod dcov;
mod energy;
mod gaussianity;
mod haar;
mod orbit;
mod uniformity;

use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};

pub use calibration::{null_rejection_rate, rejection_rate, CalibrationResult, NullTest};
pub use dcov::{distance_covariance, test_radial_angular_independence};
pub use energy::{
    energy_statistic, energy_two_sample_test, test_exchangeability, test_rotational_invariance,
};
pub use gaussianity::{ks_distance_zero_mean_normal, test_gaussianity_1d};
pub use haar::haar_rotation;
pub use orbit::{orbit_random_walk, orbit_random_walk_with, WalkConfig};
pub use uniformity::{sphere_uniformity_statistic, test_uniform_on_sphere};

pub const DEFAULT_PERMUTATIONS: usize = 999;
pub const DEFAULT_ALPHA: f64 = 0.01;
pub const CALIBRATION_ALPHA: f64 = 0.05;
pub const MIN_PERMUTATIONS: usize = 99;

/// Permutations (or null draws) handled per parallel unit.
pub(crate) const CHUNK: usize = 64;

/// `n` rows of `d` finite reals, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleMatrix {
    d: usize,
    data: Vec<f64>,
}

impl SampleMatrix {
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let d = rows.first().ok_or(Error::EmptyInput)?.len();
        let mut data = Vec::with_capacity(rows.len() * d);
        for r in rows {
            if r.len() != d {
                return Err(Error::DimensionMismatch { expected: d, got: r.len() });
            }
            data.extend_from_slice(r);
        }
        Self::from_flat(d, data)
    }

    pub fn from_flat(d: usize, data: Vec<f64>) -> Result<Self> {
        if d == 0 || data.is_empty() {
            return Err(Error::EmptyInput);
        }
        if !data.len().is_multiple_of(d) {
            return Err(Error::DimensionMismatch { expected: d, got: data.len() % d });
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { d, data })
    }

    pub fn n(&self) -> usize {
        self.data.len() / self.d
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.d..(i + 1) * self.d]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.d)
    }

    /// Column `j` as a vector.
    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows().map(|r| r[j]).collect()
    }

    /// Rows `range` as a new matrix.
    pub fn slice_rows(&self, range: std::ops::Range<usize>) -> Result<Self> {
        Self::from_flat(self.d, self.data[range.start * self.d..range.end * self.d].to_vec())
    }

    /// CSV with header `x1,…,xd`.
    pub fn to_csv(&self) -> String {
        let header: Vec<String> = (1..=self.d).map(|k| format!("x{k}")).collect();
        let mut s = header.join(",");
        s.push('\n');
        for r in self.rows() {
            let line: Vec<String> = r.iter().map(|v| format!("{v:e}")).collect();
            let _ = writeln!(s, "{}", line.join(","));
        }
        s
    }
}

/// Outcome of a hypothesis test.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TestReport {
    pub name: String,
    pub statistic: f64,
    pub p_value: f64,
    pub n_permutations: usize,
    pub alpha: f64,
    pub reject: bool,
    pub seed: u64,
}

impl TestReport {
    pub fn new(name: &str, statistic: f64, p_value: f64, n_permutations: usize, alpha: f64, seed: u64) -> Self {
        Self {
            name: name.to_string(),
            statistic,
            p_value,
            n_permutations,
            alpha,
            reject: p_value < alpha,
            seed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestConfig {
    pub n_permutations: usize,
    pub alpha: f64,
    pub seed: u64,
}

impl Default for TestConfig {
    fn default() -> Self {
        Self { n_permutations: DEFAULT_PERMUTATIONS, alpha: DEFAULT_ALPHA, seed: crate::rng::DEFAULT_SEED }
    }
}

impl TestConfig {
    pub fn new(n_permutations: usize, alpha: f64, seed: u64) -> Self {
        Self { n_permutations, alpha, seed }
    }

    pub fn with_seed(self, seed: u64) -> Self {
        Self { seed, ..self }
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if self.n_permutations < MIN_PERMUTATIONS {
            return Err(Error::InvalidArgument(format!(
                "need at least {MIN_PERMUTATIONS} permutations, got {}",
                self.n_permutations
            )));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidArgument(format!("alpha must lie in (0, 1), got {}", self.alpha)));
        }
        Ok(())
    }
}

pub(crate) fn require_rows(x: &SampleMatrix, min: usize) -> Result<()> {
    if x.n() < min {
        return Err(Error::InvalidArgument(format!("need at least {min} rows, got {}", x.n())));
    }
    Ok(())
}

/// `(1 + #{null ≥ observed}) / (draws + 1)` with a relative tie tolerance.
pub(crate) fn monte_carlo_p_value(observed: f64, null: &[f64], scale: f64) -> f64 {
    let eps = 1e-12 * scale.abs().max(f64::MIN_POSITIVE);
    let exceed = null.iter().filter(|&&s| s >= observed - eps).count();
    (1 + exceed) as f64 / (null.len() + 1) as f64
}

/// Splits `[0, total)` into chunk sizes of at most [`CHUNK`].
pub(crate) fn chunk_sizes(total: usize) -> Vec<usize> {
    (0..total.div_ceil(CHUNK)).map(|c| CHUNK.min(total - c * CHUNK)).collect()
}
