use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use super::{
    energy_two_sample_test, test_exchangeability, test_gaussianity_1d, test_radial_angular_independence,
    test_rotational_invariance, test_uniform_on_sphere, SampleMatrix, TestConfig, TestReport,
};
use crate::error::{Error, Result};
use crate::rng::{derive_seed, stream, StreamRng};

/// A statistical test paired with a sampler for its null hypothesis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NullTest {
    EnergyTwoSample,
    Exchangeability,
    RotationalInvariance,
    RadialAngularIndependence,
    UniformOnSphere,
    Gaussianity,
}

impl NullTest {
    pub fn all() -> [Self; 6] {
        [
            Self::EnergyTwoSample,
            Self::Exchangeability,
            Self::RotationalInvariance,
            Self::RadialAngularIndependence,
            Self::UniformOnSphere,
            Self::Gaussianity,
        ]
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::EnergyTwoSample => "energy_two_sample",
            Self::Exchangeability => "exchangeability",
            Self::RotationalInvariance => "rotational_invariance",
            Self::RadialAngularIndependence => "radial_angular_independence",
            Self::UniformOnSphere => "uniform_on_sphere",
            Self::Gaussianity => "gaussianity_ks",
        }
    }

    /// Draws one null data set of size `n` and runs the test on it.
    pub fn run_null(&self, n: usize, cfg: &TestConfig) -> Result<TestReport> {
        let mut rng = stream(cfg.seed, u64::MAX);
        match self {
            Self::EnergyTwoSample => {
                let x = gaussian(n, 3, &mut rng);
                let y = gaussian(n, 3, &mut rng);
                energy_two_sample_test(&x, &y, cfg)
            }
            Self::Exchangeability => test_exchangeability(&gaussian(n, 4, &mut rng), cfg),
            Self::RotationalInvariance => test_rotational_invariance(&gaussian(n, 3, &mut rng), 1, cfg),
            Self::RadialAngularIndependence => test_radial_angular_independence(&gaussian(n, 4, &mut rng), cfg),
            Self::UniformOnSphere => {
                let g = gaussian(n, 3, &mut rng);
                let rows: Vec<Vec<f64>> = g
                    .rows()
                    .map(|r| {
                        let s = r.iter().map(|v| v * v).sum::<f64>().sqrt();
                        r.iter().map(|v| v / s).collect()
                    })
                    .collect();
                test_uniform_on_sphere(&SampleMatrix::from_rows(&rows)?, cfg)
            }
            Self::Gaussianity => {
                let v: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
                test_gaussianity_1d(&v, cfg)
            }
        }
    }
}

fn gaussian(n: usize, d: usize, rng: &mut StreamRng) -> SampleMatrix {
    let data = (0..n * d).map(|_| rng.sample(StandardNormal)).collect();
    SampleMatrix::from_flat(d, data).expect("finite sample")
}

/// Number of rejections over `reps` runs; repetition `k` gets seed `derive_seed(seed, k)`.
pub fn rejection_rate<F>(reps: usize, seed: u64, run: F) -> Result<usize>
where
    F: Fn(u64) -> Result<TestReport> + Sync,
{
    let outcomes: Result<Vec<bool>> =
        (0..reps as u64).into_par_iter().map(|k| run(derive_seed(seed, k)).map(|r| r.reject)).collect();
    Ok(outcomes?.into_iter().filter(|&r| r).count())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CalibrationResult {
    pub test: String,
    pub reps: usize,
    pub n: usize,
    pub alpha: f64,
    pub rejections: usize,
    pub rate: f64,
    pub lower: f64,
    pub upper: f64,
    pub pass: bool,
}

/// Null rejection rate of `test` over `reps` seeded repetitions; passes when
/// the rate lies in `[α/2, 2α]`.
pub fn null_rejection_rate(test: NullTest, reps: usize, n: usize, cfg: &TestConfig) -> Result<CalibrationResult> {
    if reps == 0 {
        return Err(Error::InvalidArgument("reps must be positive".into()));
    }
    let rejections = rejection_rate(reps, cfg.seed, |s| test.run_null(n, &cfg.with_seed(s)))?;
    let rate = rejections as f64 / reps as f64;
    let (lower, upper) = (cfg.alpha / 2.0, 2.0 * cfg.alpha);
    Ok(CalibrationResult {
        test: test.name().to_string(),
        reps,
        n,
        alpha: cfg.alpha,
        rejections,
        rate,
        lower,
        upper,
        pass: (lower..=upper).contains(&rate),
    })
}
