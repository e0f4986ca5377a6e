use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use statrs::function::erf::erfc;

use super::{chunk_sizes, monte_carlo_p_value, TestConfig, TestReport};
use crate::error::{Error, Result};
use crate::rng::stream;

const MIN_VALUES: usize = 100;

fn normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / std::f64::consts::SQRT_2)
}

/// Kolmogorov–Smirnov distance from `N(0, σ̂²)` with `σ̂² = mean(x²)`.
pub fn ks_distance_zero_mean_normal(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::EmptyInput);
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    let n = values.len() as f64;
    let sigma = (values.iter().map(|v| v * v).sum::<f64>() / n).sqrt();
    if sigma == 0.0 {
        return Err(Error::Degenerate("zero variance".into()));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut d = 0.0f64;
    for (i, v) in sorted.iter().enumerate() {
        let f = normal_cdf(v / sigma);
        d = d.max((i + 1) as f64 / n - f).max(f - i as f64 / n);
    }
    Ok(d)
}

/// KS test for a centred normal law with unknown variance. The statistic is
/// scale invariant, so the parametric bootstrap draws from `N(0, 1)`.
pub fn test_gaussianity_1d(values: &[f64], cfg: &TestConfig) -> Result<TestReport> {
    if values.len() < MIN_VALUES {
        return Err(Error::InvalidArgument(format!("need at least {MIN_VALUES} values, got {}", values.len())));
    }
    cfg.validate()?;
    let observed = ks_distance_zero_mean_normal(values)?;
    let n = values.len();
    let null: Result<Vec<f64>> = chunk_sizes(cfg.n_permutations)
        .into_par_iter()
        .enumerate()
        .map(|(c, width)| {
            let mut rng = stream(cfg.seed, c as u64);
            (0..width)
                .map(|_| {
                    let draw: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
                    ks_distance_zero_mean_normal(&draw)
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()
        .map(|v| v.concat());
    let p = monte_carlo_p_value(observed, &null?, observed);
    Ok(TestReport::new("gaussianity_ks", observed, p, cfg.n_permutations, cfg.alpha, cfg.seed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_distr::{Distribution, Exp};

    #[test]
    fn cdf_values() {
        assert!((normal_cdf(0.0) - 0.5).abs() < 1e-15);
        assert!((normal_cdf(1.959963984540054) - 0.975).abs() < 1e-11);
    }

    #[test]
    fn ks_of_known_points() {
        // Quantiles of N(0,1) at 1/4, 1/2, 3/4 sit midway between the steps.
        let q = 0.674_489_750_196_081_7;
        let d = ks_distance_zero_mean_normal(&[-q, 0.0, q]).unwrap();
        let sigma = (2.0 * q * q / 3.0f64).sqrt();
        let expected = (0..3)
            .map(|i| {
                let f = normal_cdf([-q, 0.0, q][i] / sigma);
                ((i + 1) as f64 / 3.0 - f).max(f - i as f64 / 3.0)
            })
            .fold(0.0, f64::max);
        assert!((d - expected).abs() < 1e-15);
    }

    #[test]
    fn standard_normal_passes() {
        let mut rng = crate::rng::seeded(40);
        let v: Vec<f64> = (0..5000).map(|_| 2.5 * rng.sample::<f64, _>(StandardNormal)).collect();
        assert!(!test_gaussianity_1d(&v, &TestConfig::new(199, 0.01, 1)).unwrap().reject);
    }

    #[test]
    fn exponential_fails() {
        let mut rng = crate::rng::seeded(41);
        let e = Exp::new(1.0).unwrap();
        let v: Vec<f64> = (0..1000).map(|_| e.sample(&mut rng) - 1.0).collect();
        assert!(test_gaussianity_1d(&v, &TestConfig::new(199, 0.01, 1)).unwrap().reject);
    }

    #[test]
    fn zero_variance_is_error() {
        assert!(matches!(
            test_gaussianity_1d(&[0.0; 200], &TestConfig::default()),
            Err(Error::Degenerate(_))
        ));
        assert!(test_gaussianity_1d(&[1.0; 20], &TestConfig::default()).is_err());
    }
}
