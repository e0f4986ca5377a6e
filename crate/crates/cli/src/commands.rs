use std::fs;
use std::path::Path;

use invspan::invariance_engine::{block_form_check, decompose_so_n, max_cross_product, verify_theorem, VerificationStatus};
use invspan::lie_core::so_dim;
use invspan::monte_carlo_stats::{
    null_rejection_rate, orbit_random_walk, test_exchangeability, test_gaussianity_1d,
    test_radial_angular_independence, test_rotational_invariance, test_uniform_on_sphere, NullTest, SampleMatrix,
    TestConfig, TestReport,
};
use invspan::rng::{derive_seed, stream};
use invspan::sphere_harmonics::{
    empirical_power_spectrum, sample_many, PowerSpectrum, RadialLaw, DEFAULT_LOGNORMAL_SIGMA,
};
use rand::Rng;
use rand_distr::{Distribution, Exp, StandardNormal};
use serde::Serialize;
use serde_json::Value;

use crate::output::{emit, records_csv, to_value, CliError, CliResult};
use crate::{Command, Field, Radial, EXIT_CHECK_FAILED, EXIT_OK};

fn verdict(pass: bool) -> i32 {
    if pass {
        EXIT_OK
    } else {
        EXIT_CHECK_FAILED
    }
}

fn law(r: Radial) -> RadialLaw {
    match r {
        Radial::Chi => RadialLaw::Chi,
        Radial::Lognormal => RadialLaw::LogNormal { sigma: DEFAULT_LOGNORMAL_SIGMA },
        Radial::Constant => RadialLaw::Constant,
    }
}

fn load_spectrum(path: Option<&Path>, lmax: usize) -> CliResult<PowerSpectrum> {
    match path {
        None => Ok(PowerSpectrum::flat(lmax, 1.0)?),
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", p.display())))?;
            Ok(PowerSpectrum::parse(&text)?.with_lmax(lmax))
        }
    }
}

fn config(alpha: f64, permutations: usize, seed: u64) -> CliResult<TestConfig> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(CliError::Usage(format!("--alpha must lie in (0, 1), got {alpha}")));
    }
    Ok(TestConfig::new(permutations, alpha, seed))
}

fn reports_csv(reports: &[TestReport]) -> CliResult<String> {
    records_csv(&reports.iter().map(to_value).collect::<Vec<_>>())
}

fn flat_csv<T: Serialize>(v: &T) -> CliResult<String> {
    records_csv(&[to_value(v)])
}

#[derive(Serialize)]
struct SpanOutput {
    ell: usize,
    n: usize,
    phi_image_dim: usize,
    w_dim: usize,
    so_dim: usize,
    full: bool,
    fixed_subspace_dim: usize,
    status: VerificationStatus,
    conjugation_rounds: usize,
    tol: f64,
}

#[derive(Serialize)]
struct DecomposeOutput {
    n: usize,
    dim_v1: usize,
    dim_v2: usize,
    char_v1_transposition: f64,
    char_v2_transposition: f64,
    cross_max: f64,
    pass: bool,
}

#[derive(Serialize)]
struct CharacterOutput {
    n: usize,
    v1: f64,
    v2: f64,
    max_deviation: f64,
}

#[derive(Serialize)]
struct FieldOutput {
    lmax: usize,
    radial: &'static str,
    seed: u64,
    n: usize,
    spectrum: Vec<f64>,
    coefficients: Vec<Vec<f64>>,
}

#[derive(Serialize)]
struct SpectrumRow {
    ell: usize,
    input: f64,
    estimate: f64,
    std_error: f64,
}

#[derive(Serialize)]
struct SpectrumOutput {
    lmax: usize,
    radial: &'static str,
    seed: u64,
    n: usize,
    degrees: Vec<SpectrumRow>,
    max_off_diagonal: f64,
    within_3se: bool,
}

#[derive(Serialize)]
struct SuiteOutput {
    ell: usize,
    n: usize,
    radial: &'static str,
    seed: u64,
    tests: Vec<TestReport>,
    pass: bool,
}

#[derive(Serialize)]
struct BernsteinCase {
    report: TestReport,
    expect_reject: bool,
    consistent: bool,
}

#[derive(Serialize)]
struct BernsteinOutput {
    ell: usize,
    n: usize,
    d: usize,
    radial: &'static str,
    seed: u64,
    cases: Vec<BernsteinCase>,
    pass: bool,
}

#[derive(Serialize)]
struct OrbitOutput {
    ell: usize,
    n: usize,
    include_odd_permutation: bool,
    seed: u64,
    test: TestReport,
    pass: bool,
}

#[derive(Serialize)]
struct CalibrationOutput {
    reps: usize,
    n: usize,
    alpha: f64,
    permutations: usize,
    seed: u64,
    results: Vec<invspan::monte_carlo_stats::CalibrationResult>,
    pass: bool,
}

/// Characters are integers; report them on a 1e-12 grid so that rounding
/// noise does not leak into the output.
fn snap(x: f64) -> f64 {
    let r = x.round();
    if (x - r).abs() <= 1e-12 {
        r
    } else {
        x
    }
}

pub fn dispatch(command: Command) -> CliResult<i32> {
    match command {
        Command::VerifySpan { ell, common } => {
            let ell = usize::try_from(ell).map_err(|_| CliError::Usage(format!("--ell must be ≥ 1, got {ell}")))?;
            let v = verify_theorem(ell)?;
            let r = &v.report;
            let out = SpanOutput {
                ell,
                n: r.n,
                phi_image_dim: r.phi_image_dim,
                w_dim: r.w_dim,
                so_dim: so_dim(r.n),
                full: r.full,
                fixed_subspace_dim: v.fixed_subspace_dim,
                status: v.status,
                conjugation_rounds: r.conjugation_rounds,
                tol: r.tol,
            };
            emit(&common, &out, || flat_csv(&out))?;
            Ok(verdict(r.full && v.status == VerificationStatus::Certified))
        }
        Command::Decompose { n, common } => {
            let dec = decompose_so_n(n)?;
            let r = &dec.report;
            let cross_max = max_cross_product(&dec.v1, &dec.v2);
            let pass = r.dim_v1 == n - 1 && r.dim_v2 == (n - 1) * (n - 2) / 2 && cross_max <= 1e-10;
            let out = DecomposeOutput {
                n,
                dim_v1: r.dim_v1,
                dim_v2: r.dim_v2,
                char_v1_transposition: r.char_v1_transposition,
                char_v2_transposition: r.char_v2_transposition,
                cross_max,
                pass,
            };
            emit(&common, &out, || flat_csv(&out))?;
            Ok(verdict(pass))
        }
        Command::Character { n, common } => {
            let r = decompose_so_n(n)?.report;
            let (v1, v2) = (r.char_v1_transposition, r.char_v2_transposition);
            // A transposition has trace C(n-2, 2) - 1 on so(n); V1 is the standard representation.
            let expect_v1 = n as f64 - 3.0;
            let expect_v2 = so_dim(n - 2) as f64 - 1.0 - expect_v1;
            let max_deviation = (v1 - expect_v1).abs().max((v2 - expect_v2).abs());
            let out = CharacterOutput { n, v1: snap(v1), v2: snap(v2), max_deviation };
            emit(&common, &out, || flat_csv(&out))?;
            Ok(verdict(max_deviation <= 1e-12))
        }
        Command::BlockCheck { n, common } => {
            let r = block_form_check(n)?;
            emit(&common, &r, || flat_csv(&r))?;
            Ok(verdict(r.pass))
        }
        Command::SimulateField { n, field, common } => {
            let Field { lmax, radial, spectrum } = field;
            if n == 0 {
                return Err(CliError::Usage("--n must be positive".into()));
            }
            let spec = load_spectrum(spectrum.as_deref(), lmax)?;
            let draws = sample_many(&spec, law(radial), n, common.seed)?;
            let out = FieldOutput {
                lmax,
                radial: law(radial).name(),
                seed: common.seed,
                n,
                spectrum: spec.values.clone(),
                coefficients: draws.iter().map(|a| a.values().to_vec()).collect(),
            };
            emit(&common, &out, || {
                if let [single] = draws.as_slice() {
                    return Ok(single.to_csv());
                }
                let mut s = String::from("sample,ell,m,value\n");
                for (k, a) in draws.iter().enumerate() {
                    for line in a.to_csv().lines().skip(1) {
                        s.push_str(&format!("{k},{line}\n"));
                    }
                }
                Ok(s)
            })?;
            Ok(EXIT_OK)
        }
        Command::SpectrumEstimate { n, field, common } => {
            let Field { lmax, radial, spectrum } = field;
            if n < 2 {
                return Err(CliError::Usage("--n must be at least 2".into()));
            }
            let spec = load_spectrum(spectrum.as_deref(), lmax)?;
            let est = empirical_power_spectrum(&sample_many(&spec, law(radial), n, common.seed)?)?;
            let degrees: Vec<SpectrumRow> = (0..=lmax)
                .map(|ell| SpectrumRow {
                    ell,
                    input: spec.values[ell],
                    estimate: est.spectrum.values[ell],
                    std_error: est.std_errors[ell],
                })
                .collect();
            let within_3se = degrees
                .iter()
                .all(|d| (d.estimate - d.input).abs() <= 3.0 * d.std_error + 1e-12 * d.input.abs());
            let out = SpectrumOutput {
                lmax,
                radial: law(radial).name(),
                seed: common.seed,
                n,
                max_off_diagonal: est.max_off_diagonal(),
                within_3se,
                degrees,
            };
            emit(&common, &out, || records_csv(&out.degrees.iter().map(to_value).collect::<Vec<Value>>()))?;
            Ok(verdict(within_3se))
        }
        Command::TestTheorem2 { ell, n, radial, spectrum, stats, common } => {
            let cfg = config(stats.alpha, stats.permutations, common.seed)?;
            let spec = load_spectrum(spectrum.as_deref(), ell)?;
            if spec.values[ell] == 0.0 {
                return Err(CliError::Degenerate(format!("C_{ell} is zero: the degree-{ell} block vanishes")));
            }
            let draws = sample_many(&spec, law(radial), n, derive_seed(common.seed, 0))?;
            let rows: Vec<Vec<f64>> = draws.iter().map(|a| a.block(ell).to_vec()).collect();
            let x = SampleMatrix::from_rows(&rows)?;
            let tests = vec![
                test_exchangeability(&x, &cfg.with_seed(derive_seed(common.seed, 1)))?,
                test_rotational_invariance(&x, 1, &cfg.with_seed(derive_seed(common.seed, 2)))?,
                test_radial_angular_independence(&x, &cfg.with_seed(derive_seed(common.seed, 3)))?,
            ];
            let pass = tests.iter().all(|t| !t.reject);
            let out = SuiteOutput { ell, n, radial: law(radial).name(), seed: common.seed, tests, pass };
            emit(&common, &out, || reports_csv(&out.tests))?;
            Ok(verdict(pass))
        }
        Command::TestBernstein { ell, n, d, radial, stats, common } => {
            let cfg = config(stats.alpha, stats.permutations, common.seed)?;
            let spec = PowerSpectrum::flat(ell, 1.0)?;
            let draws = sample_many(&spec, law(radial), n, derive_seed(common.seed, 0))?;
            let marginal: Vec<f64> = draws.iter().map(|a| a.get(ell, 0)).collect();
            let gauss_marginal = test_gaussianity_1d(&marginal, &cfg.with_seed(derive_seed(common.seed, 1)))?;

            let mut rng = stream(common.seed, 2);
            let exp = Exp::new(1.0).expect("unit rate");
            let product = SampleMatrix::from_flat(d, (0..n * d).map(|_| exp.sample(&mut rng) - 1.0).collect())?;
            let gaussian = SampleMatrix::from_flat(d, (0..n * d).map(|_| rng.sample(StandardNormal)).collect())?;
            let exp_rot = test_rotational_invariance(&product, 1, &cfg.with_seed(derive_seed(common.seed, 3)))?;
            let gauss_rot = test_rotational_invariance(&gaussian, 1, &cfg.with_seed(derive_seed(common.seed, 4)))?;

            let case = |report: TestReport, expect_reject: bool| BernsteinCase {
                consistent: report.reject == expect_reject,
                report,
                expect_reject,
            };
            let cases = vec![
                case(gauss_marginal, radial != Radial::Chi),
                case(exp_rot, true),
                case(gauss_rot, false),
            ];
            let pass = cases.iter().all(|c| c.consistent);
            let out = BernsteinOutput { ell, n, d, radial: law(radial).name(), seed: common.seed, cases, pass };
            emit(&common, &out, || reports_csv(&out.cases.iter().map(|c| c.report.clone()).collect::<Vec<_>>()))?;
            Ok(verdict(pass))
        }
        Command::OrbitWalk { ell, n, odd_permutation, stats, common } => {
            let cfg = config(stats.alpha, stats.permutations, derive_seed(common.seed, 1))?;
            let mut start = vec![0.0; 2 * ell + 1];
            start[0] = 1.0;
            let states = orbit_random_walk(ell, n, odd_permutation, &start, common.seed)?;
            let test = test_uniform_on_sphere(&states, &cfg)?;
            let pass = !test.reject;
            let out = OrbitOutput { ell, n, include_odd_permutation: odd_permutation, seed: common.seed, test, pass };
            emit(&common, &out, || Ok(states.to_csv()))?;
            Ok(verdict(pass))
        }
        Command::Calibrate { reps, n, alpha, permutations, common } => {
            let cfg = config(alpha, permutations, common.seed)?;
            let results = NullTest::all()
                .into_iter()
                .enumerate()
                .map(|(k, t)| null_rejection_rate(t, reps, n, &cfg.with_seed(derive_seed(common.seed, k as u64))))
                .collect::<Result<Vec<_>, _>>()?;
            let pass = results.iter().all(|r| r.pass);
            let out = CalibrationOutput { reps, n, alpha, permutations, seed: common.seed, results, pass };
            emit(&common, &out, || records_csv(&out.results.iter().map(to_value).collect::<Vec<_>>()))?;
            Ok(verdict(pass))
        }
    }
}
