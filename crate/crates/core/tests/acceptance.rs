//! Acceptance criteria. Each test prints one `PASS`/`FAIL` line straight to
//! stdout (bypassing the harness capture) and then asserts.

use std::io::Write;
use std::time::Instant;

use invspan::invariance_engine::{
    accumulate_w, block_form_check, decompose_so_n, max_cross_product, verify_theorem, VerificationStatus,
};
use invspan::lie_core::{so_dim, AntisymMatrix, DEFAULT_RANK_TOL};
use invspan::monte_carlo_stats::{
    null_rejection_rate, orbit_random_walk, rejection_rate, test_exchangeability,
    test_gaussianity_1d, test_radial_angular_independence, test_rotational_invariance, test_uniform_on_sphere,
    NullTest, SampleMatrix, TestConfig,
};
use invspan::rng::{derive_seed, stream, DEFAULT_SEED};
use invspan::sphere_harmonics::{
    empirical_power_spectrum, eval_all, laplacian_eigen_check, sample_many, spatial_mean_square, PowerSpectrum,
    RadialLaw, SphereGrid,
};
use rand::Rng;
use rand_distr::{Distribution, Exp, StandardNormal};

fn report(criterion: u32, pass: bool, detail: &str) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "acceptance criterion {criterion:>2}: {verdict} | {detail}");
    let _ = out.flush();
}

/// Rows of the degree-`ell` blocks of `count` draws.
fn degree_block(spec: &PowerSpectrum, law: RadialLaw, ell: usize, count: usize, seed: u64) -> SampleMatrix {
    let draws = sample_many(spec, law, count, seed).unwrap();
    let rows: Vec<Vec<f64>> = draws.iter().map(|a| a.block(ell).to_vec()).collect();
    SampleMatrix::from_rows(&rows).unwrap()
}

#[test]
fn criterion_01_span_certification() {
    let start = Instant::now();
    let mut pass = true;
    let mut dims = Vec::new();
    for ell in 1..=6 {
        let v = verify_theorem(ell).unwrap();
        let n = 2 * ell + 1;
        pass &= v.report.full && v.report.w_dim == so_dim(n) && v.status == VerificationStatus::Certified;
        dims.push(format!("ℓ={ell}:{}/{}", v.report.w_dim, so_dim(n)));
    }
    let secs = start.elapsed().as_secs_f64();
    pass &= secs <= 60.0;
    report(1, pass, &format!("span certification {} in {secs:.2} s (limit 60 s)", dims.join(" ")));
    assert!(pass);
}

#[test]
fn criterion_02_negative_control() {
    let plane = AntisymMatrix::basis_element(4, 0, 1).unwrap();
    let (span, _) = accumulate_w(&[plane], DEFAULT_RANK_TOL).unwrap();
    let pass = !span.full;
    report(
        2,
        pass,
        &format!("single plane rotation in so(4): w_dim={} of {}, full={} (expected full=false)", span.w_dim, so_dim(4), span.full),
    );
    assert!(pass, "W = so(4): every coordinate plane is a relabeling of the (1,2) plane");
}

#[test]
fn criterion_03_decomposition_dimensions() {
    let mut pass = true;
    let mut worst: f64 = 0.0;
    for n in 4..=12 {
        let dec = decompose_so_n(n).unwrap();
        pass &= dec.report.dim_v1 == n - 1 && dec.report.dim_v2 == (n - 1) * (n - 2) / 2;
        pass &= dec.v1.rank == n - 1 && dec.v2.rank == (n - 1) * (n - 2) / 2;
        worst = worst.max(max_cross_product(&dec.v1, &dec.v2));
    }
    pass &= worst <= 1e-10;
    report(3, pass, &format!("dim V1 = n-1, dim V2 = (n-1)(n-2)/2 for n=4..12; max |Re h(V1,V2)| = {worst:.2e} (tol 1e-10)"));
    assert!(pass);
}

#[test]
fn criterion_04_character_table() {
    let r = decompose_so_n(4).unwrap().report;
    let (e1, e2) = ((r.char_v1_transposition - 1.0).abs(), (r.char_v2_transposition + 1.0).abs());
    let pass = e1 <= 1e-12 && e2 <= 1e-12;
    report(
        4,
        pass,
        &format!(
            "n=4 transposition characters (V1, V2) = ({:.15}, {:.15}), errors ({e1:.1e}, {e2:.1e}) (tol 1e-12)",
            r.char_v1_transposition, r.char_v2_transposition
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_05_block_form() {
    let mut pass = true;
    let mut worst: f64 = 0.0;
    for n in 4..=10 {
        let b = block_form_check(n).unwrap();
        worst = worst.max(b.v2_border_max).max(b.v1_interior_max).max(b.cross_max);
        pass &= b.pass && b.tol <= 1e-10;
    }
    pass &= worst <= 1e-10;
    report(5, pass, &format!("block form for n=4..10, worst residual {worst:.2e} (tol 1e-10)"));
    assert!(pass);
}

#[test]
fn criterion_06_harmonic_analysis() {
    let lmax = 8;
    let grid = SphereGrid::gauss_legendre(lmax);
    let values: Vec<Vec<f64>> = grid.points.iter().map(|&(t, p)| eval_all(lmax, t, p)).collect();
    let k = (lmax + 1) * (lmax + 1);
    let mut gram_err: f64 = 0.0;
    for a in 0..k {
        for b in 0..k {
            let g: f64 = values.iter().zip(&grid.weights).map(|(y, w)| w * y[a] * y[b]).sum();
            gram_err = gram_err.max((g - if a == b { 1.0 } else { 0.0 }).abs());
        }
    }
    let mut pass = gram_err <= 1e-6;
    let (h1, h2) = (1e-2, 5e-3);
    let mut ratios = Vec::new();
    for ell in 1..=lmax {
        let (r1, r2) = (laplacian_eigen_check(ell, h1), laplacian_eigen_check(ell, h2));
        let ratio = r1 / r2;
        pass &= (3.5..=4.5).contains(&ratio) && r2 <= 1e-2 * (ell * (ell + 1)) as f64;
        ratios.push(format!("{ratio:.2}"));
    }
    report(
        6,
        pass,
        &format!(
            "Gram error up to lmax=8 {gram_err:.1e} (tol 1e-6); Laplacian residual ratio at h={h1}/{h2} for ℓ=1..8: [{}] (expect ≈4)",
            ratios.join(", ")
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_07_theorem2_pipeline() {
    let ell = 4;
    let n = 5000;
    let spec = PowerSpectrum::new((0..=ell).map(|l| 2.0 / (l as f64 + 1.0)).collect()).unwrap();
    let grid = SphereGrid::gauss_legendre(ell);
    let target_var = spec.field_variance();
    let mut pass = true;
    let mut details = Vec::new();
    for (k, law) in RadialLaw::all().into_iter().enumerate() {
        let seed = derive_seed(DEFAULT_SEED, 700 + k as u64);
        let draws = sample_many(&spec, law, n, seed).unwrap();
        let rows: Vec<Vec<f64>> = draws.iter().map(|a| a.block(ell).to_vec()).collect();
        let x = SampleMatrix::from_rows(&rows).unwrap();
        let cfg = TestConfig::new(999, 0.01, derive_seed(seed, 1));
        let exch = test_exchangeability(&x, &cfg).unwrap();
        let rot = test_rotational_invariance(&x, 1, &cfg.with_seed(derive_seed(seed, 2))).unwrap();
        let ind = test_radial_angular_independence(&x, &cfg.with_seed(derive_seed(seed, 3))).unwrap();

        let est = empirical_power_spectrum(&draws).unwrap();
        let mut spectrum_ok = true;
        for l in 0..=ell {
            let err = (est.spectrum.values[l] - spec.values[l]).abs();
            spectrum_ok &= err <= 3.0 * est.std_errors[l] + 1e-12 * spec.values[l];
        }
        let ms: Vec<f64> = draws.iter().map(|a| spatial_mean_square(a, &grid)).collect();
        let mean = ms.iter().sum::<f64>() / n as f64;
        let se = (ms.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0) / n as f64).sqrt();
        let var_ok = (mean - target_var).abs() <= 3.0 * se + 1e-12 * target_var;

        let ok = !exch.reject && !rot.reject && !ind.reject && spectrum_ok && var_ok;
        pass &= ok;
        details.push(format!(
            "{}: p(exch)={:.3} p(rot)={:.3} p(indep)={:.3} spectrum {} variance {:.4} vs {:.4}±{:.1e}",
            law.name(),
            exch.p_value,
            rot.p_value,
            ind.p_value,
            if spectrum_ok { "ok" } else { "off" },
            mean,
            target_var,
            3.0 * se
        ));
    }
    report(7, pass, &format!("Theorem-2 pipeline ℓ=4 n=5000 α=0.01; {}", details.join("; ")));
    assert!(pass);
}

#[test]
fn criterion_08_bernstein() {
    let ell = 4;
    let n = 5000;
    let spec = PowerSpectrum::flat(ell, 1.0).unwrap();
    let marginal = |law: RadialLaw, seed: u64| -> Vec<f64> { degree_block(&spec, law, ell, n, seed).column(ell) };

    let reps = 200;
    let level = TestConfig::new(199, 0.05, 0);
    let false_rej = rejection_rate(reps, derive_seed(DEFAULT_SEED, 801), |s| {
        test_gaussianity_1d(&marginal(RadialLaw::Chi, s), &level.with_seed(derive_seed(s, 1)))
    })
    .unwrap();
    let false_rate = false_rej as f64 / reps as f64;
    let level_ok = (level.alpha / 2.0..=2.0 * level.alpha).contains(&false_rate);

    let power_reps = 50;
    let demo = TestConfig::new(199, 0.01, 0);
    let lognormal = RadialLaw::LogNormal { sigma: invspan::sphere_harmonics::DEFAULT_LOGNORMAL_SIGMA };
    let ln_rej = rejection_rate(power_reps, derive_seed(DEFAULT_SEED, 802), |s| {
        test_gaussianity_1d(&marginal(lognormal, s), &demo.with_seed(derive_seed(s, 1)))
    })
    .unwrap();
    let ln_power = ln_rej as f64 / power_reps as f64;

    let exp_reps = 20;
    let exponential = Exp::new(1.0).unwrap();
    let exp_rej = rejection_rate(exp_reps, derive_seed(DEFAULT_SEED, 803), |s| {
        let mut rng = stream(s, 0);
        let data = (0..n * 5).map(|_| exponential.sample(&mut rng) - 1.0).collect();
        test_rotational_invariance(&SampleMatrix::from_flat(5, data).unwrap(), 1, &demo.with_seed(derive_seed(s, 1)))
    })
    .unwrap();
    let exp_power = exp_rej as f64 / exp_reps as f64;

    let mut rng = stream(derive_seed(DEFAULT_SEED, 804), 0);
    let gauss = SampleMatrix::from_flat(5, (0..n * 5).map(|_| rng.sample(StandardNormal)).collect()).unwrap();
    let gauss_rep = test_rotational_invariance(&gauss, 1, &demo.with_seed(derive_seed(DEFAULT_SEED, 805))).unwrap();

    let pass = level_ok && ln_power >= 0.9 && exp_power >= 0.9 && !gauss_rep.reject;
    report(
        8,
        pass,
        &format!(
            "chi marginals false-rejection {false_rej}/{reps} = {false_rate:.3} (band [0.025, 0.1]); lognormal power {ln_rej}/{power_reps} = {ln_power:.2}; \
             centred-exponential rotation power {exp_rej}/{exp_reps} = {exp_power:.2} (need ≥ 0.9); Gaussian p = {:.3}",
            gauss_rep.p_value
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_09_orbit_walk() {
    let mut pass = true;
    let mut details = Vec::new();
    for ell in [1usize, 2] {
        let dim = 2 * ell + 1;
        let mut start = vec![0.0; dim];
        start[0] = 1.0;
        for odd in [false, true] {
            let seed = derive_seed(DEFAULT_SEED, 900 + 2 * ell as u64 + odd as u64);
            let x = orbit_random_walk(ell, 10_000, odd, &start, seed).unwrap();
            let r = test_uniform_on_sphere(&x, &TestConfig::new(999, 0.01, derive_seed(seed, 1))).unwrap();
            pass &= x.n() == 10_000 && !r.reject;
            details.push(format!("ℓ={ell} odd={odd}: p={:.3}", r.p_value));
        }
    }
    report(9, pass, &format!("orbit walk uniformity, 10^4 states, α=0.01; {}", details.join(", ")));
    assert!(pass);
}

#[test]
fn criterion_10_calibration() {
    let reps = 200;
    let cfg = TestConfig::new(199, 0.05, derive_seed(DEFAULT_SEED, 1000));
    let mut pass = true;
    let mut details = Vec::new();
    for (k, test) in NullTest::all().into_iter().enumerate() {
        let r = null_rejection_rate(test, reps, 200, &cfg.with_seed(derive_seed(cfg.seed, k as u64))).unwrap();
        pass &= r.pass;
        details.push(format!("{} {}/{}", r.test, r.rejections, r.reps));
    }
    report(10, pass, &format!("null rejection rates at α=0.05 (band [α/2, 2α] = [5, 20] of 200): {}", details.join(", ")));
    assert!(pass);
}
