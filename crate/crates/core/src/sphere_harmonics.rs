//! Real spherical harmonics on S² and isotropic random fields built from them.
//!
//! `Y_ℓm` uses associated Legendre functions without the Condon–Shortley
//! phase: `√2 P̄_ℓ^m cos(mφ)` for `m > 0`, `√2 P̄_ℓ^|m| sin(|m|φ)` for `m < 0`,
//! and `P̄_ℓ^0` for `m = 0`, each with unit L² norm on the sphere. Coefficient
//! blocks are ordered `m = -ℓ..=ℓ`, matching [`crate::so3_irreps`].

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::str::FromStr;

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rng;
use crate::so3_irreps::{build_generators, rep_matrix, IrrepGenerators, RotationSpec};

pub const DEFAULT_LMAX: usize = 16;
pub const MAX_LMAX: usize = 64;

/// Log-scale of the lognormal radial law.
pub const DEFAULT_LOGNORMAL_SIGMA: f64 = 0.5;

/// Flat index of `(ℓ, m)` in a triangular coefficient array.
pub const fn lm_index(ell: usize, m: i64) -> usize {
    ((ell * ell + ell) as i64 + m) as usize
}

/// Normalized associated Legendre values `P̄_ℓ^m(cos θ)`, `0 ≤ m ≤ ℓ ≤ lmax`,
/// stored at `ℓ(ℓ+1)/2 + m`, with `∫ (P̄_ℓ^m)² dσ = 1` over the sphere for `m = 0`.
fn legendre_table(lmax: usize, theta: f64) -> Vec<f64> {
    let (s, c) = theta.sin_cos();
    let tri = |l: usize, m: usize| l * (l + 1) / 2 + m;
    let mut p = vec![0.0; (lmax + 1) * (lmax + 2) / 2];
    p[0] = 1.0 / (4.0 * PI).sqrt();
    for m in 1..=lmax {
        let mf = m as f64;
        p[tri(m, m)] = ((2.0 * mf + 1.0) / (2.0 * mf)).sqrt() * s * p[tri(m - 1, m - 1)];
    }
    for m in 0..lmax {
        let mf = m as f64;
        p[tri(m + 1, m)] = (2.0 * mf + 3.0).sqrt() * c * p[tri(m, m)];
        for l in (m + 2)..=lmax {
            let lf = l as f64;
            let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
            let b = (((lf - 1.0).powi(2) - mf * mf) / (4.0 * (lf - 1.0).powi(2) - 1.0)).sqrt();
            p[tri(l, m)] = a * (c * p[tri(l - 1, m)] - b * p[tri(l - 2, m)]);
        }
    }
    p
}

fn check_angles(theta: f64, phi: f64) -> Result<()> {
    if !theta.is_finite() || !phi.is_finite() {
        return Err(Error::NonFinite);
    }
    if !(0.0..=PI).contains(&theta) {
        return Err(Error::InvalidArgument(format!("theta = {theta} outside [0, π]")));
    }
    Ok(())
}

/// All `Y_ℓm(θ, φ)` for `ℓ ≤ lmax`, at [`lm_index`].
pub fn eval_all(lmax: usize, theta: f64, phi: f64) -> Vec<f64> {
    let p = legendre_table(lmax, theta);
    let mut out = vec![0.0; (lmax + 1) * (lmax + 1)];
    for l in 0..=lmax {
        let base = l * (l + 1) / 2;
        out[lm_index(l, 0)] = p[base];
        for m in 1..=l {
            let (sm, cm) = (m as f64 * phi).sin_cos();
            let v = std::f64::consts::SQRT_2 * p[base + m];
            out[lm_index(l, m as i64)] = v * cm;
            out[lm_index(l, -(m as i64))] = v * sm;
        }
    }
    out
}

/// The real spherical harmonic `Y_ℓm(θ, φ)`.
pub fn eval_ylm(ell: usize, m: i64, theta: f64, phi: f64) -> Result<f64> {
    if m.unsigned_abs() as usize > ell {
        return Err(Error::InvalidOrder { ell, m });
    }
    check_angles(theta, phi)?;
    Ok(eval_all(ell, theta, phi)[lm_index(ell, m)])
}

/// Gauss–Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 { 1.0 } else if n == 1 { x } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = nf * (x * pn - pm) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = x;
        nodes[n - 1 - i] = -x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        // the Newton iterate for the middle node can land on ±tiny
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// Quadrature points `(θ, φ)` with weights summing to 4π.
#[derive(Debug, Clone, PartialEq)]
pub struct SphereGrid {
    pub points: Vec<(f64, f64)>,
    pub weights: Vec<f64>,
}

impl SphereGrid {
    /// `(lmax+1)` Gauss–Legendre nodes in cos θ times `(2 lmax + 1)` uniform φ;
    /// exact for products of harmonics of degree ≤ lmax.
    pub fn gauss_legendre(lmax: usize) -> Self {
        let (x, w) = gauss_legendre(lmax + 1);
        let nphi = 2 * lmax + 1;
        let dphi = 2.0 * PI / nphi as f64;
        let mut points = Vec::with_capacity(x.len() * nphi);
        let mut weights = Vec::with_capacity(x.len() * nphi);
        for (xi, wi) in x.iter().zip(&w) {
            let theta = xi.clamp(-1.0, 1.0).acos();
            for k in 0..nphi {
                points.push((theta, k as f64 * dphi));
                weights.push(wi * dphi);
            }
        }
        Self { points, weights }
    }

    /// Unit-weight grid for pointwise evaluation (weights are not a quadrature).
    pub fn from_points(points: Vec<(f64, f64)>) -> Result<Self> {
        for &(t, p) in &points {
            check_angles(t, p)?;
        }
        let w = 4.0 * PI / points.len().max(1) as f64;
        Ok(Self { weights: vec![w; points.len()], points })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// `Y_ℓm` at every point: rows are points, columns follow [`lm_index`].
    pub fn harmonic_matrix(&self, lmax: usize) -> DMatrix<f64> {
        let nc = (lmax + 1) * (lmax + 1);
        let mut m = DMatrix::zeros(self.len(), nc);
        for (i, &(t, p)) in self.points.iter().enumerate() {
            for (j, v) in eval_all(lmax, t, p).into_iter().enumerate() {
                m[(i, j)] = v;
            }
        }
        m
    }
}

/// Angular power spectrum `C_ℓ`, `ℓ = 0..=lmax`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PowerSpectrum {
    pub values: Vec<f64>,
}

impl PowerSpectrum {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyInput);
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(Error::InvalidArgument(format!("C_ell must be finite and ≥ 0, got {v}")));
        }
        Ok(Self { values })
    }

    pub fn flat(lmax: usize, c: f64) -> Result<Self> {
        Self::new(vec![c; lmax + 1])
    }

    pub fn lmax(&self) -> usize {
        self.values.len() - 1
    }

    /// `Σ (2ℓ+1)/(4π) C_ℓ`: pointwise variance of the field.
    pub fn field_variance(&self) -> f64 {
        self.values
            .iter()
            .enumerate()
            .map(|(l, c)| (2 * l + 1) as f64 / (4.0 * PI) * c)
            .sum()
    }

    /// Parses `ℓ C_ℓ` lines; `#` starts a comment. Degrees not listed are 0.
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries: Vec<(usize, f64)> = vec![];
        for (k, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: &str| Error::Parse { line: k + 1, msg: msg.to_string() };
            let mut parts = line.split_whitespace();
            let ell: usize = parts
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| err("expected non-negative integer degree"))?;
            let c: f64 = parts.next().and_then(|s| s.parse().ok()).ok_or_else(|| err("expected C_ell value"))?;
            if parts.next().is_some() {
                return Err(err("expected exactly two fields"));
            }
            if ell > MAX_LMAX {
                return Err(err(&format!("degree exceeds cap {MAX_LMAX}")));
            }
            if !c.is_finite() || c < 0.0 {
                return Err(err("C_ell must be finite and ≥ 0"));
            }
            if entries.iter().any(|(l, _)| *l == ell) {
                return Err(err("duplicate degree"));
            }
            entries.push((ell, c));
        }
        let lmax = entries.iter().map(|(l, _)| *l).max().ok_or(Error::EmptyInput)?;
        let mut values = vec![0.0; lmax + 1];
        for (l, c) in entries {
            values[l] = c;
        }
        Self::new(values)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::from("# ell C_ell\n");
        for (l, c) in self.values.iter().enumerate() {
            let _ = writeln!(s, "{l} {c:e}");
        }
        s
    }

    /// Truncates or zero-pads to `lmax`.
    pub fn with_lmax(&self, lmax: usize) -> Self {
        let mut values = self.values.clone();
        values.resize(lmax + 1, 0.0);
        Self { values }
    }
}

/// Real coefficients `a_ℓm`, `0 ≤ ℓ ≤ lmax`, `-ℓ ≤ m ≤ ℓ`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientArray {
    lmax: usize,
    values: Vec<f64>,
}

impl CoefficientArray {
    pub fn zeros(lmax: usize) -> Self {
        Self { lmax, values: vec![0.0; (lmax + 1) * (lmax + 1)] }
    }

    pub fn from_values(lmax: usize, values: Vec<f64>) -> Result<Self> {
        let want = (lmax + 1) * (lmax + 1);
        if values.len() != want {
            return Err(Error::DimensionMismatch { expected: want, got: values.len() });
        }
        Ok(Self { lmax, values })
    }

    pub fn lmax(&self) -> usize {
        self.lmax
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, ell: usize, m: i64) -> f64 {
        self.values[lm_index(ell, m)]
    }

    pub fn set(&mut self, ell: usize, m: i64, v: f64) {
        self.values[lm_index(ell, m)] = v;
    }

    /// The `2ℓ+1` coefficients of degree ℓ.
    pub fn block(&self, ell: usize) -> &[f64] {
        &self.values[ell * ell..(ell + 1) * (ell + 1)]
    }

    pub fn block_mut(&mut self, ell: usize) -> &mut [f64] {
        &mut self.values[ell * ell..(ell + 1) * (ell + 1)]
    }

    /// Applies the rotation to every block.
    pub fn rotated(&self, r: &RotationSpec) -> Result<Self> {
        let mut out = self.clone();
        for ell in 1..=self.lmax {
            let gens = build_generators(ell)?;
            let rotated = rotate_coefficients(&gens, r, self.block(ell))?;
            out.block_mut(ell).copy_from_slice(&rotated);
        }
        Ok(out)
    }

    /// CSV with header `ell,m,value`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("ell,m,value\n");
        for l in 0..=self.lmax {
            for m in -(l as i64)..=(l as i64) {
                let _ = writeln!(s, "{l},{m},{:e}", self.get(l, m));
            }
        }
        s
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, h)) if h.trim() == "ell,m,value" => {}
            _ => return Err(Error::Parse { line: 1, msg: "expected header ell,m,value".into() }),
        }
        let mut rows = vec![];
        for (k, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            let err = || Error::Parse { line: k + 1, msg: format!("bad row '{line}'") };
            let f: Vec<&str> = line.split(',').map(str::trim).collect();
            if f.len() != 3 {
                return Err(err());
            }
            let l: usize = f[0].parse().map_err(|_| err())?;
            let m: i64 = f[1].parse().map_err(|_| err())?;
            let v: f64 = f[2].parse().map_err(|_| err())?;
            if m.unsigned_abs() as usize > l {
                return Err(err());
            }
            rows.push((l, m, v));
        }
        let lmax = rows.iter().map(|r| r.0).max().ok_or(Error::EmptyInput)?;
        let mut out = Self::zeros(lmax);
        for (l, m, v) in rows {
            out.set(l, m, v);
        }
        Ok(out)
    }
}

/// Law of the radius `η_ℓ` with `E[η_ℓ²] = (2ℓ+1) C_ℓ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RadialLaw {
    /// `η = √C · χ_{2ℓ+1}`: coefficients are jointly Gaussian.
    Chi,
    /// `η = exp(μ + σZ)` with μ fixed by the second moment.
    LogNormal { sigma: f64 },
    /// `η = √((2ℓ+1) C)`: coefficients uniform on a sphere.
    Constant,
}

impl RadialLaw {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Chi => "chi",
            Self::LogNormal { .. } => "lognormal",
            Self::Constant => "constant",
        }
    }

    pub fn all() -> [Self; 3] {
        [Self::Chi, Self::LogNormal { sigma: DEFAULT_LOGNORMAL_SIGMA }, Self::Constant]
    }

    fn sample_radius<R: Rng + ?Sized>(&self, dim: usize, second_moment: f64, rng: &mut R) -> f64 {
        match *self {
            Self::Chi => {
                let chi2: f64 = ChiSquared::new(dim as f64).expect("dim ≥ 1").sample(rng);
                (second_moment / dim as f64 * chi2).sqrt()
            }
            Self::LogNormal { sigma } => {
                let mu = 0.5 * second_moment.ln() - sigma * sigma;
                let z: f64 = rng.sample(StandardNormal);
                (mu + sigma * z).exp()
            }
            Self::Constant => second_moment.sqrt(),
        }
    }
}

impl FromStr for RadialLaw {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "chi" => Ok(Self::Chi),
            "lognormal" => Ok(Self::LogNormal { sigma: DEFAULT_LOGNORMAL_SIGMA }),
            "constant" => Ok(Self::Constant),
            other => Err(Error::UnknownRadialLaw(other.to_string())),
        }
    }
}

/// Uniform point on the unit sphere of R^dim.
pub fn uniform_on_sphere<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-300 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

/// Draws `a_ℓ· = η_ℓ u_ℓ` independently per degree.
pub fn sample_coefficients_with<R: Rng + ?Sized>(
    spec: &PowerSpectrum,
    law: RadialLaw,
    rng: &mut R,
) -> Result<CoefficientArray> {
    let lmax = spec.lmax();
    if lmax > MAX_LMAX {
        return Err(Error::InvalidArgument(format!("lmax {lmax} exceeds cap {MAX_LMAX}")));
    }
    if let RadialLaw::LogNormal { sigma } = law {
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(Error::InvalidArgument(format!("lognormal sigma must be > 0, got {sigma}")));
        }
    }
    let mut out = CoefficientArray::zeros(lmax);
    for (ell, &c) in spec.values.iter().enumerate() {
        let dim = 2 * ell + 1;
        // draw u and η unconditionally so the stream layout does not depend on C_ℓ
        let u = uniform_on_sphere(dim, rng);
        let eta = law.sample_radius(dim, dim as f64 * c.max(f64::MIN_POSITIVE), rng);
        if c == 0.0 {
            continue;
        }
        for (a, ui) in out.block_mut(ell).iter_mut().zip(u) {
            *a = eta * ui;
        }
    }
    Ok(out)
}

pub fn sample_coefficients(spec: &PowerSpectrum, law: RadialLaw, seed: u64) -> Result<CoefficientArray> {
    sample_coefficients_with(spec, law, &mut rng::seeded(seed))
}

/// `count` independent draws; draw `i` uses stream `(seed, i)`.
pub fn sample_many(spec: &PowerSpectrum, law: RadialLaw, count: usize, seed: u64) -> Result<Vec<CoefficientArray>> {
    (0..count)
        .into_par_iter()
        .map(|i| sample_coefficients_with(spec, law, &mut rng::stream(seed, i as u64)))
        .collect()
}

/// `T(x) = Σ a_ℓm Y_ℓm(x)` at every grid point.
pub fn synthesize(coeffs: &CoefficientArray, grid: &SphereGrid) -> Vec<f64> {
    grid.points
        .iter()
        .map(|&(t, p)| {
            eval_all(coeffs.lmax, t, p).iter().zip(&coeffs.values).map(|(y, a)| y * a).sum()
        })
        .collect()
}

/// `D_ℓ(r) · a` for a single degree-ℓ block.
pub fn rotate_coefficients(gens: &IrrepGenerators, r: &RotationSpec, a: &[f64]) -> Result<Vec<f64>> {
    if a.len() != gens.dim() {
        return Err(Error::DimensionMismatch { expected: gens.dim(), got: a.len() });
    }
    Ok(rep_matrix(gens, r)?.apply(a))
}

/// Max `|Δ Y_ℓm + ℓ(ℓ+1) Y_ℓm|` over all `m` at sample points with
/// `θ ∈ [0.2, π - 0.2]`, using second-order central differences of the
/// coordinate form `(1/sin θ) ∂_θ (sin θ ∂_θ) + (1/sin² θ) ∂²_φ`.
pub fn laplacian_eigen_check(ell: usize, h: f64) -> f64 {
    let lambda = (ell * (ell + 1)) as f64;
    let mut worst: f64 = 0.0;
    let n_theta = 9;
    let n_phi = 7;
    for i in 0..n_theta {
        let theta = 0.2 + (PI - 0.4) * i as f64 / (n_theta - 1) as f64;
        for j in 0..n_phi {
            let phi = 0.3 + 2.0 * PI * j as f64 / n_phi as f64;
            let y = |t: f64, p: f64| eval_all(ell, t, p);
            let c = y(theta, phi);
            let tp = y(theta + h, phi);
            let tm = y(theta - h, phi);
            let pp = y(theta, phi + h);
            let pm = y(theta, phi - h);
            let s = theta.sin();
            let sp = (theta + 0.5 * h).sin();
            let sm = (theta - 0.5 * h).sin();
            for m in -(ell as i64)..=(ell as i64) {
                let k = lm_index(ell, m);
                let d_theta = (sp * (tp[k] - c[k]) - sm * (c[k] - tm[k])) / (h * h * s);
                let d_phi = (pp[k] - 2.0 * c[k] + pm[k]) / (h * h * s * s);
                worst = worst.max((d_theta + d_phi + lambda * c[k]).abs());
            }
        }
    }
    worst
}

/// Monte Carlo estimate of the spectrum and within-degree correlations.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumEstimate {
    pub spectrum: PowerSpectrum,
    /// standard error of each `Ĉ_ℓ` across samples
    pub std_errors: Vec<f64>,
    /// `E[a_ℓm a_ℓm']` estimates per degree, `(2ℓ+1)×(2ℓ+1)`
    pub cross: Vec<DMatrix<f64>>,
    pub n_samples: usize,
}

impl SpectrumEstimate {
    /// Largest off-diagonal `|E[a_ℓm a_ℓm']|` over all degrees.
    pub fn max_off_diagonal(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for c in &self.cross {
            for i in 0..c.nrows() {
                for j in 0..c.ncols() {
                    if i != j {
                        worst = worst.max(c[(i, j)].abs());
                    }
                }
            }
        }
        worst
    }
}

/// `Ĉ_ℓ = mean over samples and m of a_ℓm²`.
pub fn empirical_power_spectrum(samples: &[CoefficientArray]) -> Result<SpectrumEstimate> {
    let first = samples.first().ok_or(Error::EmptyInput)?;
    let lmax = first.lmax;
    if let Some(s) = samples.iter().find(|s| s.lmax != lmax) {
        return Err(Error::DimensionMismatch { expected: lmax, got: s.lmax });
    }
    let n = samples.len() as f64;
    let mut values = vec![0.0; lmax + 1];
    let mut std_errors = vec![0.0; lmax + 1];
    let mut cross = Vec::with_capacity(lmax + 1);
    for ell in 0..=lmax {
        let d = 2 * ell + 1;
        let per_sample: Vec<f64> =
            samples.iter().map(|s| s.block(ell).iter().map(|a| a * a).sum::<f64>() / d as f64).collect();
        let mean = per_sample.iter().sum::<f64>() / n;
        let var = if samples.len() > 1 {
            per_sample.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        values[ell] = mean;
        std_errors[ell] = (var / n).sqrt();
        let mut c = DMatrix::zeros(d, d);
        for s in samples {
            let b = s.block(ell);
            for i in 0..d {
                for j in 0..d {
                    c[(i, j)] += b[i] * b[j];
                }
            }
        }
        cross.push(c / n);
    }
    Ok(SpectrumEstimate { spectrum: PowerSpectrum { values }, std_errors, cross, n_samples: samples.len() })
}

/// Per-sample spatial mean of `T²` over a quadrature grid.
pub fn spatial_mean_square(coeffs: &CoefficientArray, grid: &SphereGrid) -> f64 {
    let t = synthesize(coeffs, grid);
    t.iter().zip(&grid.weights).map(|(v, w)| w * v * v).sum::<f64>() / grid.total_weight()
}
