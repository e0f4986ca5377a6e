//! Real irreducible representations of SO(3).
//!
//! The degree-ℓ representation acts on coefficient vectors indexed by
//! `m = -ℓ..=ℓ` in the real spherical-harmonic basis of
//! [`crate::sphere_harmonics`]; a rotation `g` maps the coefficients of `f` to
//! those of `x ↦ f(g⁻¹x)`. The generators are the images of the standard
//! rotation generators `K_x, K_y, K_z` of so(3), so that
//! `rep_matrix(z-rotation by α) = exp(α·gen_z)`.

use std::f64::consts::{PI, TAU};

use nalgebra::{Complex, DMatrix, Matrix3};
use rand::Rng;

use crate::error::{Error, Result};
use crate::lie_core::{bracket, matrix_exponential, matrix_rank, AntisymMatrix, OrthogonalMatrix, DEFAULT_RANK_TOL};

/// Largest imaginary part tolerated when moving generators to the real basis.
const REALNESS_TOL: f64 = 1e-12;

/// Images of the so(3) basis under the degree-ℓ representation.
#[derive(Debug, Clone, PartialEq)]
pub struct IrrepGenerators {
    pub ell: usize,
    pub gen_x: AntisymMatrix,
    pub gen_y: AntisymMatrix,
    pub gen_z: AntisymMatrix,
}

impl IrrepGenerators {
    pub fn dim(&self) -> usize {
        2 * self.ell + 1
    }

    pub fn as_array(&self) -> [&AntisymMatrix; 3] {
        [&self.gen_x, &self.gen_y, &self.gen_z]
    }

    pub fn to_vec(&self) -> Vec<AntisymMatrix> {
        vec![self.gen_x.clone(), self.gen_y.clone(), self.gen_z.clone()]
    }

    /// Max residual of `[x,y]=z`, `[y,z]=x`, `[z,x]=y`.
    pub fn bracket_defect(&self) -> f64 {
        let (x, y, z) = (&self.gen_x, &self.gen_y, &self.gen_z);
        [(x, y, z), (y, z, x), (z, x, y)]
            .iter()
            .map(|(a, b, c)| (&bracket(a, b).expect("same dim") - c).max_abs())
            .fold(0.0, f64::max)
    }

    /// Max deviation of `gen_x² + gen_y² + gen_z²` from `-ℓ(ℓ+1)·I`.
    pub fn casimir_defect(&self) -> f64 {
        let d = self.dim();
        let cas: DMatrix<f64> = self
            .as_array()
            .iter()
            .map(|g| g.as_matrix() * g.as_matrix())
            .fold(DMatrix::zeros(d, d), |acc, m| acc + m);
        let l = self.ell as f64;
        (cas + DMatrix::<f64>::identity(d, d) * (l * (l + 1.0))).amax()
    }
}

/// Unitary taking complex harmonic coordinates (C-S phase) to the real basis:
/// column `μ` holds the complex expansion of the real harmonic of order `μ`.
fn complex_to_real(ell: usize) -> DMatrix<Complex<f64>> {
    let d = 2 * ell + 1;
    let l = ell as i64;
    let idx = |m: i64| (m + l) as usize;
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut c = DMatrix::from_element(d, d, Complex::new(0.0, 0.0));
    for mu in -l..=l {
        let sign = if mu.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        match mu.signum() {
            0 => c[(idx(0), idx(0))] = Complex::new(1.0, 0.0),
            1 => {
                c[(idx(-mu), idx(mu))] = Complex::new(s, 0.0);
                c[(idx(mu), idx(mu))] = Complex::new(sign * s, 0.0);
            }
            _ => {
                c[(idx(mu), idx(mu))] = Complex::new(0.0, s);
                c[(idx(-mu), idx(mu))] = Complex::new(0.0, -sign * s);
            }
        }
    }
    c
}

fn to_real_antisym(m: &DMatrix<Complex<f64>>) -> Result<AntisymMatrix> {
    let imag = m.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    if imag > REALNESS_TOL {
        return Err(Error::InvalidArgument(format!("generator not real (imag {imag:e})")));
    }
    AntisymMatrix::from_dense_tol(&m.map(|z| z.re), REALNESS_TOL)
}

/// Generators of the real degree-ℓ irreducible representation (`ℓ ≥ 1`).
pub fn build_generators(ell: usize) -> Result<IrrepGenerators> {
    if ell < 1 {
        return Err(Error::InvalidDegree(ell as i64));
    }
    let d = 2 * ell + 1;
    let l = ell as f64;
    let zero = Complex::new(0.0, 0.0);
    // Angular momentum in the |ℓ,m⟩ basis, m = -ℓ..ℓ.
    let mut jz = DMatrix::from_element(d, d, zero);
    let mut jp = DMatrix::from_element(d, d, zero);
    for k in 0..d {
        let m = k as f64 - l;
        jz[(k, k)] = Complex::new(m, 0.0);
        if k + 1 < d {
            jp[(k + 1, k)] = Complex::new((l * (l + 1.0) - m * (m + 1.0)).sqrt(), 0.0);
        }
    }
    let jm = jp.adjoint();
    let i = Complex::new(0.0, 1.0);
    let jx = (&jp + &jm) * Complex::new(0.5, 0.0);
    let jy = (&jp - &jm) * (Complex::new(0.5, 0.0) / i);
    // K ↦ -i J, then into the real basis: G = C† (-iJ) C.
    let c = complex_to_real(ell);
    let c_adj = c.adjoint();
    let to_real = |j: &DMatrix<Complex<f64>>| to_real_antisym(&(&c_adj * (j * (-i)) * &c));
    Ok(IrrepGenerators { ell, gen_x: to_real(&jx)?, gen_y: to_real(&jy)?, gen_z: to_real(&jz)? })
}

/// Z-Y-Z Euler angles `g = R_z(α) R_y(β) R_z(γ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotationSpec {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl RotationSpec {
    pub const IDENTITY: Self = Self { alpha: 0.0, beta: 0.0, gamma: 0.0 };

    /// Canonicalizes to `β ∈ [0, π]`, `α, γ ∈ [0, 2π)`.
    pub fn new(alpha: f64, beta: f64, gamma: f64) -> Result<Self> {
        if !(alpha.is_finite() && beta.is_finite() && gamma.is_finite()) {
            return Err(Error::NonFinite);
        }
        let (mut a, mut b, mut c) = (alpha, beta.rem_euclid(TAU), gamma);
        if b > PI {
            // R_y(β) = R_z(π) R_y(2π-β) R_z(-π)
            b = TAU - b;
            a += PI;
            c -= PI;
        }
        Ok(Self { alpha: a.rem_euclid(TAU), beta: b, gamma: c.rem_euclid(TAU) })
    }

    /// Haar-distributed rotation: α, γ uniform, cos β uniform on [-1, 1].
    pub fn random_haar<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let alpha = rng.random::<f64>() * TAU;
        let gamma = rng.random::<f64>() * TAU;
        let beta = (2.0 * rng.random::<f64>() - 1.0).clamp(-1.0, 1.0).acos();
        Self { alpha, beta, gamma }
    }

    /// The rotation as a 3×3 matrix on (x, y, z).
    pub fn to_matrix3(&self) -> Matrix3<f64> {
        rot_z(self.alpha) * rot_y(self.beta) * rot_z(self.gamma)
    }

    /// Z-Y-Z angles of a rotation matrix.
    pub fn from_matrix3(r: &Matrix3<f64>) -> Result<Self> {
        if r.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        let beta = r[(2, 2)].clamp(-1.0, 1.0).acos();
        let sb = beta.sin();
        let (alpha, gamma) = if sb > 1e-12 {
            (r[(1, 2)].atan2(r[(0, 2)]), r[(2, 1)].atan2(-r[(2, 0)]))
        } else if r[(2, 2)] > 0.0 {
            // R = R_z(α + γ)
            (r[(1, 0)].atan2(r[(0, 0)]), 0.0)
        } else {
            // R = R_z(α) R_y(π) R_z(γ) has R[0][0] = -cos(α - γ), R[1][0] = -sin(α - γ)
            ((-r[(1, 0)]).atan2(-r[(0, 0)]), 0.0)
        };
        Self::new(alpha, beta, gamma)
    }
}

fn rot_z(t: f64) -> Matrix3<f64> {
    let (s, c) = t.sin_cos();
    Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0)
}

fn rot_y(t: f64) -> Matrix3<f64> {
    let (s, c) = t.sin_cos();
    Matrix3::new(c, 0.0, s, 0.0, 1.0, 0.0, -s, 0.0, c)
}

/// `exp(α·gen_z) · exp(β·gen_y) · exp(γ·gen_z)`.
pub fn rep_matrix(gens: &IrrepGenerators, r: &RotationSpec) -> Result<OrthogonalMatrix> {
    if !(r.alpha.is_finite() && r.beta.is_finite() && r.gamma.is_finite()) {
        return Err(Error::NonFinite);
    }
    let a = matrix_exponential(&gens.gen_z, r.alpha)?;
    let b = matrix_exponential(&gens.gen_y, r.beta)?;
    let c = matrix_exponential(&gens.gen_z, r.gamma)?;
    OrthogonalMatrix::new(a.as_matrix() * b.as_matrix() * c.as_matrix())
}

fn check_generators(gens: &[AntisymMatrix]) -> Result<usize> {
    let d = gens.first().ok_or(Error::EmptyInput)?.dim();
    if let Some(g) = gens.iter().find(|g| g.dim() != d) {
        return Err(Error::DimensionMismatch { expected: d, got: g.dim() });
    }
    Ok(d)
}

/// Dimension of `{X : X G = G X for every G in gens}`.
pub fn commutant_dimension(gens: &[AntisymMatrix]) -> Result<usize> {
    let d = check_generators(gens)?;
    let id = DMatrix::<f64>::identity(d, d);
    // column-major vec: vec(G X - X G) = (I ⊗ G - Gᵀ ⊗ I) vec(X)
    let mut system = DMatrix::zeros(gens.len() * d * d, d * d);
    for (k, g) in gens.iter().enumerate() {
        let g = g.as_matrix();
        let block = id.kronecker(g) - g.transpose().kronecker(&id);
        system.view_mut((k * d * d, 0), (d * d, d * d)).copy_from(&block);
    }
    Ok(d * d - matrix_rank(&system, DEFAULT_RANK_TOL))
}

/// Dimension of the common kernel `∩ ker G`.
pub fn common_fixed_subspace_dim(gens: &[AntisymMatrix]) -> Result<usize> {
    let d = check_generators(gens)?;
    let mut system = DMatrix::zeros(gens.len() * d, d);
    for (k, g) in gens.iter().enumerate() {
        system.view_mut((k * d, 0), (d, d)).copy_from(g.as_matrix());
    }
    Ok(d - matrix_rank(&system, DEFAULT_RANK_TOL))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie_core::so_basis;

    /// Coordinates (y, z, x) carry the ℓ = 1 real harmonics (m = -1, 0, 1).
    fn ell1_from_xyz(r: &Matrix3<f64>) -> DMatrix<f64> {
        let p = [1usize, 2, 0];
        DMatrix::from_fn(3, 3, |i, j| r[(p[i], p[j])])
    }

    #[test]
    fn generator_invariants_for_small_degrees() {
        for ell in 1..=8 {
            let g = build_generators(ell).unwrap();
            for m in g.as_array() {
                assert_eq!(m.as_matrix().transpose(), -m.as_matrix());
                assert_eq!(m.dim(), 2 * ell + 1);
            }
            assert!(g.bracket_defect() <= 1e-10, "ell {ell} brackets {}", g.bracket_defect());
            assert!(g.casimir_defect() <= 1e-8, "ell {ell} casimir {}", g.casimir_defect());
        }
        assert_eq!(build_generators(0), Err(Error::InvalidDegree(0)));
    }

    #[test]
    fn ell2_casimir_is_minus_six() {
        let g = build_generators(2).unwrap();
        let cas = g.as_array().iter().map(|m| m.as_matrix() * m.as_matrix()).fold(DMatrix::zeros(5, 5), |a, b| a + b);
        assert!((cas + DMatrix::<f64>::identity(5, 5) * 6.0).amax() < 1e-12);
    }

    #[test]
    fn ell3_brackets_by_direct_multiplication() {
        let g = build_generators(3).unwrap();
        let (x, y, z) = (g.gen_x.as_matrix(), g.gen_y.as_matrix(), g.gen_z.as_matrix());
        assert!((x * y - y * x - z).amax() <= 1e-10);
        assert!((y * z - z * y - x).amax() <= 1e-10);
        assert!((z * x - x * z - y).amax() <= 1e-10);
    }

    #[test]
    fn ell1_spans_so3_and_matches_rotation_generators() {
        let g = build_generators(1).unwrap();
        let flat: Vec<Vec<f64>> = g.as_array().iter().map(|m| m.flatten()).collect();
        assert_eq!(crate::lie_core::numerical_rank(&flat, DEFAULT_RANK_TOL).unwrap().rank, 3);
        assert_eq!(so_basis(3).unwrap().len(), 3);
        for (gen, axis) in [(&g.gen_z, 2usize), (&g.gen_y, 1), (&g.gen_x, 0)] {
            let t = 0.37;
            let r3 = match axis {
                2 => rot_z(t),
                1 => rot_y(t),
                _ => rot_y(FRAC_PI_2) * rot_z(t) * rot_y(-FRAC_PI_2),
            };
            let got = matrix_exponential(gen, t).unwrap();
            assert!((got.as_matrix() - ell1_from_xyz(&r3)).amax() < 1e-12, "axis {axis}");
        }
    }

    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn rep_matrix_identity_and_plane_rotation() {
        let g = build_generators(3).unwrap();
        let id = rep_matrix(&g, &RotationSpec::IDENTITY).unwrap();
        assert!((id.as_matrix() - DMatrix::identity(7, 7)).amax() < 1e-14);

        let g1 = build_generators(1).unwrap();
        let alpha = 0.9;
        let r = rep_matrix(&g1, &RotationSpec::new(alpha, 0.0, 0.0).unwrap()).unwrap();
        // m = -1, 0, 1 ↔ (y, z, x): rotation in the (y, x) pair, z fixed.
        let (s, c) = alpha.sin_cos();
        let want = DMatrix::from_row_slice(3, 3, &[c, 0.0, s, 0.0, 1.0, 0.0, -s, 0.0, c]);
        assert!((r.as_matrix() - want).amax() < 1e-12);

        let bad = RotationSpec { alpha: f64::NAN, beta: 0.0, gamma: 0.0 };
        assert_eq!(rep_matrix(&g1, &bad), Err(Error::NonFinite));
    }

    #[test]
    fn ell1_rep_equals_rotation_matrix() {
        let g1 = build_generators(1).unwrap();
        let mut rng = crate::rng::seeded(11);
        for _ in 0..20 {
            let r = RotationSpec::random_haar(&mut rng);
            let d = rep_matrix(&g1, &r).unwrap();
            assert!((d.as_matrix() - ell1_from_xyz(&r.to_matrix3())).amax() < 1e-12);
        }
    }

    #[test]
    fn determinant_and_homomorphism() {
        let mut rng = crate::rng::seeded(12);
        for ell in [1usize, 2, 4, 6] {
            let g = build_generators(ell).unwrap();
            for _ in 0..100 / 4 {
                let r = RotationSpec::random_haar(&mut rng);
                assert!((rep_matrix(&g, &r).unwrap().determinant() - 1.0).abs() <= 1e-10);
            }
            for _ in 0..20 {
                let r1 = RotationSpec::random_haar(&mut rng);
                let r2 = RotationSpec::random_haar(&mut rng);
                let composed = RotationSpec::from_matrix3(&(r1.to_matrix3() * r2.to_matrix3())).unwrap();
                let lhs = rep_matrix(&g, &r1).unwrap().as_matrix() * rep_matrix(&g, &r2).unwrap().as_matrix();
                let rhs = rep_matrix(&g, &composed).unwrap();
                assert!((lhs - rhs.as_matrix()).amax() <= 1e-8);
            }
        }
    }

    #[test]
    fn euler_canonicalization() {
        let r = RotationSpec::new(0.3, -0.7, 1.1).unwrap();
        assert!((0.0..=PI).contains(&r.beta));
        let raw = rot_z(0.3) * rot_y(-0.7) * rot_z(1.1);
        assert!((r.to_matrix3() - raw).amax() < 1e-12);
        let r = RotationSpec::new(-7.0, 4.0, 9.0).unwrap();
        assert!((r.to_matrix3() - rot_z(-7.0) * rot_y(4.0) * rot_z(9.0)).amax() < 1e-12);
        assert!(RotationSpec::new(0.0, f64::INFINITY, 0.0).is_err());
        for m in [rot_z(0.4), rot_z(0.4) * rot_y(PI) * rot_z(1.2)] {
            let back = RotationSpec::from_matrix3(&m).unwrap();
            assert!((back.to_matrix3() - m).amax() < 1e-12);
        }
    }

    #[test]
    fn irreducibility_certificates() {
        for ell in 1..=8 {
            let g = build_generators(ell).unwrap().to_vec();
            assert_eq!(commutant_dimension(&g).unwrap(), 1, "ell {ell}");
            assert_eq!(common_fixed_subspace_dim(&g).unwrap(), 0, "ell {ell}");
        }
    }

    fn pad(a: &AntisymMatrix, extra: usize, offset: usize) -> AntisymMatrix {
        let d = a.dim();
        let mut m = DMatrix::zeros(d + extra, d + extra);
        m.view_mut((offset, offset), (d, d)).copy_from(a.as_matrix());
        AntisymMatrix::from_dense(&m).unwrap()
    }

    #[test]
    fn direct_sum_commutant_is_four_dimensional() {
        let g = build_generators(1).unwrap();
        let sum: Vec<AntisymMatrix> = g
            .as_array()
            .iter()
            .map(|a| &pad(a, 3, 0) + &pad(a, 3, 3))
            .collect();
        assert_eq!(commutant_dimension(&sum).unwrap(), 4);
    }

    #[test]
    fn reducible_inputs_have_fixed_vectors() {
        let g = build_generators(2).unwrap();
        let padded: Vec<AntisymMatrix> = g.as_array().iter().map(|a| pad(a, 1, 0)).collect();
        assert_eq!(common_fixed_subspace_dim(&padded).unwrap(), 1);
        let zeros = vec![AntisymMatrix::zeros(3); 3];
        assert_eq!(common_fixed_subspace_dim(&zeros).unwrap(), 3);
        assert_eq!(commutant_dimension(&[]), Err(Error::EmptyInput));
    }
}
