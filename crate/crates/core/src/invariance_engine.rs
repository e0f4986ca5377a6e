//! The permutation-conjugated span W and the V1/V2 split of so(n).
//!
//! W is the smallest subspace of so(n) that contains the image of a set of
//! generators and is closed under `A ↦ E_σ A E_σ⁻¹` for all σ in S_n. It is
//! computed by saturating under adjacent transpositions, which generate S_n.
//! V2 is the stabilizer `{A : A·(1,…,1)ᵀ = 0}` and V1 its orthogonal
//! complement under `Re h`.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lie_core::{
    bracket, conjugate_by_permutation, null_space, numerical_rank, so_dim, AntisymMatrix,
    OrthogonalMatrix, PermutationMap, SubspaceBasis, DEFAULT_RANK_TOL,
};
use crate::so3_irreps::{build_generators, common_fixed_subspace_dim};

/// Residual bound for subspace-invariance and block-form checks.
pub const CHECK_TOL: f64 = 1e-10;

/// Upper bound on saturation rounds; each round either stops or raises the rank.
const MAX_ROUNDS: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpanReport {
    pub n: usize,
    pub phi_image_dim: usize,
    pub w_dim: usize,
    pub full: bool,
    pub conjugation_rounds: usize,
    pub tol: f64,
}

/// Saturates `span(gens)` under conjugation by adjacent transpositions.
pub fn accumulate_w(gens: &[AntisymMatrix], tol: f64) -> Result<(SpanReport, SubspaceBasis)> {
    let n = gens.first().ok_or(Error::EmptyInput)?.dim();
    if n < 2 {
        return Err(Error::InvalidDimension(n, 2));
    }
    if let Some(g) = gens.iter().find(|g| g.dim() != n) {
        return Err(Error::DimensionMismatch { expected: n, got: g.dim() });
    }
    let initial: Vec<Vec<f64>> = gens.iter().map(AntisymMatrix::flatten).collect();
    let mut basis = numerical_rank(&initial, tol)?;
    let phi_image_dim = basis.rank;
    let transpositions = PermutationMap::adjacent_transpositions(n);
    let mut rounds = 0;
    while rounds < MAX_ROUNDS {
        rounds += 1;
        let current = basis.matrices();
        let mut candidates = basis.vectors.clone();
        for t in &transpositions {
            for a in &current {
                candidates.push(conjugate_by_permutation(t, a)?.flatten());
            }
        }
        if candidates.is_empty() {
            break;
        }
        let next = numerical_rank(&candidates, tol)?;
        let stable = next.rank == basis.rank;
        basis = next;
        if stable {
            break;
        }
    }
    let w_dim = basis.rank;
    let report = SpanReport {
        n,
        phi_image_dim,
        w_dim,
        full: w_dim == so_dim(n),
        conjugation_rounds: rounds,
        tol,
    };
    Ok((report, basis))
}

/// As [`accumulate_w`], for dense input that must be antisymmetric.
pub fn accumulate_w_dense(gens: &[DMatrix<f64>], tol: f64) -> Result<(SpanReport, SubspaceBasis)> {
    let gens = gens.iter().map(AntisymMatrix::from_dense).collect::<Result<Vec<_>>>()?;
    accumulate_w(&gens, tol)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum VerificationStatus {
    /// Hypotheses hold and W = so(N).
    Certified,
    /// The generators have a common fixed vector; the conclusion is not claimed.
    HypothesisViolated,
    /// Hypotheses hold but W is a proper subspace.
    SpanDeficient,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TheoremVerification {
    pub ell: Option<usize>,
    pub fixed_subspace_dim: usize,
    pub status: VerificationStatus,
    pub report: SpanReport,
}

/// Checks the fixed-vector hypothesis and then runs [`accumulate_w`].
pub fn verify_generators(gens: &[AntisymMatrix], tol: f64) -> Result<TheoremVerification> {
    let fixed = common_fixed_subspace_dim(gens)?;
    let (report, _) = accumulate_w(gens, tol)?;
    let status = match (fixed, report.full) {
        (0, true) => VerificationStatus::Certified,
        (0, false) => VerificationStatus::SpanDeficient,
        _ => VerificationStatus::HypothesisViolated,
    };
    Ok(TheoremVerification { ell: None, fixed_subspace_dim: fixed, status, report })
}

/// Runs the span certificate for the degree-ℓ irrep acting on R^(2ℓ+1).
pub fn verify_theorem(ell: usize) -> Result<TheoremVerification> {
    let gens = build_generators(ell)?;
    let mut v = verify_generators(&gens.to_vec(), DEFAULT_RANK_TOL)?;
    v.ell = Some(ell);
    Ok(v)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecompositionReport {
    pub n: usize,
    pub dim_v1: usize,
    pub dim_v2: usize,
    pub char_v1_transposition: f64,
    pub char_v2_transposition: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    pub report: DecompositionReport,
    pub v1: SubspaceBasis,
    pub v2: SubspaceBasis,
}

/// Linear map `upper-triangle coordinates ↦ A v` for `v` fixed, scaled so that
/// it acts on flattened (√2) coordinates.
fn annihilator_system(n: usize, v: &[f64]) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(n, so_dim(n));
    let mut k = 0;
    for i in 0..n {
        for j in (i + 1)..n {
            // (E_ij - E_ji) v = v_j e_i - v_i e_j
            m[(i, k)] += v[j] / std::f64::consts::SQRT_2;
            m[(j, k)] -= v[i] / std::f64::consts::SQRT_2;
            k += 1;
        }
    }
    m
}

fn columns_to_basis(n: usize, cols: &DMatrix<f64>, tol: f64) -> SubspaceBasis {
    let vectors: Vec<Vec<f64>> = cols.column_iter().map(|c| c.iter().copied().collect()).collect();
    SubspaceBasis { n, rank: vectors.len(), vectors, tol }
}

/// Max residual of `Λ_σ b` outside the span, over basis vectors `b`.
pub fn invariance_residual(basis: &SubspaceBasis, sigma: &PermutationMap) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for a in basis.matrices() {
        let moved = conjugate_by_permutation(sigma, &a)?.flatten();
        worst = worst.max(basis.residual(&moved));
    }
    Ok(worst)
}

/// Splits so(n), `n ≥ 4`, into V1 (dim n-1) and V2 (dim (n-1)(n-2)/2).
pub fn decompose_so_n(n: usize) -> Result<Decomposition> {
    if n < 4 {
        return Err(Error::UnsupportedDimension(n));
    }
    let ones = vec![1.0; n];
    let v2_cols = null_space(&annihilator_system(n, &ones), DEFAULT_RANK_TOL);
    let v2 = columns_to_basis(n, &v2_cols, DEFAULT_RANK_TOL);

    // Orthogonal complement of V2 in R^{so_dim(n)}.
    let v2t = DMatrix::from_fn(v2.rank, so_dim(n), |i, j| v2.vectors[i][j]);
    let v1_cols = if v2.rank == 0 {
        DMatrix::identity(so_dim(n), so_dim(n))
    } else {
        null_space(&v2t, DEFAULT_RANK_TOL)
    };
    let v1 = columns_to_basis(n, &v1_cols, DEFAULT_RANK_TOL);

    for t in PermutationMap::adjacent_transpositions(n) {
        for b in [&v1, &v2] {
            let r = invariance_residual(b, &t)?;
            if r > CHECK_TOL {
                return Err(Error::InvarianceViolation(r));
            }
        }
    }
    let sigma = PermutationMap::transposition(n, 0, 1)?;
    let report = DecompositionReport {
        n,
        dim_v1: v1.rank,
        dim_v2: v2.rank,
        char_v1_transposition: character_on_subspace(&v1, &sigma)?,
        char_v2_transposition: character_on_subspace(&v2, &sigma)?,
    };
    Ok(Decomposition { report, v1, v2 })
}

/// Trace of `A ↦ E_σ A E_σ⁻¹` restricted to an invariant subspace.
pub fn character_on_subspace(basis: &SubspaceBasis, sigma: &PermutationMap) -> Result<f64> {
    let r = invariance_residual(basis, sigma)?;
    if r > CHECK_TOL {
        return Err(Error::InvarianceViolation(r));
    }
    let mut trace = 0.0;
    for (b, a) in basis.vectors.iter().zip(basis.matrices()) {
        let moved = conjugate_by_permutation(sigma, &a)?.flatten();
        trace += crate::lie_core::dot(b, &moved);
    }
    Ok(trace)
}

/// Max cross inner product `|Re h(a, b)|` between two bases.
pub fn max_cross_product(a: &SubspaceBasis, b: &SubspaceBasis) -> f64 {
    a.vectors
        .iter()
        .flat_map(|x| b.vectors.iter().map(move |y| crate::lie_core::dot(x, y).abs()))
        .fold(0.0, f64::max)
}

/// Max residual of `[b_i, b_j]` outside `basis`, over basis pairs.
pub fn bracket_closure_residual(basis: &SubspaceBasis) -> Result<f64> {
    let mats = basis.matrices();
    let mut worst: f64 = 0.0;
    for (i, a) in mats.iter().enumerate() {
        for b in &mats[i + 1..] {
            worst = worst.max(basis.residual(&bracket(a, b)?.flatten()));
        }
    }
    Ok(worst)
}

/// Rotation with `B e_1 = (1,…,1)/√n` and `det B = +1`: a Householder
/// reflection followed by a sign flip of the last column.
pub fn stabilizer_frame(n: usize) -> Result<OrthogonalMatrix> {
    if n < 2 {
        return Err(Error::InvalidDimension(n, 2));
    }
    let target = DVector::from_element(n, 1.0 / (n as f64).sqrt());
    let mut e1 = DVector::zeros(n);
    e1[0] = 1.0;
    let w = &e1 - &target;
    let h = DMatrix::<f64>::identity(n, n) - (&w * w.transpose()) * (2.0 / w.norm_squared());
    let mut b = h;
    if b.determinant() < 0.0 {
        let last = n - 1;
        b.column_mut(last).neg_mut();
    }
    OrthogonalMatrix::new(b)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlockFormReport {
    pub n: usize,
    pub pass: bool,
    /// max |entry| in the first row/column of `B⁻¹ V2 B`
    pub v2_border_max: f64,
    /// max |entry| outside the first row/column of `B⁻¹ V1 B`
    pub v1_interior_max: f64,
    /// max |Re h| between conjugated V1 and V2 bases
    pub cross_max: f64,
    pub tol: f64,
}

/// Verifies the block shapes of `B⁻¹ V1 B` and `B⁻¹ V2 B`.
pub fn block_form_check(n: usize) -> Result<BlockFormReport> {
    let dec = decompose_so_n(n)?;
    let binv = stabilizer_frame(n)?.inverse();
    let conj = |basis: &SubspaceBasis| -> Result<Vec<AntisymMatrix>> {
        basis.matrices().iter().map(|a| binv.conjugate(a)).collect()
    };
    let c1 = conj(&dec.v1)?;
    let c2 = conj(&dec.v2)?;
    let mut v2_border: f64 = 0.0;
    for a in &c2 {
        for k in 0..n {
            v2_border = v2_border.max(a.get(0, k).abs()).max(a.get(k, 0).abs());
        }
    }
    let mut v1_interior: f64 = 0.0;
    for a in &c1 {
        for i in 1..n {
            for j in 1..n {
                v1_interior = v1_interior.max(a.get(i, j).abs());
            }
        }
    }
    let flat = |ms: &[AntisymMatrix]| SubspaceBasis {
        n,
        vectors: ms.iter().map(AntisymMatrix::flatten).collect(),
        rank: ms.len(),
        tol: DEFAULT_RANK_TOL,
    };
    let cross = max_cross_product(&flat(&c1), &flat(&c2));
    Ok(BlockFormReport {
        n,
        pass: v2_border <= CHECK_TOL && v1_interior <= CHECK_TOL && cross <= CHECK_TOL,
        v2_border_max: v2_border,
        v1_interior_max: v1_interior,
        cross_max: cross,
        tol: CHECK_TOL,
    })
}
