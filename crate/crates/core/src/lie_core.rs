//! Dense real linear algebra on so(n).
//!
//! Antisymmetric matrices are stored densely but always built by mirroring a
//! strict upper triangle, so `Aᵀ = -A` holds bit-for-bit. Flattened vectors
//! use the strict upper triangle in row-major order, scaled by √2, which makes
//! the Euclidean product of two flattened matrices equal to `tr(A Bᵀ)`, the
//! real part of the Hermitian product restricted to real matrices.

use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{Complex, DMatrix, DVector};

use crate::error::{Error, Result};

/// Default relative singular-value threshold for numerical rank.
pub const DEFAULT_RANK_TOL: f64 = 1e-8;

/// Tolerance for `‖QᵀQ - I‖_max` and `|det Q - ±1|`.
pub const ORTHOGONALITY_TOL: f64 = 1e-10;

/// Dimension of so(n).
pub const fn so_dim(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

/// Inverse of [`so_dim`]: the `n` with `n(n-1)/2 = len`, if any.
pub fn n_from_so_dim(len: usize) -> Option<usize> {
    let n = ((1.0 + (1.0 + 8.0 * len as f64).sqrt()) / 2.0).round() as usize;
    (n >= 2 && so_dim(n) == len).then_some(n)
}

/// An element of so(n), exactly antisymmetric.
#[derive(Debug, Clone, PartialEq)]
pub struct AntisymMatrix {
    m: DMatrix<f64>,
}

impl AntisymMatrix {
    pub fn zeros(n: usize) -> Self {
        Self { m: DMatrix::zeros(n, n) }
    }

    /// Builds from the strict upper triangle of `m`; the lower part is ignored.
    fn mirror_upper(m: &DMatrix<f64>) -> Self {
        let n = m.nrows();
        let mut out = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in (i + 1)..n {
                out[(i, j)] = m[(i, j)];
                out[(j, i)] = -m[(i, j)];
            }
        }
        Self { m: out }
    }

    /// `E_ij - E_ji` (0-based, `i != j`).
    pub fn basis_element(n: usize, i: usize, j: usize) -> Result<Self> {
        if i >= n || j >= n || i == j {
            return Err(Error::InvalidArgument(format!(
                "basis index ({i}, {j}) invalid for n = {n}"
            )));
        }
        let mut m = DMatrix::zeros(n, n);
        m[(i, j)] = 1.0;
        m[(j, i)] = -1.0;
        Ok(Self { m })
    }

    /// From unscaled strict-upper-triangle entries, row-major.
    pub fn from_upper(n: usize, upper: &[f64]) -> Result<Self> {
        if upper.len() != so_dim(n) {
            return Err(Error::DimensionMismatch { expected: so_dim(n), got: upper.len() });
        }
        let mut m = DMatrix::zeros(n, n);
        let mut k = 0;
        for i in 0..n {
            for j in (i + 1)..n {
                m[(i, j)] = upper[k];
                m[(j, i)] = -upper[k];
                k += 1;
            }
        }
        Ok(Self { m })
    }

    /// Accepts `m` only if it is exactly antisymmetric.
    pub fn from_dense(m: &DMatrix<f64>) -> Result<Self> {
        Self::from_dense_tol(m, 0.0)
    }

    /// Accepts `m` if `max |m + mᵀ| ≤ tol`; the result is `(m - mᵀ)/2`.
    pub fn from_dense_tol(m: &DMatrix<f64>, tol: f64) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::DimensionMismatch { expected: m.nrows(), got: m.ncols() });
        }
        if m.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        let dev = (m + m.transpose()).amax();
        if dev > tol {
            return Err(Error::NotAntisymmetric(dev));
        }
        Ok(Self::mirror_upper(&((m - m.transpose()) * 0.5)))
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.m[(i, j)]
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.m
    }

    pub fn max_abs(&self) -> f64 {
        self.m.amax()
    }

    /// √2-scaled strict upper triangle, row-major.
    pub fn flatten(&self) -> Vec<f64> {
        let n = self.dim();
        let mut v = Vec::with_capacity(so_dim(n));
        for i in 0..n {
            for j in (i + 1)..n {
                v.push(std::f64::consts::SQRT_2 * self.m[(i, j)]);
            }
        }
        v
    }

    /// Inverse of [`AntisymMatrix::flatten`].
    pub fn unflatten(n: usize, v: &[f64]) -> Result<Self> {
        let upper: Vec<f64> = v.iter().map(|x| x / std::f64::consts::SQRT_2).collect();
        Self::from_upper(n, &upper)
    }

    pub fn to_complex(&self) -> DMatrix<Complex<f64>> {
        self.m.map(|x| Complex::new(x, 0.0))
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: other.dim() });
        }
        Ok(())
    }
}

impl Add for &AntisymMatrix {
    type Output = AntisymMatrix;
    fn add(self, rhs: &AntisymMatrix) -> AntisymMatrix {
        AntisymMatrix { m: &self.m + &rhs.m }
    }
}

impl Sub for &AntisymMatrix {
    type Output = AntisymMatrix;
    fn sub(self, rhs: &AntisymMatrix) -> AntisymMatrix {
        AntisymMatrix { m: &self.m - &rhs.m }
    }
}

impl Mul<f64> for &AntisymMatrix {
    type Output = AntisymMatrix;
    fn mul(self, s: f64) -> AntisymMatrix {
        AntisymMatrix { m: &self.m * s }
    }
}

impl Neg for &AntisymMatrix {
    type Output = AntisymMatrix;
    fn neg(self) -> AntisymMatrix {
        AntisymMatrix { m: -&self.m }
    }
}

/// Canonical basis `E_ij - E_ji`, `i < j`, in row-major order.
pub fn so_basis(n: usize) -> Result<Vec<AntisymMatrix>> {
    if n < 2 {
        return Err(Error::InvalidDimension(n, 2));
    }
    let mut out = Vec::with_capacity(so_dim(n));
    for i in 0..n {
        for j in (i + 1)..n {
            out.push(AntisymMatrix::basis_element(n, i, j)?);
        }
    }
    Ok(out)
}

/// Commutator `AB - BA`.
pub fn bracket(a: &AntisymMatrix, b: &AntisymMatrix) -> Result<AntisymMatrix> {
    a.check_same(b)?;
    let ab = &a.m * &b.m;
    let ba = &b.m * &a.m;
    Ok(AntisymMatrix::mirror_upper(&(ab - ba)))
}

/// `tr(A Bᵀ)`: the real part of the Hermitian product for real matrices.
pub fn real_inner(a: &AntisymMatrix, b: &AntisymMatrix) -> Result<f64> {
    a.check_same(b)?;
    Ok(a.m.dot(&b.m))
}

/// A bijection of `{0, …, n-1}`, stored as `images[i] = σ(i)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PermutationMap {
    images: Vec<usize>,
}

impl PermutationMap {
    pub fn new(images: Vec<usize>) -> Result<Self> {
        let n = images.len();
        let mut seen = vec![false; n];
        for &k in &images {
            if k >= n || seen[k] {
                return Err(Error::InvalidPermutation(format!("{images:?} is not a bijection")));
            }
            seen[k] = true;
        }
        Ok(Self { images })
    }

    /// From images written in `1..=n` notation.
    pub fn from_one_based(images: &[usize]) -> Result<Self> {
        if images.contains(&0) {
            return Err(Error::InvalidPermutation("one-based images must be ≥ 1".into()));
        }
        Self::new(images.iter().map(|k| k - 1).collect())
    }

    pub fn identity(n: usize) -> Self {
        Self { images: (0..n).collect() }
    }

    /// Swap of `i` and `j` (0-based).
    pub fn transposition(n: usize, i: usize, j: usize) -> Result<Self> {
        if i >= n || j >= n {
            return Err(Error::InvalidPermutation(format!("({i} {j}) out of range for n = {n}")));
        }
        let mut images: Vec<usize> = (0..n).collect();
        images.swap(i, j);
        Ok(Self { images })
    }

    /// The `n - 1` adjacent transpositions `(k k+1)`, which generate S_n.
    pub fn adjacent_transpositions(n: usize) -> Vec<Self> {
        (0..n.saturating_sub(1))
            .map(|k| {
                let mut images: Vec<usize> = (0..n).collect();
                images.swap(k, k + 1);
                Self { images }
            })
            .collect()
    }

    pub fn n(&self) -> usize {
        self.images.len()
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    pub fn one_based(&self) -> Vec<usize> {
        self.images.iter().map(|k| k + 1).collect()
    }

    pub fn apply(&self, i: usize) -> usize {
        self.images[i]
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        if self.n() != other.n() {
            return Err(Error::DimensionMismatch { expected: self.n(), got: other.n() });
        }
        Ok(Self { images: other.images.iter().map(|&k| self.images[k]).collect() })
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.n()];
        for (i, &k) in self.images.iter().enumerate() {
            inv[k] = i;
        }
        Self { images: inv }
    }

    /// +1 for even, -1 for odd permutations.
    pub fn sign(&self) -> i32 {
        let n = self.n();
        let mut seen = vec![false; n];
        let mut transpositions = 0;
        for start in 0..n {
            if seen[start] {
                continue;
            }
            let mut len = 0;
            let mut k = start;
            while !seen[k] {
                seen[k] = true;
                k = self.images[k];
                len += 1;
            }
            transpositions += len - 1;
        }
        if transpositions % 2 == 0 {
            1
        } else {
            -1
        }
    }

    /// Applies the coordinate relabeling `w[σ(i)] = v[i]`, i.e. `E_σ v`.
    pub fn permute_vector(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; v.len()];
        for (i, &k) in self.images.iter().enumerate() {
            out[k] = v[i];
        }
        out
    }
}

/// A real orthogonal matrix; `special` records `det = +1`.
#[derive(Debug, Clone, PartialEq)]
pub struct OrthogonalMatrix {
    m: DMatrix<f64>,
    special: bool,
}

impl OrthogonalMatrix {
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::DimensionMismatch { expected: m.nrows(), got: m.ncols() });
        }
        if m.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        let n = m.nrows();
        let dev = (m.transpose() * &m - DMatrix::<f64>::identity(n, n)).amax();
        if dev > ORTHOGONALITY_TOL {
            return Err(Error::NotOrthogonal(dev));
        }
        let det = m.determinant();
        let special = (det - 1.0).abs() <= ORTHOGONALITY_TOL;
        if !special && (det + 1.0).abs() > ORTHOGONALITY_TOL {
            return Err(Error::NotOrthogonal((det.abs() - 1.0).abs()));
        }
        Ok(Self { m, special })
    }

    pub fn identity(n: usize) -> Self {
        Self { m: DMatrix::identity(n, n), special: true }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn is_special(&self) -> bool {
        self.special
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.m
    }

    pub fn determinant(&self) -> f64 {
        self.m.determinant()
    }

    pub fn orthogonality_defect(&self) -> f64 {
        let n = self.dim();
        (self.m.transpose() * &self.m - DMatrix::<f64>::identity(n, n)).amax()
    }

    pub fn inverse(&self) -> Self {
        Self { m: self.m.transpose(), special: self.special }
    }

    /// Product, re-validated.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: other.dim() });
        }
        Self::new(&self.m * &other.m)
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        (&self.m * DVector::from_column_slice(v)).as_slice().to_vec()
    }

    /// Conjugation `Q A Q⁻¹ = Q A Qᵀ`.
    pub fn conjugate(&self, a: &AntisymMatrix) -> Result<AntisymMatrix> {
        if self.dim() != a.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: a.dim() });
        }
        Ok(AntisymMatrix::mirror_upper(&(&self.m * a.as_matrix() * self.m.transpose())))
    }
}

/// `E_σ` with `E_σ e_i = e_{σ(i)}`, so `det E_σ = sign(σ)`.
pub fn permutation_matrix(sigma: &PermutationMap) -> OrthogonalMatrix {
    let n = sigma.n();
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        m[(sigma.apply(i), i)] = 1.0;
    }
    OrthogonalMatrix { m, special: sigma.sign() == 1 }
}

/// `E_σ A E_σ⁻¹`, computed as the exact relabeling `out[σ(i)][σ(j)] = a[i][j]`.
pub fn conjugate_by_permutation(sigma: &PermutationMap, a: &AntisymMatrix) -> Result<AntisymMatrix> {
    let n = a.dim();
    if sigma.n() != n {
        return Err(Error::DimensionMismatch { expected: n, got: sigma.n() });
    }
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            m[(sigma.apply(i), sigma.apply(j))] = a.m[(i, j)];
        }
    }
    Ok(AntisymMatrix { m })
}

/// `exp(tA)`, special orthogonal for antisymmetric `A`.
pub fn matrix_exponential(a: &AntisymMatrix, t: f64) -> Result<OrthogonalMatrix> {
    if !t.is_finite() || a.m.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    OrthogonalMatrix::new((&a.m * t).exp())
}

/// `h(A, B) = tr(A · conj(B)ᵀ)` on complex antisymmetric matrices.
pub fn hermitian_product(
    a: &DMatrix<Complex<f64>>,
    b: &DMatrix<Complex<f64>>,
) -> Result<Complex<f64>> {
    for m in [a, b] {
        if !m.is_square() {
            return Err(Error::DimensionMismatch { expected: m.nrows(), got: m.ncols() });
        }
        let dev = (m + m.transpose()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if dev > 0.0 {
            return Err(Error::NotAntisymmetric(dev));
        }
    }
    if a.shape() != b.shape() {
        return Err(Error::DimensionMismatch { expected: a.nrows(), got: b.nrows() });
    }
    Ok(a.iter().zip(b.iter()).map(|(x, y)| x * y.conj()).sum())
}

/// Orthonormal basis of a subspace of so(n), in flattened coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct SubspaceBasis {
    pub n: usize,
    pub vectors: Vec<Vec<f64>>,
    pub rank: usize,
    pub tol: f64,
}

impl SubspaceBasis {
    pub fn ambient_dim(&self) -> usize {
        so_dim(self.n)
    }

    /// Coordinates of `v` along the basis vectors.
    pub fn coefficients(&self, v: &[f64]) -> Vec<f64> {
        self.vectors.iter().map(|b| dot(b, v)).collect()
    }

    /// Euclidean norm of the component of `v` orthogonal to the subspace.
    pub fn residual(&self, v: &[f64]) -> f64 {
        let mut r = v.to_vec();
        for b in &self.vectors {
            let c = dot(b, v);
            for (ri, bi) in r.iter_mut().zip(b) {
                *ri -= c * bi;
            }
        }
        r.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn matrices(&self) -> Vec<AntisymMatrix> {
        self.vectors
            .iter()
            .map(|v| AntisymMatrix::unflatten(self.n, v).expect("basis vector length matches n"))
            .collect()
    }

    /// Max deviation of the Gram matrix from the identity.
    pub fn orthonormality_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, a) in self.vectors.iter().enumerate() {
            for (j, b) in self.vectors.iter().enumerate() {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((dot(a, b) - target).abs());
            }
        }
        worst
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Singular values (descending) and matching right singular vectors of `m`.
/// Rows are padded with zeros so the full set of `ncols` right vectors is returned.
fn right_singular_system(m: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let (r, c) = m.shape();
    let padded = if r < c {
        let mut p = DMatrix::zeros(c, c);
        p.view_mut((0, 0), (r, c)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let values = order.iter().map(|&k| svd.singular_values[k]).collect();
    let sorted = DMatrix::from_fn(order.len(), c, |i, j| v_t[(order[i], j)]);
    (values, sorted)
}

fn count_above(values: &[f64], tol_factor: f64) -> usize {
    let max = values.first().copied().unwrap_or(0.0);
    if max == 0.0 {
        return 0;
    }
    values.iter().filter(|&&s| s > tol_factor * max).count()
}

/// Numerical rank of `m` under the relative threshold `tol_factor · σ_max`.
pub fn matrix_rank(m: &DMatrix<f64>, tol_factor: f64) -> usize {
    if m.is_empty() {
        return 0;
    }
    let (values, _) = right_singular_system(m);
    count_above(&values, tol_factor)
}

/// Orthonormal basis of the null space `{x : m x = 0}` as columns.
pub fn null_space(m: &DMatrix<f64>, tol_factor: f64) -> DMatrix<f64> {
    let c = m.ncols();
    let (values, v_t) = right_singular_system(m);
    let rank = count_above(&values, tol_factor);
    DMatrix::from_fn(c, c - rank, |i, j| v_t[(rank + j, i)])
}

/// Orthonormalizes `vectors` (flattened so(n) elements) by SVD and keeps the
/// directions whose singular value exceeds `tol_factor · σ_max`.
pub fn numerical_rank(vectors: &[Vec<f64>], tol_factor: f64) -> Result<SubspaceBasis> {
    let first = vectors.first().ok_or(Error::EmptyInput)?;
    let len = first.len();
    let n = n_from_so_dim(len).ok_or(Error::DimensionMismatch { expected: 1, got: len })?;
    if let Some(bad) = vectors.iter().find(|v| v.len() != len) {
        return Err(Error::DimensionMismatch { expected: len, got: bad.len() });
    }
    if vectors.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    let m = DMatrix::from_fn(vectors.len(), len, |i, j| vectors[i][j]);
    let (values, v_t) = right_singular_system(&m);
    let rank = count_above(&values, tol_factor);
    let basis = (0..rank).map(|k| v_t.row(k).iter().copied().collect()).collect();
    Ok(SubspaceBasis { n, vectors: basis, rank, tol: tol_factor })
}
