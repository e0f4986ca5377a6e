use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::lie_core::OrthogonalMatrix;

/// Haar-distributed element of SO(d).
///
/// QR of a Gaussian matrix with the signs of `diag(R)` pushed into `Q` gives
/// Haar measure on O(d); negating the first column when `det = -1` maps it to
/// Haar measure on SO(d).
pub fn haar_rotation<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Result<OrthogonalMatrix> {
    if d < 2 {
        return Err(Error::InvalidDimension(d, 2));
    }
    let g = DMatrix::<f64>::from_fn(d, d, |_, _| rng.sample(StandardNormal));
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..d {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    if q.determinant() < 0.0 {
        q.column_mut(0).neg_mut();
    }
    OrthogonalMatrix::new(q)
}
