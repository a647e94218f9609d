//! Dense symmetric factorization with diagonal jitter escalation.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::{Error, Result};

pub const DEFAULT_JITTER_START: f64 = 1e-10;
pub const DEFAULT_JITTER_MAX: f64 = 1e-4;

/// Cholesky factor plus the jitter that was needed to obtain it.
pub struct Factor {
    pub chol: Cholesky<f64, Dyn>,
    /// Relative jitter added to the diagonal; zero when none was needed.
    pub jitter: f64,
}

/// Factorizes a symmetric positive definite matrix. On failure, retries with
/// `jitter * mean(|diag|)` added to the diagonal, starting at `jitter_start`
/// and multiplying by ten up to `jitter_max`.
pub fn cholesky_jittered(m: &DMatrix<f64>, jitter_start: f64, jitter_max: f64) -> Result<Factor> {
    let k = m.nrows();
    if k != m.ncols() {
        return Err(Error::Dimension(format!("matrix is {}x{}, expected square", k, m.ncols())));
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::Singular("matrix has non-finite entries".into()));
    }
    if let Some(chol) = Cholesky::new(m.clone()) {
        return Ok(Factor { chol, jitter: 0.0 });
    }
    let scale = (m.diagonal().iter().map(|d| d.abs()).sum::<f64>() / k.max(1) as f64).max(f64::MIN_POSITIVE);
    let mut jitter = jitter_start;
    while jitter <= jitter_max * (1.0 + 1e-12) {
        let mut shifted = m.clone();
        for i in 0..k {
            shifted[(i, i)] += jitter * scale;
        }
        if let Some(chol) = Cholesky::new(shifted) {
            log::debug!("cholesky succeeded with relative jitter {jitter:e}");
            return Ok(Factor { chol, jitter });
        }
        jitter *= 10.0;
    }
    Err(Error::Singular(format!(
        "{k}x{k} matrix not positive definite after jitter up to {jitter_max:e} (diag scale {scale:e})"
    )))
}

/// Solves `L^T x = z` for lower-triangular `L`, in place.
pub fn solve_upper_transpose(l: &DMatrix<f64>, z: &mut DVector<f64>) {
    let k = l.nrows();
    for i in (0..k).rev() {
        let mut acc = z[i];
        for j in i + 1..k {
            acc -= l[(j, i)] * z[j];
        }
        z[i] = acc / l[(i, i)];
    }
}

/// Solves `L x = z` for lower-triangular `L`, in place.
pub fn solve_lower(l: &DMatrix<f64>, z: &mut DVector<f64>) {
    let k = l.nrows();
    for i in 0..k {
        let mut acc = z[i];
        for j in 0..i {
            acc -= l[(i, j)] * z[j];
        }
        z[i] = acc / l[(i, i)];
    }
}
