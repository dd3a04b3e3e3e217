//! Small dense linear-algebra helpers shared by the estimators and the
//! surrogate: jittered Cholesky factorization, PSD pseudo-inversion and
//! stabilized log-determinants.

use nalgebra::{Cholesky, DMatrix, Dyn};

use crate::error::{Error, Result};

/// First rung of the jitter ladder.
pub const JITTER_MIN: f64 = 1e-8;
/// Last rung of the jitter ladder; beyond this the matrix is reported as
/// not positive definite.
pub const JITTER_MAX: f64 = 1e-4;

/// Cholesky factorization with escalating diagonal jitter.
///
/// Tries the matrix as-is, then adds `1e-8 * I` and multiplies by 10 until
/// `1e-4 * I`. Returns the factor together with the jitter that was needed
/// so callers can surface it; escalations are also logged.
pub fn cholesky_with_jitter(mat: &DMatrix<f64>) -> Result<(Cholesky<f64, Dyn>, f64)> {
    debug_assert_eq!(mat.nrows(), mat.ncols());
    if let Some(chol) = Cholesky::new(mat.clone()) {
        return Ok((chol, 0.0));
    }
    let n = mat.nrows();
    let mut jitter = JITTER_MIN;
    while jitter <= JITTER_MAX * (1.0 + 1e-12) {
        let mut bumped = mat.clone();
        for i in 0..n {
            bumped[(i, i)] += jitter;
        }
        if let Some(chol) = Cholesky::new(bumped) {
            log::debug!("cholesky needed jitter {jitter:.1e}");
            return Ok((chol, jitter));
        }
        jitter *= 10.0;
    }
    let min_eig = min_symmetric_eigenvalue(mat);
    Err(Error::NotPositiveDefinite {
        min_eig,
        max_jitter: JITTER_MAX,
    })
}

/// Smallest eigenvalue of a symmetric matrix (symmetrized first to guard
/// against round-off asymmetry).
pub fn min_symmetric_eigenvalue(mat: &DMatrix<f64>) -> f64 {
    let sym = (mat + mat.transpose()) * 0.5;
    sym.symmetric_eigen().eigenvalues.min()
}

/// Pseudo-inverse of a symmetric PSD matrix via eigendecomposition.
///
/// Eigenvalues below `rel_tol` times the largest are treated as zero. A
/// block whose largest eigenvalue is numerically zero cannot be inverted
/// meaningfully and is reported as an error rather than silently mapped to
/// the zero matrix.
pub fn psd_pinv(mat: &DMatrix<f64>, rel_tol: f64) -> Result<DMatrix<f64>> {
    debug_assert_eq!(mat.nrows(), mat.ncols());
    if mat.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("pseudo-inverse input"));
    }
    let sym = (mat + mat.transpose()) * 0.5;
    let eig = sym.symmetric_eigen();
    let max_eig = eig.eigenvalues.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !(max_eig > 1e-280) {
        return Err(Error::PseudoInverse(format!(
            "landmark block is numerically zero (largest eigenvalue {max_eig:.3e})"
        )));
    }
    let cutoff = rel_tol * max_eig;
    let n = mat.nrows();
    let mut scaled = eig.eigenvectors.clone();
    for (j, &l) in eig.eigenvalues.iter().enumerate() {
        let inv = if l > cutoff { 1.0 / l } else { 0.0 };
        for i in 0..n {
            scaled[(i, j)] *= inv;
        }
    }
    Ok(&scaled * eig.eigenvectors.transpose())
}

/// `ln det(I + mat / noise)` via Cholesky, with an eigenvalue fallback that
/// tolerates tiny negative eigenvalues of `mat` and rejects larger ones.
pub fn ln_det_i_plus_scaled(mat: &DMatrix<f64>, noise: f64, eig_tol: f64) -> Result<f64> {
    debug_assert_eq!(mat.nrows(), mat.ncols());
    if !noise.is_finite() || noise <= 0.0 {
        return Err(Error::InvalidParameter {
            name: "noise",
            message: format!("must be a positive finite number, got {noise}"),
        });
    }
    let n = mat.nrows();
    let mut shifted = mat / noise;
    for i in 0..n {
        shifted[(i, i)] += 1.0;
    }
    if let Some(chol) = Cholesky::new(shifted.clone()) {
        let ld: f64 = chol.l_dirty().diagonal().iter().map(|v| v.ln()).sum();
        return Ok(2.0 * ld);
    }
    // Cholesky can fail on a matrix that is PSD up to round-off; fall back
    // to eigenvalues and fail only on genuinely negative curvature.
    let eig = (&shifted + shifted.transpose()).scale(0.5).symmetric_eigen();
    let min_allowed = -eig_tol * (1.0 + eig.eigenvalues.amax());
    let mut ld = 0.0;
    for &l in eig.eigenvalues.iter() {
        if l < min_allowed {
            return Err(Error::NotPositiveDefinite {
                min_eig: (l - 1.0) * noise,
                max_jitter: 0.0,
            });
        }
        ld += l.max(1e-300).ln();
    }
    Ok(ld)
}
