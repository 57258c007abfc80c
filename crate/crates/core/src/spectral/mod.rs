//! Leading eigenvalues of a balanced matrix.
//!
//! Small matrices go through a full complex Schur decomposition; large ones
//! through a restarted Krylov-Schur iteration projected onto a modest
//! subspace. Both paths end with explicit residual checks against the
//! original matrix, so a returned report is trustworthy independent of which
//! engine produced it.

mod cmat;
mod krylov;
mod schur;

use num_complex::Complex64;

use crate::dense::Dense;
use crate::error::{Error, Result};
use crate::flowmatrix::FlowMatrix;
use cmat::CMat;
use krylov::{krylov_schur_leading, matvec};
use schur::{schur as schur_decompose, sort_schur_descending, triangular_eigenvector};

/// Engine controls. The defaults suit production use; tests lower
/// `dense_cutoff` to force the Krylov path on small matrices.
#[derive(Debug, Clone)]
pub struct EigOptions {
    /// Matrices of order at most this use the dense Schur path.
    pub dense_cutoff: usize,
    /// Largest acceptable ||A x - lambda x||_2 with ||x||_2 = 1.
    pub residual_tol: f64,
    /// Krylov subspace dimension; 0 picks max(2k + 8, 24) capped at n.
    pub subspace: usize,
    /// Restart budget for the Krylov path.
    pub max_restarts: usize,
}

impl Default for EigOptions {
    fn default() -> Self {
        EigOptions {
            dense_cutoff: 512,
            residual_tol: 1e-8,
            subspace: 0,
            max_restarts: 200,
        }
    }
}

/// Leading eigenvalues with their verified residuals.
///
/// `eigenvalues[i]` and `residuals[i]` describe the i-th pair in modulus-
/// descending order (ties: descending real part, then descending imaginary
/// part).
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumReport {
    pub k: usize,
    pub eigenvalues: Vec<Complex64>,
    pub residuals: Vec<f64>,
}

/// Presentation order: modulus descending, ties by descending real then
/// imaginary part. Modulus and real part are bucketed at 1e-9 so that values
/// differing only by rounding noise fall through to the tie rules; rounding
/// keeps the comparator a consistent total order.
fn eig_comparator(a: &Complex64, b: &Complex64) -> std::cmp::Ordering {
    let q = |x: f64| (x / 1e-9).round();
    (q(b.norm()), q(b.re), b.im)
        .partial_cmp(&(q(a.norm()), q(a.re), a.im))
        .expect("finite eigenvalues")
}

/// ||A x - lambda x||_2 for unit x, evaluated against the original real
/// matrix.
fn explicit_residual(a: &Dense, lambda: Complex64, x: &[Complex64]) -> f64 {
    let ax = matvec(a, x);
    ax.iter()
        .zip(x)
        .map(|(axi, xi)| (axi - lambda * xi).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// The k largest-modulus eigenvalues of `b` with default options.
pub fn leading_eigenvalues(b: &FlowMatrix, k: usize) -> Result<SpectrumReport> {
    leading_eigenvalues_with(b, k, &EigOptions::default())
}

/// The k largest-modulus eigenvalues of `b`.
///
/// Returns `SpectralNotConverged` carrying the partial report when the
/// iteration stalls or any residual misses `opts.residual_tol`.
pub fn leading_eigenvalues_with(
    b: &FlowMatrix,
    k: usize,
    opts: &EigOptions,
) -> Result<SpectrumReport> {
    let n = b.n();
    if k == 0 || k > n {
        return Err(Error::KOutOfRange { k, n });
    }
    let m = if opts.subspace > 0 {
        opts.subspace.clamp(k + 2, n)
    } else {
        (2 * k + 8).max(24).min(n)
    };
    let use_dense = n <= opts.dense_cutoff || m >= n || k + 2 > n;

    let (values, vectors, iter_ok) = if use_dense {
        dense_leading(b.dense(), k)
    } else {
        let out = krylov_schur_leading(b.dense(), k, m, opts.max_restarts, opts.residual_tol * 0.1);
        (out.values, out.vectors, out.converged)
    };

    // Final order and explicit verification are shared by both engines.
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&i, &j| eig_comparator(&values[i], &values[j]));
    let eigenvalues: Vec<Complex64> = idx.iter().map(|&i| values[i]).collect();
    let residuals: Vec<f64> = idx
        .iter()
        .map(|&i| explicit_residual(b.dense(), values[i], &vectors[i]))
        .collect();

    let report = SpectrumReport {
        k,
        eigenvalues,
        residuals,
    };
    if !iter_ok || report.residuals.iter().any(|&r| !(r <= opts.residual_tol)) {
        return Err(Error::SpectralNotConverged {
            partial: Box::new(report),
        });
    }
    Ok(report)
}

/// Full Schur path: all eigenvalues, then the k leading ones with vectors.
fn dense_leading(a: &Dense, k: usize) -> (Vec<Complex64>, Vec<Vec<Complex64>>, bool) {
    let n = a.n();
    let mut t = CMat::from_real(a);
    let mut u = CMat::identity(n);
    let ok = schur_decompose(&mut t, &mut u);
    sort_schur_descending(&mut t, &mut u);

    let mut values = Vec::with_capacity(k);
    let mut vectors = Vec::with_capacity(k);
    for i in 0..k {
        values.push(t.get(i, i));
        let y = triangular_eigenvector(&t, i);
        let mut x = vec![Complex64::ZERO; n];
        for (r, xr) in x.iter_mut().enumerate() {
            let mut acc = Complex64::ZERO;
            for (c, &yc) in y.iter().enumerate().take(i + 1) {
                acc += u.get(r, c) * yc;
            }
            *xr = acc;
        }
        let nx = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if nx > 0.0 {
            for z in &mut x {
                *z /= nx;
            }
        }
        vectors.push(x);
    }
    (values, vectors, ok)
}
