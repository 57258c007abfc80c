//! Restarted Krylov-Schur iteration for the leading eigenvalues of a large
//! real matrix, in complex arithmetic throughout so complex conjugate pairs
//! need no special casing.
//!
//! Invariant maintained across restarts, with V the current orthonormal
//! basis of j columns and v_next one extra orthonormal vector:
//!
//!   A * V = V * H[0..j, 0..j] + v_next * H[j, 0..j]
//!
//! After a fresh Arnoldi expansion H is Hessenberg and the coupling row has
//! a single entry; after a truncation H carries a triangular block plus a
//! dense coupling ("spike") row, which the next Schur call re-triangularizes.

use num_complex::Complex64;
use rayon::prelude::*;

use super::cmat::CMat;
use super::schur::{schur, sort_schur_descending, triangular_eigenvector};
use crate::dense::Dense;

pub(crate) struct KrylovOutcome {
    pub values: Vec<Complex64>,
    pub vectors: Vec<Vec<Complex64>>,
    /// Schur-residual estimates met the inner tolerance before the restart
    /// budget ran out. Explicit residuals are checked by the caller.
    pub converged: bool,
}

/// y = A x with real A and complex x, rows in parallel.
pub(crate) fn matvec(a: &Dense, x: &[Complex64]) -> Vec<Complex64> {
    let n = a.n();
    a.as_slice()
        .par_chunks(n)
        .map(|row| {
            let mut acc = Complex64::ZERO;
            for (j, &av) in row.iter().enumerate() {
                if av != 0.0 {
                    acc += x[j] * av;
                }
            }
            acc
        })
        .collect()
}

fn dot_conj(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Deterministic generic-position start vector (fixed 64-bit LCG).
fn start_vector(n: usize) -> Vec<Complex64> {
    let mut state: u64 = 0x9e37_79b9_7f4a_7c15;
    let mut v = Vec::with_capacity(n);
    for _ in 0..n {
        state = state
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        let u = (state >> 11) as f64 / (1u64 << 53) as f64;
        v.push(Complex64::new(u - 0.5, 0.0));
    }
    let nv = norm(&v);
    for z in &mut v {
        *z /= nv;
    }
    v
}

/// Orthogonalizes `w` against the basis twice (classical Gram-Schmidt with
/// DGKS re-orthogonalization), returning the projection coefficients and the
/// remaining norm.
fn orthogonalize(basis: &[Vec<Complex64>], w: &mut [Complex64]) -> (Vec<Complex64>, f64) {
    let mut h = vec![Complex64::ZERO; basis.len()];
    for _ in 0..2 {
        for (i, vi) in basis.iter().enumerate() {
            let c = dot_conj(vi, w);
            h[i] += c;
            for (wz, vz) in w.iter_mut().zip(vi) {
                *wz -= c * vz;
            }
        }
    }
    (h, norm(w))
}

/// A fresh unit vector orthogonal to the basis, for continuing after an
/// invariant subspace is hit. Cycles through coordinate vectors and keeps
/// the best candidate. Requires basis.len() < n.
fn replacement_vector(basis: &[Vec<Complex64>], n: usize) -> Vec<Complex64> {
    let mut best: Option<(f64, Vec<Complex64>)> = None;
    for idx in 0..n {
        let mut w = vec![Complex64::ZERO; n];
        w[idx] = Complex64::ONE;
        let (_, b) = orthogonalize(basis, &mut w);
        if b > 0.5 {
            for z in &mut w {
                *z /= b;
            }
            return w;
        }
        if best.as_ref().map_or(true, |(bb, _)| b > *bb) {
            best = Some((b, w));
        }
    }
    let (b, mut w) = best.expect("n > 0");
    if b > 0.0 {
        for z in &mut w {
            *z /= b;
        }
    }
    w
}

/// Leading-k eigenpairs of `a` using subspace dimension `m` (k < m < n).
pub(crate) fn krylov_schur_leading(
    a: &Dense,
    k: usize,
    m: usize,
    max_restarts: usize,
    inner_tol: f64,
) -> KrylovOutcome {
    let n = a.n();
    debug_assert!(k < m && m < n);

    let mut v: Vec<Vec<Complex64>> = vec![start_vector(n)];
    let mut h = CMat::zeros(m + 1);
    let mut dim = 0usize;
    let breakdown_floor = 1e-14;

    let mut converged = false;
    let mut schur_ok = true;
    let mut t = CMat::zeros(m);
    let mut w = CMat::identity(m);

    for restart in 0..=max_restarts {
        // Expand the basis from dim to m columns.
        for j in dim..m {
            let mut wvec = matvec(a, &v[j]);
            let scale = norm(&wvec);
            let (hcol, beta) = orthogonalize(&v[..=j], &mut wvec);
            for (i, &c) in hcol.iter().enumerate() {
                h.set(i, j, c);
            }
            if beta <= breakdown_floor * scale.max(1.0) {
                // Invariant subspace: restart the Krylov direction afresh.
                h.set(j + 1, j, Complex64::ZERO);
                v.push(replacement_vector(&v[..=j], n));
            } else {
                h.set(j + 1, j, Complex64::new(beta, 0.0));
                for z in &mut wvec {
                    *z /= beta;
                }
                v.push(wvec);
            }
        }

        let beta_m = h.get(m, m - 1).norm();

        // Schur form of the projected matrix, leading part first.
        t = CMat::zeros(m);
        for i in 0..m {
            for j in 0..m {
                t.set(i, j, h.get(i, j));
            }
        }
        w = CMat::identity(m);
        schur_ok = schur(&mut t, &mut w);
        sort_schur_descending(&mut t, &mut w);

        // Schur residual estimate for the i-th leading Schur vector.
        let est = |i: usize| beta_m * w.get(m - 1, i).norm();
        let mut nconv = 0;
        while nconv < k {
            let theta = t.get(nconv, nconv);
            if est(nconv) <= inner_tol * theta.norm().max(1.0) {
                nconv += 1;
            } else {
                break;
            }
        }
        if nconv >= k && schur_ok {
            converged = true;
            break;
        }
        if restart == max_restarts {
            break;
        }

        // Truncate to the leading p Schur vectors plus the residual vector.
        let p = (k + (m - k) / 2).clamp(k + 1, m - 1);
        let mut vnew: Vec<Vec<Complex64>> = Vec::with_capacity(p + 1);
        for j in 0..p {
            let mut col = vec![Complex64::ZERO; n];
            for (r, vr) in v.iter().take(m).enumerate() {
                let wc = w.get(r, j);
                if wc != Complex64::ZERO {
                    for (cz, vz) in col.iter_mut().zip(vr) {
                        *cz += wc * vz;
                    }
                }
            }
            vnew.push(col);
        }
        vnew.push(v.swap_remove(m));
        v = vnew;

        let mut hnew = CMat::zeros(m + 1);
        for i in 0..p {
            for j in i..p {
                hnew.set(i, j, t.get(i, j));
            }
        }
        for j in 0..p {
            hnew.set(p, j, Complex64::new(beta_m, 0.0) * w.get(m - 1, j));
        }
        h = hnew;
        dim = p;
    }

    // Ritz pairs from the sorted Schur form: y solves T y = theta y, then
    // lift through W and the basis.
    let mut values = Vec::with_capacity(k);
    let mut vectors = Vec::with_capacity(k);
    for i in 0..k {
        let theta = t.get(i, i);
        let y = triangular_eigenvector(&t, i);
        let mut z = vec![Complex64::ZERO; m];
        for (r, zr) in z.iter_mut().enumerate() {
            let mut acc = Complex64::ZERO;
            for (c, &yc) in y.iter().enumerate().take(i + 1) {
                acc += w.get(r, c) * yc;
            }
            *zr = acc;
        }
        let mut x = vec![Complex64::ZERO; n];
        for (r, vr) in v.iter().take(m).enumerate() {
            let zr = z[r];
            if zr != Complex64::ZERO {
                for (xz, vz) in x.iter_mut().zip(vr) {
                    *xz += zr * vz;
                }
            }
        }
        let nx = norm(&x);
        if nx > 0.0 {
            for xz in &mut x {
                *xz /= nx;
            }
        }
        values.push(theta);
        vectors.push(x);
    }

    KrylovOutcome {
        values,
        vectors,
        converged: converged && schur_ok,
    }
}
