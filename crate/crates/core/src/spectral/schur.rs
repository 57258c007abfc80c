//! Complex Schur decomposition: Householder reduction to Hessenberg form
//! followed by the explicitly shifted single-shift QR iteration with
//! Wilkinson and periodic exceptional shifts. Produces A = U T U^H with T
//! upper triangular, plus helpers to reorder T and extract eigenvectors.

use num_complex::Complex64;

use super::cmat::{givens, rot_cols, rot_rows, CMat};

const EPS: f64 = f64::EPSILON;

/// Sweeps allowed per eigenvalue before giving up.
const SWEEPS_PER_EIGENVALUE: usize = 40;

/// Every this many sweeps without a deflation, an exceptional shift replaces
/// the Wilkinson shift to break symmetry-induced cycling.
const EXCEPTIONAL_EVERY: usize = 10;

/// Reduces `h` to upper Hessenberg form by unitary similarity, accumulating
/// the transformation into `u` (which must start as the identity or any
/// unitary matrix to compose with).
pub(crate) fn hessenberg(h: &mut CMat, u: &mut CMat) {
    let n = h.n;
    if n < 3 {
        return;
    }
    let mut v = vec![Complex64::ZERO; n];
    for k in 0..n - 2 {
        let m = n - k - 1; // length of the column segment below the diagonal
        let mut norm_sq = 0.0;
        for i in 0..m {
            norm_sq += h.get(k + 1 + i, k).norm_sqr();
        }
        let norm = norm_sq.sqrt();
        if norm == 0.0 {
            continue;
        }
        let x0 = h.get(k + 1, k);
        // alpha has the opposite phase of x0 so v = x - alpha*e1 never cancels.
        let alpha = if x0 == Complex64::ZERO {
            Complex64::new(-norm, 0.0)
        } else {
            -(x0 / x0.norm()) * norm
        };
        for i in 0..m {
            v[i] = h.get(k + 1 + i, k);
        }
        v[0] -= alpha;
        let vnorm_sq: f64 = v[..m].iter().map(|z| z.norm_sqr()).sum();
        if vnorm_sq == 0.0 {
            continue;
        }
        let beta = 2.0 / vnorm_sq;

        // Left: rows k+1.., columns k.. (earlier columns are already zero).
        for j in k..n {
            let mut w = Complex64::ZERO;
            for i in 0..m {
                w += v[i].conj() * h.get(k + 1 + i, j);
            }
            w *= beta;
            for i in 0..m {
                let cur = h.get(k + 1 + i, j);
                h.set(k + 1 + i, j, cur - w * v[i]);
            }
        }
        // Right: all rows, columns k+1...
        for r in 0..n {
            let mut w = Complex64::ZERO;
            for i in 0..m {
                w += h.get(r, k + 1 + i) * v[i];
            }
            w *= beta;
            for i in 0..m {
                let cur = h.get(r, k + 1 + i);
                h.set(r, k + 1 + i, cur - w * v[i].conj());
            }
        }
        for r in 0..n {
            let mut w = Complex64::ZERO;
            for i in 0..m {
                w += u.get(r, k + 1 + i) * v[i];
            }
            w *= beta;
            for i in 0..m {
                let cur = u.get(r, k + 1 + i);
                u.set(r, k + 1 + i, cur - w * v[i].conj());
            }
        }

        h.set(k + 1, k, alpha);
        for i in 1..m {
            h.set(k + 1 + i, k, Complex64::ZERO);
        }
    }
}

fn wilkinson_shift(h: &CMat, hi: usize) -> Complex64 {
    let a = h.get(hi - 1, hi - 1);
    let b = h.get(hi - 1, hi);
    let c = h.get(hi, hi - 1);
    let d = h.get(hi, hi);
    let tr = a + d;
    let disc = ((a - d) * (a - d) + 4.0 * b * c).sqrt();
    let l1 = (tr + disc) / 2.0;
    let l2 = (tr - disc) / 2.0;
    if (l1 - d).norm() <= (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

/// One explicitly shifted QR sweep on the window [lo, hi], accumulating into
/// `u`.
fn qr_sweep(h: &mut CMat, u: &mut CMat, lo: usize, hi: usize, mu: Complex64) {
    let n = h.n;
    for d in lo..=hi {
        let cur = h.get(d, d);
        h.set(d, d, cur - mu);
    }
    let mut rots = Vec::with_capacity(hi - lo);
    for i in lo..hi {
        let (c, s) = givens(h.get(i, i), h.get(i + 1, i));
        rot_rows(h, i, i + 1, c, s, i, n - 1);
        h.set(i + 1, i, Complex64::ZERO);
        rots.push((c, s));
    }
    for (idx, i) in (lo..hi).enumerate() {
        let (c, s) = rots[idx];
        rot_cols(h, i, i + 1, c, s, 0, hi);
        rot_cols(u, i, i + 1, c, s, 0, n - 1);
    }
    for d in lo..=hi {
        let cur = h.get(d, d);
        h.set(d, d, cur + mu);
    }
}

/// Iterates the Hessenberg matrix `h` to upper triangular Schur form,
/// accumulating into `u`. Returns false when the sweep budget runs out
/// before every subdiagonal entry deflates.
pub(crate) fn schur_from_hessenberg(h: &mut CMat, u: &mut CMat) -> bool {
    let n = h.n;
    if n < 2 {
        return true;
    }
    let hnorm = h.max_abs();
    if hnorm == 0.0 {
        return true;
    }
    let negligible = |h: &CMat, m: usize| -> bool {
        let tol = EPS * (h.get(m - 1, m - 1).norm() + h.get(m, m).norm());
        let tol = if tol == 0.0 { EPS * hnorm } else { tol };
        h.get(m, m - 1).norm() <= tol
    };

    let budget = SWEEPS_PER_EIGENVALUE * n;
    let mut total_sweeps = 0usize;
    let mut hi = n - 1;
    let mut since_deflation = 0usize;

    loop {
        // Clear negligible subdiagonals and pull `hi` down past converged
        // eigenvalues.
        while hi > 0 && negligible(h, hi) {
            h.set(hi, hi - 1, Complex64::ZERO);
            hi -= 1;
            since_deflation = 0;
        }
        if hi == 0 {
            return true;
        }
        // Active window [lo, hi]: walk up to the nearest deflated coupling.
        let mut lo = hi;
        while lo > 0 && !negligible(h, lo) {
            lo -= 1;
        }
        if lo > 0 {
            h.set(lo, lo - 1, Complex64::ZERO);
        }

        if total_sweeps >= budget {
            return false;
        }
        total_sweeps += 1;
        since_deflation += 1;

        let mu = if since_deflation % EXCEPTIONAL_EVERY == 0 {
            // Exceptional shift: real offset by the stuck subdiagonal entry.
            h.get(hi, hi) + Complex64::new(0.75 * h.get(hi, hi - 1).norm(), 0.0)
        } else {
            wilkinson_shift(h, hi)
        };
        qr_sweep(h, u, lo, hi, mu);
    }
}

/// Full Schur decomposition of a general complex matrix already stored in
/// `h`: A = U T U^H with `u` starting at identity. Returns convergence.
pub(crate) fn schur(h: &mut CMat, u: &mut CMat) -> bool {
    hessenberg(h, u);
    schur_from_hessenberg(h, u)
}

/// Reorders the triangular factor so the diagonal is sorted by descending
/// modulus (ties: descending real part, then descending imaginary part),
/// updating `u` to keep A = U T U^H.
pub(crate) fn sort_schur_descending(t: &mut CMat, u: &mut CMat) {
    let n = t.n;
    if n < 2 {
        return;
    }
    // Bucket modulus and real part exactly like the presentation order, so
    // last-ulp modulus noise cannot outrank a genuinely larger real part.
    // On repeated-modulus spectra (roots of unity) an exact comparison here
    // would push arbitrary members of the tie into the leading block and the
    // top-k cut would miss the dominant eigenvalue.
    let before = |a: Complex64, b: Complex64| -> bool {
        let q = |x: f64| (x / 1e-9).round();
        let (ma, mb) = (q(a.norm()), q(b.norm()));
        if ma != mb {
            return ma > mb;
        }
        let (ra, rb) = (q(a.re), q(b.re));
        if ra != rb {
            return ra > rb;
        }
        a.im >= b.im
    };
    // Bubble sort with adjacent Schur swaps; m is small by the time this
    // runs (subspace dimension or dense n).
    for pass in 0..n {
        let mut swapped = false;
        for i in 0..n - 1 - pass.min(n - 1) {
            let t11 = t.get(i, i);
            let t22 = t.get(i + 1, i + 1);
            if before(t11, t22) {
                continue;
            }
            swap_adjacent(t, u, i);
            swapped = true;
        }
        if !swapped {
            break;
        }
    }
}

/// Exchanges the diagonal entries t[i][i] and t[i+1][i+1] of a triangular
/// matrix by a unitary similarity. The rotation maps e1 onto the eigenvector
/// [t12, t22 - t11] of the trailing eigenvalue.
fn swap_adjacent(t: &mut CMat, u: &mut CMat, i: usize) {
    let n = t.n;
    let t11 = t.get(i, i);
    let t12 = t.get(i, i + 1);
    let t22 = t.get(i + 1, i + 1);
    let (c, s) = givens(t12, t22 - t11);
    rot_rows(t, i, i + 1, c, s, i, n - 1);
    rot_cols(t, i, i + 1, c, s, 0, i + 1);
    rot_cols(u, i, i + 1, c, s, 0, n - 1);
    t.set(i, i, t22);
    t.set(i + 1, i + 1, t11);
    t.set(i + 1, i, Complex64::ZERO);
}

/// Eigenvector of an upper triangular matrix for the eigenvalue at diagonal
/// position `j`, by back-substitution. Entries past j are zero and y[j] = 1.
/// Near-singular divisors are floored to keep defective clusters from
/// overflowing; the caller checks explicit residuals afterwards.
pub(crate) fn triangular_eigenvector(t: &CMat, j: usize) -> Vec<Complex64> {
    let n = t.n;
    let lambda = t.get(j, j);
    let tnorm = t.max_abs().max(f64::MIN_POSITIVE);
    let floor = EPS * tnorm;
    let mut y = vec![Complex64::ZERO; n];
    y[j] = Complex64::ONE;
    for i in (0..j).rev() {
        let mut acc = Complex64::ZERO;
        for k in i + 1..=j {
            acc += t.get(i, k) * y[k];
        }
        let mut den = t.get(i, i) - lambda;
        if den.norm() < floor {
            den = if den == Complex64::ZERO {
                Complex64::new(floor, 0.0)
            } else {
                (den / den.norm()) * floor
            };
        }
        y[i] = -acc / den;
        // Rescale if the solution is blowing up; direction is what matters.
        let mag = y[i].norm();
        if mag > 1e120 {
            for z in y[..=j].iter_mut() {
                *z /= mag;
            }
        }
    }
    y
}
