//! Bi-stochastization: scaling a non-negative matrix so every row and column
//! sums to one.
//!
//! Two routes are provided, and they generally produce *different* doubly
//! stochastic matrices from the same input:
//!
//! * [`sinkhorn_knopp`] alternately normalizes rows and columns. Its fixed
//!   point D1*A*D2 minimizes the Kullback-Leibler divergence to the input over
//!   the doubly stochastic matrices with the same support.
//! * [`squared_norm_bistochastize`] with [`SquaredNormVariant::Dykstra`]
//!   computes the Euclidean projection of the input onto the set of doubly
//!   stochastic matrices, alternating between the affine sum-constraint set
//!   and the non-negative orthant with Dykstra's correction terms. The
//!   [`SquaredNormVariant::PlainAlternation`] variant omits the corrections;
//!   it still converges into the intersection but not necessarily to the
//!   nearest point, and is kept for comparison runs.
//!
//! Sinkhorn-Knopp preserves zero cells exactly; the squared-norm routes can
//! both create and destroy zeros.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dense::{frobenius_distance_sq, Dense};
use crate::error::{Error, Result};
use crate::flowmatrix::FlowMatrix;

/// Default stopping tolerance on max row/column sum deviation for
/// Sinkhorn-Knopp.
pub const DEFAULT_SK_TOL: f64 = 1e-12;

/// Default stopping tolerance on the squared step norm for the squared-norm
/// routes.
pub const DEFAULT_SQNORM_TOL: f64 = 1e-30;

/// Default iteration cap for both routes.
pub const DEFAULT_MAX_ITER: u64 = 200_000;

/// Negative entries above this floor (artifacts of the final affine step) are
/// clamped to zero on output.
const OUTPUT_CLAMP_FLOOR: f64 = -1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BalanceMethod {
    #[serde(rename = "KL_Sinkhorn")]
    KlSinkhorn,
    #[serde(rename = "SquaredNorm_Dykstra")]
    SquaredNormDykstra,
    #[serde(rename = "SquaredNorm_PlainAlternation")]
    SquaredNormPlainAlternation,
}

/// Which squared-norm iteration to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SquaredNormVariant {
    Dykstra,
    PlainAlternation,
}

/// How a balancing run ended.
///
/// `last_step_delta` is the squared Frobenius distance between the final two
/// iterates; `max_sum_deviation` is measured on the returned matrix. A run
/// that hits the iteration cap reports `converged: false` and still returns
/// its final iterate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub iterations: u64,
    pub last_step_delta: f64,
    pub max_sum_deviation: f64,
    pub converged: bool,
    pub method: BalanceMethod,
}

/// Divergences used to compare a balanced matrix with its input.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DivergenceKind {
    KullbackLeibler,
    SquaredNorm,
}

fn check_positive_tol(tol: f64) -> Result<()> {
    if !(tol > 0.0) {
        return Err(Error::NonPositiveTolerance { value: tol });
    }
    Ok(())
}

/// Sinkhorn-Knopp row/column balancing.
///
/// One iteration divides every row by its sum and then every column by its
/// sum. Stops when the max row/column sum deviation from 1 is at most `tol`.
/// Requires every row and column to contain a positive entry; a matrix
/// without total support keeps its sums balanced only in the limit, in which
/// case the run ends at `max_iter` with `converged: false`.
pub fn sinkhorn_knopp(
    a: &FlowMatrix,
    tol: f64,
    max_iter: u64,
) -> Result<(FlowMatrix, ConvergenceReport)> {
    check_positive_tol(tol)?;
    let n = a.n();
    let d = a.dense();

    for i in 0..n {
        if !d.row(i).iter().any(|&v| v > 0.0) {
            return Err(Error::ZeroRow { index: i });
        }
    }
    let col_has = {
        let mut has = vec![false; n];
        for i in 0..n {
            for (j, &v) in d.row(i).iter().enumerate() {
                if v > 0.0 {
                    has[j] = true;
                }
            }
        }
        has
    };
    if let Some(j) = col_has.iter().position(|&h| !h) {
        return Err(Error::ZeroColumn { index: j });
    }

    let mut prev = d.clone();
    let initial_dev = prev.doubly_stochastic_deviation();
    if initial_dev <= tol {
        let report = ConvergenceReport {
            iterations: 0,
            last_step_delta: 0.0,
            max_sum_deviation: initial_dev,
            converged: true,
            method: BalanceMethod::KlSinkhorn,
        };
        let out = FlowMatrix::from_dense(prev, a.labels().to_vec())?;
        return Ok((out, report));
    }

    let mut cur = Dense::zeros(n);
    let mut iterations: u64 = 0;
    let mut deviation = initial_dev;
    let converged = loop {
        if iterations >= max_iter {
            break false;
        }
        iterations += 1;

        // Row pass: cur = prev with each row divided by its sum.
        cur.as_mut_slice()
            .par_chunks_mut(n)
            .zip(prev.as_slice().par_chunks(n))
            .for_each(|(crow, prow)| {
                let s: f64 = prow.iter().sum();
                for (c, &p) in crow.iter_mut().zip(prow) {
                    *c = p / s;
                }
            });

        // Column pass in place on cur.
        let csums = cur.col_sums();
        cur.as_mut_slice().par_chunks_mut(n).for_each(|row| {
            for (c, &s) in row.iter_mut().zip(&csums) {
                *c /= s;
            }
        });

        deviation = cur.doubly_stochastic_deviation();
        if deviation <= tol {
            break true;
        }
        std::mem::swap(&mut prev, &mut cur);
    };

    // After a completed iteration `cur` is the latest iterate. When the loop
    // ran zero times (max_iter == 0) fall back to the input itself.
    let (final_m, last_step_delta) = if iterations == 0 {
        (prev, 0.0)
    } else {
        let delta = frobenius_distance_sq(&prev, &cur);
        (cur, delta)
    };

    let report = ConvergenceReport {
        iterations,
        last_step_delta,
        max_sum_deviation: deviation,
        converged,
        method: BalanceMethod::KlSinkhorn,
    };
    let out = FlowMatrix::from_dense(final_m, a.labels().to_vec())?;
    Ok((out, report))
}

/// Exact projection onto the affine set of matrices whose rows and columns
/// all sum to one:
///
/// y[i][j] = x[i][j] + 1/n + s/n^2 - r[i]/n - c[j]/n
///
/// with r, c, s the row sums, column sums, and total of x. Entries may go
/// negative; this is only the affine half of the doubly stochastic set.
pub fn project_affine_doubly_stochastic(x: &Dense) -> Dense {
    let n = x.n();
    let mut y = x.clone();
    affine_project_in_place(&mut y, n);
    y
}

/// In-place affine projection. Returns the per-cell adjustment parameters so
/// Dykstra's correction can be formed without a second buffer.
fn affine_adjustments(x: &Dense, n: usize) -> (Vec<f64>, Vec<f64>, f64) {
    let r = x.row_sums();
    let c = x.col_sums();
    let s: f64 = r.iter().sum();
    let nf = n as f64;
    let base = 1.0 / nf + s / (nf * nf);
    let radj: Vec<f64> = r.iter().map(|ri| ri / nf).collect();
    let cadj: Vec<f64> = c.iter().map(|cj| cj / nf).collect();
    (radj, cadj, base)
}

fn affine_project_in_place(x: &mut Dense, n: usize) {
    let (radj, cadj, base) = affine_adjustments(x, n);
    x.as_mut_slice()
        .par_chunks_mut(n)
        .enumerate()
        .for_each(|(i, row)| {
            let ri = radj[i];
            for (j, v) in row.iter_mut().enumerate() {
                *v += base - ri - cadj[j];
            }
        });
}

/// Squared-norm bi-stochastization by alternating the affine sum-constraint
/// projection with clipping to the non-negative orthant.
///
/// With `Dykstra` the two Dykstra correction terms are carried between
/// iterations and the limit is the Euclidean projection of `a` onto the
/// doubly stochastic set. With `PlainAlternation` no corrections are kept.
/// Stops when the squared Frobenius distance between consecutive iterates is
/// at most `tol`. The returned matrix is the iterate after clipping, so it is
/// non-negative; entries in (-1e-12, 0) produced by intermediate arithmetic
/// are clamped to zero.
pub fn squared_norm_bistochastize(
    a: &FlowMatrix,
    tol: f64,
    max_iter: u64,
    variant: SquaredNormVariant,
) -> Result<(FlowMatrix, ConvergenceReport)> {
    check_positive_tol(tol)?;
    let n = a.n();
    let use_corrections = variant == SquaredNormVariant::Dykstra;

    let mut x = a.dense().clone();
    let mut x_prev = Dense::zeros(n);
    let mut t = Dense::zeros(n);
    // p: correction for the affine set, q: correction for the orthant.
    let mut p = Dense::zeros(n);
    let mut q = Dense::zeros(n);

    let mut iterations: u64 = 0;
    let mut last_step_delta = f64::INFINITY;
    let converged = loop {
        if iterations >= max_iter {
            break false;
        }
        iterations += 1;
        x_prev.copy_from(&x);

        // t = x + p, then y = affine projection of t, with p updated to
        // t - y. The adjustment at cell (i,j) depends only on the row/column
        // sums of t, so p is rebuilt from those sums directly.
        if use_corrections {
            t.as_mut_slice()
                .par_chunks_mut(n)
                .zip(x.as_slice().par_chunks(n))
                .zip(p.as_slice().par_chunks(n))
                .for_each(|((trow, xrow), prow)| {
                    for ((tv, &xv), &pv) in trow.iter_mut().zip(xrow).zip(prow) {
                        *tv = xv + pv;
                    }
                });
        } else {
            t.copy_from(&x);
        }
        let (radj, cadj, base) = affine_adjustments(&t, n);
        if use_corrections {
            t.as_mut_slice()
                .par_chunks_mut(n)
                .zip(p.as_mut_slice().par_chunks_mut(n))
                .enumerate()
                .for_each(|(i, (trow, prow))| {
                    let ri = radj[i];
                    for (j, (tv, pv)) in trow.iter_mut().zip(prow.iter_mut()).enumerate() {
                        let adj = base - ri - cadj[j];
                        *tv += adj;
                        *pv = -adj;
                    }
                });
        } else {
            t.as_mut_slice()
                .par_chunks_mut(n)
                .enumerate()
                .for_each(|(i, trow)| {
                    let ri = radj[i];
                    for (j, tv) in trow.iter_mut().enumerate() {
                        *tv += base - ri - cadj[j];
                    }
                });
        }

        // z = y + q, x = max(z, 0), q = z - x.
        if use_corrections {
            x.as_mut_slice()
                .par_chunks_mut(n)
                .zip(t.as_slice().par_chunks(n))
                .zip(q.as_mut_slice().par_chunks_mut(n))
                .for_each(|((xrow, yrow), qrow)| {
                    for ((xv, &yv), qv) in xrow.iter_mut().zip(yrow).zip(qrow.iter_mut()) {
                        let z = yv + *qv;
                        let clipped = if z > 0.0 { z } else { 0.0 };
                        *qv = z - clipped;
                        *xv = clipped;
                    }
                });
        } else {
            x.as_mut_slice()
                .par_chunks_mut(n)
                .zip(t.as_slice().par_chunks(n))
                .for_each(|(xrow, yrow)| {
                    for (xv, &yv) in xrow.iter_mut().zip(yrow) {
                        *xv = if yv > 0.0 { yv } else { 0.0 };
                    }
                });
        }

        last_step_delta = frobenius_distance_sq(&x, &x_prev);
        if last_step_delta <= tol {
            break true;
        }
    };

    if last_step_delta == f64::INFINITY {
        last_step_delta = 0.0;
    }
    // x is non-negative by construction; the clamp below also covers any
    // caller that feeds the affine output through directly.
    for v in x.as_mut_slice() {
        if *v < 0.0 && *v > OUTPUT_CLAMP_FLOOR {
            *v = 0.0;
        }
    }
    let deviation = x.doubly_stochastic_deviation();
    let method = match variant {
        SquaredNormVariant::Dykstra => BalanceMethod::SquaredNormDykstra,
        SquaredNormVariant::PlainAlternation => BalanceMethod::SquaredNormPlainAlternation,
    };
    let report = ConvergenceReport {
        iterations,
        last_step_delta,
        max_sum_deviation: deviation,
        converged,
        method,
    };
    let out = FlowMatrix::from_dense(x, a.labels().to_vec())?;
    Ok((out, report))
}

/// Bregman divergence D(b || a) between two same-shape matrices.
///
/// Kullback-Leibler uses sum(b*ln(b/a) - b + a) over cells where a > 0 with
/// the 0*ln(0) = 0 convention, and is undefined (error) where b is nonzero
/// outside the support of a. Squared norm is 0.5 * sum((b-a)^2).
pub fn bregman_divergence(kind: DivergenceKind, b: &FlowMatrix, a: &FlowMatrix) -> Result<f64> {
    b.check_compatible(a)?;
    let n = b.n();
    match kind {
        DivergenceKind::SquaredNorm => Ok(0.5 * frobenius_distance_sq(b.dense(), a.dense())),
        DivergenceKind::KullbackLeibler => {
            for i in 0..n {
                let brow = b.dense().row(i);
                let arow = a.dense().row(i);
                for j in 0..n {
                    if arow[j] == 0.0 && brow[j] != 0.0 {
                        return Err(Error::KlSupportViolation { row: i, col: j });
                    }
                }
            }
            let bd = b.dense();
            let ad = a.dense();
            let partials: Vec<f64> = (0..n)
                .into_par_iter()
                .map(|i| {
                    let brow = bd.row(i);
                    let arow = ad.row(i);
                    let mut acc = 0.0;
                    for (&bv, &av) in brow.iter().zip(arow) {
                        if av > 0.0 {
                            if bv > 0.0 {
                                acc += bv * (bv / av).ln() - bv + av;
                            } else {
                                acc += av;
                            }
                        }
                    }
                    acc
                })
                .collect();
            let total: f64 = partials.iter().sum();
            // The divergence is non-negative; rounding can leave a tiny
            // negative residue when b is numerically equal to a.
            Ok(total.max(0.0))
        }
    }
}

/// max over all rows and columns of |sum - 1|.
pub fn bistochastic_deviation(b: &FlowMatrix) -> f64 {
    b.dense().doubly_stochastic_deviation()
}

/// Share of entries that changed sign class (zero vs positive) between `a`
/// and `b`, used to confirm Sinkhorn-Knopp preserves the zero pattern.
pub fn zero_pattern_matches(a: &FlowMatrix, b: &FlowMatrix) -> bool {
    a.n() == b.n()
        && a.dense()
            .as_slice()
            .iter()
            .zip(b.dense().as_slice())
            .all(|(&x, &y)| (x == 0.0) == (y == 0.0))
}

/// Diagnostic bundle comparing a balanced matrix with its input.
#[derive(Debug, Clone, Serialize)]
pub struct DivergenceSummary {
    pub squared_norm: f64,
    /// Absent when b has mass outside the support of a.
    pub kullback_leibler: Option<f64>,
}

pub fn divergence_summary(b: &FlowMatrix, a: &FlowMatrix) -> Result<DivergenceSummary> {
    let squared_norm = bregman_divergence(DivergenceKind::SquaredNorm, b, a)?;
    let kullback_leibler = match bregman_divergence(DivergenceKind::KullbackLeibler, b, a) {
        Ok(v) => Some(v),
        Err(Error::KlSupportViolation { .. }) => None,
        Err(e) => return Err(e),
    };
    Ok(DivergenceSummary {
        squared_norm,
        kullback_leibler,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flowmatrix::RegionId;

    fn ids(n: usize) -> Vec<RegionId> {
        (0..n)
            .map(|i| RegionId::new(format!("r{i:03}")).unwrap())
            .collect()
    }

    fn fm(rows: &[Vec<f64>]) -> FlowMatrix {
        FlowMatrix::from_dense(Dense::from_rows(rows).unwrap(), ids(rows.len())).unwrap()
    }

    #[test]
    fn affine_projection_closed_form() {
        // Worked by hand: [[1,2],[3,4]] has r=(3,7), c=(4,6), s=10;
        // y[i][j] = x[i][j] + 1/2 + 10/4 - r[i]/2 - c[j]/2.
        let x = Dense::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        let y = project_affine_doubly_stochastic(&x);
        for i in 0..2 {
            for j in 0..2 {
                assert!((y.get(i, j) - 0.5).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn affine_projection_balances_sums() {
        let x = Dense::from_rows(&[
            vec![0.3, -1.0, 2.0],
            vec![5.0, 0.0, 0.25],
            vec![1.5, 2.5, -0.75],
        ])
        .unwrap();
        let y = project_affine_doubly_stochastic(&x);
        for s in y.row_sums() {
            assert!((s - 1.0).abs() < 1e-12);
        }
        for s in y.col_sums() {
            assert!((s - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn affine_projection_is_idempotent() {
        let x = Dense::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        let y = project_affine_doubly_stochastic(&x);
        let z = project_affine_doubly_stochastic(&y);
        assert!(frobenius_distance_sq(&y, &z) < 1e-28);
    }

    #[test]
    fn sk_positive_2x2_fixed_point() {
        // For [[a11,a12],[a21,a22]] the balanced matrix is [[g,1-g],[1-g,g]]
        // with g = sqrt(a11*a22) / (sqrt(a11*a22) + sqrt(a12*a21)).
        let m = fm(&[vec![1.0, 2.0], vec![3.0, 4.0]]);
        let (b, rep) = sinkhorn_knopp(&m, 1e-14, 100_000).unwrap();
        let g = 2.0 / (2.0 + 6.0f64.sqrt());
        assert!(rep.converged);
        assert!((b.get(0, 0) - g).abs() < 1e-10, "got {}", b.get(0, 0));
        assert!((b.get(0, 1) - (1.0 - g)).abs() < 1e-10);
        assert!((b.get(1, 0) - (1.0 - g)).abs() < 1e-10);
        assert!((b.get(1, 1) - g).abs() < 1e-10);
    }

    #[test]
    fn sk_hollow_2x2_gives_antidiagonal() {
        let m = fm(&[vec![0.0, 5.0], vec![7.0, 0.0]]);
        let (b, rep) = sinkhorn_knopp(&m, 1e-12, 10).unwrap();
        assert!(rep.converged);
        assert_eq!(rep.iterations, 1);
        assert_eq!(b.get(0, 1), 1.0);
        assert_eq!(b.get(1, 0), 1.0);
        assert_eq!(b.get(0, 0), 0.0);
        assert_eq!(b.get(1, 1), 0.0);
    }

    #[test]
    fn sk_on_permutation_is_identity_operation() {
        let m = fm(&[
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0],
            vec![1.0, 0.0, 0.0],
        ]);
        let (b, rep) = sinkhorn_knopp(&m, 1e-12, 10).unwrap();
        assert!(rep.converged);
        assert!(rep.iterations <= 1);
        assert_eq!(b.dense().as_slice(), m.dense().as_slice());
    }

    #[test]
    fn sk_rejects_zero_row_and_column() {
        let m = fm(&[vec![0.0, 0.0], vec![1.0, 1.0]]);
        assert!(matches!(
            sinkhorn_knopp(&m, 1e-12, 10),
            Err(Error::ZeroRow { index: 0 })
        ));
        let m = fm(&[vec![1.0, 0.0], vec![1.0, 0.0]]);
        assert!(matches!(
            sinkhorn_knopp(&m, 1e-12, 10),
            Err(Error::ZeroColumn { index: 1 })
        ));
    }

    #[test]
    fn sk_preserves_zero_pattern() {
        let m = fm(&[
            vec![1.0, 2.0, 0.0],
            vec![0.0, 3.0, 4.0],
            vec![5.0, 0.0, 6.0],
        ]);
        let (b, rep) = sinkhorn_knopp(&m, 1e-13, 100_000).unwrap();
        assert!(rep.converged);
        assert!(zero_pattern_matches(&m, &b));
        assert!(bistochastic_deviation(&b) <= 1e-13);
    }

    #[test]
    fn sk_unconverged_run_reports_false() {
        let m = fm(&[vec![1.0, 2.0], vec![3.0, 4.0]]);
        let (_, rep) = sinkhorn_knopp(&m, 1e-15, 1).unwrap();
        assert!(!rep.converged);
        assert_eq!(rep.iterations, 1);
        assert!(rep.max_sum_deviation > 1e-15);
    }

    #[test]
    fn dykstra_diag_dominant_projects_to_identity() {
        // Projection of [[10,0],[0,0.1]] onto the doubly stochastic set is
        // the identity: the set for n=2 is {[[a,1-a],[1-a,a]], 0<=a<=1} and
        // minimizing (a-10)^2 + 2(1-a)^2 + (a-0.1)^2 over [0,1] gives a=1.
        let m = fm(&[vec![10.0, 0.0], vec![0.0, 0.1]]);
        let (b, rep) = squared_norm_bistochastize(&m, 1e-30, 100_000, SquaredNormVariant::Dykstra)
            .unwrap();
        assert!(rep.converged);
        assert!((b.get(0, 0) - 1.0).abs() < 1e-9, "b00 = {}", b.get(0, 0));
        assert!(b.get(0, 1).abs() < 1e-9);
        assert!(b.get(1, 0).abs() < 1e-9);
        assert!((b.get(1, 1) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn dykstra_keeps_doubly_stochastic_input() {
        let m = fm(&[vec![0.25, 0.75], vec![0.75, 0.25]]);
        let (b, rep) = squared_norm_bistochastize(&m, 1e-30, 10, SquaredNormVariant::Dykstra)
            .unwrap();
        assert!(rep.converged);
        assert!(rep.iterations <= 1);
        assert!(frobenius_distance_sq(b.dense(), m.dense()) < 1e-28);
    }

    #[test]
    fn plain_alternation_lands_in_intersection() {
        let m = fm(&[vec![10.0, 0.0], vec![0.0, 0.1]]);
        let (b, rep) =
            squared_norm_bistochastize(&m, 1e-30, 100_000, SquaredNormVariant::PlainAlternation)
                .unwrap();
        assert!(rep.converged);
        assert!(bistochastic_deviation(&b) < 1e-9);
        assert!(b.dense().as_slice().iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn squared_norm_output_is_exactly_nonnegative() {
        let m = fm(&[
            vec![9.0, 0.0, 0.0],
            vec![0.0, 0.01, 4.0],
            vec![0.5, 3.0, 0.0],
        ]);
        let (b, _) = squared_norm_bistochastize(&m, 1e-30, 50_000, SquaredNormVariant::Dykstra)
            .unwrap();
        assert!(b.dense().as_slice().iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn kl_divergence_worked_example() {
        // D([[1,0],[0,1]] || [[0.5,0.5],[0.5,0.5]]) = 2*ln(2): each unit cell
        // contributes ln(2) - 1 + 0.5, each zero cell contributes 0.5.
        let b = fm(&[vec![1.0, 0.0], vec![0.0, 1.0]]);
        let a = fm(&[vec![0.5, 0.5], vec![0.5, 0.5]]);
        let d = bregman_divergence(DivergenceKind::KullbackLeibler, &b, &a).unwrap();
        assert!((d - 2.0 * 2.0f64.ln()).abs() < 1e-12, "d = {d}");
    }

    #[test]
    fn kl_divergence_zero_for_equal_matrices() {
        let a = fm(&[vec![1.0, 2.0], vec![3.0, 4.0]]);
        let d = bregman_divergence(DivergenceKind::KullbackLeibler, &a, &a).unwrap();
        assert_eq!(d, 0.0);
    }

    #[test]
    fn kl_divergence_rejects_support_violation() {
        let b = fm(&[vec![0.5, 0.5], vec![0.5, 0.5]]);
        let a = fm(&[vec![1.0, 0.0], vec![0.0, 1.0]]);
        assert!(matches!(
            bregman_divergence(DivergenceKind::KullbackLeibler, &b, &a),
            Err(Error::KlSupportViolation { row: 0, col: 1 })
        ));
    }

    #[test]
    fn squared_norm_divergence_worked_example() {
        // 0.5 * (0.25 + 2.25 + 6.25 + 12.25) = 10.5
        let b = fm(&[vec![0.5, 0.5], vec![0.5, 0.5]]);
        let a = fm(&[vec![1.0, 2.0], vec![3.0, 4.0]]);
        let d = bregman_divergence(DivergenceKind::SquaredNorm, &b, &a).unwrap();
        assert_eq!(d, 10.5);
    }

    #[test]
    fn deviation_worked_example() {
        // [[0.9,0],[0,1.1]]: row sums 0.9 and 1.1, deviation 0.1.
        let b = fm(&[vec![0.9, 0.0], vec![0.0, 1.1]]);
        let dev = bistochastic_deviation(&b);
        assert!((dev - 0.1).abs() < 1e-15);
    }

    #[test]
    fn rejects_non_positive_tolerance() {
        let m = fm(&[vec![1.0, 2.0], vec![3.0, 4.0]]);
        assert!(sinkhorn_knopp(&m, 0.0, 10).is_err());
        assert!(squared_norm_bistochastize(&m, -1.0, 10, SquaredNormVariant::Dykstra).is_err());
    }
}
