//! Dense row-major square matrix storage with deterministic reductions.
//!
//! Every parallel reduction here combines per-chunk partial results in chunk
//! order, so results are bit-identical regardless of thread count.

use rayon::prelude::*;

use crate::error::{Error, Result};

/// Rows per parallel chunk in column-sum style reductions. Fixed so the
/// floating-point combination order does not depend on the thread count.
const ROW_CHUNK: usize = 64;

/// Dense square matrix of `f64`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    n: usize,
    data: Vec<f64>,
}

impl Dense {
    pub fn zeros(n: usize) -> Self {
        Dense {
            n,
            data: vec![0.0; n * n],
        }
    }

    /// Builds from a row-major buffer. `data.len()` must equal `n * n`.
    pub fn from_vec(n: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::BufferSize {
                expected: n * n,
                got: data.len(),
            });
        }
        Ok(Dense { n, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for row in rows {
            if row.len() != n {
                return Err(Error::BufferSize {
                    expected: n,
                    got: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Ok(Dense { n, data })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    #[inline]
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn copy_from(&mut self, other: &Dense) {
        debug_assert_eq!(self.n, other.n);
        self.data.copy_from_slice(&other.data);
    }

    /// First non-finite entry, if any.
    pub fn first_non_finite(&self) -> Option<(usize, usize)> {
        self.data
            .iter()
            .position(|v| !v.is_finite())
            .map(|p| (p / self.n, p % self.n))
    }

    /// First entry strictly below zero, if any.
    pub fn first_negative(&self) -> Option<(usize, usize, f64)> {
        self.data
            .iter()
            .position(|&v| v < 0.0)
            .map(|p| (p / self.n, p % self.n, self.data[p]))
    }

    /// Per-row sums, each row accumulated left to right.
    pub fn row_sums(&self) -> Vec<f64> {
        let n = self.n;
        self.data
            .par_chunks(n)
            .map(|row| row.iter().sum())
            .collect()
    }

    /// Per-column sums. Rows are grouped into fixed-size chunks whose partial
    /// sums are combined in chunk order.
    pub fn col_sums(&self) -> Vec<f64> {
        let n = self.n;
        if n == 0 {
            return Vec::new();
        }
        let partials: Vec<Vec<f64>> = self
            .data
            .par_chunks(ROW_CHUNK * n)
            .map(|chunk| {
                let mut acc = vec![0.0; n];
                for row in chunk.chunks_exact(n) {
                    for (a, &v) in acc.iter_mut().zip(row) {
                        *a += v;
                    }
                }
                acc
            })
            .collect();
        let mut out = vec![0.0; n];
        for p in &partials {
            for (o, &v) in out.iter_mut().zip(p) {
                *o += v;
            }
        }
        out
    }

    /// Sum of all entries: row sums combined in row order.
    pub fn total(&self) -> f64 {
        self.row_sums().iter().sum()
    }

    /// max over all rows and columns of |sum - 1|.
    pub fn doubly_stochastic_deviation(&self) -> f64 {
        let mut dev: f64 = 0.0;
        for s in self.row_sums() {
            dev = dev.max((s - 1.0).abs());
        }
        for s in self.col_sums() {
            dev = dev.max((s - 1.0).abs());
        }
        dev
    }

    /// Matrix product `self * other`, parallel over output rows.
    pub fn matmul(&self, other: &Dense) -> Dense {
        debug_assert_eq!(self.n, other.n);
        let n = self.n;
        let mut out = Dense::zeros(n);
        out.data
            .par_chunks_mut(n)
            .zip(self.data.par_chunks(n))
            .for_each(|(orow, arow)| {
                for (k, &a) in arow.iter().enumerate() {
                    if a == 0.0 {
                        continue;
                    }
                    let brow = &other.data[k * n..(k + 1) * n];
                    for (o, &b) in orow.iter_mut().zip(brow) {
                        *o += a * b;
                    }
                }
            });
        out
    }
}

/// Squared Frobenius distance, per-row partials combined in row order.
pub(crate) fn frobenius_distance_sq(a: &Dense, b: &Dense) -> f64 {
    debug_assert_eq!(a.n, b.n);
    let n = a.n;
    let partials: Vec<f64> = a
        .data
        .par_chunks(n)
        .zip(b.data.par_chunks(n))
        .map(|(ra, rb)| {
            ra.iter()
                .zip(rb)
                .map(|(&x, &y)| {
                    let d = x - y;
                    d * d
                })
                .sum()
        })
        .collect();
    partials.iter().sum()
}

/// Sum of a per-row map, partials combined in row order.
pub(crate) fn row_mapped_sum<F>(a: &Dense, f: F) -> f64
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let n = a.n;
    let partials: Vec<f64> = a.data.par_chunks(n).map(|row| f(row)).collect();
    partials.iter().sum()
}
