//! Minimal dense complex matrix with the Givens rotation kernels used by the
//! Schur engine.

use num_complex::Complex64;

use crate::dense::Dense;

#[derive(Debug, Clone)]
pub(crate) struct CMat {
    pub n: usize,
    pub d: Vec<Complex64>,
}

impl CMat {
    pub fn zeros(n: usize) -> Self {
        CMat {
            n,
            d: vec![Complex64::ZERO; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = CMat::zeros(n);
        for i in 0..n {
            m.set(i, i, Complex64::ONE);
        }
        m
    }

    pub fn from_real(a: &Dense) -> Self {
        let n = a.n();
        CMat {
            n,
            d: a.as_slice().iter().map(|&v| Complex64::new(v, 0.0)).collect(),
        }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.d[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.d[i * self.n + j] = v;
    }

    /// Largest entry modulus; scale reference for negligibility tests.
    pub fn max_abs(&self) -> f64 {
        self.d.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

/// Complex Givens rotation (c real, s complex) with
/// [c, s; -conj(s), c] * [f; g] = [r; 0].
pub(crate) fn givens(f: Complex64, g: Complex64) -> (f64, Complex64) {
    if g == Complex64::ZERO {
        return (1.0, Complex64::ZERO);
    }
    if f == Complex64::ZERO {
        let ga = g.norm();
        return (0.0, g.conj() / ga);
    }
    let fa = f.norm();
    let ga = g.norm();
    let d = fa.hypot(ga);
    let c = fa / d;
    let s = (f / fa) * (g.conj() / d);
    (c, s)
}

/// Applies the rotation to rows (i1, i2) over columns [jlo, jhi].
pub(crate) fn rot_rows(
    m: &mut CMat,
    i1: usize,
    i2: usize,
    c: f64,
    s: Complex64,
    jlo: usize,
    jhi: usize,
) {
    let n = m.n;
    for j in jlo..=jhi {
        let a = m.d[i1 * n + j];
        let b = m.d[i2 * n + j];
        m.d[i1 * n + j] = c * a + s * b;
        m.d[i2 * n + j] = -s.conj() * a + c * b;
    }
}

/// Applies the conjugate-transposed rotation to columns (j1, j2) over rows
/// [ilo, ihi]. Following a `rot_rows` with the same (c, s) this completes a
/// unitary similarity.
pub(crate) fn rot_cols(
    m: &mut CMat,
    j1: usize,
    j2: usize,
    c: f64,
    s: Complex64,
    ilo: usize,
    ihi: usize,
) {
    let n = m.n;
    for i in ilo..=ihi {
        let a = m.d[i * n + j1];
        let b = m.d[i * n + j2];
        m.d[i * n + j1] = c * a + s.conj() * b;
        m.d[i * n + j2] = -s * a + c * b;
    }
}
