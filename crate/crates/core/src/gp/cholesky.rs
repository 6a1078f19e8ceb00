//! Dense Cholesky factorization on row-major storage.
//!
//! Rows of the factor are contiguous, so both the factorization and the
//! forward solve reduce to dot products over row prefixes.

use crate::error::GpError;

/// Jitter levels tried in turn, relative to the diagonal scale.
pub const JITTER_LADDER: [f64; 8] = [0.0, 1e-10, 1e-9, 1e-8, 1e-7, 1e-6, 1e-5, 1e-4];

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().min(b.len());
    let (a, b) = (a[..n].chunks_exact(8), b[..n].chunks_exact(8));
    let tail: f64 = a.remainder().iter().zip(b.remainder()).map(|(x, y)| x * y).sum();
    let mut acc = [0.0f64; 8];
    for (x, y) in a.zip(b) {
        for k in 0..8 {
            acc[k] += x[k] * y[k];
        }
    }
    ((acc[0] + acc[1]) + (acc[2] + acc[3])) + ((acc[4] + acc[5]) + (acc[6] + acc[7])) + tail
}

/// Lower-triangular `L` with `L Lᵀ = A`, stored row-major in an `n × n` buffer.
#[derive(Clone, Debug, PartialEq)]
pub struct Cholesky {
    n: usize,
    l: Vec<f64>,
}

impl Cholesky {
    /// Factors the symmetric matrix whose lower triangle is in `a` (row-major).
    /// Returns `None` if a pivot is not positive and finite.
    pub fn factor(a: &[f64], n: usize) -> Option<Cholesky> {
        let mut l = Vec::new();
        if Self::factor_into(a, n, 0.0, &mut l) {
            Some(Cholesky { n, l })
        } else {
            None
        }
    }

    /// Factors `a + shift·I` into `l`, reusing its allocation.
    pub(crate) fn factor_into(a: &[f64], n: usize, shift: f64, l: &mut Vec<f64>) -> bool {
        assert_eq!(a.len(), n * n);
        l.clear();
        l.resize(n * n, 0.0);
        for i in 0..n {
            let (done, rest) = l.split_at_mut(i * n);
            let row_i = &mut rest[..n];
            for j in 0..i {
                let row_j = &done[j * n..j * n + j];
                let s = a[i * n + j] - dot(&row_i[..j], row_j);
                row_i[j] = s / done[j * n + j];
            }
            let diag = a[i * n + i] + shift;
            let d = diag - dot(&row_i[..i], &row_i[..i]);
            // pivots lost to cancellation count as singular
            if !(d > 1e-13 * diag) || !d.is_finite() {
                return false;
            }
            row_i[i] = d.sqrt();
        }
        true
    }

    pub(crate) fn from_raw(n: usize, l: Vec<f64>) -> Cholesky {
        debug_assert_eq!(l.len(), n * n);
        Cholesky { n, l }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// `L[i][j]` for `j ≤ i`.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        if j > i {
            0.0
        } else {
            self.l[i * self.n + j]
        }
    }

    /// Solves `L z = b` in place.
    pub fn solve_lower_in_place(&self, b: &mut [f64]) {
        let n = self.n;
        for i in 0..n {
            let row = &self.l[i * n..i * n + i];
            b[i] = (b[i] - dot(row, &b[..i])) / self.l[i * n + i];
        }
    }

    /// Solves `Lᵀ x = z` in place.
    pub fn solve_upper_in_place(&self, z: &mut [f64]) {
        let n = self.n;
        for i in (0..n).rev() {
            let xi = z[i] / self.l[i * n + i];
            z[i] = xi;
            let row = &self.l[i * n..i * n + i];
            for (zk, lk) in z[..i].iter_mut().zip(row) {
                *zk -= lk * xi;
            }
        }
    }

    /// Solves `A x = b`.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.solve_lower_in_place(&mut x);
        self.solve_upper_in_place(&mut x);
        x
    }

    /// `log |A|`.
    pub fn log_det(&self) -> f64 {
        2.0 * (0..self.n).map(|i| self.l[i * self.n + i].ln()).sum::<f64>()
    }

    /// `L Lᵀ`, row-major.
    pub fn reconstruct(&self) -> Vec<f64> {
        let n = self.n;
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                let v = dot(&self.l[i * n..i * n + j + 1], &self.l[j * n..j * n + j + 1]);
                a[i * n + j] = v;
                a[j * n + i] = v;
            }
        }
        a
    }
}

/// Factors `a + jitter·scale·I`, escalating the jitter through [`JITTER_LADDER`].
/// Returns the factor and the absolute jitter that was added.
pub fn factor_with_jitter(a: &[f64], n: usize, scale: f64) -> Result<(Cholesky, f64), GpError> {
    let mut l = Vec::new();
    let mut last = 0.0;
    for rel in JITTER_LADDER {
        last = rel * scale;
        if Cholesky::factor_into(a, n, last, &mut l) {
            return Ok((Cholesky::from_raw(n, l), last));
        }
    }
    Err(GpError::Degenerate(last))
}
