//! Small dense row-major matrix and the handful of factorizations the solvers need.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use serde::de::{Deserializer, Error as _};
use serde::ser::{SerializeSeq, Serializer};
use serde::{Deserialize, Serialize};

#[derive(Clone, PartialEq, Default)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    /// Builds a matrix from rows; every row must have `cols` entries.
    pub fn from_rows(cols: usize, rows: &[Vec<f64>]) -> Self {
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            assert_eq!(r.len(), cols, "ragged matrix row");
            data.extend_from_slice(r);
        }
        Matrix { rows: rows.len(), cols, data }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols);
        Matrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn push_row(&mut self, row: &[f64]) {
        assert_eq!(row.len(), self.cols, "row width mismatch");
        self.data.extend_from_slice(row);
        self.rows += 1;
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = &[f64]> {
        (0..self.rows).map(move |i| self.row(i))
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.cols);
        self.iter_rows().map(|r| dot(r, x)).collect()
    }

    /// `selfᵀ y`.
    pub fn tmul_vec(&self, y: &[f64]) -> Vec<f64> {
        debug_assert_eq!(y.len(), self.rows);
        let mut out = vec![0.0; self.cols];
        for (r, &yi) in self.iter_rows().zip(y) {
            if yi != 0.0 {
                axpy(&mut out, yi, r);
            }
        }
        out
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    /// Copies `self` into `dst` with its top-left corner at (r0, c0).
    pub fn write_block(&self, dst: &mut Matrix, r0: usize, c0: usize) {
        for i in 0..self.rows {
            dst.row_mut(r0 + i)[c0..c0 + self.cols].copy_from_slice(self.row(i));
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }
}

impl core::ops::Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl core::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Matrix{}x{}", self.rows, self.cols)?;
        f.debug_list().entries(self.iter_rows()).finish()
    }
}

// On the wire a matrix is a list of rows. An empty list has no width, so
// `{"rows": [], "cols": n}` is also accepted for 0 x n blocks.
impl Serialize for Matrix {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if self.rows == 0 && self.cols != 0 {
            #[derive(Serialize)]
            struct Empty<'a> {
                rows: &'a [Vec<f64>],
                cols: usize,
            }
            return Empty { rows: &[], cols: self.cols }.serialize(s);
        }
        let mut seq = s.serialize_seq(Some(self.rows))?;
        for r in self.iter_rows() {
            seq.serialize_element(r)?;
        }
        seq.end()
    }
}

impl<'de> Deserialize<'de> for Matrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Wire {
            Rows(Vec<Vec<f64>>),
            Shaped { rows: Vec<Vec<f64>>, cols: usize },
        }
        let (rows, cols) = match Wire::deserialize(d)? {
            Wire::Rows(r) => {
                let c = r.first().map_or(0, |x| x.len());
                (r, c)
            }
            Wire::Shaped { rows, cols } => (rows, cols),
        };
        if rows.iter().any(|r| r.len() != cols) {
            return Err(D::Error::custom("ragged matrix"));
        }
        Ok(Matrix::from_rows(cols, &rows))
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn axpy(y: &mut [f64], a: f64, x: &[f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

pub fn norm_inf(x: &[f64]) -> f64 {
    x.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// Power of two `s` with `s * v` in [1, 2); used for row equilibration since it is exact.
pub(crate) fn pow2_scale(v: f64) -> f64 {
    if v == 0.0 || !v.is_finite() {
        return 1.0;
    }
    let mut s = 1.0;
    let mut x = v;
    while x >= 2.0 {
        x *= 0.5;
        s *= 0.5;
    }
    while x < 1.0 {
        x *= 2.0;
        s *= 2.0;
    }
    s
}

/// Inverse of a square matrix by Gauss-Jordan elimination with partial pivoting.
/// Returns `None` when a pivot falls below `tol`.
pub fn invert(a: &Matrix, tol: f64) -> Option<Matrix> {
    let n = a.rows();
    assert_eq!(n, a.cols());
    let mut m = a.clone();
    let mut inv = Matrix::identity(n);
    for k in 0..n {
        let mut p = k;
        let mut best = m[(k, k)].abs();
        for i in k + 1..n {
            if m[(i, k)].abs() > best {
                best = m[(i, k)].abs();
                p = i;
            }
        }
        if best <= tol {
            return None;
        }
        if p != k {
            swap_rows(&mut m, p, k);
            swap_rows(&mut inv, p, k);
        }
        let piv = 1.0 / m[(k, k)];
        for v in m.row_mut(k) {
            *v *= piv;
        }
        for v in inv.row_mut(k) {
            *v *= piv;
        }
        let mrow: Vec<f64> = m.row(k).to_vec();
        let irow: Vec<f64> = inv.row(k).to_vec();
        for i in 0..n {
            if i == k {
                continue;
            }
            let f = m[(i, k)];
            if f != 0.0 {
                axpy(m.row_mut(i), -f, &mrow);
                axpy(inv.row_mut(i), -f, &irow);
            }
        }
    }
    Some(inv)
}

fn swap_rows(m: &mut Matrix, a: usize, b: usize) {
    let c = m.cols;
    for j in 0..c {
        m.data.swap(a * c + j, b * c + j);
    }
}

/// Positive semidefiniteness of a symmetric matrix, up to a shift of `eps`:
/// LDLᵀ of `q + eps I` must have strictly positive pivots.
pub fn is_psd(q: &Matrix, eps: f64) -> bool {
    let n = q.rows();
    if q.cols() != n {
        return false;
    }
    let scale = q.max_abs().max(1.0);
    for i in 0..n {
        for j in 0..i {
            if (q[(i, j)] - q[(j, i)]).abs() > 1e-9 * scale {
                return false;
            }
        }
    }
    let mut a = q.clone();
    for i in 0..n {
        a[(i, i)] += eps;
    }
    for k in 0..n {
        let d = a[(k, k)];
        if d <= 0.0 {
            return false;
        }
        for i in k + 1..n {
            let l = a[(i, k)] / d;
            if l == 0.0 {
                continue;
            }
            for j in k + 1..n {
                let v = a[(k, j)];
                a[(i, j)] -= l * v;
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_roundtrip() {
        let a = Matrix::from_rows(3, &[vec![0.0, 2.0, 1.0], vec![1.0, 1.0, 0.0], vec![3.0, 0.0, 1.0]]);
        let inv = invert(&a, 1e-12).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let v: f64 = (0..3).map(|k| a[(i, k)] * inv[(k, j)]).sum();
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((v - e).abs() < 1e-12);
            }
        }
        assert!(invert(&Matrix::from_rows(2, &[vec![1.0, 2.0], vec![2.0, 4.0]]), 1e-12).is_none());
    }

    #[test]
    fn psd_detection() {
        assert!(is_psd(&Matrix::from_rows(2, &[vec![2.0, 1.0], vec![1.0, 2.0]]), 1e-8));
        assert!(is_psd(&Matrix::from_rows(2, &[vec![1.0, 1.0], vec![1.0, 1.0]]), 1e-8));
        assert!(is_psd(&Matrix::zeros(2, 2), 1e-8));
        assert!(!is_psd(&Matrix::from_rows(2, &[vec![1.0, 2.0], vec![2.0, 1.0]]), 1e-8));
        assert!(!is_psd(&Matrix::from_rows(2, &[vec![1.0, 0.0], vec![1.0, 1.0]]), 1e-8));
    }

    #[test]
    fn pow2() {
        assert_eq!(pow2_scale(3.0), 0.5);
        assert_eq!(pow2_scale(0.3), 4.0);
        assert_eq!(pow2_scale(1.0), 1.0);
    }
}
