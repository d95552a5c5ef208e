//! Balas' extended formulation of the convex hull of a union of polyhedra.
//!
//! Before lifting, each piece is reduced: coordinates it fixes are substituted
//! out, always-tight rows become equalities, never-tight rows are dropped and
//! dependent equalities removed. A piece that is a single point then costs one
//! weight variable instead of a full copy.

use alloc::vec;
use alloc::vec::Vec;

use super::LcpError;
use crate::linalg::Matrix;
use crate::lp::{LpOutcome, Polyhedron, RowSystem};

const FIX_TOL: f64 = 1e-9;
const ROW_TOL: f64 = 1e-9;

/// A piece after reduction, in the coordinates it leaves free.
#[derive(Debug, Clone, PartialEq)]
pub struct PieceShape {
    /// Value of every coordinate the piece fixes, `None` where free.
    pub fixed: Vec<Option<f64>>,
    pub free: Vec<usize>,
    pub a: Matrix,
    pub b: Vec<f64>,
    pub a_eq: Matrix,
    pub b_eq: Vec<f64>,
}

impl PieceShape {
    pub fn is_point(&self) -> bool {
        self.free.is_empty()
    }

    /// Full-dimensional point from values of the free coordinates.
    pub fn point(&self, free_values: &[f64]) -> Vec<f64> {
        let mut x: Vec<f64> = self.fixed.iter().map(|v| v.unwrap_or(0.0)).collect();
        for (&c, &v) in self.free.iter().zip(free_values) {
            x[c] = v;
        }
        x
    }

    /// The reduced piece as a polyhedron over all coordinates.
    pub fn polyhedron(&self) -> Polyhedron {
        let n = self.fixed.len();
        let widen = |m: &Matrix| {
            let mut out = Matrix::zeros(0, n);
            for r in m.iter_rows() {
                let mut row = vec![0.0; n];
                for (&c, &v) in self.free.iter().zip(r) {
                    row[c] = v;
                }
                out.push_row(&row);
            }
            out
        };
        let mut p = Polyhedron::with_equalities(widen(&self.a), self.b.clone(), widen(&self.a_eq), self.b_eq.clone());
        for (c, v) in self.fixed.iter().enumerate() {
            if let Some(v) = v {
                let mut row = vec![0.0; n];
                row[c] = 1.0;
                p.push_eq(&row, *v);
            }
        }
        p
    }
}

/// Lifted system over `(x, copies, δ)`. Its projection onto `x` is the closed
/// convex hull of the pieces.
#[derive(Debug, Clone, PartialEq)]
pub struct HullFormulation {
    pub dim: usize,
    pub pieces: Vec<PieceShape>,
    copy_offset: Vec<usize>,
    delta_offset: usize,
    pub lifted: Polyhedron,
}

impl HullFormulation {
    pub fn lifted_dim(&self) -> usize {
        self.delta_offset + self.pieces.len()
    }

    pub fn delta_index(&self, j: usize) -> usize {
        self.delta_offset + j
    }

    pub fn copy_range(&self, j: usize) -> core::ops::Range<usize> {
        self.copy_offset[j]..self.copy_offset[j] + self.pieces[j].free.len()
    }

    pub fn project(&self, z: &[f64]) -> Vec<f64> {
        z[..self.dim].to_vec()
    }

    /// `(δ_j, x^j)` with `x^j` the full-dimensional scaled copy of piece `j`.
    pub fn component(&self, z: &[f64], j: usize) -> (f64, Vec<f64>) {
        let delta = z[self.delta_index(j)];
        let shape = &self.pieces[j];
        let mut x: Vec<f64> = shape.fixed.iter().map(|v| v.map_or(0.0, |v| v * delta)).collect();
        for (&c, &v) in shape.free.iter().zip(&z[self.copy_range(j)]) {
            x[c] = v;
        }
        (delta, x)
    }
}

pub fn balas_hull(pieces: &[Polyhedron]) -> Result<HullFormulation, LcpError> {
    let Some(first) = pieces.first() else {
        return Err(LcpError::EmptyPieceList);
    };
    let n = first.dim();
    for p in pieces {
        if p.dim() != n || p.a.cols() != n || p.a_eq.cols() != n {
            return Err(LcpError::DimensionMismatch("pieces live in different spaces"));
        }
    }
    let shapes = pieces
        .iter()
        .enumerate()
        .map(|(j, p)| reduce_piece(p, j))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(HullFormulation::from_shapes(n, shapes))
}

impl HullFormulation {
    /// Lifts already reduced pieces, all over `n` coordinates.
    pub fn from_shapes(n: usize, shapes: Vec<PieceShape>) -> HullFormulation {
        let k = shapes.len();
        let mut copy_offset = Vec::with_capacity(k);
        let mut next = n;
        for s in &shapes {
            copy_offset.push(next);
            next += s.free.len();
        }
        let delta_offset = next;
        let total = next + k;
        let mut lifted = Polyhedron::with_equalities(Matrix::zeros(0, total), Vec::new(), Matrix::zeros(0, total), Vec::new());
        for (j, s) in shapes.iter().enumerate() {
            let off = copy_offset[j];
            for (r, &b) in s.a.iter_rows().zip(&s.b) {
                let mut row = vec![0.0; total];
                row[off..off + r.len()].copy_from_slice(r);
                row[delta_offset + j] = -b;
                lifted.push_le(&row, 0.0);
            }
            for (r, &b) in s.a_eq.iter_rows().zip(&s.b_eq) {
                let mut row = vec![0.0; total];
                row[off..off + r.len()].copy_from_slice(r);
                row[delta_offset + j] = -b;
                lifted.push_eq(&row, 0.0);
            }
        }
        for c in 0..n {
            let mut row = vec![0.0; total];
            row[c] = 1.0;
            for (j, s) in shapes.iter().enumerate() {
                match s.fixed[c] {
                    Some(v) => row[delta_offset + j] -= v,
                    None => {
                        let pos = s.free.iter().position(|&f| f == c).expect("free coordinate");
                        row[copy_offset[j] + pos] = -1.0;
                    }
                }
            }
            lifted.push_eq(&row, 0.0);
        }
        let mut sum = vec![0.0; total];
        for j in 0..k {
            sum[delta_offset + j] = 1.0;
            let mut row = vec![0.0; total];
            row[delta_offset + j] = -1.0;
            lifted.push_le(&row, 0.0);
        }
        lifted.push_eq(&sum, 1.0);
        HullFormulation { dim: n, pieces: shapes, copy_offset, delta_offset, lifted }
    }
}

fn optimum(o: LpOutcome) -> Option<f64> {
    match o {
        LpOutcome::Optimal { value, .. } => Some(value),
        _ => None,
    }
}

/// Reduces one nonempty piece; `index` only labels the error.
pub fn reduce_piece(p: &Polyhedron, index: usize) -> Result<PieceShape, LcpError> {
    let n = p.dim();
    let sys = RowSystem::stack(&p.a, &p.a_eq);
    let mut row_lo = vec![f64::NEG_INFINITY; p.b.len()];
    row_lo.extend_from_slice(&p.b_eq);
    let mut row_hi = p.b.clone();
    row_hi.extend_from_slice(&p.b_eq);
    let free_lo = vec![f64::NEG_INFINITY; n];
    let free_hi = vec![f64::INFINITY; n];
    let solve = |c: &[f64]| sys.solve(c, &row_lo, &row_hi, &free_lo, &free_hi);

    if matches!(solve(&vec![0.0; n])?, LpOutcome::Infeasible) {
        return Err(LcpError::EmptyPiece(index));
    }

    let mut fixed = vec![None; n];
    let mut unit = vec![0.0; n];
    for c in 0..n {
        unit[c] = 1.0;
        if let Some(lo) = optimum(solve(&unit)?) {
            unit[c] = -1.0;
            if let Some(neg_hi) = optimum(solve(&unit)?) {
                let hi = -neg_hi;
                if hi - lo <= FIX_TOL * (1.0 + lo.abs()) {
                    fixed[c] = Some(0.5 * (lo + hi));
                }
            }
        }
        unit[c] = 0.0;
    }
    let free: Vec<usize> = (0..n).filter(|&c| fixed[c].is_none()).collect();

    // substitute fixed coordinates
    let restrict = |row: &[f64], rhs: f64| -> (Vec<f64>, f64) {
        let mut shift = 0.0;
        for (c, v) in fixed.iter().enumerate() {
            if let Some(v) = v {
                shift += row[c] * v;
            }
        }
        (free.iter().map(|&c| row[c]).collect(), rhs - shift)
    };
    let nf = free.len();
    let mut a = Matrix::zeros(0, nf);
    let mut b = Vec::new();
    let mut a_eq = Matrix::zeros(0, nf);
    let mut b_eq = Vec::new();
    for (r, &rhs) in p.a.iter_rows().zip(&p.b) {
        let (row, rhs_f) = restrict(r, rhs);
        if row.iter().all(|v| v.abs() <= 1e-12) {
            continue;
        }
        let tol = ROW_TOL * (1.0 + rhs.abs());
        // always tight: an equality; never tight: redundant
        let lo = optimum(solve(r)?);
        if lo.is_some_and(|lo| lo >= rhs - tol) {
            a_eq.push_row(&row);
            b_eq.push(rhs_f);
            continue;
        }
        let neg: Vec<f64> = r.iter().map(|v| -v).collect();
        if optimum(solve(&neg)?).is_some_and(|m| -m < rhs - tol) {
            continue;
        }
        a.push_row(&row);
        b.push(rhs_f);
    }
    for (r, &rhs) in p.a_eq.iter_rows().zip(&p.b_eq) {
        let (row, rhs_f) = restrict(r, rhs);
        if row.iter().all(|v| v.abs() <= 1e-12) {
            continue;
        }
        a_eq.push_row(&row);
        b_eq.push(rhs_f);
    }
    let (a_eq, b_eq) = independent_rows(&a_eq, &b_eq);
    Ok(PieceShape { fixed, free, a, b, a_eq, b_eq })
}

/// Keeps a maximal linearly independent subset of the rows of `[a | b]`.
fn independent_rows(a: &Matrix, b: &[f64]) -> (Matrix, Vec<f64>) {
    let cols = a.cols();
    let mut basis: Vec<(Vec<f64>, usize)> = Vec::new();
    let mut keep_a = Matrix::zeros(0, cols);
    let mut keep_b = Vec::new();
    for (r, &rhs) in a.iter_rows().zip(b) {
        let scale = r.iter().fold(0.0, |m: f64, v| m.max(v.abs()));
        let mut v = r.to_vec();
        for (bv, piv) in &basis {
            let f = v[*piv] / bv[*piv];
            if f != 0.0 {
                for (x, y) in v.iter_mut().zip(bv) {
                    *x -= f * y;
                }
            }
        }
        let (piv, mag) = v.iter().enumerate().fold((0, 0.0), |best, (i, x)| if x.abs() > best.1 { (i, x.abs()) } else { best });
        if mag > 1e-9 * scale.max(1e-300) {
            basis.push((v, piv));
            keep_a.push_row(r);
            keep_b.push(rhs);
        }
    }
    (keep_a, keep_b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::{is_feasible, solve_lp};

    fn interval(lo: f64, hi: f64) -> Polyhedron {
        Polyhedron::new(Matrix::from_rows(1, &[vec![1.0], vec![-1.0]]), vec![hi, -lo])
    }

    fn point(x: &[f64]) -> Polyhedron {
        let n = x.len();
        let mut p = Polyhedron::universe(n);
        for (i, &v) in x.iter().enumerate() {
            let mut r = vec![0.0; n];
            r[i] = 1.0;
            p.push_le(&r, v);
            r[i] = -1.0;
            p.push_le(&r, -v);
        }
        p
    }

    fn extreme(h: &HullFormulation, c: usize, sign: f64) -> f64 {
        let mut obj = vec![0.0; h.lifted_dim()];
        obj[c] = sign;
        match solve_lp(&h.lifted.lp(obj)).unwrap() {
            LpOutcome::Optimal { value, .. } => sign * value,
            o => panic!("{o:?}"),
        }
    }

    #[test]
    fn hull_of_two_intervals() {
        let h = balas_hull(&[interval(0.0, 1.0), interval(2.0, 3.0)]).unwrap();
        assert!((extreme(&h, 0, 1.0) - 0.0).abs() < 1e-9);
        assert!((extreme(&h, 0, -1.0) - 3.0).abs() < 1e-9);
    }

    fn projects(h: &HullFormulation, x: &[f64]) -> bool {
        let mut p = h.lifted.clone();
        for (i, &v) in x.iter().enumerate() {
            let mut r = vec![0.0; h.lifted_dim()];
            r[i] = 1.0;
            p.push_eq(&r, v);
        }
        is_feasible(&p).unwrap()
    }

    #[test]
    fn hull_of_two_points_is_the_segment() {
        let h = balas_hull(&[point(&[0.0, 0.0]), point(&[1.0, 1.0])]).unwrap();
        assert!(h.pieces.iter().all(|p| p.is_point()));
        assert!(projects(&h, &[0.5, 0.5]) && projects(&h, &[1.0, 1.0]));
        assert!(!projects(&h, &[1.0, 0.0]) && !projects(&h, &[1.5, 1.5]));
    }

    #[test]
    fn reduction_moves_tight_rows_to_equalities() {
        // x + y ≤ 1, -x - y ≤ -1, 0 ≤ x ≤ 1, y free above: a segment
        let p = Polyhedron::new(
            Matrix::from_rows(2, &[vec![1.0, 1.0], vec![-1.0, -1.0], vec![-1.0, 0.0], vec![1.0, 0.0], vec![1.0, 0.0]]),
            vec![1.0, -1.0, 0.0, 1.0, 5.0],
        );
        let s = reduce_piece(&p, 0).unwrap();
        assert!(s.fixed.iter().all(|f| f.is_none()));
        assert_eq!(s.a_eq.rows(), 1);
        // 0 ≤ x ≤ 1 survive, x ≤ 5 is never tight
        assert_eq!(s.a.rows(), 2);
    }

    #[test]
    fn errors() {
        assert_eq!(balas_hull(&[]), Err(LcpError::EmptyPieceList));
        assert!(matches!(balas_hull(&[interval(2.0, 1.0)]), Err(LcpError::EmptyPiece(0))));
        assert!(matches!(
            balas_hull(&[interval(0.0, 1.0), point(&[0.0, 0.0])]),
            Err(LcpError::DimensionMismatch(_))
        ));
    }
}
