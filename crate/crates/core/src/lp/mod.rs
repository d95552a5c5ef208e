//! Linear programming: a dense two-phase bounded simplex and the polyhedron type
//! shared by the rest of the crate.

mod simplex;

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::linalg::{dot, pow2_scale, Matrix};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LpError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(&'static str),
    #[error("non-finite coefficient in {0}")]
    NonFinite(&'static str),
    #[error("simplex failed to converge")]
    NumericalFailure,
}

/// `min cᵀx` subject to `A x ≤ b`, `A_eq x = b_eq`, `lower ≤ x ≤ upper`.
/// Infinite bounds are allowed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    pub a: Matrix,
    pub b: Vec<f64>,
    pub a_eq: Matrix,
    pub b_eq: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl LinearProgram {
    /// No rows, every variable free.
    pub fn new(objective: Vec<f64>) -> Self {
        let n = objective.len();
        LinearProgram {
            objective,
            a: Matrix::zeros(0, n),
            b: Vec::new(),
            a_eq: Matrix::zeros(0, n),
            b_eq: Vec::new(),
            lower: vec![f64::NEG_INFINITY; n],
            upper: vec![f64::INFINITY; n],
        }
    }

    pub fn dim(&self) -> usize {
        self.objective.len()
    }

    pub fn le(mut self, row: &[f64], rhs: f64) -> Self {
        self.a.push_row(row);
        self.b.push(rhs);
        self
    }

    pub fn eq(mut self, row: &[f64], rhs: f64) -> Self {
        self.a_eq.push_row(row);
        self.b_eq.push(rhs);
        self
    }

    pub fn bounds(mut self, j: usize, lower: f64, upper: f64) -> Self {
        self.lower[j] = lower;
        self.upper[j] = upper;
        self
    }

    pub fn nonnegative(mut self) -> Self {
        self.lower.iter_mut().for_each(|l| *l = l.max(0.0));
        self
    }

    fn validate(&self) -> Result<(), LpError> {
        let n = self.dim();
        if self.a.cols() != n || self.a_eq.cols() != n {
            return Err(LpError::DimensionMismatch("constraint width"));
        }
        if self.a.rows() != self.b.len() || self.a_eq.rows() != self.b_eq.len() {
            return Err(LpError::DimensionMismatch("right-hand side length"));
        }
        if self.lower.len() != n || self.upper.len() != n {
            return Err(LpError::DimensionMismatch("bound length"));
        }
        if !self.objective.iter().all(|v| v.is_finite()) {
            return Err(LpError::NonFinite("objective"));
        }
        if !self.a.is_finite() || !self.a_eq.is_finite() {
            return Err(LpError::NonFinite("constraint matrix"));
        }
        if self.b.iter().chain(&self.b_eq).any(|v| v.is_nan()) {
            return Err(LpError::NonFinite("right-hand side"));
        }
        if self.lower.iter().chain(&self.upper).any(|v| v.is_nan()) {
            return Err(LpError::NonFinite("bounds"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal { point: Vec<f64>, value: f64 },
    Infeasible,
    /// `point` is feasible and `ray` a recession direction with negative cost.
    Unbounded { point: Vec<f64>, ray: Vec<f64> },
}

impl LpOutcome {
    pub fn point(&self) -> Option<&[f64]> {
        match self {
            LpOutcome::Optimal { point, .. } | LpOutcome::Unbounded { point, .. } => Some(point),
            LpOutcome::Infeasible => None,
        }
    }
}

pub fn solve_lp(lp: &LinearProgram) -> Result<LpOutcome, LpError> {
    lp.validate()?;
    let sys = RowSystem::stack(&lp.a, &lp.a_eq);
    let mut lo = vec![f64::NEG_INFINITY; lp.b.len()];
    lo.extend_from_slice(&lp.b_eq);
    let mut hi = lp.b.clone();
    hi.extend_from_slice(&lp.b_eq);
    sys.solve(&lp.objective, &lo, &hi, &lp.lower, &lp.upper)
}

/// `{x : A x ≤ b, A_eq x = b_eq}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polyhedron {
    pub a: Matrix,
    pub b: Vec<f64>,
    #[serde(default)]
    pub a_eq: Matrix,
    #[serde(default)]
    pub b_eq: Vec<f64>,
}

impl Polyhedron {
    pub fn new(a: Matrix, b: Vec<f64>) -> Self {
        let n = a.cols();
        Polyhedron { a, b, a_eq: Matrix::zeros(0, n), b_eq: Vec::new() }
    }

    pub fn with_equalities(a: Matrix, b: Vec<f64>, a_eq: Matrix, b_eq: Vec<f64>) -> Self {
        Polyhedron { a, b, a_eq, b_eq }
    }

    /// Whole space of dimension `n`.
    pub fn universe(n: usize) -> Self {
        Polyhedron::new(Matrix::zeros(0, n), Vec::new())
    }

    pub fn dim(&self) -> usize {
        self.a.cols().max(self.a_eq.cols())
    }

    pub fn push_le(&mut self, row: &[f64], rhs: f64) {
        self.a.push_row(row);
        self.b.push(rhs);
    }

    pub fn push_eq(&mut self, row: &[f64], rhs: f64) {
        self.a_eq.push_row(row);
        self.b_eq.push(rhs);
    }

    /// Membership with an absolute slack of `tol` on every row.
    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        self.a.iter_rows().zip(&self.b).all(|(r, &b)| dot(r, x) <= b + tol)
            && self.a_eq.iter_rows().zip(&self.b_eq).all(|(r, &b)| (dot(r, x) - b).abs() <= tol)
    }

    /// The LP `min cᵀx` over this polyhedron.
    pub fn lp(&self, objective: Vec<f64>) -> LinearProgram {
        let n = self.dim();
        LinearProgram {
            objective,
            a: self.a.clone(),
            b: self.b.clone(),
            a_eq: if self.a_eq.cols() == n { self.a_eq.clone() } else { Matrix::zeros(0, n) },
            b_eq: self.b_eq.clone(),
            lower: vec![f64::NEG_INFINITY; n],
            upper: vec![f64::INFINITY; n],
        }
    }

    pub fn minimize(&self, objective: &[f64]) -> Result<LpOutcome, LpError> {
        solve_lp(&self.lp(objective.to_vec()))
    }
}

pub fn is_feasible(poly: &Polyhedron) -> Result<bool, LpError> {
    Ok(!matches!(poly.minimize(&vec![0.0; poly.dim()])?, LpOutcome::Infeasible))
}

/// Row-equilibrated constraint matrix shared by many solves that differ only
/// in bounds and costs (the branch-and-bound nodes).
#[derive(Debug, Clone)]
pub(crate) struct RowSystem {
    a: Matrix,
    original: Matrix,
    scale: Vec<f64>,
}

impl RowSystem {
    pub(crate) fn new(a: Matrix) -> Self {
        let mut scaled = a.clone();
        let scale: Vec<f64> = (0..a.rows())
            .map(|i| {
                let s = pow2_scale(a.row(i).iter().fold(0.0, |m: f64, v| m.max(v.abs())));
                scaled.row_mut(i).iter_mut().for_each(|v| *v *= s);
                s
            })
            .collect();
        RowSystem { a: scaled, original: a, scale }
    }

    pub(crate) fn stack(a: &Matrix, a_eq: &Matrix) -> Self {
        let mut all = a.clone();
        for r in a_eq.iter_rows() {
            all.push_row(r);
        }
        RowSystem::new(all)
    }

    pub(crate) fn cols(&self) -> usize {
        self.a.cols()
    }


    /// `min cᵀx` s.t. `row_lo ≤ A x ≤ row_hi`, `col_lo ≤ x ≤ col_hi`.
    pub(crate) fn solve(
        &self,
        c: &[f64],
        row_lo: &[f64],
        row_hi: &[f64],
        col_lo: &[f64],
        col_hi: &[f64],
    ) -> Result<LpOutcome, LpError> {
        let n = self.a.cols();
        if col_lo.iter().zip(col_hi).any(|(l, h)| l > h) {
            return Ok(LpOutcome::Infeasible);
        }
        if row_lo.iter().zip(row_hi).any(|(l, h)| l > h) {
            return Ok(LpOutcome::Infeasible);
        }
        let lo: Vec<f64> = row_lo.iter().zip(&self.scale).map(|(v, s)| v * s).collect();
        let hi: Vec<f64> = row_hi.iter().zip(&self.scale).map(|(v, s)| v * s).collect();
        let cs = pow2_scale(c.iter().fold(0.0, |m: f64, v| m.max(v.abs())));
        let cost: Vec<f64> = c.iter().map(|v| v * cs).collect();
        let problem = simplex::Problem {
            c: &cost,
            a: &self.a,
            row_lo: &lo,
            row_hi: &hi,
            col_lo,
            col_hi,
        };
        match simplex::solve(&problem) {
            simplex::Raw::Optimal(x) => {
                debug_assert_eq!(x.len(), n);
                let value = dot(c, &x);
                Ok(LpOutcome::Optimal { point: x, value })
            }
            simplex::Raw::Infeasible => Ok(LpOutcome::Infeasible),
            simplex::Raw::Unbounded(point, ray) => Ok(LpOutcome::Unbounded { point, ray }),
            simplex::Raw::Stalled => Err(LpError::NumericalFailure),
        }
    }

    /// Largest row or bound violation of `x`, relative to `1 + |bound|`.
    #[allow(dead_code)]
    pub(crate) fn violation(&self, x: &[f64], row_lo: &[f64], row_hi: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, r) in self.original.iter_rows().enumerate() {
            let v = dot(r, x);
            worst = worst
                .max((row_lo[i] - v) / (1.0 + row_lo[i].abs()))
                .max((v - row_hi[i]) / (1.0 + row_hi[i].abs()));
        }
        worst
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opt(o: LpOutcome) -> (Vec<f64>, f64) {
        match o {
            LpOutcome::Optimal { point, value } => (point, value),
            other => panic!("expected optimum, got {other:?}"),
        }
    }

    #[test]
    fn box_minimum() {
        let lp = LinearProgram::new(vec![1.0]).bounds(0, 1.0, 3.0);
        let (x, v) = opt(solve_lp(&lp).unwrap());
        assert!((x[0] - 1.0).abs() < 1e-9 && (v - 1.0).abs() < 1e-9);
    }

    #[test]
    fn unbounded_ray() {
        let lp = LinearProgram::new(vec![-1.0]).nonnegative();
        match solve_lp(&lp).unwrap() {
            LpOutcome::Unbounded { ray, .. } => assert!(ray[0] > 0.0),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn equality_system() {
        let lp = LinearProgram::new(vec![1.0, 1.0])
            .le(&[-1.0, -1.0], -2.0)
            .eq(&[1.0, -1.0], 0.0)
            .nonnegative();
        let (x, v) = opt(solve_lp(&lp).unwrap());
        assert!((x[0] - 1.0).abs() < 1e-9 && (x[1] - 1.0).abs() < 1e-9);
        assert!((v - 2.0).abs() < 1e-9);
    }

    #[test]
    fn empty_polyhedron() {
        let p = Polyhedron::new(
            Matrix::from_rows(2, &[vec![1.0, 1.0], vec![-1.0, 0.0], vec![0.0, -1.0]]),
            vec![1.0, -0.6, -0.6],
        );
        assert!(!is_feasible(&p).unwrap());
        let q = Polyhedron::new(Matrix::from_rows(2, &[vec![1.0, 1.0]]), vec![1.0]);
        assert!(is_feasible(&q).unwrap());
    }

    #[test]
    fn degenerate_cycling_example() {
        // Beale's example cycles under the textbook largest-coefficient rule.
        let lp = LinearProgram::new(vec![-0.75, 150.0, -0.02, 6.0])
            .le(&[0.25, -60.0, -0.04, 9.0], 0.0)
            .le(&[0.5, -90.0, -0.02, 3.0], 0.0)
            .le(&[0.0, 0.0, 1.0, 0.0], 1.0)
            .nonnegative();
        let (_, v) = opt(solve_lp(&lp).unwrap());
        assert!((v + 0.05).abs() < 1e-9, "{v}");
    }

    #[test]
    fn free_variables_and_ranges() {
        // max x + y on the diamond |x| + |y| ≤ 1 written with four rows
        let lp = LinearProgram::new(vec![-1.0, -2.0])
            .le(&[1.0, 1.0], 1.0)
            .le(&[1.0, -1.0], 1.0)
            .le(&[-1.0, 1.0], 1.0)
            .le(&[-1.0, -1.0], 1.0);
        let (x, v) = opt(solve_lp(&lp).unwrap());
        assert!((v + 2.0).abs() < 1e-9 && x[1] > 0.99);
    }

    #[test]
    fn rejects_bad_input() {
        let mut lp = LinearProgram::new(vec![1.0, 2.0]);
        lp.lower.pop();
        assert!(matches!(solve_lp(&lp), Err(LpError::DimensionMismatch(_))));
        let lp = LinearProgram::new(vec![f64::NAN]);
        assert!(matches!(solve_lp(&lp), Err(LpError::NonFinite(_))));
    }

    #[test]
    fn infeasible_bounds() {
        let lp = LinearProgram::new(vec![1.0]).bounds(0, 2.0, 1.0);
        assert_eq!(solve_lp(&lp).unwrap(), LpOutcome::Infeasible);
    }
}
