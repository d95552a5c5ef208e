//! Complementarity-constrained sets and their polyhedral pieces.
//!
//! A [`ComplementaritySet`] is
//! `{x : A x ≤ b, A_eq x = b_eq, z = M x + q, 0 ≤ x_{c_i} ⊥ z_i ≥ 0}`.
//! Pinning one side of every pair to zero selects a polyhedron; the set is the
//! union of the nonempty ones.

mod branch;
pub(crate) mod enumerate;
mod hull;

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::linalg::{dot, Matrix};
use crate::lp::{LpError, LpOutcome, Polyhedron, RowSystem};

pub use branch::{optimize_over_set, optimize_over_set_with, BranchOptions, SetOutcome};
pub use enumerate::{enumerate_pieces, enumerate_pieces_with, Piece, DEFAULT_PIECE_CAP_BITS};
pub use hull::{balas_hull, reduce_piece, HullFormulation, PieceShape};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LcpError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(&'static str),
    #[error("variable {0} appears in more than one complementarity pair")]
    DuplicateComplementarity(usize),
    #[error("complementarity index {0} out of range")]
    IndexOutOfRange(usize),
    #[error("{count} complementarities exceed the enumeration cap of {cap}")]
    TooManyComplementarities { count: usize, cap: usize },
    #[error("hull of an empty list of pieces")]
    EmptyPieceList,
    #[error("piece {0} is empty")]
    EmptyPiece(usize),
    #[error("encoding has {got} bits, set has {expected} pairs")]
    EncodingLength { expected: usize, got: usize },
    #[error("time limit reached")]
    TimeLimit,
    #[error(transparent)]
    Lp(#[from] LpError),
}

/// One bit per complementarity pair: `false` pins `x_{c_i}` to zero, `true`
/// pins `z_i` to zero. Ordered lexicographically with pair 0 most significant.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Encoding(pub Vec<bool>);

impl Encoding {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn from_bits(bits: &[u8]) -> Self {
        Encoding(bits.iter().map(|&b| b != 0).collect())
    }
}

impl fmt::Debug for Encoding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("e")?;
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Display for Encoding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl Serialize for Encoding {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let text: String = self.0.iter().map(|&b| if b { '1' } else { '0' }).collect();
        s.serialize_str(&text)
    }
}

impl<'de> Deserialize<'de> for Encoding {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        text.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(serde::de::Error::custom("encoding must be a 0/1 string")),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Encoding)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplementaritySet {
    pub dim: usize,
    pub a: Matrix,
    pub b: Vec<f64>,
    pub a_eq: Matrix,
    pub b_eq: Vec<f64>,
    pub m: Matrix,
    pub q: Vec<f64>,
    /// `compl[i]` is the variable paired with row `i` of `M x + q`.
    pub compl: Vec<usize>,
    /// Linear functional `gᵀx` equal to `Σ x_{c_i} z_i` everywhere on the
    /// equality subspace, when one is known. Lets branch-and-bound certify
    /// complementarity with a single LP.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gap: Option<Vec<f64>>,
}

impl ComplementaritySet {
    /// A set with no side constraints and no pairs.
    pub fn free(dim: usize) -> Self {
        ComplementaritySet {
            dim,
            a: Matrix::zeros(0, dim),
            b: Vec::new(),
            a_eq: Matrix::zeros(0, dim),
            b_eq: Vec::new(),
            m: Matrix::zeros(0, dim),
            q: Vec::new(),
            compl: Vec::new(),
            gap: None,
        }
    }

    pub fn pairs(&self) -> usize {
        self.compl.len()
    }

    pub fn push_le(&mut self, row: &[f64], rhs: f64) {
        self.a.push_row(row);
        self.b.push(rhs);
    }

    pub fn push_eq(&mut self, row: &[f64], rhs: f64) {
        self.a_eq.push_row(row);
        self.b_eq.push(rhs);
    }

    /// Adds `0 ≤ x_var ⊥ row·x + q ≥ 0`.
    pub fn pair(&mut self, var: usize, row: &[f64], q: f64) {
        self.m.push_row(row);
        self.q.push(q);
        self.compl.push(var);
    }

    pub fn validate(&self) -> Result<(), LcpError> {
        let n = self.dim;
        if self.a.cols() != n || self.a_eq.cols() != n || self.m.cols() != n {
            return Err(LcpError::DimensionMismatch("matrix width differs from dim"));
        }
        if self.a.rows() != self.b.len() || self.a_eq.rows() != self.b_eq.len() {
            return Err(LcpError::DimensionMismatch("right-hand side length"));
        }
        if self.m.rows() != self.q.len() || self.m.rows() != self.compl.len() {
            return Err(LcpError::DimensionMismatch("M, q and pair list disagree"));
        }
        if let Some(g) = &self.gap {
            if g.len() != n {
                return Err(LcpError::DimensionMismatch("gap functional length"));
            }
        }
        let mut seen = vec![false; n];
        for &c in &self.compl {
            if c >= n {
                return Err(LcpError::IndexOutOfRange(c));
            }
            if seen[c] {
                return Err(LcpError::DuplicateComplementarity(c));
            }
            seen[c] = true;
        }
        let finite = self.a.is_finite()
            && self.a_eq.is_finite()
            && self.m.is_finite()
            && self.b.iter().chain(&self.b_eq).chain(&self.q).all(|v| v.is_finite());
        if !finite {
            return Err(LcpError::Lp(LpError::NonFinite("complementarity set")));
        }
        Ok(())
    }

    /// `z = M x + q`.
    pub fn z(&self, x: &[f64]) -> Vec<f64> {
        self.m.iter_rows().zip(&self.q).map(|(r, q)| dot(r, x) + q).collect()
    }

    /// Membership with absolute tolerance on rows, signs and products.
    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        if x.len() != self.dim {
            return false;
        }
        let rows_ok = self.a.iter_rows().zip(&self.b).all(|(r, &b)| dot(r, x) <= b + tol)
            && self.a_eq.iter_rows().zip(&self.b_eq).all(|(r, &b)| (dot(r, x) - b).abs() <= tol);
        rows_ok
            && self.z(x).iter().zip(&self.compl).all(|(&z, &c)| {
                let xc = x[c];
                xc >= -tol && z >= -tol && xc * z <= tol
            })
    }

    /// Largest complementarity product violation `max(0, x_c) * max(0, z)`.
    pub fn complementarity_violation(&self, x: &[f64]) -> f64 {
        self.z(x)
            .iter()
            .zip(&self.compl)
            .map(|(&z, &c)| x[c].max(0.0) * z.max(0.0))
            .fold(0.0, f64::max)
    }

    /// Column and row bounds of the relaxation `O₀` over the stacked rows
    /// `[A; A_eq; M]`, shared by the selection and branching code.
    pub(crate) fn lp_form(&self) -> SetLp {
        let n = self.dim;
        let mut rows = self.a.clone();
        for r in self.a_eq.iter_rows() {
            rows.push_row(r);
        }
        for r in self.m.iter_rows() {
            rows.push_row(r);
        }
        let mut row_lo = vec![f64::NEG_INFINITY; self.a.rows()];
        let mut row_hi = self.b.clone();
        row_lo.extend_from_slice(&self.b_eq);
        row_hi.extend_from_slice(&self.b_eq);
        row_lo.extend(self.q.iter().map(|q| -q));
        row_hi.extend(core::iter::repeat(f64::INFINITY).take(self.q.len()));
        let mut col_lo = vec![f64::NEG_INFINITY; n];
        for &c in &self.compl {
            col_lo[c] = 0.0;
        }
        SetLp {
            sys: RowSystem::new(rows),
            row_lo,
            row_hi,
            col_lo,
            col_hi: vec![f64::INFINITY; n],
            m_offset: self.a.rows() + self.a_eq.rows(),
            compl: self.compl.clone(),
        }
    }
}

/// The relaxation `O₀` in LP form; pinning sides only edits bounds.
#[derive(Debug, Clone)]
pub(crate) struct SetLp {
    pub sys: RowSystem,
    pub row_lo: Vec<f64>,
    pub row_hi: Vec<f64>,
    pub col_lo: Vec<f64>,
    pub col_hi: Vec<f64>,
    pub m_offset: usize,
    pub compl: Vec<usize>,
}

/// Bounds of one node: the base bounds plus pinned sides.
#[derive(Debug, Clone)]
pub(crate) struct Bounds {
    pub row_lo: Vec<f64>,
    pub row_hi: Vec<f64>,
    pub col_lo: Vec<f64>,
    pub col_hi: Vec<f64>,
}

impl SetLp {
    pub fn base(&self) -> Bounds {
        Bounds {
            row_lo: self.row_lo.clone(),
            row_hi: self.row_hi.clone(),
            col_lo: self.col_lo.clone(),
            col_hi: self.col_hi.clone(),
        }
    }

    /// Pins side `bit` of pair `i`.
    pub fn pin(&self, bounds: &mut Bounds, i: usize, bit: bool) {
        if bit {
            let r = self.m_offset + i;
            bounds.row_hi[r] = bounds.row_lo[r];
        } else {
            bounds.col_hi[self.compl[i]] = 0.0;
        }
    }

    pub fn solve(&self, c: &[f64], b: &Bounds) -> Result<LpOutcome, LpError> {
        self.sys.solve(c, &b.row_lo, &b.row_hi, &b.col_lo, &b.col_hi)
    }

    pub fn feasible(&self, b: &Bounds) -> Result<bool, LpError> {
        let zero = vec![0.0; self.sys.cols()];
        Ok(!matches!(self.solve(&zero, b)?, LpOutcome::Infeasible))
    }
}

/// `O₀`: side constraints plus `x_{c_i} ≥ 0` and `z_i ≥ 0`, without products.
pub fn polyhedral_relaxation(s: &ComplementaritySet) -> Result<Polyhedron, LcpError> {
    s.validate()?;
    let n = s.dim;
    let mut p = Polyhedron::with_equalities(s.a.clone(), s.b.clone(), s.a_eq.clone(), s.b_eq.clone());
    for (i, &c) in s.compl.iter().enumerate() {
        let mut row = vec![0.0; n];
        row[c] = -1.0;
        p.push_le(&row, 0.0);
        let neg: Vec<f64> = s.m.row(i).iter().map(|v| -v).collect();
        p.push_le(&neg, s.q[i]);
    }
    Ok(p)
}

/// `P(e) ∩ O₀` as one inequality/equality system.
pub fn selected_polyhedron(s: &ComplementaritySet, e: &Encoding) -> Result<Polyhedron, LcpError> {
    s.validate()?;
    if e.len() != s.pairs() {
        return Err(LcpError::EncodingLength { expected: s.pairs(), got: e.len() });
    }
    let n = s.dim;
    let mut p = Polyhedron::with_equalities(s.a.clone(), s.b.clone(), s.a_eq.clone(), s.b_eq.clone());
    for (i, &c) in s.compl.iter().enumerate() {
        let mut unit = vec![0.0; n];
        if e.0[i] {
            p.push_eq(s.m.row(i), -s.q[i]);
            unit[c] = -1.0;
            p.push_le(&unit, 0.0);
        } else {
            unit[c] = 1.0;
            p.push_eq(&unit, 0.0);
            let neg: Vec<f64> = s.m.row(i).iter().map(|v| -v).collect();
            p.push_le(&neg, s.q[i]);
        }
    }
    Ok(p)
}

pub fn contains(s: &ComplementaritySet, x: &[f64], tol: f64) -> bool {
    s.contains(x, tol)
}

/// Encoding of the piece a point most plausibly belongs to: pair `i` takes
/// bit 1 when `x_{c_i} > z_i` (so `z_i` is the side at zero), ties to 0.
pub fn encoding_of(s: &ComplementaritySet, x: &[f64]) -> Encoding {
    Encoding(s.z(x).iter().zip(&s.compl).map(|(&z, &c)| x[c] > z).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::is_feasible;

    /// `0 ≤ x ⊥ a x + q ≥ 0` in one variable.
    fn scalar(a: f64, q: f64) -> ComplementaritySet {
        let mut s = ComplementaritySet::free(1);
        s.pair(0, &[a], q);
        s
    }

    #[test]
    fn relaxation_of_shifted_pair() {
        // 0 ≤ x ⊥ x - 1 ≥ 0 relaxes to [1, ∞)
        let p = polyhedral_relaxation(&scalar(1.0, -1.0)).unwrap();
        assert!(p.contains(&[1.0], 1e-12) && p.contains(&[7.0], 1e-12));
        assert!(!p.contains(&[0.999], 1e-9));
        match p.minimize(&[1.0]).unwrap() {
            LpOutcome::Optimal { value, .. } => assert!((value - 1.0).abs() < 1e-9),
            o => panic!("{o:?}"),
        }
    }

    #[test]
    fn selected_pieces_of_unit_interval_pair() {
        // 0 ≤ x ⊥ 1 - x ≥ 0: e=0 gives {0}, e=1 gives {1}
        let s = scalar(-1.0, 1.0);
        let p0 = selected_polyhedron(&s, &Encoding(vec![false])).unwrap();
        let p1 = selected_polyhedron(&s, &Encoding(vec![true])).unwrap();
        assert!(p0.contains(&[0.0], 1e-12) && !p0.contains(&[0.5], 1e-9));
        assert!(p1.contains(&[1.0], 1e-12) && !p1.contains(&[0.5], 1e-9));
        assert!(is_feasible(&p0).unwrap() && is_feasible(&p1).unwrap());
    }

    #[test]
    fn membership() {
        let s = scalar(1.0, -1.0);
        assert!(s.contains(&[1.0], 1e-7));
        assert!(!s.contains(&[0.5], 1e-7));
        assert!(!s.contains(&[2.0], 1e-7));
    }

    #[test]
    fn validation_errors() {
        let mut s = ComplementaritySet::free(2);
        s.pair(0, &[1.0, 0.0], 0.0);
        s.pair(0, &[0.0, 1.0], 0.0);
        assert_eq!(s.validate(), Err(LcpError::DuplicateComplementarity(0)));
        let mut s = ComplementaritySet::free(1);
        s.pair(3, &[1.0], 0.0);
        assert_eq!(s.validate(), Err(LcpError::IndexOutOfRange(3)));
        assert!(matches!(
            selected_polyhedron(&scalar(1.0, 0.0), &Encoding(vec![])),
            Err(LcpError::EncodingLength { .. })
        ));
    }

    #[test]
    fn encoding_text_roundtrip() {
        let e = Encoding::from_bits(&[0, 1, 1]);
        assert_eq!(alloc::format!("{e}"), "011");
        assert!(Encoding::from_bits(&[0, 1]) < Encoding::from_bits(&[1, 0]));
    }
}
