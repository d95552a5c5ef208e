//! Nash games among Stackelberg leaders.
//!
//! Each leader picks `x` subject to `A (x, y) ≤ b` where `y` is an equilibrium
//! of its followers' game parameterized by `x`. Replacing the followers by their
//! KKT conditions makes every leader's region a complementarity set; the
//! algorithms here convexify those regions and solve the resulting game.

mod algorithms;
mod deviation;
mod hull_game;

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::lcp::{ComplementaritySet, Encoding, LcpError};
use crate::linalg::{dot, Matrix};
use crate::nash::{kkt_lcp, FacileNashGame, GameError, KktLayout, MarketClearing};

pub use algorithms::{
    full_enumeration, inner_approximation, inner_approximation_from, pure_enumeration, restricted_equilibrium,
    ExtensionStrategy,
    SolveOptions,
};
pub use deviation::{deviation_check, Deviation, DeviationReport};
pub use hull_game::{decompose_mixed, HullGame, LeaderHull};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum NaspError {
    #[error("leader {leader}: {what}")]
    Dimension { leader: usize, what: &'static str },
    #[error(transparent)]
    Game(#[from] GameError),
    #[error(transparent)]
    Lcp(#[from] LcpError),
    #[error("decomposition failed for leader {leader}: {reason}")]
    Decomposition { leader: usize, reason: &'static str },
    #[error("numerical failure: {0}")]
    Numerical(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StackelbergLeader {
    pub leader_dim: usize,
    /// Followers, parameterized by the leader's `leader_dim` variables.
    pub followers: FacileNashGame,
    /// Rows over `(x, y)`.
    pub a: Matrix,
    pub b: Vec<f64>,
    #[serde(default)]
    pub a_eq: Matrix,
    #[serde(default)]
    pub b_eq: Vec<f64>,
}

impl StackelbergLeader {
    /// A leader without followers over `leader_dim` variables and no rows.
    pub fn alone(leader_dim: usize) -> Self {
        StackelbergLeader {
            leader_dim,
            followers: FacileNashGame { players: Vec::new(), cross: Vec::new(), params: leader_dim, clearing: None },
            a: Matrix::zeros(0, leader_dim),
            b: Vec::new(),
            a_eq: Matrix::zeros(0, leader_dim),
            b_eq: Vec::new(),
        }
    }

    /// Width of the rows in `a`: leader plus follower variables.
    pub fn primal_dim(&self) -> usize {
        self.leader_dim + self.followers.total_dim()
    }

    pub fn push_le(&mut self, row: &[f64], rhs: f64) {
        self.a.push_row(row);
        self.b.push(rhs);
    }

    pub fn push_eq(&mut self, row: &[f64], rhs: f64) {
        self.a_eq.push_row(row);
        self.b_eq.push(rhs);
    }

    pub fn layout(&self) -> Result<KktLayout, GameError> {
        Ok(kkt_lcp(&self.followers)?.layout)
    }

    /// Dimension of the leader's full vector `(x, y, multipliers)`.
    pub fn full_dim(&self) -> Result<usize, GameError> {
        Ok(self.layout()?.dim)
    }
}

/// `(c + Σ_j C_j x^j)ᵀ x` over the leader's full vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeaderObjective {
    pub c: Vec<f64>,
    /// `cross[j]` is `n_i x n_j` for every rival `j` (entry for `i` itself unused).
    pub cross: Vec<Matrix>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Nasp {
    pub leaders: Vec<StackelbergLeader>,
    pub objectives: Vec<LeaderObjective>,
    /// Blocks over each leader's full vector.
    #[serde(default)]
    pub clearing: Option<MarketClearing>,
}

impl Nasp {
    pub fn full_dims(&self) -> Result<Vec<usize>, NaspError> {
        self.leaders.iter().map(|l| Ok(l.full_dim()?)).collect()
    }

    pub fn validate(&self) -> Result<Vec<usize>, NaspError> {
        if self.objectives.len() != self.leaders.len() {
            return Err(NaspError::Dimension { leader: self.objectives.len(), what: "one objective per leader" });
        }
        let dims = self.full_dims()?;
        for (i, (l, o)) in self.leaders.iter().zip(&self.objectives).enumerate() {
            let err = |what| NaspError::Dimension { leader: i, what };
            if l.followers.params != l.leader_dim {
                return Err(err("followers must be parameterized by the leader variables"));
            }
            let pd = l.primal_dim();
            if l.a.cols() != pd || l.a.rows() != l.b.len() {
                return Err(err("leader rows over (x, y)"));
            }
            if l.a_eq.cols() != pd || l.a_eq.rows() != l.b_eq.len() {
                if !(l.a_eq.rows() == 0 && l.b_eq.is_empty()) {
                    return Err(err("leader equalities over (x, y)"));
                }
            }
            if o.c.len() != dims[i] {
                return Err(err("objective length"));
            }
            if o.cross.len() != self.leaders.len() {
                return Err(err("one cross block per leader"));
            }
            for (j, m) in o.cross.iter().enumerate() {
                if j != i && (m.rows() != dims[i] || m.cols() != dims[j]) {
                    return Err(err("cross block shape"));
                }
            }
        }
        if let Some(cl) = &self.clearing {
            if cl.blocks.len() != self.leaders.len() {
                return Err(NaspError::Dimension { leader: cl.blocks.len(), what: "one clearing block per leader" });
            }
            for (i, g) in cl.blocks.iter().enumerate() {
                if g.rows() != cl.rhs.len() || g.cols() != dims[i] {
                    return Err(NaspError::Dimension { leader: i, what: "clearing block shape" });
                }
            }
        }
        Ok(dims)
    }

    /// Cost coefficients leader `i` faces against fixed rival points and prices.
    pub fn effective_cost(&self, i: usize, rivals: &[Vec<f64>], prices: &[f64]) -> Vec<f64> {
        let o = &self.objectives[i];
        let mut c = o.c.clone();
        for (j, xj) in rivals.iter().enumerate() {
            if j == i {
                continue;
            }
            let m = &o.cross[j];
            for (a, ca) in c.iter_mut().enumerate() {
                *ca += dot(m.row(a), xj);
            }
        }
        if let Some(cl) = &self.clearing {
            let g = &cl.blocks[i];
            for (k, &p) in prices.iter().enumerate() {
                for (a, ca) in c.iter_mut().enumerate() {
                    *ca += p * g[(k, a)];
                }
            }
        }
        c
    }
}

/// The leader's region: followers replaced by their KKT system, plus the
/// leader rows widened to the full vector.
pub fn leader_feasible_set(l: &StackelbergLeader) -> Result<ComplementaritySet, NaspError> {
    let kkt = kkt_lcp(&l.followers)?;
    let mut s = kkt.set;
    let pd = l.primal_dim();
    let dim = s.dim;
    let widen = |r: &[f64]| {
        let mut row = vec![0.0; dim];
        row[..pd].copy_from_slice(r);
        row
    };
    for (r, &b) in l.a.iter_rows().zip(&l.b) {
        let row = widen(r);
        s.push_le(&row, b);
    }
    for (r, &b) in l.a_eq.iter_rows().zip(&l.b_eq) {
        let row = widen(r);
        s.push_eq(&row, b);
    }
    s.gap = None;
    Ok(s)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupportPoint {
    pub point: Vec<f64>,
    pub probability: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub encoding: Option<Encoding>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixedStrategy {
    pub support: Vec<SupportPoint>,
}

impl MixedStrategy {
    pub fn pure(point: Vec<f64>) -> Self {
        MixedStrategy { support: vec![SupportPoint { point, probability: 1.0, encoding: None }] }
    }

    pub fn is_pure(&self) -> bool {
        self.support.len() == 1
    }

    pub fn mean(&self) -> Vec<f64> {
        let n = self.support.first().map_or(0, |s| s.point.len());
        let mut m = vec![0.0; n];
        for s in &self.support {
            for (mi, v) in m.iter_mut().zip(&s.point) {
                *mi += s.probability * v;
            }
        }
        m
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixedProfile {
    pub leaders: Vec<MixedStrategy>,
    #[serde(default)]
    pub prices: Vec<f64>,
}

impl MixedProfile {
    pub fn means(&self) -> Vec<Vec<f64>> {
        self.leaders.iter().map(|s| s.mean()).collect()
    }

    pub fn is_pure(&self) -> bool {
        self.leaders.iter().all(|s| s.is_pure())
    }

    /// Expected objective of every leader.
    pub fn payoffs(&self, g: &Nasp) -> Vec<f64> {
        let means = self.means();
        (0..self.leaders.len())
            .map(|i| dot(&g.effective_cost(i, &means, &self.prices), &means[i]))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Status {
    Pne,
    Mne,
    NoEquilibrium,
    TimeLimit,
}

impl Status {
    pub fn has_equilibrium(self) -> bool {
        matches!(self, Status::Pne | Status::Mne)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub algorithm: String,
    pub status: Status,
    pub profile: Option<MixedProfile>,
    pub iterations: usize,
    /// Nonempty pieces found per leader.
    pub pieces_enumerated: Vec<usize>,
    /// Pieces inside the convexified region per leader when solving stopped.
    pub pieces_included: Vec<usize>,
    pub nodes: usize,
}
