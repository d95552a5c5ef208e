//! Simultaneous games among convex quadratic players and their joint KKT system.
//!
//! Player `i` solves
//! `min ½ xᵀQ_i x + (c_i + C_i x⁻ⁱ + D_i θ + G_iᵀπ)ᵀ x` s.t.
//! `A_i x ≤ b_i - P_i θ`, `E_i x = f_i - R_i θ`,
//! where `x⁻ⁱ` stacks the rivals in index order, `θ` are outside parameters
//! (leader decisions when the game is a follower game) and `π` is the price of
//! an optional joint clearing condition `Σ_i G_i xⁱ = h`.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::Range;

use serde::{Deserialize, Serialize};

use crate::budget::{Budget, Unlimited};
use crate::lcp::{optimize_over_set_with, BranchOptions, ComplementaritySet, LcpError, SetOutcome};
use crate::linalg::{is_psd, Matrix};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GameError {
    #[error("player {player}: {what}")]
    Dimension { player: usize, what: &'static str },
    #[error("player {0} has a quadratic term that is not positive semidefinite")]
    NotConvex(usize),
    #[error("clearing condition: {0}")]
    Clearing(&'static str),
    #[error(transparent)]
    Lcp(#[from] LcpError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadraticPlayer {
    pub q: Matrix,
    pub c: Vec<f64>,
    pub a: Matrix,
    pub b: Vec<f64>,
    #[serde(default)]
    pub a_eq: Matrix,
    #[serde(default)]
    pub b_eq: Vec<f64>,
    /// `D_i`: objective shift per parameter.
    #[serde(default)]
    pub param_obj: Matrix,
    /// `P_i`: right-hand-side shift of the inequalities per parameter.
    #[serde(default)]
    pub param_rhs: Matrix,
    /// `R_i`: right-hand-side shift of the equalities per parameter.
    #[serde(default)]
    pub param_rhs_eq: Matrix,
}

impl QuadraticPlayer {
    /// A linear player with no constraints.
    pub fn linear(c: Vec<f64>) -> Self {
        let n = c.len();
        QuadraticPlayer {
            q: Matrix::zeros(n, n),
            c,
            a: Matrix::zeros(0, n),
            b: Vec::new(),
            a_eq: Matrix::zeros(0, n),
            b_eq: Vec::new(),
            param_obj: Matrix::zeros(n, 0),
            param_rhs: Matrix::zeros(0, 0),
            param_rhs_eq: Matrix::zeros(0, 0),
        }
    }

    pub fn dim(&self) -> usize {
        self.c.len()
    }

    pub fn push_le(&mut self, row: &[f64], rhs: f64) {
        self.a.push_row(row);
        self.b.push(rhs);
    }

    pub fn push_eq(&mut self, row: &[f64], rhs: f64) {
        self.a_eq.push_row(row);
        self.b_eq.push(rhs);
    }

    /// `row·x ≤ rhs - shift·θ`; the parameter blocks must already be shaped
    /// by [`with_params`](Self::with_params).
    pub fn push_le_shifted(&mut self, row: &[f64], shift: &[f64], rhs: f64) {
        self.push_le(row, rhs);
        self.param_rhs.push_row(shift);
    }

    pub fn push_eq_shifted(&mut self, row: &[f64], shift: &[f64], rhs: f64) {
        self.push_eq(row, rhs);
        self.param_rhs_eq.push_row(shift);
    }

    /// Shape the parameter blocks for `params` parameters, keeping any
    /// entries already present.
    pub fn with_params(mut self, params: usize) -> Self {
        let n = self.dim();
        fit(&mut self.param_obj, n, params);
        fit(&mut self.param_rhs, self.a.rows(), params);
        fit(&mut self.param_rhs_eq, self.a_eq.rows(), params);
        self
    }

    fn check(&self, i: usize, params: usize) -> Result<(), GameError> {
        let n = self.dim();
        let err = |what| GameError::Dimension { player: i, what };
        if self.q.rows() != n || self.q.cols() != n {
            return Err(err("Q must be n x n"));
        }
        if self.a.cols() != n || self.a.rows() != self.b.len() {
            return Err(err("A and b disagree"));
        }
        if self.a_eq.cols() != n || self.a_eq.rows() != self.b_eq.len() {
            return Err(err("A_eq and b_eq disagree"));
        }
        if params > 0 || self.param_obj.cols() > 0 {
            if self.param_obj.rows() != n || self.param_obj.cols() != params {
                return Err(err("parameter objective block shape"));
            }
            if self.param_rhs.rows() != self.a.rows() || self.param_rhs.cols() != params {
                return Err(err("parameter rhs block shape"));
            }
            if self.param_rhs_eq.rows() != self.a_eq.rows() || self.param_rhs_eq.cols() != params {
                return Err(err("parameter equality rhs block shape"));
            }
        }
        let finite = self.q.is_finite()
            && self.a.is_finite()
            && self.a_eq.is_finite()
            && self.c.iter().chain(&self.b).chain(&self.b_eq).all(|v| v.is_finite());
        if !finite {
            return Err(err("non-finite data"));
        }
        if !is_psd(&self.q, 1e-8) {
            return Err(GameError::NotConvex(i));
        }
        Ok(())
    }
}

fn fit(m: &mut Matrix, rows: usize, cols: usize) {
    if m.rows() == rows && m.cols() == cols {
        return;
    }
    let mut out = Matrix::zeros(rows, cols);
    for i in 0..rows.min(m.rows()) {
        for j in 0..cols.min(m.cols()) {
            out[(i, j)] = m[(i, j)];
        }
    }
    *m = out;
}

/// `Σ_i G_i xⁱ = h`, priced by a free multiplier `π` entering each player's
/// objective as `πᵀ G_i xⁱ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarketClearing {
    pub blocks: Vec<Matrix>,
    pub rhs: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FacileNashGame {
    pub players: Vec<QuadraticPlayer>,
    /// `cross[i]` is `n_i x Σ_{j≠i} n_j`.
    pub cross: Vec<Matrix>,
    #[serde(default)]
    pub params: usize,
    #[serde(default)]
    pub clearing: Option<MarketClearing>,
}

impl FacileNashGame {
    /// Players with no interaction.
    pub fn independent(players: Vec<QuadraticPlayer>) -> Self {
        let total: usize = players.iter().map(|p| p.dim()).sum();
        let cross = players.iter().map(|p| Matrix::zeros(p.dim(), total - p.dim())).collect();
        FacileNashGame { players, cross, params: 0, clearing: None }
    }

    pub fn total_dim(&self) -> usize {
        self.players.iter().map(|p| p.dim()).sum()
    }

    pub fn validate(&self) -> Result<(), GameError> {
        let total = self.total_dim();
        if self.cross.len() != self.players.len() {
            return Err(GameError::Dimension { player: self.cross.len(), what: "one cross block per player" });
        }
        for (i, p) in self.players.iter().enumerate() {
            p.check(i, self.params)?;
            let c = &self.cross[i];
            if c.rows() != p.dim() || c.cols() != total - p.dim() {
                return Err(GameError::Dimension { player: i, what: "cross block shape" });
            }
        }
        if let Some(cl) = &self.clearing {
            if cl.blocks.len() != self.players.len() {
                return Err(GameError::Clearing("one block per player"));
            }
            for (g, p) in cl.blocks.iter().zip(&self.players) {
                if g.rows() != cl.rhs.len() || g.cols() != p.dim() {
                    return Err(GameError::Clearing("block shape"));
                }
            }
        }
        Ok(())
    }

    /// Offsets of each player's block within the stacked strategy vector.
    pub fn offsets(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.players.len() + 1);
        let mut acc = 0;
        out.push(0);
        for p in &self.players {
            acc += p.dim();
            out.push(acc);
        }
        out
    }

    /// Coefficient of `(i, a)` in player `j`'s cross term, i.e. the entry of
    /// `C_j` multiplying variable `a` of rival `i`.
    fn cross_entry(&self, j: usize, row: usize, i: usize, col: usize) -> f64 {
        let offs = self.offsets();
        let mut c = offs[i] + col;
        if i > j {
            c -= self.players[j].dim();
        }
        self.cross[j][(row, c)]
    }

    /// True when `Σ_i xⁱᵀ C_i x⁻ⁱ` vanishes identically.
    pub fn cross_is_antisymmetric(&self) -> bool {
        let k = self.players.len();
        let scale = self.cross.iter().fold(1.0f64, |m, c| m.max(c.max_abs()));
        for i in 0..k {
            for j in i + 1..k {
                for a in 0..self.players[i].dim() {
                    for b in 0..self.players[j].dim() {
                        let s = self.cross_entry(i, a, j, b) + self.cross_entry(j, b, i, a);
                        if s.abs() > 1e-12 * scale {
                            return false;
                        }
                    }
                }
            }
        }
        true
    }
}

/// Variable layout of a joint KKT system.
#[derive(Debug, Clone, PartialEq)]
pub struct KktLayout {
    pub params: Range<usize>,
    pub players: Vec<Range<usize>>,
    pub prices: Range<usize>,
    pub ineq_multipliers: Vec<Range<usize>>,
    pub eq_multipliers: Vec<Range<usize>>,
    pub dim: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KktSystem {
    pub set: ComplementaritySet,
    pub layout: KktLayout,
}

/// Stationarity, primal feasibility and complementary slackness of every
/// player, as one complementarity set over `(θ, x¹…xᴺ, π, u, v)`.
pub fn kkt_lcp(g: &FacileNashGame) -> Result<KktSystem, GameError> {
    g.validate()?;
    let np = g.params;
    let r = g.clearing.as_ref().map_or(0, |c| c.rhs.len());
    let mut next = np;
    let mut players = Vec::new();
    for p in &g.players {
        players.push(next..next + p.dim());
        next += p.dim();
    }
    let prices = next..next + r;
    next += r;
    let mut ineq_multipliers = Vec::new();
    let mut eq_multipliers = Vec::new();
    for p in &g.players {
        ineq_multipliers.push(next..next + p.a.rows());
        next += p.a.rows();
        eq_multipliers.push(next..next + p.a_eq.rows());
        next += p.a_eq.rows();
    }
    let dim = next;
    let layout = KktLayout { params: 0..np, players, prices, ineq_multipliers, eq_multipliers, dim };
    let mut set = ComplementaritySet::free(dim);

    for (i, p) in g.players.iter().enumerate() {
        let xi = layout.players[i].clone();
        let ui = layout.ineq_multipliers[i].clone();
        let vi = layout.eq_multipliers[i].clone();
        // stationarity
        for a in 0..p.dim() {
            let mut row = vec![0.0; dim];
            for b in 0..p.dim() {
                row[xi.start + b] = p.q[(a, b)];
            }
            let mut col = 0;
            for (j, rng) in layout.players.iter().enumerate() {
                if j == i {
                    continue;
                }
                for b in 0..rng.len() {
                    row[rng.start + b] += g.cross[i][(a, col)];
                    col += 1;
                }
            }
            for t in 0..np {
                row[t] += p.param_obj[(a, t)];
            }
            if let Some(cl) = &g.clearing {
                for k in 0..r {
                    row[layout.prices.start + k] = cl.blocks[i][(k, a)];
                }
            }
            for k in 0..p.a.rows() {
                row[ui.start + k] = p.a[(k, a)];
            }
            for k in 0..p.a_eq.rows() {
                row[vi.start + k] = p.a_eq[(k, a)];
            }
            set.push_eq(&row, -p.c[a]);
        }
        // primal equalities
        for k in 0..p.a_eq.rows() {
            let mut row = vec![0.0; dim];
            row[xi.clone()].copy_from_slice(p.a_eq.row(k));
            for t in 0..np {
                row[t] = p.param_rhs_eq[(k, t)];
            }
            set.push_eq(&row, p.b_eq[k]);
        }
        // 0 ≤ u ⊥ b - A x - P θ ≥ 0
        for k in 0..p.a.rows() {
            let mut row = vec![0.0; dim];
            for (b, v) in p.a.row(k).iter().enumerate() {
                row[xi.start + b] = -v;
            }
            for t in 0..np {
                row[t] = -p.param_rhs[(k, t)];
            }
            set.pair(ui.start + k, &row, p.b[k]);
        }
    }
    if let Some(cl) = &g.clearing {
        for k in 0..r {
            let mut row = vec![0.0; dim];
            for (i, rng) in layout.players.iter().enumerate() {
                for b in 0..rng.len() {
                    row[rng.start + b] = cl.blocks[i][(k, b)];
                }
            }
            set.push_eq(&row, cl.rhs[k]);
        }
    }
    if np == 0 && g.players.iter().all(|p| p.q.max_abs() == 0.0) && g.cross_is_antisymmetric() {
        let mut gap = vec![0.0; dim];
        for (i, p) in g.players.iter().enumerate() {
            gap[layout.players[i].clone()].copy_from_slice(&p.c);
            gap[layout.ineq_multipliers[i].clone()].copy_from_slice(&p.b);
            gap[layout.eq_multipliers[i].clone()].copy_from_slice(&p.b_eq);
        }
        if let Some(cl) = &g.clearing {
            gap[layout.prices.clone()].copy_from_slice(&cl.rhs);
        }
        set.gap = Some(gap);
    }
    Ok(KktSystem { set, layout })
}

#[derive(Debug, Clone, PartialEq)]
pub enum PneOutcome {
    Pne { strategies: Vec<Vec<f64>>, prices: Vec<f64>, point: Vec<f64> },
    NoPne,
    TimeLimit,
}

pub struct PneOptions<'a> {
    /// Linear selection objective over the stacked strategies.
    pub selection: Option<Vec<f64>>,
    /// Per player, indices within its own block restricted to {0, 1}.
    pub binaries: Vec<Vec<usize>>,
    pub budget: &'a dyn Budget,
}

impl Default for PneOptions<'_> {
    fn default() -> Self {
        PneOptions { selection: None, binaries: Vec::new(), budget: &Unlimited }
    }
}

pub fn find_pne(g: &FacileNashGame) -> Result<PneOutcome, GameError> {
    find_pne_with(g, &PneOptions::default()).map(|(o, _)| o)
}

/// Solves the joint KKT system; returns the outcome and branch-and-bound nodes.
pub fn find_pne_with(g: &FacileNashGame, opts: &PneOptions) -> Result<(PneOutcome, usize), GameError> {
    let kkt = kkt_lcp(g)?;
    find_pne_in(&kkt, opts)
}

pub fn find_pne_in(kkt: &KktSystem, opts: &PneOptions) -> Result<(PneOutcome, usize), GameError> {
    let l = &kkt.layout;
    let mut objective = vec![0.0; l.dim];
    if let Some(sel) = &opts.selection {
        let mut k = 0;
        for rng in &l.players {
            for v in rng.clone() {
                objective[v] = sel[k];
                k += 1;
            }
        }
    }
    let mut binaries = Vec::new();
    for (i, list) in opts.binaries.iter().enumerate() {
        binaries.extend(list.iter().map(|&b| l.players[i].start + b));
    }
    let bopts = BranchOptions { binaries, use_gap: true, budget: opts.budget };
    let (outcome, nodes) = optimize_over_set_with(&kkt.set, &objective, &bopts)?;
    let out = match outcome {
        SetOutcome::Optimal { point, .. } => PneOutcome::Pne {
            strategies: l.players.iter().map(|r| point[r.clone()].to_vec()).collect(),
            prices: point[l.prices.clone()].to_vec(),
            point,
        },
        SetOutcome::Infeasible => PneOutcome::NoPne,
        SetOutcome::TimeLimit => PneOutcome::TimeLimit,
        // a linear selection can run off along the equilibrium set; report
        // the equilibrium at which that was detected
        SetOutcome::Unbounded { point, .. } => PneOutcome::Pne {
            strategies: l.players.iter().map(|r| point[r.clone()].to_vec()).collect(),
            prices: point[l.prices.clone()].to_vec(),
            point,
        },
    };
    Ok((out, nodes))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pne(o: PneOutcome) -> Vec<Vec<f64>> {
        match o {
            PneOutcome::Pne { strategies, .. } => strategies,
            o => panic!("{o:?}"),
        }
    }

    fn boxed(q: f64, c: f64, lo: f64, hi: f64) -> QuadraticPlayer {
        let mut p = QuadraticPlayer::linear(vec![c]);
        p.q = Matrix::from_rows(1, &[vec![q]]);
        p.push_le(&[1.0], hi);
        p.push_le(&[-1.0], -lo);
        p
    }

    #[test]
    fn single_quadratic_player() {
        // min ½x² - x on [0, 10] -> x = 1
        let g = FacileNashGame::independent(vec![boxed(1.0, -1.0, 0.0, 10.0)]);
        let x = pne(find_pne(&g).unwrap());
        assert!((x[0][0] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn coordination_game_has_a_diagonal_of_equilibria() {
        // player i: ½x_i² - x_j x_i on [0,1]; best reply copies the rival
        let mut g = FacileNashGame::independent(vec![boxed(1.0, 0.0, 0.0, 1.0), boxed(1.0, 0.0, 0.0, 1.0)]);
        g.cross = vec![Matrix::from_rows(1, &[vec![-1.0]]), Matrix::from_rows(1, &[vec![-1.0]])];
        let kkt = kkt_lcp(&g).unwrap();
        let l = &kkt.layout;
        for v in [0.0, 0.5, 1.0] {
            let mut x = vec![0.0; l.dim];
            x[l.players[0].start] = v;
            x[l.players[1].start] = v;
            assert!(kkt.set.contains(&x, 1e-9), "profile ({v},{v})");
        }
        // (1, 0): player 1 would need a positive multiplier on x ≥ 0 while x = 1
        let mut bad = vec![0.0; l.dim];
        bad[l.players[0].start] = 1.0;
        bad[l.ineq_multipliers[0].start + 1] = 1.0;
        assert!(!kkt.set.contains(&bad, 1e-9));
        let mut opts = PneOptions::default();
        opts.selection = Some(vec![-1.0, -1.0]);
        let x = pne(find_pne_with(&g, &opts).unwrap().0);
        assert!((x[0][0] - 1.0).abs() < 1e-9 && (x[1][0] - 1.0).abs() < 1e-9);
        opts.selection = Some(vec![1.0, 1.0]);
        let x = pne(find_pne_with(&g, &opts).unwrap().0);
        assert!(x[0][0].abs() < 1e-9 && x[1][0].abs() < 1e-9);
    }

    #[test]
    fn zero_sum_game_gets_gap_functional() {
        // matching pennies on the simplex: player 1 min x1ᵀ A x2, player 2 min -x2ᵀ Aᵀ x1
        let simplex = |c: Vec<f64>| {
            let mut p = QuadraticPlayer::linear(c);
            p.push_le(&[-1.0, 0.0], 0.0);
            p.push_le(&[0.0, -1.0], 0.0);
            p.push_eq(&[1.0, 1.0], 1.0);
            p
        };
        let a = Matrix::from_rows(2, &[vec![1.0, -1.0], vec![-1.0, 1.0]]);
        let mut g = FacileNashGame::independent(vec![simplex(vec![0.0, 0.0]), simplex(vec![0.0, 0.0])]);
        g.cross = vec![a.clone(), {
            let t = a.transpose();
            Matrix::from_vec(2, 2, t.as_slice().iter().map(|v| -v).collect())
        }];
        assert!(g.cross_is_antisymmetric());
        let kkt = kkt_lcp(&g).unwrap();
        assert!(kkt.set.gap.is_some());
        let x = pne(find_pne(&g).unwrap());
        for s in x {
            assert!((s[0] - 0.5).abs() < 1e-9 && (s[1] - 0.5).abs() < 1e-9);
        }
    }

    #[test]
    fn rejects_nonconvex_player() {
        let g = FacileNashGame::independent(vec![boxed(-1.0, 0.0, 0.0, 1.0)]);
        assert_eq!(kkt_lcp(&g).unwrap_err(), GameError::NotConvex(0));
    }

    #[test]
    fn clearing_price_balances_trade() {
        // two traders: seller gets revenue π s and pays ½s², buyer pays π d and gains 3d - ½d²;
        // clearing s - d = 0 -> π = 1.5, s = d = 1.5
        let mut seller = QuadraticPlayer::linear(vec![0.0]);
        seller.q = Matrix::from_rows(1, &[vec![1.0]]);
        seller.push_le(&[-1.0], 0.0);
        let mut buyer = QuadraticPlayer::linear(vec![-3.0]);
        buyer.q = Matrix::from_rows(1, &[vec![1.0]]);
        buyer.push_le(&[-1.0], 0.0);
        let mut g = FacileNashGame::independent(vec![seller, buyer]);
        // seller objective gets -π s (G = -1), buyer +π d (G = 1): Σ G x = 0
        g.clearing = Some(MarketClearing {
            blocks: vec![Matrix::from_rows(1, &[vec![-1.0]]), Matrix::from_rows(1, &[vec![1.0]])],
            rhs: vec![0.0],
        });
        match find_pne(&g).unwrap() {
            PneOutcome::Pne { strategies, prices, .. } => {
                assert!((strategies[0][0] - 1.5).abs() < 1e-9);
                assert!((strategies[1][0] - 1.5).abs() < 1e-9);
                assert!((prices[0] - 1.5).abs() < 1e-9);
            }
            o => panic!("{o:?}"),
        }
    }
}
