//! Depth-first branch-and-bound for `min cᵀx` over a complementarity set.
//!
//! Each node solves the relaxation with some sides pinned. The most violated
//! product `x_{c_i} z_i` (ties to the lowest index) is branched on, 0-side
//! first. Optional binary variables are branched on once every product is
//! satisfied. With a gap functional available, a node whose minimum gap is
//! positive holds no complementary point and is cut off.

use alloc::vec;
use alloc::vec::Vec;

use super::{Bounds, ComplementaritySet, LcpError, SetLp};
use crate::budget::{Budget, Unlimited};
use crate::linalg::dot;
use crate::lp::LpOutcome;
use crate::tol;

const NODES_PER_CLOCK_CHECK: usize = 1000;
const INTEGRALITY_TOL: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq)]
pub enum SetOutcome {
    Optimal { point: Vec<f64>, value: f64 },
    Infeasible,
    /// `point` lies in a piece containing the improving direction `ray`.
    Unbounded { point: Vec<f64>, ray: Vec<f64> },
    TimeLimit,
}

pub struct BranchOptions<'a> {
    /// Variables restricted to {0, 1}.
    pub binaries: Vec<usize>,
    /// Use the set's gap functional (if any) for pruning.
    pub use_gap: bool,
    pub budget: &'a dyn Budget,
}

impl Default for BranchOptions<'_> {
    fn default() -> Self {
        BranchOptions { binaries: Vec::new(), use_gap: true, budget: &Unlimited }
    }
}

pub fn optimize_over_set(s: &ComplementaritySet, objective: &[f64]) -> Result<SetOutcome, LcpError> {
    optimize_over_set_with(s, objective, &BranchOptions::default()).map(|(o, _)| o)
}

#[derive(Clone)]
struct Node {
    pins: Vec<i8>,
    bins: Vec<i8>,
}

/// Returns the outcome and the number of nodes explored. With an all-zero
/// objective the first complementary point found is returned.
pub fn optimize_over_set_with(
    s: &ComplementaritySet,
    objective: &[f64],
    opts: &BranchOptions,
) -> Result<(SetOutcome, usize), LcpError> {
    s.validate()?;
    if objective.len() != s.dim {
        return Err(LcpError::DimensionMismatch("objective length"));
    }
    if opts.binaries.iter().any(|&b| b >= s.dim) {
        return Err(LcpError::DimensionMismatch("binary index"));
    }
    let lp = s.lp_form();
    let base = lp.base();
    let gap = if opts.use_gap { s.gap.as_deref() } else { None };
    let feasibility = objective.iter().all(|&c| c == 0.0);
    let mut stack = vec![Node { pins: vec![-1; s.pairs()], bins: vec![-1; opts.binaries.len()] }];
    let mut incumbent: Option<(Vec<f64>, f64)> = None;
    let mut nodes = 0usize;

    while let Some(node) = stack.pop() {
        nodes += 1;
        if nodes % NODES_PER_CLOCK_CHECK == 0 && opts.budget.expired() {
            return Ok((SetOutcome::TimeLimit, nodes));
        }
        let bounds = node_bounds(&lp, &base, &node, &opts.binaries);
        let primary = match (feasibility, gap) {
            (true, Some(g)) => g,
            _ => objective,
        };
        let (point, lp_value) = match lp.solve(primary, &bounds)? {
            LpOutcome::Infeasible => continue,
            LpOutcome::Unbounded { point, ray } => {
                match first_free(&node) {
                    None => return Ok((SetOutcome::Unbounded { point, ray }, nodes)),
                    Some(choice) => push_children(&mut stack, &node, choice),
                }
                continue;
            }
            LpOutcome::Optimal { point, value } => (point, value),
        };
        let value = if feasibility { 0.0 } else { lp_value };
        if let Some((_, best)) = &incumbent {
            if value >= best - tol::OPT {
                continue;
            }
        }
        if feasibility && gap.is_some() && lp_value > gap_tolerance(gap.unwrap(), &point) {
            continue;
        }
        if let Some(i) = most_violated(s, &point, &node) {
            if !feasibility {
                if let Some(g) = gap {
                    if let LpOutcome::Optimal { point: gp, value: gv } = lp.solve(g, &bounds)? {
                        if gv > gap_tolerance(g, &gp) {
                            continue;
                        }
                    }
                }
            }
            push_children(&mut stack, &node, Choice::Pair(i));
            continue;
        }
        if let Some(k) = most_fractional(&point, &node, &opts.binaries) {
            push_children(&mut stack, &node, Choice::Binary(k));
            continue;
        }
        if feasibility {
            return Ok((SetOutcome::Optimal { point, value: 0.0 }, nodes));
        }
        incumbent = Some((point, value));
    }
    Ok((
        match incumbent {
            Some((point, value)) => SetOutcome::Optimal { point, value },
            None => SetOutcome::Infeasible,
        },
        nodes,
    ))
}

fn gap_tolerance(g: &[f64], x: &[f64]) -> f64 {
    let scale: f64 = g.iter().zip(x).map(|(a, b)| (a * b).abs()).sum();
    1e-6 * (1.0 + scale)
}

#[derive(Clone, Copy)]
enum Choice {
    Pair(usize),
    Binary(usize),
}

fn node_bounds(lp: &SetLp, base: &Bounds, node: &Node, binaries: &[usize]) -> Bounds {
    let mut b = base.clone();
    for (i, &p) in node.pins.iter().enumerate() {
        if p >= 0 {
            lp.pin(&mut b, i, p == 1);
        }
    }
    for (k, &v) in node.bins.iter().enumerate() {
        let j = binaries[k];
        match v {
            0 => b.col_hi[j] = b.col_hi[j].min(0.0),
            1 => b.col_lo[j] = b.col_lo[j].max(1.0),
            _ => {
                b.col_lo[j] = b.col_lo[j].max(0.0);
                b.col_hi[j] = b.col_hi[j].min(1.0);
            }
        }
    }
    b
}

fn first_free(node: &Node) -> Option<Choice> {
    if let Some(i) = node.pins.iter().position(|&p| p < 0) {
        return Some(Choice::Pair(i));
    }
    node.bins.iter().position(|&p| p < 0).map(Choice::Binary)
}

fn push_children(stack: &mut Vec<Node>, node: &Node, choice: Choice) {
    // 1-side pushed first so the 0-side is explored first
    for side in [1i8, 0] {
        let mut child = node.clone();
        match choice {
            Choice::Pair(i) => child.pins[i] = side,
            Choice::Binary(k) => child.bins[k] = side,
        }
        stack.push(child);
    }
}

fn most_violated(s: &ComplementaritySet, x: &[f64], node: &Node) -> Option<usize> {
    let mut best = None;
    let mut worst = tol::COMP;
    for (i, &c) in s.compl.iter().enumerate() {
        if node.pins[i] >= 0 {
            continue;
        }
        let z = dot(s.m.row(i), x) + s.q[i];
        let v = x[c].max(0.0) * z.max(0.0);
        if v > worst {
            worst = v;
            best = Some(i);
        }
    }
    best
}

fn most_fractional(x: &[f64], node: &Node, binaries: &[usize]) -> Option<usize> {
    let mut best = None;
    let mut worst = INTEGRALITY_TOL;
    for (k, &j) in binaries.iter().enumerate() {
        if node.bins[k] >= 0 {
            continue;
        }
        let f = x[j].min(1.0 - x[j]);
        if f > worst {
            worst = f;
            best = Some(k);
        }
    }
    best
}
