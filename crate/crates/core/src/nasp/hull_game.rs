//! The game played over convexified leader regions, and the map from its
//! equilibria back to mixed strategies over the original regions.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use super::{Nasp, NaspError, SupportPoint, MixedStrategy};
use crate::budget::Budget;
use crate::lcp::{reduce_piece, selected_polyhedron, ComplementaritySet, Encoding, HullFormulation, PieceShape};
use crate::linalg::{norm_inf, Matrix};
use crate::lp::{solve_lp, LinearProgram, LpOutcome, Polyhedron};
use crate::nash::{find_pne_in, kkt_lcp, FacileNashGame, MarketClearing, PneOptions, PneOutcome, QuadraticPlayer};
use crate::tol;

/// Reduced pieces of one leader, cached by encoding across hull rebuilds.
#[derive(Debug, Clone, Default)]
pub(crate) struct PieceCache {
    shapes: BTreeMap<Encoding, (Polyhedron, PieceShape)>,
}

impl PieceCache {
    fn get(&mut self, set: &ComplementaritySet, e: &Encoding) -> Result<&(Polyhedron, PieceShape), NaspError> {
        if !self.shapes.contains_key(e) {
            let poly = selected_polyhedron(set, e)?;
            let shape = reduce_piece(&poly, self.shapes.len())?;
            self.shapes.insert(e.clone(), (poly, shape));
        }
        Ok(&self.shapes[e])
    }
}

#[derive(Debug, Clone)]
pub struct LeaderHull {
    pub encodings: Vec<Encoding>,
    pub pieces: Vec<Polyhedron>,
    pub hull: HullFormulation,
}

#[derive(Debug, Clone)]
pub struct HullGame {
    pub leaders: Vec<LeaderHull>,
    pub game: FacileNashGame,
}

pub(crate) enum HullOutcome {
    Equilibrium { lifted: Vec<Vec<f64>>, prices: Vec<f64> },
    NoEquilibrium,
    TimeLimit,
}

impl HullGame {
    pub(crate) fn build(
        g: &Nasp,
        dims: &[usize],
        sets: &[ComplementaritySet],
        chosen: &[Vec<Encoding>],
        caches: &mut [PieceCache],
    ) -> Result<HullGame, NaspError> {
        let mut leaders = Vec::with_capacity(sets.len());
        for (i, set) in sets.iter().enumerate() {
            let mut pieces = Vec::new();
            let mut shapes = Vec::new();
            for e in &chosen[i] {
                let (p, s) = caches[i].get(set, e)?;
                pieces.push(p.clone());
                shapes.push(s.clone());
            }
            let hull = HullFormulation::from_shapes(set.dim, shapes);
            leaders.push(LeaderHull { encodings: chosen[i].clone(), pieces, hull });
        }
        let lifted: Vec<usize> = leaders.iter().map(|l| l.hull.lifted_dim()).collect();
        let total: usize = lifted.iter().sum();
        let mut players = Vec::new();
        let mut cross = Vec::new();
        for (i, lh) in leaders.iter().enumerate() {
            let li = lifted[i];
            let mut c = vec![0.0; li];
            c[..dims[i]].copy_from_slice(&g.objectives[i].c);
            let h = &lh.hull.lifted;
            let mut p = QuadraticPlayer::linear(c);
            p.a = h.a.clone();
            p.b = h.b.clone();
            p.a_eq = h.a_eq.clone();
            p.b_eq = h.b_eq.clone();
            players.push(p);
            let mut ci = Matrix::zeros(li, total - li);
            let mut off = 0;
            for j in 0..leaders.len() {
                if j == i {
                    continue;
                }
                let m = &g.objectives[i].cross[j];
                for a in 0..dims[i] {
                    for b in 0..dims[j] {
                        ci[(a, off + b)] = m[(a, b)];
                    }
                }
                off += lifted[j];
            }
            cross.push(ci);
        }
        let clearing = g.clearing.as_ref().map(|cl| MarketClearing {
            blocks: cl
                .blocks
                .iter()
                .enumerate()
                .map(|(i, b)| {
                    let mut w = Matrix::zeros(b.rows(), lifted[i]);
                    b.write_block(&mut w, 0, 0);
                    w
                })
                .collect(),
            rhs: cl.rhs.clone(),
        });
        Ok(HullGame { leaders, game: FacileNashGame { players, cross, params: 0, clearing } })
    }

    /// Solves the convexified game. `select` minimizes the leaders' linear
    /// costs over its equilibria; `binary_weights` forces every leader onto one
    /// piece.
    pub(crate) fn solve(
        &self,
        g: &Nasp,
        select: bool,
        binary_weights: bool,
        budget: &dyn Budget,
    ) -> Result<(HullOutcome, usize), NaspError> {
        let kkt = kkt_lcp(&self.game)?;
        let mut opts = PneOptions { selection: None, binaries: Vec::new(), budget };
        if select {
            let mut sel = Vec::new();
            for (i, lh) in self.leaders.iter().enumerate() {
                let mut c = vec![0.0; lh.hull.lifted_dim()];
                c[..g.objectives[i].c.len()].copy_from_slice(&g.objectives[i].c);
                sel.extend(c);
            }
            opts.selection = Some(sel);
        }
        if binary_weights {
            opts.binaries = self
                .leaders
                .iter()
                .map(|lh| (0..lh.pieces.len()).map(|j| lh.hull.delta_index(j)).collect())
                .collect();
        }
        let (out, nodes) = find_pne_in(&kkt, &opts)?;
        Ok((
            match out {
                PneOutcome::Pne { strategies, prices, .. } => HullOutcome::Equilibrium { lifted: strategies, prices },
                PneOutcome::NoPne => HullOutcome::NoEquilibrium,
                PneOutcome::TimeLimit => HullOutcome::TimeLimit,
            },
            nodes,
        ))
    }
}

/// Splits a point of the lifted hull into a mixed strategy over the pieces.
///
/// Components with weight above the cutoff become support points `x^j/δ_j`.
/// Components with negligible weight are recession directions; they are
/// folded into the first support point that stays inside the region.
pub fn decompose_mixed(
    set: &ComplementaritySet,
    leader: &LeaderHull,
    z: &[f64],
) -> Result<MixedStrategy, &'static str> {
    let h = &leader.hull;
    let mut support: Vec<(usize, f64, Vec<f64>)> = Vec::new();
    let mut drift = vec![0.0; h.dim];
    for j in 0..h.pieces.len() {
        let (delta, x) = h.component(z, j);
        if delta > tol::DELTA_MIN {
            let p: Vec<f64> = x.iter().map(|v| v / delta).collect();
            support.push((j, delta, p));
        } else if norm_inf(&x) > 1e-9 {
            for (d, v) in drift.iter_mut().zip(&x) {
                *d += v;
            }
        }
    }
    if support.is_empty() {
        return Err("no piece carries weight");
    }
    if norm_inf(&drift) > 1e-9 {
        let mut placed = false;
        for (_, delta, p) in support.iter_mut() {
            let moved: Vec<f64> = p.iter().zip(&drift).map(|(a, d)| a + d / *delta).collect();
            if set.contains(&moved, tol::FEAS) {
                *p = moved;
                placed = true;
                break;
            }
        }
        if !placed {
            return Err("unbounded direction cannot be attached to a support point");
        }
    }
    let total: f64 = support.iter().map(|s| s.1).sum();
    let mut out: Vec<SupportPoint> = Vec::new();
    for (j, delta, p) in support {
        let p = if set.contains(&p, tol::FEAS) {
            p
        } else {
            polish(&leader.pieces[j], &p).filter(|q| set.contains(q, tol::FEAS)).ok_or("support point outside its piece")?
        };
        let prob = delta / total;
        if let Some(existing) = out.iter_mut().find(|s| same_point(&s.point, &p)) {
            existing.probability += prob;
            continue;
        }
        out.push(SupportPoint { point: p, probability: prob, encoding: Some(leader.encodings[j].clone()) });
    }
    Ok(MixedStrategy { support: out })
}

fn same_point(a: &[f64], b: &[f64]) -> bool {
    a.iter().zip(b).all(|(x, y)| (x - y).abs() <= 1e-9 * (1.0 + x.abs().max(y.abs())))
}

/// Nearest point of `piece` to `p` in the 1-norm.
fn polish(piece: &Polyhedron, p: &[f64]) -> Option<Vec<f64>> {
    let n = p.len();
    let mut obj = vec![0.0; 2 * n];
    obj[n..].iter_mut().for_each(|v| *v = 1.0);
    let mut lp = LinearProgram::new(obj);
    let widen = |r: &[f64]| {
        let mut row = vec![0.0; 2 * n];
        row[..n].copy_from_slice(r);
        row
    };
    for (r, &b) in piece.a.iter_rows().zip(&piece.b) {
        lp = lp.le(&widen(r), b);
    }
    for (r, &b) in piece.a_eq.iter_rows().zip(&piece.b_eq) {
        lp = lp.eq(&widen(r), b);
    }
    for k in 0..n {
        let mut row = vec![0.0; 2 * n];
        row[k] = 1.0;
        row[n + k] = -1.0;
        lp = lp.le(&row, p[k]);
        row[k] = -1.0;
        lp = lp.le(&row, -p[k]);
    }
    match solve_lp(&lp).ok()? {
        LpOutcome::Optimal { point, .. } => Some(point[..n].to_vec()),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lcp::balas_hull;

    fn interval(lo: f64, hi: f64) -> Polyhedron {
        Polyhedron::new(Matrix::from_rows(1, &[vec![1.0], vec![-1.0]]), vec![hi, -lo])
    }

    fn region(lo: f64, hi: f64) -> ComplementaritySet {
        let mut s = ComplementaritySet::free(1);
        s.push_le(&[1.0], hi);
        s.push_le(&[-1.0], -lo);
        s
    }

    fn leader(pieces: Vec<Polyhedron>) -> LeaderHull {
        let hull = balas_hull(&pieces).unwrap();
        let encodings = (0..pieces.len()).map(|j| Encoding(vec![j == 1])).collect();
        LeaderHull { encodings, pieces, hull }
    }

    /// Lifted point with aggregate `x` and per-piece `(δ_j, x^j)`.
    fn lifted(h: &HullFormulation, x: f64, parts: &[(f64, f64)]) -> Vec<f64> {
        let mut z = vec![0.0; h.lifted_dim()];
        z[0] = x;
        for (j, &(d, xj)) in parts.iter().enumerate() {
            z[h.delta_index(j)] = d;
            if !h.pieces[j].is_point() {
                z[h.copy_range(j).start] = xj;
            }
        }
        z
    }

    #[test]
    fn full_weight_on_one_piece_is_pure() {
        let l = leader(vec![interval(0.0, 1.0), interval(2.0, 3.0)]);
        let z = lifted(&l.hull, 0.4, &[(1.0, 0.4), (0.0, 0.0)]);
        let m = decompose_mixed(&region(0.0, 3.0), &l, &z).unwrap();
        assert!(m.is_pure());
        assert!((m.support[0].point[0] - 0.4).abs() < 1e-12);
    }

    #[test]
    fn two_points_split_evenly() {
        let l = leader(vec![interval(0.0, 0.0), interval(1.0, 1.0)]);
        let z = lifted(&l.hull, 0.5, &[(0.5, 0.0), (0.5, 0.5)]);
        let m = decompose_mixed(&region(0.0, 1.0), &l, &z).unwrap();
        let pts: Vec<(f64, f64)> = m.support.iter().map(|s| (s.point[0], s.probability)).collect();
        assert_eq!(pts, vec![(0.0, 0.5), (1.0, 0.5)]);
    }

    #[test]
    fn scaled_copies_are_divided_by_their_weight() {
        let l = leader(vec![interval(0.0, 1.0), interval(2.0, 3.0)]);
        let z = lifted(&l.hull, 1.75, &[(0.25, 0.25), (0.75, 1.5)]);
        let m = decompose_mixed(&region(0.0, 3.0), &l, &z).unwrap();
        assert_eq!(m.support.len(), 2);
        assert!((m.support[0].point[0] - 1.0).abs() < 1e-12 && (m.support[0].probability - 0.25).abs() < 1e-12);
        assert!((m.support[1].point[0] - 2.0).abs() < 1e-12 && (m.support[1].probability - 0.75).abs() < 1e-12);
        assert!((m.mean()[0] - 1.75).abs() < 1e-12);
    }

    #[test]
    fn dust_weights_are_dropped_and_the_rest_renormalized() {
        let l = leader(vec![interval(0.0, 1.0), interval(2.0, 3.0)]);
        let z = lifted(&l.hull, 0.5, &[(1.0 - 1e-9, 0.5), (1e-9, 2e-9)]);
        let m = decompose_mixed(&region(0.0, 3.0), &l, &z).unwrap();
        assert!(m.is_pure());
        assert_eq!(m.support[0].probability, 1.0);
    }

    #[test]
    fn all_weights_negligible_is_an_error() {
        let l = leader(vec![interval(0.0, 1.0), interval(2.0, 3.0)]);
        let z = lifted(&l.hull, 0.0, &[(0.0, 0.0), (0.0, 0.0)]);
        assert!(decompose_mixed(&region(0.0, 3.0), &l, &z).is_err());
    }
}
