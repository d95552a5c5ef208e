//! Two-leader games encoding SUBSET SUM INTERVAL: one has a pure equilibrium
//! exactly on YES instances, the other a mixed one.

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::games::two_leaders;
use super::InstanceError;
use crate::linalg::Matrix;
use crate::nash::{FacileNashGame, QuadraticPlayer};
use crate::nasp::{Nasp, StackelbergLeader};

/// Is there an integer `s` in `[p, t)` that is no subset sum of `q`?
/// Instances keep `t - p = 2^r`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubsetSumInterval {
    pub q: Vec<u64>,
    pub p: u64,
    pub t: u64,
    pub r: u32,
}

impl SubsetSumInterval {
    pub fn validate(&self) -> Result<(), InstanceError> {
        if self.q.is_empty() || self.q.iter().any(|&v| v == 0) || self.p == 0 || self.t == 0 {
            return Err(InstanceError::Invalid("q, p and t must be positive"));
        }
        if self.r >= 32 || self.t.checked_sub(self.p) != Some(1u64 << self.r) {
            return Err(InstanceError::Invalid("t - p must equal 2^r"));
        }
        if self.r as usize > self.q.len() {
            return Err(InstanceError::Invalid("r may not exceed the number of items"));
        }
        Ok(())
    }

    pub fn k(&self) -> usize {
        self.q.len()
    }

    pub fn total(&self) -> u64 {
        self.q.iter().sum()
    }

    /// Brute force over all subsets; meant for the small instances the
    /// reductions can be solved on.
    pub fn witness(&self) -> Option<u64> {
        let k = self.q.len();
        assert!(k < 26, "too many items to enumerate");
        let mut sums = Vec::with_capacity(1 << k);
        for mask in 0u32..(1 << k) {
            sums.push((0..k).filter(|&i| mask >> i & 1 == 1).map(|i| self.q[i]).sum::<u64>());
        }
        (self.p..self.t).find(|s| !sums.contains(s))
    }

    pub fn is_yes(&self) -> bool {
        self.witness().is_some()
    }

    /// Flags instances too large for the enumeration algorithms to finish
    /// in reasonable time.
    pub fn is_small(&self) -> bool {
        self.k() <= 3 && self.r <= 2
    }
}

/// One linear follower minimizing the sum of its variables, each pushed
/// above the largest of a few affine functions of the leader variables.
struct MaxFollower {
    params: usize,
    player: QuadraticPlayer,
}

impl MaxFollower {
    fn new(params: usize, vars: usize) -> Self {
        MaxFollower { params, player: QuadraticPlayer::linear(vec![1.0; vars]).with_params(params) }
    }

    /// `v ≥ constant + Σ coef·θ_j`.
    fn at_least(&mut self, v: usize, terms: &[(usize, f64)], constant: f64) {
        let mut row = vec![0.0; self.player.dim()];
        row[v] = -1.0;
        let mut shift = vec![0.0; self.params];
        for &(j, c) in terms {
            shift[j] += c;
        }
        self.player.push_le_shifted(&row, &shift, -constant);
    }

    /// `v = max(-θ_j, θ_j - 1)`; with `v ≥ 0` this leaves `θ_j ≤ 0` or `θ_j ≥ 1`.
    fn binary(&mut self, v: usize, j: usize) {
        self.at_least(v, &[(j, -1.0)], 0.0);
        self.at_least(v, &[(j, 1.0)], -1.0);
    }

    fn leader(self) -> StackelbergLeader {
        let m = self.player.dim();
        let n = self.params;
        StackelbergLeader {
            leader_dim: n,
            followers: FacileNashGame { players: vec![self.player], cross: vec![Matrix::zeros(m, 0)], params: n, clearing: None },
            a: Matrix::zeros(0, n + m),
            b: Vec::new(),
            a_eq: Matrix::zeros(0, n + m),
            b_eq: Vec::new(),
        }
    }
}

/// Sparse row builder over `width` columns.
fn row(width: usize, terms: &[(usize, f64)]) -> Vec<f64> {
    let mut r = vec![0.0; width];
    for &(j, c) in terms {
        r[j] += c;
    }
    r
}

/// Leader variables `x_0..x_2P` and Greek `ξ_0..ξ_P` with `P = k + 2r`.
/// Both leaders maximize in the original formulation; costs here are the
/// negated objectives with terms constant in the own strategy dropped.
///
/// The Latin cardinality row `Σ_{k<i≤P} x_i = r` is an equality: with `≤`
/// the Latin leader can zero all of these variables, leaving the Greek leader
/// no profitable move, and NO instances acquire a pure equilibrium.
pub fn gen_pne_hardness(d: &SubsetSumInterval) -> Result<Nasp, InstanceError> {
    pne_hardness(d, true)
}

pub(crate) fn pne_hardness(d: &SubsetSumInterval, cardinality_equality: bool) -> Result<Nasp, InstanceError> {
    d.validate()?;
    let k = d.k();
    let r = d.r as usize;
    let big_p = k + 2 * r;
    let q_sum = d.total() as f64;
    let t = (d.t - 1) as f64 + r as f64 * q_sum;
    // with T = 1 the Greek payoff for ξ_0 = 1 is zero and ties break the reduction
    if t <= 1.0 {
        return Err(InstanceError::Invalid("the reduction needs t - 1 + rQ > 1"));
    }
    let q = |i: usize| d.q[i - 1] as f64;
    let pow = |i: usize| (1u64 << (i - k - 1)) as f64;

    // Latin
    let nx = 2 * big_p + 1;
    let mut f = MaxFollower::new(nx, nx);
    for i in 0..nx {
        f.binary(i, i);
    }
    let mut latin = f.leader();
    let w = 2 * nx;
    for i in 1..=k {
        latin.push_eq(&row(w, &[(i, 1.0)]), 0.0);
    }
    for i in 0..nx {
        latin.push_le(&row(w, &[(nx + i, -1.0)]), 0.0);
        latin.push_le(&row(w, &[(i, -1.0)]), 0.0);
    }
    let terms: Vec<(usize, f64)> = (k + 1..=big_p).map(|i| (i, 1.0)).collect();
    if cardinality_equality {
        latin.push_eq(&row(w, &terms), r as f64);
    } else {
        latin.push_le(&row(w, &terms), r as f64);
    }
    for i in 1..=big_p {
        latin.push_le(&row(w, &[(i, 1.0), (big_p + i, 1.0)]), 1.0);
        latin.push_le(&row(w, &[(0, 1.0), (big_p + i, 1.0)]), 1.0);
    }

    // Greek
    let nxi = big_p + 1;
    let mut f = MaxFollower::new(nxi, nxi);
    for i in 0..nxi {
        f.binary(i, i);
    }
    let mut greek = f.leader();
    let w = 2 * nxi;
    for i in 0..nxi {
        greek.push_le(&row(w, &[(i, -1.0)]), 0.0);
        greek.push_le(&row(w, &[(i, 1.0)]), 1.0);
        greek.push_le(&row(w, &[(nxi + i, -1.0)]), 0.0);
    }
    // Σ_{k<i≤P} ξ_i + r ξ_0 ≥ r
    let mut terms: Vec<(usize, f64)> = (k + 1..=big_p).map(|i| (i, -1.0)).collect();
    terms.push((0, -(r as f64)));
    greek.push_le(&row(w, &terms), -(r as f64));
    // T ξ_0 + Σ q_i ξ_i + Q Σ ξ_i + Σ 2^(i-k-1) ξ_i ≤ T
    let mut terms = vec![(0, t)];
    terms.extend((1..=k).map(|i| (i, q(i))));
    terms.extend((k + 1..=big_p).map(|i| (i, q_sum)));
    terms.extend((k + 1..=k + r).map(|i| (i, pow(i))));
    greek.push_le(&row(w, &terms), t);

    // costs
    let mut latin_cross = Matrix::zeros(nx, nxi);
    latin_cross[(0, 0)] = -(t - 1.0);
    for i in 1..=big_p {
        latin_cross[(big_p + i, i)] = if i <= k { -q(i) } else { -q_sum };
    }
    let mut greek_c = vec![0.0; nxi];
    let mut greek_cross = Matrix::zeros(nxi, nx);
    greek_c[0] = -(t - 1.0);
    for i in 1..=k {
        greek_c[i] = -q(i);
        greek_cross[(i, big_p + i)] = q(i);
    }
    for i in k + 1..=big_p {
        let bit = if i <= k + r { pow(i) } else { 0.0 };
        // -(Q + bit) ξ_i (1 - x_i - x_{P+i})
        greek_c[i] -= q_sum + bit;
        greek_cross[(i, i)] += q_sum + bit;
        greek_cross[(i, big_p + i)] += q_sum + bit;
        // + T (x_i ξ_i + (1 - x_i)(1 - ξ_i - ξ_0)), own-strategy part
        greek_c[i] -= t;
        greek_c[0] -= t;
        greek_cross[(i, i)] += 2.0 * t;
        greek_cross[(0, i)] += t;
    }
    Ok(two_leaders(latin, greek, vec![], greek_c, &latin_cross, &greek_cross))
}

/// Extended formulation of `{h = x, y = 1} ∪ {h = 0, y = 0}` over
/// nonnegative `(h, y, x)`: six follower variables `z_j = max(a_j, b_j)`
/// that the leader keeps nonnegative. Columns `hyx` locate `(h, y, x)` among
/// the leader variables and `z0` the first follower variable.
fn s_gadget_rows(f: &mut MaxFollower, hyx: [usize; 3], z0: usize) {
    let [h, y, x] = hyx;
    f.at_least(z0, &[(h, 1.0), (x, -1.0)], 0.0);
    f.at_least(z0, &[(h, -1.0)], 0.0);
    f.at_least(z0 + 1, &[(y, -1.0)], 1.0);
    f.at_least(z0 + 1, &[(h, -1.0)], 0.0);
    f.at_least(z0 + 2, &[(y, 1.0)], -1.0);
    f.at_least(z0 + 2, &[(h, -1.0)], 0.0);
    f.at_least(z0 + 3, &[(x, 1.0), (h, -1.0)], 0.0);
    f.at_least(z0 + 3, &[(y, -1.0)], 0.0);
    f.at_least(z0 + 4, &[(h, 1.0), (x, -1.0)], 0.0);
    f.at_least(z0 + 4, &[(y, -1.0)], 0.0);
    f.at_least(z0 + 5, &[(y, 1.0)], -1.0);
    f.at_least(z0 + 5, &[(y, -1.0)], 0.0);
}

fn s_gadget_leader_rows(l: &mut StackelbergLeader, hyx: [usize; 3], z0: usize) {
    let w = l.primal_dim();
    let [h, y, x] = hyx;
    for v in [h, y, x] {
        l.push_le(&row(w, &[(v, -1.0)]), 0.0);
    }
    l.push_le(&row(w, &[(y, 1.0)]), 1.0);
    l.push_le(&row(w, &[(h, 1.0), (x, -1.0)]), 0.0);
    for j in 0..6 {
        l.push_le(&row(w, &[(z0 + j, -1.0)]), 0.0);
    }
}

/// The set `S` alone, as a leader over `(h, y, x)`.
pub fn s_gadget() -> StackelbergLeader {
    let mut f = MaxFollower::new(3, 6);
    s_gadget_rows(&mut f, [0, 1, 2], 0);
    let mut l = f.leader();
    s_gadget_leader_rows(&mut l, [0, 1, 2], 3);
    l
}

/// Latin `x_0..x_{k+3r+1}` with `r` copies of `S`; Greek `ξ_0..ξ_{r+1}`
/// with `ξ_0 ≥ 0` unbounded above.
pub fn gen_mne_hardness(d: &SubsetSumInterval) -> Result<Nasp, InstanceError> {
    d.validate()?;
    let k = d.k();
    let r = d.r as usize;
    let q_sum = d.total() as f64;
    let p = d.p as f64;
    let pow = |i: usize| (1u64 << (i - 1)) as f64;
    let last = k + 3 * r + 1;

    // Latin: follower variables y_0..y_k, then six per copy of S
    let nx = last + 1;
    let ny = k + 1 + 6 * r;
    let mut f = MaxFollower::new(nx, ny);
    for i in 0..=k {
        f.binary(i, i);
    }
    let gadget = |i: usize| [k + i, k + r + i, k + 2 * r + i];
    for i in 1..=r {
        s_gadget_rows(&mut f, gadget(i), k + 1 + 6 * (i - 1));
    }
    let mut latin = f.leader();
    let w = nx + ny;
    for i in 0..=k {
        latin.push_le(&row(w, &[(i, -1.0)]), 0.0);
        latin.push_le(&row(w, &[(i, 1.0)]), 1.0);
        latin.push_le(&row(w, &[(nx + i, -1.0)]), 0.0);
    }
    for i in 1..=r {
        latin.push_eq(&row(w, &[(last, 1.0), (k + 2 * r + i, -1.0)]), 0.0);
    }
    let mut terms = vec![(last, 1.0)];
    terms.extend((1..=r).map(|i| (k + r + i, -pow(i))));
    latin.push_eq(&row(w, &terms), p);
    let mut terms = vec![(0, 0.5), (last, -1.0)];
    terms.extend((1..=k).map(|i| (i, d.q[i - 1] as f64)));
    latin.push_le(&row(w, &terms), 0.0);
    for i in 1..=r {
        let [h, y, x] = gadget(i);
        s_gadget_leader_rows(&mut latin, [h, y, x], nx + k + 1 + 6 * (i - 1));
    }

    // Greek
    let nxi = r + 2;
    let mut f = MaxFollower::new(nxi, r);
    for i in 1..=r {
        f.binary(i - 1, i);
    }
    let mut greek = f.leader();
    let w = nxi + r;
    greek.push_le(&row(w, &[(0, -1.0)]), 0.0);
    for i in 1..=r {
        greek.push_le(&row(w, &[(i, -1.0)]), 0.0);
        greek.push_le(&row(w, &[(i, 1.0)]), 1.0);
        greek.push_le(&row(w, &[(nxi + i - 1, -1.0)]), 0.0);
    }
    let mut terms = vec![(r + 1, 1.0)];
    terms.extend((1..=r).map(|i| (i, -pow(i))));
    greek.push_eq(&row(w, &terms), p);

    // Latin: max x_0/2 + Σ q_i x_i + 2(Q+1) ξ_{r+1} x_last - (Q+1)(Σ 2^(i-1) x_{k+i} + p x_last)
    let mut latin_c = vec![0.0; nx];
    latin_c[0] = -0.5;
    for i in 1..=k {
        latin_c[i] = -(d.q[i - 1] as f64);
    }
    for i in 1..=r {
        latin_c[k + i] = (q_sum + 1.0) * pow(i);
    }
    latin_c[last] = (q_sum + 1.0) * p;
    let mut latin_cross = Matrix::zeros(nx, nxi);
    latin_cross[(last, r + 1)] = -2.0 * (q_sum + 1.0);
    // Greek: max (1 - x_0) ξ_0
    let mut greek_c = vec![0.0; nxi];
    greek_c[0] = -1.0;
    let mut greek_cross = Matrix::zeros(nxi, nx);
    greek_cross[(0, 0)] = 1.0;
    Ok(two_leaders(latin, greek, latin_c, greek_c, &latin_cross, &greek_cross))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lcp::enumerate_pieces;
    use crate::nasp::leader_feasible_set;
    use crate::rng::Lcg;

    fn yes() -> SubsetSumInterval {
        SubsetSumInterval { q: vec![1], p: 2, t: 4, r: 1 }
    }

    fn no() -> SubsetSumInterval {
        SubsetSumInterval { q: vec![1, 2], p: 1, t: 3, r: 1 }
    }

    #[test]
    fn subset_sum_oracle() {
        assert_eq!(yes().witness(), Some(2));
        assert_eq!(no().witness(), None);
        assert!(SubsetSumInterval { q: vec![1], p: 2, t: 5, r: 1 }.validate().is_err());
        assert!(SubsetSumInterval { q: vec![0], p: 2, t: 4, r: 1 }.validate().is_err());
        assert!(SubsetSumInterval { q: vec![1], p: 1, t: 5, r: 2 }.validate().is_err());
    }

    #[test]
    fn reductions_are_well_formed() {
        for d in [yes(), no()] {
            let g = gen_pne_hardness(&d).unwrap();
            let dims = g.validate().unwrap();
            let p = d.k() + 2 * d.r as usize;
            assert_eq!(g.leaders[0].primal_dim(), 2 * (2 * p + 1));
            assert_eq!(g.leaders[1].primal_dim(), 2 * (p + 1));
            assert_eq!(dims.len(), 2);
            let g = gen_mne_hardness(&d).unwrap();
            g.validate().unwrap();
            for l in &g.leaders {
                leader_feasible_set(l).unwrap();
            }
        }
    }

    #[test]
    fn pure_equilibrium_exactly_on_yes_instances() {
        use crate::nasp::{pure_enumeration, SolveOptions, Status};
        let o = SolveOptions::default();
        assert_eq!(pure_enumeration(&gen_pne_hardness(&yes()).unwrap(), &o).unwrap().status, Status::Pne);
        assert_eq!(pure_enumeration(&gen_pne_hardness(&no()).unwrap(), &o).unwrap().status, Status::NoEquilibrium);
        // the inequality form lets the Latin leader shut the Greek one out
        let loose = pne_hardness(&no(), false).unwrap();
        assert_eq!(pure_enumeration(&loose, &o).unwrap().status, Status::Pne);
        let degenerate = SubsetSumInterval { q: vec![1], p: 1, t: 2, r: 0 };
        assert!(gen_pne_hardness(&degenerate).is_err());
    }

    #[test]
    fn mixed_equilibrium_exactly_on_yes_instances() {
        use crate::nasp::{full_enumeration, SolveOptions, Status};
        let o = SolveOptions::default();
        assert!(full_enumeration(&gen_mne_hardness(&yes()).unwrap(), &o).unwrap().status.has_equilibrium());
        assert_eq!(full_enumeration(&gen_mne_hardness(&no()).unwrap(), &o).unwrap().status, Status::NoEquilibrium);
    }

    /// Points of the S-gadget pieces, sampled inside each piece.
    #[test]
    fn s_gadget_projects_onto_h_equals_xy() {
        let l = s_gadget();
        let set = leader_feasible_set(&l).unwrap();
        let pieces = enumerate_pieces(&set).unwrap();
        let mut rng = Lcg::new(5);
        let mut seen = [false; 2];
        for _ in 0..100 {
            let piece = &pieces[rng.below(pieces.len())];
            let mut c = vec![0.0; set.dim];
            for v in c.iter_mut().take(3) {
                *v = rng.uniform(-1.0, 1.0);
            }
            // a bounded objective direction: keep x below 10
            let mut poly = piece.polyhedron.clone();
            let mut cap = vec![0.0; set.dim];
            cap[2] = 1.0;
            poly.push_le(&cap, 10.0);
            let point = match poly.minimize(&c).unwrap() {
                crate::lp::LpOutcome::Optimal { point, .. } => point,
                o => panic!("{o:?}"),
            };
            let (h, y, x) = (point[0], point[1], point[2]);
            assert!((h - x * y).abs() < 1e-7, "h={h} x={x} y={y}");
            assert!(y.abs() < 1e-9 || (y - 1.0).abs() < 1e-9);
            seen[(y > 0.5) as usize] = true;
        }
        assert!(seen[0] && seen[1]);
    }
}
