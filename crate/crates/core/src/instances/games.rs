//! Small hand-built games and random families of two-leader games.

use alloc::vec;
use alloc::vec::Vec;

use crate::lcp::{ComplementaritySet, Encoding};
use crate::linalg::Matrix;
use crate::nash::{FacileNashGame, QuadraticPlayer};
use crate::nasp::{leader_feasible_set, LeaderObjective, Nasp, StackelbergLeader};
use crate::rng::Lcg;

/// Leader over `n` variables with a single linear follower.
pub(crate) fn with_follower(n: usize, follower: QuadraticPlayer) -> StackelbergLeader {
    let m = follower.dim();
    let followers = FacileNashGame { cross: vec![Matrix::zeros(m, 0)], players: vec![follower], params: n, clearing: None };
    let pd = n + m;
    StackelbergLeader { leader_dim: n, followers, a: Matrix::zeros(0, pd), b: Vec::new(), a_eq: Matrix::zeros(0, pd), b_eq: Vec::new() }
}

/// Two leaders whose costs are `x_0ᵀ C01 x_1` and `x_1ᵀ C10 x_0` plus linear
/// terms; the coupling blocks are given over the leading variables only.
pub(crate) fn two_leaders(
    l0: StackelbergLeader,
    l1: StackelbergLeader,
    c0: Vec<f64>,
    c1: Vec<f64>,
    c01: &Matrix,
    c10: &Matrix,
) -> Nasp {
    let d0 = l0.full_dim().expect("valid leader");
    let d1 = l1.full_dim().expect("valid leader");
    let widen = |c: Vec<f64>, d: usize| {
        let mut v = c;
        v.resize(d, 0.0);
        v
    };
    let mut m01 = Matrix::zeros(d0, d1);
    c01.write_block(&mut m01, 0, 0);
    let mut m10 = Matrix::zeros(d1, d0);
    c10.write_block(&mut m10, 0, 0);
    Nasp {
        leaders: vec![l0, l1],
        objectives: vec![
            LeaderObjective { c: widen(c0, d0), cross: vec![Matrix::zeros(0, 0), m01] },
            LeaderObjective { c: widen(c1, d1), cross: vec![m10, Matrix::zeros(0, 0)] },
        ],
        clearing: None,
    }
}

/// Greek leader over `ξ ∈ [-hi, hi]` whose follower computes `χ = |ξ| - lo`;
/// requiring `χ ≥ 0` leaves `[-hi, -lo] ∪ [lo, hi]`.
fn punctured_interval(lo: f64, hi: f64) -> StackelbergLeader {
    let mut f = QuadraticPlayer::linear(vec![1.0]).with_params(1);
    // χ ≥ -ξ - lo, then χ ≥ ξ - lo
    f.push_le_shifted(&[-1.0], &[-1.0], lo);
    f.push_le_shifted(&[-1.0], &[1.0], lo);
    let mut l = with_follower(1, f);
    l.push_le(&[1.0, 0.0], hi);
    l.push_le(&[-1.0, 0.0], hi);
    l.push_le(&[0.0, -1.0], 0.0);
    l
}

fn half_line() -> StackelbergLeader {
    let mut l = StackelbergLeader::alone(1);
    l.push_le(&[-1.0], 0.0);
    l
}

/// Latin `min ξx` over `x ≥ 0` against Greek `min ±xξ` over
/// `ξ ∈ [-5,-1] ∪ [1,5]`. Leader 0 is Latin, leader 1 Greek; `flipped`
/// selects the Greek cost `-xξ`.
pub fn latin_greek(flipped: bool) -> Nasp {
    let s = if flipped { -1.0 } else { 1.0 };
    two_leaders(
        half_line(),
        punctured_interval(1.0, 5.0),
        vec![0.0],
        vec![0.0],
        &Matrix::from_rows(1, &[vec![1.0]]),
        &Matrix::from_rows(1, &[vec![s]]),
    )
}

/// Greek pieces of [`latin_greek`]: `(0,1)` is `ξ ∈ [1,5]`, `(1,0)` is `ξ ∈ [-5,-1]`.
pub fn greek_upper_piece() -> Encoding {
    Encoding(vec![false, true])
}

pub fn greek_lower_piece() -> Encoding {
    Encoding(vec![true, false])
}

/// Leader choosing a unit vector of `R²`: `x ≥ 0`, `x ≤ 1`, `x_1 + x_2 = 1`
/// and a follower computing `y_i = max(-x_i, x_i - 1) ≥ 0`, so each `x_i` is 0 or 1.
fn unit_vector_chooser() -> StackelbergLeader {
    let mut f = QuadraticPlayer::linear(vec![1.0, 1.0]).with_params(2);
    for i in 0..2 {
        let mut row = [0.0; 2];
        row[i] = -1.0;
        let mut shift = [0.0; 2];
        shift[i] = -1.0;
        f.push_le_shifted(&row, &shift, 0.0);
        shift[i] = 1.0;
        f.push_le_shifted(&row, &shift, 1.0);
    }
    let mut l = with_follower(2, f);
    for i in 0..4 {
        let mut r = [0.0; 4];
        r[i] = -1.0;
        l.push_le(&r, 0.0);
        if i < 2 {
            r[i] = 1.0;
            l.push_le(&r, 1.0);
        }
    }
    l.push_eq(&[1.0, 1.0, 0.0, 0.0], 1.0);
    l
}

/// Matching pennies between two leaders that each pick a unit vector: the
/// first gains when both pick the same one, the second when they differ.
/// Only a mixed equilibrium exists.
pub fn matching_pennies() -> Nasp {
    let c01 = Matrix::from_rows(2, &[vec![-1.0, 0.0], vec![0.0, -1.0]]);
    let c10 = Matrix::from_rows(2, &[vec![0.0, -1.0], vec![-1.0, 0.0]]);
    two_leaders(unit_vector_chooser(), unit_vector_chooser(), vec![], vec![], &c01, &c10)
}

/// Latin `min ξx` over `x ≥ 0` against Greek `min (x + s)ξ` over
/// `[-hi, -lo] ∪ [lo, hi]` with `s > 0`. The Greek leader always picks `-hi`
/// and the Latin objective is then unbounded, so no equilibrium exists, mixed
/// or pure.
pub fn unbounded_pursuit(rng: &mut Lcg) -> Nasp {
    let lo = rng.uniform(0.5, 2.0);
    let hi = lo + rng.uniform(0.5, 4.0);
    let s = rng.uniform(0.5, 3.0);
    let scale = rng.uniform(0.5, 2.0);
    two_leaders(
        half_line(),
        punctured_interval(lo, hi),
        vec![0.0],
        vec![s],
        &Matrix::from_rows(1, &[vec![scale]]),
        &Matrix::from_rows(1, &[vec![1.0]]),
    )
}

fn small_int(rng: &mut Lcg, lo: i64, hi: i64) -> f64 {
    (lo + rng.below((hi - lo + 1) as usize) as i64) as f64
}

/// A random leader with one to three boxed variables and a follower
/// computing `y = max_k(a_kᵀx + β_k)` over at most two rows, followed by a
/// leader row on `y` that usually cuts the region into pieces.
fn random_trivial_leader(rng: &mut Lcg) -> StackelbergLeader {
    loop {
        let n = 1 + rng.below(3);
        let m = rng.below(3);
        let mut l = if m == 0 {
            StackelbergLeader::alone(n)
        } else {
            let mut f = QuadraticPlayer::linear(vec![1.0]).with_params(n);
            for _ in 0..m {
                // y ≥ aᵀx + β  ⇔  -y ≤ -β - aᵀx
                let a: Vec<f64> = (0..n).map(|_| small_int(rng, -2, 2)).collect();
                let beta = small_int(rng, -2, 2);
                f.push_le_shifted(&[-1.0], &a, -beta);
            }
            with_follower(n, f)
        };
        let pd = l.primal_dim();
        for j in 0..n {
            let mut r = vec![0.0; pd];
            r[j] = 1.0;
            l.push_le(&r, small_int(rng, 1, 4));
            r[j] = -1.0;
            l.push_le(&r, 0.0);
        }
        if m > 0 {
            let mut r = vec![0.0; pd];
            let bound = small_int(rng, -1, 2);
            if rng.bernoulli(0.5) {
                r[n] = -1.0;
                l.push_le(&r, -bound);
            } else {
                r[n] = 1.0;
                l.push_le(&r, bound);
            }
        }
        let set = leader_feasible_set(&l).expect("well formed");
        if crate::lcp::enumerate_pieces(&set).map(|p| !p.is_empty()).unwrap_or(false) {
            return l;
        }
    }
}

/// Two random leaders with integer costs coupled through the leader and
/// follower variables.
pub fn random_trivial(rng: &mut Lcg) -> Nasp {
    let l0 = random_trivial_leader(rng);
    let l1 = random_trivial_leader(rng);
    let (p0, p1) = (l0.primal_dim(), l1.primal_dim());
    let c0: Vec<f64> = (0..p0).map(|_| small_int(rng, -3, 3)).collect();
    let c1: Vec<f64> = (0..p1).map(|_| small_int(rng, -3, 3)).collect();
    let mut c01 = Matrix::zeros(p0, p1);
    let mut c10 = Matrix::zeros(p1, p0);
    for a in 0..p0 {
        for b in 0..p1 {
            c01[(a, b)] = small_int(rng, -2, 2);
            c10[(b, a)] = small_int(rng, -2, 2);
        }
    }
    two_leaders(l0, l1, c0, c1, &c01, &c10)
}

/// A random complementarity set with one to `max_pairs` pairs over integer
/// data. Every variable is boxed except, now and then, one left open above
/// so that some objectives are unbounded.
pub fn random_complementarity_set(rng: &mut Lcg, max_pairs: usize) -> ComplementaritySet {
    let m = 1 + rng.below(max_pairs.max(1));
    let n = m + rng.below(3);
    let mut s = ComplementaritySet::free(n);
    let open = rng.bernoulli(0.2).then(|| rng.below(n));
    for j in 0..n {
        let u = small_int(rng, 2, 6);
        let mut r = vec![0.0; n];
        r[j] = 1.0;
        if open != Some(j) {
            s.push_le(&r, u);
        }
        if j >= m {
            r[j] = -1.0;
            s.push_le(&r, u);
        }
    }
    for _ in 0..rng.below(3) {
        let r: Vec<f64> = (0..n).map(|_| small_int(rng, -2, 2)).collect();
        let beta = small_int(rng, 0, 6);
        s.push_le(&r, beta);
    }
    for i in 0..m {
        let r: Vec<f64> = (0..n).map(|_| small_int(rng, -2, 2)).collect();
        let q = small_int(rng, -3, 3);
        s.pair(i, &r, q);
    }
    s
}
