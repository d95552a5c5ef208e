//! Dense bounded-variable primal simplex over ranged rows.
//!
//! Every row gets a logical variable `s_i = a_i x` carrying the row bounds, so
//! the working system is `[A | -I] (x, s) = 0` with bounds on all columns.
//! Phase 1 minimizes the sum of bound violations of the basic variables, phase 2
//! the true objective. Pricing is Dantzig's rule (ties to the lowest index); a
//! run of degenerate steps switches to Bland's rule until progress resumes.

use alloc::vec;
use alloc::vec::Vec;

use crate::linalg::{invert, Matrix};

const PRIMAL_TOL: f64 = 1e-9;
const DUAL_TOL: f64 = 1e-9;
const PIVOT_TOL: f64 = 1e-9;
// residual violation still accepted as feasible when phase 1 cannot improve
const ACCEPT_TOL: f64 = 1e-8;
const DEGENERATE_STEP: f64 = 1e-11;
const BLAND_AFTER: usize = 25;
const REFACTOR_EVERY: usize = 200;

pub(crate) enum Raw {
    Optimal(Vec<f64>),
    Infeasible,
    Unbounded(Vec<f64>, Vec<f64>),
    Stalled,
}

pub(crate) struct Problem<'a> {
    pub c: &'a [f64],
    pub a: &'a Matrix,
    pub row_lo: &'a [f64],
    pub row_hi: &'a [f64],
    pub col_lo: &'a [f64],
    pub col_hi: &'a [f64],
}

struct Tableau<'a> {
    a: &'a Matrix,
    m: usize,
    n: usize,
    w: usize,
    t: Vec<f64>,
    basis: Vec<usize>,
    row_of: Vec<usize>,
    val: Vec<f64>,
    lo: Vec<f64>,
    hi: Vec<f64>,
    cost: Vec<f64>,
    d: Vec<f64>,
    bland: bool,
    degenerate_run: usize,
    since_refactor: usize,
    pivots: usize,
}

const NONBASIC: usize = usize::MAX;

enum Step {
    Moved,
    Optimal,
    Unbounded(usize, f64),
    Failed,
}

impl<'a> Tableau<'a> {
    fn new(p: &Problem<'a>) -> Self {
        let m = p.a.rows();
        let n = p.a.cols();
        let w = n + m;
        let mut lo = Vec::with_capacity(w);
        let mut hi = Vec::with_capacity(w);
        lo.extend_from_slice(p.col_lo);
        lo.extend_from_slice(p.row_lo);
        hi.extend_from_slice(p.col_hi);
        hi.extend_from_slice(p.row_hi);
        let mut val = vec![0.0; w];
        for j in 0..n {
            val[j] = if lo[j].is_finite() {
                lo[j]
            } else if hi[j].is_finite() {
                hi[j]
            } else {
                0.0
            };
        }
        // basis = logicals, B = -I, so T = [-A | I]
        let mut t = vec![0.0; m * w];
        for i in 0..m {
            let row = p.a.row(i);
            let tr = &mut t[i * w..(i + 1) * w];
            for j in 0..n {
                tr[j] = -row[j];
            }
            tr[n + i] = 1.0;
            val[n + i] = row.iter().zip(&val[..n]).map(|(a, x)| a * x).sum();
        }
        let mut cost = vec![0.0; w];
        cost[..n].copy_from_slice(p.c);
        let mut row_of = vec![NONBASIC; w];
        for i in 0..m {
            row_of[n + i] = i;
        }
        Tableau {
            a: p.a,
            m,
            n,
            w,
            t,
            basis: (n..n + m).collect(),
            row_of,
            val,
            lo,
            hi,
            cost,
            d: vec![0.0; w],
            bland: false,
            degenerate_run: 0,
            since_refactor: 0,
            pivots: 0,
        }
    }

    fn infeasibility(&self, i: usize) -> f64 {
        let b = self.basis[i];
        let (v, lo, hi) = (self.val[b], self.lo[b], self.hi[b]);
        if v < lo - PRIMAL_TOL * (1.0 + lo.abs()) {
            -1.0
        } else if v > hi + PRIMAL_TOL * (1.0 + hi.abs()) {
            1.0
        } else {
            0.0
        }
    }

    fn phase1_costs(&mut self) -> bool {
        self.d.iter_mut().for_each(|x| *x = 0.0);
        let mut any = false;
        for i in 0..self.m {
            let wi = self.infeasibility(i);
            if wi != 0.0 {
                any = true;
                let row = &self.t[i * self.w..(i + 1) * self.w];
                for (dk, tk) in self.d.iter_mut().zip(row) {
                    *dk -= wi * tk;
                }
            }
        }
        for &b in &self.basis {
            self.d[b] = 0.0;
        }
        any
    }

    fn phase2_costs(&mut self) {
        self.d.copy_from_slice(&self.cost);
        for i in 0..self.m {
            let cb = self.cost[self.basis[i]];
            if cb != 0.0 {
                let row = &self.t[i * self.w..(i + 1) * self.w];
                for (dk, tk) in self.d.iter_mut().zip(row) {
                    *dk -= cb * tk;
                }
            }
        }
        for &b in &self.basis {
            self.d[b] = 0.0;
        }
    }

    /// Direction in which nonbasic `j` may move profitably, if any.
    fn eligible(&self, j: usize) -> Option<f64> {
        if self.row_of[j] != NONBASIC {
            return None;
        }
        let dj = self.d[j];
        let (lo, hi, v) = (self.lo[j], self.hi[j], self.val[j]);
        if lo == hi {
            return None;
        }
        if dj < -DUAL_TOL && v < hi - PRIMAL_TOL {
            Some(1.0)
        } else if dj > DUAL_TOL && v > lo + PRIMAL_TOL {
            Some(-1.0)
        } else {
            None
        }
    }

    fn choose_entering(&self) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        let mut best_score = 0.0;
        for j in 0..self.w {
            if let Some(dir) = self.eligible(j) {
                if self.bland {
                    return Some((j, dir));
                }
                let score = self.d[j].abs();
                if score > best_score {
                    best_score = score;
                    best = Some((j, dir));
                }
            }
        }
        best
    }

    /// One simplex iteration. `phase1` selects the ratio test that lets
    /// infeasible basics travel up to the bound they violate.
    fn step(&mut self, phase1: bool) -> Step {
        let Some((j, dir)) = self.choose_entering() else {
            return Step::Optimal;
        };
        let w = self.w;
        let mut theta = f64::INFINITY;
        let mut leave: Option<(usize, f64)> = None;
        let mut leave_pivot = 0.0;
        for i in 0..self.m {
            let tij = self.t[i * w + j];
            if tij.abs() <= PIVOT_TOL {
                continue;
            }
            let rate = -tij * dir;
            let b = self.basis[i];
            let (v, lo, hi) = (self.val[b], self.lo[b], self.hi[b]);
            let (limit, bound) = if phase1 && v < lo - PRIMAL_TOL * (1.0 + lo.abs()) {
                if rate > 0.0 {
                    ((lo - v) / rate, lo)
                } else {
                    continue;
                }
            } else if phase1 && v > hi + PRIMAL_TOL * (1.0 + hi.abs()) {
                if rate < 0.0 {
                    ((v - hi) / -rate, hi)
                } else {
                    continue;
                }
            } else if rate > 0.0 {
                if !hi.is_finite() {
                    continue;
                }
                (((hi - v) / rate).max(0.0), hi)
            } else {
                if !lo.is_finite() {
                    continue;
                }
                (((v - lo) / -rate).max(0.0), lo)
            };
            let better = match leave {
                None => true,
                Some((r, _)) => {
                    if limit < theta - 1e-12 {
                        true
                    } else if limit <= theta + 1e-12 {
                        if self.bland {
                            b < self.basis[r]
                        } else {
                            tij.abs() > leave_pivot
                        }
                    } else {
                        false
                    }
                }
            };
            if better {
                theta = theta.min(limit);
                leave = Some((i, bound));
                leave_pivot = tij.abs();
            }
        }
        let flip = self.hi[j] - self.lo[j];
        if flip.is_finite() && flip <= theta {
            // bound flip, basis unchanged
            self.shift(j, dir, flip);
            self.val[j] = if dir > 0.0 { self.hi[j] } else { self.lo[j] };
            self.note_progress(flip);
            return Step::Moved;
        }
        let Some((r, bound)) = leave else {
            return if phase1 { Step::Failed } else { Step::Unbounded(j, dir) };
        };
        self.shift(j, dir, theta);
        let leaving = self.basis[r];
        self.val[leaving] = bound;
        self.pivot(r, j);
        self.note_progress(theta);
        Step::Moved
    }

    fn note_progress(&mut self, theta: f64) {
        if theta <= DEGENERATE_STEP {
            self.degenerate_run += 1;
            if self.degenerate_run >= BLAND_AFTER {
                self.bland = true;
            }
        } else {
            self.degenerate_run = 0;
            self.bland = false;
        }
    }

    fn shift(&mut self, j: usize, dir: f64, theta: f64) {
        if theta == 0.0 {
            return;
        }
        for i in 0..self.m {
            let tij = self.t[i * self.w + j];
            if tij != 0.0 {
                self.val[self.basis[i]] -= tij * dir * theta;
            }
        }
        self.val[j] += dir * theta;
    }

    fn pivot(&mut self, r: usize, j: usize) {
        let w = self.w;
        let piv = self.t[r * w + j];
        let inv = 1.0 / piv;
        {
            let row = &mut self.t[r * w..(r + 1) * w];
            for v in row.iter_mut() {
                *v *= inv;
            }
            row[j] = 1.0;
        }
        let nz: Vec<usize> = (0..w).filter(|&k| self.t[r * w + k] != 0.0).collect();
        let prow: Vec<f64> = nz.iter().map(|&k| self.t[r * w + k]).collect();
        for i in 0..self.m {
            if i == r {
                continue;
            }
            let f = self.t[i * w + j];
            if f == 0.0 {
                continue;
            }
            let row = &mut self.t[i * w..(i + 1) * w];
            for (&k, &pk) in nz.iter().zip(&prow) {
                row[k] -= f * pk;
            }
            row[j] = 0.0;
        }
        let dj = self.d[j];
        if dj != 0.0 {
            for (&k, &pk) in nz.iter().zip(&prow) {
                self.d[k] -= dj * pk;
            }
            self.d[j] = 0.0;
        }
        let leaving = self.basis[r];
        self.row_of[leaving] = NONBASIC;
        self.row_of[j] = r;
        self.basis[r] = j;
        self.since_refactor += 1;
        self.pivots += 1;
    }

    /// Rebuilds `T = B⁻¹[A | -I]` and the basic values from scratch.
    fn refactor(&mut self) -> bool {
        let (m, n, w) = (self.m, self.n, self.w);
        self.since_refactor = 0;
        if m == 0 {
            return true;
        }
        let mut b = Matrix::zeros(m, m);
        for (k, &var) in self.basis.iter().enumerate() {
            if var < n {
                for i in 0..m {
                    b[(i, k)] = self.a[(i, var)];
                }
            } else {
                b[(var - n, k)] = -1.0;
            }
        }
        let Some(binv) = invert(&b, 1e-13) else {
            return false;
        };
        let mut t = vec![0.0; m * w];
        for i in 0..m {
            let brow = binv.row(i);
            let trow = &mut t[i * w..(i + 1) * w];
            for (k, &bik) in brow.iter().enumerate() {
                if bik == 0.0 {
                    continue;
                }
                let arow = self.a.row(k);
                for j in 0..n {
                    trow[j] += bik * arow[j];
                }
                trow[n + k] -= bik;
            }
        }
        self.t = t;
        // x_B = -B⁻¹ N x_N
        let mut rhs = vec![0.0; m];
        for var in 0..w {
            if self.row_of[var] != NONBASIC {
                continue;
            }
            let v = self.val[var];
            if v == 0.0 {
                continue;
            }
            if var < n {
                for (i, r) in rhs.iter_mut().enumerate() {
                    *r += self.a[(i, var)] * v;
                }
            } else {
                rhs[var - n] -= v;
            }
        }
        for i in 0..m {
            let xb: f64 = -binv.row(i).iter().zip(&rhs).map(|(a, b)| a * b).sum::<f64>();
            self.val[self.basis[i]] = xb;
        }
        true
    }

    fn max_violation(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for &b in &self.basis {
            let (v, lo, hi) = (self.val[b], self.lo[b], self.hi[b]);
            worst = worst.max((lo - v) / (1.0 + lo.abs())).max((v - hi) / (1.0 + hi.abs()));
        }
        worst
    }

    fn primal_feasible(&self) -> bool {
        (0..self.m).all(|i| self.infeasibility(i) == 0.0)
    }
}

pub(crate) fn solve(p: &Problem) -> Raw {
    let mut tab = Tableau::new(p);
    let limit = 50 * (tab.m + tab.n) + 5000;
    'outer: loop {
        while tab.phase1_costs() {
            if tab.pivots > limit {
                return Raw::Stalled;
            }
            match tab.step(true) {
                Step::Moved => {
                    if tab.since_refactor >= REFACTOR_EVERY && !tab.refactor() {
                        return Raw::Stalled;
                    }
                }
                Step::Optimal => {
                    if tab.since_refactor > 0 {
                        if !tab.refactor() {
                            return Raw::Stalled;
                        }
                        continue;
                    }
                    if tab.max_violation() <= ACCEPT_TOL {
                        break;
                    }
                    return Raw::Infeasible;
                }
                Step::Failed | Step::Unbounded(..) => return Raw::Stalled,
            }
        }
        tab.phase2_costs();
        tab.bland = false;
        tab.degenerate_run = 0;
        loop {
            if tab.pivots > limit {
                return Raw::Stalled;
            }
            match tab.step(false) {
                Step::Moved => {
                    if tab.since_refactor >= REFACTOR_EVERY {
                        if !tab.refactor() {
                            return Raw::Stalled;
                        }
                        if !tab.primal_feasible() {
                            continue 'outer;
                        }
                        tab.phase2_costs();
                    }
                }
                Step::Optimal => {
                    if tab.since_refactor > 0 {
                        if !tab.refactor() {
                            return Raw::Stalled;
                        }
                        if !tab.primal_feasible() && tab.max_violation() > ACCEPT_TOL {
                            continue 'outer;
                        }
                        tab.phase2_costs();
                        continue;
                    }
                    return Raw::Optimal(tab.val[..tab.n].to_vec());
                }
                Step::Unbounded(j, dir) => {
                    let n = tab.n;
                    let mut ray = vec![0.0; n];
                    if j < n {
                        ray[j] = dir;
                    }
                    for i in 0..tab.m {
                        let b = tab.basis[i];
                        if b < n {
                            ray[b] = -tab.t[i * tab.w + j] * dir;
                        }
                    }
                    return Raw::Unbounded(tab.val[..n].to_vec(), ray);
                }
                Step::Failed => return Raw::Stalled,
            }
        }
    }
}
