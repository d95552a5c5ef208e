//! Full enumeration, inner approximation and pure-equilibrium enumeration.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::deviation::deviation_check_in;
use super::hull_game::{decompose_mixed, HullGame, HullOutcome, PieceCache};
use super::{leader_feasible_set, MixedProfile, MixedStrategy, Nasp, NaspError, SolveReport, Status};
use crate::budget::{Budget, Unlimited};
use crate::lcp::enumerate::nonempty_encodings;
use crate::lcp::{encoding_of, selected_polyhedron, ComplementaritySet, Encoding, LcpError, DEFAULT_PIECE_CAP_BITS};
use crate::nash::GameError;
use crate::rng::Lcg;
use crate::tol;

/// Order in which the inner approximation adds pieces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExtensionStrategy {
    /// Lexicographic over the encodings of nonempty pieces.
    Sequential,
    ReverseSequential,
    Random { seed: u64 },
}

pub struct SolveOptions<'a> {
    pub budget: &'a dyn Budget,
    /// Among equilibria of the convexified game, minimize total leader cost.
    pub select: bool,
    /// Largest number of complementarities per leader that may be enumerated.
    pub cap_bits: usize,
    /// Improvement a deviation must bring to count.
    pub deviation_tol: f64,
}

impl Default for SolveOptions<'_> {
    fn default() -> Self {
        SolveOptions { budget: &Unlimited, select: false, cap_bits: DEFAULT_PIECE_CAP_BITS, deviation_tol: tol::DEVIATION }
    }
}

enum Stop {
    TimeLimit,
    Fail(NaspError),
}

impl From<NaspError> for Stop {
    fn from(e: NaspError) -> Self {
        match e {
            NaspError::Lcp(LcpError::TimeLimit) | NaspError::Game(GameError::Lcp(LcpError::TimeLimit)) => Stop::TimeLimit,
            e => Stop::Fail(e),
        }
    }
}

impl From<LcpError> for Stop {
    fn from(e: LcpError) -> Self {
        Stop::from(NaspError::from(e))
    }
}

struct Prepared {
    dims: Vec<usize>,
    sets: Vec<ComplementaritySet>,
    pieces: Vec<Vec<Encoding>>,
    caches: Vec<PieceCache>,
}

impl Prepared {
    fn new(g: &Nasp, opts: &SolveOptions) -> Result<Prepared, Stop> {
        let dims = g.validate()?;
        let sets = g.leaders.iter().map(leader_feasible_set).collect::<Result<Vec<_>, _>>()?;
        let mut pieces = Vec::with_capacity(sets.len());
        for s in &sets {
            pieces.push(nonempty_encodings(s, opts.cap_bits, opts.budget)?);
        }
        let caches = vec![PieceCache::default(); sets.len()];
        Ok(Prepared { dims, sets, pieces, caches })
    }

    fn report(&self, algorithm: &str, status: Status) -> SolveReport {
        SolveReport {
            algorithm: String::from(algorithm),
            status,
            profile: None,
            iterations: 0,
            pieces_enumerated: self.pieces.iter().map(|p| p.len()).collect(),
            pieces_included: vec![0; self.pieces.len()],
            nodes: 0,
        }
    }

    /// Solves the game over the hulls of `chosen`; `None` when it has no
    /// equilibrium.
    fn solve_hulls(
        &mut self,
        g: &Nasp,
        chosen: &[Vec<Encoding>],
        select: bool,
        binary: bool,
        budget: &dyn Budget,
        nodes: &mut usize,
    ) -> Result<Option<MixedProfile>, Stop> {
        let hg = HullGame::build(g, &self.dims, &self.sets, chosen, &mut self.caches)?;
        let (out, n) = hg.solve(g, select, binary, budget)?;
        *nodes += n;
        let (lifted, prices) = match out {
            HullOutcome::Equilibrium { lifted, prices } => (lifted, prices),
            HullOutcome::NoEquilibrium => return Ok(None),
            HullOutcome::TimeLimit => return Err(Stop::TimeLimit),
        };
        let mut leaders = Vec::with_capacity(lifted.len());
        for (i, z) in lifted.iter().enumerate() {
            let set = &self.sets[i];
            let mixed = decompose_mixed(set, &hg.leaders[i], z)
                .map_err(|reason| NaspError::Decomposition { leader: i, reason })?;
            // costs are linear, so a feasible mean is as good as the mixture
            let mean = mixed.mean();
            if !mixed.is_pure() && set.contains(&mean, tol::FEAS) {
                leaders.push(MixedStrategy::pure(mean));
            } else {
                leaders.push(mixed);
            }
        }
        Ok(Some(MixedProfile { leaders, prices }))
    }
}

fn status_of(p: &MixedProfile) -> Status {
    if p.is_pure() {
        Status::Pne
    } else {
        Status::Mne
    }
}

fn finish(result: Result<SolveReport, Stop>, mut fallback: impl FnMut() -> SolveReport) -> Result<SolveReport, NaspError> {
    match result {
        Ok(r) => Ok(r),
        Err(Stop::TimeLimit) => {
            let mut r = fallback();
            r.status = Status::TimeLimit;
            r.profile = None;
            Ok(r)
        }
        Err(Stop::Fail(e)) => Err(e),
    }
}

/// Convexifies every leader's whole region at once. The convexified game
/// has an equilibrium exactly when the original one has a mixed equilibrium.
pub fn full_enumeration(g: &Nasp, opts: &SolveOptions) -> Result<SolveReport, NaspError> {
    enumeration(g, opts, false, "full-enumeration")
}

/// Like [`full_enumeration`] with every leader restricted to a single piece,
/// so only pure equilibria are found.
pub fn pure_enumeration(g: &Nasp, opts: &SolveOptions) -> Result<SolveReport, NaspError> {
    enumeration(g, opts, true, "pure-enumeration")
}

fn enumeration(g: &Nasp, opts: &SolveOptions, binary: bool, name: &str) -> Result<SolveReport, NaspError> {
    let mut partial = None;
    let result = (|| {
        let mut prep = Prepared::new(g, opts)?;
        let mut report = prep.report(name, Status::NoEquilibrium);
        partial = Some(report.clone());
        report.iterations = 1;
        if prep.pieces.iter().any(|p| p.is_empty()) {
            return Ok(report);
        }
        let chosen = prep.pieces.clone();
        report.pieces_included = chosen.iter().map(|c| c.len()).collect();
        partial = Some(report.clone());
        let mut nodes = 0;
        let found = prep.solve_hulls(g, &chosen, opts.select, binary, opts.budget, &mut nodes)?;
        report.nodes = nodes;
        if let Some(profile) = found {
            certify(g, &prep.sets, &profile, opts)?;
            report.status = status_of(&profile);
            report.profile = Some(profile);
        }
        Ok(report)
    })();
    finish(result, || partial.clone().unwrap_or_else(|| empty_report(name, g.leaders.len())))
}

fn empty_report(name: &str, leaders: usize) -> SolveReport {
    SolveReport {
        algorithm: String::from(name),
        status: Status::TimeLimit,
        profile: None,
        iterations: 0,
        pieces_enumerated: vec![0; leaders],
        pieces_included: vec![0; leaders],
        nodes: 0,
    }
}

fn certify(g: &Nasp, sets: &[ComplementaritySet], p: &MixedProfile, opts: &SolveOptions) -> Result<(), Stop> {
    let r = deviation_check_in(g, sets, p, opts.deviation_tol, opts.budget)?;
    if r.timed_out {
        return Err(Stop::TimeLimit);
    }
    if let Some(d) = r.deviations.first() {
        return Err(Stop::Fail(NaspError::Numerical(format!(
            "equilibrium of the convexified game fails certification: leader {} improves {} to {:?}",
            d.leader, d.current, d.best
        ))));
    }
    Ok(())
}

/// Grows inner approximations of the leaders' regions until the restricted
/// game has an equilibrium no leader can improve on in its true region.
/// Starts from the first `k` pieces of every leader under `strategy`.
pub fn inner_approximation(
    g: &Nasp,
    strategy: ExtensionStrategy,
    k: usize,
    opts: &SolveOptions,
) -> Result<SolveReport, NaspError> {
    inner_approximation_from(g, strategy, k, None, opts)
}

/// As [`inner_approximation`], starting from the given pieces per leader.
pub fn inner_approximation_from(
    g: &Nasp,
    strategy: ExtensionStrategy,
    k: usize,
    initial: Option<Vec<Vec<Encoding>>>,
    opts: &SolveOptions,
) -> Result<SolveReport, NaspError> {
    let name = "inner-approximation";
    let mut partial: Option<SolveReport> = None;
    let result = (|| {
        let k = k.max(1);
        let mut prep = Prepared::new(g, opts)?;
        let mut report = prep.report(name, Status::NoEquilibrium);
        partial = Some(report.clone());
        if prep.pieces.iter().any(|p| p.is_empty()) {
            return Ok(report);
        }
        let order = extension_order(&prep.pieces, strategy);
        let mut chosen: Vec<Vec<Encoding>> = match initial {
            Some(init) => {
                if init.len() != prep.pieces.len() {
                    return Err(Stop::Fail(NaspError::Dimension { leader: init.len(), what: "one initial piece list per leader" }));
                }
                for (i, list) in init.iter().enumerate() {
                    if list.is_empty() || list.iter().any(|e| !prep.pieces[i].contains(e)) {
                        return Err(Stop::Fail(NaspError::Dimension { leader: i, what: "initial pieces must be nonempty pieces" }));
                    }
                }
                init
            }
            None => order.iter().map(|o| o.iter().take(k).cloned().collect()).collect(),
        };
        loop {
            report.iterations += 1;
            report.pieces_included = chosen.iter().map(|c| c.len()).collect();
            partial = Some(report.clone());
            if opts.budget.expired() {
                return Err(Stop::TimeLimit);
            }
            let complete = chosen.iter().zip(&prep.pieces).all(|(c, p)| c.len() == p.len());
            let mut nodes = report.nodes;
            let found = prep.solve_hulls(g, &chosen, opts.select, false, opts.budget, &mut nodes)?;
            report.nodes = nodes;
            let Some(profile) = found else {
                if complete {
                    return Ok(report);
                }
                for (c, o) in chosen.iter_mut().zip(&order) {
                    extend(c, o, k);
                }
                continue;
            };
            let dev = deviation_check_in(g, &prep.sets, &profile, opts.deviation_tol, opts.budget)?;
            if dev.timed_out {
                return Err(Stop::TimeLimit);
            }
            if dev.deviations.is_empty() {
                report.status = status_of(&profile);
                report.profile = Some(profile);
                return Ok(report);
            }
            if complete {
                return Err(Stop::Fail(NaspError::Numerical(String::from(
                    "equilibrium over the full hulls admits a deviation",
                ))));
            }
            let mut grew = false;
            for d in &dev.deviations {
                let i = d.leader;
                if let Some(e) = piece_containing(&prep.sets[i], &prep.pieces[i], &chosen[i], &d.point)? {
                    chosen[i].push(e);
                    grew = true;
                } else if chosen[i].len() < prep.pieces[i].len() {
                    extend(&mut chosen[i], &order[i], k);
                    grew = true;
                }
            }
            if !grew {
                for (c, o) in chosen.iter_mut().zip(&order) {
                    extend(c, o, k);
                }
            }
        }
    })();
    finish(result, || partial.clone().unwrap_or_else(|| empty_report(name, g.leaders.len())))
}

/// Equilibrium of the game restricted to the hulls of the given pieces,
/// without checking it against the true regions.
pub fn restricted_equilibrium(g: &Nasp, chosen: &[Vec<Encoding>], opts: &SolveOptions) -> Result<Option<MixedProfile>, NaspError> {
    let result = (|| {
        let mut prep = Prepared::new(g, opts)?;
        if chosen.len() != prep.pieces.len() {
            return Err(Stop::Fail(NaspError::Dimension { leader: chosen.len(), what: "one piece list per leader" }));
        }
        let mut nodes = 0;
        prep.solve_hulls(g, chosen, opts.select, false, opts.budget, &mut nodes)
    })();
    match result {
        Ok(p) => Ok(p),
        Err(Stop::TimeLimit) => Err(NaspError::Lcp(LcpError::TimeLimit)),
        Err(Stop::Fail(e)) => Err(e),
    }
}

fn extension_order(pieces: &[Vec<Encoding>], strategy: ExtensionStrategy) -> Vec<Vec<Encoding>> {
    let mut rng = match strategy {
        ExtensionStrategy::Random { seed } => Some(Lcg::new(seed)),
        _ => None,
    };
    pieces
        .iter()
        .map(|p| {
            let mut o = p.clone();
            match strategy {
                ExtensionStrategy::Sequential => {}
                ExtensionStrategy::ReverseSequential => o.reverse(),
                ExtensionStrategy::Random { .. } => rng.as_mut().unwrap().split().shuffle(&mut o),
            }
            o
        })
        .collect()
}

fn extend(chosen: &mut Vec<Encoding>, order: &[Encoding], k: usize) {
    let new: Vec<Encoding> = order.iter().filter(|e| !chosen.contains(e)).take(k).cloned().collect();
    chosen.extend(new);
}

/// A not-yet-included piece holding `x`: the one read off the point's
/// complementarity sides when that works, else the first one that holds it.
fn piece_containing(
    set: &ComplementaritySet,
    pieces: &[Encoding],
    chosen: &[Encoding],
    x: &[f64],
) -> Result<Option<Encoding>, Stop> {
    let guess = encoding_of(set, x);
    let holds = |e: &Encoding| -> Result<bool, Stop> { Ok(selected_polyhedron(set, e)?.contains(x, tol::FEAS)) };
    if pieces.contains(&guess) && !chosen.contains(&guess) && holds(&guess)? {
        return Ok(Some(guess));
    }
    for e in pieces {
        if !chosen.contains(e) && holds(e)? {
            return Ok(Some(e.clone()));
        }
    }
    Ok(None)
}
