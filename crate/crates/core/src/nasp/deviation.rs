use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{leader_feasible_set, MixedProfile, Nasp, NaspError};
use crate::budget::Budget;
use crate::lcp::{optimize_over_set_with, BranchOptions, ComplementaritySet, SetOutcome};
use crate::linalg::dot;

/// A profitable unilateral move for one leader.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Deviation {
    pub leader: usize,
    /// Expected cost under the profile.
    pub current: f64,
    /// Cost at `point`; `None` when the best response is unbounded.
    pub best: Option<f64>,
    pub point: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ray: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviationReport {
    /// Expected cost of every leader under the profile.
    pub costs: Vec<f64>,
    pub deviations: Vec<Deviation>,
    /// Some best response ran out of time; the report is then incomplete.
    pub timed_out: bool,
}

impl DeviationReport {
    pub fn is_equilibrium(&self) -> bool {
        self.deviations.is_empty() && !self.timed_out
    }
}

/// Best response of every leader against the rivals' mean strategies.
///
/// Costs are linear in the own strategy, so the expected cost of a mixed
/// strategy equals the cost at its mean. A move counts when it beats the
/// current expected cost by more than `tol`.
pub fn deviation_check(g: &Nasp, profile: &MixedProfile, tol: f64, budget: &dyn Budget) -> Result<DeviationReport, NaspError> {
    g.validate()?;
    let sets = g.leaders.iter().map(leader_feasible_set).collect::<Result<Vec<_>, _>>()?;
    deviation_check_in(g, &sets, profile, tol, budget)
}

pub(crate) fn deviation_check_in(
    g: &Nasp,
    sets: &[ComplementaritySet],
    profile: &MixedProfile,
    tol: f64,
    budget: &dyn Budget,
) -> Result<DeviationReport, NaspError> {
    let means = profile.means();
    let mut report = DeviationReport { costs: Vec::new(), deviations: Vec::new(), timed_out: false };
    for (i, set) in sets.iter().enumerate() {
        let c = g.effective_cost(i, &means, &profile.prices);
        let current = dot(&c, &means[i]);
        report.costs.push(current);
        let opts = BranchOptions { binaries: Vec::new(), use_gap: false, budget };
        let (out, _) = optimize_over_set_with(set, &c, &opts)?;
        match out {
            SetOutcome::Optimal { point, value } => {
                if value < current - tol {
                    report.deviations.push(Deviation { leader: i, current, best: Some(value), point, ray: None });
                }
            }
            SetOutcome::Unbounded { point, ray } => {
                report.deviations.push(Deviation { leader: i, current, best: None, point, ray: Some(ray) });
            }
            // the profile itself lies in the set, so this only happens when
            // the profile is not feasible
            SetOutcome::Infeasible => {
                return Err(NaspError::Numerical(alloc::format!("leader {i} has an empty feasible set")));
            }
            SetOutcome::TimeLimit => report.timed_out = true,
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::budget::Unlimited;
    use crate::instances::games::latin_greek;
    use crate::nasp::{LeaderObjective, MixedStrategy, StackelbergLeader};
    use crate::tol;
    use alloc::vec;

    fn greek_point(xi: f64) -> Vec<f64> {
        // (ξ, χ, u) with χ = |ξ| - 1 and the multiplier on the binding row
        let u = if xi >= 0.0 { [0.0, 1.0] } else { [1.0, 0.0] };
        vec![xi, xi.abs() - 1.0, u[0], u[1]]
    }

    #[test]
    fn greek_escapes_to_the_far_end() {
        let g = latin_greek(false);
        let p = MixedProfile { leaders: vec![MixedStrategy::pure(vec![1.0]), MixedStrategy::pure(greek_point(1.0))], prices: vec![] };
        let r = deviation_check(&g, &p, tol::DEVIATION, &Unlimited).unwrap();
        assert!(!r.is_equilibrium());
        let greek = r.deviations.iter().find(|d| d.leader == 1).unwrap();
        assert!((greek.point[0] + 5.0).abs() < 1e-9);
        assert!((greek.best.unwrap() + 5.0).abs() < 1e-9);
        // Latin at x = 1 against ξ = 1 gains by dropping to 0
        assert!(r.deviations.iter().any(|d| d.leader == 0));
    }

    #[test]
    fn unbounded_best_response_is_a_deviation() {
        let g = latin_greek(false);
        let p = MixedProfile { leaders: vec![MixedStrategy::pure(vec![0.0]), MixedStrategy::pure(greek_point(-3.0))], prices: vec![] };
        let r = deviation_check(&g, &p, tol::DEVIATION, &Unlimited).unwrap();
        let latin = r.deviations.iter().find(|d| d.leader == 0).unwrap();
        assert_eq!(latin.best, None);
        assert!(latin.ray.as_ref().unwrap()[0] > 0.0);
    }

    #[test]
    fn lone_leader_at_its_optimum_does_not_deviate() {
        let mut l = StackelbergLeader::alone(1);
        l.push_le(&[1.0], 2.0);
        l.push_le(&[-1.0], 0.0);
        let g = Nasp { leaders: vec![l], objectives: vec![LeaderObjective { c: vec![-1.0], cross: vec![crate::Matrix::zeros(0, 0)] }], clearing: None };
        let at = |x: f64| MixedProfile { leaders: vec![MixedStrategy::pure(vec![x])], prices: vec![] };
        assert!(deviation_check(&g, &at(2.0), tol::DEVIATION, &Unlimited).unwrap().is_equilibrium());
        let r = deviation_check(&g, &at(1.0), tol::DEVIATION, &Unlimited).unwrap();
        assert_eq!(r.deviations.len(), 1);
        assert_eq!(r.costs, vec![-1.0]);
    }
}
