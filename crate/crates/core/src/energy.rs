//! International energy trade among governments with Cournot producers.
//!
//! Every country is a leader choosing taxes, imports and exports to keep its
//! emissions low; its producers compete à la Cournot on the domestic market
//! `price = DemInt - DemSlope · (Σ q + imports - exports)`. Imports and exports
//! of all countries clear at a single world price, the multiplier of the
//! clearing row.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::linalg::Matrix;
use crate::nash::{FacileNashGame, MarketClearing, QuadraticPlayer};
use crate::nasp::{LeaderObjective, MixedProfile, Nasp, StackelbergLeader};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EnergyError {
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    #[error("profile does not match the instance: {0}")]
    ProfileMismatch(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TaxParadigm {
    /// One tax per producer and unit of energy.
    Standard,
    /// The same tax per unit of energy for every producer.
    Single,
    /// The same tax per unit of emission: `t_p = Cemm_p · t_ghg`.
    Carbon,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProducerSpec {
    pub linear_cost: f64,
    pub quadratic_cost: f64,
    pub capacity: f64,
    /// Emission cost per unit of energy.
    pub emission_cost: f64,
    pub tax_cap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountrySpec {
    pub producers: Vec<ProducerSpec>,
    pub demand_intercept: f64,
    pub demand_slope: f64,
    /// Lower bound on the domestic price.
    pub price_floor: f64,
    pub paradigm: TaxParadigm,
    /// Count tax revenue as income in the government's objective.
    #[serde(default)]
    pub tax_revenue: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyInstance {
    pub countries: Vec<CountrySpec>,
    pub trade: bool,
}

/// Positions of one country's variables in its leader's full vector.
#[derive(Debug, Clone, PartialEq)]
pub struct CountryLayout {
    pub taxes: core::ops::Range<usize>,
    pub carbon_tax: Option<usize>,
    /// Imports from every other country, in country order.
    pub imports: core::ops::Range<usize>,
    pub export: Option<usize>,
    pub revenue: core::ops::Range<usize>,
    pub production: core::ops::Range<usize>,
    pub leader_dim: usize,
}

impl CountryLayout {
    fn new(c: &CountrySpec, countries: usize, trade: bool) -> Self {
        let p = c.producers.len();
        let mut at = p;
        let carbon_tax = (c.paradigm == TaxParadigm::Carbon).then(|| {
            at += 1;
            at - 1
        });
        let partners = if trade { countries - 1 } else { 0 };
        let imports = at..at + partners;
        at += partners;
        let export = trade.then(|| {
            at += 1;
            at - 1
        });
        let w = if c.tax_revenue { p } else { 0 };
        let revenue = at..at + w;
        at += w;
        CountryLayout { taxes: 0..p, carbon_tax, imports, export, revenue, production: at..at + p, leader_dim: at }
    }

    /// Net import coefficients over the primal vector: `imports - exports`.
    fn net_import(&self, width: usize) -> Vec<f64> {
        let mut r = vec![0.0; width];
        for i in self.imports.clone() {
            r[i] = 1.0;
        }
        if let Some(e) = self.export {
            r[e] = -1.0;
        }
        r
    }
}

pub fn layouts(inst: &EnergyInstance) -> Vec<CountryLayout> {
    inst.countries.iter().map(|c| CountryLayout::new(c, inst.countries.len(), inst.trade)).collect()
}

fn invalid(s: String) -> EnergyError {
    EnergyError::InvalidInstance(s)
}

pub fn validate(inst: &EnergyInstance) -> Result<(), EnergyError> {
    if inst.countries.is_empty() {
        return Err(invalid("at least one country is required".into()));
    }
    if inst.trade && inst.countries.len() < 2 {
        return Err(invalid("trade needs two or more countries".into()));
    }
    for (k, c) in inst.countries.iter().enumerate() {
        let finite = [c.demand_intercept, c.demand_slope, c.price_floor].iter().all(|v| v.is_finite());
        if !finite || c.demand_slope <= 0.0 {
            return Err(invalid(format!("country {k}: demand slope must be positive")));
        }
        if !(c.demand_intercept > c.price_floor && c.price_floor >= 0.0) {
            return Err(invalid(format!("country {k}: need demand intercept > price floor >= 0")));
        }
        if c.producers.is_empty() {
            return Err(invalid(format!("country {k}: no producers")));
        }
        for (j, p) in c.producers.iter().enumerate() {
            let v = [p.linear_cost, p.quadratic_cost, p.capacity, p.emission_cost, p.tax_cap];
            if v.iter().any(|x| !x.is_finite() || *x < 0.0) {
                return Err(invalid(format!("country {k}, producer {j}: parameters must be finite and nonnegative")));
            }
        }
    }
    Ok(())
}

fn producers_game(c: &CountrySpec, lay: &CountryLayout) -> FacileNashGame {
    let n = c.producers.len();
    let beta = c.demand_slope;
    let theta = lay.leader_dim;
    let net = lay.net_import(theta);
    let players = c
        .producers
        .iter()
        .enumerate()
        .map(|(p, spec)| {
            // min ½(Ciquad + 2β)q² + (Cilin - DemInt + t_p + β·net + β·Σ_rivals)q
            let mut pl = QuadraticPlayer::linear(vec![spec.linear_cost - c.demand_intercept]).with_params(theta);
            pl.q[(0, 0)] = spec.quadratic_cost + 2.0 * beta;
            pl.param_obj[(0, lay.taxes.start + p)] = 1.0;
            for (i, v) in net.iter().enumerate() {
                pl.param_obj[(0, i)] += beta * v;
            }
            pl.push_le_shifted(&[-1.0], &vec![0.0; theta], 0.0);
            pl.push_le_shifted(&[1.0], &vec![0.0; theta], spec.capacity);
            pl
        })
        .collect();
    let cross = (0..n).map(|_| Matrix::from_vec(1, n - 1, vec![beta; n - 1])).collect();
    FacileNashGame { players, cross, params: theta, clearing: None }
}

fn country_leader(c: &CountrySpec, lay: &CountryLayout) -> StackelbergLeader {
    let followers = producers_game(c, lay);
    let n = c.producers.len();
    let pd = lay.leader_dim + n;
    let mut l = StackelbergLeader {
        leader_dim: lay.leader_dim,
        followers,
        a: Matrix::zeros(0, pd),
        b: Vec::new(),
        a_eq: Matrix::zeros(0, pd),
        b_eq: Vec::new(),
    };
    let unit = |i: usize, v: f64| {
        let mut r = vec![0.0; pd];
        r[i] = v;
        r
    };
    for (p, spec) in c.producers.iter().enumerate() {
        let t = lay.taxes.start + p;
        l.push_le(&unit(t, 1.0), spec.tax_cap);
        l.push_le(&unit(t, -1.0), 0.0);
    }
    match c.paradigm {
        TaxParadigm::Standard => {}
        TaxParadigm::Single => {
            for p in 1..n {
                let mut r = unit(lay.taxes.start + p, 1.0);
                r[lay.taxes.start] = -1.0;
                l.push_eq(&r, 0.0);
            }
        }
        TaxParadigm::Carbon => {
            let g = lay.carbon_tax.expect("carbon layout");
            l.push_le(&unit(g, -1.0), 0.0);
            for (p, spec) in c.producers.iter().enumerate() {
                let mut r = unit(lay.taxes.start + p, 1.0);
                r[g] = -spec.emission_cost;
                l.push_eq(&r, 0.0);
            }
        }
    }
    for i in lay.imports.clone().chain(lay.export) {
        l.push_le(&unit(i, -1.0), 0.0);
    }
    // domestic quantity D = Σq + imports - exports: 0 ≤ D and
    // DemInt - DemSlope·D ≥ floor
    let mut d = lay.net_import(pd);
    for q in lay.production.clone() {
        d[q] = 1.0;
    }
    l.push_le(&d.iter().map(|v| -v).collect::<Vec<_>>(), 0.0);
    l.push_le(&d, (c.demand_intercept - c.price_floor) / c.demand_slope);
    // McCormick envelope of w_p = t_p q_p over [0, tax_cap] x [0, capacity]
    for (p, spec) in c.producers.iter().take(lay.revenue.len()).enumerate() {
        let (w, t, q) = (lay.revenue.start + p, lay.taxes.start + p, lay.production.start + p);
        let (tu, qu) = (spec.tax_cap, spec.capacity);
        let mut r = unit(w, 1.0);
        r[q] = -tu;
        l.push_le(&r, 0.0);
        let mut r = unit(w, 1.0);
        r[t] = -qu;
        l.push_le(&r, 0.0);
        l.push_le(&unit(w, -1.0), 0.0);
        let mut r = unit(w, -1.0);
        r[q] = tu;
        r[t] = qu;
        l.push_le(&r, tu * qu);
    }
    l
}

/// One leader per country. Producers enter only their own government's
/// problem; governments interact through the world price.
pub fn build_nasp(inst: &EnergyInstance) -> Result<Nasp, EnergyError> {
    validate(inst)?;
    let lays = layouts(inst);
    let leaders: Vec<StackelbergLeader> = inst.countries.iter().zip(&lays).map(|(c, l)| country_leader(c, l)).collect();
    let dims: Vec<usize> = leaders.iter().map(|l| l.full_dim().map_err(|e| invalid(format!("{e}")))).collect::<Result<_, _>>()?;
    let k = inst.countries.len();
    let objectives = inst
        .countries
        .iter()
        .zip(&lays)
        .enumerate()
        .map(|(i, (c, lay))| {
            let mut cost = vec![0.0; dims[i]];
            for (p, spec) in c.producers.iter().enumerate() {
                cost[lay.production.start + p] = spec.emission_cost;
            }
            for w in lay.revenue.clone() {
                cost[w] = -1.0;
            }
            let cross = (0..k).map(|j| if j == i { Matrix::zeros(0, 0) } else { Matrix::zeros(dims[i], dims[j]) }).collect();
            LeaderObjective { c: cost, cross }
        })
        .collect();
    // Σ imports - Σ exports = 0, priced into every objective as π·(imports - exports)
    let clearing = inst.trade.then(|| MarketClearing {
        blocks: lays
            .iter()
            .zip(&dims)
            .map(|(lay, &d)| Matrix::from_vec(1, d, lay.net_import(d)))
            .collect(),
        rhs: vec![0.0],
    });
    Ok(Nasp { leaders, objectives, clearing })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountryReport {
    pub production: Vec<f64>,
    pub price: f64,
    pub imports: f64,
    pub exports: f64,
    /// Tax per unit of energy, per producer.
    pub taxes: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub carbon_tax: Option<f64>,
    pub emission: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub countries: Vec<CountryReport>,
    pub trade_volume: f64,
    pub emission: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub clearing_price: Option<f64>,
}

/// Market outcome at the expected strategy of every government.
pub fn report(inst: &EnergyInstance, profile: &MixedProfile) -> Result<EnergyReport, EnergyError> {
    validate(inst)?;
    if profile.leaders.len() != inst.countries.len() {
        return Err(EnergyError::ProfileMismatch("one strategy per country"));
    }
    let lays = layouts(inst);
    let mut countries = Vec::new();
    for ((c, lay), x) in inst.countries.iter().zip(&lays).zip(profile.means()) {
        if x.len() < lay.production.end {
            return Err(EnergyError::ProfileMismatch("strategy too short for the country"));
        }
        let production: Vec<f64> = x[lay.production.clone()].to_vec();
        let imports: f64 = x[lay.imports.clone()].iter().sum();
        let exports = lay.export.map_or(0.0, |e| x[e]);
        let domestic = production.iter().sum::<f64>() + imports - exports;
        let emission = c.producers.iter().zip(&production).map(|(p, q)| p.emission_cost * q).sum();
        countries.push(CountryReport {
            price: c.demand_intercept - c.demand_slope * domestic,
            imports,
            exports,
            taxes: x[lay.taxes.clone()].to_vec(),
            carbon_tax: lay.carbon_tax.map(|g| x[g]),
            emission,
            production,
        });
    }
    let clearing_price = if inst.trade {
        Some(*profile.prices.first().ok_or(EnergyError::ProfileMismatch("missing clearing price"))?)
    } else {
        None
    };
    Ok(EnergyReport {
        trade_volume: countries.iter().map(|c| c.exports).sum(),
        emission: countries.iter().map(|c| c.emission).sum(),
        countries,
        clearing_price,
    })
}
