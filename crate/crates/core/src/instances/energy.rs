//! Random energy-trade instances drawn from small parameter menus.
//!
//! Producers come in three classes (green, average, high polluting). The class
//! picks aligned slices of the emission, linear cost, quadratic cost and tax
//! cap menus, so dirty producers are cheap and may be taxed more, green ones
//! the opposite. Within its slice each parameter is drawn uniformly.

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::InstanceError;
use crate::energy::{build_nasp, CountrySpec, EnergyInstance, ProducerSpec, TaxParadigm};
use crate::nasp::leader_feasible_set;
use crate::rng::Lcg;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMenu {
    pub emission_costs: Vec<f64>,
    pub linear_costs: Vec<f64>,
    pub quadratic_costs: Vec<f64>,
    pub tax_caps: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenConfig {
    pub seed: u64,
    /// Inclusive range of the country count.
    pub countries: (usize, usize),
    /// Inclusive range of producers per country.
    pub followers: (usize, usize),
    pub capacities: Vec<f64>,
    /// Producer classes from green to high polluting.
    pub classes: Vec<ClassMenu>,
    /// Indices into `classes` that may be drawn.
    pub allowed_classes: Vec<usize>,
    pub demand_intercepts: Vec<f64>,
    pub demand_slopes: Vec<f64>,
    /// The price floor is this fraction of the demand intercept.
    pub price_floor_fractions: Vec<f64>,
    pub paradigms: Vec<TaxParadigm>,
    pub trade: bool,
    pub tax_revenue: bool,
}

fn menu(v: &[f64]) -> Vec<f64> {
    v.to_vec()
}

impl Default for GenConfig {
    /// Two countries with three producers each.
    fn default() -> Self {
        GenConfig {
            seed: 0,
            countries: (2, 2),
            followers: (3, 3),
            capacities: menu(&[50.0, 100.0, 130.0, 170.0, 200.0, 1000.0, 1050.0, 20000.0]),
            classes: vec![
                ClassMenu {
                    emission_costs: menu(&[25.0, 50.0]),
                    linear_costs: menu(&[300.0, 290.0]),
                    quadratic_costs: menu(&[0.6, 0.55]),
                    tax_caps: menu(&[0.0, 50.0]),
                },
                ClassMenu {
                    emission_costs: menu(&[100.0, 200.0]),
                    linear_costs: menu(&[275.0, 250.0]),
                    quadratic_costs: menu(&[0.5, 0.3]),
                    tax_caps: menu(&[100.0, 150.0]),
                },
                ClassMenu {
                    emission_costs: menu(&[300.0, 500.0, 550.0, 600.0]),
                    linear_costs: menu(&[220.0, 200.0, 150.0]),
                    quadratic_costs: menu(&[0.2, 0.1, 0.0]),
                    tax_caps: menu(&[200.0, 250.0, 275.0, 300.0]),
                },
            ],
            allowed_classes: vec![0, 1, 2],
            demand_intercepts: menu(&[275.0, 300.0, 325.0, 350.0, 375.0, 450.0]),
            demand_slopes: menu(&[0.5, 0.6, 0.7, 0.75, 0.8, 0.9]),
            price_floor_fractions: menu(&[0.8, 0.85, 0.9, 0.95]),
            paradigms: vec![TaxParadigm::Standard, TaxParadigm::Single, TaxParadigm::Carbon],
            trade: true,
            tax_revenue: false,
        }
    }
}

/// Draws per country before giving up on finding a feasible one.
const MAX_REDRAWS: usize = 10_000;

impl GenConfig {
    pub fn validate(&self) -> Result<(), InstanceError> {
        let bad = InstanceError::Invalid;
        let (c0, c1) = self.countries;
        let (f0, f1) = self.followers;
        if c0 == 0 || c0 > c1 || f0 == 0 || f0 > f1 {
            return Err(bad("country and follower ranges must be nonempty and start at one"));
        }
        if self.trade && c1 < 2 {
            return Err(bad("trade needs two or more countries"));
        }
        let menus = [&self.capacities, &self.demand_intercepts, &self.demand_slopes, &self.price_floor_fractions];
        if menus.iter().any(|m| m.is_empty()) || self.paradigms.is_empty() || self.allowed_classes.is_empty() {
            return Err(bad("menus must be nonempty"));
        }
        for &k in &self.allowed_classes {
            let c = self.classes.get(k).ok_or(bad("allowed class out of range"))?;
            let m = [&c.emission_costs, &c.linear_costs, &c.quadratic_costs, &c.tax_caps];
            if m.iter().any(|m| m.is_empty()) {
                return Err(bad("class menus must be nonempty"));
            }
        }
        if self.demand_slopes.iter().any(|&b| b <= 0.0) {
            return Err(bad("demand slopes must be positive"));
        }
        if self.price_floor_fractions.iter().any(|&f| !(0.0..1.0).contains(&f)) {
            return Err(bad("price floor fractions must lie in [0, 1)"));
        }
        Ok(())
    }
}

fn draw_producer(cfg: &GenConfig, rng: &mut Lcg) -> ProducerSpec {
    let class = &cfg.classes[*rng.pick(&cfg.allowed_classes)];
    ProducerSpec {
        emission_cost: *rng.pick(&class.emission_costs),
        linear_cost: *rng.pick(&class.linear_costs),
        quadratic_cost: *rng.pick(&class.quadratic_costs),
        capacity: *rng.pick(&cfg.capacities),
        tax_cap: *rng.pick(&class.tax_caps),
    }
}

fn draw_country(cfg: &GenConfig, rng: &mut Lcg) -> CountrySpec {
    let n = cfg.followers.0 + rng.below(cfg.followers.1 - cfg.followers.0 + 1);
    let producers = (0..n).map(|_| draw_producer(cfg, rng)).collect();
    let demand_intercept = *rng.pick(&cfg.demand_intercepts);
    let demand_slope = *rng.pick(&cfg.demand_slopes);
    let fraction = *rng.pick(&cfg.price_floor_fractions);
    CountrySpec {
        producers,
        demand_intercept,
        demand_slope,
        price_floor: fraction * demand_intercept,
        paradigm: *rng.pick(&cfg.paradigms),
        tax_revenue: cfg.tax_revenue,
    }
}

/// A country can meet its price floor without trading. Otherwise its region
/// would be empty whenever trade is switched off.
pub fn feasible_in_autarky(c: &CountrySpec) -> bool {
    let inst = EnergyInstance { countries: vec![c.clone()], trade: false };
    let Ok(g) = build_nasp(&inst) else { return false };
    let Ok(set) = leader_feasible_set(&g.leaders[0]) else { return false };
    crate::lcp::enumerate_pieces(&set).map(|p| !p.is_empty()).unwrap_or(false)
}

/// Deterministic in the whole configuration, seed included. Countries that
/// cannot meet their price floor on their own are redrawn.
pub fn gen_energy(cfg: &GenConfig) -> Result<EnergyInstance, InstanceError> {
    cfg.validate()?;
    let mut rng = Lcg::new(cfg.seed);
    let k = cfg.countries.0 + rng.below(cfg.countries.1 - cfg.countries.0 + 1);
    let k = if cfg.trade { k.max(2) } else { k };
    let mut countries = Vec::with_capacity(k);
    for _ in 0..k {
        let mut sub = rng.split();
        let c = (0..MAX_REDRAWS)
            .map(|_| draw_country(cfg, &mut sub))
            .find(feasible_in_autarky)
            .ok_or(InstanceError::Invalid("no country meeting its price floor could be drawn"))?;
        countries.push(c);
    }
    Ok(EnergyInstance { countries, trade: cfg.trade })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_instance() {
        let cfg = GenConfig { seed: 42, ..GenConfig::default() };
        assert_eq!(gen_energy(&cfg).unwrap(), gen_energy(&cfg).unwrap());
        let other = GenConfig { seed: 43, ..GenConfig::default() };
        assert_ne!(gen_energy(&cfg).unwrap(), gen_energy(&other).unwrap());
    }

    #[test]
    fn green_only_draws_green_emission_costs() {
        for seed in 0..20 {
            let cfg = GenConfig { seed, allowed_classes: vec![0], ..GenConfig::default() };
            let inst = gen_energy(&cfg).unwrap();
            for c in &inst.countries {
                for p in &c.producers {
                    assert!(p.emission_cost == 25.0 || p.emission_cost == 50.0);
                }
            }
        }
    }

    #[test]
    fn insights_shape() {
        let inst = gen_energy(&GenConfig { seed: 7, ..GenConfig::default() }).unwrap();
        assert_eq!(inst.countries.len(), 2);
        assert!(inst.countries.iter().all(|c| c.producers.len() == 3));
        for c in &inst.countries {
            assert!(c.price_floor < c.demand_intercept);
            assert!(feasible_in_autarky(c));
        }
    }

    #[test]
    fn classes_stay_aligned() {
        let cfg = GenConfig { seed: 3, countries: (2, 4), followers: (1, 3), ..GenConfig::default() };
        let inst = gen_energy(&cfg).unwrap();
        for p in inst.countries.iter().flat_map(|c| &c.producers) {
            let class = cfg.classes.iter().position(|m| m.emission_costs.contains(&p.emission_cost)).unwrap();
            let m = &cfg.classes[class];
            assert!(m.linear_costs.contains(&p.linear_cost));
            assert!(m.quadratic_costs.contains(&p.quadratic_cost));
            assert!(m.tax_caps.contains(&p.tax_cap));
        }
    }

    #[test]
    fn bad_configs_are_rejected() {
        let mut cfg = GenConfig { countries: (1, 1), ..GenConfig::default() };
        assert!(gen_energy(&cfg).is_err());
        cfg.trade = false;
        assert!(gen_energy(&cfg).is_ok());
        cfg.demand_slopes.clear();
        assert!(gen_energy(&cfg).is_err());
    }
}
