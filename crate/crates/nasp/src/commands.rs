use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use clap::ValueEnum;
use nasp_core::energy::{report as energy_report, TaxParadigm};
use nasp_core::instances::energy::{gen_energy, GenConfig};
use nasp_core::instances::games::{latin_greek, matching_pennies, random_trivial, unbounded_pursuit};
use nasp_core::instances::hardness::{gen_mne_hardness, gen_pne_hardness, SubsetSumInterval};
use nasp_core::nasp::{
    deviation_check, full_enumeration, inner_approximation, leader_feasible_set, pure_enumeration, DeviationReport,
    ExtensionStrategy, MixedProfile, Nasp, SolveOptions,
};
use nasp_core::rng::Lcg;
use serde::Serialize;

use crate::formats::{emit, read_json, to_json, InstanceFile, ResultFile};
use crate::{
    exit, status_code, Algorithm, CliError, Family, GenerateArgs, Paradigm, ProducerClass, ReportArgs, SolveArgs,
    Strategy, ValidateArgs,
};

/// `n` or `lo..hi`, both inclusive.
fn parse_range(s: &str) -> Result<(usize, usize), CliError> {
    let bad = || CliError::Input(format!("expected a count or a range lo..hi, got {s:?}"));
    let num = |t: &str| t.trim().parse::<usize>().map_err(|_| bad());
    match s.split_once("..") {
        Some((a, b)) => Ok((num(a)?, num(b.trim_start_matches('='))?)),
        None => num(s).map(|n| (n, n)),
    }
}

fn energy_config(a: &GenerateArgs) -> Result<GenConfig, CliError> {
    let mut cfg = GenConfig {
        seed: a.seed,
        countries: parse_range(&a.countries)?,
        followers: parse_range(&a.followers)?,
        trade: !a.no_trade,
        tax_revenue: a.tax_revenue,
        ..GenConfig::default()
    };
    if !a.paradigm.is_empty() {
        cfg.paradigms = a
            .paradigm
            .iter()
            .map(|p| match p {
                Paradigm::Standard => TaxParadigm::Standard,
                Paradigm::Single => TaxParadigm::Single,
                Paradigm::Carbon => TaxParadigm::Carbon,
            })
            .collect();
    }
    if !a.classes.is_empty() {
        cfg.allowed_classes = a
            .classes
            .iter()
            .map(|c| match c {
                ProducerClass::Green => 0,
                ProducerClass::Average => 1,
                ProducerClass::High => 2,
            })
            .collect();
    }
    Ok(cfg)
}

pub fn generate(a: &GenerateArgs) -> Result<i32, CliError> {
    let input = |e: nasp_core::instances::InstanceError| CliError::Input(e.to_string());
    let named = |name: &str, game: Nasp| InstanceFile::Nasp { name: Some(name.into()), game };
    let subset_sum = || SubsetSumInterval { q: a.q.clone(), p: a.p, t: a.t, r: a.r };
    let mut rng = Lcg::new(a.seed);
    let file = match a.family {
        Family::Energy => {
            let cfg = energy_config(a)?;
            InstanceFile::Energy { instance: gen_energy(&cfg).map_err(input)?, config: Some(cfg) }
        }
        Family::LatinGreek => named("latin-greek", latin_greek(false)),
        Family::LatinGreekFlipped => named("latin-greek-flipped", latin_greek(true)),
        Family::MatchingPennies => named("matching-pennies", matching_pennies()),
        Family::UnboundedPursuit => named("unbounded-pursuit", unbounded_pursuit(&mut rng)),
        Family::RandomTrivial => named("random-trivial", random_trivial(&mut rng)),
        Family::PneHardness => named("pne-hardness", gen_pne_hardness(&subset_sum()).map_err(input)?),
        Family::MneHardness => named("mne-hardness", gen_mne_hardness(&subset_sum()).map_err(input)?),
    };
    emit(a.out.as_deref(), &to_json(&file))?;
    Ok(exit::EQUILIBRIUM)
}

fn solve_one(a: &SolveArgs, path: &Path) -> Result<(ResultFile, i32), CliError> {
    if !(a.timelimit > 0.0 && a.timelimit.is_finite()) {
        return Err(CliError::Input("the time limit must be positive".into()));
    }
    if a.k == 0 {
        return Err(CliError::Input("k must be at least 1".into()));
    }
    let file: InstanceFile = read_json(path)?;
    let g = file.game()?;
    let start = Instant::now();
    let deadline = start + Duration::from_secs_f64(a.timelimit);
    let budget = move || Instant::now() >= deadline;
    let mut opts = SolveOptions { budget: &budget, select: a.select, ..SolveOptions::default() };
    if let Some(t) = a.deviation_tol {
        opts.deviation_tol = t;
    }
    let strategy = match a.strategy {
        Strategy::Seq => ExtensionStrategy::Sequential,
        Strategy::Rseq => ExtensionStrategy::ReverseSequential,
        Strategy::Rand => ExtensionStrategy::Random { seed: a.seed },
    };
    let report = match a.algorithm {
        Algorithm::Full => full_enumeration(&g, &opts)?,
        Algorithm::Pure => pure_enumeration(&g, &opts)?,
        Algorithm::Inner => inner_approximation(&g, strategy, a.k, &opts)?,
    };
    let mut out = ResultFile::new(&g, &report);
    if a.algorithm == Algorithm::Inner {
        out.strategy = Some(a.strategy.to_possible_value().expect("named").get_name().to_string());
        out.k = Some(a.k);
        out.seed = (a.strategy == Strategy::Rand).then_some(a.seed);
    }
    if a.timing {
        out.wall_time = Some(start.elapsed().as_secs_f64());
    }
    Ok((out, status_code(report.status)))
}

fn batch_target(a: &SolveArgs, input: &Path) -> PathBuf {
    let stem = input.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "instance".into());
    let name = format!("{stem}.result.json");
    match &a.out {
        Some(dir) => dir.join(name),
        None => input.with_file_name(name),
    }
}

pub fn solve(a: &SolveArgs) -> Result<i32, CliError> {
    if let [single] = a.input.as_slice() {
        let (r, code) = solve_one(a, single)?;
        emit(a.out.as_deref(), &to_json(&r))?;
        return Ok(code);
    }
    if let Some(dir) = &a.out {
        std::fs::create_dir_all(dir).map_err(|e| CliError::Input(format!("{}: {e}", dir.display())))?;
    }
    // each worker takes the next file; the batch reports its worst outcome
    let next = AtomicUsize::new(0);
    let worst = Mutex::new(exit::EQUILIBRIUM);
    std::thread::scope(|s| {
        for _ in 0..a.jobs.clamp(1, a.input.len()) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(path) = a.input.get(i) else { break };
                let code = match solve_one(a, path).and_then(|(r, c)| emit(Some(&batch_target(a, path)), &to_json(&r)).map(|_| c)) {
                    Ok(c) => c,
                    Err(e) => {
                        eprintln!("error: {}: {e}", path.display());
                        e.code()
                    }
                };
                let mut w = worst.lock().expect("no panics while held");
                *w = (*w).max(code);
            });
        }
    });
    Ok(worst.into_inner().expect("workers joined"))
}

/// Shape checks a result must pass before any game-theoretic question.
fn check_profile(g: &Nasp, p: &MixedProfile) -> Result<(), CliError> {
    let bad = |m: String| Err(CliError::Input(m));
    let dims = g.full_dims()?;
    if p.leaders.len() != dims.len() {
        return bad(format!("result has {} leaders, the instance {}", p.leaders.len(), dims.len()));
    }
    let prices = g.clearing.as_ref().map_or(0, |c| c.rhs.len());
    if p.prices.len() != prices || p.prices.iter().any(|v| !v.is_finite()) {
        return bad(format!("expected {prices} finite prices"));
    }
    for (i, (s, &d)) in p.leaders.iter().zip(&dims).enumerate() {
        if s.support.is_empty() {
            return bad(format!("leader {i} has an empty support"));
        }
        let mut total = 0.0;
        for sp in &s.support {
            if sp.point.len() != d || sp.point.iter().any(|v| !v.is_finite()) {
                return bad(format!("leader {i}: support points must have {d} finite entries"));
            }
            if !(sp.probability >= 0.0 && sp.probability.is_finite()) {
                return bad(format!("leader {i}: probabilities must be nonnegative"));
            }
            total += sp.probability;
        }
        if (total - 1.0).abs() > 1e-9 {
            return bad(format!("leader {i}: probabilities sum to {total}"));
        }
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct Validation {
    equilibrium: bool,
    /// `(leader, support index)` of points outside their leader's region.
    outside: Vec<(usize, usize)>,
    deviations: DeviationReport,
}

pub fn validate(a: &ValidateArgs) -> Result<i32, CliError> {
    let file: InstanceFile = read_json(&a.input)?;
    let result: ResultFile = read_json(&a.result)?;
    let g = file.game()?;
    let Some(profile) = result.profile() else {
        if result.status.has_equilibrium() {
            return Err(CliError::Input("result claims an equilibrium but carries no profile".into()));
        }
        eprintln!("result has no profile to validate");
        return Ok(status_code(result.status));
    };
    check_profile(&g, &profile)?;
    let mut outside = Vec::new();
    for (i, (l, s)) in g.leaders.iter().zip(&profile.leaders).enumerate() {
        let set = leader_feasible_set(l)?;
        for (j, sp) in s.support.iter().enumerate() {
            if !set.contains(&sp.point, a.tol) {
                outside.push((i, j));
            }
        }
    }
    let deadline = Instant::now() + Duration::from_secs_f64(a.timelimit.max(0.0));
    let budget = move || Instant::now() >= deadline;
    let deviations = deviation_check(&g, &profile, a.tol, &budget)?;
    if deviations.timed_out {
        eprintln!("time limit reached before every best response was computed");
        return Ok(exit::TIME_LIMIT);
    }
    let v = Validation { equilibrium: outside.is_empty() && deviations.is_equilibrium(), outside, deviations };
    emit(None, &to_json(&v))?;
    Ok(if v.equilibrium { exit::EQUILIBRIUM } else { exit::NOT_AN_EQUILIBRIUM })
}

#[derive(Debug, Serialize)]
struct CsvRow {
    country: usize,
    production: f64,
    price: f64,
    imports: f64,
    exports: f64,
    mean_tax: f64,
    carbon_tax: Option<f64>,
    emission: f64,
}

pub fn report(a: &ReportArgs) -> Result<i32, CliError> {
    let file: InstanceFile = read_json(&a.input)?;
    let result: ResultFile = read_json(&a.result)?;
    let inst = file.energy().ok_or_else(|| CliError::Input("reports need an energy instance".into()))?;
    let Some(profile) = result.profile() else {
        eprintln!("result has no profile to report on");
        return Ok(status_code(result.status));
    };
    check_profile(&file.game()?, &profile)?;
    let rep = energy_report(inst, &profile).map_err(|e| CliError::Input(e.to_string()))?;
    emit(a.out.as_deref(), &to_json(&rep))?;
    if let Some(path) = &a.csv {
        let io = |e: csv::Error| CliError::Input(format!("{}: {e}", path.display()));
        let mut w = csv::Writer::from_path(path).map_err(io)?;
        for (i, c) in rep.countries.iter().enumerate() {
            let taxes = c.taxes.len().max(1) as f64;
            w.serialize(CsvRow {
                country: i,
                production: c.production.iter().sum(),
                price: c.price,
                imports: c.imports,
                exports: c.exports,
                mean_tax: c.taxes.iter().sum::<f64>() / taxes,
                carbon_tax: c.carbon_tax,
                emission: c.emission,
            })
            .map_err(io)?;
        }
        w.flush().map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    }
    Ok(exit::EQUILIBRIUM)
}
