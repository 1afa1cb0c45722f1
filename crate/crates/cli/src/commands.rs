//! Subcommand implementations.

use std::fmt::Display;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use greet_core::config::{load_scenario, load_sweep, ScenarioConfig};
use greet_core::experiments::{prepare, run_sweep, Family, ServiceClass, SweepConfig};
use greet_core::game::{
    brd_run, default_initial_weights, greet_dynamics, social_optimal, social_optimal_exact, AsyncSchedule,
    BrOptions, BrdOptions, DynamicsOptions, Mode, SoOptions, StartStatus,
};
use greet_core::{
    check_well_dimensioned, greet_allocate, split_to_users, BidState, ConfigError, DivergencePolicy,
    ValidatedScenario,
};
use serde_json::json;

use crate::{Command, DimensionArgs, DivergenceArg, DynamicsArgs, ModeArg, RuleArg, SolveSoArgs, SweepArgs};

const MBPS: f64 = 1e6;

/// A failed command: exit code plus the message printed on stderr.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    fn domain(e: impl Display) -> Self {
        Failure { code: 1, message: e.to_string() }
    }

    fn usage(message: impl Into<String>) -> Self {
        Failure { code: 2, message: message.into() }
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure {
            code: if e.is_parse() { 2 } else { 1 },
            message: e.to_string(),
        }
    }
}

macro_rules! domain_errors {
    ($($t:ty),*) => {$(
        impl From<$t> for Failure {
            fn from(e: $t) -> Self { Failure::domain(e) }
        }
    )*};
}

domain_errors!(
    greet_core::Error,
    greet_core::GameError,
    greet_core::AllocationError,
    greet_core::ExperimentError,
    greet_core::RadioError,
    io::Error,
    csv::Error
);

type Outcome = Result<(), Failure>;

pub fn run(command: Command, out_dir: Option<PathBuf>) -> Outcome {
    let out = Output { dir: out_dir };
    match command {
        Command::Validate { config } => validate(&config),
        Command::Allocate { config, delta } => allocate(&config, delta, &out),
        Command::Dynamics(a) => dynamics(a, &out),
        Command::SolveSo(a) => solve_so(a, &out),
        Command::Dimension(a) => dimension(a, &out),
        Command::Sweep(a) => sweep(a, &out),
    }
}

/// Where CSVs go: files in `dir`, or stdout. Summaries go to stdout when the
/// data went to files and to stderr otherwise.
struct Output {
    dir: Option<PathBuf>,
}

impl Output {
    fn file(dir: &Path, name: &str) -> Result<Box<dyn Write>, Failure> {
        std::fs::create_dir_all(dir)?;
        let path = dir.join(name);
        log::info!("writing {}", path.display());
        Ok(Box::new(BufWriter::new(File::create(path)?)))
    }

    /// The primary CSV of a command.
    fn primary(&self, name: &str) -> Result<Box<dyn Write>, Failure> {
        match &self.dir {
            Some(d) => Self::file(d, name),
            None => Ok(Box::new(io::stdout().lock())),
        }
    }

    /// A secondary artifact, written only when an output directory is set.
    fn extra(&self, name: &str) -> Result<Option<Box<dyn Write>>, Failure> {
        self.dir.as_deref().map(|d| Self::file(d, name)).transpose()
    }

    fn note(&self, text: &str) {
        if self.dir.is_some() {
            println!("{text}");
        } else {
            eprintln!("{text}");
        }
    }
}

fn load(path: &Path, delta: Option<f64>) -> Result<(ValidatedScenario, Option<Vec<f64>>), Failure> {
    let mut loaded = load_scenario(path)?;
    if let Some(d) = delta {
        loaded.spec.weight_floor = d;
    }
    let sc = loaded.spec.validate().map_err(ConfigError::from)?;
    if let Some(w) = &loaded.weights {
        if let Some(bad) = w.iter().find(|x| !(x.is_finite() && **x >= 0.0)) {
            return Err(Failure::domain(format!("invalid user weight {bad}")));
        }
    }
    Ok((sc, loaded.weights))
}

fn slice_ids(sc: &ValidatedScenario) -> Vec<String> {
    sc.spec().slices.iter().map(|s| s.id.clone()).collect()
}

fn validate(path: &Path) -> Outcome {
    let cfg = ScenarioConfig::from_path(path)?;
    let validated = match cfg.to_spec() {
        Ok(loaded) => loaded.spec.validate().map_err(ConfigError::from),
        Err(e) => Err(e),
    };
    let report = match &validated {
        Ok(sc) => {
            let wd = check_well_dimensioned(sc);
            let bs = &sc.spec().base_stations;
            let slack: Vec<_> = (0..sc.num_slices())
                .flat_map(|v| (0..sc.num_stations()).map(move |b| (v, b)))
                .map(|(v, b)| {
                    json!({
                        "slice": sc.slice(v).id,
                        "bs": bs[b],
                        "share": sc.share(v, b),
                        "requirement": sc.requirement(v, b),
                        "slack": wd.slack.get(v, b),
                    })
                })
                .collect();
            json!({
                "valid": true,
                "issues": [],
                "slices": sc.num_slices(),
                "base_stations": sc.num_stations(),
                "users": sc.num_users(),
                "well_dimensioned": wd.ok,
                "dimensioning": slack,
            })
        }
        Err(ConfigError::Invalid(errs)) => json!({
            "valid": false,
            "issues": errs.0.iter().map(ToString::to_string).collect::<Vec<_>>(),
        }),
        Err(_) => return Err(validated.unwrap_err().into()),
    };
    println!("{}", serde_json::to_string_pretty(&report).expect("report is plain JSON"));
    match validated {
        Ok(_) => Ok(()),
        Err(e) => Err(e.into()),
    }
}

fn allocate(path: &Path, delta: Option<f64>, out: &Output) -> Outcome {
    let (sc, weights) = load(path, delta)?;
    let weights = weights.unwrap_or_else(|| {
        log::warn!("not every user has a weight; bidding the priority split of each budget");
        default_initial_weights(&sc)
    });
    let bids = BidState::new(&sc, weights);
    let slices = greet_allocate(&sc, &bids)?;
    let users = split_to_users(&sc, &bids, &slices)?;
    let ids = slice_ids(&sc);
    let bs = &sc.spec().base_stations;
    let mut w = csv::Writer::from_writer(out.primary("allocation.csv")?);
    w.write_record(["record", "slice", "bs", "user", "bid", "fraction", "rate_mbps"])?;
    for v in 0..sc.num_slices() {
        for b in 0..sc.num_stations() {
            w.write_record([
                "slice",
                &ids[v],
                &bs[b],
                "",
                &bids.local_bid(v, b).to_string(),
                &slices.fractions.get(v, b).to_string(),
                "",
            ])?;
        }
    }
    for u in 0..sc.num_users() {
        let r = sc.user(u);
        w.write_record([
            "user",
            &ids[r.slice],
            &bs[r.bs],
            &r.id,
            &bids.weights()[u].to_string(),
            &users.fractions[u].to_string(),
            &(users.rates[u] / MBPS).to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn dynamics(a: DynamicsArgs, out: &Output) -> Outcome {
    let (sc, initial) = load(&a.config, a.delta)?;
    let trace = match a.rule {
        RuleArg::Greet => {
            let mode = match a.mode {
                ModeArg::Rr => Mode::RoundRobin,
                ModeArg::Sim => Mode::Simultaneous,
                ModeArg::Async => Mode::Asynchronous,
            };
            let schedule = match a.mode {
                ModeArg::Async => Some(AsyncSchedule::generate(
                    sc.num_slices(),
                    a.rounds,
                    a.window.unwrap_or(sc.num_slices()),
                    a.staleness,
                    a.seed,
                )?),
                _ => None,
            };
            let divergence = match a.divergence {
                DivergenceArg::Fail => DivergencePolicy::Fail,
                DivergenceArg::Drop => DivergencePolicy::Drop,
            };
            let opts = DynamicsOptions {
                mode,
                max_rounds: a.rounds,
                tol: a.tol,
                initial,
                schedule,
                divergence,
            };
            greet_dynamics(&sc, &opts)?
        }
        RuleArg::BestResponse => {
            if a.mode != ModeArg::Rr {
                return Err(Failure::usage("best-response dynamics are sequential; use --mode rr"));
            }
            let order: Vec<usize> = (0..sc.num_slices()).collect();
            let opts = BrdOptions {
                max_rounds: a.rounds,
                tol: a.tol,
                initial,
                br: BrOptions {
                    floor: sc.weight_floor(),
                    seed: a.seed,
                    ..Default::default()
                },
            };
            brd_run(&sc, &order, &opts)?
        }
    };
    println!("{}", trace.summary());
    if let Some(f) = out.extra("trace.csv")? {
        trace.write_csv(f, &slice_ids(&sc), &sc.spec().base_stations)?;
    }
    Ok(())
}

fn solve_so(a: SolveSoArgs, out: &Output) -> Outcome {
    let (sc, _) = load(&a.config, a.delta)?;
    let so = if a.exact {
        social_optimal_exact(&sc)?
    } else {
        social_optimal(
            &sc,
            &SoOptions {
                floor: sc.weight_floor(),
                starts: a.starts,
                iterations: a.iterations,
                seed: a.seed,
                ..Default::default()
            },
        )?
    };
    let ids = slice_ids(&sc);
    let bs = &sc.spec().base_stations;
    let mut w = csv::Writer::from_writer(out.primary("social_optimum.csv")?);
    w.write_record(["user", "slice", "bs", "weight", "rate_mbps"])?;
    for u in 0..sc.num_users() {
        let r = sc.user(u);
        w.write_record([
            &r.id,
            &ids[r.slice],
            &bs[r.bs],
            &so.weights[u].to_string(),
            &(so.rates[u] / MBPS).to_string(),
        ])?;
    }
    w.flush()?;
    drop(w);
    let converged = so
        .starts
        .iter()
        .filter(|s| matches!(s, StartStatus::Converged { .. }))
        .count();
    let mut note = format!("utility={} residual={:e}", so.utility, so.residual);
    if a.exact {
        note.push_str(" solver=exact");
    } else {
        note.push_str(&format!(
            " solver=multi-start starts_converged={converged}/{} (best found; global optimality not certified)",
            so.starts.len()
        ));
    }
    out.note(&note);
    Ok(())
}

fn sweep_config(path: Option<&Path>) -> Result<SweepConfig, Failure> {
    Ok(match path {
        Some(p) => load_sweep(p)?,
        None => SweepConfig::desk_scale(),
    })
}

fn dimension(a: DimensionArgs, out: &Output) -> Outcome {
    let mut cfg = sweep_config(a.config.as_deref())?;
    if let Some(e) = a.epochs {
        cfg.epochs = e;
    }
    cfg.validate()?;
    let family = Family::from(a.family);
    let prep = prepare(
        family,
        family.slices(cfg.users_per_slice, cfg.min_rate_mbps * MBPS),
        &cfg.radio,
        cfg.epochs,
        cfg.p_max,
        cfg.dimension_draws,
        a.seed,
    )?;
    let mut w = csv::Writer::from_writer(out.primary("shares.csv")?);
    w.write_record(["slice", "bs", "share"])?;
    for (v, s) in prep.slices.iter().enumerate() {
        if s.class != ServiceClass::Guaranteed {
            continue;
        }
        for b in 0..prep.guaranteed.cols() {
            w.write_record([s.id.as_str(), &b.to_string(), &prep.guaranteed.get(v, b).to_string()])?;
        }
    }
    w.flush()?;
    drop(w);
    if let Some(f) = out.extra("trace.csv")? {
        prep.trace.write_csv(f)?;
    }
    out.note(&format!(
        "family={family} seed={} sectors={} users={} epochs={} scaled_stations={:?}",
        a.seed,
        prep.trace.num_sectors,
        prep.num_users(),
        cfg.epochs,
        prep.scaled_stations
    ));
    Ok(())
}

fn sweep(a: SweepArgs, out: &Output) -> Outcome {
    let mut cfg = if a.full_scale {
        SweepConfig::full_scale()
    } else {
        sweep_config(a.config.as_deref())?
    };
    if !a.family.is_empty() {
        cfg.families = a.family.iter().map(|&f| f.into()).collect();
    }
    if a.jobs.is_some() {
        cfg.jobs = a.jobs;
    }
    if let Some(s) = a.seeds {
        cfg.seeds = s;
    }
    if let Some(e) = a.epochs {
        cfg.epochs = e;
    }
    if let Some(g) = a.grid {
        cfg.elastic_share_grid = g;
    }
    let report = run_sweep(&cfg)?;
    let dir = out.dir.clone().unwrap_or_else(|| PathBuf::from("sweep-out"));
    report.write_csv(Output::file(&dir, "sweep.csv")?)?;
    report.write_aggregate_csv(Output::file(&dir, "sweep_aggregate.csv")?)?;
    let summary = report.summary();
    Output::file(&dir, "summary.txt")?.write_all(summary.as_bytes())?;
    print!("{summary}");
    Ok(())
}
