//! One simulation run: every epoch rebuilds the scenario from the radio trace
//! and allocates it under GREET, the two benchmarks and (every k-th epoch) the
//! social optimum.

use serde::{Deserialize, Serialize};

use crate::allocation::{gps_allocate, greet_allocate, scpf_allocate, split_with_requirements, BidState, SliceAllocation};
use crate::error::{Error, ExperimentError};
use crate::experiments::benchmark::{map_benchmark_shares, BenchmarkShares};
use crate::experiments::setup::{prepare, Family, Prepared, ServiceClass};
use crate::experiments::sweep::SweepConfig;
use crate::game::{default_initial_weights, greet_dynamics, meets, served_utility, social_optimal_exact, DynamicsOptions, Mode};
use crate::model::{Grid, ScenarioSpec, SliceProfile, Utility, ValidatedScenario};
use crate::policy::DivergencePolicy;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Scheme {
    Greet,
    Reservation,
    ShareBased,
    SocialOptimal,
}

impl Scheme {
    pub const ALL: [Scheme; 4] = [Scheme::Greet, Scheme::Reservation, Scheme::ShareBased, Scheme::SocialOptimal];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::Greet => "greet",
            Scheme::Reservation => "reservation",
            Scheme::ShareBased => "share-based",
            Scheme::SocialOptimal => "social-optimal",
        }
    }
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunOptions {
    /// Round cap for GREET dynamics; the last iterate is used when it is hit.
    pub greet_rounds: usize,
    pub greet_tol: f64,
    /// The social optimum is computed on epochs `0, k, 2k, …`.
    pub so_every: usize,
    pub alpha: f64,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            greet_rounds: 7,
            greet_tol: 1e-8,
            so_every: 10,
            alpha: 1.0,
        }
    }
}

/// Per-scheme accumulators of one run.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct SchemeMetrics {
    /// User-epochs with `γ_u > 0` that were evaluated.
    pub demand: usize,
    pub outages: usize,
    /// Sum over evaluated epochs of the utility on the common satisfied set.
    pub utility_sum: f64,
    pub epochs: usize,
}

impl SchemeMetrics {
    pub fn p_outage(&self) -> f64 {
        if self.demand == 0 {
            0.0
        } else {
            self.outages as f64 / self.demand as f64
        }
    }

    pub fn utility(&self) -> f64 {
        if self.epochs == 0 {
            f64::NAN
        } else {
            self.utility_sum / self.epochs as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub elastic_total: f64,
    pub epochs: usize,
    /// Indexed like [`Scheme::ALL`]. Social-optimum utility uses the set of
    /// users satisfied under all four schemes on its sample epochs.
    pub schemes: Vec<SchemeMetrics>,
    /// GREET utility on the social-optimum sample epochs and the same user set.
    pub greet_on_so_epochs: SchemeMetrics,
    pub greet_converged: usize,
    pub greet_rounds: usize,
    /// User-epochs with `c_u = 0`; these users sit out the epoch.
    pub coverage_outages: usize,
    pub user_epochs: usize,
}

impl RunReport {
    pub fn scheme(&self, s: Scheme) -> &SchemeMetrics {
        &self.schemes[Scheme::ALL.iter().position(|&x| x == s).expect("listed scheme")]
    }

    pub fn converged_frac(&self) -> f64 {
        self.greet_converged as f64 / self.epochs.max(1) as f64
    }

    pub fn rounds_mean(&self) -> f64 {
        self.greet_rounds as f64 / self.epochs.max(1) as f64
    }

    /// `(U_so − U_greet) / |U_so|` on the sample epochs.
    pub fn social_gap(&self) -> f64 {
        let so = self.scheme(Scheme::SocialOptimal).utility();
        (so - self.greet_on_so_epochs.utility()) / so.abs()
    }
}

/// GREET shares for one elastic total: guarantees from the dimensioning,
/// elastic excess split evenly among the elastic slices.
pub fn greet_shares(prep: &Prepared, elastic_total: f64) -> (Grid<f64>, Vec<f64>) {
    let n_e = prep.slices.iter().filter(|s| s.class == ServiceClass::Elastic).count();
    let excess = prep
        .slices
        .iter()
        .map(|s| {
            if s.class == ServiceClass::Elastic {
                elastic_total / n_e as f64
            } else {
                0.0
            }
        })
        .collect();
    (prep.guaranteed.clone(), excess)
}

struct EpochScenario {
    sc: ValidatedScenario,
    /// Global user id of every scenario user.
    global: Vec<usize>,
}

fn epoch_scenario(prep: &Prepared, e: usize, guaranteed: &Grid<f64>, excess: &[f64], alpha: f64) -> Result<EpochScenario, Error> {
    let n_b = prep.trace.num_sectors;
    let mut spec = ScenarioSpec::new(n_b);
    let mut global = Vec::new();
    for (v, s) in prep.slices.iter().enumerate() {
        spec.add_slice(SliceProfile::new(s.id.clone(), guaranteed.row(v).to_vec(), excess[v], alpha));
        let present: Vec<usize> = (prep.offsets[v]..prep.offsets[v] + s.users)
            .filter(|&u| prep.trace.capacity[e][u] > 0.0)
            .collect();
        let phi = if s.inelastic || present.is_empty() { 0.0 } else { 1.0 / present.len() as f64 };
        for u in present {
            spec.add_user(v, prep.trace.sector[e][u], prep.trace.capacity[e][u], s.min_rate, phi);
            global.push(u);
        }
    }
    Ok(EpochScenario {
        sc: spec.validate()?,
        global,
    })
}

fn epoch_error(epoch: usize, scheme: Scheme, e: impl Into<Error>) -> Error {
    ExperimentError::Epoch {
        epoch,
        scheme: scheme.name().into(),
        source: Box::new(e.into()),
    }
    .into()
}

/// Station-wise equal split among the active slices where their reserved
/// shares are all zero (GPS is undefined there).
fn reservation(sc: &ValidatedScenario, bench: &BenchmarkShares) -> Result<SliceAllocation, Error> {
    let (n_v, n_b) = (sc.num_slices(), sc.num_stations());
    let mut active = Grid::filled(n_v, n_b, false);
    let mut reserved = bench.reserved.clone();
    for b in 0..n_b {
        for v in 0..n_v {
            active.set(v, b, sc.is_active(v, b));
        }
        let total: f64 = (0..n_v).filter(|&v| active.get(v, b)).map(|v| reserved.get(v, b)).sum();
        if total <= 0.0 {
            for v in 0..n_v {
                reserved.set(v, b, 1.0);
            }
        }
    }
    Ok(gps_allocate(&active, &reserved)?)
}

/// Share-based benchmark: equal weights within a slice, proportional at stations.
fn share_based_rates(sc: &ValidatedScenario, bench: &BenchmarkShares) -> Vec<f64> {
    let alloc = scpf_allocate(&bench.overall, sc.census());
    (0..sc.num_users())
        .map(|u| {
            let r = sc.user(u);
            let n = sc.census().get(r.slice, r.bs);
            alloc.slices.fractions.get(r.slice, r.bs) / n as f64 * r.capacity
        })
        .collect()
}

/// Utility of each scheme on the users with finite utility under all of them.
fn common_utility(sc: &ValidatedScenario, rates: &[&[f64]]) -> Vec<f64> {
    let mut out = vec![0.0; rates.len()];
    for u in 0..sc.num_users() {
        let weight = sc.overall_share(sc.user(u).slice);
        let us: Vec<Utility> = rates.iter().map(|r| served_utility(sc, u, r[u])).collect();
        if us.iter().all(|x| x.is_finite()) {
            for (o, x) in out.iter_mut().zip(&us) {
                *o += weight * x.to_f64();
            }
        }
    }
    out
}

fn count_outages(sc: &ValidatedScenario, rates: &[f64], m: &mut SchemeMetrics) {
    for u in 0..sc.num_users() {
        let g = sc.user(u).min_rate;
        if g > 0.0 {
            m.demand += 1;
            if !meets(rates[u], g) {
                m.outages += 1;
            }
        }
    }
}

pub fn run_prepared(prep: &Prepared, elastic_total: f64, opts: &RunOptions) -> Result<RunReport, Error> {
    if opts.so_every == 0 || opts.greet_rounds == 0 {
        return Err(ExperimentError::Setup("so_every and greet_rounds must be positive".into()).into());
    }
    let (guaranteed, excess) = greet_shares(prep, elastic_total);
    let elastic: Vec<bool> = prep.slices.iter().map(|s| s.class == ServiceClass::Elastic).collect();
    let bench = map_benchmark_shares(&guaranteed, &excess, &elastic)?;
    let epochs = prep.trace.num_epochs();
    let mut report = RunReport {
        elastic_total,
        epochs,
        schemes: vec![SchemeMetrics::default(); Scheme::ALL.len()],
        greet_on_so_epochs: SchemeMetrics::default(),
        greet_converged: 0,
        greet_rounds: 0,
        coverage_outages: 0,
        user_epochs: 0,
    };
    let mut warm: Vec<Option<f64>> = vec![None; prep.num_users()];
    for e in 0..epochs {
        let EpochScenario { sc, global } = epoch_scenario(prep, e, &guaranteed, &excess, opts.alpha)?;
        report.user_epochs += prep.num_users();
        report.coverage_outages += prep.num_users() - sc.num_users();

        // GREET, warm-started from the previous epoch's weights.
        let defaults = default_initial_weights(&sc);
        let initial: Vec<f64> = global.iter().zip(&defaults).map(|(&g, &d)| warm[g].unwrap_or(d)).collect();
        let dyn_opts = DynamicsOptions {
            mode: Mode::RoundRobin,
            max_rounds: opts.greet_rounds,
            tol: opts.greet_tol,
            initial: Some(initial),
            schedule: None,
            divergence: DivergencePolicy::Drop,
        };
        let trace = greet_dynamics(&sc, &dyn_opts).map_err(|x| epoch_error(e, Scheme::Greet, x))?;
        report.greet_converged += trace.converged as usize;
        report.greet_rounds += trace.rounds();
        let bids: BidState = trace.final_state().clone();
        for (&g, &w) in global.iter().zip(bids.weights()) {
            warm[g] = Some(w);
        }
        let greet_alloc = greet_allocate(&sc, &bids).map_err(|x| epoch_error(e, Scheme::Greet, x))?;
        let greet = split_with_requirements(&sc, &greet_alloc).rates;

        let res_alloc = reservation(&sc, &bench).map_err(|x| epoch_error(e, Scheme::Reservation, x))?;
        let res = split_with_requirements(&sc, &res_alloc).rates;
        let share = share_based_rates(&sc, &bench);

        let triple = [&greet[..], &res[..], &share[..]];
        let utils = common_utility(&sc, &triple);
        for (k, rates) in triple.iter().enumerate() {
            count_outages(&sc, rates, &mut report.schemes[k]);
            report.schemes[k].utility_sum += utils[k];
            report.schemes[k].epochs += 1;
        }

        if e % opts.so_every == 0 {
            let so = social_optimal_exact(&sc).map_err(|x| epoch_error(e, Scheme::SocialOptimal, x))?;
            let all = [&greet[..], &res[..], &share[..], &so.rates[..]];
            let utils = common_utility(&sc, &all);
            let m = &mut report.schemes[3];
            count_outages(&sc, &so.rates, m);
            m.utility_sum += utils[3];
            m.epochs += 1;
            let g = &mut report.greet_on_so_epochs;
            count_outages(&sc, &greet, g);
            g.utility_sum += utils[0];
            g.epochs += 1;
        }
    }
    Ok(report)
}

/// Prepares one (family, seed) under `cfg` and runs a single elastic total.
pub fn run_experiment(family: Family, cfg: &SweepConfig, elastic_total: f64, seed: u64) -> Result<RunReport, Error> {
    cfg.validate()?;
    let prep = prepare(
        family,
        family.slices(cfg.users_per_slice, cfg.min_rate_mbps * 1e6),
        &cfg.radio,
        cfg.epochs,
        cfg.p_max,
        cfg.dimension_draws,
        seed,
    )?;
    run_prepared(&prep, elastic_total, &cfg.run)
}
