//! Update dynamics: GREET rounds (round-robin, simultaneous, asynchronous) and
//! sequential best-response dynamics, with convergence and cycle detection.

use std::collections::HashMap;

use rand::Rng;
use rand_distr::{Distribution, Exp};

use crate::allocation::{BidState, StationAggregate};
use crate::error::GameError;
use crate::game::best_response::{best_response, BrOptions};
use crate::game::contraction::contraction_report;
use crate::game::trace::{step_norm, DynamicsTrace, Mode};
use crate::model::ValidatedScenario;
use crate::policy::{build_aggregate_view, greet_share_round_with, AggregateView, DivergencePolicy};
use crate::rng::{stream, Purpose};

/// Grid used to hash states for cycle detection.
pub const CYCLE_GRID: f64 = 1e-6;
/// A repeat only counts as a cycle if the state actually moves along it.
const CYCLE_MIN_STEP: f64 = 10.0 * CYCLE_GRID;
/// Relative per-bid change required (besides the step norm) for best-response
/// dynamics to count as converged; keeps geometric decay toward zero from
/// passing as a fixed point. GREET dynamics use the step norm alone: there,
/// decaying bids at stations shared only by minimum-rate users leave the
/// allocation unchanged.
pub const RELATIVE_TOL: f64 = 1e-6;

/// Budget-exhausting start: `w_u = φ_u s^v`; inelastic-only slices split equally.
pub fn default_initial_weights(sc: &ValidatedScenario) -> Vec<f64> {
    let mut w = vec![0.0; sc.num_users()];
    for v in 0..sc.num_slices() {
        let users = sc.users_of(v);
        let budget = sc.overall_share(v);
        let phi = sc.priority_sum(v);
        for &u in users {
            w[u] = if phi > 0.0 {
                sc.user(u).priority / phi * budget
            } else {
                budget / users.len() as f64
            };
        }
    }
    w
}

/// Asynchronous update events satisfying a window bound `W` (every slice
/// updates at least once in any `W` consecutive events) and a staleness bound
/// `D` (views are at most `D` events old).
#[derive(Debug, Clone, PartialEq)]
pub struct AsyncSchedule {
    pub events: Vec<AsyncEvent>,
    pub seed: u64,
    pub window: usize,
    pub max_staleness: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AsyncEvent {
    pub time: f64,
    pub updating: Vec<usize>,
    /// `staleness[v][v']`: age (in events) of the view of `v'` used by `v`.
    pub staleness: Vec<Vec<usize>>,
}

impl AsyncSchedule {
    /// Poisson clocks (unit rate) per slice, forced updates to honour the
    /// window, and uniform random staleness in `[0, min(D, n)]`.
    pub fn generate(
        num_slices: usize,
        num_events: usize,
        window: usize,
        max_staleness: usize,
        seed: u64,
    ) -> Result<Self, GameError> {
        if window < 1 || num_slices == 0 {
            return Err(GameError::InvalidSchedule("window and slice count must be positive".into()));
        }
        let mut rng = stream(seed, 0, 0, Purpose::Schedule);
        let exp = Exp::new(1.0).expect("unit rate");
        let mut next: Vec<f64> = (0..num_slices).map(|_| exp.sample(&mut rng)).collect();
        let mut last = vec![0usize; num_slices];
        let mut events = Vec::with_capacity(num_events);
        for n in 0..num_events {
            let (first, &time) = next
                .iter()
                .enumerate()
                .min_by(|a, b| a.1.total_cmp(b.1))
                .expect("at least one slice");
            next[first] = time + exp.sample(&mut rng);
            let mut updating = vec![first];
            for v in 0..num_slices {
                // Force v if skipping it now would leave a window without it.
                if v != first && n + 1 - last[v] >= window {
                    updating.push(v);
                }
            }
            updating.sort_unstable();
            for &v in &updating {
                last[v] = n + 1;
            }
            let cap = max_staleness.min(n);
            let staleness = (0..num_slices)
                .map(|v| {
                    (0..num_slices)
                        .map(|vp| if vp == v { 0 } else { rng.random_range(0..=cap) })
                        .collect()
                })
                .collect();
            events.push(AsyncEvent {
                time,
                updating,
                staleness,
            });
        }
        let schedule = AsyncSchedule {
            events,
            seed,
            window,
            max_staleness,
        };
        schedule.validate(num_slices)?;
        Ok(schedule)
    }

    pub fn validate(&self, num_slices: usize) -> Result<(), GameError> {
        let mut last = vec![0usize; num_slices];
        for (n, e) in self.events.iter().enumerate() {
            for &v in &e.updating {
                if v >= num_slices {
                    return Err(GameError::InvalidSchedule(format!("event {n} names slice {v}")));
                }
                last[v] = n + 1;
            }
            for (v, &l) in last.iter().enumerate() {
                if n + 1 - l >= self.window {
                    return Err(GameError::InvalidSchedule(format!(
                        "slice {v} idle for {} events (window {})",
                        n + 1 - l,
                        self.window
                    )));
                }
            }
            for row in &e.staleness {
                if row.iter().any(|&a| a > self.max_staleness.min(n)) {
                    return Err(GameError::InvalidSchedule(format!("event {n} exceeds the staleness bound")));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct DynamicsOptions {
    pub mode: Mode,
    pub max_rounds: usize,
    pub tol: f64,
    pub initial: Option<Vec<f64>>,
    pub schedule: Option<AsyncSchedule>,
    pub divergence: DivergencePolicy,
}

impl Default for DynamicsOptions {
    fn default() -> Self {
        DynamicsOptions {
            mode: Mode::RoundRobin,
            max_rounds: 7,
            tol: 1e-8,
            initial: None,
            schedule: None,
            divergence: DivergencePolicy::Fail,
        }
    }
}

fn relative_change(a: &BidState, b: &BidState) -> f64 {
    a.local()
        .as_slice()
        .iter()
        .zip(b.local().as_slice())
        .map(|(&x, &y)| {
            let scale = x.abs().max(y.abs());
            if scale == 0.0 {
                0.0
            } else {
                (x - y).abs() / scale
            }
        })
        .fold(0.0, f64::max)
}

fn quantize(state: &BidState) -> Vec<i64> {
    state.weights().iter().map(|w| (w / CYCLE_GRID).round() as i64).collect()
}

/// Tracks round outcomes and decides when to stop.
struct Monitor {
    trace: DynamicsTrace,
    seen: HashMap<Vec<i64>, usize>,
    tol: f64,
    relative: bool,
}

impl Monitor {
    fn new(sc: &ValidatedScenario, mode: Mode, initial: BidState, tol: f64, relative: bool) -> Self {
        let mut seen = HashMap::new();
        seen.insert(quantize(&initial), 0);
        Monitor {
            trace: DynamicsTrace {
                mode,
                states: vec![initial],
                step_norms: Vec::new(),
                converged: false,
                cycle: None,
                contraction: Some(contraction_report(sc)),
            },
            seen,
            tol,
            relative,
        }
    }

    fn last(&self) -> &BidState {
        self.trace.final_state()
    }

    /// Records a new state; returns true when the run should stop.
    fn push(&mut self, next: BidState) -> bool {
        let prev = self.trace.final_state();
        let step = step_norm(prev, &next);
        let converged = step < self.tol && (!self.relative || relative_change(prev, &next) < RELATIVE_TOL);
        self.trace.step_norms.push(step);
        let n = self.trace.states.len();
        let key = quantize(&next);
        self.trace.states.push(next);
        if converged {
            self.trace.converged = true;
            return true;
        }
        if let Some(&m) = self.seen.get(&key) {
            let period = n - m;
            let moving = self.trace.step_norms[m..].iter().fold(0.0f64, |a, &s| a.max(s));
            if period >= 2 && moving > CYCLE_MIN_STEP {
                self.trace.cycle = Some(period);
                return true;
            }
        }
        self.seen.insert(key, n);
        false
    }
}

fn initial_state(sc: &ValidatedScenario, initial: &Option<Vec<f64>>) -> Result<BidState, GameError> {
    let w = match initial {
        Some(w) if w.len() == sc.num_users() => w.clone(),
        Some(w) => {
            return Err(GameError::InvalidInput(format!(
                "initial state has {} weights, scenario has {} users",
                w.len(),
                sc.num_users()
            )))
        }
        None => default_initial_weights(sc),
    };
    Ok(BidState::new(sc, w))
}

/// Iterates GREET share rounds under the chosen update mode.
pub fn greet_dynamics(sc: &ValidatedScenario, opts: &DynamicsOptions) -> Result<DynamicsTrace, GameError> {
    let init = initial_state(sc, &opts.initial)?;
    let mut mon = Monitor::new(sc, opts.mode, init, opts.tol, false);
    match opts.mode {
        Mode::RoundRobin => {
            for _ in 0..opts.max_rounds {
                let mut state = mon.last().clone();
                for v in 0..sc.num_slices() {
                    let view = build_aggregate_view(sc, &state, v);
                    let w = greet_share_round_with(sc, v, &view, opts.divergence)?;
                    state = state.with_slice_weights(sc, v, &w);
                }
                if mon.push(state) {
                    break;
                }
            }
        }
        Mode::Simultaneous => {
            for _ in 0..opts.max_rounds {
                let snapshot = mon.last().clone();
                let mut weights = snapshot.weights().to_vec();
                for v in 0..sc.num_slices() {
                    let view = build_aggregate_view(sc, &snapshot, v);
                    let w = greet_share_round_with(sc, v, &view, opts.divergence)?;
                    for (&u, &x) in sc.users_of(v).iter().zip(&w) {
                        weights[u] = x;
                    }
                }
                if mon.push(BidState::new(sc, weights)) {
                    break;
                }
            }
        }
        Mode::Asynchronous => {
            let schedule = opts
                .schedule
                .as_ref()
                .ok_or_else(|| GameError::InvalidSchedule("asynchronous mode needs a schedule".into()))?;
            schedule.validate(sc.num_slices())?;
            run_async(sc, opts, schedule, &mut mon)?;
        }
    }
    Ok(mon.trace)
}

fn stale_view(sc: &ValidatedScenario, history: &[BidState], n: usize, v: usize, ages: &[usize]) -> AggregateView {
    let stations = (0..sc.num_stations())
        .map(|b| {
            let bids: Vec<f64> = (0..sc.num_slices())
                .map(|vp| history[n - ages[vp].min(n)].local_bid(vp, b))
                .collect();
            StationAggregate::from_bids(&bids, &sc.shares().column(b), v)
        })
        .collect();
    AggregateView::new(stations)
}

fn run_async(
    sc: &ValidatedScenario,
    opts: &DynamicsOptions,
    schedule: &AsyncSchedule,
    mon: &mut Monitor,
) -> Result<(), GameError> {
    // A state unchanged for W + D events has been seen fresh by every slice.
    let quiet_needed = schedule.window + schedule.max_staleness;
    let mut quiet = 0;
    let limit = opts.max_rounds.min(schedule.events.len());
    for (n, event) in schedule.events.iter().take(limit).enumerate() {
        let history = &mon.trace.states;
        let current = &history[n];
        let mut weights = current.weights().to_vec();
        for &v in &event.updating {
            let view = stale_view(sc, history, n, v, &event.staleness[v]);
            let w = greet_share_round_with(sc, v, &view, opts.divergence)?;
            for (&u, &x) in sc.users_of(v).iter().zip(&w) {
                weights[u] = x;
            }
        }
        let next = BidState::new(sc, weights);
        let step = step_norm(current, &next);
        let still = step < opts.tol;
        quiet = if still { quiet + 1 } else { 0 };
        mon.trace.step_norms.push(step);
        mon.trace.states.push(next);
        if quiet >= quiet_needed {
            mon.trace.converged = true;
            break;
        }
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct BrdOptions {
    pub max_rounds: usize,
    pub tol: f64,
    pub initial: Option<Vec<f64>>,
    pub br: BrOptions,
}

impl Default for BrdOptions {
    fn default() -> Self {
        BrdOptions {
            max_rounds: 50,
            tol: 1e-8,
            initial: None,
            br: BrOptions::default(),
        }
    }
}

/// Sequential best-response dynamics in the given slice order.
pub fn brd_run(sc: &ValidatedScenario, order: &[usize], opts: &BrdOptions) -> Result<DynamicsTrace, GameError> {
    if order.iter().any(|&v| v >= sc.num_slices()) {
        return Err(GameError::InvalidInput("order names an unknown slice".into()));
    }
    let init = initial_state(sc, &opts.initial)?;
    let mut mon = Monitor::new(sc, Mode::RoundRobin, init, opts.tol, true);
    for _ in 0..opts.max_rounds {
        let mut state = mon.last().clone();
        for &v in order {
            let br = best_response(sc, v, &state, &opts.br)?;
            state = state.with_slice_weights(sc, v, &br.weights);
        }
        if mon.push(state) {
            break;
        }
    }
    Ok(mon.trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ScenarioSpec, SliceProfile};

    #[test]
    fn generated_schedules_validate() {
        for seed in 0..20 {
            let s = AsyncSchedule::generate(4, 300, 6, 3, seed).unwrap();
            assert!(s.validate(4).is_ok());
            assert!(s.events.iter().all(|e| !e.updating.is_empty()));
        }
    }

    #[test]
    fn corrupted_schedule_rejected() {
        let mut s = AsyncSchedule::generate(3, 50, 4, 2, 1).unwrap();
        s.events[10].staleness[0][1] = 9;
        assert!(s.validate(3).is_err());
    }

    #[test]
    fn all_elastic_converges_in_one_round() {
        let mut spec = ScenarioSpec::new(2);
        spec.add_slice(SliceProfile::new("a", vec![0.0, 0.0], 1.0, 1.0));
        spec.add_slice(SliceProfile::new("b", vec![0.0, 0.0], 2.0, 1.0));
        spec.add_user(0, 0, 1.0, 0.0, 0.5);
        spec.add_user(0, 1, 1.0, 0.0, 0.5);
        spec.add_user(1, 1, 1.0, 0.0, 1.0);
        let sc = spec.validate().unwrap();
        for mode in [Mode::RoundRobin, Mode::Simultaneous] {
            let t = greet_dynamics(&sc, &DynamicsOptions { mode, ..Default::default() }).unwrap();
            assert!(t.converged);
            assert_eq!(t.rounds(), 1);
        }
    }
}
