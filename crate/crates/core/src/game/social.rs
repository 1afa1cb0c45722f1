//! Social optimum `max_w Σ_v s^v Σ_u U_u(r_u)` under GREET allocation.
//!
//! Two solvers:
//! * [`social_optimal`] — joint projected gradient ascent over all weights from
//!   several seeded starts (the problem is not jointly concave, so the best
//!   converged start is reported without a global-optimality claim);
//! * [`social_optimal_exact`] — per-station water-filling on fractions. Any
//!   fraction profile with `Σ_u x_u ≤ 1` everywhere is realized by weights
//!   `w_u = t x_u` with `t ≤ 1` small enough for every budget (all stations stay
//!   in the proportional regime), so this is the same optimum, computed exactly.

use rand_distr::{Distribution, Gamma};

use crate::allocation::BidState;
use crate::error::GameError;
use crate::game::dynamics::{default_initial_weights, greet_dynamics, DynamicsOptions};
use crate::game::gradient::{evaluate, served_utility, social_objective, weighted_gradient_with};
use crate::game::projection::project_capped_floor;
use crate::model::{user_utility, Utility, UtilityParams, ValidatedScenario};
use crate::policy::{build_aggregate_view, min_weights_with, DivergencePolicy};
use crate::rng::{stream, Purpose};

#[derive(Debug, Clone)]
pub struct SoOptions {
    pub floor: f64,
    pub starts: usize,
    pub iterations: usize,
    pub tol: f64,
    pub seed: u64,
}

impl Default for SoOptions {
    fn default() -> Self {
        SoOptions {
            floor: 1e-6,
            starts: 8,
            iterations: 5000,
            tol: 1e-7,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum StartStatus {
    Converged { residual: f64, utility: f64 },
    NonConverged { residual: f64, utility: f64 },
    Infeasible,
}

#[derive(Debug, Clone)]
pub struct SocialOptimum {
    pub weights: Vec<f64>,
    pub rates: Vec<f64>,
    pub utility: Utility,
    pub residual: f64,
    /// Per-start outcome (empty for the exact solver).
    pub starts: Vec<StartStatus>,
    pub best_start: Option<usize>,
}

fn project(sc: &ValidatedScenario, y: &[f64], floor: f64) -> Vec<f64> {
    let mut out = vec![0.0; y.len()];
    for v in 0..sc.num_slices() {
        let users = sc.users_of(v);
        let yv: Vec<f64> = users.iter().map(|&u| y[u]).collect();
        let lo = vec![floor; users.len()];
        for (&u, x) in users.iter().zip(project_capped_floor(&yv, &lo, sc.overall_share(v))) {
            out[u] = x;
        }
    }
    out
}

/// Barrier-augmented objective. Inelastic users carry `μ log(r_u − γ_u)` so
/// iterates stay strictly inside their rate constraints; as `μ → 0` the
/// optimum approaches the constrained one.
struct Stage<'a> {
    sc: &'a ValidatedScenario,
    coeff: Vec<f64>,
    mu: f64,
}

impl Stage<'_> {
    fn params(&self, u: usize) -> UtilityParams {
        let p = self.sc.params(u);
        if p.priority == 0.0 {
            UtilityParams {
                priority: self.mu,
                min_rate: p.min_rate,
                alpha: 1.0,
            }
        } else {
            p
        }
    }

    fn value(&self, w: &[f64]) -> Option<f64> {
        let e = evaluate(self.sc, &BidState::new(self.sc, w.to_vec())).ok()?;
        let total: Utility = (0..w.len())
            .map(|u| self.coeff[u] * user_utility(e.users.rates[u], &self.params(u)))
            .sum();
        total.value()
    }

    fn gradient(&self, w: &[f64]) -> Option<Vec<f64>> {
        weighted_gradient_with(self.sc, &BidState::new(self.sc, w.to_vec()), &self.coeff, |u| self.params(u))
    }
}

/// Unit-step projected-gradient residual `‖w − P(w + ∇U)‖_∞`.
fn residual(sc: &ValidatedScenario, w: &[f64], g: &[f64], floor: f64) -> f64 {
    let y: Vec<f64> = w.iter().zip(g).map(|(a, b)| a + b).collect();
    project(sc, &y, floor)
        .iter()
        .zip(w)
        .map(|(p, a)| (p - a).abs())
        .fold(0.0, f64::max)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Projected gradient ascent with Barzilai–Borwein steps and Armijo
/// backtracking. Returns (weights, residual).
fn ascend(stage: &Stage, mut w: Vec<f64>, opts: &SoOptions) -> Option<(Vec<f64>, f64)> {
    let sc = stage.sc;
    let mut f = stage.value(&w)?;
    let mut g = stage.gradient(&w)?;
    let mut step = 1.0;
    for _ in 0..opts.iterations {
        if residual(sc, &w, &g, opts.floor) <= opts.tol {
            break;
        }
        let mut t = step;
        let mut accepted = None;
        for _ in 0..80 {
            let y: Vec<f64> = w.iter().zip(&g).map(|(a, b)| a + t * b).collect();
            let trial = project(sc, &y, opts.floor);
            let d: Vec<f64> = trial.iter().zip(&w).map(|(a, b)| a - b).collect();
            if let Some(ft) = stage.value(&trial) {
                if ft >= f + 1e-4 * dot(&g, &d) {
                    accepted = Some((trial, ft, d));
                    break;
                }
            }
            t *= 0.5;
        }
        let Some((next, fn_, s)) = accepted else {
            break;
        };
        let Some(gn) = stage.gradient(&next) else {
            break;
        };
        // Ascent BB step: s·s / −s·(g_new − g).
        let yk: Vec<f64> = gn.iter().zip(&g).map(|(a, b)| a - b).collect();
        let curv = -dot(&s, &yk);
        step = if curv > 0.0 { (dot(&s, &s) / curv).clamp(1e-12, 1e12) } else { (2.0 * t).min(1e12) };
        w = next;
        f = fn_;
        g = gn;
    }
    let res = residual(sc, &w, &g, opts.floor);
    Some((w, res))
}

/// Raises inelastic weights until every minimum rate holds strictly.
fn restore(sc: &ValidatedScenario, mut w: Vec<f64>, floor: f64) -> Option<Vec<f64>> {
    for _ in 0..100 {
        let e = evaluate(sc, &BidState::new(sc, w.clone())).ok()?;
        let mut ok = true;
        for u in 0..w.len() {
            let p = sc.params(u);
            let r = e.users.rates[u];
            if p.min_rate > 0.0 && r <= p.min_rate * (1.0 + 1e-6) {
                ok = false;
                w[u] *= 1.05 * p.min_rate / r.max(1e-3 * p.min_rate);
            }
        }
        if ok {
            return Some(w);
        }
        w = project(sc, &w, floor);
    }
    None
}

/// Barrier continuation from one start. Returns (weights, residual) or `None`
/// if no strictly feasible point was reached.
fn solve_from(sc: &ValidatedScenario, w0: Vec<f64>, opts: &SoOptions) -> Option<(Vec<f64>, f64)> {
    let coeff: Vec<f64> = (0..sc.num_users()).map(|u| sc.overall_share(sc.user(u).slice)).collect();
    let has_inelastic = (0..sc.num_users()).any(|u| sc.user(u).priority == 0.0);
    let mus: &[f64] = if has_inelastic { &[1e-2, 1e-4, 1e-6, 1e-8, 1e-10] } else { &[0.0] };
    let mut w = restore(sc, w0, opts.floor)?;
    let mut res = f64::INFINITY;
    for &mu in mus {
        let stage = Stage { sc, coeff: coeff.clone(), mu };
        let (wn, r) = ascend(&stage, w, opts)?;
        w = wn;
        res = r;
    }
    Some((w, res))
}

/// Starting points: minimum weights at the GREET 7-round iterate plus a
/// Dirichlet-random split of each slice's remaining budget.
fn starts(sc: &ValidatedScenario, opts: &SoOptions) -> Vec<Vec<f64>> {
    let base_state = greet_dynamics(
        sc,
        &DynamicsOptions {
            divergence: DivergencePolicy::Drop,
            ..Default::default()
        },
    )
    .map(|t| t.final_state().clone())
    .unwrap_or_else(|_| BidState::new(sc, default_initial_weights(sc)));
    let mut min_w = vec![0.0; sc.num_users()];
    for v in 0..sc.num_slices() {
        let view = build_aggregate_view(sc, &base_state, v);
        if let Ok(p) = min_weights_with(sc, v, &view, DivergencePolicy::Drop) {
            for (&u, &x) in sc.users_of(v).iter().zip(&p.weights) {
                min_w[u] = x;
            }
        }
    }
    let mut rng = stream(opts.seed, 0, 0, Purpose::Solver);
    let gamma = Gamma::new(1.0, 1.0).expect("unit gamma");
    (0..opts.starts)
        .map(|_| {
            let mut w = min_w.clone();
            for v in 0..sc.num_slices() {
                let users = sc.users_of(v);
                let spare = (sc.overall_share(v) - users.iter().map(|&u| min_w[u]).sum::<f64>()).max(0.0);
                let draws: Vec<f64> = users.iter().map(|_| gamma.sample(&mut rng)).collect();
                let total: f64 = draws.iter().sum();
                for (&u, d) in users.iter().zip(&draws) {
                    w[u] += spare * d / total;
                }
            }
            project(sc, &w, opts.floor)
        })
        .collect()
}

/// Joint multi-start projected gradient ascent.
pub fn social_optimal(sc: &ValidatedScenario, opts: &SoOptions) -> Result<SocialOptimum, GameError> {
    let mut statuses = Vec::with_capacity(opts.starts);
    let mut best: Option<(usize, Vec<f64>, f64, f64)> = None;
    let mut best_residual = f64::INFINITY;
    for (k, w0) in starts(sc, opts).into_iter().enumerate() {
        match solve_from(sc, w0, opts) {
            None => statuses.push(StartStatus::Infeasible),
            Some((w, res)) => {
                let f = social_objective(sc, &w).to_f64();
                best_residual = best_residual.min(res);
                if res <= opts.tol {
                    statuses.push(StartStatus::Converged { residual: res, utility: f });
                    if best.as_ref().is_none_or(|b| f > b.2) {
                        best = Some((k, w, f, res));
                    }
                } else {
                    statuses.push(StartStatus::NonConverged { residual: res, utility: f });
                }
            }
        }
    }
    let Some((k, weights, _, residual)) = best else {
        if statuses.iter().all(|s| *s == StartStatus::Infeasible) {
            return Err(GameError::InvalidInput("no feasible starting point for the social optimum".into()));
        }
        return Err(GameError::NonConverged {
            solver: "social_optimal".into(),
            iterations: opts.iterations,
            residual: best_residual,
        });
    };
    let bids = BidState::new(sc, weights.clone());
    let rates = evaluate(sc, &bids)?.users.rates;
    Ok(SocialOptimum {
        utility: social_objective(sc, &weights),
        weights,
        rates,
        residual,
        starts: statuses,
        best_start: Some(k),
    })
}

/// Per-station optimum over fractions, realized as weights.
pub fn social_optimal_exact(sc: &ValidatedScenario) -> Result<SocialOptimum, GameError> {
    let mut x = vec![0.0; sc.num_users()];
    for b in 0..sc.num_stations() {
        let users: Vec<usize> = (0..sc.num_slices()).flat_map(|v| sc.users_at(v, b).iter().copied()).collect();
        for (u, f) in station_optimum(sc, &users) {
            x[u] = f;
        }
    }
    let mut t: f64 = 1.0;
    for v in 0..sc.num_slices() {
        let spend: f64 = sc.users_of(v).iter().map(|&u| x[u]).sum();
        if spend > 0.0 {
            t = t.min(sc.overall_share(v) / spend);
        }
    }
    let weights: Vec<f64> = x.iter().map(|f| f * t).collect();
    let bids = BidState::new(sc, weights.clone());
    let rates = evaluate(sc, &bids)?.users.rates;
    let utility = (0..sc.num_users())
        .map(|u| sc.overall_share(sc.user(u).slice) * served_utility(sc, u, rates[u]))
        .sum();
    Ok(SocialOptimum {
        weights,
        rates,
        utility,
        residual: 0.0,
        starts: Vec::new(),
        best_start: None,
    })
}

/// Maximizes `Σ a_u φ_u F_α(c_u x_u − γ_u)` over `x_u ≥ f̲_u`, `Σ x_u ≤ 1`.
/// Users are admitted by increasing `f̲_u` while their minima fit.
fn station_optimum(sc: &ValidatedScenario, users: &[usize]) -> Vec<(usize, f64)> {
    let mut order = users.to_vec();
    order.sort_by(|&a, &b| sc.min_fraction(a).total_cmp(&sc.min_fraction(b)).then(a.cmp(&b)));
    let mut used = 0.0;
    let mut admitted = Vec::new();
    let mut out: Vec<(usize, f64)> = Vec::with_capacity(users.len());
    for u in order {
        let m = sc.min_fraction(u);
        if used + m <= 1.0 {
            used += m;
            admitted.push(u);
        } else {
            out.push((u, 0.0));
        }
    }
    let rest = (1.0 - used).max(0.0);
    // Marginal value of extra fraction y: k_u F'(c_u y) with k_u = a_u φ_u c_u.
    let elastic: Vec<(usize, f64, f64)> = admitted
        .iter()
        .filter(|&&u| sc.user(u).priority > 0.0)
        .map(|&u| {
            let k = sc.overall_share(sc.user(u).slice) * sc.user(u).priority * sc.user(u).capacity;
            (u, k, sc.slice(sc.user(u).slice).alpha)
        })
        .collect();
    let mut extra = vec![0.0; elastic.len()];
    if !elastic.is_empty() && rest > 0.0 {
        // y_u(λ) solving k F'(c y) = λ; α = 0 users have constant marginal k.
        let linear_max = elastic
            .iter()
            .filter(|e| e.2 == 0.0)
            .map(|e| e.1)
            .fold(0.0f64, f64::max);
        let demand = |lambda: f64, out: &mut [f64]| -> f64 {
            let mut s = 0.0;
            for (i, &(u, k, a)) in elastic.iter().enumerate() {
                out[i] = if a == 0.0 {
                    0.0
                } else {
                    (k / lambda).powf(1.0 / a) / sc.user(u).capacity
                };
                s += out[i];
            }
            s
        };
        let mut buf = vec![0.0; elastic.len()];
        if linear_max > 0.0 && demand(linear_max, &mut buf) <= rest {
            // Curved users stop at λ = k_max; the linear leaders share the rest.
            let leftover = rest - buf.iter().sum::<f64>();
            let leaders: Vec<usize> = (0..elastic.len())
                .filter(|&i| elastic[i].2 == 0.0 && elastic[i].1 == linear_max)
                .collect();
            for &i in &leaders {
                buf[i] = leftover / leaders.len() as f64;
            }
            extra = buf;
        } else {
            // Bisection on log λ.
            let (mut lo, mut hi) = (linear_max.max(1e-300).ln(), 0.0f64);
            while demand(hi.exp(), &mut buf) > rest {
                hi += 10.0;
            }
            if linear_max == 0.0 {
                lo = hi - 10.0;
                while demand(lo.exp(), &mut buf) < rest {
                    lo -= 10.0;
                }
            }
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if demand(mid.exp(), &mut buf) > rest {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            demand(hi.exp(), &mut extra);
        }
    }
    for &u in &admitted {
        out.push((u, sc.min_fraction(u)));
    }
    for (i, &(u, _, _)) in elastic.iter().enumerate() {
        if let Some(e) = out.iter_mut().find(|e| e.0 == u) {
            e.1 += extra[i];
        }
    }
    // Idle capacity left by inelastic-only stations is handed back to the
    // admitted users by the proportional normalization.
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ScenarioSpec, SliceProfile};

    #[test]
    fn symmetric_pair_gets_half_each() {
        let mut spec = ScenarioSpec::new(1);
        spec.add_slice(SliceProfile::new("a", vec![0.0], 0.5, 1.0));
        spec.add_slice(SliceProfile::new("b", vec![0.0], 0.5, 1.0));
        spec.add_user(0, 0, 4.0, 0.0, 1.0);
        spec.add_user(1, 0, 4.0, 0.0, 1.0);
        let sc = spec.validate().unwrap();
        let so = social_optimal(&sc, &SoOptions::default()).unwrap();
        for r in &so.rates {
            assert!((r - 2.0).abs() < 1e-6, "{r}");
        }
        let ex = social_optimal_exact(&sc).unwrap();
        assert!((ex.rates[0] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn exact_matches_gradient_solver_with_mixed_classes() {
        let mut spec = ScenarioSpec::new(2);
        spec.add_slice(SliceProfile::new("g", vec![0.3, 0.3], 0.1, 1.0));
        spec.add_slice(SliceProfile::new("e", vec![0.0, 0.0], 0.6, 2.0));
        spec.add_user(0, 0, 2.0, 0.2, 0.0);
        spec.add_user(0, 1, 3.0, 0.1, 1.0);
        spec.add_user(1, 0, 1.0, 0.0, 0.5);
        spec.add_user(1, 1, 2.0, 0.0, 0.5);
        let sc = spec.validate().unwrap();
        let ex = social_optimal_exact(&sc).unwrap();
        let so = social_optimal(&sc, &SoOptions::default()).unwrap();
        let (a, b) = (ex.utility.to_f64(), so.utility.to_f64());
        assert!((a - b).abs() <= 1e-6 * a.abs().max(1.0), "{a} vs {b}");
    }
}
