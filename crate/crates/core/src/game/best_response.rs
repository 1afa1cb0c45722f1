//! Best response of one slice to frozen bids of the others.
//!
//! Inside a station the optimal split of the slice's fraction `x` among its
//! users has a closed form: every user first gets `f̲_u`, the rest `x − f̲^v_b`
//! is shared in proportion to `θ_u = φ_u^{1/α} c_u^{(1−α)/α}`. The problem
//! therefore reduces to choosing one local bid per station:
//!
//! `max Σ_b H_b(f_b(l_b))  s.t.  l_b ≥ lower_b,  Σ_b l_b ≤ s^v`
//!
//! where `f_b` is the GREET fraction seen by the slice. `f_b` is concave on
//! each of its (up to three) regimes but not across the underload/overload
//! switch, so the solver runs projected gradient ascent from several starts and
//! then polishes each result with an exact per-regime multiplier search,
//! moving stations across regime boundaries while that improves the objective.

use rand::Rng;
use rand_distr::{Distribution, Exp1};

use crate::allocation::{own_fraction, own_fraction_slopes, BidState, StationAggregate};
use crate::error::GameError;
use crate::game::gradient::slice_objective;
use crate::game::projection::project_capped_floor;
use crate::model::{alpha_fair, alpha_fair_prime, Utility, ValidatedScenario};
use crate::policy::{build_aggregate_view, min_local_bid};
use crate::rng::{stream, Purpose};

#[derive(Debug, Clone)]
pub struct BrOptions {
    /// Weight floor `δ`.
    pub floor: f64,
    /// Number of starting points (the current state and the priority split are
    /// always included; the rest are random).
    pub starts: usize,
    pub pga_iterations: usize,
    /// KKT residual target (scaled by `max(1, μ)`).
    pub tol: f64,
    pub seed: u64,
}

impl Default for BrOptions {
    fn default() -> Self {
        BrOptions {
            floor: 1e-6,
            starts: 4,
            pga_iterations: 300,
            tol: 1e-7,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct BestResponse {
    /// Weights aligned with `users_of(v)`.
    pub weights: Vec<f64>,
    /// Resulting local bids `l^v_b`.
    pub local: Vec<f64>,
    pub utility: Utility,
    pub kkt_residual: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Regime {
    Under,
    Guarded,
    Excess,
}

#[derive(Debug, Clone, Copy)]
struct Piece {
    lo: f64,
    hi: f64,
    regime: Regime,
}

#[derive(Debug)]
struct Station {
    b: usize,
    share: f64,
    agg: StationAggregate,
    req: f64,
    lower: f64,
    alpha: f64,
    /// `(φ_u, c_u, θ̂_u)` of users with positive priority.
    growth: Vec<(f64, f64, f64)>,
    pieces: Vec<Piece>,
}

impl Station {
    fn fraction(&self, l: f64) -> f64 {
        own_fraction(l, self.share, &self.agg)
    }

    fn h(&self, x: f64) -> Option<f64> {
        let y = x - self.req;
        if y <= 0.0 {
            return None;
        }
        Some(
            self.growth
                .iter()
                .map(|&(phi, c, th)| phi * alpha_fair(c * th * y, self.alpha))
                .sum(),
        )
    }

    fn h_prime(&self, x: f64) -> f64 {
        let y = x - self.req;
        if y <= 0.0 {
            return f64::INFINITY;
        }
        self.growth
            .iter()
            .map(|&(phi, c, th)| phi * alpha_fair_prime(c * th * y, self.alpha) * c * th)
            .sum()
    }

    fn value(&self, l: f64) -> Option<f64> {
        self.h(self.fraction(l))
    }

    /// One-sided slopes of `H(f(l))`.
    fn slopes(&self, l: f64) -> (f64, f64) {
        let hp = self.h_prime(self.fraction(l));
        let (left, right) = own_fraction_slopes(l, self.share, &self.agg);
        (hp * left, hp * right)
    }

    fn piece_fraction(&self, regime: Regime, l: f64) -> f64 {
        let big_l = self.agg.others_bid;
        match regime {
            Regime::Under => {
                if l + big_l == 0.0 {
                    0.0
                } else {
                    l / (l + big_l)
                }
            }
            Regime::Guarded => l,
            Regime::Excess => {
                let d = l - self.share + self.agg.others_excess;
                let left = 1.0 - self.share - self.agg.others_guarded;
                if d <= 0.0 {
                    self.share
                } else {
                    self.share + (l - self.share) / d * left
                }
            }
        }
    }

    fn piece_fraction_slope(&self, regime: Regime, l: f64) -> f64 {
        let big_l = self.agg.others_bid;
        match regime {
            Regime::Under => big_l / ((l + big_l) * (l + big_l)),
            Regime::Guarded => 1.0,
            Regime::Excess => {
                let d = l - self.share + self.agg.others_excess;
                if d <= 0.0 {
                    0.0
                } else {
                    (1.0 - self.share - self.agg.others_guarded) * self.agg.others_excess / (d * d)
                }
            }
        }
    }

    fn piece_slope(&self, regime: Regime, l: f64) -> f64 {
        let hp = self.h_prime(self.piece_fraction(regime, l));
        let fp = self.piece_fraction_slope(regime, l);
        if fp == 0.0 {
            0.0
        } else {
            hp * fp
        }
    }

    fn build_pieces(&mut self, hi: f64) {
        let k1 = 1.0 - self.agg.others_bid;
        let s = self.share;
        let mut raw = Vec::new();
        if k1 > 0.0 {
            raw.push((0.0, k1, Regime::Under));
            if s > k1 {
                raw.push((k1, s, Regime::Guarded));
                raw.push((s, f64::INFINITY, Regime::Excess));
            } else {
                raw.push((k1, f64::INFINITY, Regime::Excess));
            }
        } else if s > 0.0 {
            raw.push((0.0, s, Regime::Guarded));
            raw.push((s, f64::INFINITY, Regime::Excess));
        } else {
            raw.push((0.0, f64::INFINITY, Regime::Excess));
        }
        let lo = self.lower;
        self.pieces = raw
            .into_iter()
            .filter_map(|(a, c, regime)| {
                let a2 = a.max(lo);
                let c2 = c.min(hi);
                (a2 < c2).then_some(Piece { lo: a2, hi: c2, regime })
            })
            .collect();
        if self.pieces.is_empty() {
            let regime = regime_at(self.agg.others_bid, s, lo);
            self.pieces.push(Piece { lo, hi: lo, regime });
        }
    }

    fn piece_index(&self, l: f64) -> usize {
        self.pieces
            .iter()
            .position(|p| l < p.hi)
            .unwrap_or(self.pieces.len() - 1)
    }

    fn argmax_on_piece(&self, p: &Piece, mu: f64) -> f64 {
        if p.lo >= p.hi {
            return p.lo;
        }
        if self.piece_slope(p.regime, p.lo) <= mu {
            return p.lo;
        }
        if self.piece_slope(p.regime, p.hi) >= mu {
            return p.hi;
        }
        let (mut a, mut c) = (p.lo, p.hi);
        for _ in 0..200 {
            let m = 0.5 * (a + c);
            if m <= a || m >= c {
                break;
            }
            if self.piece_slope(p.regime, m) > mu {
                a = m;
            } else {
                c = m;
            }
        }
        0.5 * (a + c)
    }
}

fn regime_at(others: f64, share: f64, l: f64) -> Regime {
    if l + others <= 1.0 {
        Regime::Under
    } else if l < share {
        Regime::Guarded
    } else {
        Regime::Excess
    }
}

/// The slice's optimization problem against frozen aggregates.
struct Problem {
    free: Vec<Station>,
    fixed: Vec<FixedStation>,
    budget: f64,
}

impl Problem {
    fn lower(&self) -> Vec<f64> {
        self.free.iter().map(|s| s.lower).collect()
    }

    fn objective(&self, x: &[f64]) -> Option<f64> {
        let mut total = 0.0;
        for (st, &l) in self.free.iter().zip(x) {
            total += st.value(l)?;
        }
        Some(total)
    }

    fn right_slopes(&self, x: &[f64]) -> Vec<f64> {
        self.free.iter().zip(x).map(|(st, &l)| st.slopes(l).1).collect()
    }

    fn kkt_residual(&self, x: &[f64]) -> f64 {
        let spent: f64 = x.iter().sum();
        let mut max_right: f64 = 0.0;
        let mut min_left = f64::INFINITY;
        for (st, &l) in self.free.iter().zip(x) {
            let (left, right) = st.slopes(l);
            max_right = max_right.max(right);
            if l > st.lower * (1.0 + 1e-12) + 1e-300 {
                min_left = min_left.min(left);
            }
        }
        if spent < self.budget * (1.0 - 1e-12) {
            return max_right;
        }
        if !min_left.is_finite() {
            return 0.0;
        }
        let mu = (0.5 * (max_right + min_left)).max(0.0);
        let r = (max_right - mu).max(mu - min_left).max(0.0);
        r / mu.max(1.0)
    }

    fn solve_restricted(&self, choice: &[usize]) -> (Vec<f64>, f64) {
        let pieces: Vec<&Piece> = self.free.iter().zip(choice).map(|(s, &k)| &s.pieces[k]).collect();
        let at = |mu: f64| -> Vec<f64> {
            self.free
                .iter()
                .zip(&pieces)
                .map(|(st, p)| st.argmax_on_piece(p, mu))
                .collect()
        };
        let x0 = at(0.0);
        if x0.iter().sum::<f64>() <= self.budget {
            return (x0, 0.0);
        }
        let mut hi = 1.0;
        let mut x_hi = at(hi);
        let mut guard = 0;
        while x_hi.iter().sum::<f64>() > self.budget && guard < 2000 {
            hi *= 2.0;
            x_hi = at(hi);
            guard += 1;
        }
        let mut lo = 0.0;
        let mut x_lo = x0;
        for _ in 0..300 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            let x = at(mid);
            if x.iter().sum::<f64>() > self.budget {
                lo = mid;
                x_lo = x;
            } else {
                hi = mid;
                x_hi = x;
            }
        }
        // Close the remaining gap along the segment between the two brackets.
        let gap = self.budget - x_hi.iter().sum::<f64>();
        let span: f64 = x_lo.iter().zip(&x_hi).map(|(a, b)| a - b).sum();
        let x = if span > 0.0 && gap > 0.0 {
            x_hi.iter()
                .zip(&x_lo)
                .map(|(&h, &l)| h + (l - h) * (gap / span).min(1.0))
                .collect()
        } else {
            x_hi
        };
        (x, hi)
    }

    fn polish(&self, start: &[f64]) -> Vec<f64> {
        let mut choice: Vec<usize> = self.free.iter().zip(start).map(|(s, &l)| s.piece_index(l)).collect();
        let mut best: Option<(f64, Vec<f64>)> = None;
        for _ in 0..200 {
            let (x, mu) = self.solve_restricted(&choice);
            let value = self.objective(&x);
            if let Some(val) = value {
                if best.as_ref().is_none_or(|(b, _)| val > *b) {
                    best = Some((val, x.clone()));
                }
            }
            let mut switched = false;
            for (i, st) in self.free.iter().enumerate() {
                let k = choice[i];
                let p = st.pieces[k];
                let eps = 1e-12 * p.hi.abs().max(1.0);
                if x[i] >= p.hi - eps && k + 1 < st.pieces.len() {
                    let next = st.pieces[k + 1];
                    if st.piece_slope(next.regime, p.hi) > mu * (1.0 + 1e-10) + 1e-14 {
                        choice[i] = k + 1;
                        switched = true;
                        break;
                    }
                }
                if x[i] <= p.lo + eps && k > 0 {
                    let prev = st.pieces[k - 1];
                    if st.piece_slope(prev.regime, p.lo) < mu * (1.0 - 1e-10) - 1e-14 {
                        choice[i] = k - 1;
                        switched = true;
                        break;
                    }
                }
            }
            if !switched {
                break;
            }
        }
        best.map(|(_, x)| x).unwrap_or_else(|| start.to_vec())
    }

    fn pga(&self, start: &[f64], iterations: usize) -> (Vec<f64>, usize) {
        const ARMIJO: f64 = 1e-4;
        let lower = self.lower();
        let mut x = start.to_vec();
        let Some(mut fx) = self.objective(&x) else {
            return (x, 0);
        };
        let mut g = self.right_slopes(&x);
        let gmax = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if gmax == 0.0 {
            return (x, 0);
        }
        let mut t = 0.1 * self.budget.max(1e-12) / gmax;
        let mut done = 0;
        for k in 0..iterations {
            done = k + 1;
            let mut accepted = None;
            for _ in 0..60 {
                let trial: Vec<f64> = x.iter().zip(&g).map(|(a, d)| a + t * d).collect();
                let xn = project_capped_floor(&trial, &lower, self.budget);
                if let Some(fn_) = self.objective(&xn) {
                    let dir: f64 = g.iter().zip(xn.iter().zip(&x)).map(|(d, (a, b))| d * (a - b)).sum();
                    if fn_ >= fx + ARMIJO * dir {
                        accepted = Some((xn, fn_));
                        break;
                    }
                }
                t *= 0.5;
            }
            let Some((xn, fn_)) = accepted else { break };
            let step: Vec<f64> = xn.iter().zip(&x).map(|(a, b)| a - b).collect();
            let smax = step.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let gn = self.right_slopes(&xn);
            let sy: f64 = step.iter().zip(gn.iter().zip(&g)).map(|(s, (a, b))| s * (a - b)).sum();
            let ss: f64 = step.iter().map(|s| s * s).sum();
            t = if sy < 0.0 { (ss / -sy).clamp(1e-14, 1e14) } else { (t * 2.0).min(1e14) };
            x = xn;
            fx = fn_;
            g = gn;
            if smax <= 1e-15 * self.budget.max(1.0) {
                break;
            }
        }
        (x, done)
    }
}

/// A station whose bid is pinned, with the target user proportions there.
#[derive(Debug)]
struct FixedStation {
    b: usize,
    bid: f64,
    targets: Vec<f64>,
}

/// Smallest bid realizing `targets` (aligned with the station's users) with
/// every weight at least `floor`.
fn floor_bid(targets: &[f64], floor: f64) -> f64 {
    let total: f64 = targets.iter().sum();
    let min = targets.iter().copied().fold(f64::INFINITY, f64::min);
    if min > 0.0 {
        floor * total / min
    } else {
        f64::INFINITY
    }
}

fn build_problem(
    sc: &ValidatedScenario,
    v: usize,
    bids: &BidState,
    floor: f64,
) -> Result<Problem, GameError> {
    let view = build_aggregate_view(sc, bids, v);
    let alpha = sc.slice(v).alpha;
    let mut free = Vec::new();
    let mut fixed = Vec::new();
    for b in 0..sc.num_stations() {
        let users = sc.users_at(v, b);
        if users.is_empty() {
            continue;
        }
        let agg = *view.station(b);
        let share = sc.share(v, b);
        let req = sc.requirement(v, b);
        let n = users.len() as f64;
        let growth_users: Vec<usize> = users.iter().copied().filter(|&u| sc.user(u).priority > 0.0).collect();
        if agg.others_bid == 0.0 {
            // Any positive bid takes the whole station: split it optimally and
            // spend as little as the floor allows.
            if floor == 0.0 {
                return Err(GameError::NotAttained { slice: v, bs: b });
            }
            let targets = lone_targets(sc, users, alpha, req);
            fixed.push(FixedStation {
                b,
                bid: floor_bid(&targets, floor),
                targets,
            });
            continue;
        }
        let min_bid = min_local_bid(req, share, &agg).ok_or(GameError::Infeasible { slice: v })?;
        let lower = (n * floor).max(min_bid);
        if growth_users.is_empty() {
            let targets: Vec<f64> = users.iter().map(|&u| sc.min_fraction(u)).collect();
            let bid = min_bid.max(floor_bid(&targets, floor));
            if bid == 0.0 {
                return Err(GameError::NotAttained { slice: v, bs: b });
            }
            fixed.push(FixedStation { b, bid, targets });
            continue;
        }
        if alpha == 0.0 && growth_users.len() > 1 {
            return Err(GameError::InvalidInput(format!(
                "slice {v}: linear utility with several prioritized users at one station has no attained best response"
            )));
        }
        let theta: Vec<f64> = growth_users
            .iter()
            .map(|&u| {
                let user = sc.user(u);
                if alpha == 0.0 {
                    1.0
                } else {
                    user.priority.powf(1.0 / alpha) * user.capacity.powf((1.0 - alpha) / alpha)
                }
            })
            .collect();
        let total: f64 = theta.iter().sum();
        let growth = growth_users
            .iter()
            .zip(&theta)
            .map(|(&u, &th)| (sc.user(u).priority, sc.user(u).capacity, th / total))
            .collect();
        free.push(Station {
            b,
            share,
            agg,
            req,
            lower,
            alpha,
            growth,
            pieces: Vec::new(),
        });
    }
    let fixed_spend: f64 = fixed.iter().map(|f| f.bid).sum();
    let budget = sc.overall_share(v) - fixed_spend;
    let floor_sum: f64 = free.iter().map(|s| s.lower).sum();
    let slack = 1e-12 * sc.overall_share(v).max(1.0);
    if budget < floor_sum - slack || (!free.is_empty() && budget <= floor_sum) {
        return Err(GameError::Infeasible { slice: v });
    }
    let spare = budget - floor_sum;
    for st in &mut free {
        st.build_pieces(st.lower + spare);
    }
    Ok(Problem { free, fixed, budget })
}

/// Slice `v`'s best response to the other slices' bids in `bids`.
pub fn best_response(
    sc: &ValidatedScenario,
    v: usize,
    bids: &BidState,
    opts: &BrOptions,
) -> Result<BestResponse, GameError> {
    let problem = build_problem(sc, v, bids, opts.floor)?;
    let mut local = vec![0.0; sc.num_stations()];
    for f in &problem.fixed {
        local[f.b] = f.bid;
    }
    let mut iterations = 0;
    let mut residual = 0.0;
    if !problem.free.is_empty() {
        let lower = problem.lower();
        let spare = problem.budget - lower.iter().sum::<f64>();
        let phi: Vec<f64> = problem
            .free
            .iter()
            .map(|s| s.growth.iter().map(|g| g.0).sum())
            .collect();
        let phi_sum: f64 = phi.iter().sum();
        let greet_like: Vec<f64> = lower
            .iter()
            .zip(&phi)
            .map(|(l, p)| l + spare * p / phi_sum)
            .collect();

        let current: Vec<f64> = {
            let raw: Vec<f64> = problem.free.iter().map(|s| bids.local_bid(v, s.b)).collect();
            let mut x = project_capped_floor(&raw, &lower, problem.budget);
            let mut tries = 0;
            while problem.objective(&x).is_none() && tries < 60 {
                x = x.iter().zip(&greet_like).map(|(a, b)| 0.5 * (a + b)).collect();
                tries += 1;
            }
            x
        };
        let mut starts = vec![current, greet_like];
        let mut rng = stream(opts.seed, v as u64, 0, Purpose::Solver);
        while starts.len() < opts.starts.max(2) {
            let e: Vec<f64> = (0..lower.len()).map(|_| Exp1.sample(&mut rng)).collect::<Vec<f64>>();
            let sum: f64 = e.iter().sum::<f64>() + rng.random::<f64>() * 1e-12;
            starts.push(lower.iter().zip(&e).map(|(l, x)| l + spare * x / sum).collect());
        }

        let mut best: Option<(f64, Vec<f64>)> = None;
        for start in &starts {
            let (x, it) = problem.pga(start, opts.pga_iterations);
            iterations += it;
            let x = problem.polish(&x);
            if let Some(val) = problem.objective(&x) {
                let better = match &best {
                    None => true,
                    Some((b, _)) => val > b + 1e-12 * b.abs().max(1.0),
                };
                if better {
                    best = Some((val, x));
                }
            }
        }
        let (_, x) = best.ok_or(GameError::Infeasible { slice: v })?;
        residual = problem.kkt_residual(&x);
        if residual > opts.tol {
            return Err(GameError::NonConverged {
                solver: format!("best response of slice {v}"),
                iterations,
                residual,
            });
        }
        for (st, &l) in problem.free.iter().zip(&x) {
            local[st.b] = l;
        }
    }

    let weights = station_weights(sc, v, &problem, &local, opts.floor);
    let mut all = bids.weights().to_vec();
    for (&u, &w) in sc.users_of(v).iter().zip(&weights) {
        all[u] = w;
    }
    let utility = slice_objective(sc, v, &all);
    Ok(BestResponse {
        weights,
        local,
        utility,
        kkt_residual: residual,
        iterations,
    })
}

/// Optimal fractions for a slice holding a whole station alone: minima first,
/// the rest by `θ_u` (by priority for linear utilities).
fn lone_targets(sc: &ValidatedScenario, users: &[usize], alpha: f64, req: f64) -> Vec<f64> {
    let theta: Vec<f64> = users
        .iter()
        .map(|&u| {
            let user = sc.user(u);
            if user.priority == 0.0 {
                0.0
            } else if alpha == 0.0 {
                user.priority
            } else {
                user.priority.powf(1.0 / alpha) * user.capacity.powf((1.0 - alpha) / alpha)
            }
        })
        .collect();
    let total: f64 = theta.iter().sum();
    let rest = (1.0 - req).max(0.0);
    users
        .iter()
        .zip(&theta)
        .map(|(&u, &th)| sc.min_fraction(u) + if total > 0.0 { rest * th / total } else { 0.0 })
        .collect()
}

/// Turns per-station bids into user weights realizing the optimal inner split.
fn station_weights(sc: &ValidatedScenario, v: usize, problem: &Problem, local: &[f64], floor: f64) -> Vec<f64> {
    let users = sc.users_of(v);
    let mut out = vec![0.0; users.len()];
    let pos = |u: usize| users.binary_search(&u).expect("user of slice");
    for b in 0..sc.num_stations() {
        let at = sc.users_at(v, b);
        if at.is_empty() {
            continue;
        }
        let l = local[b];
        let st = problem.free.iter().find(|s| s.b == b);
        let req = sc.requirement(v, b);
        // Target fractions x_u; only their proportions matter for the weights.
        // Fixed stations split by requirement (or priority when all elastic).
        let targets: Vec<f64> = match st {
            Some(s) => {
                let y = (s.fraction(l) - req).max(0.0);
                let mut k = 0;
                at.iter()
                    .map(|&u| {
                        let m = sc.min_fraction(u);
                        if sc.user(u).priority > 0.0 {
                            let th = s.growth[k].2;
                            k += 1;
                            m + th * y
                        } else {
                            m
                        }
                    })
                    .collect()
            }
            None => problem
                .fixed
                .iter()
                .find(|f| f.b == b)
                .expect("every hosting station is free or fixed")
                .targets
                .clone(),
        };
        let total: f64 = targets.iter().sum();
        let mut w: Vec<f64> = if total > 0.0 {
            targets.iter().map(|t| l * t / total).collect()
        } else {
            vec![l / at.len() as f64; at.len()]
        };
        apply_floor(&mut w, at.iter().map(|&u| l * sc.min_fraction(u) / total.max(f64::MIN_POSITIVE)), floor);
        for (&u, &x) in at.iter().zip(&w) {
            out[pos(u)] = x;
        }
    }
    out
}

/// Raises weights below `floor`, taking the difference from the weights'
/// surplus above their protected part.
fn apply_floor(w: &mut [f64], protected: impl Iterator<Item = f64>, floor: f64) {
    if floor <= 0.0 {
        return;
    }
    let protected: Vec<f64> = protected.collect();
    let deficit: f64 = w.iter().map(|&x| (floor - x).max(0.0)).sum();
    if deficit == 0.0 {
        return;
    }
    let surplus: Vec<f64> = w
        .iter()
        .zip(&protected)
        .map(|(&x, &p)| if x > floor { (x - p.max(floor)).max(0.0) } else { 0.0 })
        .collect();
    let total: f64 = surplus.iter().sum();
    let donors: f64 = w.iter().filter(|&&x| x > floor).map(|x| x - floor).sum();
    for (x, s) in w.iter_mut().zip(&surplus) {
        if *x < floor {
            *x = floor;
        } else if total >= deficit {
            *x -= deficit * s / total;
        } else if donors > 0.0 {
            *x -= deficit * (*x - floor) / donors;
        }
    }
}

/// Best responses of every slice at `bids`; the state is a Nash equilibrium
/// when no slice moves its local bids by more than `tol` in the
/// `max_v Σ_b |Δl^v_b|` norm.
#[derive(Debug, Clone)]
pub struct NeCertificate {
    pub deviation: Vec<f64>,
    pub max_deviation: f64,
    pub is_equilibrium: bool,
}

pub fn certify_equilibrium(
    sc: &ValidatedScenario,
    bids: &BidState,
    opts: &BrOptions,
    tol: f64,
) -> Result<NeCertificate, GameError> {
    let mut deviation = Vec::with_capacity(sc.num_slices());
    for v in 0..sc.num_slices() {
        let br = best_response(sc, v, bids, opts)?;
        let d: f64 = (0..sc.num_stations())
            .map(|b| (br.local[b] - bids.local_bid(v, b)).abs())
            .sum();
        deviation.push(d);
    }
    let max_deviation = deviation.iter().fold(0.0f64, |m, &d| m.max(d));
    Ok(NeCertificate {
        is_equilibrium: max_deviation <= tol,
        deviation,
        max_deviation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ScenarioSpec, SliceProfile};

    #[test]
    fn lone_elastic_slice_splits_by_priority_times_rate() {
        let mut spec = ScenarioSpec::new(1);
        spec.add_slice(SliceProfile::new("e", vec![0.0], 1.0, 1.0));
        spec.add_user(0, 0, 2.0, 0.0, 0.25);
        spec.add_user(0, 0, 5.0, 0.0, 0.75);
        let sc = spec.validate().unwrap();
        let bids = BidState::new(&sc, vec![0.5, 0.5]);
        let opts = BrOptions {
            floor: 0.0,
            ..Default::default()
        };
        // Alone at the station with δ = 0 the response is not attained.
        assert!(matches!(best_response(&sc, 0, &bids, &opts), Err(GameError::NotAttained { .. })));
        let br = best_response(&sc, 0, &bids, &BrOptions::default()).unwrap();
        let ratio = br.weights[0] / br.weights[1];
        assert!((ratio - 1.0 / 3.0).abs() < 1e-9, "{ratio}");
    }

    #[test]
    fn inelastic_only_slice_returns_min_weights() {
        let mut spec = ScenarioSpec::new(1);
        spec.add_slice(SliceProfile::new("i", vec![0.5], 0.0, 1.0));
        spec.add_slice(SliceProfile::new("e", vec![0.0], 1.0, 1.0));
        spec.add_user(0, 0, 1.0, 0.2, 0.0);
        spec.add_user(0, 0, 1.0, 0.1, 0.0);
        spec.add_user(1, 0, 1.0, 0.0, 1.0);
        let sc = spec.validate().unwrap();
        let bids = BidState::new(&sc, vec![0.25, 0.25, 0.6]);
        let br = best_response(&sc, 0, &bids, &BrOptions::default()).unwrap();
        // Underloaded branch: l = f̲/(1 − f̲)·l^{−v} = 0.3/0.7·0.6.
        let l = 0.3 / 0.7 * 0.6;
        assert!((br.weights[0] - l * 2.0 / 3.0).abs() < 1e-12);
        assert!((br.weights[1] - l / 3.0).abs() < 1e-12);
    }

    #[test]
    fn apply_floor_keeps_total() {
        let mut w = vec![0.0, 0.5, 0.5];
        apply_floor(&mut w, [0.0, 0.1, 0.0].into_iter(), 0.01);
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert!(w.iter().all(|&x| x >= 0.01));
    }
}
