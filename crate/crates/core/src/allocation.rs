//! GREET slice-level allocation, user-level splits and the two benchmark rules.
//!
//! At station `b` with total bid `l_b`:
//! * `l_b ≤ 1` — proportional: `f^v = l^v / l_b`;
//! * `l_b > 1` — a slice bidding below its guarantee gets its bid, every other
//!   slice gets its guarantee plus a share of the leftover proportional to its
//!   excess bid `Δ^v = (l^v − s^v)_+`.
//!
//! Sums always run over slices in ascending index so results are bit-identical
//! regardless of caller.

use crate::error::AllocationError;
use crate::model::{Grid, ValidatedScenario};

/// Per-user weights together with the per-(slice, station) local bids they induce.
#[derive(Debug, Clone, PartialEq)]
pub struct BidState {
    weights: Vec<f64>,
    local: Grid<f64>,
}

impl BidState {
    pub fn new(sc: &ValidatedScenario, weights: Vec<f64>) -> Self {
        assert_eq!(weights.len(), sc.num_users(), "one weight per user");
        let mut local = Grid::zeros(sc.num_slices(), sc.num_stations());
        for v in 0..sc.num_slices() {
            for b in 0..sc.num_stations() {
                let l: f64 = sc.users_at(v, b).iter().map(|&u| weights[u]).sum();
                local.set(v, b, l);
            }
        }
        BidState { weights, local }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn into_weights(self) -> Vec<f64> {
        self.weights
    }

    /// `l^v_b` for every (v, b).
    pub fn local(&self) -> &Grid<f64> {
        &self.local
    }

    pub fn local_bid(&self, v: usize, b: usize) -> f64 {
        self.local.get(v, b)
    }

    /// `l_b`.
    pub fn total(&self, b: usize) -> f64 {
        self.local.column_sum(b)
    }

    /// `l^{−v}_b`, summed directly over the other slices.
    pub fn others(&self, v: usize, b: usize) -> f64 {
        (0..self.local.rows())
            .filter(|&k| k != v)
            .map(|k| self.local.get(k, b))
            .sum()
    }

    /// `Δ^v_b = (l^v_b − s^v_b)_+`.
    pub fn excess(&self, sc: &ValidatedScenario, v: usize, b: usize) -> f64 {
        (self.local.get(v, b) - sc.share(v, b)).max(0.0)
    }

    /// `Σ_{u ∈ U^v} w_u`.
    pub fn spend(&self, sc: &ValidatedScenario, v: usize) -> f64 {
        sc.users_of(v).iter().map(|&u| self.weights[u]).sum()
    }

    /// Whether every slice respects its overall budget (1e-9 absolute).
    pub fn within_budget(&self, sc: &ValidatedScenario) -> bool {
        (0..sc.num_slices()).all(|v| self.spend(sc, v) <= sc.overall_share(v) + 1e-9)
    }

    /// Replaces the weights of slice `v`'s users (in `users_of(v)` order).
    pub fn with_slice_weights(&self, sc: &ValidatedScenario, v: usize, w: &[f64]) -> BidState {
        let mut weights = self.weights.clone();
        for (&u, &x) in sc.users_of(v).iter().zip(w) {
            weights[u] = x;
        }
        BidState::new(sc, weights)
    }
}

/// Slice-level fractions `f^v_b` plus the stations left idle (`l_b = 0`).
#[derive(Debug, Clone, PartialEq)]
pub struct SliceAllocation {
    pub fractions: Grid<f64>,
    pub idle: Vec<usize>,
}

/// Per-user fractions `f_u` and rates `r_u = f_u c_u`.
#[derive(Debug, Clone, PartialEq)]
pub struct UserAllocation {
    pub fractions: Vec<f64>,
    pub rates: Vec<f64>,
}

/// GREET at one station. `bids[v]` and `shares[v]` are `l^v_b` and `s^v_b`.
///
/// With no bids at all the station has nothing to divide: this returns
/// `DegenerateResource` with `bs = usize::MAX` (the index is unknown here);
/// [`greet_allocate`] reports such stations as idle instead.
pub fn greet_allocate_station(bids: &[f64], shares: &[f64]) -> Result<Vec<f64>, AllocationError> {
    greet_station_inner(bids, shares, usize::MAX)
}

fn greet_station_inner(bids: &[f64], shares: &[f64], bs: usize) -> Result<Vec<f64>, AllocationError> {
    debug_assert_eq!(bids.len(), shares.len());
    let total: f64 = bids.iter().sum();
    if total == 0.0 {
        return Err(AllocationError::DegenerateResource { bs });
    }
    if total <= 1.0 {
        return Ok(bids.iter().map(|&l| l / total).collect());
    }
    let mut excess_sum = 0.0;
    let mut guarded = 0.0;
    for (&l, &s) in bids.iter().zip(shares) {
        excess_sum += (l - s).max(0.0);
        guarded += l.min(s);
    }
    if excess_sum <= 0.0 {
        return Err(AllocationError::NoExcessBid { bs });
    }
    let leftover = 1.0 - guarded;
    Ok(bids
        .iter()
        .zip(shares)
        .map(|(&l, &s)| {
            if l < s {
                l
            } else {
                s + (l - s) / excess_sum * leftover
            }
        })
        .collect())
}

/// GREET over all stations. Idle stations get all-zero fractions.
pub fn greet_allocate(sc: &ValidatedScenario, bids: &BidState) -> Result<SliceAllocation, AllocationError> {
    let (n_v, n_b) = (sc.num_slices(), sc.num_stations());
    let mut fractions = Grid::zeros(n_v, n_b);
    let mut idle = Vec::new();
    for b in 0..n_b {
        let column = bids.local().column(b);
        let shares = sc.shares().column(b);
        match greet_station_inner(&column, &shares, b) {
            Ok(f) => {
                for (v, x) in f.into_iter().enumerate() {
                    fractions.set(v, b, x);
                }
            }
            Err(AllocationError::DegenerateResource { .. }) => idle.push(b),
            Err(e) => return Err(e),
        }
    }
    Ok(SliceAllocation { fractions, idle })
}

/// What one slice sees of the others at a single station.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StationAggregate {
    /// `l^{−v}_b`.
    pub others_bid: f64,
    /// `Σ_{v'≠v} Δ^{v'}_b`.
    pub others_excess: f64,
    /// `Σ_{v'≠v} min(s^{v'}_b, l^{v'}_b)`.
    pub others_guarded: f64,
}

impl StationAggregate {
    pub fn from_bids(bids: &[f64], shares: &[f64], v: usize) -> Self {
        let mut agg = StationAggregate::default();
        for (k, (&l, &s)) in bids.iter().zip(shares).enumerate() {
            if k == v {
                continue;
            }
            agg.others_bid += l;
            agg.others_excess += (l - s).max(0.0);
            agg.others_guarded += l.min(s);
        }
        agg
    }
}

/// The fraction a slice with guarantee `share` obtains at a station when it bids
/// `l` against the aggregate `agg` — the GREET rule seen from one slice.
pub fn own_fraction(l: f64, share: f64, agg: &StationAggregate) -> f64 {
    let total = l + agg.others_bid;
    if total == 0.0 {
        return 0.0;
    }
    if total <= 1.0 {
        return l / total;
    }
    if l < share {
        return l;
    }
    let excess = l - share;
    let denom = excess + agg.others_excess;
    if denom <= 0.0 {
        return share;
    }
    share + excess / denom * (1.0 - share - agg.others_guarded)
}

/// One-sided slopes `(left, right)` of [`own_fraction`] at `l`.
///
/// The curve is piecewise smooth with kinks at `l = 1 − l^{−v}` (regime switch)
/// and, when overloaded, at `l = s` (guarantee exhausted).
pub fn own_fraction_slopes(l: f64, share: f64, agg: &StationAggregate) -> (f64, f64) {
    let right = slope_in_regime(l, share, agg, Side::Right);
    let left = if l > 0.0 {
        slope_in_regime(l, share, agg, Side::Left)
    } else {
        right
    };
    (left, right)
}

#[derive(Clone, Copy, PartialEq)]
enum Side {
    Left,
    Right,
}

fn slope_in_regime(l: f64, share: f64, agg: &StationAggregate, side: Side) -> f64 {
    let big_l = agg.others_bid;
    let total = l + big_l;
    let underloaded = match side {
        Side::Left => total <= 1.0,
        Side::Right => total < 1.0,
    };
    if underloaded {
        if total == 0.0 {
            return 0.0;
        }
        return big_l / (total * total);
    }
    let guarded = match side {
        Side::Left => l <= share,
        Side::Right => l < share,
    };
    if guarded {
        return 1.0;
    }
    let denom = l - share + agg.others_excess;
    if denom <= 0.0 {
        return 0.0;
    }
    (1.0 - share - agg.others_guarded) * agg.others_excess / (denom * denom)
}

/// Right-derivative Jacobian `J[v'][v] = ∂f^{v'}_b / ∂l^v_b` at one station.
pub fn station_jacobian(bids: &[f64], shares: &[f64]) -> Grid<f64> {
    let n = bids.len();
    let mut jac = Grid::zeros(n, n);
    let total: f64 = bids.iter().sum();
    if total < 1.0 {
        if total == 0.0 {
            return jac;
        }
        for vp in 0..n {
            for v in 0..n {
                let kron = if vp == v { total } else { 0.0 };
                jac.set(vp, v, (kron - bids[vp]) / (total * total));
            }
        }
        return jac;
    }
    let mut excess_sum = 0.0;
    let mut guarded = 0.0;
    for (&l, &s) in bids.iter().zip(shares) {
        excess_sum += (l - s).max(0.0);
        guarded += l.min(s);
    }
    let leftover = 1.0 - guarded;
    let in_excess: Vec<bool> = bids.iter().zip(shares).map(|(&l, &s)| l >= s).collect();
    for vp in 0..n {
        for v in 0..n {
            let d = if !in_excess[vp] {
                if vp == v {
                    1.0
                } else {
                    0.0
                }
            } else if excess_sum == 0.0 {
                // Every bid sits exactly at its guarantee and l_b = 1: nothing is
                // left to redistribute, so raising a bid gains nothing.
                0.0
            } else {
                let delta = bids[vp] - shares[vp];
                let d_delta = if vp == v { 1.0 } else { 0.0 };
                let d_total = if in_excess[v] { 1.0 } else { 0.0 };
                let d_left = if in_excess[v] { 0.0 } else { -1.0 };
                (d_delta * leftover + delta * d_left) / excess_sum
                    - delta * leftover * d_total / (excess_sum * excess_sum)
            };
            jac.set(vp, v, d);
        }
    }
    jac
}

/// Proportional user split: `f_u = w_u / l^v_b · f^v_b`.
pub fn split_to_users(
    sc: &ValidatedScenario,
    bids: &BidState,
    slices: &SliceAllocation,
) -> Result<UserAllocation, AllocationError> {
    let mut fractions = vec![0.0; sc.num_users()];
    for v in 0..sc.num_slices() {
        for b in 0..sc.num_stations() {
            let f = slices.fractions.get(v, b);
            if f == 0.0 {
                continue;
            }
            let l = bids.local_bid(v, b);
            if l == 0.0 {
                return Err(AllocationError::ZeroBidSlice { slice: v, bs: b });
            }
            for &u in sc.users_at(v, b) {
                fractions[u] = bids.weights()[u] / l * f;
            }
        }
    }
    Ok(with_rates(sc, fractions))
}

fn with_rates(sc: &ValidatedScenario, fractions: Vec<f64>) -> UserAllocation {
    let rates = fractions
        .iter()
        .enumerate()
        .map(|(u, &f)| f * sc.user(u).capacity)
        .collect();
    UserAllocation { fractions, rates }
}

/// Relative slack when admitting minima into a slice fraction that equals their
/// sum only up to rounding.
const ADMIT_TOL: f64 = 1e-12;

/// Requirement-aware intra-slice split.
///
/// Each user first receives its minimum fraction `f̲_u`; what remains of
/// `f^v_b` is shared in proportion to priorities (to requirements when the
/// station hosts only inelastic users). When `f^v_b` cannot cover everyone,
/// users are admitted by increasing `f̲_u` (ties by index) and the remainder
/// goes to the admitted ones.
pub fn split_with_requirements(sc: &ValidatedScenario, slices: &SliceAllocation) -> UserAllocation {
    let mut fractions = vec![0.0; sc.num_users()];
    for v in 0..sc.num_slices() {
        for b in 0..sc.num_stations() {
            let users = sc.users_at(v, b);
            if users.is_empty() {
                continue;
            }
            let f = slices.fractions.get(v, b);
            let need: f64 = users.iter().map(|&u| sc.min_fraction(u)).sum();
            let cap = f * (1.0 + ADMIT_TOL);
            let admitted: Vec<usize> = if need <= cap {
                users.to_vec()
            } else {
                let mut order = users.to_vec();
                order.sort_by(|&a, &c| sc.min_fraction(a).total_cmp(&sc.min_fraction(c)).then(a.cmp(&c)));
                let mut used = 0.0;
                let mut granted = Vec::new();
                for u in order {
                    let m = sc.min_fraction(u);
                    if used + m <= cap {
                        used += m;
                        granted.push(u);
                    } else {
                        break;
                    }
                }
                granted.sort_unstable();
                granted
            };
            if admitted.is_empty() {
                // Nobody can be served at its minimum; share by requirement.
                let total = need.max(f64::MIN_POSITIVE);
                for &u in users {
                    fractions[u] = f * sc.min_fraction(u) / total;
                }
                continue;
            }
            let base: f64 = admitted.iter().map(|&u| sc.min_fraction(u)).sum();
            if base > f {
                // Within rounding of the minima: scale them down by an ulp or so.
                for &u in &admitted {
                    fractions[u] = f * sc.min_fraction(u) / base;
                }
                continue;
            }
            let rest = f - base;
            let phi: f64 = admitted.iter().map(|&u| sc.user(u).priority).sum();
            for &u in &admitted {
                let m = sc.min_fraction(u);
                let share = if phi > 0.0 {
                    sc.user(u).priority / phi
                } else if base > 0.0 {
                    m / base
                } else {
                    1.0 / admitted.len() as f64
                };
                fractions[u] = m + rest * share;
            }
        }
    }
    with_rates(sc, fractions)
}

/// Reservation benchmark: each station is shared among its *active* slices
/// (at least one associated user) in proportion to reserved shares `ŝ^v_b`.
pub fn gps_allocate(active: &Grid<bool>, reserved: &Grid<f64>) -> Result<SliceAllocation, AllocationError> {
    let (n_v, n_b) = (reserved.rows(), reserved.cols());
    let mut fractions = Grid::zeros(n_v, n_b);
    let mut idle = Vec::new();
    for b in 0..n_b {
        let any_active = (0..n_v).any(|v| active.get(v, b));
        if !any_active {
            idle.push(b);
            continue;
        }
        let total: f64 = (0..n_v)
            .filter(|&v| active.get(v, b))
            .map(|v| reserved.get(v, b))
            .sum();
        if total <= 0.0 {
            return Err(AllocationError::DegenerateResource { bs: b });
        }
        for v in 0..n_v {
            if active.get(v, b) {
                fractions.set(v, b, reserved.get(v, b) / total);
            }
        }
    }
    Ok(SliceAllocation { fractions, idle })
}

/// Share-constrained proportional fairness benchmark.
#[derive(Debug, Clone, PartialEq)]
pub struct ScpfAllocation {
    /// `w̃^v = s̃^v / |U^v|` for every user of slice `v` (0 for empty slices).
    pub user_weight: Vec<f64>,
    pub slices: SliceAllocation,
}

pub fn scpf_allocate(overall: &[f64], census: &Grid<usize>) -> ScpfAllocation {
    let (n_v, n_b) = (census.rows(), census.cols());
    let user_weight: Vec<f64> = (0..n_v)
        .map(|v| {
            let n: usize = census.row(v).iter().sum();
            if n == 0 {
                0.0
            } else {
                overall[v] / n as f64
            }
        })
        .collect();
    let mut fractions = Grid::zeros(n_v, n_b);
    let mut idle = Vec::new();
    for b in 0..n_b {
        let total: f64 = (0..n_v).map(|v| census.get(v, b) as f64 * user_weight[v]).sum();
        if total <= 0.0 {
            idle.push(b);
            continue;
        }
        for v in 0..n_v {
            fractions.set(v, b, census.get(v, b) as f64 * user_weight[v] / total);
        }
    }
    ScpfAllocation {
        user_weight,
        slices: SliceAllocation { fractions, idle },
    }
}
