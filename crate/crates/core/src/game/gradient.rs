//! Objective evaluation and analytic gradients with respect to user weights.
//!
//! With `g^v_b = f^v_b / l^v_b` a user's rate is `r_u = c_u w_u g^v_b`, so for a
//! weighted objective `Σ_u a_u U_u(r_u)` and `m_u = a_u φ_u F'(r_u − γ_u) c_u`:
//!
//! `∂/∂w_k = m_k g^{v_k}_b + Σ_{v'} J[v'][v_k] S^{v'}_b / l^{v'}_b − S^{v_k}_b f^{v_k}_b / (l^{v_k}_b)²`
//!
//! where `S^v_b = Σ_{u ∈ U^v_b} m_u w_u` and `J` is the station Jacobian of the
//! GREET rule (right derivatives at kinks).

use crate::allocation::{greet_allocate, split_to_users, station_jacobian, BidState, SliceAllocation, UserAllocation};
use crate::error::AllocationError;
use crate::model::{alpha_fair_prime, user_utility, Grid, Utility, UtilityParams, ValidatedScenario};

/// Relative slack under which a rate counts as meeting its minimum. The
/// minimum-bid construction lands exactly on `γ_u`, which floating point may
/// miss by an ulp.
pub const RATE_TOL: f64 = 1e-9;

/// Whether `rate` meets `min_rate` (within [`RATE_TOL`]).
#[inline]
pub fn meets(rate: f64, min_rate: f64) -> bool {
    min_rate <= 0.0 || rate >= min_rate * (1.0 - RATE_TOL)
}

/// Utility for reporting: inelastic users that meet their minimum contribute 0
/// even when they sit exactly on it; everything else follows `user_utility`.
pub fn served_utility(sc: &ValidatedScenario, u: usize, rate: f64) -> Utility {
    let p = sc.params(u);
    if p.priority == 0.0 {
        return if meets(rate, p.min_rate) { Utility::ZERO } else { Utility::NegInfinity };
    }
    user_utility(rate, &p)
}

#[derive(Debug, Clone)]
pub struct Evaluation {
    pub slices: SliceAllocation,
    pub users: UserAllocation,
}

/// GREET allocation followed by the proportional user split.
pub fn evaluate(sc: &ValidatedScenario, bids: &BidState) -> Result<Evaluation, AllocationError> {
    let slices = greet_allocate(sc, bids)?;
    let users = split_to_users(sc, bids, &slices)?;
    Ok(Evaluation { slices, users })
}

/// `Σ_{u ∈ U^v} U_u(r_u)` under GREET + proportional split.
pub fn slice_objective(sc: &ValidatedScenario, v: usize, weights: &[f64]) -> Utility {
    let bids = BidState::new(sc, weights.to_vec());
    match evaluate(sc, &bids) {
        Ok(e) => sc
            .users_of(v)
            .iter()
            .map(|&u| served_utility(sc, u, e.users.rates[u]))
            .sum(),
        Err(_) => Utility::NegInfinity,
    }
}

/// Social objective `Σ_v s^v Σ_u U_u(r_u)`.
pub fn social_objective(sc: &ValidatedScenario, weights: &[f64]) -> Utility {
    let bids = BidState::new(sc, weights.to_vec());
    match evaluate(sc, &bids) {
        Ok(e) => (0..sc.num_users())
            .map(|u| sc.overall_share(sc.user(u).slice) * served_utility(sc, u, e.users.rates[u]))
            .sum(),
        Err(_) => Utility::NegInfinity,
    }
}

/// Gradient of `Σ_u coeff[u] U_u(r_u)` with respect to every user weight.
/// Returns `None` when the objective is not finite at `bids`.
pub fn weighted_gradient(sc: &ValidatedScenario, bids: &BidState, coeff: &[f64]) -> Option<Vec<f64>> {
    weighted_gradient_with(sc, bids, coeff, |u| sc.params(u))
}

/// [`weighted_gradient`] with per-user utility parameters supplied by `params`
/// (used to attach barrier terms to inelastic users).
pub fn weighted_gradient_with(
    sc: &ValidatedScenario,
    bids: &BidState,
    coeff: &[f64],
    params: impl Fn(usize) -> UtilityParams,
) -> Option<Vec<f64>> {
    let eval = evaluate(sc, bids).ok()?;
    let (n_v, n_b) = (sc.num_slices(), sc.num_stations());
    let mut m = vec![0.0; sc.num_users()];
    for u in 0..sc.num_users() {
        if coeff[u] == 0.0 {
            continue;
        }
        let p = params(u);
        let r = eval.users.rates[u];
        if !meets(r, p.min_rate) {
            return None;
        }
        if p.priority == 0.0 {
            continue;
        }
        let x = r - p.min_rate;
        if x <= 0.0 {
            return None;
        }
        m[u] = coeff[u] * p.priority * alpha_fair_prime(x, p.alpha) * sc.user(u).capacity;
    }
    let mut s = Grid::zeros(n_v, n_b);
    for u in 0..sc.num_users() {
        let user = sc.user(u);
        s.add_to(user.slice, user.bs, m[u] * bids.weights()[u]);
    }
    let mut grad = vec![0.0; sc.num_users()];
    for b in 0..n_b {
        let column = bids.local().column(b);
        let jac = station_jacobian(&column, &sc.shares().column(b));
        for v in 0..n_v {
            let l = column[v];
            if l == 0.0 {
                // Weights of a zero-bid slice are only meaningful for the
                // direction of growth: g is the right-limit f'(0).
                let g0 = jac.get(v, v);
                for &k in sc.users_at(v, b) {
                    grad[k] = m[k] * g0;
                }
                continue;
            }
            let f = eval.slices.fractions.get(v, b);
            let g = f / l;
            let mut cross = 0.0;
            for vp in 0..n_v {
                let lp = column[vp];
                if lp > 0.0 {
                    cross += jac.get(vp, v) * s.get(vp, b) / lp;
                }
            }
            let own = s.get(v, b) * f / (l * l);
            for &k in sc.users_at(v, b) {
                grad[k] = m[k] * g + cross - own;
            }
        }
    }
    Some(grad)
}

/// Gradient of slice `v`'s utility with respect to its own weights
/// (aligned with `users_of(v)`).
pub fn slice_gradient(sc: &ValidatedScenario, v: usize, weights: &[f64]) -> Option<Vec<f64>> {
    let coeff: Vec<f64> = (0..sc.num_users())
        .map(|u| if sc.user(u).slice == v { 1.0 } else { 0.0 })
        .collect();
    let bids = BidState::new(sc, weights.to_vec());
    let g = weighted_gradient(sc, &bids, &coeff)?;
    Some(sc.users_of(v).iter().map(|&u| g[u]).collect())
}

/// Gradient of the social objective with respect to all weights.
pub fn social_gradient(sc: &ValidatedScenario, weights: &[f64]) -> Option<Vec<f64>> {
    let coeff: Vec<f64> = (0..sc.num_users())
        .map(|u| sc.overall_share(sc.user(u).slice))
        .collect();
    weighted_gradient(sc, &BidState::new(sc, weights.to_vec()), &coeff)
}
