//! Small-slice check: when a slice's budget is tiny relative to every other
//! station load, its GREET weights are within a `(1+ε)` factor of its best
//! response.

use crate::allocation::BidState;
use crate::error::GameError;
use crate::game::best_response::{best_response, BrOptions};
use crate::model::{TrafficClass, ValidatedScenario};
use crate::policy::{build_aggregate_view, greet_share_round};

#[derive(Debug, Clone)]
pub struct EpsilonReport {
    /// `w^g_u / w^br_u`, aligned with `users_of(v)`.
    pub ratios: Vec<f64>,
    /// The ratio furthest from 1 (in log scale).
    pub worst_ratio: f64,
    /// `max_b s^v / l^{−v}_b` over stations hosting the slice.
    pub load_ratio: f64,
}

pub fn verify_epsilon_best_response(
    sc: &ValidatedScenario,
    v: usize,
    bids: &BidState,
    eps: f64,
    opts: &BrOptions,
) -> Result<EpsilonReport, GameError> {
    let users = sc.users_of(v);
    let elastic = users.iter().all(|&u| sc.class(u) == TrafficClass::Elastic);
    let inelastic = users.iter().all(|&u| sc.class(u) == TrafficClass::Inelastic);
    if !(elastic || inelastic) {
        return Err(GameError::NotCovered { slice: v });
    }
    let mut load_ratio: f64 = 0.0;
    for b in 0..sc.num_stations() {
        if sc.is_active(v, b) {
            load_ratio = load_ratio.max(sc.overall_share(v) / bids.others(v, b));
        }
    }
    if load_ratio >= eps {
        return Err(GameError::InvalidInput(format!(
            "slice {v} is not small: s/l_others = {load_ratio} ≥ {eps}"
        )));
    }
    let greet = greet_share_round(sc, v, &build_aggregate_view(sc, bids, v))?;
    let br = best_response(sc, v, bids, opts)?;
    let ratios: Vec<f64> = greet.iter().zip(&br.weights).map(|(g, b)| g / b).collect();
    let mut worst = 1.0f64;
    for (i, &r) in ratios.iter().enumerate() {
        if !(r > 1.0 / (1.0 + eps) && r < 1.0 + eps) {
            return Err(GameError::BoundViolated { user: users[i], ratio: r });
        }
        if r.ln().abs() > worst.ln().abs() {
            worst = r;
        }
    }
    Ok(EpsilonReport {
        ratios,
        worst_ratio: worst,
        load_ratio,
    })
}
