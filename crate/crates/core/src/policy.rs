//! The GREET share policy: per-slice weights from minimum-rate requirements and
//! priorities, computed from three aggregates about the other slices only.

use crate::allocation::{BidState, StationAggregate};
use crate::error::PolicyError;
use crate::model::ValidatedScenario;

/// The three per-station aggregates slice `v` may observe.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregateView {
    stations: Vec<StationAggregate>,
}

impl AggregateView {
    pub fn new(stations: Vec<StationAggregate>) -> Self {
        AggregateView { stations }
    }

    pub fn station(&self, b: usize) -> &StationAggregate {
        &self.stations[b]
    }

    pub fn stations(&self) -> &[StationAggregate] {
        &self.stations
    }

    pub fn others_bid(&self) -> Vec<f64> {
        self.stations.iter().map(|a| a.others_bid).collect()
    }

    pub fn others_excess(&self) -> Vec<f64> {
        self.stations.iter().map(|a| a.others_excess).collect()
    }

    pub fn others_guarded(&self) -> Vec<f64> {
        self.stations.iter().map(|a| a.others_guarded).collect()
    }
}

pub fn build_aggregate_view(sc: &ValidatedScenario, bids: &BidState, v: usize) -> AggregateView {
    let stations = (0..sc.num_stations())
        .map(|b| StationAggregate::from_bids(&bids.local().column(b), &sc.shares().column(b), v))
        .collect();
    AggregateView { stations }
}

/// Minimum weights for one slice.
#[derive(Debug, Clone, PartialEq)]
pub struct MinWeightProfile {
    /// `w̲_u`, aligned with `users_of(v)`.
    pub weights: Vec<f64>,
    /// `f̲^v_b` per station.
    pub requirement: Vec<f64>,
    /// `⎣l⎦^v_b = Σ_{u ∈ U^v_b} w̲_u` per station.
    pub min_bid: Vec<f64>,
    /// Stations whose requirement diverged (only populated under
    /// [`DivergencePolicy::Drop`]).
    pub divergent: Vec<usize>,
}

/// Smallest local bid at which the slice's fraction reaches `req`, given the
/// others' aggregate at that station.
///
/// When nobody else bids (`l^{−v}_b = 0`) any positive bid wins the whole
/// station; the closed form would return 0 and leave the station idle, so the
/// requirement itself is used as the bid.
pub fn min_local_bid(req: f64, share: f64, agg: &StationAggregate) -> Option<f64> {
    if req <= 0.0 {
        return Some(0.0);
    }
    if req >= 1.0 {
        return None;
    }
    if agg.others_bid + req <= 1.0 {
        if agg.others_bid == 0.0 {
            return Some(req);
        }
        return Some(req / (1.0 - req) * agg.others_bid);
    }
    if share >= req {
        return Some(req);
    }
    let denom = 1.0 - req - agg.others_guarded;
    if denom <= 0.0 {
        return None;
    }
    Some(share + (req - share) * agg.others_excess / denom)
}

/// How to treat a station whose requirement cannot be met by any bid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DivergencePolicy {
    /// Surface [`PolicyError::DivergentRequirement`].
    #[default]
    Fail,
    /// Give up the minimum at that station: its users get no minimum weight
    /// and only share the surplus.
    Drop,
}

pub fn min_weights(sc: &ValidatedScenario, v: usize, view: &AggregateView) -> Result<MinWeightProfile, PolicyError> {
    min_weights_with(sc, v, view, DivergencePolicy::Fail)
}

pub fn min_weights_with(
    sc: &ValidatedScenario,
    v: usize,
    view: &AggregateView,
    policy: DivergencePolicy,
) -> Result<MinWeightProfile, PolicyError> {
    let n_b = sc.num_stations();
    let mut requirement = vec![0.0; n_b];
    let mut min_bid = vec![0.0; n_b];
    let mut divergent = Vec::new();
    for b in 0..n_b {
        let req = sc.requirement(v, b);
        requirement[b] = req;
        match min_local_bid(req, sc.share(v, b), view.station(b)) {
            Some(l) => min_bid[b] = l,
            None => match policy {
                DivergencePolicy::Fail => return Err(PolicyError::DivergentRequirement { slice: v, bs: b }),
                DivergencePolicy::Drop => divergent.push(b),
            },
        }
    }
    let weights = sc
        .users_of(v)
        .iter()
        .map(|&u| {
            let b = sc.user(u).bs;
            let req = requirement[b];
            if req > 0.0 && !divergent.contains(&b) {
                sc.min_fraction(u) / req * min_bid[b]
            } else {
                0.0
            }
        })
        .collect();
    Ok(MinWeightProfile {
        weights,
        requirement,
        min_bid,
        divergent,
    })
}

/// One GREET round for slice `v`: weights aligned with `users_of(v)`.
pub fn greet_share_round(sc: &ValidatedScenario, v: usize, view: &AggregateView) -> Result<Vec<f64>, PolicyError> {
    greet_share_round_with(sc, v, view, DivergencePolicy::Fail)
}

pub fn greet_share_round_with(
    sc: &ValidatedScenario,
    v: usize,
    view: &AggregateView,
    policy: DivergencePolicy,
) -> Result<Vec<f64>, PolicyError> {
    let profile = min_weights_with(sc, v, view, policy)?;
    Ok(distribute(sc, v, &profile.weights))
}

/// Surplus or greedy admission on top of the minimum weights.
pub fn distribute(sc: &ValidatedScenario, v: usize, min_w: &[f64]) -> Vec<f64> {
    let users = sc.users_of(v);
    let budget = sc.overall_share(v);
    let needed: f64 = min_w.iter().sum();
    if needed <= budget {
        let surplus = budget - needed;
        return users
            .iter()
            .zip(min_w)
            .map(|(&u, &m)| m + sc.user(u).priority * surplus)
            .collect();
    }
    let mut order: Vec<usize> = (0..users.len()).collect();
    order.sort_by(|&a, &b| min_w[a].total_cmp(&min_w[b]).then(users[a].cmp(&users[b])));
    let mut out = vec![0.0; users.len()];
    let mut used = 0.0;
    for i in order {
        if used + min_w[i] > budget {
            break;
        }
        used += min_w[i];
        out[i] = min_w[i];
    }
    out
}
