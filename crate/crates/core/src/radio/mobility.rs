//! User mobility: random waypoint and a clustered-hotspot walk.
//!
//! The hotspot walk approximates SLAW by its one property that matters here:
//! users linger around a few fixed clusters. Most legs stay inside the current
//! cluster; the rest jump to another cluster chosen with probability
//! decreasing in distance (`∝ d^−a`, the least-action flavour of SLAW).

use std::f64::consts::TAU;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::RadioError;
use crate::radio::topology::Topology;
use crate::rng::{self, Purpose};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RwpParams {
    pub speed_min_mps: f64,
    pub speed_max_mps: f64,
    pub max_pause_s: f64,
}

impl Default for RwpParams {
    fn default() -> Self {
        RwpParams {
            speed_min_mps: 0.5,
            speed_max_mps: 1.5,
            max_pause_s: 2.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HotspotParams {
    pub clusters: usize,
    pub radius_m: f64,
    /// Probability that the next waypoint stays in the current cluster.
    pub p_intra: f64,
    pub distance_exponent: f64,
    pub speed_min_mps: f64,
    pub speed_max_mps: f64,
    pub max_pause_s: f64,
}

impl Default for HotspotParams {
    fn default() -> Self {
        HotspotParams {
            clusters: 4,
            radius_m: 5.0,
            p_intra: 0.9,
            distance_exponent: 2.0,
            speed_min_mps: 0.5,
            speed_max_mps: 1.5,
            max_pause_s: 30.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "kebab-case")]
pub enum MobilityModel {
    RandomWaypoint(RwpParams),
    ClusteredHotspot(HotspotParams),
}

impl MobilityModel {
    pub fn validate(&self) -> Result<(), RadioError> {
        let (lo, hi, pause) = match self {
            MobilityModel::RandomWaypoint(p) => (p.speed_min_mps, p.speed_max_mps, p.max_pause_s),
            MobilityModel::ClusteredHotspot(p) => {
                if p.clusters == 0 || !(p.radius_m > 0.0) || !(0.0..=1.0).contains(&p.p_intra) {
                    return Err(RadioError::InvalidParameter(format!("hotspot parameters {p:?}")));
                }
                (p.speed_min_mps, p.speed_max_mps, p.max_pause_s)
            }
        };
        if !(lo > 0.0 && hi >= lo && hi.is_finite()) || !(pause >= 0.0 && pause.is_finite()) {
            return Err(RadioError::InvalidParameter(format!("speeds [{lo}, {hi}], pause {pause}")));
        }
        Ok(())
    }

    fn speed(&self, rng: &mut impl Rng) -> f64 {
        let (lo, hi) = match self {
            MobilityModel::RandomWaypoint(p) => (p.speed_min_mps, p.speed_max_mps),
            MobilityModel::ClusteredHotspot(p) => (p.speed_min_mps, p.speed_max_mps),
        };
        if hi > lo {
            rng.random_range(lo..hi)
        } else {
            lo
        }
    }

    fn pause(&self, rng: &mut impl Rng) -> f64 {
        let max = match self {
            MobilityModel::RandomWaypoint(p) => p.max_pause_s,
            MobilityModel::ClusteredHotspot(p) => p.max_pause_s,
        };
        if max > 0.0 {
            rng.random_range(0.0..max)
        } else {
            0.0
        }
    }
}

/// Fixed cluster centres shared by every user walking on the same map.
#[derive(Debug, Clone, PartialEq)]
pub struct HotspotMap {
    pub centers: Vec<[f64; 2]>,
    pub radius: f64,
}

impl HotspotMap {
    /// Centres uniform in the region, kept one radius away from its border.
    pub fn generate(topo: &Topology, params: &HotspotParams, seed: u64, key: u64) -> Self {
        let mut r = rng::stream(seed, key, 0, Purpose::Hotspots);
        let h = (topo.half_extent - params.radius_m).max(0.0);
        let centers = (0..params.clusters)
            .map(|_| {
                if h > 0.0 {
                    [r.random_range(-h..h), r.random_range(-h..h)]
                } else {
                    [0.0, 0.0]
                }
            })
            .collect();
        HotspotMap {
            centers,
            radius: params.radius_m,
        }
    }

    fn point_in(&self, c: usize, rng: &mut impl Rng) -> [f64; 2] {
        let r = self.radius * rng.random::<f64>().sqrt();
        let t = TAU * rng.random::<f64>();
        [self.centers[c][0] + r * t.cos(), self.centers[c][1] + r * t.sin()]
    }

    /// Index of a cluster whose disk contains `p`.
    pub fn cluster_at(&self, p: [f64; 2]) -> Option<usize> {
        self.centers
            .iter()
            .position(|c| (p[0] - c[0]).hypot(p[1] - c[1]) <= self.radius * (1.0 + 1e-12))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MobilityState {
    pub position: [f64; 2],
    pub waypoint: [f64; 2],
    pub speed: f64,
    pub pause_left: f64,
    /// Cluster of the current waypoint (hotspot walk only).
    pub cluster: Option<usize>,
}

/// Where a user walks: the model plus the hotspot map for clustered walks.
#[derive(Debug, Clone, Copy)]
pub struct Walk<'a> {
    pub model: &'a MobilityModel,
    pub map: Option<&'a HotspotMap>,
    pub topo: &'a Topology,
}

impl Walk<'_> {
    fn uniform_point(&self, rng: &mut impl Rng) -> [f64; 2] {
        let h = self.topo.half_extent;
        [rng.random_range(-h..h), rng.random_range(-h..h)]
    }

    fn map(&self) -> &HotspotMap {
        self.map.expect("clustered walk needs a hotspot map")
    }

    pub fn initial(&self, rng: &mut impl Rng) -> MobilityState {
        match self.model {
            MobilityModel::RandomWaypoint(_) => MobilityState {
                position: self.uniform_point(rng),
                waypoint: self.uniform_point(rng),
                speed: self.model.speed(rng),
                pause_left: 0.0,
                cluster: None,
            },
            MobilityModel::ClusteredHotspot(_) => {
                let map = self.map();
                let c = rng.random_range(0..map.centers.len());
                MobilityState {
                    position: self.topo.clamp(map.point_in(c, rng)),
                    waypoint: self.topo.clamp(map.point_in(c, rng)),
                    speed: self.model.speed(rng),
                    pause_left: 0.0,
                    cluster: Some(c),
                }
            }
        }
    }

    fn next_waypoint(&self, state: &mut MobilityState, rng: &mut impl Rng) {
        match self.model {
            MobilityModel::RandomWaypoint(_) => state.waypoint = self.uniform_point(rng),
            MobilityModel::ClusteredHotspot(p) => {
                let map = self.map();
                let here = state.cluster.unwrap_or(0);
                let n = map.centers.len();
                let c = if n == 1 || rng.random::<f64>() < p.p_intra {
                    here
                } else {
                    let weights: Vec<f64> = (0..n)
                        .map(|j| {
                            if j == here {
                                0.0
                            } else {
                                let (a, b) = (map.centers[here], map.centers[j]);
                                (a[0] - b[0]).hypot(a[1] - b[1]).max(1e-9).powf(-p.distance_exponent)
                            }
                        })
                        .collect();
                    let total: f64 = weights.iter().sum();
                    let mut x = rng.random::<f64>() * total;
                    let mut pick = if here == 0 { 1 } else { 0 };
                    for (j, &w) in weights.iter().enumerate() {
                        if w > 0.0 {
                            pick = j;
                            if x < w {
                                break;
                            }
                            x -= w;
                        }
                    }
                    pick
                };
                state.cluster = Some(c);
                state.waypoint = self.topo.clamp(map.point_in(c, rng));
            }
        }
        state.speed = self.model.speed(rng);
    }

    /// Advances the walk by `dt` seconds.
    pub fn step(&self, state: &MobilityState, dt: f64, rng: &mut impl Rng) -> MobilityState {
        let mut s = state.clone();
        let mut left = dt.max(0.0);
        // Bounded: every iteration either exhausts `left` or completes a leg.
        for _ in 0..10_000 {
            if left <= 0.0 {
                break;
            }
            if s.pause_left > 0.0 {
                let t = s.pause_left.min(left);
                s.pause_left -= t;
                left -= t;
                continue;
            }
            let (dx, dy) = (s.waypoint[0] - s.position[0], s.waypoint[1] - s.position[1]);
            let d = dx.hypot(dy);
            let reach = d / s.speed;
            if reach > left {
                let k = left * s.speed / d;
                s.position = [s.position[0] + k * dx, s.position[1] + k * dy];
                left = 0.0;
            } else {
                s.position = s.waypoint;
                left -= reach;
                s.pause_left = self.model.pause(rng);
                self.next_waypoint(&mut s, rng);
            }
        }
        s
    }
}

/// One step from the `(seed, user, epoch)` mobility stream.
pub fn step_mobility(walk: &Walk<'_>, state: &MobilityState, dt: f64, seed: u64, user: u64, epoch: u64) -> MobilityState {
    if dt == 0.0 {
        return state.clone();
    }
    let mut r = rng::stream(seed, user, epoch, Purpose::Mobility);
    walk.step(state, dt, &mut r)
}
