//! Desk-scale downlink simulator: sectored hex layout, channel model,
//! SINR → MCS → achievable rate, mobility, association, traces.
//!
//! Every user evolves on its own `(seed, user, epoch)` RNG streams, so users
//! are simulated in parallel and traces are bit-identical across runs.

pub mod channel;
pub mod mcs;
pub mod mobility;
pub mod topology;
pub mod trace;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use channel::{associate, channel_gain_db, link, pathloss_db, sinr_db, ChannelDraw, ChannelParams, Link};
pub use mcs::{McsEntry, McsTable};
pub use mobility::{step_mobility, HotspotMap, HotspotParams, MobilityModel, MobilityState, RwpParams, Walk};
pub use topology::{build_topology, Sector, Topology};
pub use trace::{RadioTrace, TraceRow};

use crate::error::RadioError;
use crate::rng::{self, Purpose};

/// Epoch length: `c_u` and association are constant within one epoch.
pub const EPOCH_S: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RadioConfig {
    pub sites: usize,
    pub isd_m: f64,
    pub channel: ChannelParams,
    pub mcs: McsTable,
}

impl Default for RadioConfig {
    fn default() -> Self {
        RadioConfig {
            sites: 7,
            isd_m: 20.0,
            channel: ChannelParams::default(),
            mcs: McsTable::default(),
        }
    }
}

impl RadioConfig {
    pub fn topology(&self) -> Result<Topology, RadioError> {
        self.channel.validate()?;
        // Re-validate a table that may have come straight from a config file.
        McsTable::new(self.mcs.entries().to_vec(), self.mcs.bandwidth_hz())?;
        build_topology(self.sites, self.isd_m)
    }
}

/// Users sharing a mobility model; groups with the same `map_key` walk on the
/// same hotspot map.
#[derive(Debug, Clone, PartialEq)]
pub struct UserGroup {
    pub count: usize,
    pub model: MobilityModel,
    pub map_key: u64,
}

/// Simulates `epochs` one-second epochs for all groups (users numbered group
/// by group).
pub fn simulate(cfg: &RadioConfig, groups: &[UserGroup], epochs: usize, seed: u64) -> Result<RadioTrace, RadioError> {
    let topo = cfg.topology()?;
    let mut maps: Vec<(u64, HotspotMap)> = Vec::new();
    for g in groups {
        g.model.validate()?;
        if let MobilityModel::ClusteredHotspot(p) = &g.model {
            if !maps.iter().any(|(k, _)| *k == g.map_key) {
                maps.push((g.map_key, HotspotMap::generate(&topo, p, seed, g.map_key)));
            }
        }
    }
    let users: Vec<(&UserGroup, Option<&HotspotMap>)> = groups
        .iter()
        .flat_map(|g| {
            let map = maps.iter().find(|(k, _)| *k == g.map_key).map(|(_, m)| m);
            std::iter::repeat_n((g, map), g.count)
        })
        .collect();
    let n_b = topo.num_sectors();
    let per_user: Vec<Vec<Link>> = users
        .par_iter()
        .enumerate()
        .map(|(u, (g, map))| {
            let walk = Walk { model: &g.model, map: *map, topo: &topo };
            let mut state = walk.initial(&mut rng::stream(seed, u as u64, 0, Purpose::Placement));
            (0..epochs)
                .map(|e| {
                    if e > 0 {
                        state = step_mobility(&walk, &state, EPOCH_S, seed, u as u64, e as u64);
                    }
                    let draw = ChannelDraw::sample(&cfg.channel, n_b, seed, u as u64, e as u64);
                    link(&cfg.channel, &topo, &cfg.mcs, state.position, &draw)
                })
                .collect()
        })
        .collect();
    let sector = (0..epochs).map(|e| per_user.iter().map(|l| l[e].sector).collect()).collect();
    let capacity = (0..epochs).map(|e| per_user.iter().map(|l| l[e].capacity).collect()).collect();
    Ok(RadioTrace {
        num_sectors: n_b,
        sector,
        capacity,
    })
}
