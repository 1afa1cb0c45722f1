//! Slice classes, scenario families and dimensioning from radio traces.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, ExperimentError};
use crate::experiments::dimension::{dimension_share, McOptions};
use crate::model::Grid;
use crate::radio::{simulate, HotspotParams, MobilityModel, RadioConfig, RadioTrace, RwpParams, UserGroup};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ServiceClass {
    /// Minimum rates, dimensioned guaranteed shares, no excess.
    Guaranteed,
    /// No minimum rates, no guarantees, excess only.
    Elastic,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SliceClassConfig {
    pub id: String,
    pub class: ServiceClass,
    /// `γ_u` for every user, bits/s (0 for elastic slices).
    pub min_rate: f64,
    /// Guaranteed users carry priority 0 (pure minimum-rate traffic).
    pub inelastic: bool,
    pub users: usize,
    pub mobility: MobilityModel,
    /// Slices with equal keys walk on the same hotspot map.
    pub map_key: u64,
}

/// Scenario presets: two guaranteed and two elastic slices throughout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    /// Guaranteed slices clustered, elastic slices uniform.
    Baseline,
    /// Everyone walks uniformly.
    Uniform,
    /// Everyone clusters around the same hotspots.
    Aligned,
    /// Every slice clusters around its own hotspots.
    Orthogonal,
    /// Baseline with the second guaranteed slice purely inelastic.
    Mixed,
}

impl Family {
    pub const ALL: [Family; 5] = [
        Family::Baseline,
        Family::Uniform,
        Family::Aligned,
        Family::Orthogonal,
        Family::Mixed,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::Baseline => "baseline",
            Family::Uniform => "uniform",
            Family::Aligned => "aligned",
            Family::Orthogonal => "orthogonal",
            Family::Mixed => "mixed",
        }
    }

    pub fn slices(self, users: usize, min_rate: f64) -> Vec<SliceClassConfig> {
        let rwp = MobilityModel::RandomWaypoint(RwpParams::default());
        let hot = MobilityModel::ClusteredHotspot(HotspotParams::default());
        let spec = |k: usize| -> (MobilityModel, u64) {
            let guaranteed = k < 2;
            match self {
                Family::Baseline | Family::Mixed if guaranteed => (hot.clone(), 1),
                Family::Baseline | Family::Mixed | Family::Uniform => (rwp.clone(), 0),
                Family::Aligned => (hot.clone(), 1),
                Family::Orthogonal => (hot.clone(), 1 + k as u64),
            }
        };
        (0..4)
            .map(|k| {
                let (mobility, map_key) = spec(k);
                let guaranteed = k < 2;
                SliceClassConfig {
                    id: if guaranteed { format!("g{}", k + 1) } else { format!("e{}", k - 1) },
                    class: if guaranteed { ServiceClass::Guaranteed } else { ServiceClass::Elastic },
                    min_rate: if guaranteed { min_rate } else { 0.0 },
                    inelastic: self == Family::Mixed && k == 1,
                    users,
                    mobility,
                    map_key,
                }
            })
            .collect()
    }
}

impl std::fmt::Display for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Everything that is fixed per (family, seed): trace and guaranteed shares.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub family: Family,
    pub seed: u64,
    pub slices: Vec<SliceClassConfig>,
    /// First global user index of every slice.
    pub offsets: Vec<usize>,
    pub trace: RadioTrace,
    /// `s^v_b` for guaranteed slices (zero rows for elastic ones).
    pub guaranteed: Grid<f64>,
    /// Stations whose dimensioned shares summed above 1 and were scaled down.
    pub scaled_stations: Vec<usize>,
}

impl Prepared {
    pub fn slice_of(&self, user: usize) -> usize {
        self.offsets.partition_point(|&o| o <= user) - 1
    }

    pub fn num_users(&self) -> usize {
        self.slices.iter().map(|s| s.users).sum()
    }
}

/// Simulates the trace and dimensions the guaranteed shares on it: `λ^v_b` is
/// the mean number of covered slice-`v` users at `b`; the requirement sample
/// pools `γ/c_u` over all covered user-epochs of the slice.
pub fn prepare(
    family: Family,
    slices: Vec<SliceClassConfig>,
    radio: &RadioConfig,
    epochs: usize,
    p_max: f64,
    draws: usize,
    seed: u64,
) -> Result<Prepared, Error> {
    if epochs == 0 {
        return Err(ExperimentError::Setup("zero epochs".into()).into());
    }
    let groups: Vec<UserGroup> = slices
        .iter()
        .map(|s| UserGroup {
            count: s.users,
            model: s.mobility.clone(),
            map_key: s.map_key,
        })
        .collect();
    let trace = simulate(radio, &groups, epochs, seed)?;
    let mut offsets = Vec::with_capacity(slices.len());
    let mut next = 0;
    for s in &slices {
        offsets.push(next);
        next += s.users;
    }
    let n_b = trace.num_sectors;
    let n_v = slices.len();
    let mut jobs = Vec::new();
    for (v, s) in slices.iter().enumerate() {
        if s.class != ServiceClass::Guaranteed || s.min_rate <= 0.0 {
            continue;
        }
        let mut counts = vec![0usize; n_b];
        let mut sample = Vec::new();
        for e in 0..epochs {
            for u in offsets[v]..offsets[v] + s.users {
                let c = trace.capacity[e][u];
                if c > 0.0 {
                    counts[trace.sector[e][u]] += 1;
                    sample.push((s.min_rate / c).min(1.0));
                }
            }
        }
        for (b, &n) in counts.iter().enumerate() {
            jobs.push((v, b, n as f64 / epochs as f64, sample.clone()));
        }
    }
    let shares: Vec<(usize, usize, f64)> = jobs
        .par_iter()
        .map(|(v, b, lambda, sample)| {
            let opts = McOptions {
                draws,
                seed,
                stream: (*v as u64) << 32 | *b as u64,
            };
            dimension_share(*lambda, sample, p_max, &opts)
                .map(|s| (*v, *b, s))
                .map_err(|e| match e {
                    ExperimentError::Undimensionable { required, .. } => ExperimentError::Undimensionable {
                        context: format!("slice {} at station {b}", slices[*v].id),
                        required,
                    },
                    other => other,
                })
        })
        .collect::<Result<_, _>>()?;
    let mut guaranteed = Grid::zeros(n_v, n_b);
    for (v, b, s) in shares {
        guaranteed.set(v, b, s);
    }
    let mut scaled_stations = Vec::new();
    for b in 0..n_b {
        let total = guaranteed.column_sum(b);
        if total > 1.0 {
            scaled_stations.push(b);
            for v in 0..n_v {
                guaranteed.set(v, b, guaranteed.get(v, b) / total);
            }
        }
    }
    Ok(Prepared {
        family,
        seed,
        slices,
        offsets,
        trace,
        guaranteed,
        scaled_stations,
    })
}
