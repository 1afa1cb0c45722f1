//! Scenario and sweep configuration files (TOML, or the equivalent JSON).
//!
//! ```toml
//! weight_floor_delta = 1e-6
//!
//! [topology]
//! base_stations = ["bs1", "bs2"]
//!
//! [slices.s1]
//! shares = { bs1 = 0.25, bs2 = 0.5 }   # omitted stations: 0
//! excess = 0.0
//! alpha = 1.0
//! overall = 0.75                         # optional, checked against shares + excess
//!
//! [[users]]
//! id = "u1"          # optional
//! slice = "s1"
//! bs = "bs1"
//! rate_mbps = 1.0    # c_u
//! gamma_mbps = 0.0   # minimum rate
//! phi = 0.5          # priority
//! weight = 0.5       # optional bid, used by one-shot allocation
//! ```
//!
//! Slices are indexed in id order; users and stations in file order.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{ConfigError, ScenarioIssue, ValidationErrors};
use crate::experiments::SweepConfig;
use crate::model::{ScenarioSpec, SliceProfile, UserRecord};

/// Rates in files are Mbps; the engine works in bits/s.
pub const MBPS: f64 = 1e6;

pub const DEFAULT_WEIGHT_FLOOR: f64 = 1e-6;

fn default_floor() -> f64 {
    DEFAULT_WEIGHT_FLOOR
}

fn default_alpha() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TopologySection {
    pub base_stations: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SliceSection {
    #[serde(default)]
    pub shares: BTreeMap<String, f64>,
    #[serde(default)]
    pub excess: f64,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default)]
    pub overall: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UserSection {
    #[serde(default)]
    pub id: Option<String>,
    pub slice: String,
    pub bs: String,
    pub rate_mbps: f64,
    #[serde(default)]
    pub gamma_mbps: f64,
    #[serde(default)]
    pub phi: f64,
    #[serde(default)]
    pub weight: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default = "default_floor")]
    pub weight_floor_delta: f64,
    pub topology: TopologySection,
    pub slices: BTreeMap<String, SliceSection>,
    #[serde(default)]
    pub users: Vec<UserSection>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Toml,
    Json,
}

impl Format {
    /// `.json` means JSON; anything else is read as TOML.
    pub fn of(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("json") => Format::Json,
            _ => Format::Toml,
        }
    }
}

fn parse<T: for<'de> Deserialize<'de>>(text: &str, format: Format) -> Result<T, ConfigError> {
    match format {
        Format::Toml => toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string())),
        Format::Json => serde_json::from_str(text).map_err(|e| ConfigError::Parse(e.to_string())),
    }
}

fn read(path: &Path) -> Result<String, ConfigError> {
    std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// A scenario plus the optional per-user bids found in the file.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadedScenario {
    pub spec: ScenarioSpec,
    /// Present only when every user carries a `weight`.
    pub weights: Option<Vec<f64>>,
}

impl ScenarioConfig {
    pub fn parse(text: &str, format: Format) -> Result<Self, ConfigError> {
        parse(text, format)
    }

    pub fn from_path(path: &Path) -> Result<Self, ConfigError> {
        Self::parse(&read(path)?, Format::of(path))
    }

    /// Resolves ids to indices. Unknown references are reported together as
    /// scenario issues; share and dimensioning checks happen in validation.
    pub fn to_spec(&self) -> Result<LoadedScenario, ConfigError> {
        let stations = &self.topology.base_stations;
        let bs_index = |id: &str| stations.iter().position(|b| b == id);
        let slice_ids: Vec<&String> = self.slices.keys().collect();
        let mut issues = Vec::new();
        let mut spec = ScenarioSpec {
            base_stations: stations.clone(),
            weight_floor: self.weight_floor_delta,
            ..Default::default()
        };
        for (id, s) in &self.slices {
            let mut guaranteed = vec![0.0; stations.len()];
            for (bs, &x) in &s.shares {
                match bs_index(bs) {
                    Some(b) => guaranteed[b] = x,
                    None => issues.push(ScenarioIssue::DanglingReference {
                        user: format!("slice {id}"),
                        kind: "base station",
                        target: bs.clone(),
                    }),
                }
            }
            let mut profile = SliceProfile::new(id.clone(), guaranteed, s.excess, s.alpha);
            if let Some(o) = s.overall {
                profile.overall = o;
            }
            spec.slices.push(profile);
        }
        let mut weights = Vec::new();
        for (k, u) in self.users.iter().enumerate() {
            let id = u.id.clone().unwrap_or_else(|| format!("u{k}"));
            let slice = slice_ids.iter().position(|s| **s == u.slice);
            let bs = bs_index(&u.bs);
            if slice.is_none() {
                issues.push(ScenarioIssue::DanglingReference {
                    user: id.clone(),
                    kind: "slice",
                    target: u.slice.clone(),
                });
            }
            if bs.is_none() {
                issues.push(ScenarioIssue::DanglingReference {
                    user: id.clone(),
                    kind: "base station",
                    target: u.bs.clone(),
                });
            }
            weights.push(u.weight);
            if let (Some(slice), Some(bs)) = (slice, bs) {
                spec.users.push(UserRecord {
                    id,
                    slice,
                    bs,
                    capacity: u.rate_mbps * MBPS,
                    min_rate: u.gamma_mbps * MBPS,
                    priority: u.phi,
                });
            }
        }
        if !issues.is_empty() {
            return Err(ValidationErrors(issues).into());
        }
        let weights = weights.iter().copied().collect::<Option<Vec<f64>>>();
        Ok(LoadedScenario { spec, weights })
    }
}

pub fn load_scenario(path: &Path) -> Result<LoadedScenario, ConfigError> {
    ScenarioConfig::from_path(path)?.to_spec()
}

/// Sweep settings; omitted keys keep their desk-scale defaults.
pub fn load_sweep(path: &Path) -> Result<SweepConfig, ConfigError> {
    parse(&read(path)?, Format::of(path))
}
