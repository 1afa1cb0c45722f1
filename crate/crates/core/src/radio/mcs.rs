//! SINR → modulation and coding scheme → achievable rate.

use serde::{Deserialize, Serialize};

use crate::error::RadioError;

/// One MCS level: minimum average SINR and its spectral efficiency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McsEntry {
    pub threshold_db: f64,
    /// bits/s/Hz.
    pub efficiency: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McsTable {
    entries: Vec<McsEntry>,
    bandwidth_hz: f64,
}

/// CQI-style default: 15 levels from QPSK to 64QAM.
const DEFAULT_LEVELS: [(f64, f64); 15] = [
    (-6.7, 0.1523),
    (-4.7, 0.2344),
    (-2.3, 0.3770),
    (0.2, 0.6016),
    (2.4, 0.8770),
    (4.3, 1.1758),
    (5.9, 1.4766),
    (8.1, 1.9141),
    (10.3, 2.4063),
    (11.7, 2.7305),
    (14.1, 3.3223),
    (16.3, 3.9023),
    (18.7, 4.5234),
    (21.0, 5.1152),
    (22.7, 5.5547),
];

pub const DEFAULT_BANDWIDTH_HZ: f64 = 10e6;

impl Default for McsTable {
    fn default() -> Self {
        let entries = DEFAULT_LEVELS
            .iter()
            .map(|&(threshold_db, efficiency)| McsEntry { threshold_db, efficiency })
            .collect();
        McsTable {
            entries,
            bandwidth_hz: DEFAULT_BANDWIDTH_HZ,
        }
    }
}

impl McsTable {
    pub fn new(entries: Vec<McsEntry>, bandwidth_hz: f64) -> Result<Self, RadioError> {
        if entries.is_empty() {
            return Err(RadioError::InvalidParameter("empty MCS table".into()));
        }
        if !(bandwidth_hz > 0.0 && bandwidth_hz.is_finite()) {
            return Err(RadioError::InvalidParameter(format!("bandwidth {bandwidth_hz}")));
        }
        for e in &entries {
            if !e.threshold_db.is_finite() || !(e.efficiency > 0.0 && e.efficiency.is_finite()) {
                return Err(RadioError::InvalidParameter(format!("MCS entry {e:?}")));
            }
        }
        for w in entries.windows(2) {
            if w[1].threshold_db <= w[0].threshold_db {
                return Err(RadioError::InvalidParameter("MCS thresholds must increase strictly".into()));
            }
            if w[1].efficiency < w[0].efficiency {
                return Err(RadioError::InvalidParameter("MCS efficiencies must not decrease".into()));
            }
        }
        Ok(McsTable { entries, bandwidth_hz })
    }

    pub fn entries(&self) -> &[McsEntry] {
        &self.entries
    }

    pub fn bandwidth_hz(&self) -> f64 {
        self.bandwidth_hz
    }

    /// Highest level whose threshold the SINR reaches.
    pub fn select(&self, sinr_db: f64) -> Option<&McsEntry> {
        let k = self.entries.partition_point(|e| e.threshold_db <= sinr_db);
        k.checked_sub(1).map(|i| &self.entries[i])
    }

    /// Achievable rate in bits/s; 0 below the lowest threshold.
    pub fn rate(&self, sinr_db: f64) -> f64 {
        self.select(sinr_db).map_or(0.0, |e| e.efficiency * self.bandwidth_hz)
    }
}
