//! Downlink channel: path loss, sectored antenna, shadowing, averaged
//! Rayleigh fading, SINR and association.

use rand::Rng;
use rand_distr::{Distribution, Gamma, Normal};
use serde::{Deserialize, Serialize};

use crate::error::RadioError;
use crate::radio::mcs::McsTable;
use crate::radio::topology::{Sector, Topology};
use crate::rng::{self, Purpose};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ChannelParams {
    pub carrier_ghz: f64,
    pub tx_power_db: f64,
    pub noise_db: f64,
    /// Peak antenna gain, dBi.
    pub antenna_gain_dbi: f64,
    pub beamwidth_deg: f64,
    pub front_to_back_db: f64,
    pub shadowing_std_db: f64,
    /// Rayleigh samples averaged per 1 s epoch (100 Hz).
    pub fading_samples: usize,
    /// Distances are clamped below to this value, metres.
    pub min_distance_m: f64,
}

impl Default for ChannelParams {
    fn default() -> Self {
        ChannelParams {
            carrier_ghz: 2.5,
            tx_power_db: 41.0,
            noise_db: -104.0,
            antenna_gain_dbi: 17.0,
            beamwidth_deg: 70.0,
            front_to_back_db: 20.0,
            shadowing_std_db: 8.0,
            fading_samples: 100,
            min_distance_m: 1.0,
        }
    }
}

impl ChannelParams {
    pub fn validate(&self) -> Result<(), RadioError> {
        let positive = [
            ("carrier_ghz", self.carrier_ghz),
            ("beamwidth_deg", self.beamwidth_deg),
            ("min_distance_m", self.min_distance_m),
        ];
        for (name, x) in positive {
            if !(x > 0.0 && x.is_finite()) {
                return Err(RadioError::InvalidParameter(format!("{name} = {x}")));
            }
        }
        let finite = [
            ("tx_power_db", self.tx_power_db),
            ("noise_db", self.noise_db),
            ("antenna_gain_dbi", self.antenna_gain_dbi),
            ("front_to_back_db", self.front_to_back_db),
        ];
        for (name, x) in finite {
            if !x.is_finite() {
                return Err(RadioError::InvalidParameter(format!("{name} = {x}")));
            }
        }
        if !(self.shadowing_std_db >= 0.0 && self.shadowing_std_db.is_finite()) {
            return Err(RadioError::InvalidParameter(format!("shadowing_std_db = {}", self.shadowing_std_db)));
        }
        if self.fading_samples == 0 {
            return Err(RadioError::InvalidParameter("fading_samples = 0".into()));
        }
        Ok(())
    }
}

pub fn pathloss_db(distance_m: f64, carrier_ghz: f64) -> f64 {
    36.7 * distance_m.log10() + 22.7 + 26.0 * carrier_ghz.log10()
}

/// Parabolic azimuth pattern: `G − min(12 (θ/θ₃)², A_m)`.
pub fn antenna_gain_db(params: &ChannelParams, offset_deg: f64) -> f64 {
    let t = offset_deg / params.beamwidth_deg;
    params.antenna_gain_dbi - (12.0 * t * t).min(params.front_to_back_db)
}

/// Azimuth of `p` seen from the sector, relative to its boresight, in (−180, 180].
pub fn offset_deg(sector: &Sector, p: [f64; 2]) -> f64 {
    let (dx, dy) = (p[0] - sector.position[0], p[1] - sector.position[1]);
    let az = dy.atan2(dx).to_degrees();
    let d = (az - sector.boresight_deg).rem_euclid(360.0);
    if d > 180.0 {
        d - 360.0
    } else {
        d
    }
}

pub fn distance(sector: &Sector, p: [f64; 2], params: &ChannelParams) -> f64 {
    (p[0] - sector.position[0])
        .hypot(p[1] - sector.position[1])
        .max(params.min_distance_m)
}

/// Random channel terms for one user over one epoch, one entry per sector.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelDraw {
    pub shadowing_db: Vec<f64>,
    /// Mean of the Rayleigh power samples, in dB.
    pub fading_db: Vec<f64>,
}

impl ChannelDraw {
    /// No shadowing and unit fading.
    pub fn deterministic(sectors: usize) -> Self {
        ChannelDraw {
            shadowing_db: vec![0.0; sectors],
            fading_db: vec![0.0; sectors],
        }
    }

    /// Draws from the `(seed, user, epoch)` stream. The mean of `n` unit
    /// exponentials is Gamma(n, 1/n).
    pub fn sample(params: &ChannelParams, sectors: usize, seed: u64, user: u64, epoch: u64) -> Self {
        let mut shadow_rng = rng::stream(seed, user, epoch, Purpose::Shadowing);
        let mut fading_rng = rng::stream(seed, user, epoch, Purpose::Fading);
        let normal = Normal::new(0.0, params.shadowing_std_db).expect("validated std");
        let n = params.fading_samples as f64;
        let gamma = Gamma::new(n, 1.0 / n).expect("positive sample count");
        ChannelDraw {
            shadowing_db: (0..sectors).map(|_| normal.sample(&mut shadow_rng)).collect(),
            fading_db: (0..sectors)
                .map(|_| 10.0 * gamma.sample(&mut fading_rng).log10())
                .collect(),
        }
    }
}

/// `G_bu` in dB: antenna gain − path loss − shadowing + averaged fading.
pub fn channel_gain_db(params: &ChannelParams, sector: &Sector, p: [f64; 2], shadowing_db: f64, fading_db: f64) -> f64 {
    antenna_gain_db(params, offset_deg(sector, p)) - pathloss_db(distance(sector, p, params), params.carrier_ghz)
        - shadowing_db
        + fading_db
}

/// Average SINR (dB) from every sector, all sectors transmitting.
pub fn sinr_db(params: &ChannelParams, topo: &Topology, p: [f64; 2], draw: &ChannelDraw) -> Vec<f64> {
    let rx: Vec<f64> = topo
        .sectors
        .iter()
        .map(|s| {
            let g = channel_gain_db(params, s, p, draw.shadowing_db[s.id], draw.fading_db[s.id]);
            10f64.powf((params.tx_power_db + g) / 10.0)
        })
        .collect();
    let total: f64 = rx.iter().sum();
    let noise = 10f64.powf(params.noise_db / 10.0);
    rx.iter()
        .map(|&r| 10.0 * (r / ((total - r).max(0.0) + noise)).log10())
        .collect()
}

/// Strongest-SINR sector, ties to the lowest id.
pub fn associate(sinr: &[f64]) -> usize {
    let mut best = 0;
    for (b, &s) in sinr.iter().enumerate() {
        if s > sinr[best] {
            best = b;
        }
    }
    best
}

/// Serving sector, its SINR and the achievable rate `c_u` (bits/s).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Link {
    pub sector: usize,
    pub sinr_db: f64,
    pub capacity: f64,
}

pub fn link(params: &ChannelParams, topo: &Topology, mcs: &McsTable, p: [f64; 2], draw: &ChannelDraw) -> Link {
    let sinr = sinr_db(params, topo, p, draw);
    let sector = associate(&sinr);
    Link {
        sector,
        sinr_db: sinr[sector],
        capacity: mcs.rate(sinr[sector]),
    }
}

/// Convenience for tests and tools: one Gaussian shadowing sample.
pub fn shadowing_sample(params: &ChannelParams, rng: &mut impl Rng) -> f64 {
    Normal::new(0.0, params.shadowing_std_db).expect("validated std").sample(rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radio::topology::build_topology;

    #[test]
    fn pathloss_values() {
        let expected = 36.7 * 20f64.log10() + 22.7 + 26.0 * 2.5f64.log10();
        assert!((pathloss_db(20.0, 2.5) - expected).abs() < 1e-12);
        assert!((pathloss_db(20.0, 2.5) - 80.80).abs() < 0.01);
        assert_eq!(pathloss_db(1.0, 2.5), 22.7 + 26.0 * 2.5f64.log10());
    }

    #[test]
    fn antenna_pattern() {
        let p = ChannelParams::default();
        assert_eq!(antenna_gain_db(&p, 0.0), 17.0);
        assert!((antenna_gain_db(&p, 35.0) - 14.0).abs() < 1e-12);
        assert_eq!(antenna_gain_db(&p, 180.0), -3.0);
    }

    #[test]
    fn offsets_wrap() {
        let s = Sector { id: 0, site: 0, position: [0.0, 0.0], boresight_deg: 240.0 };
        assert!((offset_deg(&s, [1.0, 0.0]) - 120.0).abs() < 1e-9);
        assert!((offset_deg(&s, [-1.0, -3f64.sqrt()]) - 0.0).abs() < 1e-9);
    }

    #[test]
    fn single_site_is_noise_limited() {
        let params = ChannelParams::default();
        let topo = build_topology(1, 20.0).unwrap();
        let draw = ChannelDraw::deterministic(3);
        // On the boresight of sector 0 the other two sectors still leak; with a
        // single sector there is no interference at all.
        let mut lone = topo.clone();
        lone.sectors.truncate(1);
        let p = [10.0, 0.0];
        let s = sinr_db(&params, &lone, p, &draw);
        let g = 17.0 - pathloss_db(10.0, 2.5);
        assert!((s[0] - (41.0 + g + 104.0)).abs() < 1e-9);
        let l = link(&params, &lone, &McsTable::default(), p, &draw);
        assert_eq!(l.capacity, 5.5547 * 10e6);
        let _ = topo;
    }

    #[test]
    fn symmetric_pair_is_near_zero_db() {
        let params = ChannelParams::default();
        let a = Sector { id: 0, site: 0, position: [-10.0, 0.0], boresight_deg: 0.0 };
        let b = Sector { id: 1, site: 1, position: [10.0, 0.0], boresight_deg: 180.0 };
        let topo = Topology { isd: 20.0, sites: vec![a.position, b.position], sectors: vec![a, b], half_extent: 20.0 };
        let s = sinr_db(&params, &topo, [0.0, 0.0], &ChannelDraw::deterministic(2));
        assert!(s[0].abs() < 1e-6 && s[1].abs() < 1e-6, "{s:?}");
        assert_eq!(associate(&s), 0);
        assert_eq!(McsTable::default().rate(s[0]), 0.3770 * 10e6);
    }

    #[test]
    fn association_matches_scan() {
        let params = ChannelParams::default();
        let topo = build_topology(7, 20.0).unwrap();
        let mcs = McsTable::default();
        for u in 0..200u64 {
            let mut r = rng::stream(3, u, 0, Purpose::Placement);
            let p = [r.random_range(-30.0..30.0), r.random_range(-30.0..30.0)];
            let draw = ChannelDraw::sample(&params, 21, 3, u, 0);
            let sinr = sinr_db(&params, &topo, p, &draw);
            let l = link(&params, &topo, &mcs, p, &draw);
            assert!(sinr.iter().all(|&s| s <= l.sinr_db));
            assert_eq!(sinr.iter().position(|&s| s == l.sinr_db), Some(l.sector));
        }
    }

    #[test]
    fn user_at_site_picks_own_site() {
        let params = ChannelParams::default();
        let topo = build_topology(7, 20.0).unwrap();
        let p = topo.sites[3];
        let s = sinr_db(&params, &topo, [p[0] + 0.5, p[1] + 0.2], &ChannelDraw::deterministic(21));
        assert_eq!(topo.sectors[associate(&s)].site, 3);
    }

    #[test]
    fn shadowing_std() {
        let params = ChannelParams::default();
        let xs: Vec<f64> = (0..10_000u64)
            .map(|e| ChannelDraw::sample(&params, 1, 9, 0, e).shadowing_db[0])
            .collect();
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        let sd = (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (xs.len() - 1) as f64).sqrt();
        assert!((sd - 8.0).abs() <= 0.2, "{sd}");
    }

    #[test]
    fn fading_average_concentrates() {
        let params = ChannelParams::default();
        let d = ChannelDraw::sample(&params, 57, 1, 1, 1);
        // Mean of 100 unit exponentials: std 0.1, so within ±2 dB essentially always.
        assert!(d.fading_db.iter().all(|x| x.abs() < 2.0));
    }
}
