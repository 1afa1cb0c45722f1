//! Hexagonal sectored deployments.

use serde::{Deserialize, Serialize};

use crate::error::RadioError;

/// Boresight azimuths of the three sectors of every site, degrees.
pub const SECTOR_BORESIGHTS: [f64; 3] = [0.0, 120.0, 240.0];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sector {
    pub id: usize,
    pub site: usize,
    pub position: [f64; 2],
    pub boresight_deg: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Topology {
    pub isd: f64,
    pub sites: Vec<[f64; 2]>,
    pub sectors: Vec<Sector>,
    /// Half side of the square deployment region centred on the origin.
    pub half_extent: f64,
}

impl Topology {
    pub fn num_sectors(&self) -> usize {
        self.sectors.len()
    }

    /// Clamps a point into the deployment region.
    pub fn clamp(&self, p: [f64; 2]) -> [f64; 2] {
        let h = self.half_extent;
        [p[0].clamp(-h, h), p[1].clamp(-h, h)]
    }

    pub fn contains(&self, p: [f64; 2]) -> bool {
        p[0].abs() <= self.half_extent && p[1].abs() <= self.half_extent
    }
}

/// Sites on a hex lattice in rings around the origin (1, 7 or 19 sites),
/// ordered ring by ring and counter-clockwise within a ring.
pub fn build_topology(site_count: usize, isd: f64) -> Result<Topology, RadioError> {
    let rings: i32 = match site_count {
        1 => 0,
        7 => 1,
        19 => 2,
        n => return Err(RadioError::UnsupportedLayout(n)),
    };
    if !(isd > 0.0 && isd.is_finite()) {
        return Err(RadioError::InvalidParameter(format!("inter-site distance {isd}")));
    }
    let mut axial: Vec<(i32, i32)> = Vec::new();
    for q in -rings..=rings {
        for r in -rings..=rings {
            if (q + r).abs() <= rings {
                axial.push((q, r));
            }
        }
    }
    let ring = |&(q, r): &(i32, i32)| q.abs().max(r.abs()).max((q + r).abs());
    let pos = |&(q, r): &(i32, i32)| {
        [
            isd * (q as f64 + r as f64 / 2.0),
            isd * (r as f64 * 3f64.sqrt() / 2.0),
        ]
    };
    axial.sort_by(|a, b| {
        let (pa, pb) = (pos(a), pos(b));
        let angle = |p: [f64; 2]| p[1].atan2(p[0]).rem_euclid(std::f64::consts::TAU);
        ring(a)
            .cmp(&ring(b))
            .then(angle(pa).total_cmp(&angle(pb)))
            .then((pa[0].hypot(pa[1])).total_cmp(&pb[0].hypot(pb[1])))
    });
    let sites: Vec<[f64; 2]> = axial.iter().map(pos).collect();
    let sectors = sites
        .iter()
        .enumerate()
        .flat_map(|(s, &p)| {
            SECTOR_BORESIGHTS.iter().enumerate().map(move |(k, &a)| Sector {
                id: 3 * s + k,
                site: s,
                position: p,
                boresight_deg: a,
            })
        })
        .collect();
    Ok(Topology {
        isd,
        sites,
        sectors,
        half_extent: (rings as f64 + 0.5) * isd,
    })
}
