//! Share mapping for the reservation and share-based benchmarks.

use crate::error::ExperimentError;
use crate::model::Grid;

/// Shares handed to the benchmarks.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkShares {
    /// Reservation `ŝ^v_b`.
    pub reserved: Grid<f64>,
    /// Share-based `s̃^v` (equal to the GREET overall share).
    pub overall: Vec<f64>,
}

/// Balanced fill: `min(cap_b, level)` with `Σ = total`. Returns the per-station
/// amounts; `total` must not exceed `Σ cap_b`.
pub fn water_fill(caps: &[f64], total: f64) -> Vec<f64> {
    if total <= 0.0 {
        return vec![0.0; caps.len()];
    }
    let mut order: Vec<usize> = (0..caps.len()).collect();
    order.sort_by(|&a, &b| caps[a].total_cmp(&caps[b]).then(a.cmp(&b)));
    let mut out = vec![0.0; caps.len()];
    let mut left = total;
    let mut rest = caps.len();
    for &b in &order {
        let level = left / rest as f64;
        let x = caps[b].min(level);
        out[b] = x;
        left -= x;
        rest -= 1;
    }
    out
}

/// Guaranteed rows are copied; the elastic excesses are water-filled over the
/// station headroom `1 − Σ_guaranteed s^v_b` and split in proportion to `e^v`.
///
/// `guaranteed` is `V × B`; `excess[v]` is `e^v`; `elastic[v]` marks elastic slices.
pub fn map_benchmark_shares(
    guaranteed: &Grid<f64>,
    excess: &[f64],
    elastic: &[bool],
) -> Result<BenchmarkShares, ExperimentError> {
    let (n_v, n_b) = (guaranteed.rows(), guaranteed.cols());
    let headroom: Vec<f64> = (0..n_b)
        .map(|b| (1.0 - (0..n_v).filter(|&v| !elastic[v]).map(|v| guaranteed.get(v, b)).sum::<f64>()).max(0.0))
        .collect();
    let total: f64 = (0..n_v).filter(|&v| elastic[v]).map(|v| excess[v]).sum();
    let room: f64 = headroom.iter().sum();
    if total > room * (1.0 + 1e-12) {
        return Err(ExperimentError::InfeasibleMapping { total, headroom: room });
    }
    let fill = water_fill(&headroom, total.min(room));
    let mut reserved = Grid::zeros(n_v, n_b);
    for v in 0..n_v {
        for b in 0..n_b {
            let x = if elastic[v] {
                if total > 0.0 {
                    fill[b] * excess[v] / total
                } else {
                    0.0
                }
            } else {
                guaranteed.get(v, b)
            };
            reserved.set(v, b, x);
        }
    }
    let overall = (0..n_v).map(|v| guaranteed.row_sum(v) + excess[v]).collect();
    Ok(BenchmarkShares { reserved, overall })
}
