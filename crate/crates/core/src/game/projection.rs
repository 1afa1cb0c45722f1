//! Euclidean projection onto `{x : x_i ≥ lo_i, Σ x_i ≤ cap}`.

/// Projects `y` onto the capped simplex with per-coordinate floors.
///
/// Panics if the set is empty (`Σ lo > cap` beyond rounding).
pub fn project_capped_floor(y: &[f64], lo: &[f64], cap: f64) -> Vec<f64> {
    assert_eq!(y.len(), lo.len());
    let floor_sum: f64 = lo.iter().sum();
    assert!(
        floor_sum <= cap + 1e-9 * cap.abs().max(1.0),
        "empty feasible set: floors {floor_sum} > cap {cap}"
    );
    let clamped: Vec<f64> = y.iter().zip(lo).map(|(&a, &l)| a.max(l)).collect();
    if clamped.iter().sum::<f64>() <= cap {
        return clamped;
    }
    // Find τ > 0 with Σ max(y_i − τ, lo_i) = cap. Coordinate i is free while
    // τ < y_i − lo_i.
    let n = y.len();
    let mut order: Vec<usize> = (0..n).collect();
    let bp: Vec<f64> = y.iter().zip(lo).map(|(&a, &l)| a - l).collect();
    order.sort_by(|&a, &b| bp[b].total_cmp(&bp[a]));
    let mut free_sum = 0.0;
    let mut fixed_sum = floor_sum;
    let mut tau = 0.0;
    for (k, &i) in order.iter().enumerate() {
        free_sum += y[i];
        fixed_sum -= lo[i];
        let cand = (free_sum + fixed_sum - cap) / (k + 1) as f64;
        let next = order.get(k + 1).map_or(f64::NEG_INFINITY, |&j| bp[j]);
        if cand >= next {
            tau = cand;
            break;
        }
    }
    y.iter().zip(lo).map(|(&a, &l)| (a - tau).max(l)).collect()
}
