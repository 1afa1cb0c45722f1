//! Sufficient condition for geometric convergence of GREET dynamics.

use serde::Serialize;

use crate::model::ValidatedScenario;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ContractionReport {
    /// Largest aggregate requirement `max_{v,b} f̲^v_b`.
    pub f_max: f64,
    /// `1 / (2|V| − 1)`.
    pub threshold: f64,
    /// `2(|V| − 1) f_max / (1 − f_max)`.
    pub xi: f64,
    /// `f_max < threshold`, which implies `ξ < 1`.
    pub guaranteed: bool,
}

impl ContractionReport {
    pub fn from_parts(num_slices: usize, f_max: f64) -> Self {
        let v = num_slices.max(1) as f64;
        let threshold = 1.0 / (2.0 * v - 1.0);
        let xi = if f_max >= 1.0 {
            f64::INFINITY
        } else {
            2.0 * (v - 1.0) * f_max / (1.0 - f_max)
        };
        ContractionReport {
            f_max,
            threshold,
            xi,
            guaranteed: f_max < threshold,
        }
    }
}

pub fn contraction_report(sc: &ValidatedScenario) -> ContractionReport {
    let mut f_max: f64 = 0.0;
    for v in 0..sc.num_slices() {
        for b in 0..sc.num_stations() {
            f_max = f_max.max(sc.requirement(v, b));
        }
    }
    ContractionReport::from_parts(sc.num_slices(), f_max)
}
