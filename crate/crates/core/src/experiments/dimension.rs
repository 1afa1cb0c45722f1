//! Monte-Carlo share dimensioning for guaranteed-service slices.
//!
//! The load at a station is a compound Poisson sum `Σ_{i ≤ N} f̲_i` with
//! `N ~ Poisson(λ)` and `f̲_i` drawn from an empirical sample. The dimensioned
//! share is the smallest `s` with `P(load > s) ≤ P_max`.

use rand::Rng;
use rand_distr::{Distribution, Poisson};

use crate::error::ExperimentError;
use crate::rng::{self, Purpose};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McOptions {
    pub draws: usize,
    pub seed: u64,
    /// Stream id, so that different (slice, station) pairs draw independently.
    pub stream: u64,
}

impl Default for McOptions {
    fn default() -> Self {
        McOptions {
            draws: 100_000,
            seed: 0,
            stream: 0,
        }
    }
}

fn loads(lambda: f64, samples: &[f64], opts: &McOptions) -> Result<Vec<f64>, ExperimentError> {
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(ExperimentError::Setup(format!("Poisson mean {lambda}")));
    }
    if opts.draws == 0 {
        return Err(ExperimentError::Setup("zero Monte-Carlo draws".into()));
    }
    if lambda == 0.0 {
        return Ok(vec![0.0; opts.draws]);
    }
    if samples.is_empty() {
        return Err(ExperimentError::Setup("empty requirement sample".into()));
    }
    let poisson = Poisson::new(lambda).map_err(|e| ExperimentError::Setup(e.to_string()))?;
    let mut r = rng::stream(opts.seed, opts.stream, 0, Purpose::Dimensioning);
    Ok((0..opts.draws)
        .map(|_| {
            let n = poisson.sample(&mut r) as usize;
            (0..n).map(|_| samples[r.random_range(0..samples.len())]).sum()
        })
        .collect())
}

/// Smallest share whose overflow probability is at most `p_max`.
pub fn dimension_share(lambda: f64, samples: &[f64], p_max: f64, opts: &McOptions) -> Result<f64, ExperimentError> {
    if !(p_max > 0.0 && p_max < 1.0) {
        return Err(ExperimentError::Setup(format!("outage target {p_max}")));
    }
    let mut l = loads(lambda, samples, opts)?;
    l.sort_by(f64::total_cmp);
    // Up to `allowed` draws may exceed the share: take the (allowed+1)-th largest.
    let allowed = (p_max * l.len() as f64).floor() as usize;
    let s = l[l.len() - 1 - allowed.min(l.len() - 1)];
    if s > 1.0 {
        return Err(ExperimentError::Undimensionable {
            context: format!("λ = {lambda}, P_max = {p_max}"),
            required: s,
        });
    }
    Ok(s)
}

/// Empirical `P(load > share)` on an independent set of draws.
pub fn outage_probability_mc(lambda: f64, samples: &[f64], share: f64, opts: &McOptions) -> Result<f64, ExperimentError> {
    let l = loads(lambda, samples, opts)?;
    Ok(l.iter().filter(|&&x| x > share).count() as f64 / l.len() as f64)
}
