//! Shared scenario builders and random instance generators for integration tests.
#![allow(dead_code)]

use greet_core::{ScenarioSpec, SliceProfile, ValidatedScenario};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Three slices on three stations whose best responses chase each other.
/// User order: 1a, 1b, 2b, 2c, 3c, 3a.
pub fn cyclic_three_slice(eps: f64, floor: f64) -> ValidatedScenario {
    let mut spec = ScenarioSpec::new(3);
    spec.weight_floor = floor;
    spec.add_slice(SliceProfile::new("1", vec![0.75, 0.0, 0.0], eps, 1.0));
    spec.add_slice(SliceProfile::new("2", vec![0.0, 0.75, 0.0], eps, 1.0));
    spec.add_slice(SliceProfile::new("3", vec![0.0, 0.0, 0.75], eps, 1.0));
    spec.add_user(0, 0, 1.0, 0.75, 0.0);
    spec.add_user(0, 1, 1.0, 0.0, 1.0);
    spec.add_user(1, 1, 1.0, 0.75, 0.0);
    spec.add_user(1, 2, 1.0, 0.0, 1.0);
    spec.add_user(2, 2, 1.0, 0.75, 0.0);
    spec.add_user(2, 0, 1.0, 0.0, 1.0);
    spec.validate().expect("valid scenario")
}

/// Two slices, two stations: an inelastic user needing a quarter of station
/// `a` and an elastic user at `b`, per slice. User order: 1a, 1b, 2a, 2b.
pub fn two_slice_decay(floor: f64) -> ValidatedScenario {
    let mut spec = ScenarioSpec::new(2);
    spec.weight_floor = floor;
    spec.add_slice(SliceProfile::new("1", vec![0.5, 0.0], 0.5, 1.0));
    spec.add_slice(SliceProfile::new("2", vec![0.5, 0.0], 0.5, 1.0));
    spec.add_user(0, 0, 1.0, 0.25, 0.0);
    spec.add_user(0, 1, 1.0, 0.0, 1.0);
    spec.add_user(1, 0, 1.0, 0.25, 0.0);
    spec.add_user(1, 1, 1.0, 0.0, 1.0);
    spec.validate().expect("valid scenario")
}

/// Random column of guaranteed shares with `Σ ≤ 1`.
pub fn random_shares(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
    let total: f64 = raw.iter().sum::<f64>() / rng.random_range(0.3..1.0);
    raw.iter().map(|x| x / total).collect()
}

#[derive(Debug, Clone)]
pub struct Gen {
    pub slices: (usize, usize),
    pub stations: (usize, usize),
    pub users_per_slice: (usize, usize),
    pub p_inelastic: f64,
    pub p_adaptive: f64,
    /// Cap on every per-(slice, station) requirement.
    pub f_max: f64,
    pub alphas: Vec<f64>,
    pub zero_guarantees: bool,
    pub max_users: usize,
}

impl Default for Gen {
    fn default() -> Self {
        Gen {
            slices: (2, 4),
            stations: (1, 5),
            users_per_slice: (1, 5),
            p_inelastic: 0.3,
            p_adaptive: 0.2,
            f_max: 0.3,
            alphas: vec![0.5, 1.0, 2.0],
            zero_guarantees: false,
            max_users: usize::MAX,
        }
    }
}

impl Gen {
    /// A valid, well-dimensioned scenario (`s^v_b ≥ f̲^v_b`).
    pub fn sample(&self, rng: &mut impl Rng) -> ValidatedScenario {
        let n_v = rng.random_range(self.slices.0..=self.slices.1);
        let n_b = rng.random_range(self.stations.0..=self.stations.1);
        let mut spec = ScenarioSpec::new(n_b);
        let mut req = vec![vec![0.0; n_b]; n_v];
        let mut members: Vec<Vec<(usize, f64, f64, f64)>> = vec![Vec::new(); n_v];
        let mut total_users = 0;
        for v in 0..n_v {
            let n_u = rng.random_range(self.users_per_slice.0..=self.users_per_slice.1);
            for _ in 0..n_u {
                if total_users >= self.max_users {
                    break;
                }
                total_users += 1;
                let b = rng.random_range(0..n_b);
                let c = rng.random_range(1.0..10.0);
                let x: f64 = rng.random();
                let (mut gamma, mut phi) = (0.0, rng.random_range(0.1..1.0));
                if x < self.p_inelastic + self.p_adaptive {
                    let f = rng.random_range(0.01..self.f_max);
                    let column: f64 = (0..n_v).map(|x| req[x][b]).sum();
                    if req[v][b] + f <= self.f_max && column + f <= 0.9 {
                        req[v][b] += f;
                        gamma = f * c;
                        if x < self.p_inelastic {
                            phi = 0.0;
                        }
                    }
                }
                members[v].push((b, c, gamma, phi));
            }
        }
        // Guarantees: at least the requirement, plus random headroom where room.
        let mut guaranteed = req.clone();
        if !self.zero_guarantees {
            for b in 0..n_b {
                let used: f64 = (0..n_v).map(|v| req[v][b]).sum();
                let extra = random_shares(rng, n_v);
                for v in 0..n_v {
                    guaranteed[v][b] += extra[v] * (1.0 - used);
                }
            }
        }
        for v in 0..n_v {
            let alpha = self.alphas[rng.random_range(0..self.alphas.len())];
            let excess = rng.random_range(0.05..1.0);
            spec.add_slice(SliceProfile::new(format!("s{v}"), guaranteed[v].clone(), excess, alpha));
            let phi_sum: f64 = members[v].iter().map(|m| m.3).sum();
            for &(b, c, gamma, phi) in &members[v] {
                let p = if phi_sum > 0.0 { phi / phi_sum } else { 0.0 };
                spec.add_user(v, b, c, gamma, p);
            }
        }
        spec.validate().expect("generator produces valid scenarios")
    }
}
