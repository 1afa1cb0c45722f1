//! Hot paths of the engine on a deterministic mid-size scenario.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use greet_core::game::{default_initial_weights, greet_dynamics, social_optimal_exact, DynamicsOptions};
use greet_core::{
    build_aggregate_view, greet_allocate, greet_share_round, split_with_requirements, BidState, ScenarioSpec,
    SliceProfile, ValidatedScenario,
};

/// `slices` slices over `stations` stations; every slice has one user per
/// station, alternating minimum-rate and elastic users.
fn scenario(slices: usize, stations: usize) -> ValidatedScenario {
    let mut spec = ScenarioSpec::new(stations);
    let share = 0.8 / slices as f64;
    for v in 0..slices {
        spec.add_slice(SliceProfile::new(format!("s{v}"), vec![share; stations], 0.5, 1.0));
    }
    let elastic = stations.div_ceil(2) as f64;
    for v in 0..slices {
        for b in 0..stations {
            // Deterministic spread of capacities in [5, 15) Mbps.
            let c = 5e6 + 1e7 * (((v * 7919 + b * 104_729) % 1000) as f64 / 1000.0);
            if b % 2 == 0 {
                spec.add_user(v, b, c, 0.0, 1.0 / elastic);
            } else {
                spec.add_user(v, b, c, 0.2 * share * c, 0.0);
            }
        }
    }
    spec.validate().expect("bench scenario is valid")
}

fn allocation(c: &mut Criterion) {
    let mut g = c.benchmark_group("greet_allocate");
    for &(v, b) in &[(4, 7), (8, 21), (16, 57)] {
        let sc = scenario(v, b);
        let bids = BidState::new(&sc, default_initial_weights(&sc));
        g.bench_with_input(BenchmarkId::from_parameter(format!("{v}x{b}")), &sc, |bch, sc| {
            bch.iter(|| {
                let f = greet_allocate(sc, &bids).unwrap();
                split_with_requirements(sc, &f)
            })
        });
    }
    g.finish();
}

fn share_round(c: &mut Criterion) {
    let sc = scenario(8, 21);
    let bids = BidState::new(&sc, default_initial_weights(&sc));
    c.bench_function("greet_share_round/8x21", |bch| {
        bch.iter(|| {
            let view = build_aggregate_view(&sc, &bids, 0);
            greet_share_round(&sc, 0, &view).unwrap()
        })
    });
}

fn dynamics(c: &mut Criterion) {
    let sc = scenario(8, 21);
    c.bench_function("greet_dynamics/rr-7/8x21", |bch| {
        bch.iter(|| greet_dynamics(&sc, &DynamicsOptions::default()).unwrap())
    });
    c.bench_function("social_optimal_exact/8x21", |bch| bch.iter(|| social_optimal_exact(&sc).unwrap()));
}

criterion_group!(benches, allocation, share_round, dynamics);
criterion_main!(benches);
