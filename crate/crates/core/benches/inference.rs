//! Benchmarks comparing the rayon-backed default paths against the
//! always-available sequential fallbacks, plus the elimination engine on
//! the full network.
//!
//! Run `cargo bench -p planrec-core` for the parallel build and
//! `cargo bench -p planrec-core --no-default-features` for the sequential
//! baseline (criterion keeps the saved baselines comparable by name).

use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use planrec_core::inference::{
    enumerate_posterior_capped, enumerate_posterior_seq, posterior, DEFAULT_STATE_CAP,
};
use planrec_core::network::Evidence;
use planrec_core::sampling::{forward_sample, forward_sample_seq};
use planrec_core::traffic::{build_traffic_network, names, paper_scenarios, traffic_mini};
use planrec_core::TrafficParams;

fn mini_evidence() -> Evidence {
    // Reference scenario A plus enough extra observations to keep a single
    // oracle pass at benchmark-friendly size.
    let mut e = paper_scenarios()[0].evidence();
    e.set(names::Y_POSITION_T0, "p1");
    e.set(names::Y_SPEED_T0, "s1");
    e.set(names::SIGNAL_M0, "Off");
    e
}

fn bench_enumeration(c: &mut Criterion) {
    let net = traffic_mini(&TrafficParams::default()).unwrap();
    let e = mini_evidence();
    let cap = 1u128 << 40;
    let mut group = c.benchmark_group("enumeration_oracle");
    group.sample_size(10);
    group.bench_function("default", |b| {
        b.iter(|| {
            enumerate_posterior_capped(&net, black_box(&e), names::GEN_MANEUVER, cap).unwrap()
        })
    });
    group.bench_function("sequential", |b| {
        b.iter(|| {
            enumerate_posterior_seq(&net, black_box(&e), names::GEN_MANEUVER, cap).unwrap()
        })
    });
    group.finish();
    let _ = DEFAULT_STATE_CAP;
}

fn bench_sampling(c: &mut Criterion) {
    let net = build_traffic_network(&TrafficParams::default()).unwrap();
    let mut group = c.benchmark_group("forward_sampling_10k");
    group.sample_size(10);
    group.bench_function("default", |b| {
        b.iter(|| forward_sample(&net, black_box(11), 10_000).unwrap())
    });
    group.bench_function("sequential", |b| {
        b.iter(|| forward_sample_seq(&net, black_box(11), 10_000).unwrap())
    });
    group.finish();
}

fn bench_elimination(c: &mut Criterion) {
    let net = build_traffic_network(&TrafficParams::default()).unwrap();
    let e = paper_scenarios()[0].evidence();
    c.bench_function("posterior_full_traffic", |b| {
        b.iter(|| posterior(&net, black_box(&e), names::GEN_MANEUVER).unwrap())
    });
}

criterion_group!(benches, bench_enumeration, bench_sampling, bench_elimination);
criterion_main!(benches);
