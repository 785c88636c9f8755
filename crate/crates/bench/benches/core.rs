use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use gcantor_core::classify::{classify, effective_level};
use gcantor_core::conformal::{elliptic_k, teichmuller_ring_modulus};
use gcantor_core::hyperbolic::{curve_bounds, pants_seam_distance};
use gcantor_core::numerics::parse_rational;
use gcantor_core::{CantorTree, CurveId, Real, SequenceSpec};

const P: u32 = 128;

fn paper_example() -> SequenceSpec {
    SequenceSpec::parse(r#"{"family": "paper_example"}"#).unwrap()
}

fn numerics(c: &mut Criterion) {
    let k = Real::parse("0.999", P).unwrap();
    let t = Real::parse("1e-30", P).unwrap();
    c.bench_function("elliptic_k", |b| b.iter(|| elliptic_k(black_box(&k)).unwrap()));
    c.bench_function("teichmuller_ring_modulus", |b| b.iter(|| teichmuller_ring_modulus(black_box(&t)).unwrap()));
}

fn sequences(c: &mut Criterion) {
    let spec = paper_example();
    c.bench_function("criterion_n20", |b| b.iter(|| spec.criterion(black_box(20), P).unwrap()));
}

fn geometry(c: &mut Criterion) {
    let spec = SequenceSpec::parse(r#"{"family": "alternating_half_power"}"#).unwrap();
    let tree = CantorTree::build(&spec, 8, P).unwrap();
    let curve = CurveId { n: 6, i: 17 };
    c.bench_function("curve_bounds", |b| b.iter(|| curve_bounds(&spec, &tree, black_box(curve), P).unwrap()));

    let (x, y) = (Real::parse("7/2", P).unwrap(), Real::parse("1/5", P).unwrap());
    c.bench_function("pants_seam_distance", |b| b.iter(|| pants_seam_distance(black_box(&x), &y, &y).unwrap()));
}

fn classification(c: &mut Criterion) {
    let spec = paper_example();
    let third = parse_rational("1/3").unwrap();
    let k = Real::from_int(2, P);
    let mut group = c.benchmark_group("classification");
    group.sample_size(10);
    group.bench_function("classify_h32", |b| b.iter(|| classify(&spec, 32, &third, P).unwrap()));
    group.bench_function("effective_level_h8", |b| b.iter(|| effective_level(&spec, &k, 8, P).unwrap()));
    group.finish();
}

criterion_group!(benches, numerics, sequences, geometry, classification);
criterion_main!(benches);
