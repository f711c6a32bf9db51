use chernlab::hcf::{flow_invariant, variation_check, HSource};
use chernlab::twisted::{transport_matrix, tt_curvature, TransportOptions};
use chernlab::wirtinger_jet;
use chernlab_bench::{hopf, hopf_loop, hopf_point, sl2_metric};
use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

fn jets(c: &mut Criterion) {
    let m = hopf();
    let p = hopf_point();
    c.bench_function("jet_order3_hopf", |b| {
        b.iter(|| wirtinger_jet(&m.field, black_box(&p), 3).unwrap())
    });
    let jet = wirtinger_jet(&m.field, &p, 3).unwrap();
    c.bench_function("tt_curvature_hopf", |b| {
        b.iter(|| tt_curvature(black_box(&jet)).unwrap())
    });
}

fn transport(c: &mut Criterion) {
    let m = hopf();
    let path = hopf_loop();
    let opts = TransportOptions::default();
    c.bench_function("transport_hopf_circle", |b| {
        b.iter(|| transport_matrix(&m.field, black_box(&path), &opts).unwrap())
    });
}

fn flow(c: &mut Criterion) {
    let fm = sl2_metric();
    c.bench_function("flow_sl2_20_steps", |b| {
        b.iter(|| flow_invariant(black_box(&fm), 1.0, 20).unwrap())
    });
    let m = hopf();
    let p = hopf_point();
    c.bench_function("variation_check_hopf", |b| {
        b.iter(|| variation_check(&m.field, &HSource::Hcf, black_box(&p), 1e-3).unwrap())
    });
}

criterion_group!(benches, jets, transport, flow);
criterion_main!(benches);
