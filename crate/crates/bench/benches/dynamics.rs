use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use flatstrip::budget::Budget;
use flatstrip::ergodic::{count_separated, Sampler, SamplerKind};
use flatstrip::flow::{geodesic_flow, jacobi_evolve, JacobiState};
use flatstrip::hyperbolic::HPoint;
use flatstrip::shadowing::enumerate_periodic_orbits;
use flatstrip::surface::reduce_tangent;
use flatstrip::{build_collar, SurfaceModel, UnitTangent};

fn flow(c: &mut Criterion) {
    let g = SurfaceModel::genus2();
    let v = UnitTangent::plane(HPoint { x: 0.1, y: 1.2 }, 0.4);
    c.bench_function("flow/genus2 T=10", |b| b.iter(|| geodesic_flow(&g, black_box(&v), 10.0, 1e-10).unwrap()));
    let collar = build_collar(1.0, 0.5, 0.5).unwrap();
    let w = UnitTangent::collar(0.3, 0.0, 1.0);
    c.bench_function("flow/collar T=10", |b| b.iter(|| geodesic_flow(&collar, black_box(&w), 10.0, 1e-10).unwrap()));
}

fn jacobi(c: &mut Criterion) {
    let collar = build_collar(1.0, 0.5, 0.5).unwrap();
    let w = UnitTangent::collar(0.4, 1.0, 0.5);
    c.bench_function("jacobi/collar T=10", |b| {
        b.iter(|| jacobi_evolve(&collar, black_box(&w), 10.0, JacobiState::new(0.0, 1.0), 1e-10).unwrap())
    });
}

fn reduce(c: &mut Criterion) {
    let g = SurfaceModel::genus2();
    let group = g.group().unwrap();
    let v = UnitTangent::plane(HPoint { x: 3.7, y: 0.02 }, 0.7);
    c.bench_function("reduce/tangent", |b| b.iter(|| reduce_tangent(group, black_box(&v)).unwrap()));
}

fn enumerate(c: &mut Criterion) {
    let g = SurfaceModel::genus2();
    let mut group = c.benchmark_group("enumerate");
    group.sample_size(10);
    group.bench_function("periodic T=5", |b| b.iter(|| enumerate_periodic_orbits(&g, black_box(5.0)).unwrap()));
    group.finish();
}

fn separated(c: &mut Criterion) {
    let g = SurfaceModel::genus2();
    let centre = UnitTangent::plane(HPoint::I, 0.3);
    let sampler = Sampler::new(SamplerKind::UnstableArc { centre, length: 0.1 }, 11, 300);
    let mut group = c.benchmark_group("separated");
    group.sample_size(10);
    group.bench_function("arc 300 T=4", |b| {
        b.iter(|| count_separated(&g, &sampler, 4.0, 0.1, 1.0, &mut Budget::unlimited()).unwrap())
    });
    group.finish();
}

criterion_group!(benches, flow, jacobi, reduce, enumerate, separated);
criterion_main!(benches);
