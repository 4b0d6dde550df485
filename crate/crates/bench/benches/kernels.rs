use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use seqdyn_bench::{cat, doubling, doubling_tail, perturbed_doubling};
use seqdyn_core::conjugacy::sequential_conjugacy;
use seqdyn_core::digits::DigitProgram;
use seqdyn_core::entropy::{separated_count, CandidateSet};
use seqdyn_core::ergodic::{birkhoff_average, OrbitStart};
use seqdyn_core::limit_stats::sigma_green_kubo;
use seqdyn_core::shadowing::{perturbed_orbit, shadow_anosov, shadow_expanding, HyperbolicSplitting};
use seqdyn_core::{MapSequence, Observable, Point, SmoothMap, Space};

fn shadowing(c: &mut Criterion) {
    let seq = MapSequence::constant(perturbed_doubling());
    let p = perturbed_orbit(&seq, &Point::circle(0.3), 1e-3, 500, 1).unwrap();
    c.bench_function("shadow_expanding/500", |b| b.iter(|| shadow_expanding(&seq, black_box(&p), 1e-9).unwrap()));

    let seq = cat();
    let split = HyperbolicSplitting::new(&seq).unwrap();
    let p = perturbed_orbit(&seq, &Point::torus(0.2, 0.7), 1e-4, 200, 1).unwrap();
    c.bench_function("shadow_anosov/200", |b| b.iter(|| shadow_anosov(&seq, black_box(&p), &split, 1e-9).unwrap()));
}

fn conjugacy(c: &mut Criterion) {
    let (f, g) = (doubling(), MapSequence::constant(perturbed_doubling()));
    c.bench_function("sequential_conjugacy/R=1024", |b| {
        b.iter(|| sequential_conjugacy(&f, black_box(&g), 1024, 40).unwrap())
    });
}

fn orbits(c: &mut Criterion) {
    let seq = doubling_tail();
    let phi = Observable::cos_circle(1);
    let start = OrbitStart::Digits(DigitProgram::random(1, 0));
    c.bench_function("birkhoff_average/1e5", |b| {
        b.iter(|| birkhoff_average(&seq, &phi, black_box(&start), 100_000).unwrap())
    });
    // cos is mean-zero for Lebesgue, the invariant measure of the doubling map
    let f = SmoothMap::doubling();
    c.bench_function("sigma_green_kubo/2^16", |b| {
        b.iter(|| sigma_green_kubo(black_box(&f), &phi, 1 << 16, 40, 1).unwrap())
    });
}

fn entropy(c: &mut Criterion) {
    let seq = doubling();
    let cands = CandidateSet::grid(Space::Circle, 1 << 14);
    c.bench_function("separated_count/n=8", |b| {
        b.iter(|| separated_count(&seq, 8, 0.125, black_box(&cands)).unwrap())
    });
}

criterion_group! {
    name = kernels;
    config = Criterion::default().sample_size(10);
    targets = shadowing, conjugacy, orbits, entropy
}
criterion_main!(kernels);
