use std::hint::black_box;
use std::sync::Arc;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use polyguard_core::activation::{threshold_sweep, ActivationState};
use polyguard_core::corpus;
use polyguard_core::deployment::deploy;
use polyguard_core::geometry::{triangulate, GeodesicIndex};
use polyguard_core::simulator::{ramp_levels, Policy, PolicySpec, SimConfig, Simulation};
use polyguard_core::Scene;

fn bench_deploy(c: &mut Criterion) {
    let mut g = c.benchmark_group("deploy");
    for n in [20, 60, 150] {
        let polygon = corpus::random_polygon(n, 5);
        let tri = triangulate(&polygon).unwrap();
        g.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| deploy(black_box(&polygon), &tri).unwrap())
        });
    }
    g.finish();
}

fn bench_activation(c: &mut Criterion) {
    let scene = Scene::new(corpus::example_one()).unwrap();
    c.bench_function("activation/fresh r=0.5", |b| b.iter(|| ActivationState::new(&scene, black_box(0.5))));
    let mut g = c.benchmark_group("threshold_sweep");
    g.sample_size(10);
    g.bench_function("example_one", |b| b.iter(|| threshold_sweep(&scene, 3.0, 0.05)));
    g.finish();
}

fn bench_geodesic(c: &mut Criterion) {
    let polygon = corpus::random_polygon(60, 9);
    let tri = triangulate(&polygon).unwrap();
    let index = GeodesicIndex::new(&polygon);
    let a = tri.centroid(&polygon, 0);
    let z = tri.centroid(&polygon, tri.triangles().len() - 1);
    c.bench_function("geodesic/distance n=60", |b| b.iter(|| index.distance(black_box(a), black_box(z))));
}

fn bench_sim(c: &mut Criterion) {
    let scene = Arc::new(Scene::new(corpus::random_polygon(30, 7)).unwrap());
    let start = scene.tri.centroid(&scene.polygon, 0);
    let mut sim = Simulation::new(Arc::clone(&scene), SimConfig::default(), start, 0.0);
    let spec = PolicySpec::Ramp { levels: ramp_levels(8, 1.5, 1), phase_steps: 300, settle_steps: 30 };
    let mut policy = Policy::new(spec, 1);
    let mut clipped = false;
    c.bench_function("simulator/step n=30", |b| {
        b.iter(|| {
            let cmd = policy.command(&sim, clipped);
            let rec = sim.step(&cmd);
            clipped = rec.clipped;
            rec
        })
    });
}

criterion_group!(benches, bench_deploy, bench_activation, bench_geodesic, bench_sim);
criterion_main!(benches);
