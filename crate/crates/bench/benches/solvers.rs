use std::hint::black_box;
use std::time::Duration;

use criterion::{criterion_group, criterion_main, Criterion};
use wedgetrap::geometry::{volume_fractions, CouplingPattern, Geometry, MassSystem, SphericalPolygon, Statistics};
use wedgetrap::grid::{solve_grid_spectrum, GridProblem};
use wedgetrap::observables::{density, spectral_ground_state, McOptions};
use wedgetrap::quench::{evolve_quench, Schedule};
use wedgetrap::spectral::WedgeSolver;
use wedgetrap::twobody::solve_two_body;

fn bosons(beta: f64) -> MassSystem {
    MassSystem::two_plus_two(beta, Statistics::Boson, Statistics::Boson).unwrap()
}

fn volumes(c: &mut Criterion) {
    let sys = bosons(2.0);
    c.bench_function("volume_fractions/1e5", |b| b.iter(|| volume_fractions(black_box(&sys), 100_000, 1).unwrap()));
}

fn spectral(c: &mut Criterion) {
    let geom = Geometry::new(bosons(2.0)).unwrap();
    for n in [12, 20] {
        c.bench_function(&format!("spectral/AABB/n{n}"), |b| {
            b.iter(|| WedgeSolver::new(&geom, "AABB", n).unwrap().solve_class(&geom, 1.0, 3).unwrap())
        });
    }
}

fn grid(c: &mut Criterion) {
    let geom = Geometry::new(bosons(2.0)).unwrap();
    let problem = GridProblem::whole("AABB", geom.polygon(&geom.sector("AABB").unwrap()).unwrap());
    c.bench_function("grid/AABB/n16", |b| b.iter(|| solve_grid_spectrum(&problem, 16, 3).unwrap()));
    let hemi = GridProblem::whole("hemisphere", SphericalPolygon::hemisphere([0.0, 0.0, 1.0]));
    c.bench_function("grid/hemisphere/n32", |b| b.iter(|| solve_grid_spectrum(&hemi, 32, 1).unwrap()));
}

fn two_body(c: &mut Criterion) {
    let pair = MassSystem::with_pattern(&[1.0, 3.0], "AB", "bb", CouplingPattern::AllInfinite).unwrap();
    c.bench_function("twobody/root", |b| b.iter(|| solve_two_body(black_box(2.7), &pair, 1).unwrap()));
}

fn dynamics(c: &mut Criterion) {
    let schedule = Schedule::LinearRamp { omega0: 1.0, omega1: 2.0, duration: 1.0 };
    c.bench_function("quench/ramp/t10", |b| b.iter(|| evolve_quench(schedule, 10.0, 0.01).unwrap()));
}

fn observables(c: &mut Criterion) {
    let state = spectral_ground_state(bosons(1.0), 12).unwrap();
    let xs: Vec<f64> = (0..11).map(|k| -2.5 + 0.5 * k as f64).collect();
    let opts = McOptions { samples: 2000, seed: 1, tolerance: None };
    c.bench_function("density/11x2000", |b| b.iter(|| density(&state, 'A', &xs, &opts).unwrap()));
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10).warm_up_time(Duration::from_millis(500)).measurement_time(Duration::from_secs(3));
    targets = volumes, spectral, grid, two_body, dynamics, observables
}
criterion_main!(benches);
