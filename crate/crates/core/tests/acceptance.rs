use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wedgetrap::geometry::{CouplingPattern, Geometry, MassSystem, SphericalPolygon, Statistics};
use wedgetrap::grid::{richardson_eigenvalues, GridProblem, DEFAULT_GRID_N};
use wedgetrap::observables::{
    density, momentum_distribution, pair_correlation, spectral_ground_state, McOptions, MomentumGrid, ObservableGrid,
};
use wedgetrap::quench::{evolve_quench, scaled_wavefunction, sudden_lambda, Schedule};
use wedgetrap::spectral::{
    extrapolate_large_beta, extrapolate_nmax, find_beta_critical, representative_sectors, tau_of, wedge_ground,
    WedgeSolver, DEFAULT_LADDER,
};
use wedgetrap::twobody::{solve_two_body, two_body_wavefunction};
use wedgetrap::geometry::volume_fractions;

type Check = wedgetrap::Result<(bool, String)>;
type Criterion = (&'static str, fn() -> Check);

const VOLUME_SAMPLES: usize = 10_000_000;
const VOLUME_SIGMAS: f64 = 3.0;
const VOLUME_SECONDS: f64 = 10.0;
const LARGE_BETA_VOLUME_TOL: f64 = 0.005;
const LIMIT_TOL: f64 = 0.05;
const TREND_TOL: f64 = 0.15;
const GIRARDEAU_TOL: f64 = 1e-3;
const BETA_C_WINDOW: (f64, f64) = (1.2, 1.4);
const BETA_C_SECONDS: f64 = 300.0;
const ORACLE_TOL: f64 = 1e-3;
const FIXTURE_TOL: f64 = 1e-3;
const JUMP_TOL: f64 = 1e-6;
const MC_SIGMAS: f64 = 3.0;
const ERMAKOV_TOL: f64 = 1e-8;
const CLOSED_FORM_TOL: f64 = 1e-8;

const LARGE_BETAS: [f64; 3] = [25.0, 50.0, 100.0];

fn bosons(beta: f64) -> wedgetrap::Result<Geometry> {
    Geometry::new(MassSystem::two_plus_two(beta, Statistics::Boson, Statistics::Boson)?)
}

fn fermions(beta: f64) -> wedgetrap::Result<Geometry> {
    Geometry::new(MassSystem::two_plus_two(beta, Statistics::Fermion, Statistics::Fermion)?)
}

fn ground_energy(geom: &Geometry) -> wedgetrap::Result<f64> {
    let mut best = f64::INFINITY;
    for s in representative_sectors(geom)? {
        best = best.min(wedge_ground(geom, &s.label(), DEFAULT_LADDER)?);
    }
    Ok(tau_of(best) + 1.5)
}

fn volumes_equal_masses() -> Check {
    let sys = MassSystem::two_plus_two(1.0, Statistics::Boson, Statistics::Boson)?;
    let t = Instant::now();
    let table = volume_fractions(&sys, VOLUME_SAMPLES, 2024)?;
    let secs = t.elapsed().as_secs_f64();
    let mut ok = secs < VOLUME_SECONDS;
    let mut detail = Vec::new();
    for (label, expect) in [("AABB/1234", 1.0 / 6.0), ("ABBA/1342", 1.0 / 12.0), ("ABAB/1324", 1.0 / 24.0)] {
        let f = table.get(label).ok_or_else(|| wedgetrap::Error::Domain(format!("missing {label}")))?;
        ok &= (f.fraction - expect).abs() < VOLUME_SIGMAS * f.stderr;
        detail.push(format!("{label} {:.5}±{:.5} (want {expect:.5})", f.fraction, f.stderr));
    }
    Ok((ok, format!("{}; {secs:.1} s", detail.join(", "))))
}

fn volumes_large_beta() -> Check {
    let sys = MassSystem::two_plus_two(1e4, Statistics::Boson, Statistics::Boson)?;
    let table = volume_fractions(&sys, 1_000_000, 7)?;
    let frac = |label: &str| table.get(label).map_or(0.0, |f| f.fraction);
    let (aabb, abba, abab) = (frac("AABB/1234"), frac("ABBA/1342"), frac("ABAB/1324"));
    let ok = (aabb - 0.25).abs() < LARGE_BETA_VOLUME_TOL
        && (abba - 0.25).abs() < LARGE_BETA_VOLUME_TOL
        && abab < LARGE_BETA_VOLUME_TOL;
    Ok((ok, format!("AABB {aabb:.4}, ABBA {abba:.4}, ABAB {abab:.4}")))
}

fn boson_ground_trend() -> Check {
    let betas = [1.0, 2.0, 5.0, 10.0, 25.0, 50.0, 100.0];
    let energies = betas.iter().map(|&b| ground_energy(&bosons(b)?)).collect::<wedgetrap::Result<Vec<_>>>()?;
    let monotone = energies.windows(2).all(|w| w[1] < w[0]);
    let tail = [energies[4], energies[5], energies[6]];
    let limit = extrapolate_large_beta(LARGE_BETAS, tail);
    let ok = monotone && (limit - 3.5).abs() < LIMIT_TOL && (energies[6] - limit).abs() < TREND_TOL;
    let listed: Vec<String> = betas.iter().zip(&energies).map(|(b, e)| format!("{b}:{e:.4}")).collect();
    Ok((ok, format!("E_rel {}; limit {limit:.4}", listed.join(" "))))
}

fn fermion_girardeau() -> Check {
    let geom = fermions(1.0)?;
    let mut energies = Vec::new();
    for word in ["AABB", "ABAB", "ABBA", "BAAB", "BABA", "BBAA"] {
        energies.push(tau_of(wedge_ground(&geom, word, DEFAULT_LADDER)?) + 1.5);
    }
    let spread = energies.iter().cloned().fold(f64::MIN, f64::max) - energies.iter().cloned().fold(f64::MAX, f64::min);
    let worst = energies.iter().map(|e| (e - 7.5).abs()).fold(0.0, f64::max);
    let tail = LARGE_BETAS.iter().map(|&b| ground_energy(&fermions(b)?)).collect::<wedgetrap::Result<Vec<_>>>()?;
    let limit = extrapolate_large_beta(LARGE_BETAS, [tail[0], tail[1], tail[2]]);
    let ok = spread < GIRARDEAU_TOL && worst < GIRARDEAU_TOL && (limit - 4.5).abs() < LIMIT_TOL;
    Ok((ok, format!("β=1 spread {spread:.1e}, max |E-7.5| {worst:.1e}; β→∞ limit {limit:.4}")))
}

fn beta_critical() -> Check {
    let t = Instant::now();
    let bc = find_beta_critical(1.0, 2.0, 0.01, DEFAULT_LADDER)?;
    let secs = t.elapsed().as_secs_f64();
    let ok = bc.beta_c > BETA_C_WINDOW.0 && bc.beta_c < BETA_C_WINDOW.1 && secs < BETA_C_SECONDS;
    Ok((ok, format!("β_c = {:.3} ± {:.3}; {secs:.1} s", bc.beta_c, bc.uncertainty)))
}

fn oracle_agreement() -> Check {
    let mut worst: (f64, String) = (0.0, String::new());
    for beta in [0.5, 1.0, 2.0, 5.0] {
        let geom = bosons(beta)?;
        for s in representative_sectors(&geom)? {
            let label = s.label();
            let runs = DEFAULT_LADDER
                .iter()
                .map(|&n| WedgeSolver::new(&geom, &label, n)?.solve_all(3))
                .collect::<wedgetrap::Result<Vec<_>>>()?;
            let grid = richardson_eigenvalues(&GridProblem::whole(&label, geom.polygon(&s)?), DEFAULT_GRID_N, 3)?;
            for k in 0..3 {
                let spectral =
                    extrapolate_nmax(DEFAULT_LADDER, [runs[0][k].eigenvalue, runs[1][k].eigenvalue, runs[2][k].eigenvalue]).value;
                let rel = (spectral - grid.values[k]).abs() / spectral.abs();
                if rel > worst.0 {
                    worst = (rel, format!("β={beta} {label} level {k}"));
                }
            }
        }
    }
    Ok((worst.0 < ORACLE_TOL, format!("max relative difference {:.1e} at {}", worst.0, worst.1)))
}

fn grid_fixtures() -> Check {
    let hemi = richardson_eigenvalues(&GridProblem::whole("hemisphere", SphericalPolygon::hemisphere([0.0, 0.0, 1.0])), 8, 1)?;
    let lune = SphericalPolygon::lune([1.0, 0.0, 0.0], [0.0, 1.0, 0.0])?;
    let lune = richardson_eigenvalues(&GridProblem::whole("lune", lune), 8, 1)?;
    let (h, l) = (hemi.values[0], lune.values[0]);
    let ok = (h - 2.0).abs() < FIXTURE_TOL && (l - 6.0).abs() < FIXTURE_TOL;
    Ok((ok, format!("hemisphere {h:.6}, lune {l:.6}")))
}

fn two_body() -> Check {
    let pair = MassSystem::with_pattern(&[1.0, 3.0], "AB", "bb", CouplingPattern::AllInfinite)?;
    let free = solve_two_body(0.0, &pair, 0)?.energy_rel;
    let hard = solve_two_body(f64::INFINITY, &pair, 0)?.energy_rel;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst = 0.0f64;
    for _ in 0..5 {
        let g: f64 = rng.random_range(-3.0..15.0);
        let sol = solve_two_body(g, &pair, 0)?;
        let psi = |q: f64| two_body_wavefunction(&sol, q);
        // one-sided fourth-order derivative at 0+
        let h = 1e-3;
        let d = (-25.0 * psi(0.0) + 48.0 * psi(h) - 36.0 * psi(2.0 * h) + 16.0 * psi(3.0 * h) - 3.0 * psi(4.0 * h))
            / (12.0 * h);
        // ψ'(0+) - ψ'(0-) = 2 ψ'(0+) for an even state
        worst = worst.max((2.0 * d - 2.0 * sol.g_eff() * psi(0.0)).abs());
    }
    let ok = free == 0.5 && hard == 1.5 && worst < JUMP_TOL;
    Ok((ok, format!("E(g=0) {free}, E(1/g=0) {hard}, max jump mismatch {worst:.1e}")))
}

fn within(grid: &ObservableGrid) -> bool {
    (grid.integral - grid.target).abs() < MC_SIGMAS * grid.integral_error
}

fn single_peaked(m: &ObservableGrid) -> bool {
    let (p0, e0) = m.at(0.0);
    m.values.iter().zip(&m.errors).all(|(v, e)| *v < p0 + MC_SIGMAS * (e0 + e))
}

fn observables() -> Check {
    let opts = McOptions { samples: 4000, seed: 3, tolerance: None };
    let state = spectral_ground_state(MassSystem::two_plus_two(1.0, Statistics::Boson, Statistics::Boson)?, 16)?;
    let xs: Vec<f64> = (0..61).map(|k| -6.0 + 0.2 * k as f64).collect();
    let n_a = density(&state, 'A', &xs, &opts)?;
    let n_p = momentum_distribution(&state, 'A', &MomentumGrid::default(), &opts)?;
    // interspecies pairs touch the hard wall on the diagonal
    let line = [-0.6, 0.0, 0.6];
    let pc = pair_correlation(&state, 0, 2, &line, &line, &opts)?;
    let diagonal = (0..3).map(|k| pc.values[4 * k].abs()).fold(0.0, f64::max);
    let off = pc.values[1];
    let contact = diagonal < 1e-12 && off > 0.0;

    let mut shapes = Vec::new();
    for beta in [1.0, 5.0] {
        let sys = MassSystem::two_plus_two(beta, Statistics::Boson, Statistics::Fermion)?;
        let st = spectral_ground_state(sys, 16)?;
        let m = momentum_distribution(&st, 'B', &MomentumGrid::default(), &McOptions { samples: 8000, seed: 5, tolerance: None })?;
        shapes.push(single_peaked(&m));
    }
    let ok = within(&n_a) && within(&n_p) && contact && shapes == [true, false];
    Ok((
        ok,
        format!(
            "∫n_A {:.3}±{:.3}, ∫n(p) {:.3}±{:.3}, contact max {diagonal:.1e} (off-diagonal {off:.3}), single-peaked β=1 {} β=5 {}",
            n_a.integral, n_a.integral_error, n_p.integral, n_p.integral_error, shapes[0], shapes[1]
        ),
    ))
}

fn quench() -> Check {
    let sudden = evolve_quench(Schedule::Sudden { omega0: 1.0, omega1: 2.0 }, 5.0, 0.002)?;
    let residual = sudden.ermakov_residual();
    let closed = sudden
        .times
        .iter()
        .zip(&sudden.lambda)
        .map(|(t, l)| (l - sudden_lambda(1.0, 2.0, *t)).abs())
        .fold(0.0, f64::max);
    let state = spectral_ground_state(MassSystem::two_plus_two(1.0, Statistics::Boson, Statistics::Boson)?, 16)?;
    let coarse = evolve_quench(Schedule::Sudden { omega0: 1.0, omega1: 2.0 }, 2.0, 0.05)?;
    let scaled = scaled_wavefunction(&state, &coarse);
    let norms = scaled.norms(&[0, 13, 40], 20_000, 9);
    let conserved = norms.iter().all(|(n, e)| (n - 1.0).abs() < MC_SIGMAS * e);
    let listed: Vec<String> = norms.iter().map(|(n, e)| format!("{n:.3}±{e:.3}")).collect();
    let ok = residual < ERMAKOV_TOL && closed < CLOSED_FORM_TOL && conserved;
    Ok((ok, format!("Ermakov residual {residual:.1e}, closed-form error {closed:.1e}, norms {}", listed.join(" "))))
}

fn main() -> ExitCode {
    let checks: [Criterion; 10] = [
        ("volume fractions at β=1", volumes_equal_masses),
        ("volume fractions at β=1e4", volumes_large_beta),
        ("2b+2b ground state trend", boson_ground_trend),
        ("2f+2f Girardeau limit and large-β limit", fermion_girardeau),
        ("2b+2f critical mass ratio", beta_critical),
        ("spectral vs grid oracle", oracle_agreement),
        ("grid exact fixtures", grid_fixtures),
        ("two-body limits and jump condition", two_body),
        ("observable sum rules and shapes", observables),
        ("quench dynamics", quench),
    ];
    let mut failed = 0;
    for (i, (name, check)) in checks.iter().enumerate() {
        let t = Instant::now();
        let (ok, detail) = match check() {
            Ok(r) => r,
            Err(e) => (false, format!("error: {e}")),
        };
        failed += usize::from(!ok);
        println!(
            "[{}] {:>2} {name}: {detail} ({:.1} s)",
            if ok { "PASS" } else { "FAIL" },
            i + 1,
            t.elapsed().as_secs_f64()
        );
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} acceptance criteria failed");
        ExitCode::FAILURE
    }
}
