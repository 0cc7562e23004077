use std::sync::Arc;

use anyhow::Result;
use rayon::prelude::*;
use serde_json::json;
use wedgetrap::geometry::{CouplingPattern, Geometry, MassSystem, SystemSpec};
use wedgetrap::grid::{richardson_eigenvalues, three_plus_one_energy, GridProblem};
use wedgetrap::observables::{
    density, momentum_distribution, pair_correlation, spectral_ground_state, spectral_state, McOptions, MomentumGrid,
    ObservableGrid, TrapState,
};
use wedgetrap::quench::{evolve_quench, Schedule};
use wedgetrap::spectral::{
    converged_sector_levels, extrapolate_nmax, find_beta_critical, representative_sectors, WedgeSolver,
};
use wedgetrap::twobody::solve_two_body;

use crate::config::{parse_pair, parse_values, usage, Command, RunConfig, ScheduleKind, StateArgs};
use crate::output::{Cell, Plot, Report, Table};

/// Largest spectral/grid disagreement accepted by `oracle`.
pub const ORACLE_TOL: f64 = 1e-3;

const OBSERVABLE_SAMPLES: usize = 20_000;
const VOLUME_SAMPLES: usize = 1_000_000;

pub fn execute(config: &RunConfig) -> Result<Report> {
    match &config.command {
        Command::Spectrum { wedge, levels } => spectrum(config, wedge.as_deref(), *levels),
        Command::Volumes => volumes(config),
        Command::Density { species, points, extent, state } => one_body_density(config, *species, *points, *extent, state),
        Command::Paircorr { pair, points, extent, state } => paircorr(config, pair, *points, *extent, state),
        Command::Momentum { species, half_width, nx, np, state } => {
            momentum(config, *species, MomentumGrid { half_width: *half_width, nx: *nx, np: *np }, state)
        }
        Command::Twobody { g, branches } => twobody(config, g, *branches),
        Command::Quench { schedule, omega0, omega1, duration, t_end, dt } => {
            let schedule = match schedule {
                ScheduleKind::Constant => Schedule::Constant { omega: *omega0 },
                ScheduleKind::Sudden => Schedule::Sudden { omega0: *omega0, omega1: *omega1 },
                ScheduleKind::LinearRamp => Schedule::LinearRamp { omega0: *omega0, omega1: *omega1, duration: *duration },
            };
            quench(schedule, *t_end, *dt)
        }
        Command::Oracle { wedge, levels } => oracle(config, wedge.as_deref(), *levels),
        Command::Betac { lo, hi, tol } => betac(config, *lo, *hi, *tol),
        Command::Run { .. } => Err(usage("a run configuration cannot itself be a run command")),
    }
}

fn four_body_geometry(config: &RunConfig, beta: f64) -> Result<Arc<Geometry>> {
    if config.system_file.is_some() {
        return Err(usage(format!("{} needs a shorthand --system", config.command.name())));
    }
    match config.spec()? {
        SystemSpec::TwoPlusTwo { .. } => Ok(Arc::new(Geometry::new(config.system_at(beta)?)?)),
        SystemSpec::ThreePlusOne { .. } => Err(usage(format!("{} supports 2+2 systems only", config.command.name()))),
    }
}

fn wedges(geom: &Geometry, only: Option<&str>) -> Result<Vec<String>> {
    match only {
        Some(w) => Ok(vec![geom.sector(w).map_err(|e| usage(e.to_string()))?.label()]),
        None => Ok(representative_sectors(geom)?.iter().map(|s| s.label()).collect()),
    }
}

fn spectrum(config: &RunConfig, only: Option<&str>, levels: usize) -> Result<Report> {
    let betas = config.betas()?;
    let spec = config.spec()?;
    let mut table = Table::new(&["beta", "system", "wedge", "parity", "index", "tau", "E_rel", "s12", "s34"]);
    if let SystemSpec::ThreePlusOne { majority } = spec {
        let rows = betas
            .par_iter()
            .map(|&b| three_plus_one_energy(b, majority, config.grid_n).map(|e| (b, e)))
            .collect::<wedgetrap::Result<Vec<_>>>()?;
        let mut skipped = Vec::new();
        for (b, e) in rows {
            match e {
                Some(e) => table.push(vec![
                    b.into(),
                    spec.to_string().into(),
                    "AABA".into(),
                    1.0.into(),
                    0usize.into(),
                    (e - 1.5).into(),
                    e.into(),
                    Cell::Empty,
                    Cell::Empty,
                ]),
                None => skipped.push(b),
            }
        }
        let mut report = Report::new(table);
        report.diagnostics = json!({ "solver": "grid", "grid_n": config.grid_n, "unchartable_betas": skipped });
        return Ok(report);
    }
    let ladder = config.ladder()?;
    let per_beta = betas
        .par_iter()
        .map(|&b| -> Result<Vec<Vec<Cell>>> {
            let geom = four_body_geometry(config, b)?;
            let mut rows = Vec::new();
            for w in wedges(&geom, only)? {
                for l in converged_sector_levels(&geom, &w, ladder, levels)? {
                    rows.push(vec![
                        b.into(),
                        spec.to_string().into(),
                        l.sector.clone().into(),
                        l.parity.into(),
                        l.index.into(),
                        l.tau.into(),
                        l.energy_rel.into(),
                        l.character_of(&["T12", "PT12"]).into(),
                        l.character_of(&["T34", "PT34"]).into(),
                    ]);
                }
            }
            Ok(rows)
        })
        .collect::<Result<Vec<_>>>()?;
    table.rows = per_beta.into_iter().flatten().collect();
    let mut report = Report::new(table);
    report.diagnostics = json!({ "solver": "spectral", "ladder": ladder });
    Ok(report)
}

fn volumes(config: &RunConfig) -> Result<Report> {
    let samples = config.samples_or(VOLUME_SAMPLES);
    let betas = if config.system_file.is_some() { vec![f64::NAN] } else { config.betas()? };
    let mut table = Table::new(&["beta", "sector", "fraction", "stderr"]);
    for b in betas {
        let sys = config.system_at(b)?;
        let t = wedgetrap::geometry::volume_fractions(&sys, samples, config.seed).map_err(|e| usage(e.to_string()))?;
        for s in t.sectors {
            let beta: Cell = if b.is_nan() { Cell::Empty } else { b.into() };
            table.push(vec![beta, s.label.into(), s.fraction.into(), s.stderr.into()]);
        }
    }
    let mut report = Report::new(table);
    report.metadata = json!({ "samples": samples, "seed": config.seed });
    Ok(report)
}

fn single_beta(config: &RunConfig) -> Result<f64> {
    match config.betas()?.as_slice() {
        [b] => Ok(*b),
        _ => Err(usage(format!("{} takes a single --beta", config.command.name()))),
    }
}

fn build_state(config: &RunConfig, args: &StateArgs) -> Result<(f64, TrapState)> {
    let beta = single_beta(config)?;
    let geom = four_body_geometry(config, beta)?;
    if args.parity.abs() != 1.0 {
        return Err(usage("--parity must be 1 or -1"));
    }
    let state = match &args.wedge {
        None if args.index == 0 => spectral_ground_state(geom.system.clone(), config.nmax)?,
        None => return Err(usage("--index needs --wedge")),
        Some(w) => spectral_state(geom, w, args.parity, config.nmax, args.index)?,
    };
    Ok((beta, state))
}

fn mc_options(config: &RunConfig) -> McOptions {
    McOptions { samples: config.samples_or(OBSERVABLE_SAMPLES), seed: config.seed, tolerance: config.tolerance }
}

fn observable_report(beta: f64, state: &TrapState, grid: &ObservableGrid, table: Table, plot: Plot) -> Report {
    let mut report = Report::new(table);
    report.metadata = json!({
        "beta": beta,
        "system": state.geometry.system.species_word(),
        "state": {
            "wedge": state.angular.wedge(),
            "support": state.support.iter().map(|s| s.label.clone()).collect::<Vec<_>>(),
            "parity": state.parity,
            "tau": state.angular.tau(),
            "radial_n": state.radial.n,
            "cm_quanta": state.cm.chi,
            "energy": state.energy(),
        },
        "seed": grid.seed,
        "samples_per_point": grid.samples,
    });
    report.diagnostics = json!({
        "integral": grid.integral,
        "integral_error": grid.integral_error,
        "target": grid.target,
        "partial": grid.partial,
    });
    if grid.partial {
        report.failures.push(format!(
            "{}: integral {:.4} ± {:.4} misses {} beyond the tolerance",
            grid.kind, grid.integral, grid.integral_error, grid.target
        ));
    }
    report.plot = Some(plot);
    report
}

fn axis(points: usize, extent: f64) -> Result<Vec<f64>> {
    if points < 2 || !(extent > 0.0) {
        return Err(usage("grids need at least 2 points and a positive extent"));
    }
    Ok((0..points).map(|k| -extent + 2.0 * extent * k as f64 / (points - 1) as f64).collect())
}

fn check_species(state: &TrapState, species: char) -> Result<()> {
    if state.geometry.system.members(species).is_empty() {
        return Err(usage(format!("no particles of species '{species}'")));
    }
    Ok(())
}

fn one_body_density(config: &RunConfig, species: char, points: usize, extent: f64, args: &StateArgs) -> Result<Report> {
    let xs = axis(points, extent)?;
    let (beta, state) = build_state(config, args)?;
    check_species(&state, species)?;
    let grid = density(&state, species, &xs, &mc_options(config))?;
    let mut table = Table::new(&["x", "density", "stderr"]);
    for (k, x) in xs.iter().enumerate() {
        table.push(vec![(*x).into(), grid.values[k].into(), grid.errors[k].into()]);
    }
    let plot = Plot::Line { x: 0, y: 1, err: Some(2), xlabel: "x".into(), ylabel: format!("n_{species}(x)") };
    Ok(observable_report(beta, &state, &grid, table, plot))
}

fn paircorr(config: &RunConfig, pair: &str, points: usize, extent: f64, args: &StateArgs) -> Result<Report> {
    let (i, j) = parse_pair(pair)?;
    let xs = axis(points, extent)?;
    let (beta, state) = build_state(config, args)?;
    if i.max(j) >= state.geometry.system.len() {
        return Err(usage(format!("pair '{pair}' is out of range")));
    }
    let grid = pair_correlation(&state, i, j, &xs, &xs, &mc_options(config))?;
    let mut table = Table::new(&["x", "y", "value", "stderr"]);
    for (k, (v, e)) in grid.values.iter().zip(&grid.errors).enumerate() {
        table.push(vec![xs[k / points].into(), xs[k % points].into(), (*v).into(), (*e).into()]);
    }
    let plot = Plot::Surface { x: 0, y: 1, z: 2, nx: points, ny: points };
    Ok(observable_report(beta, &state, &grid, table, plot))
}

fn momentum(config: &RunConfig, species: char, mgrid: MomentumGrid, args: &StateArgs) -> Result<Report> {
    if mgrid.nx < 2 || mgrid.np < 2 || !(mgrid.half_width > 0.0) {
        return Err(usage("momentum grid needs nx, np >= 2 and a positive half width"));
    }
    let (beta, state) = build_state(config, args)?;
    check_species(&state, species)?;
    let grid = momentum_distribution(&state, species, &mgrid, &mc_options(config))?;
    let mut table = Table::new(&["p", "density", "stderr"]);
    for (k, p) in grid.axes[0].iter().enumerate() {
        table.push(vec![(*p).into(), grid.values[k].into(), grid.errors[k].into()]);
    }
    let plot = Plot::Line { x: 0, y: 1, err: Some(2), xlabel: "p".into(), ylabel: format!("n_{species}(p)") };
    Ok(observable_report(beta, &state, &grid, table, plot))
}

fn twobody(config: &RunConfig, g: &str, branches: usize) -> Result<Report> {
    let gs = parse_values(g, 201)?;
    let betas = config.betas()?;
    if branches == 0 {
        return Err(usage("--branches must be at least 1"));
    }
    let mut table = Table::new(&["beta", "g", "branch", "E_rel"]);
    for b in betas {
        let pair = MassSystem::with_pattern(&[1.0, b], "AB", "bb", CouplingPattern::AllInfinite)?;
        for branch in 0..branches {
            for &g in &gs {
                // the ground branch has no bound state at g = -inf
                if g == f64::NEG_INFINITY && branch == 0 {
                    continue;
                }
                let sol = solve_two_body(g, &pair, branch)?;
                table.push(vec![b.into(), g.into(), branch.into(), sol.energy_rel.into()]);
            }
        }
    }
    let mut report = Report::new(table);
    report.plot = Some(Plot::Line { x: 1, y: 3, err: None, xlabel: "g".into(), ylabel: "E_rel".into() });
    Ok(report)
}

fn quench(schedule: Schedule, t_end: f64, dt: f64) -> Result<Report> {
    if !(t_end > 0.0 && dt > 0.0 && dt <= t_end) {
        return Err(usage("quench needs 0 < dt <= t-end"));
    }
    let sol = evolve_quench(schedule, t_end, dt).map_err(|e| match e {
        wedgetrap::Error::Domain(m) => usage(m),
        other => other.into(),
    })?;
    let mut table = Table::new(&["t", "lambda", "dlambda", "phase"]);
    for i in 0..sol.times.len() {
        table.push(vec![sol.times[i].into(), sol.lambda[i].into(), sol.dlambda[i].into(), sol.phase_integral[i].into()]);
    }
    let mut report = Report::new(table);
    report.diagnostics = json!({
        "ermakov_residual": sol.ermakov_residual(),
        "modulus_residual": sol.modulus_residual(),
    });
    report.metadata = json!({ "schedule": schedule });
    report.plot = Some(Plot::Line { x: 0, y: 1, err: None, xlabel: "t".into(), ylabel: "lambda".into() });
    Ok(report)
}

fn oracle(config: &RunConfig, only: Option<&str>, levels: usize) -> Result<Report> {
    let betas = config.betas()?;
    let ladder = config.ladder()?;
    let per_beta = betas
        .par_iter()
        .map(|&b| -> Result<Vec<(Vec<Cell>, f64)>> {
            let geom = four_body_geometry(config, b)?;
            let mut rows = Vec::new();
            for w in wedges(&geom, only)? {
                let runs = ladder
                    .iter()
                    .map(|&n| WedgeSolver::new(&geom, &w, n)?.solve_all(levels))
                    .collect::<wedgetrap::Result<Vec<_>>>()?;
                let sector = geom.sector(&w)?;
                let grid = richardson_eigenvalues(&GridProblem::whole(&w, geom.polygon(&sector)?), config.grid_n, levels)?;
                for k in 0..levels.min(grid.values.len()).min(runs[0].len()) {
                    let spectral = extrapolate_nmax(ladder, [runs[0][k].eigenvalue, runs[1][k].eigenvalue, runs[2][k].eigenvalue]).value;
                    let rel = (grid.values[k] - spectral).abs() / spectral.abs();
                    rows.push((
                        vec![b.into(), w.clone().into(), k.into(), grid.values[k].into(), spectral.into(), rel.into()],
                        grid.orders[k],
                    ));
                }
            }
            Ok(rows)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut table = Table::new(&["beta", "wedge", "index", "eigenvalue_grid", "eigenvalue_spectral", "rel_diff"]);
    let mut failures = Vec::new();
    let mut orders = Vec::new();
    for (row, order) in per_beta.into_iter().flatten() {
        if let (Cell::Num(b), Cell::Text(w), Cell::Num(rel)) = (&row[0], &row[1], &row[5]) {
            if *rel > ORACLE_TOL {
                failures.push(format!("beta {b} {w}: relative difference {rel:.2e} exceeds {ORACLE_TOL:e}"));
            }
        }
        orders.push(order);
        table.push(row);
    }
    let mut report = Report::new(table);
    report.failures = failures;
    report.diagnostics = json!({ "ladder": ladder, "grid_n": config.grid_n, "grid_orders": orders, "tolerance": ORACLE_TOL });
    Ok(report)
}

fn betac(config: &RunConfig, lo: f64, hi: f64, tol: f64) -> Result<Report> {
    if !(lo > 0.0 && hi > lo && tol > 0.0) {
        return Err(usage("betac needs 0 < lo < hi and a positive tolerance"));
    }
    let ladder = config.ladder()?;
    let bc = find_beta_critical(lo, hi, tol, ladder)?;
    let mut table = Table::new(&["beta_c", "uncertainty", "bisection_steps"]);
    table.push(vec![bc.beta_c.into(), bc.uncertainty.into(), bc.bisection_steps.into()]);
    let mut report = Report::new(table);
    report.diagnostics = json!({ "ladder": ladder, "bracket": [lo, hi], "tolerance": tol });
    Ok(report)
}
