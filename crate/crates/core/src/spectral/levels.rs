use serde::Serialize;

use super::solve::{tau_of, WedgeSolver};
use crate::error::{Error, Result};
use crate::geometry::{Geometry, MassSystem, Sector, Statistics};

/// Basis sizes used for the default convergence extrapolation.
pub const DEFAULT_LADDER: [usize; 3] = [16, 20, 24];

/// One level of one symmetry class on one wedge.
#[derive(Debug, Clone, Serialize)]
pub struct SectorLevel {
    pub sector: String,
    /// Parity of the assembled state; `None` when both parities are degenerate.
    pub parity: Option<f64>,
    pub index: usize,
    pub eigenvalue: f64,
    pub tau: f64,
    pub energy_rel: f64,
    pub characters: Vec<(String, f64)>,
}

impl SectorLevel {
    /// Character of the first stabilizer element whose name is one of `names`.
    pub fn character_of(&self, names: &[&str]) -> Option<f64> {
        names
            .iter()
            .find_map(|n| self.characters.iter().find(|(m, _)| m == n).map(|(_, s)| *s))
    }
}

/// Fit `Λ(N) = Λ∞ + C N^{-p}` through three basis sizes.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Extrapolation {
    pub value: f64,
    pub order: f64,
    /// Distance between the extrapolated and the largest-basis value.
    pub correction: f64,
}

pub fn extrapolate_nmax(ns: [usize; 3], vals: [f64; 3]) -> Extrapolation {
    let n = ns.map(|x| x as f64);
    let (d1, d2) = (vals[0] - vals[1], vals[1] - vals[2]);
    if d1 == 0.0 || d2 == 0.0 || d1.signum() != d2.signum() || d2.abs() >= d1.abs() {
        return Extrapolation { value: vals[2], order: f64::NAN, correction: 0.0 };
    }
    let target = d1 / d2;
    let ratio = |p: f64| (n[0].powf(-p) - n[1].powf(-p)) / (n[1].powf(-p) - n[2].powf(-p));
    // ratio(p) grows monotonically with p
    let (mut lo, mut hi) = (1e-3, 30.0);
    if target <= ratio(lo) || target >= ratio(hi) {
        return Extrapolation { value: vals[2], order: f64::NAN, correction: 0.0 };
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if ratio(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let p = 0.5 * (lo + hi);
    let c = d2 / (n[1].powf(-p) - n[2].powf(-p));
    let value = vals[2] - c * n[2].powf(-p);
    Extrapolation { value, order: p, correction: value - vals[2] }
}

/// Richardson extrapolation to `β → ∞` in `h = β^{-1/2}`, exact for `E∞ + a h + b h²`.
pub fn extrapolate_large_beta(betas: [f64; 3], energies: [f64; 3]) -> f64 {
    let h = betas.map(|b| b.powf(-0.5));
    // Lagrange interpolation evaluated at h = 0
    let mut e = 0.0;
    for i in 0..3 {
        let mut l = 1.0;
        for j in 0..3 {
            if i != j {
                l *= h[j] / (h[j] - h[i]);
            }
        }
        e += l * energies[i];
    }
    e
}

/// Parity classes that give different spectra on a sector.
pub fn parity_classes(geom: &Geometry, sector: &Sector) -> Vec<Option<f64>> {
    if geom.group.stabilizer(sector, &geom.table).iter().any(|g| g.parity) {
        vec![Some(1.0), Some(-1.0)]
    } else {
        vec![None]
    }
}

/// Lowest `k` levels of every symmetry class of one sector at basis size `n_max`.
pub fn sector_levels(geom: &Geometry, wedge: &str, n_max: usize, k: usize) -> Result<Vec<SectorLevel>> {
    let solver = WedgeSolver::new(geom, wedge, n_max)?;
    let mut out = Vec::new();
    for parity in parity_classes(geom, &solver.sector) {
        for (index, sol) in solver.solve_class(geom, parity.unwrap_or(1.0), k)?.into_iter().enumerate() {
            out.push(SectorLevel {
                sector: sol.sector.clone(),
                parity,
                index,
                eigenvalue: sol.eigenvalue,
                tau: sol.tau,
                energy_rel: sol.energy_rel(0),
                characters: sol.characters.clone(),
            });
        }
    }
    Ok(out)
}

/// Like [`sector_levels`] but with eigenvalues extrapolated over the basis sizes `ladder`.
pub fn converged_sector_levels(geom: &Geometry, wedge: &str, ladder: [usize; 3], k: usize) -> Result<Vec<SectorLevel>> {
    let runs = ladder
        .iter()
        .map(|&n| sector_levels(geom, wedge, n, k))
        .collect::<Result<Vec<_>>>()?;
    let mut out = runs[2].clone();
    for (i, level) in out.iter_mut().enumerate() {
        let vals = [runs[0][i].eigenvalue, runs[1][i].eigenvalue, runs[2][i].eigenvalue];
        let ex = extrapolate_nmax(ladder, vals);
        level.eigenvalue = ex.value;
        level.tau = tau_of(ex.value);
        level.energy_rel = level.tau + 1.5;
    }
    Ok(out)
}

/// One representative sector per orbit of the symmetry group.
pub fn representative_sectors(geom: &Geometry) -> Result<Vec<Sector>> {
    let mut seen = Vec::new();
    let mut reps = Vec::new();
    for s in geom.table.enumerate()? {
        if seen.contains(&s.key) {
            continue;
        }
        for (k, _) in geom.group.orbit(&s, &geom.table) {
            seen.push(k);
        }
        reps.push(s);
    }
    Ok(reps)
}

/// Levels of all orbit representatives, sorted by energy.
pub fn system_levels(geom: &Geometry, n_max: usize, k: usize) -> Result<Vec<SectorLevel>> {
    let mut all = Vec::new();
    for s in representative_sectors(geom)? {
        all.extend(sector_levels(geom, &s.label(), n_max, k)?);
    }
    all.sort_by(|a, b| a.eigenvalue.total_cmp(&b.eigenvalue));
    Ok(all)
}

/// Lowest converged eigenvalue on a wedge, minimized over its parity classes.
pub fn wedge_ground(geom: &Geometry, wedge: &str, ladder: [usize; 3]) -> Result<f64> {
    converged_sector_levels(geom, wedge, ladder, 1)?
        .iter()
        .map(|l| l.eigenvalue)
        .min_by(f64::total_cmp)
        .ok_or_else(|| Error::Symmetry(format!("no admissible state on {wedge}")))
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct BetaCritical {
    pub beta_c: f64,
    pub uncertainty: f64,
    pub bisection_steps: usize,
}

/// `Λ(BAAB) - Λ(AABB)` for two bosons of mass 1 and two fermions of mass `β`.
pub fn ordering_gap(beta: f64, ladder: [usize; 3]) -> Result<(f64, f64)> {
    let geom = Geometry::new(MassSystem::two_plus_two(beta, Statistics::Boson, Statistics::Fermion)?)?;
    let gap = |l: &[usize; 3]| -> Result<f64> { Ok(wedge_ground(&geom, "BAAB", *l)? - wedge_ground(&geom, "AABB", *l)?) };
    let converged = gap(&ladder)?;
    // the unextrapolated gap at the largest basis measures the convergence error
    let raw = {
        let top = [ladder[2]; 3];
        let a = sector_levels(&geom, "BAAB", top[0], 1)?;
        let b = sector_levels(&geom, "AABB", top[0], 1)?;
        let min = |v: &[SectorLevel]| v.iter().map(|l| l.eigenvalue).fold(f64::INFINITY, f64::min);
        min(&a) - min(&b)
    };
    Ok((converged, (converged - raw).abs()))
}

/// Mass ratio where the 2b+2f ground state switches from the BAAB to the AABB ordering.
pub fn find_beta_critical(lo: f64, hi: f64, tol: f64, ladder: [usize; 3]) -> Result<BetaCritical> {
    let (g_lo, _) = ordering_gap(lo, ladder)?;
    let (g_hi, _) = ordering_gap(hi, ladder)?;
    if g_lo.signum() == g_hi.signum() {
        return Err(Error::NoCrossing { lo, hi });
    }
    let (mut a, mut b, mut fa) = (lo, hi, g_lo);
    let mut steps = 0;
    let mut last_err = 0.0;
    while b - a > tol {
        let m = 0.5 * (a + b);
        let (fm, err) = ordering_gap(m, ladder)?;
        last_err = err;
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
        steps += 1;
    }
    let beta_c = 0.5 * (a + b);
    // convert the eigenvalue convergence error into a shift of the crossing through the gap slope
    let (g1, _) = ordering_gap(a, ladder)?;
    let (g2, _) = ordering_gap(b, ladder)?;
    let slope = ((g2 - g1) / (b - a)).abs().max(1e-12);
    let uncertainty = 0.5 * (b - a) + last_err / slope;
    Ok(BetaCritical { beta_c, uncertainty, bisection_steps: steps })
}
