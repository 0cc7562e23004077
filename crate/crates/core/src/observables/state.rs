use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::polygon::{add, dot, normalize, scale};
use crate::geometry::{apply3, Geometry, GroupElement, MassSystem, SectorKey, Vec3};
use crate::grid::GridSolution;
use crate::radial::{CmState, RadialState};
use crate::spectral::{system_levels, AngularSolution, WedgeSolver};

/// A hyperangular eigenfunction on one wedge, normalized over that wedge.
pub trait AngularFunction: Send + Sync {
    /// Value at a unit direction; zero outside the wedge.
    fn value(&self, w: Vec3) -> f64;
    fn tau(&self) -> f64;
    /// Label of the wedge, e.g. `AABB/1234`.
    fn wedge(&self) -> String;
}

impl AngularFunction for AngularSolution {
    fn value(&self, w: Vec3) -> f64 {
        self.evaluate(w)
    }
    fn tau(&self) -> f64 {
        self.tau
    }
    fn wedge(&self) -> String {
        self.sector.clone()
    }
}

impl AngularFunction for GridSolution {
    fn value(&self, w: Vec3) -> f64 {
        self.evaluate(w)
    }
    fn tau(&self) -> f64 {
        GridSolution::tau(self)
    }
    fn wedge(&self) -> String {
        self.problem.label.clone()
    }
}

/// A sector carrying a copy of the wedge function, with its sign.
#[derive(Debug, Clone, Serialize)]
pub struct SupportWedge {
    pub label: String,
    pub sign: f64,
    pub weight: f64,
}

#[derive(Clone)]
struct Pullback {
    key: SectorKey,
    inverse: GroupElement,
    sign: f64,
}

/// Full four-body eigenstate `Ψ(q)`, built from one wedge solution by exchange and parity images.
#[derive(Clone)]
pub struct TrapState {
    pub geometry: Arc<Geometry>,
    pub angular: Arc<dyn AngularFunction>,
    pub radial: RadialState,
    pub cm: CmState,
    /// Total parity of `Ψ`.
    pub parity: f64,
    pub support: Vec<SupportWedge>,
    scale: f64,
    pullbacks: Vec<Pullback>,
}

impl std::fmt::Debug for TrapState {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TrapState")
            .field("wedge", &self.angular.wedge())
            .field("radial", &self.radial)
            .field("cm", &self.cm)
            .field("parity", &self.parity)
            .field("support", &self.support)
            .finish()
    }
}

/// Relative tolerance of the sampled symmetry check in [`assemble_state`].
pub const SYMMETRY_TOL: f64 = 1e-6;

/// Builds `Ψ = c χ(g) R(ρ)/ρ f(g⁻¹ q) φ_cm(R)` on every image `g · W` of the wedge.
///
/// `parity` is the total parity; the angular function must carry the matching characters on
/// the stabilizer of its wedge (parity elements pick up the center-of-mass sign `(-1)^χ`).
pub fn assemble_state(
    geometry: Arc<Geometry>,
    angular: Arc<dyn AngularFunction>,
    radial: RadialState,
    cm: CmState,
    parity: f64,
) -> Result<TrapState> {
    let geom = &*geometry;
    if geom.frame.n() != 4 {
        return Err(Error::InvalidSystem("state assembly needs four particles".into()));
    }
    let sector = geom.sector(&angular.wedge())?;
    let poly = geom.polygon(&sector)?;
    let cm_sign = if cm.chi.is_multiple_of(2) { 1.0 } else { -1.0 };
    let chi = |g: &GroupElement| g.character(&geom.system, parity);
    // sampled check of the stabilizer characters on interior points
    let probes: Vec<Vec3> = (0..24)
        .map(|k| {
            let t = k as f64 * 0.618_033_988_7;
            poly.vertices.iter().enumerate().fold(poly.pole, |acc, (i, v)| {
                let c = 0.45 * (((i as f64 + 1.3) * t).sin() * 0.5 + 0.5);
                normalize(add(acc, scale(*v, c)))
            })
        })
        .filter(|w| poly.contains(*w, -1e-9))
        .collect();
    let peak = probes.iter().map(|w| angular.value(*w).abs()).fold(0.0, f64::max);
    for h in geom.group.stabilizer(&sector, &geom.table) {
        let want = chi(&h) * if h.parity { cm_sign } else { 1.0 };
        let r = geom.rotation(&h);
        for w in &probes {
            let dev = (angular.value(apply3(&r, *w)) - want * angular.value(*w)).abs();
            if dev > SYMMETRY_TOL * peak.max(f64::MIN_POSITIVE) {
                return Err(Error::IncompatibleSymmetry(format!(
                    "{} does not transform with character {want} under {h} (deviation {dev:e})",
                    sector.label()
                )));
            }
        }
    }
    let orbit = geom.group.orbit(&sector, &geom.table);
    let scale = 1.0 / (geom.frame.jacobian_factor() * orbit.len() as f64).sqrt();
    let weight = 1.0 / orbit.len() as f64;
    let mut support = Vec::new();
    let mut pullbacks = Vec::new();
    for (key, g) in orbit {
        let sign = chi(&g);
        support.push(SupportWedge { label: geom.table.describe(key)?.label(), sign, weight });
        pullbacks.push(Pullback { key, inverse: g.inverse(), sign });
    }
    Ok(TrapState { geometry, angular, radial, cm, parity, support, scale, pullbacks })
}

impl TrapState {
    pub fn energy(&self) -> f64 {
        self.radial.energy_rel + self.cm.energy
    }

    /// `Ψ(q_1, ..., q_4)`, normalized so that `∫ |Ψ|² dq = 1`.
    pub fn evaluate(&self, q: &[f64]) -> f64 {
        let key = self.geometry.table.key_of(q);
        let Some(p) = self.pullbacks.iter().find(|p| p.key == key) else { return 0.0 };
        let qp = p.inverse.apply(q);
        let (rel, r) = self.geometry.frame.to_jacobi(&qp);
        let w = [rel[0], rel[1], rel[2]];
        let rho = dot(w, w).sqrt();
        if rho == 0.0 {
            return 0.0;
        }
        let f = self.angular.value(scale(w, 1.0 / rho));
        self.scale * p.sign * self.radial.evaluate(rho) / rho * f * self.cm.evaluate(r)
    }

    /// Value in Jacobi coordinates `(x, y, z, R)`.
    pub fn evaluate_jacobi(&self, rel: &[f64], r: f64) -> f64 {
        self.evaluate(&self.geometry.frame.from_jacobi(rel, r))
    }
}

/// Ground state of a four-body system from the spectral solver, with the CM in its ground state.
pub fn spectral_ground_state(system: MassSystem, n_max: usize) -> Result<TrapState> {
    let geom = Arc::new(Geometry::new(system)?);
    let level = system_levels(&geom, n_max, 1)?
        .into_iter()
        .next()
        .ok_or_else(|| Error::Symmetry("system has no admissible state".into()))?;
    spectral_state(geom, &level.sector, level.parity.unwrap_or(1.0), n_max, 0)
}

/// The `index`-th state of a wedge symmetry class, with radial `n = 0` and the CM ground state.
pub fn spectral_state(geom: Arc<Geometry>, wedge: &str, parity: f64, n_max: usize, index: usize) -> Result<TrapState> {
    let solver = WedgeSolver::new(&geom, wedge, n_max)?;
    let sol = solver
        .solve_class(&geom, parity, index + 1)?
        .into_iter()
        .nth(index)
        .ok_or_else(|| Error::Symmetry(format!("{wedge} has fewer than {} states in this class", index + 1)))?;
    let radial = RadialState::new(0, sol.tau)?;
    assemble_state(geom, Arc::new(sol), radial, CmState::new(0), parity)
}
