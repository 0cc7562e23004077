use serde::Serialize;

use super::fem::FemSystem;
use super::lanczos::lowest_eigenpairs;
use super::mesh::FanMesh;
use crate::error::{Error, Result};
use crate::geometry::polygon::{dot, normalize, scale};
use crate::geometry::{apply3, EdgeCondition, Geometry, GroupElement, SphericalPolygon, Statistics, Vec3};

/// Coarsest lattice resolution of the default Richardson ladder `n, 2n, 4n`.
pub const DEFAULT_GRID_N: usize = 16;

/// Smallest observed convergence order accepted as asymptotic.
pub const MIN_ORDER: f64 = 1.8;

/// Lanczos shift; the Laplace–Beltrami operator is non-negative.
const SHIFT: f64 = -1.0;

/// A spherical domain to solve on, optionally reduced by mirror symmetries of a larger wedge.
#[derive(Debug, Clone)]
pub struct GridProblem {
    pub label: String,
    /// Fundamental domain actually meshed.
    pub domain: SphericalPolygon,
    /// Wedge that the domain tiles under `images`.
    pub wedge: SphericalPolygon,
    /// Rotation matrix and character of every symmetry used in the reduction.
    pub images: Vec<([[f64; 3]; 3], f64)>,
}

impl GridProblem {
    pub fn whole(label: impl Into<String>, polygon: SphericalPolygon) -> Self {
        let id = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
        Self { label: label.into(), domain: polygon.clone(), wedge: polygon, images: vec![(id, 1.0)] }
    }

    /// The symmetry class of a wedge fixed by `chi`, meshed on one mirror chamber.
    ///
    /// Requires the stabilizer to be generated by its reflections.
    pub fn for_class(geom: &Geometry, wedge: &str, chi: impl Fn(&GroupElement) -> f64) -> Result<Self> {
        let sector = geom.sector(wedge)?;
        let poly = geom.polygon(&sector)?;
        let stab = geom.group.stabilizer(&sector, &geom.table);
        let rot: Vec<[[f64; 3]; 3]> = stab.iter().map(|g| geom.rotation(g)).collect();
        let reflections: Vec<usize> = (0..stab.len()).filter(|&i| det3(&rot[i]) < 0.0).collect();
        let generated = closure(&reflections.iter().map(|&i| stab[i].clone()).collect::<Vec<_>>(), stab[0].perm.len());
        if generated.len() != stab.len() {
            return Err(Error::IncompatibleSymmetry(format!(
                "reflections generate {} of the {} stabilizer elements of {}",
                generated.len(),
                stab.len(),
                sector.label()
            )));
        }
        // a generic interior point picks one chamber
        let probe = normalize(
            poly.vertices
                .iter()
                .enumerate()
                .fold(poly.pole, |acc, (k, v)| crate::geometry::polygon::add(acc, scale(*v, 0.1 / (k as f64 + 1.7)))),
        );
        let mut domain = poly.clone();
        for &i in &reflections {
            let mut n = mirror_normal(&rot[i]);
            if dot(n, probe) < 0.0 {
                n = scale(n, -1.0);
            }
            let condition = if chi(&stab[i]) > 0.0 { EdgeCondition::Neumann } else { EdgeCondition::Dirichlet };
            domain = domain.clip(n, condition)?;
        }
        let images = stab.iter().zip(&rot).map(|(g, r)| (*r, chi(g))).collect();
        Ok(Self { label: sector.label(), domain, wedge: poly, images })
    }

    /// Number of copies of the domain that tile the wedge.
    pub fn multiplicity(&self) -> usize {
        self.images.len()
    }
}

fn det3(m: &[[f64; 3]; 3]) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

// eigenvector of eigenvalue -1 of a reflection: the largest column of (I - R)
fn mirror_normal(r: &[[f64; 3]; 3]) -> Vec3 {
    let col = |j: usize| [if j == 0 { 1.0 } else { 0.0 } - r[0][j], if j == 1 { 1.0 } else { 0.0 } - r[1][j], if j == 2 { 1.0 } else { 0.0 } - r[2][j]];
    let best = (0..3).max_by(|&a, &b| dot(col(a), col(a)).total_cmp(&dot(col(b), col(b)))).unwrap();
    normalize(col(best))
}

fn closure(gens: &[GroupElement], n: usize) -> Vec<GroupElement> {
    let mut out = vec![GroupElement::identity(n)];
    let mut i = 0;
    while i < out.len() {
        for g in gens {
            let h = out[i].compose(g);
            if !out.contains(&h) {
                out.push(h);
            }
        }
        i += 1;
    }
    out
}

/// Eigenpairs of one mesh resolution.
#[derive(Debug, Clone)]
pub struct GridSpectrum {
    pub eigenvalues: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
    pub mesh: FanMesh,
}

/// Lowest `k` Laplace–Beltrami eigenpairs of the domain at lattice resolution `n`.
pub fn solve_grid_spectrum(problem: &GridProblem, n: usize, k: usize) -> Result<GridSpectrum> {
    let mesh = FanMesh::new(&problem.domain, n);
    let fem = FemSystem::assemble(&mesh);
    let pairs = lowest_eigenpairs(&fem.stiffness, &fem.mass, k, SHIFT)?;
    let (eigenvalues, vectors) = pairs.into_iter().map(|(l, x)| (l, fem.expand(&x))).unzip();
    Ok(GridSpectrum { eigenvalues, vectors, mesh })
}

/// Richardson-extrapolated eigenvalues from resolutions `n`, `2n` and `4n`.
#[derive(Debug, Clone, Serialize)]
pub struct GridEstimate {
    pub label: String,
    pub n: usize,
    /// `(4Λ_{4n} - Λ_{2n}) / 3`.
    pub values: Vec<f64>,
    pub raw: [Vec<f64>; 3],
    /// Observed order `log2((Λ_n - Λ_{2n}) / (Λ_{2n} - Λ_{4n}))` per level.
    pub orders: Vec<f64>,
    /// Relative change between the extrapolants of `(n, 2n)` and `(2n, 4n)` per level.
    pub rel_change: Vec<f64>,
}

impl GridEstimate {
    pub fn is_asymptotic(&self) -> bool {
        self.orders.iter().all(|p| *p >= MIN_ORDER)
    }
}

pub fn richardson_eigenvalues(problem: &GridProblem, n: usize, k: usize) -> Result<GridEstimate> {
    let raw = [n, 2 * n, 4 * n].map(|m| solve_grid_spectrum(problem, m, k).map(|s| s.eigenvalues));
    let [a, b, c] = raw;
    let raw = [a?, b?, c?];
    let mut values = Vec::with_capacity(k);
    let mut orders = Vec::with_capacity(k);
    let mut rel_change = Vec::with_capacity(k);
    for i in 0..k.min(raw[2].len()) {
        let (l1, l2, l4) = (raw[0][i], raw[1][i], raw[2][i]);
        let r1 = (4.0 * l2 - l1) / 3.0;
        let r2 = (4.0 * l4 - l2) / 3.0;
        values.push(r2);
        orders.push(((l1 - l2) / (l2 - l4)).abs().log2());
        rel_change.push((r2 - r1).abs() / r2.abs().max(1.0));
    }
    Ok(GridEstimate { label: problem.label.clone(), n, values, raw, orders, rel_change })
}

/// A normalized grid eigenfunction, evaluated on the whole wedge by unfolding the domain.
#[derive(Debug, Clone)]
pub struct GridSolution {
    pub eigenvalue: f64,
    pub problem: GridProblem,
    mesh: FanMesh,
    values: Vec<f64>,
}

impl GridSolution {
    pub fn new(problem: &GridProblem, spectrum: &GridSpectrum, index: usize) -> Self {
        // unit M-norm on the domain; the wedge holds `multiplicity` copies
        let s = 1.0 / (problem.multiplicity() as f64).sqrt();
        Self {
            eigenvalue: spectrum.eigenvalues[index],
            problem: problem.clone(),
            mesh: spectrum.mesh.clone(),
            values: spectrum.vectors[index].iter().map(|v| v * s).collect(),
        }
    }

    pub fn tau(&self) -> f64 {
        crate::spectral::tau_of(self.eigenvalue)
    }

    /// Value at a unit direction; zero outside the wedge.
    pub fn evaluate(&self, w: Vec3) -> f64 {
        if !self.problem.wedge.contains(w, 1e-12) {
            return 0.0;
        }
        for (r, chi) in &self.problem.images {
            let img = apply3(r, w);
            if self.problem.domain.contains(img, 1e-12) {
                if let Some(v) = self.mesh.interpolate(&self.values, img) {
                    return chi * v;
                }
            }
        }
        0.0
    }
}

/// Ground-state relative energy of a 3+1 system on its symmetric `AABA` wedge.
///
/// `None` marks mass ratios where the wedge is not a chartable polygon.
pub fn three_plus_one_energy(beta: f64, majority: Statistics, n: usize) -> Result<Option<f64>> {
    let geom = Geometry::new(crate::geometry::MassSystem::three_plus_one(beta, majority)?)?;
    let problem = match GridProblem::for_class(&geom, "AABA", |g| g.character(&geom.system, 1.0)) {
        Ok(p) => p,
        Err(Error::Chart(_)) => return Ok(None),
        Err(e) => return Err(e),
    };
    let est = richardson_eigenvalues(&problem, n, 1)?;
    Ok(Some(crate::spectral::tau_of(est.values[0]) + 1.5))
}
