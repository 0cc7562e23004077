use nalgebra::{DMatrix, DVector, SymmetricEigen};
use std::collections::BTreeMap;
use std::sync::Arc;

use super::chart::{SquareMotion, WedgeChart};
use super::galerkin::{assemble_galerkin, sine_mode, Galerkin};
use crate::error::{Error, Result};
use crate::geometry::{apply3, Geometry, GroupElement, Sector, Statistics, Vec3};

/// One eigenpair of the Laplace–Beltrami problem on a wedge.
///
/// `eigenvalue = τ(τ+1)`; the coefficients are normalized so that `∫ f² dΩ = 1` over the wedge.
#[derive(Debug, Clone)]
pub struct AngularSolution {
    pub tau: f64,
    pub eigenvalue: f64,
    pub n_max: usize,
    pub coefficients: DVector<f64>,
    pub chart: Arc<WedgeChart>,
    pub sector: String,
    /// Characters imposed on the stabilizer, by element name.
    pub characters: Vec<(String, f64)>,
}

pub fn tau_of(eigenvalue: f64) -> f64 {
    0.5 * (-1.0 + (1.0 + 4.0 * eigenvalue).sqrt())
}

impl AngularSolution {
    /// Relative energy of radial level `n`: `2n + τ + 3/2`.
    pub fn energy_rel(&self, n: usize) -> f64 {
        2.0 * n as f64 + self.tau + 1.5
    }

    pub fn evaluate_square(&self, u: f64, v: f64) -> f64 {
        let nb = self.n_max;
        let su: Vec<f64> = (1..=nb).map(|n| sine_mode(n, u)).collect();
        let sv: Vec<f64> = (1..=nb).map(|m| sine_mode(m, v)).collect();
        let mut f = 0.0;
        for (n, a) in su.iter().enumerate() {
            let row: f64 = (0..nb).map(|m| self.coefficients[n * nb + m] * sv[m]).sum();
            f += a * row;
        }
        f
    }

    /// Value at a unit direction of relative space; zero outside the wedge.
    pub fn evaluate(&self, w: Vec3) -> f64 {
        if !self.chart.polygon.contains(w, 0.0) {
            return 0.0;
        }
        match self.chart.to_square(w) {
            Some([u, v]) => self.evaluate_square(u.clamp(-1.0, 1.0), v.clamp(-1.0, 1.0)),
            None => 0.0,
        }
    }
}

/// Stabilizer elements of a sector with the rigid motion each induces on the chart square.
pub fn wedge_motions(geom: &Geometry, sector: &Sector, chart: &WedgeChart) -> Result<Vec<(GroupElement, SquareMotion)>> {
    let verts = &chart.polygon.vertices;
    let mut out = Vec::new();
    for g in geom.group.stabilizer(sector, &geom.table) {
        let r = geom.rotation(&g);
        let sigma: Vec<usize> = verts
            .iter()
            .map(|v| {
                let img = apply3(&r, *v);
                verts
                    .iter()
                    .position(|w| (0..3).all(|k| (w[k] - img[k]).abs() < 1e-9))
                    .ok_or_else(|| Error::Symmetry(format!("{g} does not map the vertices of {} to themselves", sector.label())))
            })
            .collect::<Result<_>>()?;
        let m = chart.square_motion(&sigma).ok_or_else(|| {
            Error::IncompatibleSymmetry(format!("{g} is not a rigid motion of the chart square of {}", sector.label()))
        })?;
        out.push((g, m));
    }
    Ok(out)
}

/// Signed image of basis index `(n, m)` (0-based) under `f ↦ f ∘ D`.
fn motion_on_index(m: &SquareMotion, n: usize, k: usize) -> (f64, usize, usize) {
    // φ_j(-x) = (-1)^{j+1} φ_j(x) with the 1-based mode number j
    let flip = |s: f64, idx: usize| if s < 0.0 && idx % 2 == 1 { -1.0 } else { 1.0 };
    if m.swap {
        // f(su·v, sv·u): the u-mode of f becomes a v-mode
        (flip(m.su, n) * flip(m.sv, k), k, n)
    } else {
        (flip(m.su, n) * flip(m.sv, k), n, k)
    }
}

/// Orthonormal columns spanning the coefficient vectors with `f ∘ D_h = χ(h) f` for every motion.
pub fn symmetry_basis(n_max: usize, motions: &[(SquareMotion, f64)]) -> DMatrix<f64> {
    let dim = n_max * n_max;
    let mut columns: BTreeMap<usize, Vec<(usize, f64)>> = BTreeMap::new();
    for idx in 0..dim {
        let mut acc: BTreeMap<usize, f64> = BTreeMap::new();
        let (n, k) = (idx / n_max, idx % n_max);
        for (m, chi) in motions {
            let (s, n2, k2) = motion_on_index(m, n, k);
            *acc.entry(n2 * n_max + k2).or_default() += chi * s;
        }
        let entries: Vec<(usize, f64)> = acc.into_iter().filter(|(_, v)| v.abs() > 1e-12).collect();
        if let Some(&(lead, _)) = entries.first() {
            columns.entry(lead).or_insert(entries);
        }
    }
    let mut b = DMatrix::zeros(dim, columns.len());
    for (c, entries) in columns.values().enumerate() {
        let norm = entries.iter().map(|(_, v)| v * v).sum::<f64>().sqrt();
        for &(r, v) in entries {
            b[(r, c)] = v / norm;
        }
    }
    b
}

/// Lowest `k` eigenpairs of `A c = Λ W c` restricted to the columns of `basis`.
pub fn solve_angular_spectrum(g: &Galerkin, basis: Option<&DMatrix<f64>>, k: usize) -> Result<Vec<(f64, DVector<f64>)>> {
    let (a, w) = match basis {
        Some(b) => (b.transpose() * &g.stiffness * b, b.transpose() * &g.gram * b),
        None => (g.stiffness.clone(), g.gram.clone()),
    };
    if a.nrows() == 0 {
        return Ok(Vec::new());
    }
    let chol = w.cholesky().ok_or(Error::NotPositiveDefinite)?;
    let l = chol.l();
    let li = l.clone().try_inverse().ok_or(Error::NotPositiveDefinite)?;
    let c = &li * a * li.transpose();
    let c = (&c + c.transpose()) * 0.5;
    let eig = SymmetricEigen::new(c);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let lit = li.transpose();
    Ok(order
        .into_iter()
        .take(k)
        .map(|i| {
            let y = &lit * eig.eigenvectors.column(i);
            let mut c = match basis {
                Some(b) => b * y,
                None => y,
            };
            // fix the sign by the largest coefficient
            let imax = c.iamax();
            if c[imax] < 0.0 {
                c = -c;
            }
            (eig.eigenvalues[i], c)
        })
        .collect())
}

/// Galerkin problem on one sector, with the symmetry motions of its stabilizer.
#[derive(Debug, Clone)]
pub struct WedgeSolver {
    pub sector: Sector,
    pub chart: Arc<WedgeChart>,
    pub galerkin: Galerkin,
    pub motions: Vec<(GroupElement, SquareMotion)>,
}

impl WedgeSolver {
    pub fn new(geom: &Geometry, wedge: &str, n_max: usize) -> Result<Self> {
        let sector = geom.sector(wedge)?;
        let chart = WedgeChart::for_sector(geom, &sector)?;
        let motions = wedge_motions(geom, &sector, &chart)?;
        let galerkin = assemble_galerkin(&chart, n_max)?;
        Ok(Self { sector, chart: Arc::new(chart), galerkin, motions })
    }

    /// Lowest `k` states with the stabilizer characters of the given statistics and parity.
    pub fn solve_class(&self, geom: &Geometry, parity: f64, k: usize) -> Result<Vec<AngularSolution>> {
        self.solve_with(|g| g.character(&geom.system, parity), k)
    }

    /// Lowest `k` states with an arbitrary character on the stabilizer.
    pub fn solve_with(&self, chi: impl Fn(&GroupElement) -> f64, k: usize) -> Result<Vec<AngularSolution>> {
        let signed: Vec<(SquareMotion, f64)> = self.motions.iter().map(|(g, m)| (*m, chi(g))).collect();
        let basis = symmetry_basis(self.galerkin.n_max, &signed);
        let characters = self.motions.iter().map(|(g, _)| (g.to_string(), chi(g))).collect::<Vec<_>>();
        Ok(solve_angular_spectrum(&self.galerkin, Some(&basis), k)?
            .into_iter()
            .map(|(lam, c)| self.solution(lam, c, characters.clone()))
            .collect())
    }

    /// Lowest `k` states without symmetry restriction.
    pub fn solve_all(&self, k: usize) -> Result<Vec<AngularSolution>> {
        Ok(solve_angular_spectrum(&self.galerkin, None, k)?
            .into_iter()
            .map(|(lam, c)| self.solution(lam, c, Vec::new()))
            .collect())
    }

    fn solution(&self, eigenvalue: f64, coefficients: DVector<f64>, characters: Vec<(String, f64)>) -> AngularSolution {
        AngularSolution {
            tau: tau_of(eigenvalue),
            eigenvalue,
            n_max: self.galerkin.n_max,
            coefficients,
            chart: self.chart.clone(),
            sector: self.sector.label(),
            characters,
        }
    }
}

/// Measured characters of a solution under the stabilizer of its wedge.
#[derive(Debug, Clone)]
pub struct SymmetryReport {
    pub characters: Vec<(String, f64)>,
    /// Largest deviation `|f∘D - s f|` relative to the sup of `|f|` over the samples.
    pub residual: f64,
    /// Statistics of species A and B that the measured characters allow.
    pub compatible: Vec<(Statistics, Statistics)>,
}

/// Characters on a square grid of samples; errors when a character is not `±1` to `tol`.
pub fn classify_symmetry(sol: &AngularSolution, motions: &[(GroupElement, SquareMotion)], tol: f64) -> Result<SymmetryReport> {
    let samples: Vec<[f64; 2]> = (0..9)
        .flat_map(|i| (0..9).map(move |j| [-0.9 + 0.225 * i as f64, -0.85 + 0.21 * j as f64]))
        .collect();
    let vals: Vec<f64> = samples.iter().map(|p| sol.evaluate_square(p[0], p[1])).collect();
    let peak = vals.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let mut characters = Vec::new();
    let mut residual: f64 = 0.0;
    for (g, m) in motions {
        let moved: Vec<f64> = samples
            .iter()
            .map(|p| {
                let q = m.apply(*p);
                sol.evaluate_square(q[0], q[1])
            })
            .collect();
        let num: f64 = moved.iter().zip(&vals).map(|(a, b)| a * b).sum();
        let den: f64 = vals.iter().map(|b| b * b).sum();
        let s = if num >= 0.0 { 1.0 } else { -1.0 };
        let dev = moved.iter().zip(&vals).map(|(a, b)| (a - s * b).abs()).fold(0.0, f64::max) / peak;
        if dev > tol {
            return Err(Error::Symmetry(format!(
                "mixed symmetry under {g} (ratio {:.3e}); re-diagonalize the degenerate block with projectors",
                num / den
            )));
        }
        residual = residual.max(dev);
        characters.push((g.to_string(), s));
    }
    let mut compatible = Vec::new();
    for a in [Statistics::Boson, Statistics::Fermion] {
        for b in [Statistics::Boson, Statistics::Fermion] {
            let ok = characters.iter().all(|(name, s)| match name.as_str() {
                "T12" => *s == a.exchange_sign(),
                "T34" => *s == b.exchange_sign(),
                "T12T34" => *s == a.exchange_sign() * b.exchange_sign(),
                _ => true,
            });
            if ok {
                compatible.push((a, b));
            }
        }
    }
    Ok(SymmetryReport { characters, residual, compatible })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::MassSystem;

    fn geom(beta: f64, a: Statistics, b: Statistics) -> Geometry {
        Geometry::new(MassSystem::two_plus_two(beta, a, b).unwrap()).unwrap()
    }

    #[test]
    fn symmetry_basis_dimensions() {
        // the swap alone splits n_max² into symmetric and antisymmetric halves
        let swap = SquareMotion { swap: true, su: 1.0, sv: 1.0 };
        let id = SquareMotion { swap: false, su: 1.0, sv: 1.0 };
        let even = symmetry_basis(4, &[(id, 1.0), (swap, 1.0)]);
        let odd = symmetry_basis(4, &[(id, 1.0), (swap, -1.0)]);
        assert_eq!((even.ncols(), odd.ncols()), (10, 6));
        assert!((even.transpose() * &odd).amax() < 1e-15);
    }

    #[test]
    fn fully_ordered_wedges_at_unit_ratio() {
        // ABAB is one of the 24 equal orderings; its ground state is the Girardeau state
        let g = geom(1.0, Statistics::Fermion, Statistics::Fermion);
        let s = WedgeSolver::new(&g, "ABAB", 16).unwrap();
        let lam = s.solve_all(1).unwrap()[0].eigenvalue;
        assert!((lam - 42.0).abs() / 42.0 < 2e-3, "{lam}");
    }

    #[test]
    fn aabb_odd_odd_is_fermionized() {
        let g = geom(1.0, Statistics::Fermion, Statistics::Fermion);
        let s = WedgeSolver::new(&g, "AABB", 16).unwrap();
        let sol = s.solve_class(&g, 1.0, 1).unwrap().remove(0);
        assert!((sol.tau - 6.0).abs() < 1e-2, "{}", sol.tau);
    }
}
