use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;

use super::state::TrapState;
use crate::error::{Error, Result};

/// Monte Carlo settings shared by all estimators.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct McOptions {
    /// Samples per outer grid point (density, pair correlation) or in total (momentum).
    pub samples: usize,
    pub seed: u64,
    /// Largest acceptable relative error at the peak; exceeding it sets `partial`.
    pub tolerance: Option<f64>,
}

impl Default for McOptions {
    fn default() -> Self {
        Self { samples: 20_000, seed: 1, tolerance: None }
    }
}

/// Values of an observable on a grid, with one-sigma Monte Carlo errors.
#[derive(Debug, Clone, Serialize)]
pub struct ObservableGrid {
    pub kind: String,
    pub axes: Vec<Vec<f64>>,
    /// Row-major over the axes.
    pub values: Vec<f64>,
    pub errors: Vec<f64>,
    pub samples: usize,
    pub seed: u64,
    /// Expected integral: particle number for densities, 1 for pair correlations.
    pub target: f64,
    pub integral: f64,
    pub integral_error: f64,
    /// Set when the peak relative error exceeds the requested tolerance.
    pub partial: bool,
}

impl ObservableGrid {
    pub fn peak(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Value and error at the grid point closest to `x` (1D grids).
    pub fn at(&self, x: f64) -> (f64, f64) {
        let i = nearest(&self.axes[0], x);
        (self.values[i], self.errors[i])
    }

    /// `Σ x² n(x) / Σ n(x)` over a 1D grid.
    pub fn variance(&self) -> f64 {
        let (mut s0, mut s2) = (0.0, 0.0);
        for (x, v) in self.axes[0].iter().zip(&self.values) {
            s0 += v;
            s2 += x * x * v;
        }
        s2 / s0
    }

    fn flag_partial(&mut self, tol: Option<f64>) {
        if let Some(t) = tol {
            let i = (0..self.values.len()).max_by(|&a, &b| self.values[a].total_cmp(&self.values[b])).unwrap_or(0);
            self.partial = self.errors[i] > t * self.values[i].abs();
        }
    }
}

fn nearest(axis: &[f64], x: f64) -> usize {
    (0..axis.len()).min_by(|&a, &b| (axis[a] - x).abs().total_cmp(&(axis[b] - x).abs())).unwrap_or(0)
}

fn trapezoid_weights(axis: &[f64]) -> Vec<f64> {
    let n = axis.len();
    (0..n)
        .map(|i| {
            let l = if i > 0 { axis[i] - axis[i - 1] } else { 0.0 };
            let r = if i + 1 < n { axis[i + 1] - axis[i] } else { 0.0 };
            0.5 * (l + r)
        })
        .collect()
}

/// Gaussian proposal for the spectator coordinates, wide enough to cover `|Ψ|²`.
struct Proposal {
    sigma: Vec<f64>,
}

impl Proposal {
    fn new(state: &TrapState) -> Self {
        let frame = &state.geometry.frame;
        let n = frame.n() as f64;
        // virial: ⟨Σ (m/μ) q²⟩ = E, spread evenly and widened
        let per = 1.5 * state.energy() / n;
        Self { sigma: frame.masses().iter().map(|m| (per * frame.mu() / m).sqrt()).collect() }
    }

    /// Draws the listed particles; returns the proposal density.
    fn draw(&self, rng: &mut ChaCha8Rng, q: &mut [f64], which: &[usize]) -> f64 {
        let mut p = 1.0;
        for &j in which {
            let z: f64 = StandardNormal.sample(rng);
            let s = self.sigma[j];
            q[j] = s * z;
            p *= (-0.5 * z * z).exp() / (s * (2.0 * PI).sqrt());
        }
        p
    }
}

fn point_seed(seed: u64, k: usize) -> u64 {
    seed ^ (k as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

fn check_samples(opts: &McOptions) -> Result<()> {
    if opts.samples < 2 {
        return Err(Error::Domain("Monte Carlo needs at least two samples".into()));
    }
    Ok(())
}

// mean and standard error of |Ψ|²/p with the `fixed` particles pinned
fn marginal(state: &TrapState, prop: &Proposal, fixed: &[(usize, f64)], seed: u64, samples: usize) -> (f64, f64) {
    let n = state.geometry.frame.n();
    let spectators: Vec<usize> = (0..n).filter(|j| !fixed.iter().any(|(i, _)| i == j)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut q = vec![0.0; n];
    for &(i, x) in fixed {
        q[i] = x;
    }
    let (mut s1, mut s2) = (0.0, 0.0);
    for _ in 0..samples {
        let p = prop.draw(&mut rng, &mut q, &spectators);
        let v = state.evaluate(&q).powi(2) / p;
        s1 += v;
        s2 += v * v;
    }
    let m = s1 / samples as f64;
    let var = (s2 / samples as f64 - m * m).max(0.0);
    (m, (var / (samples as f64 - 1.0)).sqrt())
}

/// `n_s(x) = Σ_{i ∈ s} ∫ |Ψ|² Π_{j≠i} dq_j`, integrating to the number of particles of species `s`.
pub fn density(state: &TrapState, species: char, grid: &[f64], opts: &McOptions) -> Result<ObservableGrid> {
    check_samples(opts)?;
    let members = state.geometry.system.members(species);
    let Some(&i0) = members.first() else {
        return Err(Error::Config(format!("no particles of species {species}")));
    };
    let count = members.len() as f64;
    let prop = Proposal::new(state);
    let res: Vec<(f64, f64)> = grid
        .par_iter()
        .enumerate()
        .map(|(k, &x)| marginal(state, &prop, &[(i0, x)], point_seed(opts.seed, k), opts.samples))
        .collect();
    let values: Vec<f64> = res.iter().map(|r| count * r.0).collect();
    let errors: Vec<f64> = res.iter().map(|r| count * r.1).collect();
    let w = trapezoid_weights(grid);
    let integral = values.iter().zip(&w).map(|(v, w)| v * w).sum();
    let integral_error = errors.iter().zip(&w).map(|(e, w)| (e * w).powi(2)).sum::<f64>().sqrt();
    let mut out = ObservableGrid {
        kind: format!("density_{species}"),
        axes: vec![grid.to_vec()],
        values,
        errors,
        samples: opts.samples,
        seed: opts.seed,
        target: count,
        integral,
        integral_error,
        partial: false,
    };
    out.flag_partial(opts.tolerance);
    Ok(out)
}

/// `n_ij(x, y) = ∫ |Ψ|² Π_{k≠i,j} dq_k` for particles `i` and `j` (0-based), integrating to 1.
pub fn pair_correlation(
    state: &TrapState,
    i: usize,
    j: usize,
    xs: &[f64],
    ys: &[f64],
    opts: &McOptions,
) -> Result<ObservableGrid> {
    check_samples(opts)?;
    let n = state.geometry.frame.n();
    if i == j || i >= n || j >= n {
        return Err(Error::Config(format!("bad particle pair ({i}, {j})")));
    }
    let prop = Proposal::new(state);
    let points: Vec<(f64, f64)> = xs.iter().flat_map(|&x| ys.iter().map(move |&y| (x, y))).collect();
    let res: Vec<(f64, f64)> = points
        .par_iter()
        .enumerate()
        .map(|(k, &(x, y))| marginal(state, &prop, &[(i, x), (j, y)], point_seed(opts.seed, k), opts.samples))
        .collect();
    let (wx, wy) = (trapezoid_weights(xs), trapezoid_weights(ys));
    let mut integral = 0.0;
    let mut var = 0.0;
    for (k, (v, e)) in res.iter().enumerate() {
        let w = wx[k / ys.len()] * wy[k % ys.len()];
        integral += w * v;
        var += (w * e).powi(2);
    }
    let mut out = ObservableGrid {
        kind: format!("paircorr_{}{}", i + 1, j + 1),
        axes: vec![xs.to_vec(), ys.to_vec()],
        values: res.iter().map(|r| r.0).collect(),
        errors: res.iter().map(|r| r.1).collect(),
        samples: opts.samples,
        seed: opts.seed,
        target: 1.0,
        integral,
        integral_error: var.sqrt(),
        partial: false,
    };
    out.flag_partial(opts.tolerance);
    Ok(out)
}

/// Position sampling for the momentum distribution: `nx` points on `[-half_width, half_width)`,
/// momenta on the dual periodic grid with `np` points.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct MomentumGrid {
    pub half_width: f64,
    pub nx: usize,
    pub np: usize,
}

impl Default for MomentumGrid {
    fn default() -> Self {
        Self { half_width: 7.0, nx: 64, np: 128 }
    }
}

impl MomentumGrid {
    pub fn positions(&self) -> Vec<f64> {
        let h = 2.0 * self.half_width / self.nx as f64;
        (0..self.nx).map(|k| -self.half_width + k as f64 * h).collect()
    }

    pub fn momenta(&self) -> Vec<f64> {
        let h = 2.0 * self.half_width / self.nx as f64;
        let dp = 2.0 * PI / h / self.np as f64;
        (0..self.np).map(|m| -PI / h + m as f64 * dp).collect()
    }
}

/// Samples per parallel batch of the momentum estimator.
const MOMENTUM_BATCH: usize = 1024;

/// `n_s(p) = (count/2π) ∫ |∫ Ψ(x, q') e^{-ipx} dx|² dq'`, the Fourier transform of the one-body
/// density matrix of a particle of species `s`.
///
/// The inner integral is a trapezoid sum over the position grid and the momenta form its dual
/// grid, so the discrete Parseval identity holds exactly for every spectator sample.
pub fn momentum_distribution(state: &TrapState, species: char, grid: &MomentumGrid, opts: &McOptions) -> Result<ObservableGrid> {
    check_samples(opts)?;
    if grid.np < grid.nx {
        return Err(Error::Config("momentum grid needs np >= nx".into()));
    }
    let members = state.geometry.system.members(species);
    let Some(&i0) = members.first() else {
        return Err(Error::Config(format!("no particles of species {species}")));
    };
    let count = members.len() as f64;
    let n = state.geometry.frame.n();
    let spectators: Vec<usize> = (0..n).filter(|&j| j != i0).collect();
    let xs = grid.positions();
    let ps = grid.momenta();
    let h = 2.0 * grid.half_width / grid.nx as f64;
    let (cos_t, sin_t): (Vec<f64>, Vec<f64>) =
        ps.iter().flat_map(|p| xs.iter().map(move |x| ((p * x).cos(), (p * x).sin()))).unzip();
    let prop = Proposal::new(state);
    let batches = opts.samples.div_ceil(MOMENTUM_BATCH);
    // per batch: Σ v, Σ v² for every momentum, then the Parseval sum and its square
    let partial: Vec<(Vec<f64>, Vec<f64>, f64, f64)> = (0..batches)
        .into_par_iter()
        .map(|b| {
            let len = MOMENTUM_BATCH.min(opts.samples - b * MOMENTUM_BATCH);
            let mut rng = ChaCha8Rng::seed_from_u64(point_seed(opts.seed, b));
            let mut q = vec![0.0; n];
            let mut s1 = vec![0.0; ps.len()];
            let mut s2 = vec![0.0; ps.len()];
            let (mut t1, mut t2) = (0.0, 0.0);
            let mut psi = vec![0.0; xs.len()];
            for _ in 0..len {
                let dens = prop.draw(&mut rng, &mut q, &spectators);
                for (k, x) in xs.iter().enumerate() {
                    q[i0] = *x;
                    psi[k] = state.evaluate(&q);
                }
                for m in 0..ps.len() {
                    let row = m * xs.len();
                    let (mut re, mut im) = (0.0, 0.0);
                    for k in 0..xs.len() {
                        re += psi[k] * cos_t[row + k];
                        im -= psi[k] * sin_t[row + k];
                    }
                    let v = h * h * (re * re + im * im) / (2.0 * PI) / dens;
                    s1[m] += v;
                    s2[m] += v * v;
                }
                let t = h * psi.iter().map(|v| v * v).sum::<f64>() / dens;
                t1 += t;
                t2 += t * t;
            }
            (s1, s2, t1, t2)
        })
        .collect();
    let total = opts.samples as f64;
    let mut s1 = vec![0.0; ps.len()];
    let mut s2 = vec![0.0; ps.len()];
    let (mut t1, mut t2) = (0.0, 0.0);
    for (a, b, c, d) in partial {
        s1.iter_mut().zip(&a).for_each(|(x, y)| *x += y);
        s2.iter_mut().zip(&b).for_each(|(x, y)| *x += y);
        t1 += c;
        t2 += d;
    }
    let stats = |s1: f64, s2: f64| {
        let m = s1 / total;
        (count * m, count * ((s2 / total - m * m).max(0.0) / (total - 1.0)).sqrt())
    };
    let (values, errors): (Vec<f64>, Vec<f64>) = s1.iter().zip(&s2).map(|(a, b)| stats(*a, *b)).unzip();
    let (integral, integral_error) = stats(t1, t2);
    let mut out = ObservableGrid {
        kind: format!("momentum_{species}"),
        axes: vec![ps],
        values,
        errors,
        samples: opts.samples,
        seed: opts.seed,
        target: count,
        integral,
        integral_error,
        partial: false,
    };
    out.flag_partial(opts.tolerance);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{MassSystem, Statistics};
    use crate::observables::spectral_ground_state;

    fn ground(beta: f64) -> TrapState {
        spectral_ground_state(MassSystem::two_plus_two(beta, Statistics::Boson, Statistics::Boson).unwrap(), 10).unwrap()
    }

    #[test]
    fn density_counts_particles_and_is_even() {
        let st = ground(1.0);
        let grid: Vec<f64> = (0..41).map(|k| -5.0 + 0.25 * k as f64).collect();
        let d = density(&st, 'B', &grid, &McOptions { samples: 2000, seed: 2, tolerance: None }).unwrap();
        assert!((d.integral - 2.0).abs() < 3.0 * d.integral_error, "{} ± {}", d.integral, d.integral_error);
        for k in 0..20 {
            let (a, b) = (d.values[k], d.values[40 - k]);
            assert!((a - b).abs() < 3.0 * (d.errors[k].hypot(d.errors[40 - k])) + 1e-12);
        }
    }

    #[test]
    fn pair_correlation_vanishes_at_contact() {
        let st = ground(1.0);
        let axis: Vec<f64> = (0..13).map(|k| -3.0 + 0.5 * k as f64).collect();
        let g = pair_correlation(&st, 0, 2, &axis, &axis, &McOptions { samples: 400, seed: 1, tolerance: None }).unwrap();
        let peak = g.peak();
        for k in 0..axis.len() {
            assert!(g.values[k * axis.len() + k] < 1e-4 * peak);
        }
        // the coarse grid stops at |q| = 3, which loses about a percent
        assert!((g.integral - 1.0).abs() < 3.0 * g.integral_error + 0.02, "{} ± {}", g.integral, g.integral_error);
    }

    #[test]
    fn momentum_parseval_and_symmetry() {
        let st = ground(1.0);
        let grid = MomentumGrid::default();
        let m = momentum_distribution(&st, 'A', &grid, &McOptions { samples: 3000, seed: 8, tolerance: None }).unwrap();
        let dp = m.axes[0][1] - m.axes[0][0];
        let sum: f64 = m.values.iter().sum::<f64>() * dp;
        assert!((sum - m.integral).abs() < 1e-9 * m.integral);
        assert!((m.integral - 2.0).abs() < 3.0 * m.integral_error);
        // p_k and p_{np-k} are opposite
        for k in 1..grid.np / 2 {
            assert!((m.values[k] - m.values[grid.np - k]).abs() < 1e-9 * m.peak());
        }
    }

    #[test]
    fn heavy_species_localizes() {
        let grid: Vec<f64> = (0..31).map(|k| -4.5 + 0.3 * k as f64).collect();
        let opts = McOptions { samples: 1500, seed: 4, tolerance: None };
        let var: Vec<f64> = [1.0, 3.0, 5.0].iter().map(|b| density(&ground(*b), 'B', &grid, &opts).unwrap().variance()).collect();
        assert!(var[0] > var[1] && var[1] > var[2], "{var:?}");
    }

    #[test]
    fn tolerance_flags_partial_results() {
        let st = ground(1.0);
        let d = density(&st, 'A', &[0.0, 1.0], &McOptions { samples: 10, seed: 2, tolerance: Some(1e-6) }).unwrap();
        assert!(d.partial);
        assert!(density(&st, 'C', &[0.0], &McOptions::default()).is_err());
    }
}
