use nalgebra::DMatrix;
use std::f64::consts::FRAC_PI_2;

use super::chart::WedgeChart;
use crate::error::{Error, Result};
use crate::quadrature::GaussLegendre;

/// Relative change of any entry allowed when the quadrature is doubled.
pub const QUADRATURE_GATE: f64 = 1e-8;

/// Fewest quadrature nodes per axis, whatever the basis size.
pub const MIN_NODES: usize = 48;

/// Quadrature nodes per axis for a given basis size.
pub fn nodes_for(n_max: usize) -> usize {
    (4 * n_max).max(MIN_NODES)
}

/// `sin(πn(x-1)/2)`, the `n`-th sine mode vanishing at `x = ±1`.
pub fn sine_mode(n: usize, x: f64) -> f64 {
    (FRAC_PI_2 * n as f64 * (x - 1.0)).sin()
}

pub fn sine_mode_derivative(n: usize, x: f64) -> f64 {
    let k = FRAC_PI_2 * n as f64;
    k * (k * (x - 1.0)).cos()
}

/// Stiffness and Gram matrices of the sine basis on a wedge.
///
/// Basis index `k = (n-1)·n_max + (m-1)` for `φ_n(u) φ_m(v)`, `1 <= n, m <= n_max`.
#[derive(Debug, Clone)]
pub struct Galerkin {
    pub n_max: usize,
    pub stiffness: DMatrix<f64>,
    pub gram: DMatrix<f64>,
    /// Largest relative entry change observed in the doubling check.
    pub quadrature_change: f64,
}

/// Doublings tried before the quadrature counts as unresolved.
pub const MAX_DOUBLINGS: usize = 4;

/// Assembles with [`nodes_for`] nodes per axis, doubling until two successive rules agree.
pub fn assemble_galerkin(chart: &WedgeChart, n_max: usize) -> Result<Galerkin> {
    if n_max == 0 {
        return Err(Error::Domain("basis needs n_max >= 1".into()));
    }
    let mut q = nodes_for(n_max);
    let (mut a1, mut w1) = assemble_with(chart, n_max, q);
    let mut change = f64::INFINITY;
    for _ in 0..MAX_DOUBLINGS {
        q *= 2;
        let (a2, w2) = assemble_with(chart, n_max, q);
        change = rel_change(&a1, &a2).max(rel_change(&w1, &w2));
        if change <= QUADRATURE_GATE {
            return Ok(Galerkin { n_max, stiffness: a2, gram: w2, quadrature_change: change });
        }
        (a1, w1) = (a2, w2);
    }
    Err(Error::Quadrature { change })
}

fn rel_change(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    let scale = b.amax().max(f64::MIN_POSITIVE);
    (a - b).amax() / scale
}

/// Tensor Gauss–Legendre assembly with `nq` nodes per axis, by sum factorization.
pub fn assemble_with(chart: &WedgeChart, n_max: usize, nq: usize) -> (DMatrix<f64>, DMatrix<f64>) {
    let rule = GaussLegendre::new(nq);
    let x = &rule.nodes;
    let s = DMatrix::from_fn(nq, n_max, |i, n| sine_mode(n + 1, x[i]));
    let d = DMatrix::from_fn(nq, n_max, |i, n| sine_mode_derivative(n + 1, x[i]));

    let mut guu = DMatrix::zeros(nq, nq);
    let mut guv = DMatrix::zeros(nq, nq);
    let mut gvv = DMatrix::zeros(nq, nq);
    let mut gw = DMatrix::zeros(nq, nq);
    for i in 0..nq {
        for j in 0..nq {
            let m = chart.metric(x[i], x[j]);
            let w = rule.weights[i] * rule.weights[j];
            guu[(i, j)] = w * m.k[0][0];
            guv[(i, j)] = w * m.k[0][1];
            gvv[(i, j)] = w * m.k[1][1];
            gw[(i, j)] = w * m.w;
        }
    }

    let uu = tensor_term(&d, &s, &d, &s, &guu);
    let uv = tensor_term(&d, &s, &s, &d, &guv);
    let vv = tensor_term(&s, &d, &s, &d, &gvv);
    let stiffness = &uu + &uv + uv.transpose() + &vv;
    let gram = tensor_term(&s, &s, &s, &s, &gw);
    (symmetrize(stiffness), symmetrize(gram))
}

fn symmetrize(m: DMatrix<f64>) -> DMatrix<f64> {
    (&m + m.transpose()) * 0.5
}

// M[(n,m),(n',m')] = Σ_ij X_n(u_i) Y_m(v_j) G_ij X'_n'(u_i) Y'_m'(v_j)
fn tensor_term(
    x: &DMatrix<f64>,
    y: &DMatrix<f64>,
    xp: &DMatrix<f64>,
    yp: &DMatrix<f64>,
    g: &DMatrix<f64>,
) -> DMatrix<f64> {
    let nq = x.nrows();
    let nb = x.ncols();
    let pairs = |a: &DMatrix<f64>, b: &DMatrix<f64>| {
        DMatrix::from_fn(nq, nb * nb, |i, c| a[(i, c / nb)] * b[(i, c % nb)])
    };
    let px = pairs(x, xp);
    let py = pairs(y, yp);
    // H[(n,n'), j] = Σ_i P[i,(n,n')] G[i,j];  R = H · P_y
    let h = px.transpose() * g;
    let r = h * py;
    let dim = nb * nb;
    DMatrix::from_fn(dim, dim, |row, col| {
        let (n, m) = (row / nb, row % nb);
        let (np, mp) = (col / nb, col % nb);
        r[(n * nb + np, m * nb + mp)]
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::chart::chart_from_beta;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn sizes() {
        let c = chart_from_beta(1.0, "AABB").unwrap();
        let (a, w) = assemble_with(&c, 2, 8);
        assert_eq!((a.nrows(), a.ncols(), w.nrows()), (4, 4, 4));
    }

    #[test]
    fn gram_swap_symmetric_at_unit_ratio() {
        let c = chart_from_beta(1.0, "AABB").unwrap();
        let g = assemble_galerkin(&c, 6).unwrap();
        let nb = 6;
        for r in 0..nb * nb {
            for s in 0..nb * nb {
                let rt = (r % nb) * nb + r / nb;
                let st = (s % nb) * nb + s / nb;
                assert!((g.gram[(r, s)] - g.gram[(rt, st)]).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn gram_entry_against_monte_carlo() {
        let beta: f64 = 1.0;
        let c = chart_from_beta(beta, "AABB").unwrap();
        let g = assemble_galerkin(&c, 4).unwrap();
        // independent: uniform (λ, γ) samples on the square with the closed-form weight
        let xi = beta.sqrt().atan();
        let s2 = (2.0 * xi).sin().powi(2);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 1_000_000;
        let (mut sum, mut sum2) = (0.0, 0.0);
        for _ in 0..n {
            let l: f64 = rng.random_range(-1.0..1.0);
            let m: f64 = rng.random_range(-1.0..1.0);
            let d = s2 + l * l + m * m + 2.0 * l * m * (2.0 * xi).cos();
            let f = 4.0 * (sine_mode(1, l) * sine_mode(1, m)).powi(2) * s2 / d.powf(1.5);
            sum += f;
            sum2 += f * f;
        }
        let mean = sum / n as f64;
        let err = ((sum2 / n as f64 - mean * mean) / n as f64).sqrt();
        assert!((g.gram[(0, 0)] - mean).abs() < 4.0 * err, "{} vs {mean} ± {err}", g.gram[(0, 0)]);
    }

    #[test]
    fn gram_is_positive_definite() {
        for w in ["AABB", "ABBA", "ABAB"] {
            let c = chart_from_beta(3.0, w).unwrap();
            let g = assemble_galerkin(&c, 8).unwrap();
            assert!(g.gram.clone().cholesky().is_some(), "{w}");
            assert!(g.quadrature_change < QUADRATURE_GATE);
        }
    }
}
