use nalgebra::DMatrix;

use super::system::MassSystem;
use crate::error::{Error, Result};

/// Linear map from particle coordinates `q` to Jacobi coordinates `(Q_1, ..., Q_{N-1}, R)`.
///
/// Lengths are in units of the oscillator length of the reference mass `mu`. In these
/// coordinates the Hamiltonian `½ Σ (mu/m_i) p_i² + (m_i/mu) q_i²` becomes `½ Σ (P_k² + Q_k²)`,
/// which is equivalent to the mass-weighted matrix `U diag(√(mu/m_j))` being orthogonal.
/// The last coordinate is `R = Σ m_i q_i / √(M mu)`.
#[derive(Debug, Clone)]
pub struct JacobiFrame {
    masses: Vec<f64>,
    mu: f64,
    /// Recursive cluster construction, valid for any `N`.
    recursive: DMatrix<f64>,
    /// Pair-pair matrix `(x, y, z, R)` for four particles.
    pair_pair: Option<DMatrix<f64>>,
    primary_inverse: DMatrix<f64>,
}

impl JacobiFrame {
    pub fn new(sys: &MassSystem) -> Result<Self> {
        Self::with_mu(sys, sys.default_mu())
    }

    pub fn with_mu(sys: &MassSystem, mu: f64) -> Result<Self> {
        if !(mu > 0.0 && mu.is_finite()) {
            return Err(Error::Domain(format!("reference mass must be positive, got {mu}")));
        }
        let masses = sys.masses();
        if masses.iter().any(|&m| !(m > 0.0)) {
            return Err(Error::Domain("masses must be positive".into()));
        }
        let recursive = recursive_matrix(&masses, mu);
        let pair_pair = (masses.len() == 4).then(|| pair_pair_matrix(&masses, mu));
        let primary = pair_pair.as_ref().unwrap_or(&recursive);
        let primary_inverse = inverse_from_orthogonality(primary, &masses, mu);
        Ok(Self { masses, mu, recursive, pair_pair, primary_inverse })
    }

    pub fn n(&self) -> usize {
        self.masses.len()
    }

    /// Dimension of the relative space.
    pub fn dim(&self) -> usize {
        self.masses.len() - 1
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn total_mass(&self) -> f64 {
        self.masses.iter().sum()
    }

    pub fn recursive(&self) -> &DMatrix<f64> {
        &self.recursive
    }

    pub fn pair_pair(&self) -> Option<&DMatrix<f64>> {
        self.pair_pair.as_ref()
    }

    /// The matrix used for all relative coordinates: pair-pair for `N = 4`, recursive otherwise.
    pub fn matrix(&self) -> &DMatrix<f64> {
        self.pair_pair.as_ref().unwrap_or(&self.recursive)
    }

    pub fn inverse(&self) -> &DMatrix<f64> {
        &self.primary_inverse
    }

    /// `O = U diag(√(mu/m_j))`.
    pub fn mass_weighted(&self) -> DMatrix<f64> {
        mass_weight(self.matrix(), &self.masses, self.mu)
    }

    /// `|det ∂q/∂(Q, R)|`, i.e. `dq_1...dq_N = factor · dQ_1...dQ_{N-1} dR`.
    pub fn jacobian_factor(&self) -> f64 {
        self.masses.iter().map(|m| (self.mu / m).sqrt()).product()
    }

    /// Relative coordinates and the center-of-mass coordinate `R`.
    pub fn to_jacobi(&self, q: &[f64]) -> (Vec<f64>, f64) {
        let u = self.matrix();
        let n = self.n();
        let mut rel = vec![0.0; n - 1];
        for (k, r) in rel.iter_mut().enumerate() {
            *r = (0..n).map(|j| u[(k, j)] * q[j]).sum();
        }
        let cm = (0..n).map(|j| u[(n - 1, j)] * q[j]).sum();
        (rel, cm)
    }

    pub fn from_jacobi(&self, rel: &[f64], cm: f64) -> Vec<f64> {
        let inv = &self.primary_inverse;
        let n = self.n();
        (0..n)
            .map(|i| (0..n - 1).map(|k| inv[(i, k)] * rel[k]).sum::<f64>() + inv[(i, n - 1)] * cm)
            .collect()
    }

    /// Hamiltonian `½ Σ (mu/m_i) p_i² + (m_i/mu) q_i²` in particle coordinates.
    pub fn particle_hamiltonian(&self, q: &[f64], p: &[f64]) -> f64 {
        self.masses
            .iter()
            .zip(q.iter().zip(p))
            .map(|(m, (q, p))| 0.5 * (self.mu / m * p * p + m / self.mu * q * q))
            .sum()
    }

    /// Momenta conjugate to the Jacobi coordinates: `P = U^{-T} p`.
    pub fn momenta_to_jacobi(&self, p: &[f64]) -> Vec<f64> {
        let inv = &self.primary_inverse;
        let n = self.n();
        (0..n).map(|k| (0..n).map(|i| inv[(i, k)] * p[i]).sum()).collect()
    }
}

fn mass_weight(u: &DMatrix<f64>, masses: &[f64], mu: f64) -> DMatrix<f64> {
    let mut o = u.clone();
    for (j, m) in masses.iter().enumerate() {
        let s = (mu / m).sqrt();
        o.column_mut(j).scale_mut(s);
    }
    o
}

// U^{-1} = diag(√(mu/m)) Oᵀ
fn inverse_from_orthogonality(u: &DMatrix<f64>, masses: &[f64], mu: f64) -> DMatrix<f64> {
    let mut inv = mass_weight(u, masses, mu).transpose();
    for (i, m) in masses.iter().enumerate() {
        inv.row_mut(i).scale_mut((mu / m).sqrt());
    }
    inv
}

fn recursive_matrix(masses: &[f64], mu: f64) -> DMatrix<f64> {
    let n = masses.len();
    let total: f64 = masses.iter().sum();
    let mut u = DMatrix::zeros(n, n);
    let mut cluster = masses[0];
    for k in 0..n - 1 {
        let next = masses[k + 1];
        let joined = cluster + next;
        let reduced = (cluster * next / joined).sqrt() / mu.sqrt();
        for i in 0..=k {
            u[(k, i)] = reduced * masses[i] / cluster;
        }
        u[(k, k + 1)] = -reduced;
        cluster = joined;
    }
    for i in 0..n {
        u[(n - 1, i)] = masses[i] / (total * mu).sqrt();
    }
    u
}

fn pair_pair_matrix(m: &[f64], mu: f64) -> DMatrix<f64> {
    let m12 = m[0] + m[1];
    let m34 = m[2] + m[3];
    let total = m12 + m34;
    let mu12 = (m[0] * m[1] / m12).sqrt();
    let mu34 = (m[2] * m[3] / m34).sqrt();
    let mu1234 = (m12 * m34 / total).sqrt();
    let st = total.sqrt();
    let rows = [
        [mu12, -mu12, 0.0, 0.0],
        [0.0, 0.0, mu34, -mu34],
        [mu1234 * m[0] / m12, mu1234 * m[1] / m12, -mu1234 * m[2] / m34, -mu1234 * m[3] / m34],
        [m[0] / st, m[1] / st, m[2] / st, m[3] / st],
    ];
    DMatrix::from_fn(4, 4, |i, j| rows[i][j] / mu.sqrt())
}
