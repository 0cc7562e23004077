//! Hyperradial and center-of-mass factors of a trap eigenstate.

use serde::Serialize;
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::special::{hermite_function, laguerre};

/// Hyperradial eigenstate `R(ρ) = A ρ^{γ+1/2} e^{-ρ²/2} L_n^γ(ρ²)` of the relative motion.
///
/// `ρ` is measured in the oscillator length of the reference mass, so `σ = 1`, and
/// `∫ R² dρ = 1`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct RadialState {
    pub n: usize,
    /// Separation constant `α = -τ(τ+1)`.
    pub alpha: f64,
    /// `γ = √(1 - 4α) / 2`.
    pub gamma: f64,
    pub sigma: f64,
    pub norm: f64,
    pub energy_rel: f64,
}

impl RadialState {
    pub fn new(n: usize, tau: f64) -> Result<Self> {
        if !(tau >= 0.0) {
            return Err(Error::Domain(format!("τ must be non-negative, got {tau}")));
        }
        Self::from_alpha(n, -tau * (tau + 1.0))
    }

    pub fn from_alpha(n: usize, alpha: f64) -> Result<Self> {
        if !(alpha <= 0.25) {
            return Err(Error::Domain(format!("α = {alpha} > 1/4 gives a complex radial exponent")));
        }
        let gamma = 0.5 * (1.0 - 4.0 * alpha).sqrt();
        // ∫ x^γ e^{-x} (L_n^γ)² dx = Γ(n+γ+1)/n!, with x = ρ², dρ = dx / 2√x
        let ln_norm = 0.5 * (2f64.ln() + ln_gamma(n as f64 + 1.0) - ln_gamma(n as f64 + gamma + 1.0));
        Ok(Self { n, alpha, gamma, sigma: 1.0, norm: ln_norm.exp(), energy_rel: 2.0 * n as f64 + gamma + 1.0 })
    }

    pub fn tau(&self) -> f64 {
        self.gamma - 0.5
    }

    pub fn evaluate(&self, rho: f64) -> f64 {
        if rho <= 0.0 {
            return 0.0;
        }
        let x = rho / self.sigma;
        self.norm * x.powf(self.gamma + 0.5) * (-0.5 * x * x).exp() * laguerre(self.n, self.gamma, x * x)
    }
}

/// Center-of-mass oscillator state with `χ` quanta.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CmState {
    pub chi: usize,
    pub energy: f64,
}

impl CmState {
    pub fn new(chi: usize) -> Self {
        Self { chi, energy: 0.5 + chi as f64 }
    }

    pub fn evaluate(&self, r: f64) -> f64 {
        hermite_function(self.chi, r)
    }
}

/// `E = (2n + τ + 3/2) + (1/2 + χ)`.
pub fn total_energy(n: usize, tau: f64, chi: usize) -> f64 {
    2.0 * n as f64 + tau + 1.5 + 0.5 + chi as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::composite;

    #[test]
    fn energies() {
        assert_eq!(RadialState::new(0, 2.0).unwrap().energy_rel, 3.5);
        assert_eq!(RadialState::new(0, 6.0).unwrap().energy_rel, 7.5);
        assert_eq!(RadialState::new(1, 0.0).unwrap().energy_rel, 3.5);
        assert_eq!(total_energy(0, 6.0, 0), 8.0);
        assert_eq!(total_energy(0, 2.0, 0), 4.0);
        assert_eq!(total_energy(1, 2.0, 3), 9.0);
        // four lowest equal-mass oscillator levels
        assert_eq!(total_energy(0, 6.0, 0), 0.5 + 1.5 + 2.5 + 3.5);
    }

    #[test]
    fn ladder_spacing_is_two() {
        for tau in [0.0, 1.3, 6.0] {
            let e: Vec<f64> = (0..4).map(|n| RadialState::new(n, tau).unwrap().energy_rel).collect();
            for w in e.windows(2) {
                assert!((w[1] - w[0] - 2.0).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn normalized_numerically() {
        let (x, w) = composite(0.0, 12.0, 40, 12);
        for (n, tau) in [(0, 2.0), (3, 0.7), (2, 6.0)] {
            let r = RadialState::new(n, tau).unwrap();
            let s: f64 = x.iter().zip(&w).map(|(x, w)| w * r.evaluate(*x).powi(2)).sum();
            assert!((s - 1.0).abs() < 1e-8, "{n} {tau}: {s}");
        }
    }

    #[test]
    fn solves_the_radial_equation() {
        // -½(R'' - τ(τ+1)R/ρ²) + ½ρ²R = E R by central differences
        let r = RadialState::new(2, 1.7).unwrap();
        let h = 1e-4;
        for rho in [0.4, 1.1, 2.5] {
            let d2 = (r.evaluate(rho + h) - 2.0 * r.evaluate(rho) + r.evaluate(rho - h)) / (h * h);
            let lhs = -0.5 * (d2 + r.alpha * r.evaluate(rho) / (rho * rho)) + 0.5 * rho * rho * r.evaluate(rho);
            assert!((lhs - r.energy_rel * r.evaluate(rho)).abs() < 1e-5, "{rho}");
        }
    }

    #[test]
    fn rejects_complex_exponent() {
        assert!(RadialState::from_alpha(0, 0.3).is_err());
        assert!(RadialState::new(0, -1.0).is_err());
    }

    #[test]
    fn cm_states_orthonormal() {
        let (x, w) = composite(-12.0, 12.0, 40, 12);
        for a in 0..5 {
            for b in 0..5 {
                let s: f64 = x.iter().zip(&w).map(|(x, w)| w * CmState::new(a).evaluate(*x) * CmState::new(b).evaluate(*x)).sum();
                assert!((s - if a == b { 1.0 } else { 0.0 }).abs() < 1e-12);
            }
        }
        assert_eq!(CmState::new(3).energy - CmState::new(2).energy, 1.0);
    }
}
