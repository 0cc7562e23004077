//! Two particles in a common harmonic trap with a contact interaction of arbitrary strength.
//!
//! In the relative coordinate `Q = μ12 (q1 - q2) / √μ` the problem is `½(-∂² + Q²) + g_eff δ(Q)`
//! with `g_eff = g μ12 / √μ`. Even states are `e^{-Q²/2} U(-ν, 1/2, Q²)` with `E = 2ν + 1/2`,
//! odd states do not feel the interaction.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{JacobiFrame, MassSystem};
use crate::quadrature::composite;
use crate::special::{hermite_function, tricomi_u_half, two_body_gamma_ratio};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Parity {
    Even,
    Odd,
}

#[derive(Debug, Clone, Serialize)]
pub struct TwoBodySolution {
    pub nu: f64,
    pub energy_rel: f64,
    pub g: f64,
    /// `μ12 / √μ`, the factor turning `g` into the coupling of the relative coordinate.
    pub reduced_factor: f64,
    pub parity: Parity,
    pub branch: usize,
    /// Multiplies `e^{-Q²/2} U(-ν, 1/2, Q²)` so that `∫ψ² dQ = 1`.
    norm: f64,
}

impl TwoBodySolution {
    pub fn g_eff(&self) -> f64 {
        self.g * self.reduced_factor
    }

    /// Residual of `Γ(1/2-ν)/Γ(-ν) + g_eff/2`; zero for an exact even state.
    pub fn residual(&self) -> f64 {
        condition(self.nu, self.g_eff())
    }
}

fn condition(nu: f64, g_eff: f64) -> f64 {
    two_body_gamma_ratio(nu) + 0.5 * g_eff
}

pub fn reduced_factor(sys: &MassSystem) -> Result<f64> {
    if sys.len() != 2 {
        return Err(Error::InvalidSystem(format!("two-body solver needs N = 2, got {}", sys.len())));
    }
    let frame = JacobiFrame::new(sys)?;
    let m = frame.masses();
    Ok((m[0] * m[1] / (m[0] + m[1])).sqrt() / frame.mu().sqrt())
}

/// Even-parity state on branch `branch` (`branch = 0` is the ground state).
///
/// `g = ±∞` is accepted; `+∞` gives the fermionized state `ν = branch + 1/2`.
pub fn solve_two_body(g: f64, sys: &MassSystem, branch: usize) -> Result<TwoBodySolution> {
    let factor = reduced_factor(sys)?;
    let g_eff = g * factor;
    let k = branch as f64;
    let nu = if g.is_nan() {
        return Err(Error::Domain("coupling is NaN".into()));
    } else if g == 0.0 {
        k
    } else if g == f64::INFINITY {
        k + 0.5
    } else if g == f64::NEG_INFINITY {
        if branch == 0 {
            return Err(Error::Domain("ground branch is unbounded below for g = -inf".into()));
        }
        k - 0.5
    } else {
        find_root(g_eff, branch)?
    };
    let mut sol = TwoBodySolution {
        nu,
        energy_rel: 2.0 * nu + 0.5,
        g,
        reduced_factor: factor,
        parity: Parity::Even,
        branch,
        norm: 1.0,
    };
    if !is_half_integer(nu) {
        sol.norm = 1.0 / raw_norm(nu).sqrt();
    }
    Ok(sol)
}

/// Odd-parity state `k`: the oscillator level `2k + 1`, independent of `g`.
pub fn odd_state(g: f64, sys: &MassSystem, k: usize) -> Result<TwoBodySolution> {
    let factor = reduced_factor(sys)?;
    let nu = k as f64 + 0.5;
    Ok(TwoBodySolution {
        nu,
        energy_rel: 2.0 * nu + 0.5,
        g,
        reduced_factor: factor,
        parity: Parity::Odd,
        branch: k,
        norm: 1.0,
    })
}

fn is_half_integer(nu: f64) -> bool {
    nu >= 0.0 && (nu - 0.5).fract() == 0.0
}

fn find_root(g_eff: f64, branch: usize) -> Result<f64> {
    let k = branch as f64;
    let f = |nu: f64| condition(nu, g_eff);
    let eps = 1e-12;
    let hi = k + 0.5 - eps;
    let mut lo = if branch == 0 { -0.5 } else { k - 0.5 + eps };
    if branch == 0 {
        // the ratio grows like √(-ν) below -1/2, so step down until the sign flips
        while f(lo).signum() == f(hi).signum() {
            lo = 2.0 * lo - 1.0;
            if lo < -1e12 {
                break;
            }
        }
    }
    let (f_lo, f_hi) = (f(lo), f(hi));
    if f_lo.signum() == f_hi.signum() {
        return Err(Error::NotBracketed { lo, hi, f_lo, f_hi });
    }
    let (mut a, mut b, mut fa) = (lo, hi, f_lo);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        let fm = f(m);
        if fm == 0.0 {
            return Ok(m);
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
        if b - a < 1e-15 * (1.0 + m.abs()) {
            break;
        }
    }
    // secant polish inside the final bracket
    let (fa, fb) = (f(a), f(b));
    let x = if fb != fa { a - fa * (b - a) / (fb - fa) } else { 0.5 * (a + b) };
    Ok(if x > a && x < b { x } else { 0.5 * (a + b) })
}

fn raw_shape(nu: f64, q: f64) -> f64 {
    let z = q * q;
    (-0.5 * z).exp() * tricomi_u_half(-nu, z)
}

fn raw_norm(nu: f64) -> f64 {
    let cut = 12.0 + 2.0 * nu.max(0.0).sqrt();
    let (x, w) = composite(0.0, cut, 48, 12);
    2.0 * x.iter().zip(&w).map(|(x, w)| w * raw_shape(nu, *x).powi(2)).sum::<f64>()
}

/// Normalized relative wavefunction `ψ(Q)`, `∫ψ² dQ = 1`.
pub fn two_body_wavefunction(sol: &TwoBodySolution, q: f64) -> f64 {
    match sol.parity {
        Parity::Odd => hermite_function(2 * sol.branch + 1, q),
        Parity::Even if is_half_integer(sol.nu) => {
            // fermionized limit: |ψ_{2k+1}|
            hermite_function(2 * sol.branch + 1, q).abs()
        }
        Parity::Even => sol.norm * raw_shape(sol.nu, q),
    }
}

/// `(g, E)` samples of one even branch.
pub fn energy_curve(sys: &MassSystem, branch: usize, gs: &[f64]) -> Result<Vec<(f64, f64)>> {
    gs.iter()
        .map(|&g| solve_two_body(g, sys, branch).map(|s| (g, s.energy_rel)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::CouplingPattern;

    fn pair(m1: f64, m2: f64) -> MassSystem {
        MassSystem::with_pattern(&[m1, m2], "AB", "bb", CouplingPattern::AllInfinite).unwrap()
    }

    #[test]
    fn limits_are_exact() {
        let s = pair(1.0, 1.0);
        assert_eq!(solve_two_body(0.0, &s, 0).unwrap().energy_rel, 0.5);
        assert_eq!(solve_two_body(f64::INFINITY, &s, 0).unwrap().energy_rel, 1.5);
        assert_eq!(solve_two_body(0.0, &s, 2).unwrap().energy_rel, 4.5);
    }

    #[test]
    fn unit_rhs_matches_dense_scan() {
        // g_eff = 2 makes the right-hand side -1
        let s = pair(1.0, 1.0);
        let f = reduced_factor(&s).unwrap();
        let sol = solve_two_body(2.0 / f, &s, 0).unwrap();
        let n = 10_000;
        let (lo, hi) = (-0.5, 0.5 - 1e-9);
        let mut prev = (lo, two_body_gamma_ratio(lo) + 1.0);
        let mut root = f64::NAN;
        for i in 1..=n {
            let x = lo + (hi - lo) * i as f64 / n as f64;
            let v = two_body_gamma_ratio(x) + 1.0;
            if v.signum() != prev.1.signum() {
                let (mut a, mut b) = (prev.0, x);
                for _ in 0..100 {
                    let m = 0.5 * (a + b);
                    if (two_body_gamma_ratio(m) + 1.0).signum() == prev.1.signum() {
                        a = m;
                    } else {
                        b = m;
                    }
                }
                root = 0.5 * (a + b);
                break;
            }
            prev = (x, v);
        }
        assert!((sol.nu - root).abs() < 1e-12, "{} vs {root}", sol.nu);
        assert!(sol.residual().abs() < 1e-10);
    }

    #[test]
    fn branches_increase_with_g() {
        let s = pair(1.0, 3.0);
        for branch in 0..3 {
            let mut last = f64::NEG_INFINITY;
            for i in -20..=20 {
                let e = solve_two_body(i as f64 * 0.5, &s, branch).unwrap().energy_rel;
                assert!(e > last);
                last = e;
            }
            let top = solve_two_body(1e8, &s, branch).unwrap().energy_rel;
            assert!((top - (2.0 * branch as f64 + 1.5)).abs() < 1e-6);
        }
    }

    #[test]
    fn normalized_and_even() {
        let s = pair(1.0, 1.0);
        let (x, w) = composite(-14.0, 14.0, 56, 12);
        for &g in &[-3.0, -0.4, 0.0, 1.3, 7.0] {
            let sol = solve_two_body(g, &s, 1).unwrap();
            let n: f64 = x.iter().zip(&w).map(|(x, w)| w * two_body_wavefunction(&sol, *x).powi(2)).sum();
            // the kink sits on a panel boundary, so the rule stays exact on each side
            assert!((n - 1.0).abs() < 1e-8, "g={g}: {n}");
            assert!((two_body_wavefunction(&sol, 0.8) - two_body_wavefunction(&sol, -0.8)).abs() < 1e-14);
        }
    }

    #[test]
    fn zero_coupling_is_gaussian() {
        let s = pair(2.0, 5.0);
        let sol = solve_two_body(0.0, &s, 0).unwrap();
        for &q in &[0.0, 0.5, 2.0] {
            assert!((two_body_wavefunction(&sol, q) - hermite_function(0, q)).abs() < 1e-12);
        }
    }

    #[test]
    fn jump_condition() {
        let s = pair(1.0, 4.0);
        for &g in &[-2.5, -0.7, 0.9, 3.3, 12.0] {
            let sol = solve_two_body(g, &s, 0).unwrap();
            let h = 1e-4;
            let psi = |q: f64| two_body_wavefunction(&sol, q);
            let d = (-3.0 * psi(0.0) + 4.0 * psi(h) - psi(2.0 * h)) / (2.0 * h);
            assert!((d - sol.g_eff() * psi(0.0)).abs() < 1e-6, "g={g}");
        }
    }
}
