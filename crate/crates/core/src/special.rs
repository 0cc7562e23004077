//! Special functions needed by the radial, two-body and center-of-mass parts.

use statrs::function::gamma::ln_gamma;
use std::f64::consts::PI;

/// `1/Γ(x)` for any real `x`; zero at the poles of Γ.
pub fn recip_gamma(x: f64) -> f64 {
    if x > 0.5 {
        (-ln_gamma(x)).exp()
    } else {
        // reflection: 1/Γ(x) = Γ(1-x) sin(πx) / π
        let r = x - x.round();
        let s = (PI * r).sin() * if (x.round() as i64) % 2 == 0 { 1.0 } else { -1.0 };
        ln_gamma(1.0 - x).exp() * s / PI
    }
}

/// `Γ(1/2 - ν) / Γ(-ν)`, the left side of the trapped two-body quantization condition.
///
/// Finite everywhere except at `ν = k + 1/2`, where it diverges.
pub fn two_body_gamma_ratio(nu: f64) -> f64 {
    if nu <= -0.5 {
        (ln_gamma(0.5 - nu) - ln_gamma(-nu)).exp()
    } else {
        // Γ(1/2-ν)/Γ(-ν) = -tan(πν) Γ(1+ν)/Γ(1/2+ν)
        -(PI * nu).tan() * (ln_gamma(1.0 + nu) - ln_gamma(0.5 + nu)).exp()
    }
}

/// Kummer's `M(a, b, z)` by direct summation. Intended for moderate `z`.
pub fn kummer_m(a: f64, b: f64, z: f64) -> f64 {
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 0.0;
    loop {
        term *= (a + k) / (b + k) * z / (k + 1.0);
        sum += term;
        k += 1.0;
        if term.abs() <= 1e-17 * sum.abs() && k > a.abs() + z {
            break;
        }
        if term == 0.0 || k > 2000.0 {
            break;
        }
    }
    sum
}

/// Argument above which [`tricomi_u_half`] switches to the asymptotic series.
pub const U_ASYMPTOTIC_SPLIT: f64 = 30.0;

/// Tricomi's `U(a, 1/2, z)` for `z >= 0`.
///
/// Large positive `a` goes through the Laplace integral, where the Kummer combination cancels.
pub fn tricomi_u_half(a: f64, z: f64) -> f64 {
    if a > 2.0 {
        tricomi_u_integral(a, 0.5, z)
    } else if z >= U_ASYMPTOTIC_SPLIT {
        tricomi_u_asymptotic(a, 0.5, z)
    } else {
        // U(a,1/2,z) = √π [ M(a,1/2,z)/Γ(a+1/2) - 2√z M(a+1/2,3/2,z)/Γ(a) ]
        let sq = PI.sqrt();
        sq * (kummer_m(a, 0.5, z) * recip_gamma(a + 0.5)
            - 2.0 * z.sqrt() * kummer_m(a + 0.5, 1.5, z) * recip_gamma(a))
    }
}

// U(a,b,z) = Γ(a)^{-1} ∫_0^∞ e^{-zt} t^{a-1} (1+t)^{b-a-1} dt with t = e^s
fn tricomi_u_integral(a: f64, b: f64, z: f64) -> f64 {
    let lg = ln_gamma(a);
    let log_f = |s: f64| -> f64 {
        let t = s.exp();
        -lg + a * s + (b - a - 1.0) * t.ln_1p() - z * t
    };
    // the integrand decays like e^{as} on the left and e^{(b-1)s - z e^s} on the right
    let lo = -40.0 / a - 2.0;
    let tail = 80.0 / (1.0 - b);
    let hi = if z > 0.0 { ((40.0 / z).ln().max(0.0) + 3.0).min(tail) } else { tail };
    let (nodes, weights) = crate::quadrature::composite(lo, hi, 120, 12);
    nodes.iter().zip(&weights).map(|(s, w)| w * log_f(*s).exp()).sum()
}

fn tricomi_u_asymptotic(a: f64, b: f64, z: f64) -> f64 {
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut prev = f64::INFINITY;
    for k in 0..200 {
        let kf = k as f64;
        term *= -(a + kf) * (a - b + 1.0 + kf) / ((kf + 1.0) * z);
        if term.abs() > prev {
            break;
        }
        sum += term;
        prev = term.abs();
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    z.powf(-a) * sum
}

/// Generalized Laguerre polynomial `L_n^α(x)` by the three-term recurrence.
pub fn laguerre(n: usize, alpha: f64, x: f64) -> f64 {
    let mut l0 = 1.0;
    if n == 0 {
        return l0;
    }
    let mut l1 = 1.0 + alpha - x;
    for k in 1..n {
        let kf = k as f64;
        let l2 = ((2.0 * kf + 1.0 + alpha - x) * l1 - (kf + alpha) * l0) / (kf + 1.0);
        l0 = l1;
        l1 = l2;
    }
    l1
}

/// Normalized 1D oscillator eigenfunction `π^{-1/4} (2^k k!)^{-1/2} H_k(x) e^{-x²/2}`.
pub fn hermite_function(k: usize, x: f64) -> f64 {
    let mut p0 = PI.powf(-0.25) * (-0.5 * x * x).exp();
    if k == 0 {
        return p0;
    }
    let mut p1 = 2f64.sqrt() * x * p0;
    for j in 1..k {
        let jf = j as f64;
        let p2 = (2.0 / (jf + 1.0)).sqrt() * x * p1 - (jf / (jf + 1.0)).sqrt() * p0;
        p0 = p1;
        p1 = p2;
    }
    p1
}
