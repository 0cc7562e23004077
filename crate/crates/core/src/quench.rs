//! Scaling solution of a trap whose frequency changes in time.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::observables::TrapState;

/// Absolute and relative tolerance of the adaptive integrator.
pub const INTEGRATOR_TOL: f64 = 1e-13;

/// Trap frequency as a function of time; `omega0` holds for `t < 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum Schedule {
    Constant { omega: f64 },
    Sudden { omega0: f64, omega1: f64 },
    LinearRamp { omega0: f64, omega1: f64, duration: f64 },
}

impl Schedule {
    pub fn initial(&self) -> f64 {
        match *self {
            Schedule::Constant { omega } => omega,
            Schedule::Sudden { omega0, .. } | Schedule::LinearRamp { omega0, .. } => omega0,
        }
    }

    /// `ω(t)` for `t > 0`.
    pub fn at(&self, t: f64) -> f64 {
        match *self {
            Schedule::Constant { omega } => omega,
            Schedule::Sudden { omega1, .. } => omega1,
            Schedule::LinearRamp { omega0, omega1, duration } => {
                if t >= duration {
                    omega1
                } else {
                    omega0 + (omega1 - omega0) * t / duration
                }
            }
        }
    }

    /// Times after 0 where `ω` is not smooth.
    fn kinks(&self) -> Vec<f64> {
        match *self {
            Schedule::LinearRamp { duration, .. } => vec![duration],
            _ => Vec::new(),
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            Schedule::Constant { omega } => omega > 0.0,
            Schedule::Sudden { omega0, omega1 } => omega0 > 0.0 && omega1 >= 0.0,
            Schedule::LinearRamp { omega0, omega1, duration } => omega0 > 0.0 && omega1 >= 0.0 && duration > 0.0,
        };
        if ok { Ok(()) } else { Err(Error::Domain(format!("invalid schedule {self:?}"))) }
    }
}

type State = [f64; 4];

/// `λ³ λ'' = ω0² − ω(t)² λ⁴` together with `ln|N|' = −λ'/2λ` and `θ' = 1/λ²`.
fn ermakov(schedule: &Schedule, omega0_sq: f64, t: f64, y: &State) -> State {
    let (l, v) = (y[0], y[1]);
    let w = schedule.at(t);
    [v, omega0_sq / (l * l * l) - w * w * l, -0.5 * v / l, 1.0 / (l * l)]
}

// Dormand–Prince 5(4) tableau
const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B4: [f64; 7] = [5179.0 / 57600.0, 0.0, 7571.0 / 16695.0, 393.0 / 640.0, -92097.0 / 339200.0, 187.0 / 2100.0, 1.0 / 40.0];

/// Adaptive Dormand–Prince integration from `t0` to exactly `t1`; returns the state and the last step size.
fn integrate(f: impl Fn(f64, &State) -> State, t0: f64, t1: f64, mut y: State, mut h: f64, tol: f64) -> Result<(State, f64)> {
    let mut t = t0;
    let min_step = 1e-14 * (t1 - t0).abs().max(1.0);
    while t < t1 {
        let last = t + h >= t1;
        let step = if last { t1 - t } else { h };
        let mut k = [[0.0; 4]; 7];
        for s in 0..7 {
            let mut ys = y;
            for (j, kj) in k.iter().enumerate().take(s) {
                for c in 0..4 {
                    ys[c] += step * A[s][j] * kj[c];
                }
            }
            k[s] = f(t + C[s] * step, &ys);
        }
        // the last stage is evaluated at the fifth-order solution
        let y5: State = std::array::from_fn(|c| y[c] + step * (0..6).map(|j| A[6][j] * k[j][c]).sum::<f64>());
        let mut err = 0.0;
        for c in 0..4 {
            let e = step * (0..7).map(|j| (if j < 6 { A[6][j] } else { 0.0 } - B4[j]) * k[j][c]).sum::<f64>();
            let sc = tol + tol * y[c].abs().max(y5[c].abs());
            err += (e / sc).powi(2);
        }
        let err = (err / 4.0).sqrt();
        let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        if err <= 1.0 {
            t = if last { t1 } else { t + step };
            y = y5;
            if !last {
                h = step * factor;
            }
        } else {
            h = step * factor;
            if h < min_step {
                return Err(Error::Integration(format!("step size underflow at t = {t}")));
            }
        }
    }
    Ok((y, h))
}

/// Scaling parameter `λ(t)` and the amplitude factor `N(t)` on a time grid.
#[derive(Debug, Clone, Serialize)]
pub struct QuenchSolution {
    pub schedule: Schedule,
    pub times: Vec<f64>,
    pub lambda: Vec<f64>,
    pub dlambda: Vec<f64>,
    /// `ln |N(t)|` from the N equation.
    pub log_modulus: Vec<f64>,
    /// `∫_0^t dt'/λ²`; the phase of `N` is `−E` times this.
    pub phase_integral: Vec<f64>,
    /// Index ranges `[start, end)` integrated without a kink in `ω`.
    segments: Vec<(usize, usize)>,
}

/// Integrates from `λ(0) = 1`, `λ'(0) = 0` up to `t_end`, reporting every `dt`.
pub fn evolve_quench(schedule: Schedule, t_end: f64, dt: f64) -> Result<QuenchSolution> {
    schedule.validate()?;
    if !(t_end > 0.0 && dt > 0.0 && dt <= t_end) {
        return Err(Error::Domain(format!("need 0 < dt <= t_end, got dt={dt}, t_end={t_end}")));
    }
    let w0 = schedule.initial();
    let mut bounds = vec![0.0];
    bounds.extend(schedule.kinks().into_iter().filter(|&k| k > 0.0 && k < t_end));
    bounds.push(t_end);
    let mut out = QuenchSolution {
        schedule,
        times: Vec::new(),
        lambda: Vec::new(),
        dlambda: Vec::new(),
        log_modulus: Vec::new(),
        phase_integral: Vec::new(),
        segments: Vec::new(),
    };
    let mut y: State = [1.0, 0.0, 0.0, 0.0];
    out.push(0.0, &y);
    let mut h = 0.01 * dt;
    let f = |t: f64, y: &State| ermakov(&schedule, w0 * w0, t, y);
    for seg in bounds.windows(2) {
        let (a, b) = (seg[0], seg[1]);
        let start = out.times.len() - 1;
        let steps = ((b - a) / dt - 1e-9).ceil().max(1.0) as usize;
        for k in 0..steps {
            let t0 = a + k as f64 * dt;
            let t1 = if k + 1 == steps { b } else { a + (k + 1) as f64 * dt };
            (y, h) = integrate(f, t0, t1, y, h, INTEGRATOR_TOL)?;
            if !(y[0] > 0.0 && y.iter().all(|v| v.is_finite())) {
                return Err(Error::Integration(format!("scaling solution left the physical range at t = {t1}")));
            }
            out.push(t1, &y);
        }
        out.segments.push((start, out.times.len()));
    }
    Ok(out)
}

/// `λ²(t) = cos²(ω1 t) + (ω0/ω1)² sin²(ω1 t)` after a sudden change `ω0 → ω1`.
pub fn sudden_lambda(omega0: f64, omega1: f64, t: f64) -> f64 {
    if omega1 == 0.0 {
        return (1.0 + omega0 * omega0 * t * t).sqrt();
    }
    let (c, s) = ((omega1 * t).cos(), (omega1 * t).sin());
    (c * c + (omega0 / omega1).powi(2) * s * s).sqrt()
}

impl QuenchSolution {
    fn push(&mut self, t: f64, y: &State) {
        self.times.push(t);
        self.lambda.push(y[0]);
        self.dlambda.push(y[1]);
        self.log_modulus.push(y[2]);
        self.phase_integral.push(y[3]);
    }

    /// Largest `|λ³λ'' − ω0² + ω²λ⁴|` over interior grid points, with `λ''` from a seven-point
    /// difference of the integrated `λ'`.
    ///
    /// The difference itself errs by `O(dt⁶)`, so the output grid should resolve the breathing
    /// time scale finely.
    pub fn ermakov_residual(&self) -> f64 {
        let w0 = self.schedule.initial();
        let mut worst: f64 = 0.0;
        for &(a, b) in &self.segments {
            for i in (a + 3)..b.saturating_sub(3) {
                let t = &self.times;
                let h = t[i + 1] - t[i];
                let uniform = (t[i - 3..=i + 3].windows(2)).all(|w| ((w[1] - w[0]) - h).abs() < 1e-9 * h);
                if !uniform {
                    continue;
                }
                let v = &self.dlambda;
                let acc = (v[i + 3] - 9.0 * v[i + 2] + 45.0 * v[i + 1] - 45.0 * v[i - 1] + 9.0 * v[i - 2] - v[i - 3]) / (60.0 * h);
                let l = self.lambda[i];
                let w = self.schedule.at(t[i]);
                worst = worst.max((l * l * l * acc - w0 * w0 + w * w * l.powi(4)).abs());
            }
        }
        worst
    }

    /// Largest `| |N| √λ − 1 |` on the grid.
    pub fn modulus_residual(&self) -> f64 {
        self.log_modulus
            .iter()
            .zip(&self.lambda)
            .map(|(m, l)| (m.exp() * l.sqrt() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// `N(t_i)` for a state of energy `energy`.
    pub fn n_factor(&self, i: usize, energy: f64) -> Complex64 {
        Complex64::from_polar(self.log_modulus[i].exp(), -energy * self.phase_integral[i])
    }
}

/// `ψ(q, t)` of a trap eigenstate after the frequency change, by scaling.
pub struct ScaledState<'a> {
    pub state: &'a TrapState,
    pub quench: &'a QuenchSolution,
}

/// Pairs an initial eigenstate with a scaling solution.
pub fn scaled_wavefunction<'a>(state: &'a TrapState, quench: &'a QuenchSolution) -> ScaledState<'a> {
    ScaledState { state, quench }
}

impl ScaledState<'_> {
    /// Amplitude at particle positions `q` and grid time `t_i`.
    ///
    /// The relative part carries `N(t)/λ` with the relative energy, the center of mass the
    /// one-dimensional factor with its own energy, and both the chirp `e^{iλ'ρ²/2λ}`.
    pub fn amplitude(&self, q: &[f64], i: usize) -> Complex64 {
        let qz = self.quench;
        let l = qz.lambda[i];
        let scaled: Vec<f64> = q.iter().map(|x| x / l).collect();
        let psi0 = self.state.evaluate(&scaled);
        let (rel, r) = self.state.geometry.frame.to_jacobi(q);
        let rho2 = rel.iter().map(|x| x * x).sum::<f64>() + r * r;
        let chirp = Complex64::from_polar(1.0, qz.dlambda[i] * rho2 / (2.0 * l));
        let n_rel = qz.n_factor(i, self.state.radial.energy_rel);
        let n_cm = qz.n_factor(i, self.state.cm.energy);
        n_rel / l * n_cm * chirp * psi0
    }

    /// `∫ |ψ(q, t_i)|² dq` on one fixed sample set for every requested time index.
    ///
    /// Samples are drawn in Jacobi coordinates from a Gaussian as wide as the largest `λ`.
    pub fn norms(&self, indices: &[usize], samples: usize, seed: u64) -> Vec<(f64, f64)> {
        let frame = &self.state.geometry.frame;
        let n = frame.n();
        let lmax = indices.iter().map(|&i| self.quench.lambda[i]).fold(1.0, f64::max);
        let s = lmax * (self.state.energy() / n as f64).max(1.0).sqrt();
        let jac = frame.jacobian_factor();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pts: Vec<(Vec<f64>, f64)> = (0..samples)
            .map(|_| {
                let z: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
                let dens = z.iter().map(|z| (-0.5 * z * z).exp() / (s * (2.0 * PI).sqrt())).product::<f64>();
                let q = frame.from_jacobi(&z[..n - 1].iter().map(|z| s * z).collect::<Vec<_>>(), s * z[n - 1]);
                (q, dens)
            })
            .collect();
        indices
            .iter()
            .map(|&i| {
                let (mut s1, mut s2) = (0.0, 0.0);
                for (q, dens) in &pts {
                    let v = jac * self.amplitude(q, i).norm_sqr() / dens;
                    s1 += v;
                    s2 += v * v;
                }
                let m = s1 / samples as f64;
                (m, ((s2 / samples as f64 - m * m).max(0.0) / (samples as f64 - 1.0)).sqrt())
            })
            .collect()
    }
}
