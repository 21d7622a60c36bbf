//! Caldeira-Leggett and recoilless master equations for a single particle.
//!
//! ```text
//! d rho/dt = -(i/hbar)[H, rho] - (i gamma/hbar)[x, {p, rho}] - D [x, [x, rho]]
//! D = 2 m gamma k_B T / hbar^2
//! ```
//!
//! The recoilless variant drops the friction term, leaving a Lindblad
//! generator with jump operator proportional to `x`.

use super::{check_times, Trajectory};
use crate::error::{arg, check_dim, Error, Result};
use crate::hilbert::{
    anticommutator, commutator, max_abs, CMatrix, DensityMatrix, HermitianOperator, C64,
};

/// Per-step error tolerance of the adaptive integrator.
pub const STEP_TOLERANCE: f64 = 1e-9;

/// Steps shorter than this fraction of the current time scale abort the run.
const MIN_RELATIVE_STEP: f64 = 1e-14;

#[derive(Clone, Copy, Debug)]
pub struct MasterEqParams {
    pub mass: f64,
    /// Friction coefficient, 1/time.
    pub gamma: f64,
    pub temperature: f64,
    pub k_b: f64,
    pub hbar: f64,
}

impl MasterEqParams {
    /// `m = k_B = hbar = 1`.
    pub fn natural(gamma: f64, temperature: f64) -> Self {
        Self {
            mass: 1.0,
            gamma,
            temperature,
            k_b: 1.0,
            hbar: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return arg(format!("gamma = {} must be finite and >= 0", self.gamma));
        }
        if !(self.temperature > 0.0 && self.temperature.is_finite()) {
            return arg(format!("temperature = {} must be positive", self.temperature));
        }
        if !(self.mass > 0.0 && self.k_b > 0.0 && self.hbar > 0.0) {
            return arg("mass, k_B and hbar must be positive");
        }
        Ok(())
    }

    /// `2 m gamma k_B T / hbar^2`.
    pub fn decoherence_rate(&self) -> f64 {
        2.0 * self.mass * self.gamma * self.k_b * self.temperature / (self.hbar * self.hbar)
    }
}

/// Position and momentum of the Brownian particle.
#[derive(Clone, Debug)]
pub struct SystemOperators {
    pub x: CMatrix,
    pub p: CMatrix,
}

impl SystemOperators {
    pub fn new(x: &HermitianOperator, p: &HermitianOperator) -> Result<Self> {
        if x.space() != p.space() {
            return arg("position and momentum live on different spaces");
        }
        Ok(Self {
            x: x.matrix().clone(),
            p: p.matrix().clone(),
        })
    }
}

fn cl_generator(
    h: &CMatrix,
    ops: &SystemOperators,
    params: &MasterEqParams,
    friction: bool,
) -> impl Fn(&CMatrix) -> CMatrix {
    let minus_i_over_hbar = C64::new(0.0, -1.0 / params.hbar);
    let friction_factor = C64::new(0.0, -params.gamma / params.hbar);
    let dephasing = C64::new(-params.decoherence_rate(), 0.0);
    let (h, x, p) = (h.clone(), ops.x.clone(), ops.p.clone());
    let friction = friction && params.gamma != 0.0;
    move |rho: &CMatrix| {
        let mut out = commutator(&h, rho) * minus_i_over_hbar;
        if friction {
            out += commutator(&x, &anticommutator(&p, rho)) * friction_factor;
        }
        if dephasing.re != 0.0 {
            out += commutator(&x, &commutator(&x, rho)) * dephasing;
        }
        out
    }
}

fn rk4_step(f: &impl Fn(&CMatrix) -> CMatrix, y: &CMatrix, h: f64) -> CMatrix {
    let half = C64::new(h / 2.0, 0.0);
    let full = C64::new(h, 0.0);
    let k1 = f(y);
    let k2 = f(&(y + &k1 * half));
    let k3 = f(&(y + &k2 * half));
    let k4 = f(&(y + &k3 * full));
    y + (k1 + (k2 + k3) * C64::new(2.0, 0.0) + k4) * C64::new(h / 6.0, 0.0)
}

/// Classic RK4 with step halving: each step is compared against two half
/// steps, accepted when the Richardson estimate `|y2 - y1| / 15` is below
/// [`STEP_TOLERANCE`], and the extrapolated value `y2 + (y2 - y1) / 15` is
/// kept.
pub(crate) fn integrate_adaptive(
    rho0: &CMatrix,
    f: impl Fn(&CMatrix) -> CMatrix,
    times: &[f64],
) -> Result<Vec<CMatrix>> {
    let mut states = Vec::with_capacity(times.len());
    let mut y = rho0.clone();
    states.push(y.clone());
    let mut t = times[0];
    let mut h = times.get(1).map_or(1.0, |t1| t1 - times[0]);
    for &target in &times[1..] {
        while t < target {
            let remaining = target - t;
            let last = h >= remaining;
            let step = if last { remaining } else { h };
            let y1 = rk4_step(&f, &y, step);
            let mid = rk4_step(&f, &y, step / 2.0);
            let y2 = rk4_step(&f, &mid, step / 2.0);
            let diff = &y2 - &y1;
            let err = max_abs(&diff) / 15.0;
            if !err.is_finite() {
                return Err(Error::Integration {
                    time: t,
                    step,
                    reason: "non-finite state".into(),
                });
            }
            if err <= STEP_TOLERANCE {
                y = y2 + diff / C64::new(15.0, 0.0);
                t = if last { target } else { t + step };
                if err < STEP_TOLERANCE / 32.0 && !last {
                    h *= 2.0;
                }
            } else {
                h = step / 2.0;
                if h < MIN_RELATIVE_STEP * t.abs().max(remaining).max(1.0) {
                    return Err(Error::Integration {
                        time: t,
                        step: h,
                        reason: format!("step size underflow, error estimate {err:e}"),
                    });
                }
            }
        }
        states.push(y.clone());
    }
    Ok(states)
}

fn integrate(
    rho_s0: &DensityMatrix,
    h_s: &HermitianOperator,
    ops: &SystemOperators,
    params: &MasterEqParams,
    times: &[f64],
    friction: bool,
) -> Result<Trajectory> {
    params.validate()?;
    check_times(times)?;
    if rho_s0.space() != h_s.space() {
        return arg("state and Hamiltonian live on different spaces");
    }
    let n = rho_s0.space().total_dim();
    for m in [&ops.x, &ops.p] {
        check_dim(n, m.nrows())?;
        check_dim(n, m.ncols())?;
    }
    let f = cl_generator(h_s.matrix(), ops, params, friction);
    let states = integrate_adaptive(rho_s0.matrix(), f, times)?;
    let kind = if friction { "Caldeira-Leggett" } else { "recoilless" };
    Ok(Trajectory {
        times: times.to_vec(),
        states,
        space: rho_s0.space().clone(),
        label: format!(
            "{kind}: m = {}, gamma = {}, T = {}, k_B = {}, hbar = {}",
            params.mass, params.gamma, params.temperature, params.k_b, params.hbar
        ),
    })
}

/// Integrates the Caldeira-Leggett equation. Positivity is not guaranteed and
/// not checked; see [`Trajectory::min_eigenvalues`].
pub fn integrate_caldeira_leggett(
    rho_s0: &DensityMatrix,
    h_s: &HermitianOperator,
    ops: &SystemOperators,
    params: &MasterEqParams,
    times: &[f64],
) -> Result<Trajectory> {
    integrate(rho_s0, h_s, ops, params, times, true)
}

/// Integrates the friction-free variant.
pub fn integrate_recoilless(
    rho_s0: &DensityMatrix,
    h_s: &HermitianOperator,
    ops: &SystemOperators,
    params: &MasterEqParams,
    times: &[f64],
) -> Result<Trajectory> {
    integrate(rho_s0, h_s, ops, params, times, false)
}
