//! Comparing how two projection schemes describe the same composite
//! trajectory, and fitting master-equation friction to exact dynamics.

use super::master::{integrate_recoilless, MasterEqParams, SystemOperators};
use super::Trajectory;
use crate::error::{arg, Result};
use crate::hilbert::{frobenius_norm, trace_norm, CMatrix, DensityMatrix, HermitianOperator, C64};
use crate::projections::ProjectionScheme;

/// Per-time distances between `tr_E' P rho(t)` and `tr_E' P' rho(t)`, where
/// `E'` is the environment of the second scheme.
#[derive(Clone, Debug)]
pub struct DerivativeComparison {
    pub times: Vec<f64>,
    /// `||A(t) - B(t)||_1 / 2`.
    pub state_distance: Vec<f64>,
    /// `||A'(t) - B'(t)||_1 / 2`, by three-point finite differences.
    pub derivative_distance: Vec<f64>,
}

/// Derivative weights at `ts[at]` of the quadratic through three points.
fn three_point_weights(ts: [f64; 3], at: usize) -> [f64; 3] {
    let t = ts[at];
    let mut w = [0.0; 3];
    for j in 0..3 {
        let others: Vec<usize> = (0..3).filter(|&k| k != j).collect();
        let denom: f64 = others.iter().map(|&k| ts[j] - ts[k]).product();
        let numer: f64 = others.iter().map(|&k| t - ts[k]).sum();
        // d/dt prod_k (t - t_k) = sum over the remaining factor
        w[j] = numer / denom;
    }
    w
}

/// Compares the open-system objects that `scheme` and `scheme_alt` assign to
/// the second scheme's system along a composite trajectory.
///
/// Central differences in the interior and one-sided second-order formulas at
/// the ends, so the grid needs at least three points.
pub fn projection_derivative_compare(
    trajectory: &Trajectory,
    scheme: &ProjectionScheme,
    scheme_alt: &ProjectionScheme,
) -> Result<DerivativeComparison> {
    let n = trajectory.len();
    if n < 3 {
        return arg(format!("finite differences need at least 3 grid points, got {n}"));
    }
    for s in [scheme, scheme_alt] {
        if s.structure().frame().is_none() && s.cut().space() != &trajectory.space {
            return arg("scheme and trajectory live on different spaces");
        }
    }
    let alt = scheme_alt.structure();
    let diffs: Vec<CMatrix> = trajectory
        .states
        .iter()
        .map(|rho| Ok(alt.reduce(&scheme.apply(rho)?) - alt.reduce(&scheme_alt.apply(rho)?)))
        .collect::<Result<_>>()?;
    let state_distance = diffs.iter().map(|d| 0.5 * trace_norm(d)).collect();
    let t = &trajectory.times;
    let derivative_distance = (0..n)
        .map(|k| {
            let (start, at) = match k {
                0 => (0, 0),
                k if k == n - 1 => (n - 3, 2),
                k => (k - 1, 1),
            };
            let w = three_point_weights([t[start], t[start + 1], t[start + 2]], at);
            let d = (0..3).fold(CMatrix::zeros(diffs[0].nrows(), diffs[0].ncols()), |acc, j| {
                acc + &diffs[start + j] * C64::new(w[j], 0.0)
            });
            0.5 * trace_norm(&d)
        })
        .collect();
    Ok(DerivativeComparison {
        times: t.clone(),
        state_distance,
        derivative_distance,
    })
}

/// Friction coefficient fitted to a reference reduced trajectory.
#[derive(Clone, Copy, Debug)]
pub struct GammaFit {
    pub gamma: f64,
    /// Root mean square Frobenius distance over the fit window.
    pub rms_distance: f64,
    /// Largest trace distance over the fit window.
    pub max_trace_distance: f64,
}

/// Least-squares fit of the recoilless friction coefficient to `reference`
/// (a reduced S trajectory), by golden-section search over `log10 gamma` in
/// `[gamma_min, gamma_max]`. `params.gamma` is ignored.
pub fn calibrate_gamma(
    reference: &Trajectory,
    h_s: &HermitianOperator,
    ops: &SystemOperators,
    params: &MasterEqParams,
    gamma_min: f64,
    gamma_max: f64,
) -> Result<GammaFit> {
    if !(gamma_min > 0.0 && gamma_max > gamma_min) {
        return arg("need 0 < gamma_min < gamma_max");
    }
    let rho0 = DensityMatrix::new(reference.space.clone(), reference.states[0].clone())?;
    let cost = |log_g: f64| -> Result<(f64, f64)> {
        let p = MasterEqParams {
            gamma: 10f64.powf(log_g),
            ..*params
        };
        let traj = integrate_recoilless(&rho0, h_s, ops, &p, &reference.times)?;
        let mut sq = 0.0;
        let mut worst = 0f64;
        for (a, b) in traj.states.iter().zip(&reference.states) {
            let d = a - b;
            sq += frobenius_norm(&d).powi(2);
            worst = worst.max(0.5 * trace_norm(&d));
        }
        Ok((sq, worst))
    };
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let (mut lo, mut hi) = (gamma_min.log10(), gamma_max.log10());
    let mut x1 = hi - ratio * (hi - lo);
    let mut x2 = lo + ratio * (hi - lo);
    let (mut f1, mut f2) = (cost(x1)?.0, cost(x2)?.0);
    while hi - lo > 1e-4 {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - ratio * (hi - lo);
            f1 = cost(x1)?.0;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + ratio * (hi - lo);
            f2 = cost(x2)?.0;
        }
    }
    let best = if f1 <= f2 { x1 } else { x2 };
    let (sq, worst) = cost(best)?;
    Ok(GammaFit {
        gamma: 10f64.powf(best),
        rms_distance: (sq / reference.len() as f64).sqrt(),
        max_trace_distance: worst,
    })
}
