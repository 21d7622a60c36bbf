//! Entropies, mutual information and one-sided two-qubit discord.
//!
//! All quantities are in nats.

use rayon::prelude::*;

use crate::error::{arg, Result};
use crate::hilbert::{
    eigvalsh, partial_trace_operator, permute_operator, schmidt_decompose, CMatrix, DensityMatrix,
    StateVector, C64,
};
use crate::structures::Bipartition;

/// Eigenvalues below this are dropped from entropy sums.
pub const ENTROPY_CUTOFF: f64 = 1e-14;

const GRID: usize = 64;
const ANGLE_RESOLUTION: f64 = 1e-4;

fn entropy_of_spectrum(values: impl IntoIterator<Item = f64>) -> f64 {
    let s: f64 = values
        .into_iter()
        .filter(|&p| p > ENTROPY_CUTOFF)
        .map(|p| -p * p.ln())
        .sum();
    s.max(0.0)
}

/// `-tr(m ln m)` of a Hermitian matrix.
pub fn entropy_of_matrix(m: &CMatrix) -> f64 {
    entropy_of_spectrum(eigvalsh(m))
}

pub fn von_neumann_entropy(rho: &DensityMatrix) -> f64 {
    entropy_of_matrix(rho.matrix())
}

/// Entropy of either reduction of a pure state, from its Schmidt coefficients.
pub fn entanglement_entropy(psi: &StateVector, cut: &Bipartition) -> Result<f64> {
    let schmidt = schmidt_decompose(psi, cut)?;
    Ok(entropy_of_spectrum(schmidt.coefficients.iter().map(|c| c * c)))
}

fn marginals(rho: &DensityMatrix, cut: &Bipartition) -> Result<(CMatrix, CMatrix)> {
    if rho.space() != cut.space() {
        return arg("state and cut live on different spaces");
    }
    let dims = rho.space().dims();
    Ok((
        partial_trace_operator(rho.matrix(), dims, cut.s_particles()),
        partial_trace_operator(rho.matrix(), dims, cut.e_particles()),
    ))
}

/// `S(rho_S) + S(rho_E) - S(rho)`.
pub fn mutual_information(rho: &DensityMatrix, cut: &Bipartition) -> Result<f64> {
    let (s, e) = marginals(rho, cut)?;
    let mi = entropy_of_matrix(&s) + entropy_of_matrix(&e) - von_neumann_entropy(rho);
    Ok(mi.max(0.0))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MeasuredSide {
    System,
    Environment,
}

/// Outcome of the measurement search behind [`discord_two_qubit`].
#[derive(Clone, Copy, Debug)]
pub struct DiscordOptimum {
    pub discord: f64,
    /// Mutual information minus discord.
    pub classical_correlation: f64,
    /// Bloch angles of the optimal measurement's first basis vector.
    pub theta: f64,
    pub phi: f64,
}

/// Measurement basis `cos(t/2)|0> + e^{ip} sin(t/2)|1>` and its orthogonal
/// complement, as rank-one projectors.
pub fn qubit_measurement(theta: f64, phi: f64) -> [CMatrix; 2] {
    let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    let e = C64::from_polar(1.0, phi);
    let up = [C64::new(c, 0.0), e * s];
    let down = [-e.conj() * s, C64::new(c, 0.0)];
    let proj = |v: [C64; 2]| CMatrix::from_fn(2, 2, |r, k| v[r] * v[k].conj());
    [proj(up), proj(down)]
}

fn qubit_entropy(m: &CMatrix) -> f64 {
    let a = m[(0, 0)].re;
    let d = m[(1, 1)].re;
    let tr = a + d;
    let gap = ((a - d).powi(2) + 4.0 * m[(0, 1)].norm_sqr()).sqrt();
    entropy_of_spectrum([(tr + gap) / 2.0, (tr - gap) / 2.0])
}

/// `sum_k p_k S(rho_B|k)` for a measurement on the first qubit of `rho`.
pub(crate) fn measured_conditional_entropy(rho: &CMatrix, theta: f64, phi: f64) -> f64 {
    let mut total = 0.0;
    for p in qubit_measurement(theta, phi) {
        // tr_A[(P ⊗ 1) rho]
        let mut cond = CMatrix::zeros(2, 2);
        for b in 0..2 {
            for bp in 0..2 {
                let mut z = C64::new(0.0, 0.0);
                for a in 0..2 {
                    for ap in 0..2 {
                        z += p[(ap, a)] * rho[(2 * a + b, 2 * ap + bp)];
                    }
                }
                cond[(b, bp)] = z;
            }
        }
        let prob = (cond[(0, 0)] + cond[(1, 1)]).re;
        if prob > ENTROPY_CUTOFF {
            total += prob * qubit_entropy(&(cond / C64::new(prob, 0.0)));
        }
    }
    total
}

fn golden_section(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> (f64, f64) {
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - ratio * (hi - lo);
    let mut x2 = lo + ratio * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while hi - lo > ANGLE_RESOLUTION {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - ratio * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + ratio * (hi - lo);
            f2 = f(x2);
        }
    }
    if f1 <= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// One-sided discord with projective measurements on `side`, and the
/// optimal measurement found.
///
/// The measurement direction is searched on a 64x64 grid over the Bloch
/// sphere, then refined by alternating golden-section line searches to an
/// angular resolution of 1e-4.
pub fn discord_search(rho: &DensityMatrix, side: MeasuredSide) -> Result<DiscordOptimum> {
    if rho.space().dims() != [2, 2] {
        return arg(format!(
            "discord needs a two-qubit state, got dims {:?}",
            rho.space().dims()
        ));
    }
    let m = match side {
        MeasuredSide::System => rho.matrix().clone(),
        MeasuredSide::Environment => permute_operator(rho.matrix(), &[2, 2], &[1, 0])?,
    };
    let measured = partial_trace_operator(&m, &[2, 2], &[0]);
    let mi = entropy_of_matrix(&partial_trace_operator(&m, &[2, 2], &[1])) + qubit_entropy(&measured)
        - von_neumann_entropy(rho);

    let pi = std::f64::consts::PI;
    let dtheta = pi / (GRID - 1) as f64;
    let dphi = 2.0 * pi / GRID as f64;
    let cells: Vec<(f64, f64, f64)> = (0..GRID * GRID)
        .into_par_iter()
        .map(|k| {
            let (t, p) = ((k / GRID) as f64 * dtheta, (k % GRID) as f64 * dphi);
            (measured_conditional_entropy(&m, t, p), t, p)
        })
        .collect();
    // first minimum in grid order, independent of scheduling
    let (mut best, mut theta, mut phi) = cells
        .iter()
        .copied()
        .fold((f64::INFINITY, 0.0, 0.0), |acc, c| if c.0 < acc.0 { c } else { acc });

    for _ in 0..50 {
        let (t, ft) = golden_section(
            |t| measured_conditional_entropy(&m, t, phi),
            theta - dtheta,
            theta + dtheta,
        );
        let (p, fp) = golden_section(
            |p| measured_conditional_entropy(&m, t, p),
            phi - dphi,
            phi + dphi,
        );
        let improved = ft.min(fp) < best;
        let moved = (t - theta).abs().max((p - phi).abs());
        if fp <= ft {
            if fp < best {
                best = fp;
                theta = t;
                phi = p;
            }
        } else if ft < best {
            best = ft;
            theta = t;
        }
        if !improved || moved < ANGLE_RESOLUTION {
            break;
        }
    }

    let s_measured = qubit_entropy(&measured);
    let discord = (s_measured - von_neumann_entropy(rho) + best).max(0.0);
    Ok(DiscordOptimum {
        discord,
        classical_correlation: (mi - discord).max(0.0),
        theta,
        phi,
    })
}

/// One-sided projective-measurement discord of a two-qubit state.
pub fn discord_two_qubit(rho: &DensityMatrix, side: MeasuredSide) -> Result<f64> {
    Ok(discord_search(rho, side)?.discord)
}

/// Correlations of one state across one cut.
#[derive(Clone, Debug)]
pub struct CorrelationReport {
    pub cut: Bipartition,
    /// Entropy of the S marginal; the entanglement entropy for pure states.
    pub entropy: f64,
    pub mutual_information: f64,
    /// Discord measured on S, when both sides are single qubits.
    pub discord: Option<f64>,
    pub state_id: Option<String>,
}

pub fn correlation_report(
    rho: &DensityMatrix,
    cut: &Bipartition,
    state_id: Option<String>,
) -> Result<CorrelationReport> {
    let (s, _) = marginals(rho, cut)?;
    let discord = if cut.s_dim() == 2 && cut.e_dim() == 2 {
        let reordered = if cut.s_particles()[0] == 0 {
            rho.clone()
        } else {
            let m = permute_operator(rho.matrix(), &[2, 2], &[1, 0])?;
            DensityMatrix::from_trusted(rho.space().clone(), m)
        };
        Some(discord_two_qubit(&reordered, MeasuredSide::System)?)
    } else {
        None
    };
    Ok(CorrelationReport {
        cut: cut.clone(),
        entropy: entropy_of_matrix(&s),
        mutual_information: mutual_information(rho, cut)?,
        discord,
        state_id,
    })
}
