//! Brownian-motion models and their dynamics.

pub mod compare;
pub mod exact;
pub mod master;
pub mod models;

pub use compare::{calibrate_gamma, projection_derivative_compare, DerivativeComparison, GammaFit};
pub use exact::{evolve_exact, ExactPropagator};
pub use master::{integrate_caldeira_leggett, integrate_recoilless, MasterEqParams, SystemOperators};
pub use models::{
    build_hamiltonians, initial_state, position_momentum_ops, HamiltonianParts, InitialCondition,
    QbmHamiltonians, QbmModel,
};

use crate::hilbert::{eigvalsh, hermiticity_defect, CMatrix, CompositeSpace, DensityMatrix};

/// Top-level Fock occupation above which a run counts as truncation-unsafe.
pub const TRUNCATION_THRESHOLD: f64 = 1e-4;

/// States on an increasing time grid.
///
/// States are kept as raw matrices: master equations outside the Lindblad
/// class need not keep them positive.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<CMatrix>,
    pub space: CompositeSpace,
    /// Free-form description of the generator and its parameters.
    pub label: String,
}

/// Largest top-level occupation seen for each particle.
#[derive(Clone, Debug)]
pub struct TruncationReport {
    pub top_occupation: Vec<f64>,
    pub unsafe_truncation: bool,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// State `k` as a validated density matrix.
    pub fn state(&self, k: usize) -> crate::Result<DensityMatrix> {
        DensityMatrix::new(self.space.clone(), self.states[k].clone())
    }

    pub fn trace_errors(&self) -> Vec<f64> {
        self.states.iter().map(|s| (s.trace() - crate::hilbert::ONE).norm()).collect()
    }

    pub fn hermiticity_defects(&self) -> Vec<f64> {
        self.states.iter().map(hermiticity_defect).collect()
    }

    pub fn min_eigenvalues(&self) -> Vec<f64> {
        self.states
            .iter()
            .map(|s| eigvalsh(&crate::hilbert::hermitian_part(s))[0])
            .collect()
    }

    pub fn truncation(&self) -> TruncationReport {
        let dims = self.space.dims();
        let mut top = vec![0f64; dims.len()];
        for s in &self.states {
            let mut occ = vec![0f64; dims.len()];
            for idx in 0..s.nrows() {
                let pop = s[(idx, idx)].re;
                let mut rest = idx;
                for k in (0..dims.len()).rev() {
                    if rest % dims[k] == dims[k] - 1 {
                        occ[k] += pop;
                    }
                    rest /= dims[k];
                }
            }
            for (t, o) in top.iter_mut().zip(occ) {
                *t = t.max(o);
            }
        }
        let unsafe_truncation = top.iter().any(|&o| o > TRUNCATION_THRESHOLD);
        TruncationReport {
            top_occupation: top,
            unsafe_truncation,
        }
    }
}

pub(crate) fn check_times(times: &[f64]) -> crate::Result<()> {
    if times.is_empty() {
        return crate::error::arg("time grid is empty");
    }
    if times.iter().any(|t| !t.is_finite()) || times.windows(2).any(|w| w[1] <= w[0]) {
        return crate::error::arg("time grid must be finite and strictly increasing");
    }
    Ok(())
}
