//! Closed-system unitary evolution.

use super::{check_times, Trajectory};
use crate::error::{arg, Error, Result};
use crate::hilbert::{eigh, matmul, CMatrix, DensityMatrix, HermitianOperator, C64};

/// Largest dimension accepted for dense exact evolution.
pub const MAX_EXACT_DIM: usize = 4096;

/// `rho(t) = exp(-iHt/hbar) rho0 exp(iHt/hbar)` from one eigendecomposition
/// of `H`.
pub struct ExactPropagator {
    energies: Vec<f64>,
    vectors: CMatrix,
    hbar: f64,
}

impl ExactPropagator {
    pub fn new(h: &HermitianOperator, hbar: f64) -> Result<Self> {
        let n = h.matrix().nrows();
        if n > MAX_EXACT_DIM {
            return Err(Error::Resource(format!(
                "exact evolution at dimension {n} exceeds {MAX_EXACT_DIM}"
            )));
        }
        if !(hbar > 0.0) {
            return arg("hbar must be positive");
        }
        let (energies, vectors) = eigh(h.matrix());
        Ok(Self {
            energies,
            vectors,
            hbar,
        })
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    /// `rho0` in the energy eigenbasis.
    pub fn to_eigenbasis(&self, rho0: &CMatrix) -> CMatrix {
        matmul(&matmul(&self.vectors.adjoint(), rho0), &self.vectors)
    }

    /// Evolved state from the energy-basis form of `rho0`.
    pub fn evolve_eigenbasis(&self, rho_eig: &CMatrix, t: f64) -> CMatrix {
        let phases: Vec<C64> = self
            .energies
            .iter()
            .map(|&e| C64::from_polar(1.0, -e * t / self.hbar))
            .collect();
        let rotated = CMatrix::from_fn(rho_eig.nrows(), rho_eig.ncols(), |j, k| {
            phases[j] * rho_eig[(j, k)] * phases[k].conj()
        });
        matmul(&matmul(&self.vectors, &rotated), &self.vectors.adjoint())
    }

    pub fn evolve(&self, rho0: &CMatrix, t: f64) -> CMatrix {
        self.evolve_eigenbasis(&self.to_eigenbasis(rho0), t)
    }
}

pub fn evolve_exact(
    rho0: &DensityMatrix,
    h: &HermitianOperator,
    times: &[f64],
    hbar: f64,
) -> Result<Trajectory> {
    if rho0.space() != h.space() {
        return arg("state and Hamiltonian live on different spaces");
    }
    check_times(times)?;
    let prop = ExactPropagator::new(h, hbar)?;
    let rho_eig = prop.to_eigenbasis(rho0.matrix());
    let states = times.iter().map(|&t| prop.evolve_eigenbasis(&rho_eig, t)).collect();
    Ok(Trajectory {
        times: times.to_vec(),
        states,
        space: rho0.space().clone(),
        label: format!("exact unitary, hbar = {hbar}"),
    })
}
