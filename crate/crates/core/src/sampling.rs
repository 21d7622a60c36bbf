//! Seeded random states and unitaries.
//!
//! All randomness comes from `ChaCha8Rng` (rand_chacha 0.9). Sample `k` of a
//! run seeded with `seed` uses the generator seeded with `seed` on stream `k`,
//! so every sample is reproducible on its own and independent of thread count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

use crate::hilbert::{partial_trace_operator, CMatrix, CVector, CompositeSpace, DensityMatrix, StateVector, C64};

pub type SampleRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> SampleRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Generator for sample `index` of the run seeded with `seed`.
pub fn sample_rng(seed: u64, index: u64) -> SampleRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    C64::new(re, im)
}

/// Matrix of i.i.d. standard complex Gaussians.
pub fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    // column-major fill keeps the draw order fixed
    let mut m = CMatrix::zeros(rows, cols);
    for c in 0..cols {
        for r in 0..rows {
            m[(r, c)] = gaussian(rng);
        }
    }
    m
}

/// Haar-distributed unitary: QR of a Ginibre matrix with the phases of
/// `diag(R)` moved into `Q`.
pub fn haar_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    let qr = ginibre(n, n, rng).qr();
    let mut q = qr.q();
    let r = qr.r();
    for c in 0..n {
        let d = r[(c, c)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { C64::new(1.0, 0.0) };
        q.column_mut(c).iter_mut().for_each(|z| *z *= phase);
    }
    q
}

/// Haar-random pure state.
pub fn haar_state<R: Rng + ?Sized>(space: &CompositeSpace, rng: &mut R) -> StateVector {
    let n = space.total_dim();
    let v = CVector::from_iterator(n, (0..n).map(|_| gaussian(rng)));
    StateVector::normalized(space.clone(), v).expect("gaussian vector is nonzero")
}

/// Random mixed state from the Hilbert-Schmidt (induced) measure: the
/// reduction of a Haar-random pure state on `space ⊗ space`.
pub fn random_density<R: Rng + ?Sized>(space: &CompositeSpace, rng: &mut R) -> DensityMatrix {
    random_density_with_rank(space, space.total_dim(), rng)
}

/// Reduction of a Haar-random pure state on `space ⊗ C^ancilla`.
pub fn random_density_with_rank<R: Rng + ?Sized>(
    space: &CompositeSpace,
    ancilla: usize,
    rng: &mut R,
) -> DensityMatrix {
    let n = space.total_dim();
    let g = ginibre(n, ancilla, rng);
    let m = &g * g.adjoint();
    let tr = m.trace().re;
    DensityMatrix::from_trusted(space.clone(), m / C64::new(tr, 0.0))
}

/// Uniform point on the probability simplex with `n` entries.
pub fn random_probabilities<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    let draws: Vec<f64> = (0..n).map(|_| Exp1.sample(rng)).collect();
    let total: f64 = draws.iter().sum();
    draws.into_iter().map(|x| x / total).collect()
}

/// Haar-random pure state as a density matrix.
pub fn random_pure_density<R: Rng + ?Sized>(space: &CompositeSpace, rng: &mut R) -> DensityMatrix {
    haar_state(space, rng).to_density()
}

/// Random mixed state obtained as a marginal of a Haar-random pure state on
/// `space ⊗ C^2`; has rank at most 2.
pub fn random_rank_two<R: Rng + ?Sized>(space: &CompositeSpace, rng: &mut R) -> DensityMatrix {
    let ext = space.concat(&CompositeSpace::qubits(1).expect("qubit"));
    let psi = haar_state(&ext, rng);
    let keep: Vec<usize> = (0..space.num_particles()).collect();
    let m = partial_trace_operator(
        &psi.to_density().into_matrix(),
        ext.dims(),
        &keep,
    );
    DensityMatrix::from_trusted(space.clone(), m)
}
