//! Numerical toolkit for comparing open-system descriptions of one closed
//! quantum system under different system/environment splits.
//!
//! * [`hilbert`]: dense states, operators, partial traces, spectral functions.
//! * [`structures`]: bipartitions, particle regroupings and unitary
//!   re-factorizations with their expansion coefficients.
//! * [`projections`]: projection superoperators onto the relevant part of a
//!   state and the residuals measuring their incompatibility across splits.
//! * [`correlations`]: entropies, mutual information and two-qubit discord.
//! * [`dynamics`]: truncated-oscillator Brownian-motion models, exact unitary
//!   evolution and master-equation integrators.

pub mod correlations;
pub mod dynamics;
pub mod error;
pub mod hilbert;
pub mod projections;
pub mod sampling;
pub mod structures;

pub use error::{Error, Result};
pub use hilbert::{
    gibbs_state, partial_trace, schmidt_decompose, tensor, trace_distance, CMatrix, CVector,
    CompositeSpace, DensityMatrix, HermitianOperator, StateVector, Tensor, C64,
};
pub use structures::{
    apply_structure_map, refactor_coefficients, Bipartition, Direction, RefactorCoefficients,
    Structure, StructureMap,
};
pub use projections::{
    commutation_residual, irrelevant_part, leakage_residual, project, LeakageReport,
    ProjectionScheme, SchemeKind,
};
pub use correlations::{
    discord_two_qubit, entanglement_entropy, mutual_information, von_neumann_entropy,
    CorrelationReport, MeasuredSide,
};
