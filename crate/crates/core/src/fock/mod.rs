//! Exact linear algebra on small multimode Fock spaces truncated by total
//! photon number: states, beam splitters, loss channels, measurements and
//! state metrics.
//!
//! Everything is dense. With six modes and at most three photons the basis
//! has 84 states, so plain `nalgebra` matrices are ample.

mod basis;
mod channel;
mod metrics;
mod ops;
mod povm;
mod state;

pub use basis::{basis_dimension, FockBasis, Occupation, DEFAULT_CUTOFF, MAX_MODES};
pub use channel::{beam_splitter_unitary, phase_unitary, KrausChannel};
pub use metrics::{fidelity, project_sector, purity_from_ratio, subspace_populations, SubspacePopulations};
pub use ops::{
    apply_beam_splitter, apply_loss, apply_phase, measure_povm, measure_total_count, partial_trace,
    permute_modes, tensor_product, tensor_product_with_tolerance,
};
pub use povm::{completeness_defect, PovmElement};
pub use state::{DensityOperator, TRUNCATION_TOL};

pub(crate) use channel::binomial;
