//! Decoherence measures for many-fermion states.
//!
//! The crate computes the purity of an N-body electronic density matrix
//! expressed over Slater determinants, the one- and two-body reduced
//! purities `Tr[Γ_r^2]`, and the distilled purities that extract the
//! determinant-coherence content of the reduced purities in a chosen
//! single-particle basis. Every closed-form evaluator is paired with a
//! brute-force ladder-operator oracle so their agreement can be checked
//! wholesale.

pub mod density;
pub mod error;
pub mod fock;
pub mod json;
pub mod purity;
pub mod random;
pub mod rdm;

pub use density::{DeterminantBasis, ManyBodyDensityMatrix};
pub use error::{Error, Result};
pub use fock::{
    coherence_order, enumerate_determinants, transition_descriptor, LadderKind,
    SlaterDeterminant, TransitionDescriptor,
};
pub use purity::{
    distilled_bounds, distilled_p1, distilled_p1_closed, distilled_p2, distilled_p2_closed,
    p1_closed, p2_closed, reduced_purity_1, reduced_purity_2, DistilledBounds, PurityReport,
};
pub use rdm::{
    one_rdm_closed, one_rdm_oracle, two_rdm_closed, two_rdm_oracle, OneBodyRDM, PairTable,
    TwoBodyRDM,
};
