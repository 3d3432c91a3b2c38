//! Su-Schrieffer-Heeger chain with electron-vibration coupling: geometry
//! optimization, molecular orbitals, laser driving, and Wigner-sampled
//! Ehrenfest trajectory ensembles whose averaged electronic density matrix
//! feeds the decoherence measures of `distill-core`.

pub mod ehrenfest;
pub mod ensemble;
pub mod error;
pub mod manybody;
pub mod model;
pub mod params;
pub mod wigner;

pub use ehrenfest::{ehrenfest_step, EhrenfestIntegrator, TrajectoryState};
pub use ensemble::{run_ensemble, EnsembleOutcome, Experiment, InitialState, SamplePoint};
pub use error::{Result, SshError};
pub use manybody::{
    determinant_transform, many_body_hamiltonian, spin_orbital_unitary, SectorBasis,
    SectorPropagator,
};
pub use model::{build_h1, optimize_geometry, spatial_h1, Geometry};
pub use params::{field_amplitude, LaserPulse, SshParams, HBAR_EV_FS};
pub use wigner::{normal_modes, wigner_sample, NormalModes};
