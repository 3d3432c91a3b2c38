use thiserror::Error;

/// Errors produced by determinant algebra, density-matrix constructors and
/// reduced-density-matrix operations.
#[derive(Debug, Error)]
pub enum Error {
    #[error("spin-orbital index {orbital} out of range for {m} spin-orbitals")]
    OrbitalOutOfRange { orbital: usize, m: usize },

    #[error("occupation mask {occ:#x} has bits set at or above orbital count {m}")]
    OccupationOutOfRange { occ: u64, m: usize },

    #[error("orbital count {m} exceeds the supported maximum of 64")]
    TooManyOrbitals { m: usize },

    #[error("determinants live in different spaces: M = {m_lhs} vs {m_rhs}, N = {n_lhs} vs {n_rhs}")]
    SectorMismatch {
        m_lhs: usize,
        m_rhs: usize,
        n_lhs: usize,
        n_rhs: usize,
    },

    #[error("determinant basis contains a duplicate entry at position {index}")]
    DuplicateDeterminant { index: usize },

    #[error("determinant basis is empty")]
    EmptyBasis,

    #[error("coefficient matrix is {rows}x{cols} but the basis holds {k} determinants")]
    CoefficientShape { rows: usize, cols: usize, k: usize },

    #[error("coefficient matrix is not Hermitian: |a[{n}][{m}] - conj(a[{m}][{n}])| = {dev:.3e}")]
    NotHermitian { n: usize, m: usize, dev: f64 },

    #[error("coefficient matrix trace deviates from 1 by {dev:.3e}")]
    TraceNotOne { dev: f64 },

    #[error("density matrix is not positive semidefinite: min eigenvalue {min_eig:.3e}")]
    NotPositiveSemidefinite { min_eig: f64 },

    #[error("state vector has zero norm")]
    ZeroStateVector,

    #[error("ensemble weights sum to {sum} instead of 1")]
    BadEnsembleWeights { sum: f64 },

    #[error("ensemble member {index} uses a different determinant basis")]
    BasisMismatch { index: usize },

    #[error("ensemble is empty")]
    EmptyEnsemble,

    #[error("matrix is {rows}x{cols}, expected {expected}x{expected}")]
    MatrixShape {
        rows: usize,
        cols: usize,
        expected: usize,
    },

    #[error("matrix is not unitary: max |U U^† - I| entry = {dev:.3e}")]
    NotUnitary { dev: f64 },

    #[error("populations sum to {sum} instead of 1, or contain negative entries")]
    BadPopulations { sum: f64 },

    #[error("coherence-order matrix must be symmetric with zero diagonal (bad entry at [{n}][{m}])")]
    BadOrderMatrix { n: usize, m: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
