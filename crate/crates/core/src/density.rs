//! N-body electronic density matrices over an explicit determinant basis.

use std::collections::HashMap;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::{coherence_order, SlaterDeterminant};

/// Per-entry tolerance for the Hermiticity of stored coefficient matrices.
pub const HERMITICITY_TOL: f64 = 1e-12;
/// Tolerance on `|Tr a - 1|`.
pub const TRACE_TOL: f64 = 1e-12;
/// Positive semidefiniteness is declared violated below `-PSD_TOL`.
pub const PSD_TOL: f64 = 1e-10;
/// Pure-state constructors renormalize (and flag) inputs whose norm deviates
/// from 1 by more than this.
pub const PURE_NORM_TOL: f64 = 1e-10;
/// Tolerance on the ensemble weight sum.
pub const WEIGHT_SUM_TOL: f64 = 1e-10;

/// An ordered, duplicate-free set of Slater determinants sharing one sector.
/// The iteration order pins the coefficient-matrix indexing.
#[derive(Clone, Debug)]
pub struct DeterminantBasis {
    dets: Vec<SlaterDeterminant>,
    index: HashMap<u64, usize>,
}

impl DeterminantBasis {
    pub fn new(dets: Vec<SlaterDeterminant>) -> Result<Self> {
        let first = *dets.first().ok_or(Error::EmptyBasis)?;
        let mut index = HashMap::with_capacity(dets.len());
        for (i, d) in dets.iter().enumerate() {
            // Sharing a sector is what makes coherence orders well defined.
            coherence_order(&first, d)?;
            if index.insert(d.occ_mask(), i).is_some() {
                return Err(Error::DuplicateDeterminant { index: i });
            }
        }
        Ok(Self { dets, index })
    }

    pub fn len(&self) -> usize {
        self.dets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dets.is_empty()
    }

    pub fn det(&self, i: usize) -> &SlaterDeterminant {
        &self.dets[i]
    }

    pub fn dets(&self) -> &[SlaterDeterminant] {
        &self.dets
    }

    /// Index of a determinant in this basis, if present.
    pub fn position(&self, det: &SlaterDeterminant) -> Option<usize> {
        self.index.get(&det.occ_mask()).copied().filter(|&i| {
            self.dets[i].num_orbitals() == det.num_orbitals()
        })
    }

    /// Spin-orbital count shared by every determinant.
    pub fn num_orbitals(&self) -> usize {
        self.dets[0].num_orbitals()
    }

    /// Particle number shared by every determinant.
    pub fn num_particles(&self) -> usize {
        self.dets[0].num_particles()
    }

    /// K x K coherence-order matrix, row-major.
    pub fn order_matrix(&self) -> Vec<u8> {
        let k = self.len();
        let mut s = vec![0u8; k * k];
        for i in 0..k {
            for j in 0..k {
                s[i * k + j] = coherence_order(&self.dets[i], &self.dets[j]).unwrap() as u8;
            }
        }
        s
    }
}

impl PartialEq for DeterminantBasis {
    fn eq(&self, other: &Self) -> bool {
        self.dets == other.dets
    }
}

/// The N-body electronic density matrix `rho = sum_{n,m} a_nm |Phi_n><Phi_m|`.
///
/// Hermiticity and unit trace are enforced at construction; positive
/// semidefiniteness is guaranteed for ensemble averages of pure states but
/// only checked on demand for user-supplied coefficient matrices.
#[derive(Clone, Debug)]
pub struct ManyBodyDensityMatrix {
    basis: Arc<DeterminantBasis>,
    a: DMatrix<Complex64>,
    renormalized: bool,
}

impl ManyBodyDensityMatrix {
    pub fn new(basis: Arc<DeterminantBasis>, a: DMatrix<Complex64>) -> Result<Self> {
        let k = basis.len();
        if a.nrows() != k || a.ncols() != k {
            return Err(Error::CoefficientShape {
                rows: a.nrows(),
                cols: a.ncols(),
                k,
            });
        }
        for n in 0..k {
            for m in n..k {
                let dev = (a[(n, m)] - a[(m, n)].conj()).norm();
                if dev > HERMITICITY_TOL {
                    return Err(Error::NotHermitian { n, m, dev });
                }
            }
        }
        let trace: Complex64 = (0..k).map(|n| a[(n, n)]).sum();
        let dev = (trace - Complex64::new(1.0, 0.0)).norm();
        if dev > TRACE_TOL {
            return Err(Error::TraceNotOne { dev });
        }
        Ok(Self {
            basis,
            a,
            renormalized: false,
        })
    }

    /// Rank-one projector `a_nm = c_n conj(c_m)` for a pure state.
    ///
    /// Inputs whose norm deviates from 1 by more than [`PURE_NORM_TOL`] are
    /// normalized and the result carries [`Self::was_renormalized`].
    pub fn from_pure(basis: Arc<DeterminantBasis>, coeffs: &[Complex64]) -> Result<Self> {
        let k = basis.len();
        if coeffs.len() != k {
            return Err(Error::CoefficientShape {
                rows: coeffs.len(),
                cols: 1,
                k,
            });
        }
        let norm_sq: f64 = coeffs.iter().map(|c| c.norm_sqr()).sum();
        if norm_sq == 0.0 {
            return Err(Error::ZeroStateVector);
        }
        let renormalized = (norm_sq - 1.0).abs() > PURE_NORM_TOL;
        let scale = 1.0 / norm_sq;
        let a = DMatrix::from_fn(k, k, |n, m| coeffs[n] * coeffs[m].conj() * scale);
        Ok(Self {
            basis,
            a,
            renormalized,
        })
    }

    /// Weighted ensemble average of density matrices over one shared basis.
    pub fn ensemble_average(members: &[(f64, &ManyBodyDensityMatrix)]) -> Result<Self> {
        let (_, first) = members.first().ok_or(Error::EmptyEnsemble)?;
        let sum: f64 = members.iter().map(|(w, _)| w).sum();
        if members.iter().any(|(w, _)| *w < 0.0) || (sum - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::BadEnsembleWeights { sum });
        }
        let k = first.basis.len();
        let mut a = DMatrix::zeros(k, k);
        for (i, (w, rho)) in members.iter().enumerate() {
            if !Arc::ptr_eq(&rho.basis, &first.basis) && rho.basis != first.basis {
                return Err(Error::BasisMismatch { index: i });
            }
            a += rho.a.scale(*w);
        }
        Ok(Self {
            basis: Arc::clone(&first.basis),
            a,
            renormalized: false,
        })
    }

    pub fn basis(&self) -> &DeterminantBasis {
        &self.basis
    }

    pub fn basis_arc(&self) -> Arc<DeterminantBasis> {
        Arc::clone(&self.basis)
    }

    pub fn coefficients(&self) -> &DMatrix<Complex64> {
        &self.a
    }

    /// Whether `from_pure` had to rescale its input.
    pub fn was_renormalized(&self) -> bool {
        self.renormalized
    }

    /// Determinant populations `a_nn`.
    pub fn populations(&self) -> Vec<f64> {
        (0..self.basis.len()).map(|n| self.a[(n, n)].re).collect()
    }

    /// Full purity `Tr[a^2] = sum_{nm} |a_nm|^2`.
    pub fn purity(&self) -> f64 {
        self.a.iter().map(|c| c.norm_sqr()).sum()
    }

    /// Eigenvalues of the coefficient matrix, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let eig = nalgebra::SymmetricEigen::new(self.a.clone());
        let mut v: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        v.sort_by(|x, y| x.total_cmp(y));
        v
    }

    /// Checks positive semidefiniteness down to `-`[`PSD_TOL`].
    pub fn check_positive_semidefinite(&self) -> Result<()> {
        let min_eig = self
            .eigenvalues()
            .first()
            .copied()
            .unwrap_or(0.0);
        if min_eig < -PSD_TOL {
            return Err(Error::NotPositiveSemidefinite { min_eig });
        }
        Ok(())
    }

    /// Applies a permutation of the basis labels: determinant `i` of the
    /// result is determinant `perm[i]` of the input.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let k = self.basis.len();
        assert_eq!(perm.len(), k, "permutation length must match basis size");
        let dets = perm.iter().map(|&i| *self.basis.det(i)).collect();
        let basis = Arc::new(DeterminantBasis::new(dets)?);
        let a = DMatrix::from_fn(k, k, |n, m| self.a[(perm[n], perm[m])]);
        Ok(Self {
            basis,
            a,
            renormalized: self.renormalized,
        })
    }
}

/// Convenience wrapper building a pure state from real amplitudes.
pub fn pure_state_from_re(basis: Arc<DeterminantBasis>, coeffs: &[f64]) -> Result<ManyBodyDensityMatrix> {
    let c: Vec<Complex64> = coeffs.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    ManyBodyDensityMatrix::from_pure(basis, &c)
}

/// Eigenvalue vector as an nalgebra type, occasionally handy in diagnostics.
pub fn eigenvalue_vector(rho: &ManyBodyDensityMatrix) -> DVector<f64> {
    DVector::from_vec(rho.eigenvalues())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::enumerate_determinants;

    fn basis(m: usize, orbs: &[&[usize]]) -> Arc<DeterminantBasis> {
        let dets = orbs
            .iter()
            .map(|o| SlaterDeterminant::from_orbitals(m, o).unwrap())
            .collect();
        Arc::new(DeterminantBasis::new(dets).unwrap())
    }

    #[test]
    fn from_pure_examples() {
        let b = basis(4, &[&[0, 1], &[0, 2]]);
        let rho = pure_state_from_re(Arc::clone(&b), &[1.0, 0.0]).unwrap();
        assert_eq!(rho.coefficients()[(0, 0)], Complex64::new(1.0, 0.0));
        assert_eq!(rho.coefficients()[(1, 1)], Complex64::new(0.0, 0.0));
        assert!(!rho.was_renormalized());

        let s = std::f64::consts::FRAC_1_SQRT_2;
        let rho = pure_state_from_re(Arc::clone(&b), &[s, s]).unwrap();
        for n in 0..2 {
            for m in 0..2 {
                assert!((rho.coefficients()[(n, m)].re - 0.5).abs() < 1e-15);
            }
        }
        assert!((rho.purity() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn from_pure_flags_renormalization_and_rejects_zero() {
        let b = basis(4, &[&[0, 1], &[0, 2]]);
        let rho = pure_state_from_re(Arc::clone(&b), &[2.0, 0.0]).unwrap();
        assert!(rho.was_renormalized());
        assert!((rho.purity() - 1.0).abs() < 1e-14);
        assert!(matches!(
            pure_state_from_re(b, &[0.0, 0.0]),
            Err(Error::ZeroStateVector)
        ));
    }

    #[test]
    fn ensemble_average_examples() {
        let b = basis(4, &[&[0, 1], &[0, 2]]);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let p0 = pure_state_from_re(Arc::clone(&b), &[1.0, 0.0]).unwrap();
        let p1 = pure_state_from_re(Arc::clone(&b), &[0.0, 1.0]).unwrap();

        let id = ManyBodyDensityMatrix::ensemble_average(&[(1.0, &p0)]).unwrap();
        assert_eq!(id.coefficients(), p0.coefficients());

        let mixed = ManyBodyDensityMatrix::ensemble_average(&[(0.5, &p0), (0.5, &p1)]).unwrap();
        assert!((mixed.purity() - 0.5).abs() < 1e-14);
        assert!((mixed.coefficients()[(0, 1)]).norm() < 1e-15);

        // Opposite relative phases cancel the off-diagonals.
        let plus = pure_state_from_re(Arc::clone(&b), &[s, s]).unwrap();
        let minus = pure_state_from_re(Arc::clone(&b), &[s, -s]).unwrap();
        let avg = ManyBodyDensityMatrix::ensemble_average(&[(0.5, &plus), (0.5, &minus)]).unwrap();
        assert!((avg.coefficients()[(0, 1)]).norm() < 1e-15);
        assert!((avg.coefficients()[(0, 0)].re - 0.5).abs() < 1e-15);
        assert!((avg.purity() - 0.5).abs() < 1e-14);
    }

    #[test]
    fn ensemble_average_rejects_bad_input() {
        let b = basis(4, &[&[0, 1], &[0, 2]]);
        let other = basis(4, &[&[0, 1], &[1, 2]]);
        let p0 = pure_state_from_re(Arc::clone(&b), &[1.0, 0.0]).unwrap();
        let q = pure_state_from_re(other, &[1.0, 0.0]).unwrap();
        assert!(ManyBodyDensityMatrix::ensemble_average(&[(0.7, &p0), (0.5, &p0)]).is_err());
        assert!(ManyBodyDensityMatrix::ensemble_average(&[(0.5, &p0), (0.5, &q)]).is_err());
        assert!(ManyBodyDensityMatrix::ensemble_average(&[]).is_err());
    }

    #[test]
    fn purity_of_uniform_diagonal_is_one_over_k() {
        let dets = enumerate_determinants(6, 2).unwrap();
        let k = dets.len();
        let b = Arc::new(DeterminantBasis::new(dets).unwrap());
        let a = DMatrix::from_fn(k, k, |n, m| {
            if n == m {
                Complex64::new(1.0 / k as f64, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        let rho = ManyBodyDensityMatrix::new(b, a).unwrap();
        assert!((rho.purity() - 1.0 / k as f64).abs() < 1e-14);
        rho.check_positive_semidefinite().unwrap();
    }

    #[test]
    fn purity_matches_eigenvalue_sum_and_survives_permutation() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let rho = crate::random::random_mixed_state(&mut rng, 6, 2, 3);
            let p = rho.purity();
            let from_eigs: f64 = rho.eigenvalues().iter().map(|l| l * l).sum();
            assert!((p - from_eigs).abs() < 1e-10);

            let k = rho.basis().len();
            let perm: Vec<usize> = (0..k).rev().collect();
            let shuffled = rho.permuted(&perm).unwrap();
            assert!((shuffled.purity() - p).abs() < 1e-12);
        }
    }

    #[test]
    fn constructor_rejects_invalid_matrices() {
        let b = basis(4, &[&[0, 1], &[0, 2]]);
        let mut a = DMatrix::from_element(2, 2, Complex64::new(0.0, 0.0));
        a[(0, 0)] = Complex64::new(1.0, 0.0);
        a[(0, 1)] = Complex64::new(0.3, 0.0);
        a[(1, 0)] = Complex64::new(0.1, 0.0);
        assert!(matches!(
            ManyBodyDensityMatrix::new(Arc::clone(&b), a),
            Err(Error::NotHermitian { .. })
        ));

        let a = DMatrix::from_diagonal(&DVector::from_vec(vec![
            Complex64::new(0.7, 0.0),
            Complex64::new(0.7, 0.0),
        ]));
        assert!(matches!(
            ManyBodyDensityMatrix::new(b, a),
            Err(Error::TraceNotOne { .. })
        ));
    }

    #[test]
    fn basis_rejects_duplicates_and_mixed_sectors() {
        let d0 = SlaterDeterminant::from_orbitals(4, &[0, 1]).unwrap();
        let d1 = SlaterDeterminant::from_orbitals(4, &[0]).unwrap();
        assert!(DeterminantBasis::new(vec![d0, d0]).is_err());
        assert!(DeterminantBasis::new(vec![d0, d1]).is_err());
        assert!(DeterminantBasis::new(vec![]).is_err());
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;
        use rand::SeedableRng;

        proptest! {
            // Purity is convex: averaging can never beat the purest member.
            #[test]
            fn ensemble_purity_below_max_member(seed in any::<u64>(), n_members in 1usize..5) {
                let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
                let basis = crate::random::full_basis(5, 2);
                let mut weights: Vec<f64> = (0..n_members)
                    .map(|i| 1.0 + (i as f64) + (seed % 7) as f64 / 7.0)
                    .collect();
                let total: f64 = weights.iter().sum();
                for w in &mut weights {
                    *w /= total;
                }
                let members: Vec<ManyBodyDensityMatrix> = (0..n_members)
                    .map(|_| crate::random::random_mixed_state_on(&mut rng, &basis, 2))
                    .collect();
                let pairs: Vec<(f64, &ManyBodyDensityMatrix)> =
                    weights.iter().copied().zip(members.iter()).collect();
                let avg = ManyBodyDensityMatrix::ensemble_average(&pairs).unwrap();
                let max_member = members.iter().map(|r| r.purity()).fold(0.0, f64::max);
                prop_assert!(avg.purity() <= max_member + 1e-12);
                avg.check_positive_semidefinite().unwrap();
            }

            // Relabeling the basis is a similarity transform of the matrix.
            #[test]
            fn purity_invariant_under_permutation(seed in any::<u64>()) {
                let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
                let rho = crate::random::random_mixed_state(&mut rng, 5, 2, 2);
                let k = rho.basis().len();
                let mut perm: Vec<usize> = (0..k).collect();
                // Seed-driven Fisher-Yates.
                let mut state = seed | 1;
                for i in (1..k).rev() {
                    state = state.wrapping_mul(6364136223846793005).wrapping_add(1);
                    let j = (state >> 33) as usize % (i + 1);
                    perm.swap(i, j);
                }
                let shuffled = rho.permuted(&perm).unwrap();
                prop_assert!((shuffled.purity() - rho.purity()).abs() < 1e-12);
            }
        }
    }
}
