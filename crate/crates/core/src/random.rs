//! Seeded generators for random states and unitaries, shared by the
//! validation suites and the test oracles.

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;

use crate::density::{DeterminantBasis, ManyBodyDensityMatrix};
use crate::fock::{coherence_order, enumerate_determinants};

fn standard_normal<R: Rng>(rng: &mut R) -> f64 {
    // Box-Muller keeps us independent of distribution-crate version details.
    let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// The full determinant basis of the (M, N) sector.
pub fn full_basis(m: usize, n_particles: usize) -> Arc<DeterminantBasis> {
    let dets = enumerate_determinants(m, n_particles).expect("valid sector");
    Arc::new(DeterminantBasis::new(dets).expect("non-empty sector"))
}

/// Random normalized complex amplitudes over `k` determinants.
pub fn random_amplitudes<R: Rng>(rng: &mut R, k: usize) -> Vec<Complex64> {
    let mut c: Vec<Complex64> = (0..k)
        .map(|_| Complex64::new(standard_normal(rng), standard_normal(rng)))
        .collect();
    let norm: f64 = c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    for z in &mut c {
        *z /= norm;
    }
    c
}

/// A random mixed state: a weighted average of `n_pure` random pure states
/// over the full (M, N) sector. Positive semidefinite by construction.
pub fn random_mixed_state<R: Rng>(
    rng: &mut R,
    m: usize,
    n_particles: usize,
    n_pure: usize,
) -> ManyBodyDensityMatrix {
    let basis = full_basis(m, n_particles);
    random_mixed_state_on(rng, &basis, n_pure)
}

/// As [`random_mixed_state`] but over a caller-supplied basis.
pub fn random_mixed_state_on<R: Rng>(
    rng: &mut R,
    basis: &Arc<DeterminantBasis>,
    n_pure: usize,
) -> ManyBodyDensityMatrix {
    let k = basis.len();
    let mut weights: Vec<f64> = (0..n_pure).map(|_| rng.gen_range(0.05..1.0)).collect();
    let total: f64 = weights.iter().sum();
    for w in &mut weights {
        *w /= total;
    }
    let pures: Vec<ManyBodyDensityMatrix> = (0..n_pure)
        .map(|_| {
            let c = random_amplitudes(rng, k);
            ManyBodyDensityMatrix::from_pure(Arc::clone(basis), &c).expect("normalized input")
        })
        .collect();
    let members: Vec<(f64, &ManyBodyDensityMatrix)> =
        weights.iter().copied().zip(pures.iter()).collect();
    ManyBodyDensityMatrix::ensemble_average(&members).expect("weights normalized")
}

/// A random Hermitian unit-trace coefficient matrix whose off-diagonal
/// support is restricted to pairs with coherence order `<= max_order`
/// (no restriction when `max_order` is `None`). Not necessarily positive
/// semidefinite; suitable for exercising linear/bilinear identities.
pub fn random_hermitian_state<R: Rng>(
    rng: &mut R,
    basis: &Arc<DeterminantBasis>,
    max_order: Option<usize>,
) -> ManyBodyDensityMatrix {
    let k = basis.len();
    let mut a = DMatrix::from_element(k, k, Complex64::new(0.0, 0.0));
    let mut diag: Vec<f64> = (0..k).map(|_| rng.gen_range(0.0..1.0)).collect();
    let total: f64 = diag.iter().sum();
    for d in &mut diag {
        *d /= total;
    }
    for (n, d) in diag.iter().enumerate() {
        a[(n, n)] = Complex64::new(*d, 0.0);
    }
    let scale = 0.5 / k as f64;
    for n in 0..k {
        for m in (n + 1)..k {
            if let Some(cap) = max_order {
                let s = coherence_order(basis.det(n), basis.det(m)).unwrap();
                if s > cap {
                    continue;
                }
            }
            let z = Complex64::new(standard_normal(rng), standard_normal(rng)) * scale;
            a[(n, m)] = z;
            a[(m, n)] = z.conj();
        }
    }
    ManyBodyDensityMatrix::new(Arc::clone(basis), a).expect("hermitian unit-trace by construction")
}

/// A Haar-ish random unitary from the QR factorization of a complex
/// Gaussian matrix.
pub fn random_unitary<R: Rng>(rng: &mut R, dim: usize) -> DMatrix<Complex64> {
    let g = DMatrix::from_fn(dim, dim, |_, _| {
        Complex64::new(standard_normal(rng), standard_normal(rng))
    });
    let qr = g.qr();
    qr.q()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn mixed_states_are_valid_density_matrices() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..10 {
            let rho = random_mixed_state(&mut rng, 6, 3, 4);
            rho.check_positive_semidefinite().unwrap();
            assert!(rho.purity() <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn masked_states_have_no_high_order_support() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let basis = full_basis(8, 4);
        let rho = random_hermitian_state(&mut rng, &basis, Some(2));
        for n in 0..basis.len() {
            for m in 0..basis.len() {
                if coherence_order(basis.det(n), basis.det(m)).unwrap() > 2 {
                    assert_eq!(rho.coefficients()[(n, m)], Complex64::new(0.0, 0.0));
                }
            }
        }
    }

    #[test]
    fn random_unitaries_are_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let u = random_unitary(&mut rng, 6);
        let id = &u * u.adjoint();
        for i in 0..6 {
            for j in 0..6 {
                let target = if i == j { 1.0 } else { 0.0 };
                assert!((id[(i, j)] - Complex64::new(target, 0.0)).norm() < 1e-12);
            }
        }
    }
}
