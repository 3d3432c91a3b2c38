//! Ground-state Wigner sampling of the lattice around the optimized
//! geometry.

use nalgebra::DMatrix;
use rand::Rng;

use crate::error::{Result, SshError};
use crate::model::{free_sites, hessian};
use crate::params::{SshParams, HBAR_EV_FS};

/// Harmonic normal modes of the free lattice coordinates.
#[derive(Clone, Debug)]
pub struct NormalModes {
    /// Angular frequencies (rad/fs), ascending.
    pub frequencies: Vec<f64>,
    /// Columns are mode vectors over all sites (zero at clamped sites),
    /// orthonormal over the free coordinates.
    pub site_vectors: DMatrix<f64>,
}

/// Diagonalizes the finite-difference Hessian at `u_star`. With a uniform
/// mass the Hessian eigenvectors are the normal modes and
/// `omega = sqrt(lambda / mass)`.
pub fn normal_modes(params: &SshParams, u_star: &[f64]) -> Result<NormalModes> {
    let free = free_sites(params);
    let hess = hessian(params, u_star);
    let eig = nalgebra::SymmetricEigen::new(hess);
    let n = free.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let mut frequencies = Vec::with_capacity(n);
    let mut site_vectors = DMatrix::zeros(params.n_sites, n);
    for (col, &i) in order.iter().enumerate() {
        let lambda = eig.eigenvalues[i] / params.mass;
        if lambda <= 0.0 {
            return Err(SshError::ImaginaryFrequency {
                mode: col,
                lambda,
            });
        }
        frequencies.push(lambda.sqrt());
        for (row, &site) in free.iter().enumerate() {
            site_vectors[(site, col)] = eig.eigenvectors[(row, i)];
        }
    }
    Ok(NormalModes {
        frequencies,
        site_vectors,
    })
}

fn standard_normal<R: Rng>(rng: &mut R) -> f64 {
    let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// Draws initial displacements and momenta from the ground-state Wigner
/// function: independent Gaussians per mode with
/// `sigma_q^2 = hbar/(2 m w)` and `sigma_p^2 = hbar m w / 2`, mapped back
/// to site coordinates around `u_star`. Clamped sites stay pinned.
pub fn wigner_sample<R: Rng>(
    params: &SshParams,
    modes: &NormalModes,
    u_star: &[f64],
    rng: &mut R,
) -> (Vec<f64>, Vec<f64>) {
    let l = params.n_sites;
    let mut u = u_star.to_vec();
    let mut p = vec![0.0; l];
    for (k, &w) in modes.frequencies.iter().enumerate() {
        let sigma_q = (HBAR_EV_FS / (2.0 * params.mass * w)).sqrt();
        let sigma_p = (HBAR_EV_FS * params.mass * w / 2.0).sqrt();
        let q = sigma_q * standard_normal(rng);
        let pk = sigma_p * standard_normal(rng);
        for site in 0..l {
            u[site] += modes.site_vectors[(site, k)] * q;
            p[site] += modes.site_vectors[(site, k)] * pk;
        }
    }
    (u, p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::optimize_geometry;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn setup() -> (SshParams, Vec<f64>, NormalModes) {
        let params = SshParams::default();
        let geom = optimize_geometry(&params).unwrap();
        let modes = normal_modes(&params, &geom.u_star).unwrap();
        (params, geom.u_star, modes)
    }

    #[test]
    fn clamped_chain_has_interior_mode_count() {
        let (_, _, modes) = setup();
        assert_eq!(modes.frequencies.len(), 2);
        assert!(modes.frequencies[0] > 0.0);
        assert!(modes.frequencies[1] > modes.frequencies[0]);
    }

    #[test]
    fn sampling_is_reproducible_for_a_fixed_seed() {
        let (params, u_star, modes) = setup();
        let mut a = ChaCha8Rng::seed_from_u64(42);
        let mut b = ChaCha8Rng::seed_from_u64(42);
        let (u1, p1) = wigner_sample(&params, &modes, &u_star, &mut a);
        let (u2, p2) = wigner_sample(&params, &modes, &u_star, &mut b);
        assert_eq!(u1, u2);
        assert_eq!(p1, p2);
        assert_eq!(u1[0], u_star[0]);
        assert_eq!(p1[3], 0.0);
    }

    #[test]
    fn ensemble_statistics_match_the_ground_state_wigner_function() {
        let (params, u_star, modes) = setup();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 10_000;
        let n_modes = modes.frequencies.len();
        let mut mean_u = vec![0.0; params.n_sites];
        let mut mode_energy = vec![0.0; n_modes];
        for _ in 0..n {
            let (u, p) = wigner_sample(&params, &modes, &u_star, &mut rng);
            for site in 0..params.n_sites {
                mean_u[site] += (u[site] - u_star[site]) / n as f64;
            }
            // Project back onto modes to accumulate per-mode energies.
            for k in 0..n_modes {
                let mut q = 0.0;
                let mut pk = 0.0;
                for site in 0..params.n_sites {
                    q += modes.site_vectors[(site, k)] * (u[site] - u_star[site]);
                    pk += modes.site_vectors[(site, k)] * p[site];
                }
                let w = modes.frequencies[k];
                mode_energy[k] +=
                    (pk * pk / (2.0 * params.mass) + 0.5 * params.mass * w * w * q * q) / n as f64;
            }
        }
        for site in 0..params.n_sites {
            assert!(mean_u[site].abs() < 5e-4, "mean displacement at {site}");
        }
        for (k, &e) in mode_energy.iter().enumerate() {
            let expect = HBAR_EV_FS * modes.frequencies[k] / 2.0;
            assert!(
                (e - expect).abs() < 0.05 * expect,
                "mode {k}: {e} vs hbar w/2 = {expect}"
            );
        }
    }
}
