//! Trajectory ensembles: Wigner-sampled initial conditions, independent
//! Ehrenfest trajectories, and the per-sample decoherence reports in the
//! site and energy bases.

use std::sync::Arc;

use distill_core::purity::PurityReport;
use distill_core::ManyBodyDensityMatrix;
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ehrenfest::{EhrenfestIntegrator, TrajectoryState, MAX_DT};
use crate::error::{Result, SshError};
use crate::manybody::{determinant_transform, spin_orbital_unitary, SectorBasis};
use crate::model::{optimize_geometry, Geometry};
use crate::params::{LaserPulse, SshParams};
use crate::wigner::{normal_modes, wigner_sample};

/// Tolerance for the site/energy agreement of the reduced purities,
/// checked live at every sample time.
pub const BASIS_CONSISTENCY_TOL: f64 = 1e-10;

/// Electronic preparation at t = 0, always built on the molecular orbitals
/// of the optimized geometry.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialState {
    /// The ground determinant.
    Ground,
    /// `(|ground> + |HOMO -> LUMO, one spin>)/sqrt(2)`: an order-1 pair.
    SuperpositionOneBody,
    /// `(|ground> + |both HOMO electrons -> LUMO>)/sqrt(2)`: an order-2 pair.
    SuperpositionTwoBody,
}

/// A full ensemble specification.
#[derive(Clone, Debug)]
pub struct Experiment {
    pub params: SshParams,
    pub initial: InitialState,
    /// Which spin channel hosts the one-body promotion.
    pub excite_spin_up: bool,
    pub pulse: Option<LaserPulse>,
    pub n_traj: usize,
    pub seed: u64,
    /// Propagation span (fs).
    pub t_final: f64,
    /// Time step (fs), at most [`MAX_DT`].
    pub dt: f64,
    /// Sampling interval (fs), rounded to a whole number of steps.
    pub sample_every: f64,
    /// Draw initial nuclear conditions from the ground-state Wigner
    /// function; with `false` every trajectory starts at the optimum at
    /// rest.
    pub wigner: bool,
}

impl Experiment {
    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if let Some(p) = &self.pulse {
            p.validate()?;
        }
        if self.n_traj == 0 {
            return Err(SshError::InvalidExperiment("n_traj must be positive".into()));
        }
        if !(self.t_final > 0.0) {
            return Err(SshError::InvalidExperiment("t_final must be positive".into()));
        }
        if !(self.dt > 0.0) || self.dt > MAX_DT {
            return Err(SshError::InvalidExperiment(format!(
                "dt must lie in (0, {MAX_DT}] fs"
            )));
        }
        if self.sample_every < self.dt {
            return Err(SshError::InvalidExperiment(
                "sample_every must be at least dt".into(),
            ));
        }
        if self.params.n_occupied() >= self.params.n_sites
            && self.initial != InitialState::Ground
        {
            return Err(SshError::InvalidExperiment(
                "no empty orbital available for the promoted electron".into(),
            ));
        }
        Ok(())
    }
}

/// One sampled instant of the ensemble.
#[derive(Clone, Debug)]
pub struct SamplePoint {
    pub t: f64,
    /// Ensemble-averaged density matrix over the site determinant basis.
    pub rho_site: ManyBodyDensityMatrix,
    pub site: PurityReport,
    pub energy: PurityReport,
    /// Ensemble-mean electronic dipole (e A).
    pub dipole: f64,
    /// Driving field at this instant (V/A).
    pub field: f64,
    /// Ensemble-mean field-free total energy (eV).
    pub total_energy: f64,
}

pub struct EnsembleOutcome {
    pub samples: Vec<SamplePoint>,
    pub geometry: Geometry,
    pub homo_lumo_gap: f64,
    pub resolved_pulse: Option<LaserPulse>,
    /// Largest |norm - 1| over all trajectories and steps.
    pub max_norm_dev: f64,
}

struct TrajSeries {
    psis: Vec<Vec<Complex64>>,
    dipoles: Vec<f64>,
    energies: Vec<f64>,
    max_norm_dev: f64,
}

fn initial_mo_amplitudes(exp: &Experiment, sector: &SectorBasis) -> Result<Vec<(usize, f64)>> {
    let n_occ = exp.params.n_occupied();
    let ground_string = (1u32 << n_occ) - 1;
    let ground = sector
        .index_of(ground_string, ground_string)
        .expect("ground determinant in sector");
    let homo = n_occ - 1;
    let lumo = n_occ;
    let excited_string = (ground_string & !(1 << homo)) | (1 << lumo);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    Ok(match exp.initial {
        InitialState::Ground => vec![(ground, 1.0)],
        InitialState::SuperpositionOneBody => {
            let excited = if exp.excite_spin_up {
                sector.index_of(excited_string, ground_string)
            } else {
                sector.index_of(ground_string, excited_string)
            }
            .expect("singly excited determinant in sector");
            vec![(ground, s), (excited, s)]
        }
        InitialState::SuperpositionTwoBody => {
            let excited = sector
                .index_of(excited_string, excited_string)
                .expect("doubly excited determinant in sector");
            vec![(ground, s), (excited, s)]
        }
    })
}

fn run_trajectory(
    exp: &Experiment,
    sector: &SectorBasis,
    pulse: Option<&LaserPulse>,
    geometry: &Geometry,
    modes: Option<&crate::wigner::NormalModes>,
    psi0: &[Complex64],
    index: usize,
    n_steps: usize,
    stride: usize,
) -> Result<TrajSeries> {
    let mut rng = ChaCha8Rng::seed_from_u64(exp.seed.wrapping_add(index as u64));
    let (u0, p0) = match modes {
        Some(m) => wigner_sample(&exp.params, m, &geometry.u_star, &mut rng),
        None => (geometry.u_star.clone(), vec![0.0; exp.params.n_sites]),
    };
    let mut state = TrajectoryState {
        u: u0,
        p: p0,
        psi: psi0.to_vec(),
        t: 0.0,
    };
    let mut integ = EhrenfestIntegrator::new(&exp.params, sector, pulse);
    let n_samples = n_steps / stride + 1;
    let mut series = TrajSeries {
        psis: Vec::with_capacity(n_samples),
        dipoles: Vec::with_capacity(n_samples),
        energies: Vec::with_capacity(n_samples),
        max_norm_dev: 0.0,
    };
    for step in 0..=n_steps {
        if step % stride == 0 {
            series.psis.push(state.psi.clone());
            series.dipoles.push(integ.dipole(&state));
            series.energies.push(integ.total_energy(&state));
        }
        if step < n_steps {
            integ.step(&mut state, exp.dt)?;
        }
    }
    series.max_norm_dev = integ.max_norm_dev;
    Ok(series)
}

/// Runs the ensemble. Trajectories are independent and evaluated in
/// parallel; the ensemble average is reduced in fixed trajectory order, so
/// the outcome is deterministic for a given `(seed, n_traj)` regardless of
/// the thread count.
pub fn run_ensemble(exp: &Experiment) -> Result<EnsembleOutcome> {
    exp.validate()?;
    let params = &exp.params;
    let geometry = optimize_geometry(params)?;
    let gap = geometry.homo_lumo_gap(params);
    let resolved_pulse = exp.pulse.as_ref().map(|p| p.resolved(gap));
    let sector = SectorBasis::new(params.n_sites, params.n_electrons)?;
    let t_mat = determinant_transform(&geometry.mo_coefficients, &sector);
    let u_so = spin_orbital_unitary(&geometry.mo_coefficients);
    let modes = if exp.wigner {
        Some(normal_modes(params, &geometry.u_star)?)
    } else {
        None
    };

    let k = sector.len();
    let mut psi0 = vec![Complex64::new(0.0, 0.0); k];
    for (mo_index, amp) in initial_mo_amplitudes(exp, &sector)? {
        for n in 0..k {
            psi0[n] += Complex64::new(t_mat[(n, mo_index)] * amp, 0.0);
        }
    }

    let n_steps = (exp.t_final / exp.dt).round() as usize;
    let stride = ((exp.sample_every / exp.dt).round() as usize).max(1);
    let n_samples = n_steps / stride + 1;

    let series: Vec<Result<TrajSeries>> = (0..exp.n_traj)
        .into_par_iter()
        .map(|i| {
            run_trajectory(
                exp,
                &sector,
                resolved_pulse.as_ref(),
                &geometry,
                modes.as_ref(),
                &psi0,
                i,
                n_steps,
                stride,
            )
        })
        .collect();
    let mut trajectories = Vec::with_capacity(exp.n_traj);
    for s in series {
        trajectories.push(s?);
    }
    let max_norm_dev = trajectories
        .iter()
        .map(|t| t.max_norm_dev)
        .fold(0.0, f64::max);

    let weight = 1.0 / exp.n_traj as f64;
    let t_complex = t_mat.map(|x| Complex64::new(x, 0.0));
    let orders = sector.pairs.order_matrix().to_vec();
    let n_particles = params.n_electrons;
    let mut samples = Vec::with_capacity(n_samples);
    for s in 0..n_samples {
        let t = (s * stride) as f64 * exp.dt;
        let mut a = DMatrix::from_element(k, k, Complex64::new(0.0, 0.0));
        let mut dipole = 0.0;
        let mut total_energy = 0.0;
        for traj in &trajectories {
            let psi = &traj.psis[s];
            for n in 0..k {
                let wn = psi[n] * weight;
                for m in 0..k {
                    a[(n, m)] += wn * psi[m].conj();
                }
            }
            dipole += traj.dipoles[s] * weight;
            total_energy += traj.energies[s] * weight;
        }
        // Norm drift over a long run is tiny but nonzero; pin the trace.
        let trace: f64 = (0..k).map(|n| a[(n, n)].re).sum();
        a.scale_mut(1.0 / trace);
        let rho_site = ManyBodyDensityMatrix::new(Arc::clone(&sector.basis), a)?;

        let g_site = sector.pairs.one_rdm(&rho_site);
        let gamma_site = sector.pairs.two_rdm(&rho_site);
        let g_energy = g_site.rotate(&u_so)?;
        let gamma_energy = gamma_site.rotate(&u_so)?;

        // Populations in the energy determinant basis from rho_mo = Tᵀ rho T.
        let w = rho_site.coefficients() * &t_complex;
        let pops_energy: Vec<f64> = (0..k)
            .map(|i| {
                (0..k)
                    .map(|n| (t_complex[(n, i)].conj() * w[(n, i)]).re)
                    .sum()
            })
            .collect();

        let purity = rho_site.purity();
        let site = PurityReport::from_rdms(
            "site",
            purity,
            &g_site,
            &gamma_site,
            &rho_site.populations(),
            &orders,
            n_particles,
        )?;
        let energy = PurityReport::from_rdms(
            "energy",
            purity,
            &g_energy,
            &gamma_energy,
            &pops_energy,
            &orders,
            n_particles,
        )?;

        let dev = (site.p1 - energy.p1).abs().max((site.p2 - energy.p2).abs());
        if dev > BASIS_CONSISTENCY_TOL {
            return Err(SshError::BasisConsistency { t, dev });
        }

        let field = resolved_pulse.as_ref().map(|p| p.amplitude(t)).unwrap_or(0.0);
        samples.push(SamplePoint {
            t,
            rho_site,
            site,
            energy,
            dipole,
            field,
            total_energy,
        });
    }

    Ok(EnsembleOutcome {
        samples,
        geometry,
        homo_lumo_gap: gap,
        resolved_pulse,
        max_norm_dev,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny(initial: InitialState, n_traj: usize, wigner: bool) -> Experiment {
        Experiment {
            params: SshParams::default(),
            initial,
            excite_spin_up: true,
            pulse: None,
            n_traj,
            seed: 1234,
            t_final: 4.0,
            dt: 2e-3,
            sample_every: 1.0,
            wigner,
        }
    }

    #[test]
    fn single_trajectory_stays_pure_and_stationary_ground_has_no_coherence() {
        let exp = tiny(InitialState::Ground, 1, false);
        let out = run_ensemble(&exp).unwrap();
        for sp in &out.samples {
            assert!((sp.site.p - 1.0).abs() < 1e-9, "purity at t = {}", sp.t);
            assert!(sp.energy.dp1.abs() < 1e-9);
            assert!(sp.energy.dp2.abs() < 1e-9);
        }
    }

    #[test]
    fn one_body_superposition_starts_at_half_with_ratio_law() {
        let exp = tiny(InitialState::SuperpositionOneBody, 3, true);
        let out = run_ensemble(&exp).unwrap();
        for sp in &out.samples {
            sp.rho_site.check_positive_semidefinite().unwrap();
        }
        let first = &out.samples[0];
        assert!((first.energy.dp1 - 0.5).abs() < 1e-10);
        let n = exp.params.n_electrons as f64;
        assert!((first.energy.dp2 - (n - 1.0) * first.energy.dp1).abs() < 1e-10);
        // Initial purity is 1: trajectories share the electronic state.
        assert!((first.site.p - 1.0).abs() < 1e-10);
        // Tight bound equals the attained value at t = 0.
        assert!((first.energy.bounds.p1_max_tight - 0.5).abs() < 1e-10);
    }

    #[test]
    fn two_body_superposition_is_invisible_to_dp1() {
        let exp = tiny(InitialState::SuperpositionTwoBody, 2, true);
        let out = run_ensemble(&exp).unwrap();
        let first = &out.samples[0];
        assert!(first.energy.dp1.abs() < 1e-10);
        assert!((first.energy.dp2 - 0.5).abs() < 1e-10);
    }

    #[test]
    fn reruns_are_bitwise_deterministic() {
        let exp = tiny(InitialState::SuperpositionOneBody, 2, true);
        let a = run_ensemble(&exp).unwrap();
        let b = run_ensemble(&exp).unwrap();
        for (x, y) in a.samples.iter().zip(&b.samples) {
            assert_eq!(x.energy.dp1.to_bits(), y.energy.dp1.to_bits());
            assert_eq!(x.dipole.to_bits(), y.dipole.to_bits());
        }
        let exp2 = Experiment { seed: 99, ..exp };
        let c = run_ensemble(&exp2).unwrap();
        assert_ne!(
            a.samples[3].energy.dp1.to_bits(),
            c.samples[3].energy.dp1.to_bits()
        );
    }

    #[test]
    fn sample_grid_matches_request() {
        let exp = tiny(InitialState::Ground, 1, false);
        let out = run_ensemble(&exp).unwrap();
        assert_eq!(out.samples.len(), 5);
        assert!((out.samples[1].t - 1.0).abs() < 1e-12);
        assert!((out.samples[4].t - 4.0).abs() < 1e-12);
    }

    #[test]
    fn validation_rejects_broken_experiments() {
        let mut exp = tiny(InitialState::Ground, 1, false);
        exp.n_traj = 0;
        assert!(run_ensemble(&exp).is_err());
        let mut exp = tiny(InitialState::Ground, 1, false);
        exp.dt = 0.5;
        assert!(run_ensemble(&exp).is_err());
        let mut exp = tiny(InitialState::Ground, 1, false);
        exp.sample_every = 1e-4;
        assert!(run_ensemble(&exp).is_err());
    }
}
