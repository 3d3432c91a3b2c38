//! Mean-field mixed quantum-classical propagation: exact electronic
//! evolution over the determinant sector, velocity-Verlet nuclei with
//! Hellmann-Feynman forces, midpoint field and geometry.

use num_complex::Complex64;

use crate::error::{Result, SshError};
use crate::manybody::{SectorBasis, SectorPropagator};
use crate::params::{LaserPulse, SshParams, HBAR_EV_FS};

/// Per-step budget on the electronic norm change.
pub const NORM_DRIFT_TOL: f64 = 1e-10;
/// Largest allowed time step (fs).
pub const MAX_DT: f64 = 1e-2;

/// One Ehrenfest trajectory: classical lattice plus the many-body
/// electronic coefficient vector over the site determinant basis.
#[derive(Clone, Debug)]
pub struct TrajectoryState {
    /// Site displacements (A).
    pub u: Vec<f64>,
    /// Site momenta (eV fs/A).
    pub p: Vec<f64>,
    /// Electronic coefficients over the sector basis.
    pub psi: Vec<Complex64>,
    /// Time (fs).
    pub t: f64,
}

/// Integrator with preallocated scratch; one instance per trajectory.
pub struct EhrenfestIntegrator<'a> {
    params: &'a SshParams,
    sector: &'a SectorBasis,
    pulse: Option<&'a LaserPulse>,
    prop: SectorPropagator,
    bonds: Vec<f64>,
    dens: Vec<f64>,
    diag: Vec<f64>,
    hop: Vec<f64>,
    u_mid: Vec<f64>,
    force: Vec<f64>,
    force_fresh: bool,
    /// Largest |norm - 1| seen so far.
    pub max_norm_dev: f64,
}

impl<'a> EhrenfestIntegrator<'a> {
    /// `pulse` must carry a resolved photon energy.
    pub fn new(
        params: &'a SshParams,
        sector: &'a SectorBasis,
        pulse: Option<&'a LaserPulse>,
    ) -> Self {
        let l = params.n_sites;
        Self {
            params,
            sector,
            pulse,
            prop: SectorPropagator::new(sector),
            bonds: vec![0.0; l - 1],
            dens: vec![0.0; l],
            diag: vec![0.0; l],
            hop: vec![0.0; l - 1],
            u_mid: vec![0.0; l],
            force: vec![0.0; l],
            force_fresh: false,
            max_norm_dev: 0.0,
        }
    }

    fn field_at(&self, t: f64) -> f64 {
        self.pulse.map(|p| p.amplitude(t)).unwrap_or(0.0)
    }

    /// Mean-field force into `self.force`: lattice springs, the
    /// bond-order pull of the electrons, and the field force on the
    /// electronic charge; clamped ends pinned.
    fn compute_forces(&mut self, u: &[f64], psi: &[Complex64], t: f64) {
        let p = self.params;
        let l = p.n_sites;
        self.sector.bond_orders(psi, &mut self.bonds);
        self.force.fill(0.0);
        for k in 0..l - 1 {
            let d = u[k + 1] - u[k];
            let spring = p.k_spring * d;
            // d<H_hop>/du_{k+1} = alpha * bond, so the force is its negative.
            let electronic = p.alpha * self.bonds[k];
            self.force[k + 1] += -spring - electronic;
            self.force[k] += spring + electronic;
        }
        if self.pulse.is_some() {
            let e_field = self.field_at(t);
            if e_field != 0.0 {
                self.sector.site_densities(psi, &mut self.dens);
                for site in 0..l {
                    self.force[site] += e_field * self.dens[site];
                }
            }
        }
        if p.clamped {
            self.force[0] = 0.0;
            self.force[l - 1] = 0.0;
        }
    }

    /// One velocity-Verlet step with the electronic propagation evaluated
    /// at the midpoint geometry and field. Errors if the time step exceeds
    /// [`MAX_DT`] or the electronic norm moves by more than
    /// [`NORM_DRIFT_TOL`] in one step.
    pub fn step(&mut self, state: &mut TrajectoryState, dt: f64) -> Result<()> {
        if !(dt > 0.0) || dt > MAX_DT {
            return Err(SshError::InvalidParams(format!(
                "dt = {dt} fs outside (0, {MAX_DT}]"
            )));
        }
        let p = self.params;
        let l = p.n_sites;
        if !self.force_fresh {
            self.compute_forces(&state.u, &state.psi, state.t);
        }
        let half = 0.5 * dt;
        for site in 0..l {
            state.p[site] += self.force[site] * half;
        }
        for site in 0..l {
            let v = state.p[site] / p.mass;
            self.u_mid[site] = state.u[site] + v * half;
            state.u[site] += v * dt;
        }
        if p.clamped {
            for site in [0, l - 1] {
                state.p[site] = 0.0;
                state.u[site] = 0.0;
                self.u_mid[site] = 0.0;
            }
        }

        let e_mid = self.field_at(state.t + half);
        for k in 0..l - 1 {
            self.hop[k] = -(p.t0 - p.alpha * (self.u_mid[k + 1] - self.u_mid[k]));
        }
        if e_mid != 0.0 {
            for site in 0..l {
                self.diag[site] = -e_mid * p.site_position(site, &self.u_mid);
            }
        } else {
            self.diag.fill(0.0);
        }
        let norm_before: f64 = state.psi.iter().map(|z| z.norm_sqr()).sum();
        self.prop.load_h(&self.diag, &self.hop);
        self.prop.apply(self.sector, dt / HBAR_EV_FS, &mut state.psi);
        let norm_after: f64 = state.psi.iter().map(|z| z.norm_sqr()).sum();
        let drift = (norm_after - norm_before).abs();
        if drift > NORM_DRIFT_TOL {
            return Err(SshError::NormDrift {
                drift,
                t: state.t,
                dt,
            });
        }
        self.max_norm_dev = self.max_norm_dev.max((norm_after - 1.0).abs());

        state.t += dt;
        self.compute_forces(&state.u, &state.psi, state.t);
        self.force_fresh = true;
        for site in 0..l {
            state.p[site] += self.force[site] * half;
        }
        if p.clamped {
            state.p[0] = 0.0;
            state.p[l - 1] = 0.0;
        }
        Ok(())
    }

    /// Invalidate the cached end-of-step force after mutating the state
    /// externally.
    pub fn reset_cache(&mut self) {
        self.force_fresh = false;
    }

    /// Field-free total energy: electronic hopping expectation, kinetic and
    /// lattice terms.
    pub fn total_energy(&mut self, state: &TrajectoryState) -> f64 {
        let p = self.params;
        let l = p.n_sites;
        self.sector.bond_orders(&state.psi, &mut self.bonds);
        let mut e = 0.0;
        for k in 0..l - 1 {
            let t_k = -(p.t0 - p.alpha * (state.u[k + 1] - state.u[k]));
            e += t_k * self.bonds[k];
            let d = state.u[k + 1] - state.u[k];
            e += 0.5 * p.k_spring * d * d;
        }
        e += state.p.iter().map(|pk| pk * pk / (2.0 * p.mass)).sum::<f64>();
        e
    }

    /// Electronic dipole `sum_n x_n <n_hat_n>` (e A), positions measured
    /// from the chain center.
    pub fn dipole(&mut self, state: &TrajectoryState) -> f64 {
        self.sector.site_densities(&state.psi, &mut self.dens);
        (0..self.params.n_sites)
            .map(|site| self.params.site_position(site, &state.u) * self.dens[site])
            .sum()
    }
}

/// Stateless single-step form: primes the force cache, steps once.
pub fn ehrenfest_step(
    params: &SshParams,
    sector: &SectorBasis,
    pulse: Option<&LaserPulse>,
    state: &mut TrajectoryState,
    dt: f64,
) -> Result<()> {
    let mut integrator = EhrenfestIntegrator::new(params, sector, pulse);
    integrator.step(state, dt)
}
