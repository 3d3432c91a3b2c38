//! Model parameters and the driving pulse.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SshError};

/// hbar in eV fs.
pub const HBAR_EV_FS: f64 = 0.658_211_956_9;

/// Tight-binding chain with electron-vibration coupling and a harmonic
/// lattice. The defaults are the standard trans-polyacetylene set; every
/// value can be overridden through the experiment config.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SshParams {
    pub n_sites: usize,
    pub n_electrons: usize,
    /// Hopping energy at zero displacement (eV).
    pub t0: f64,
    /// Electron-phonon coupling (eV/A).
    pub alpha: f64,
    /// Lattice stiffness (eV/A^2).
    pub k_spring: f64,
    /// Nuclear mass (eV fs^2/A^2); the default is the carbon+H monomer mass.
    pub mass: f64,
    /// Site spacing (A).
    pub lattice_const: f64,
    /// Pin the end sites: u = p = 0 there.
    pub clamped: bool,
}

impl Default for SshParams {
    fn default() -> Self {
        Self {
            n_sites: 4,
            n_electrons: 4,
            t0: 2.5,
            alpha: 4.1,
            k_spring: 21.0,
            mass: 1349.14,
            lattice_const: 1.22,
            clamped: true,
        }
    }
}

impl SshParams {
    pub fn validate(&self) -> Result<()> {
        if self.n_sites < 2 {
            return Err(SshError::InvalidParams("n_sites must be at least 2".into()));
        }
        if self.n_electrons == 0 || self.n_electrons % 2 != 0 {
            return Err(SshError::InvalidParams(
                "n_electrons must be positive and even (the dynamics stays in the S_z = 0 sector)"
                    .into(),
            ));
        }
        if self.n_electrons > 2 * self.n_sites {
            return Err(SshError::InvalidParams(format!(
                "{} electrons do not fit in {} sites",
                self.n_electrons, self.n_sites
            )));
        }
        for (name, v) in [
            ("t0", self.t0),
            ("alpha", self.alpha),
            ("k_spring", self.k_spring),
            ("mass", self.mass),
            ("lattice_const", self.lattice_const),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(SshError::InvalidParams(format!("{name} must be positive")));
            }
        }
        Ok(())
    }

    /// Spatial orbitals occupied in the electronic ground state (per spin).
    pub fn n_occupied(&self) -> usize {
        self.n_electrons / 2
    }

    /// Site position measured from the chain center (A), displaced.
    pub fn site_position(&self, site: usize, u: &[f64]) -> f64 {
        (site as f64 - (self.n_sites as f64 - 1.0) / 2.0) * self.lattice_const + u[site]
    }
}

/// Gaussian-enveloped continuous-wave pulse
/// `E(t) = E0 exp(-((t - 5 t_w)/t_w)^2) cos(w t)`.
///
/// When `photon_ev` is absent the photon energy is resolved to the computed
/// HOMO-LUMO gap of the optimized chain before the run starts.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LaserPulse {
    /// Field amplitude (V/A).
    pub e0: f64,
    /// Envelope width (fs); the envelope peaks at `5 t_w`.
    pub t_w: f64,
    /// Photon energy (eV).
    #[serde(default)]
    pub photon_ev: Option<f64>,
}

impl Default for LaserPulse {
    fn default() -> Self {
        Self {
            e0: 1.0,
            t_w: 10.0,
            photon_ev: None,
        }
    }
}

impl LaserPulse {
    pub fn validate(&self) -> Result<()> {
        if self.e0 < 0.0 || !self.e0.is_finite() {
            return Err(SshError::InvalidParams("pulse amplitude must be >= 0".into()));
        }
        if !(self.t_w > 0.0) {
            return Err(SshError::InvalidParams("pulse width must be positive".into()));
        }
        if let Some(ev) = self.photon_ev {
            if !(ev > 0.0) {
                return Err(SshError::InvalidParams("photon energy must be positive".into()));
            }
        }
        Ok(())
    }

    /// Fills an unset photon energy with `gap_ev`.
    pub fn resolved(&self, gap_ev: f64) -> Self {
        Self {
            photon_ev: Some(self.photon_ev.unwrap_or(gap_ev)),
            ..self.clone()
        }
    }

    /// Angular frequency (rad/fs). Requires a resolved photon energy.
    pub fn omega(&self) -> f64 {
        self.photon_ev.expect("pulse photon energy not resolved") / HBAR_EV_FS
    }

    /// Instantaneous field (V/A).
    pub fn amplitude(&self, t: f64) -> f64 {
        let x = (t - 5.0 * self.t_w) / self.t_w;
        self.e0 * (-x * x).exp() * (self.omega() * t).cos()
    }
}

/// Free-function form of the pulse evaluation.
pub fn field_amplitude(pulse: &LaserPulse, t: f64) -> f64 {
    pulse.amplitude(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pulse() -> LaserPulse {
        LaserPulse {
            e0: 1.0,
            t_w: 10.0,
            photon_ev: Some(4.15),
        }
    }

    #[test]
    fn envelope_peak_value() {
        let p = pulse();
        let t = 5.0 * p.t_w;
        let expect = p.e0 * (p.omega() * t).cos();
        assert!((p.amplitude(t) - expect).abs() < 1e-14);
    }

    #[test]
    fn field_is_negligible_at_time_zero() {
        let p = pulse();
        assert!(p.amplitude(0.0).abs() <= p.e0 * (-25.0f64).exp());
    }

    #[test]
    fn envelope_maximum_sits_at_fifty_fs() {
        let p = pulse();
        let envelope = |t: f64| {
            let x: f64 = (t - 5.0 * p.t_w) / p.t_w;
            (-x * x).exp()
        };
        let mut best_t = 0.0;
        let mut best = 0.0;
        let mut t = 0.0;
        while t <= 100.0 {
            if envelope(t) > best {
                best = envelope(t);
                best_t = t;
            }
            t += 0.01;
        }
        assert!((best_t - 50.0).abs() < 0.02);
    }

    #[test]
    fn params_validation_catches_bad_input() {
        let mut p = SshParams::default();
        p.n_electrons = 3;
        assert!(p.validate().is_err());
        let mut p = SshParams::default();
        p.t0 = -1.0;
        assert!(p.validate().is_err());
        let mut p = SshParams::default();
        p.n_electrons = 10;
        assert!(p.validate().is_err());
        assert!(SshParams::default().validate().is_ok());
    }

    #[test]
    fn pulse_resolution_fills_gap() {
        let p = LaserPulse {
            e0: 1.0,
            t_w: 10.0,
            photon_ev: None,
        };
        let r = p.resolved(4.03);
        assert_eq!(r.photon_ev, Some(4.03));
        let q = pulse().resolved(99.0);
        assert_eq!(q.photon_ev, Some(4.15));
    }
}
