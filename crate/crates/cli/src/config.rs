//! Experiment configuration files and their resolution to concrete runs.

use anyhow::{bail, Context};
use distill_ssh::{Experiment, InitialState, LaserPulse, SshParams};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    /// Superposition of the ground determinant and a HOMO -> LUMO single
    /// promotion, free evolution.
    Fig1a,
    /// Superposition of the ground determinant and the double HOMO -> LUMO
    /// promotion, free evolution.
    Fig1b,
    /// Ground vibronic state driven by a resonant pulse.
    Fig2,
    Custom,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Csv,
    Json,
}

/// Run controls; unset fields fall back to the per-kind defaults.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSettings {
    pub n_traj: Option<usize>,
    pub seed: Option<u64>,
    pub t_final: Option<f64>,
    pub dt: Option<f64>,
    pub sample_every: Option<f64>,
    pub wigner: Option<bool>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSettings {
    pub path: String,
    pub format: OutputFormat,
}

impl Default for OutputSettings {
    fn default() -> Self {
        Self {
            path: "distill_run.csv".into(),
            format: OutputFormat::Csv,
        }
    }
}

/// On-disk experiment specification.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub kind: ExperimentKind,
    #[serde(default)]
    pub params: SshParams,
    #[serde(default)]
    pub pulse: Option<LaserPulse>,
    /// Electronic preparation; only honored (and required) for `custom`.
    #[serde(default)]
    pub initial: Option<InitialState>,
    /// Spin channel hosting the one-body promotion.
    #[serde(default = "default_true")]
    pub excite_spin_up: bool,
    #[serde(default)]
    pub run: RunSettings,
    #[serde(default)]
    pub output: OutputSettings,
}

fn default_true() -> bool {
    true
}

/// A spec with every default materialized; this is what the sidecar records.
#[derive(Clone, Debug, Serialize)]
pub struct ResolvedSpec {
    pub kind: ExperimentKind,
    pub params: SshParams,
    pub pulse: Option<LaserPulse>,
    pub initial: InitialState,
    pub excite_spin_up: bool,
    pub n_traj: usize,
    pub seed: u64,
    pub t_final: f64,
    pub dt: f64,
    pub sample_every: f64,
    pub wigner: bool,
    pub output: OutputSettings,
}

pub const DEFAULT_SEED: u64 = 20170301;

impl ExperimentSpec {
    pub fn from_json(text: &str) -> anyhow::Result<Self> {
        let spec: ExperimentSpec = serde_json::from_str(text).context("parsing experiment spec")?;
        Ok(spec)
    }

    /// Applies per-kind defaults and checks the kind/pulse invariants.
    pub fn resolve(&self, seed_override: Option<u64>) -> anyhow::Result<ResolvedSpec> {
        let (initial, default_t_final) = match self.kind {
            ExperimentKind::Fig1a => (InitialState::SuperpositionOneBody, 1000.0),
            ExperimentKind::Fig1b => (InitialState::SuperpositionTwoBody, 1000.0),
            ExperimentKind::Fig2 => (InitialState::Ground, 150.0),
            ExperimentKind::Custom => (self.initial.unwrap_or(InitialState::Ground), 150.0),
        };
        match self.kind {
            ExperimentKind::Fig2 => {
                if self.pulse.is_none() {
                    bail!("kind = fig2 requires a pulse section");
                }
            }
            ExperimentKind::Fig1a | ExperimentKind::Fig1b => {
                if self.pulse.is_some() {
                    bail!("kind = {:?} forbids a pulse section", self.kind);
                }
                if self.initial.is_some() {
                    bail!("kind = {:?} fixes the initial state; drop `initial`", self.kind);
                }
            }
            ExperimentKind::Custom => {}
        }
        Ok(ResolvedSpec {
            kind: self.kind,
            params: self.params.clone(),
            pulse: self.pulse.clone(),
            initial,
            excite_spin_up: self.excite_spin_up,
            n_traj: self.run.n_traj.unwrap_or(100),
            seed: seed_override.or(self.run.seed).unwrap_or(DEFAULT_SEED),
            t_final: self.run.t_final.unwrap_or(default_t_final),
            dt: self.run.dt.unwrap_or(1e-3),
            sample_every: self.run.sample_every.unwrap_or(0.5),
            wigner: self.run.wigner.unwrap_or(true),
            output: self.output.clone(),
        })
    }
}

impl ResolvedSpec {
    pub fn to_experiment(&self) -> Experiment {
        Experiment {
            params: self.params.clone(),
            initial: self.initial,
            excite_spin_up: self.excite_spin_up,
            pulse: self.pulse.clone(),
            n_traj: self.n_traj,
            seed: self.seed,
            t_final: self.t_final,
            dt: self.dt,
            sample_every: self.sample_every,
            wigner: self.wigner,
        }
    }
}
