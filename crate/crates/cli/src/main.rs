//! `distill`: fermionic decoherence measures from determinant-basis density
//! matrices, with an SSH-chain vibronic simulator producing the time series.

mod analyze;
mod config;
mod output;
mod suites;

use std::path::PathBuf;
use std::time::Instant;

use anyhow::Context;
use clap::{Parser, Subcommand};
use distill_core::json::DensityMatrixJson;

use crate::config::ExperimentSpec;
use crate::suites::Scope;

#[derive(Parser)]
#[command(
    name = "distill",
    about = "Purities, reduced purities and distilled purities of many-fermion states",
    long_about = "Runs SSH-chain decoherence experiments, analyzes serialized density \
                  matrices, and validates the numerical kernels.\n\
                  Thread count for trajectory ensembles follows RAYON_NUM_THREADS.",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment described by a JSON spec file.
    Run {
        /// Path to the experiment spec (JSON).
        spec: PathBuf,
        /// Override the RNG seed from the spec.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the output path from the spec.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Compute decoherence measures of a serialized density matrix.
    Analyze {
        /// Path to the density matrix (JSON: determinant basis + matrix).
        rho: PathBuf,
        /// Optional single-particle unitary; adds a rotated-basis report.
        #[arg(long)]
        unitary: Option<PathBuf>,
        /// Write the reports as JSON here in addition to the table.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Run the oracle-equivalence and property suites.
    Validate {
        /// Which suite to run.
        #[arg(value_enum, default_value_t = Scope::All)]
        scope: Scope,
        /// Seed for the randomized instances.
        #[arg(long, default_value_t = config::DEFAULT_SEED)]
        seed: u64,
    },
}

fn main() {
    if let Err(e) = dispatch() {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}

fn dispatch() -> anyhow::Result<()> {
    match Cli::parse().command {
        Command::Run { spec, seed, output } => run(&spec, seed, output),
        Command::Analyze { rho, unitary, output } => run_analyze(&rho, unitary, output),
        Command::Validate { scope, seed } => run_validate(scope, seed),
    }
}

fn run(spec_path: &PathBuf, seed: Option<u64>, output: Option<PathBuf>) -> anyhow::Result<()> {
    let text = std::fs::read_to_string(spec_path)
        .with_context(|| format!("reading {}", spec_path.display()))?;
    let spec = ExperimentSpec::from_json(&text)
        .with_context(|| format!("in {}", spec_path.display()))?;
    let mut resolved = spec.resolve(seed)?;
    if let Some(path) = output {
        resolved.output.path = path.display().to_string();
    }
    let experiment = resolved.to_experiment();
    let start = Instant::now();
    let outcome = distill_ssh::run_ensemble(&experiment)?;
    let elapsed = start.elapsed();
    let (data_path, sidecar_path) = output::write_outputs(&resolved, &outcome)?;
    println!(
        "{} trajectories x {} fs in {:.1} s",
        resolved.n_traj,
        resolved.t_final,
        elapsed.as_secs_f64()
    );
    println!("HOMO-LUMO gap: {:.6} eV", outcome.homo_lumo_gap);
    if let Some(p) = &outcome.resolved_pulse {
        println!(
            "pulse: E0 = {} V/A, t_w = {} fs, photon = {:.6} eV",
            p.e0,
            p.t_w,
            p.photon_ev.unwrap()
        );
    }
    println!("max norm deviation: {:.3e}", outcome.max_norm_dev);
    println!("wrote {}", data_path.display());
    println!("wrote {}", sidecar_path.display());
    Ok(())
}

fn run_analyze(
    rho_path: &PathBuf,
    unitary: Option<PathBuf>,
    output: Option<PathBuf>,
) -> anyhow::Result<()> {
    let text = std::fs::read_to_string(rho_path)
        .with_context(|| format!("reading {}", rho_path.display()))?;
    let parsed: DensityMatrixJson =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", rho_path.display()))?;
    let rho = parsed
        .into_density()
        .context("input violates an invariant")?;
    let u = match unitary {
        None => None,
        Some(path) => {
            let text = std::fs::read_to_string(&path)
                .with_context(|| format!("reading {}", path.display()))?;
            let parsed: analyze::UnitaryJson = serde_json::from_str(&text)
                .with_context(|| format!("parsing {}", path.display()))?;
            Some(parsed.into_matrix()?)
        }
    };
    let result = analyze::analyze(&rho, u)?;
    print!("{}", analyze::render_table(&result));
    if let Some(path) = output {
        std::fs::write(&path, serde_json::to_string_pretty(&result)?)
            .with_context(|| format!("writing {}", path.display()))?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn run_validate(scope: Scope, seed: u64) -> anyhow::Result<()> {
    let reports = suites::run_scope(scope, seed);
    let name_width = reports.iter().map(|r| r.name.len()).max().unwrap_or(20);
    println!(
        "{:<8} {:<name_width$} {:>10} {:>13} {:>10} result",
        "suite", "property", "instances", "max |dev|", "tolerance"
    );
    let mut failures = 0;
    for r in &reports {
        println!(
            "{:<8} {:<name_width$} {:>10} {:>13.3e} {:>10.1e} {}",
            r.suite,
            r.name,
            r.instances,
            r.max_deviation,
            r.tolerance,
            if r.passed { "pass" } else { "FAIL" }
        );
        if !r.passed {
            failures += 1;
        }
    }
    if failures > 0 {
        anyhow::bail!("{failures} properties failed (seed {seed} reproduces)");
    }
    println!("all {} properties passed", reports.len());
    Ok(())
}
