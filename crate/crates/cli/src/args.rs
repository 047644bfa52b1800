use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "kicktop", version, about = "Kicked-top simulations and figure data")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub options: Options,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Time-averaged single-qubit entropy over a grid of initial states.
    EntropyMap,
    /// One entropy map per step.
    Snapshots,
    /// Bloch vector and entropy of one qubit along a trajectory.
    Trajectory,
    /// Stroboscopic cloud of the classical map.
    ClassicalMap,
    /// Overlap of time-averaged states with the microcanonical ensemble.
    Ergodicity,
    /// Entropy fluctuations against qubit count.
    FiniteSize,
    /// Maps at a strong kick for several sizes plus the classical cloud.
    FullChaos,
    /// Pauli correlators of the two inset states.
    PauliBars,
    /// Purity under decoherence for the two inset states.
    Purity,
    /// Simulated tomography and maximum-likelihood reconstruction.
    TomographyDemo,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::EntropyMap => "entropy-map",
            Command::Snapshots => "snapshots",
            Command::Trajectory => "trajectory",
            Command::ClassicalMap => "classical-map",
            Command::Ergodicity => "ergodicity",
            Command::FiniteSize => "finite-size",
            Command::FullChaos => "full-chaos",
            Command::PauliBars => "pauli-bars",
            Command::Purity => "purity",
            Command::TomographyDemo => "tomography-demo",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// Flags shared by every command. Unset values fall back to per-command
/// defaults; a `--config` file overrides anything given here.
#[derive(Debug, Clone, Default, Args)]
pub struct Options {
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub kappa: Option<f64>,
    #[arg(long, global = true)]
    pub qubits: Option<usize>,
    #[arg(long, global = true)]
    pub steps: Option<usize>,
    /// Grid size as `THETAxPHI`, e.g. `31x61`.
    #[arg(long, global = true)]
    pub grid: Option<String>,
    /// full, rotations-only, interactions-only or idle.
    #[arg(long, global = true)]
    pub mode: Option<String>,
    /// dicke or register.
    #[arg(long, global = true)]
    pub backend: Option<String>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output path; multi-part outputs insert a label before the extension.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// `key=value` file whose entries override command-line flags.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Initial polar angle.
    #[arg(long, global = true)]
    pub theta: Option<f64>,
    /// Initial azimuth.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub phi: Option<f64>,
    /// Largest step of an overlap series.
    #[arg(long, global = true)]
    pub n_max: Option<usize>,
    /// include-initial or exclude-initial.
    #[arg(long, global = true)]
    pub average_window: Option<String>,
    /// Comma-separated qubit counts, or a range `4..10` (inclusive).
    #[arg(long, global = true)]
    pub qubit_list: Option<String>,
    /// Step window `FIRST:LAST` for fluctuation statistics.
    #[arg(long, global = true)]
    pub window: Option<String>,
    /// Trajectories in a classical cloud.
    #[arg(long, global = true)]
    pub trajectories: Option<usize>,
    /// Steps per classical trajectory.
    #[arg(long, global = true)]
    pub cloud_steps: Option<usize>,
    /// Energy relaxation time in ns; enables noise when set.
    #[arg(long, global = true)]
    pub t1: Option<f64>,
    /// Pure dephasing time in ns; enables noise when set.
    #[arg(long, global = true)]
    pub tphi: Option<f64>,
    #[arg(long, global = true)]
    pub rotation_ns: Option<f64>,
    #[arg(long, global = true)]
    pub interaction_ns: Option<f64>,
    /// Shots per tomography setting.
    #[arg(long, global = true)]
    pub shots: Option<u64>,
}
