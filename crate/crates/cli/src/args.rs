//! Command-line grammar.

use std::path::PathBuf;

use clap::{Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(
    name = "reflector-sim",
    version,
    about = "Passive-reflector mm-wave coverage simulator for an L-shaped corridor"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// TOML run configuration; built-in defaults apply when omitted.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    /// Base seed for all randomness in the run.
    #[arg(long, global = true, value_name = "U64")]
    pub seed: Option<u64>,

    /// Emit JSON instead of CSV (same fields).
    #[arg(long, global = true)]
    pub json: bool,

    /// Thread pool size; results are identical for any value.
    #[arg(long, global = true, value_name = "N")]
    pub threads: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Synthesize an RSS grid and write it in the grid CSV format.
    SynthGrid {
        #[arg(long, value_name = "PATH")]
        out: PathBuf,
    },
    /// Validate a grid file and rewrite it in canonical form.
    ImportGrid {
        #[arg(long, value_name = "PATH")]
        grid: PathBuf,
        #[arg(long, value_name = "PATH")]
        out: PathBuf,
    },
    /// Compute the per-cell back-off map of a grid.
    BackoffMap {
        #[arg(long, value_name = "PATH")]
        grid: PathBuf,
        /// Back-off constant; defaults to the config value.
        #[arg(long)]
        kappa: Option<f64>,
        /// Back-off cap in dB; defaults to the config value.
        #[arg(long)]
        delta_max: Option<f64>,
        #[arg(long, value_name = "PATH")]
        out: PathBuf,
    },
    /// Monte Carlo outage probability versus user displacement.
    Outage {
        #[arg(long, value_name = "PATH")]
        grid: PathBuf,
        /// Comma-separated kappa list; defaults to the config sweep.
        #[arg(long, value_delimiter = ',')]
        kappa: Option<Vec<f64>>,
        /// Comma-separated displacements in meters.
        #[arg(
            long,
            value_delimiter = ',',
            default_values_t = [0.3, 0.6, 0.9, 1.2, 1.5, 1.8, 2.1]
        )]
        displacements: Vec<f64>,
        /// Random user locations per displacement.
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, value_name = "PATH")]
        out: PathBuf,
    },
    /// Multi-user selection CCDFs of the scheduled RSS.
    Schedule {
        #[arg(long, value_name = "PATH")]
        grid: PathBuf,
        /// Comma-separated user counts.
        #[arg(long, value_delimiter = ',', default_values_t = [1usize, 2, 4])]
        k: Vec<usize>,
        /// Random user instances per k.
        #[arg(long, default_value_t = 1000)]
        instances: usize,
        /// High-RSS region quantile.
        #[arg(long, default_value_t = 0.25)]
        quantile: f64,
        #[arg(long, value_name = "PATH")]
        out: PathBuf,
    },
    /// LiDAR coverage fraction for a sweep of mirror sizes.
    LidarCoverage {
        /// Comma-separated mirror widths in meters.
        #[arg(long, value_delimiter = ',', default_values_t = [0.9, 0.6, 0.3])]
        widths: Vec<f64>,
        /// Comma-separated mirror heights in meters.
        #[arg(long, value_delimiter = ',', default_values_t = [0.3])]
        heights: Vec<f64>,
        /// Also write the per-cell detection grid (single size only).
        #[arg(long, value_name = "PATH")]
        detection_grid: Option<PathBuf>,
        #[arg(long, value_name = "PATH")]
        out: PathBuf,
    },
    /// Empirical CCDF of a grid or a raw sample file.
    Ccdf {
        /// Grid CSV input.
        #[arg(long, value_name = "PATH", conflicts_with = "samples")]
        grid: Option<PathBuf>,
        /// Raw sample CSV input (single rss_db column).
        #[arg(long, value_name = "PATH")]
        samples: Option<PathBuf>,
        #[arg(long, value_name = "PATH")]
        out: PathBuf,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::SynthGrid { .. } => "synth-grid",
            Command::ImportGrid { .. } => "import-grid",
            Command::BackoffMap { .. } => "backoff-map",
            Command::Outage { .. } => "outage",
            Command::Schedule { .. } => "schedule",
            Command::LidarCoverage { .. } => "lidar-coverage",
            Command::Ccdf { .. } => "ccdf",
        }
    }
}
