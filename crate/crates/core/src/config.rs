//! Run configuration: a flat TOML file with one section per subsystem.
//! Unknown keys are rejected so typos fail loudly.
//!
//! ```toml
//! [scene]
//! corridor_width = 2.5
//! tx_position = [-2.55, 1.25, 1.5]
//! rx_height = 1.5
//! lidar_position = [-2.55, 1.25, 1.5]
//! carrier_frequency = 60e9
//!
//! [scene.panel]
//! center = [1.25, 1.25, 1.5]
//! azimuth = 45.0
//! width = 0.9
//! height = 0.3
//! mount_height = 1.35
//! material = "silver_coated_mirror"
//!
//! [scene.materials]
//! silver = 0.0
//! copper = 1.0
//! silver_coated_mirror = 1.0
//! foam = 12.0
//!
//! [grid]
//! origin = [0.5, 3.0, 0.0]
//! cell_size = 0.3
//! n_rows = 17
//! n_cols = 6
//! # mask = ["111111", ...]   # one '0'/'1' string per row; default all valid
//!
//! [synth]
//! tx_power = 10.0
//! antenna_gain = 30.0
//! ripple_amplitude = 2.5
//! ripple_period = 0.8
//! shadowing_sigma = 3.0
//! shadowing_correlation = 0.9
//! seed = 1
//!
//! [backoff]
//! kappa = 0.5
//! delta_max = 10.0
//! kappa_sweep = [0.0, 0.5, 1.0, 2.0]
//!
//! [outage]
//! literal_paper_inequality = false
//!
//! [lidar]
//! user_height = 1.8
//! samples_per_user = 16
//! ```

use std::fs;
use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::lidar::LidarConfig;
use crate::outage::OutageRule;
use crate::scene::{Point3, SceneConfig};
use crate::synth::SynthParams;

/// Grid lattice settings; the default is the 102-cell corridor grid.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    pub origin: Point3,
    pub cell_size: f64,
    pub n_rows: usize,
    pub n_cols: usize,
    /// One string per row, `'1'` marking valid cells; omitted = all valid.
    pub mask: Option<Vec<String>>,
}

impl Default for GridConfig {
    fn default() -> Self {
        let spec = GridSpec::default();
        Self {
            origin: spec.origin,
            cell_size: spec.cell_size,
            n_rows: spec.n_rows,
            n_cols: spec.n_cols,
            mask: None,
        }
    }
}

impl GridConfig {
    pub fn to_spec(&self) -> Result<GridSpec> {
        let mask = match &self.mask {
            None => vec![true; self.n_rows * self.n_cols],
            Some(rows) => {
                if rows.len() != self.n_rows {
                    return Err(Error::Config(format!(
                        "mask has {} rows, grid has {}",
                        rows.len(),
                        self.n_rows
                    )));
                }
                let mut mask = Vec::with_capacity(self.n_rows * self.n_cols);
                for (i, row) in rows.iter().enumerate() {
                    if row.chars().count() != self.n_cols {
                        return Err(Error::Config(format!(
                            "mask row {i} has {} characters, grid has {} columns",
                            row.chars().count(),
                            self.n_cols
                        )));
                    }
                    for ch in row.chars() {
                        match ch {
                            '1' => mask.push(true),
                            '0' => mask.push(false),
                            other => {
                                return Err(Error::Config(format!(
                                    "mask row {i} contains '{other}'; only '0' and '1' are allowed"
                                )))
                            }
                        }
                    }
                }
                mask
            }
        };
        GridSpec::new(self.origin, self.cell_size, self.n_rows, self.n_cols, mask)
            .map_err(|e| Error::Config(e.to_string()))
    }
}

/// Back-off parameters.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BackoffConfig {
    pub kappa: f64,
    pub delta_max: f64,
    /// Kappa values swept by the outage experiment.
    pub kappa_sweep: Vec<f64>,
}

impl Default for BackoffConfig {
    fn default() -> Self {
        Self {
            kappa: 0.5,
            delta_max: 10.0,
            kappa_sweep: vec![0.0, 0.5, 1.0, 2.0],
        }
    }
}

/// Outage experiment options.
#[derive(Debug, Clone, PartialEq, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct OutageConfig {
    /// Run the outage inequality exactly as printed instead of the
    /// corrected orientation.
    pub literal_paper_inequality: bool,
}

impl OutageConfig {
    pub fn rule(&self) -> OutageRule {
        if self.literal_paper_inequality {
            OutageRule::LiteralPrinted
        } else {
            OutageRule::BackoffDip
        }
    }
}

/// LiDAR sampling options; the sensor position comes from the scene.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LidarOptions {
    pub user_height: f64,
    pub samples_per_user: usize,
}

impl Default for LidarOptions {
    fn default() -> Self {
        Self {
            user_height: 1.8,
            samples_per_user: 16,
        }
    }
}

impl LidarOptions {
    pub fn to_config(&self, scene: &SceneConfig) -> LidarConfig {
        LidarConfig {
            position: scene.lidar_position,
            user_height: self.user_height,
            samples_per_user: self.samples_per_user,
        }
    }
}

/// Complete run configuration.
#[derive(Debug, Clone, PartialEq, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct SimConfig {
    pub scene: SceneConfig,
    pub grid: GridConfig,
    pub synth: SynthParams,
    pub backoff: BackoffConfig,
    pub outage: OutageConfig,
    pub lidar: LidarOptions,
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        self.scene.validate()?;
        self.grid.to_spec()?;
        self.synth.validate()?;
        if !(self.backoff.kappa >= 0.0) {
            return Err(Error::Config("backoff.kappa must be non-negative".into()));
        }
        if !(self.backoff.delta_max > 0.0) {
            return Err(Error::Config("backoff.delta_max must be positive".into()));
        }
        if self.backoff.kappa_sweep.iter().any(|&k| !(k >= 0.0)) {
            return Err(Error::Config(
                "backoff.kappa_sweep entries must be non-negative".into(),
            ));
        }
        self.lidar
            .to_config(&self.scene)
            .validate()
            .map_err(|e| Error::Config(e.to_string()))?;
        Ok(())
    }
}

/// Loads and validates a TOML run configuration.
pub fn load_config(path: &Path) -> Result<SimConfig> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    let config: SimConfig =
        toml::from_str(&text).map_err(|e| Error::Config(e.to_string()))?;
    config.validate()?;
    Ok(config)
}
