//! Synthetic RSS grids: free-space loss over the unfolded specular path,
//! material reflection loss, a deterministic path-length ripple, and a
//! seeded spatially correlated shadowing field.
//!
//! The synthesizer stands in for unpublished corridor measurements; its
//! amplitudes are artifact parameters tuned for uneven ("spotty") NLoS
//! coverage, not measured values.

use std::f64::consts::{PI, TAU};

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::grid::{GridSpec, RssGrid};
use crate::rng::SplitMix64;
use crate::scene::{path_length_via_panel, Point3, SceneConfig, SPEED_OF_LIGHT};

/// Parameters of the RSS synthesizer.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SynthParams {
    /// Transmit power, dBm.
    pub tx_power: f64,
    /// Combined tx+rx boresight antenna gain, dB.
    pub antenna_gain: f64,
    /// Amplitude of the deterministic sinusoidal ripple, dB.
    pub ripple_amplitude: f64,
    /// Period of the ripple in unfolded path length, meters.
    pub ripple_period: f64,
    /// Standard deviation of the shadowing field, dB.
    pub shadowing_sigma: f64,
    /// Correlation length of the shadowing field, meters.
    pub shadowing_correlation: f64,
    /// Seed of the shadowing field.
    pub seed: u64,
}

impl Default for SynthParams {
    fn default() -> Self {
        Self {
            tx_power: 10.0,
            antenna_gain: 30.0,
            ripple_amplitude: 2.5,
            ripple_period: 0.8,
            shadowing_sigma: 3.0,
            shadowing_correlation: 0.9,
            seed: 1,
        }
    }
}

impl SynthParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.ripple_period > 0.0 && self.ripple_period.is_finite()) {
            return Err(Error::InvalidParameter(
                "ripple_period must be positive".into(),
            ));
        }
        if !(self.shadowing_sigma >= 0.0 && self.shadowing_sigma.is_finite()) {
            return Err(Error::InvalidParameter(
                "shadowing_sigma must be non-negative".into(),
            ));
        }
        if !(self.shadowing_correlation > 0.0 && self.shadowing_correlation.is_finite()) {
            return Err(Error::InvalidParameter(
                "shadowing_correlation must be positive".into(),
            ));
        }
        if !(self.tx_power.is_finite()
            && self.antenna_gain.is_finite()
            && self.ripple_amplitude.is_finite())
        {
            return Err(Error::InvalidParameter(
                "synth levels must be finite".into(),
            ));
        }
        Ok(())
    }
}

/// Free-space path loss 20 log10(4 pi d f / c), dB.
pub fn fspl_db(distance_m: f64, frequency_hz: f64) -> f64 {
    20.0 * (4.0 * PI * distance_m * frequency_hz / SPEED_OF_LIGHT).log10()
}

/// Synthesizes the RSS grid for `scene` over `spec`.
///
/// Per valid cell at receiver height:
/// `rss = tx_power + antenna_gain - fspl(path) - material_loss + ripple + shadow`,
/// where `path` is the unfolded specular path via the panel plane. Equal
/// inputs produce bit-identical grids.
pub fn synthesize_rss_grid(
    scene: &SceneConfig,
    spec: &GridSpec,
    params: &SynthParams,
) -> Result<RssGrid> {
    scene.validate()?;
    params.validate()?;
    let shadow = shadow_field(spec, params);
    let loss = scene.materials.loss_db(scene.panel.material);
    let fixed = params.tx_power + params.antenna_gain - loss;
    RssGrid::from_fn(spec.clone(), |cell| {
        let center = spec.cell_center(cell);
        let rx = Point3::new(center.x, center.y, scene.rx_height);
        let path = path_length_via_panel(scene.tx_position, rx, &scene.panel).map_err(|_| {
            Error::NoSpecularPath(format!(
                "cell ({}, {}) lies on the far side of the panel plane from the transmitter",
                cell.row, cell.col
            ))
        })?;
        let ripple = params.ripple_amplitude * (TAU * path / params.ripple_period).sin();
        Ok(fixed - fspl_db(path, scene.carrier_frequency)
            + ripple
            + shadow[spec.flat_index(cell)])
    })
}

/// Correlated zero-mean Gaussian field over the full lattice.
///
/// White noise is drawn row-major from the seed, filtered with a Gaussian
/// kernel of width `shadowing_correlation`, and normalized per cell so the
/// field variance is exactly `shadowing_sigma^2` regardless of position.
fn shadow_field(spec: &GridSpec, params: &SynthParams) -> Vec<f64> {
    let n = spec.n_rows * spec.n_cols;
    if params.shadowing_sigma == 0.0 {
        return vec![0.0; n];
    }
    let mut stream = SplitMix64::new(params.seed);
    let white: Vec<f64> = (0..n).map(|_| stream.standard_normal()).collect();
    let ell = params.shadowing_correlation / spec.cell_size;
    let mut field = vec![0.0; n];
    for row in 0..spec.n_rows {
        for col in 0..spec.n_cols {
            let mut num = 0.0;
            let mut den = 0.0;
            for other_row in 0..spec.n_rows {
                for other_col in 0..spec.n_cols {
                    let dr = row as f64 - other_row as f64;
                    let dc = col as f64 - other_col as f64;
                    let w = (-(dr * dr + dc * dc) / (2.0 * ell * ell)).exp();
                    num += w * white[other_row * spec.n_cols + other_col];
                    den += w * w;
                }
            }
            field[row * spec.n_cols + col] = params.shadowing_sigma * num / den.sqrt();
        }
    }
    field
}
