//! Mirror-aperture LiDAR visibility: which grid cells host a detectable
//! user when sensing through the finite mirror, and the coverage fraction
//! as the mirror size varies.
//!
//! Visibility is computed by unfolding: the LiDAR is reflected across the
//! mirror plane, and a user sample point is visible when the straight
//! segment from the reflected LiDAR to the sample crosses the finite
//! mirror rectangle.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{CellIndex, GridSpec};
use crate::scene::{image_point, segment_intersects_panel, Point3, SceneConfig};

/// LiDAR placement and the user sampling model.
#[derive(Debug, Clone, PartialEq)]
pub struct LidarConfig {
    /// Sensor position (collocated with the transmitter by default).
    pub position: Point3,
    /// Height of the modeled user, meters.
    pub user_height: f64,
    /// Number of sample points on the vertical user segment.
    pub samples_per_user: usize,
}

impl Default for LidarConfig {
    fn default() -> Self {
        Self {
            position: SceneConfig::default().lidar_position,
            user_height: 1.8,
            samples_per_user: 16,
        }
    }
}

impl LidarConfig {
    pub fn validate(&self) -> Result<()> {
        if !self.position.is_finite() {
            return Err(Error::InvalidParameter(
                "lidar position must be finite".into(),
            ));
        }
        if !(self.user_height > 0.0 && self.user_height.is_finite()) {
            return Err(Error::InvalidParameter(
                "user_height must be positive".into(),
            ));
        }
        if self.samples_per_user < 2 {
            return Err(Error::InvalidParameter(
                "samples_per_user must be at least 2".into(),
            ));
        }
        Ok(())
    }
}

/// Per-cell detectability and the resulting coverage fraction.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectionMap {
    spec: GridSpec,
    detectable: Vec<bool>, // full lattice; false on masked-out cells
    pub coverage: f64,
}

impl DetectionMap {
    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn detectable(&self, cell: CellIndex) -> Result<bool> {
        if !self.spec.is_valid(cell) {
            return Err(Error::CellOutOfBounds {
                row: cell.row,
                col: cell.col,
            });
        }
        Ok(self.detectable[self.spec.flat_index(cell)])
    }
}

/// Whether a user standing at the cell center is detectable through the
/// mirror: at least one sample on the vertical user segment must be
/// reachable by the unfolded LiDAR ray within the mirror rectangle.
pub fn cell_detectable(
    scene: &SceneConfig,
    lidar: &LidarConfig,
    spec: &GridSpec,
    cell: CellIndex,
) -> Result<bool> {
    lidar.validate()?;
    if !spec.is_valid(cell) {
        return Err(Error::CellOutOfBounds {
            row: cell.row,
            col: cell.col,
        });
    }
    let eye = image_point(lidar.position, &scene.panel);
    let center = spec.cell_center(cell);
    let n = lidar.samples_per_user;
    for i in 0..n {
        let z = lidar.user_height * i as f64 / (n - 1) as f64;
        let sample = Point3::new(center.x, center.y, z);
        if sample == eye {
            continue;
        }
        if segment_intersects_panel(eye, sample, &scene.panel)? {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Evaluates detectability over all valid cells.
pub fn coverage_fraction(
    scene: &SceneConfig,
    lidar: &LidarConfig,
    spec: &GridSpec,
) -> Result<DetectionMap> {
    lidar.validate()?;
    let cells: Vec<CellIndex> = spec.valid_cells().collect();
    let flags: Vec<bool> = cells
        .par_iter()
        .map(|&c| cell_detectable(scene, lidar, spec, c))
        .collect::<Result<_>>()?;
    let mut detectable = vec![false; spec.n_rows * spec.n_cols];
    let mut hits = 0usize;
    for (&cell, &flag) in cells.iter().zip(&flags) {
        detectable[spec.flat_index(cell)] = flag;
        if flag {
            hits += 1;
        }
    }
    Ok(DetectionMap {
        spec: spec.clone(),
        detectable,
        coverage: hits as f64 / cells.len() as f64,
    })
}
