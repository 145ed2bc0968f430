//! Location-dependent RSS back-off: cells in weak neighborhoods are
//! provisioned with a larger margin so the link survives movement into
//! coverage dips.
//!
//! The per-cell margin is `delta = min(kappa / g, delta_max)` where `g` is
//! the nearest-neighbor mean RSS as linear power, normalized by the grid's
//! maximum cell power so that `g` lies in (0, 1] and `kappa` stays
//! dimensionless.

use crate::error::{Error, Result};
use crate::grid::{nearest_neighbor_mean, CellIndex, GridSpec, RssGrid};
use crate::units::db_to_linear;

/// Per-cell back-off margins over a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct BackoffMap {
    spec: GridSpec,
    delta: Vec<f64>, // full lattice; NaN on masked-out cells
    pub kappa: f64,
    pub delta_max: f64,
}

impl BackoffMap {
    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    /// Back-off for a valid cell, dB.
    pub fn delta(&self, cell: CellIndex) -> Result<f64> {
        if !self.spec.is_valid(cell) {
            return Err(Error::CellOutOfBounds {
                row: cell.row,
                col: cell.col,
            });
        }
        Ok(self.delta[self.spec.flat_index(cell)])
    }
}

/// Computes the back-off map of `grid` for a given `kappa` and cap.
pub fn compute_backoff_map(grid: &RssGrid, kappa: f64, delta_max: f64) -> Result<BackoffMap> {
    if !(kappa >= 0.0 && kappa.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "kappa must be non-negative, got {kappa}"
        )));
    }
    if !(delta_max > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "delta_max must be positive, got {delta_max}"
        )));
    }
    let spec = grid.spec().clone();
    let max_power = db_to_linear(grid.max_rss());
    let mut delta = vec![f64::NAN; spec.n_rows * spec.n_cols];
    for cell in spec.valid_cells() {
        let g = db_to_linear(nearest_neighbor_mean(grid, cell)?) / max_power;
        delta[spec.flat_index(cell)] = if kappa == 0.0 {
            0.0
        } else {
            (kappa / g).min(delta_max)
        };
    }
    Ok(BackoffMap {
        spec,
        delta,
        kappa,
        delta_max,
    })
}

/// RSS the transmitter assumes at `cell`: measured RSS minus back-off.
pub fn effective_rss(grid: &RssGrid, map: &BackoffMap, cell: CellIndex) -> Result<f64> {
    if grid.spec() != map.spec() {
        return Err(Error::SpecMismatch(
            "back-off map was built over a different grid".into(),
        ));
    }
    Ok(grid.rss(cell)? - map.delta(cell)?)
}

/// Normalized neighborhood power of a cell, in (0, 1]; the quantity the
/// back-off formula divides by.
pub fn neighborhood_power(grid: &RssGrid, cell: CellIndex) -> Result<f64> {
    Ok(db_to_linear(nearest_neighbor_mean(grid, cell)?) / db_to_linear(grid.max_rss()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;
    use crate::scene::Point3;
    use crate::units::linear_to_db;

    fn grid_3x3(values_db: &[f64; 9]) -> RssGrid {
        let spec = GridSpec::full(Point3::new(0.0, 0.0, 0.0), 0.3, 3, 3).unwrap();
        RssGrid::from_values(spec, values_db).unwrap()
    }

    #[test]
    fn zero_kappa_gives_the_all_zero_map() {
        let g = grid_3x3(&[-50.0, -55.0, -48.0, -52.0, -60.0, -45.0, -51.0, -53.0, -49.0]);
        let map = compute_backoff_map(&g, 0.0, 10.0).unwrap();
        for cell in g.spec().valid_cells() {
            assert_eq!(map.delta(cell).unwrap(), 0.0);
        }
    }

    #[test]
    fn uniform_grid_gets_kappa_everywhere() {
        let g = grid_3x3(&[-50.0; 9]);
        let map = compute_backoff_map(&g, 0.7, 10.0).unwrap();
        for cell in g.spec().valid_cells() {
            assert!((map.delta(cell).unwrap() - 0.7).abs() < 1e-9);
        }
        // The cap binds once kappa exceeds it.
        let map = compute_backoff_map(&g, 12.0, 10.0).unwrap();
        for cell in g.spec().valid_cells() {
            assert!((map.delta(cell).unwrap() - 10.0).abs() < 1e-9);
        }
    }

    #[test]
    fn weakest_neighborhood_gets_the_largest_backoff() {
        // Explicit neighborhood enumeration: the corner surrounded by the
        // weakest cells must carry the maximum delta.
        let db = [
            -70.0, -68.0, -50.0, //
            -69.0, -66.0, -49.0, //
            -52.0, -51.0, -48.0,
        ];
        let g = grid_3x3(&db);
        let map = compute_backoff_map(&g, 0.5, 1e9).unwrap();
        let mut ranked: Vec<(f64, CellIndex)> = g
            .spec()
            .valid_cells()
            .map(|c| (map.delta(c).unwrap(), c))
            .collect();
        ranked.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
        // Weakest neighborhood is around (0, 0): all its neighbors are weak.
        assert_eq!(ranked[0].1, CellIndex::new(0, 0));
        // And the corresponding g ordering is inverted.
        let g_weak = neighborhood_power(&g, CellIndex::new(0, 0)).unwrap();
        for cell in g.spec().valid_cells() {
            assert!(neighborhood_power(&g, cell).unwrap() >= g_weak - 1e-15);
        }
    }

    #[test]
    fn negative_kappa_is_rejected() {
        let g = grid_3x3(&[-50.0; 9]);
        assert!(matches!(
            compute_backoff_map(&g, -0.1, 10.0),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn effective_rss_is_rss_minus_delta() {
        let g = grid_3x3(&[-55.0; 9]);
        let map = compute_backoff_map(&g, 3.0, 10.0).unwrap();
        let cell = CellIndex::new(1, 1);
        // Uniform grid: g = 1, delta = kappa = 3 dB.
        assert!((effective_rss(&g, &map, cell).unwrap() - -58.0).abs() < 1e-9);
        let zero = compute_backoff_map(&g, 0.0, 10.0).unwrap();
        assert_eq!(effective_rss(&g, &zero, cell).unwrap(), -55.0);
    }

    #[test]
    fn effective_rss_never_exceeds_rss() {
        let db = [-50.0, -55.0, -48.0, -52.0, -60.0, -45.0, -51.0, -53.0, -49.0];
        let g = grid_3x3(&db);
        let map = compute_backoff_map(&g, 1.0, 10.0).unwrap();
        for cell in g.spec().valid_cells() {
            assert!(effective_rss(&g, &map, cell).unwrap() <= g.rss(cell).unwrap());
        }
    }

    #[test]
    fn mismatched_specs_are_an_error() {
        let g = grid_3x3(&[-50.0; 9]);
        let other = RssGrid::from_values(
            GridSpec::full(Point3::new(0.0, 0.0, 0.0), 0.3, 1, 2).unwrap(),
            &[-50.0, -51.0],
        )
        .unwrap();
        let map = compute_backoff_map(&other, 1.0, 10.0).unwrap();
        assert!(matches!(
            effective_rss(&g, &map, CellIndex::new(0, 0)),
            Err(Error::SpecMismatch(_))
        ));
    }

    #[test]
    fn delta_is_monotone_in_kappa() {
        let db = [-50.0, -55.0, -48.0, -52.0, -60.0, -45.0, -51.0, -53.0, -49.0];
        let g = grid_3x3(&db);
        let small = compute_backoff_map(&g, 0.5, 10.0).unwrap();
        let large = compute_backoff_map(&g, 2.0, 10.0).unwrap();
        for cell in g.spec().valid_cells() {
            assert!(large.delta(cell).unwrap() >= small.delta(cell).unwrap());
        }
    }

    #[test]
    fn delta_is_anti_monotone_in_neighborhood_power() {
        let db = [-50.0, -55.0, -48.0, -52.0, -60.0, -45.0, -51.0, -53.0, -49.0];
        let g = grid_3x3(&db);
        let map = compute_backoff_map(&g, 0.5, 10.0).unwrap();
        let cells: Vec<CellIndex> = g.spec().valid_cells().collect();
        for &a in &cells {
            for &b in &cells {
                let ga = neighborhood_power(&g, a).unwrap();
                let gb = neighborhood_power(&g, b).unwrap();
                if ga < gb {
                    assert!(map.delta(a).unwrap() >= map.delta(b).unwrap());
                }
            }
        }
    }

    #[test]
    fn normalization_sends_the_peak_neighborhood_below_one() {
        let db = [-50.0, -55.0, -48.0, -52.0, -60.0, -45.0, -51.0, -53.0, -49.0];
        let g = grid_3x3(&db);
        for cell in g.spec().valid_cells() {
            let p = neighborhood_power(&g, cell).unwrap();
            assert!(p > 0.0 && p <= 1.0, "g = {p}");
        }
    }

    #[test]
    fn uses_linear_power_normalization_worked_example() {
        // 1 x 2 grid at -50 and -60 dB. Cell 0's only neighbor is cell 1,
        // so its neighborhood mean is -60 dB -> g = 10^(-1) = 0.1 and
        // delta = kappa / 0.1.
        let spec = GridSpec::full(Point3::new(0.0, 0.0, 0.0), 0.3, 1, 2).unwrap();
        let g = RssGrid::from_values(spec, &[-50.0, -60.0]).unwrap();
        let map = compute_backoff_map(&g, 0.5, 100.0).unwrap();
        assert!((map.delta(CellIndex::new(0, 0)).unwrap() - 5.0).abs() < 1e-9);
        let p = neighborhood_power(&g, CellIndex::new(0, 0)).unwrap();
        assert!((linear_to_db(p) - -10.0).abs() < 1e-9);
    }
}
