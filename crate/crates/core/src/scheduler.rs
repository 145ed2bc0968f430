//! LiDAR-aided user selection: map user positions to grid cells, restrict
//! scheduling to the high-RSS region, and quantify the multi-user
//! diversity gain as a CCDF of the scheduled RSS.

use std::collections::BTreeSet;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{CellIndex, GridSpec, RssGrid};
use crate::rng::{trial_stream, SplitMix64};
use crate::scene::Point3;
use crate::stats::{ccdf, default_thresholds, CcdfCurve};

/// Positions of the k candidate users.
#[derive(Debug, Clone, PartialEq)]
pub struct UserSet {
    pub positions: Vec<Point3>,
}

impl UserSet {
    pub fn new(positions: Vec<Point3>) -> Self {
        Self { positions }
    }

    pub fn k(&self) -> usize {
        self.positions.len()
    }
}

/// Outcome of one scheduling decision.
#[derive(Debug, Clone, PartialEq)]
pub struct ScheduleDecision {
    pub selected_user: usize,
    pub cell: CellIndex,
    pub scheduled_rss: f64,
    pub in_high_region: bool,
}

/// Maps a position to the valid cell whose center is nearest in (x, y).
///
/// Exact midpoints tie-break towards the lower (row, col). Positions
/// outside the grid footprint, or whose nearest lattice cell is masked
/// out, are out of coverage.
pub fn position_to_cell(spec: &GridSpec, p: Point3) -> Result<CellIndex> {
    let out = || Error::OutOfCoverage {
        user: None,
        x: p.x,
        y: p.y,
    };
    if !p.is_finite() {
        return Err(out());
    }
    let fx = (p.x - spec.origin.x) / spec.cell_size;
    let fy = (p.y - spec.origin.y) / spec.cell_size;
    // Round half-down so midpoint ties land on the lower index.
    let col = (fx - 0.5).ceil();
    let row = (fy - 0.5).ceil();
    if col < 0.0 || row < 0.0 || col >= spec.n_cols as f64 || row >= spec.n_rows as f64 {
        return Err(out());
    }
    let cell = CellIndex::new(row as usize, col as usize);
    if !spec.is_valid(cell) {
        return Err(out());
    }
    Ok(cell)
}

/// Core selection rule over already-mapped user cells.
///
/// Candidates are sorted by cell index before the seeded draw, so the
/// outcome depends on the candidate set rather than on user order.
fn select_among(
    grid: &RssGrid,
    region: &BTreeSet<CellIndex>,
    cells: &[CellIndex],
    stream: &mut SplitMix64,
) -> Result<ScheduleDecision> {
    let mut candidates: Vec<(CellIndex, usize)> = cells
        .iter()
        .enumerate()
        .filter(|(_, c)| region.contains(c))
        .map(|(i, &c)| (c, i))
        .collect();
    let (selected_user, in_high_region) = if candidates.is_empty() {
        // Fallback: the user in the strongest cell, ties to the lowest
        // user index.
        let mut best = 0usize;
        let mut best_rss = grid.rss(cells[0])?;
        for (i, &c) in cells.iter().enumerate().skip(1) {
            let rss = grid.rss(c)?;
            if rss > best_rss {
                best = i;
                best_rss = rss;
            }
        }
        (best, false)
    } else if candidates.len() == 1 {
        (candidates[0].1, true)
    } else {
        candidates.sort_by_key(|&(c, _)| c);
        (candidates[stream.index(candidates.len())].1, true)
    };
    let cell = cells[selected_user];
    Ok(ScheduleDecision {
        selected_user,
        cell,
        scheduled_rss: grid.rss(cell)?,
        in_high_region,
    })
}

/// Schedules one of the users: the single in-region user when unique, a
/// seeded uniform draw among several, or the max-RSS user when nobody is
/// in the region.
pub fn select_user(
    grid: &RssGrid,
    region: &BTreeSet<CellIndex>,
    users: &UserSet,
    seed: u64,
) -> Result<ScheduleDecision> {
    if users.k() == 0 {
        return Err(Error::InvalidParameter("user set is empty".into()));
    }
    if region.is_empty() {
        return Err(Error::InvalidParameter("scheduling region is empty".into()));
    }
    let cells: Vec<CellIndex> = users
        .positions
        .iter()
        .enumerate()
        .map(|(i, &p)| {
            position_to_cell(grid.spec(), p).map_err(|e| match e {
                Error::OutOfCoverage { x, y, .. } => Error::OutOfCoverage {
                    user: Some(i),
                    x,
                    y,
                },
                other => other,
            })
        })
        .collect::<Result<_>>()?;
    select_among(grid, region, &cells, &mut SplitMix64::new(seed))
}

/// Scheduled-RSS samples over seeded instances of k users placed
/// uniformly at random on the valid cells (at cell centers).
pub fn diversity_samples(
    grid: &RssGrid,
    region: &BTreeSet<CellIndex>,
    k: usize,
    instances: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    if k == 0 {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    if instances == 0 {
        return Err(Error::InvalidParameter(
            "instances must be at least 1".into(),
        ));
    }
    if region.is_empty() {
        return Err(Error::InvalidParameter("scheduling region is empty".into()));
    }
    let cells: Vec<CellIndex> = grid.spec().valid_cells().collect();
    (0..instances)
        .into_par_iter()
        .map(|instance| {
            let mut stream = trial_stream(seed, instance as u64);
            let placed: Vec<CellIndex> = (0..k)
                .map(|_| cells[stream.index(cells.len())])
                .collect();
            Ok(select_among(grid, region, &placed, &mut stream)?.scheduled_rss)
        })
        .collect()
}

/// Empirical CCDF of the scheduled RSS for k users.
pub fn diversity_ccdf(
    grid: &RssGrid,
    region: &BTreeSet<CellIndex>,
    k: usize,
    instances: usize,
    seed: u64,
) -> Result<CcdfCurve> {
    let samples = diversity_samples(grid, region, k, instances, seed)?;
    ccdf(&samples, &default_thresholds(&samples)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::high_rss_region;

    fn grid_3x3(values_db: &[f64; 9]) -> RssGrid {
        let spec = GridSpec::full(Point3::new(0.0, 0.0, 0.0), 0.3, 3, 3).unwrap();
        RssGrid::from_values(spec, values_db).unwrap()
    }

    #[test]
    fn exact_center_maps_to_its_cell() {
        let spec = GridSpec::default();
        let center = spec.cell_center(CellIndex::new(4, 2));
        let cell = position_to_cell(&spec, center).unwrap();
        assert_eq!(cell, CellIndex::new(4, 2));
    }

    #[test]
    fn midpoint_ties_break_to_the_lower_cell() {
        // Pitch 0.25 keeps the midpoint arithmetic exact in binary.
        let spec = GridSpec::full(Point3::new(0.0, 0.0, 0.0), 0.25, 2, 2).unwrap();
        let p = Point3::new(0.125, 0.0, 0.0); // midpoint of columns 0 and 1
        assert_eq!(position_to_cell(&spec, p).unwrap(), CellIndex::new(0, 0));
        let p = Point3::new(0.0, 0.125, 0.0); // midpoint of rows 0 and 1
        assert_eq!(position_to_cell(&spec, p).unwrap(), CellIndex::new(0, 0));
    }

    #[test]
    fn small_offset_keeps_the_same_cell() {
        let spec = GridSpec::default();
        let mut p = spec.cell_center(CellIndex::new(3, 3));
        p.x += 0.1;
        assert_eq!(position_to_cell(&spec, p).unwrap(), CellIndex::new(3, 3));
    }

    #[test]
    fn outside_footprint_is_out_of_coverage() {
        let spec = GridSpec::default();
        let p = Point3::new(spec.origin.x - 1.0, spec.origin.y, 0.0);
        assert!(matches!(
            position_to_cell(&spec, p),
            Err(Error::OutOfCoverage { .. })
        ));
    }

    #[test]
    fn masked_nearest_cell_is_out_of_coverage() {
        let mut mask = vec![true; 9];
        mask[4] = false;
        let spec = GridSpec::new(Point3::new(0.0, 0.0, 0.0), 0.3, 3, 3, mask).unwrap();
        let p = spec.cell_center(CellIndex::new(1, 1));
        assert!(matches!(
            position_to_cell(&spec, p),
            Err(Error::OutOfCoverage { .. })
        ));
    }

    #[test]
    fn single_user_is_always_selected() {
        let g = grid_3x3(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0]);
        let region = high_rss_region(&g, 1.0 / 3.0).unwrap();
        // A user outside the region still gets the link.
        let users = UserSet::new(vec![g.spec().cell_center(CellIndex::new(0, 0))]);
        let d = select_user(&g, &region, &users, 1).unwrap();
        assert_eq!(d.selected_user, 0);
        assert!(!d.in_high_region);
        assert_eq!(d.scheduled_rss, 1.0);
    }

    #[test]
    fn lone_in_region_user_wins_over_stronger_nothing() {
        let g = grid_3x3(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0]);
        let region = high_rss_region(&g, 1.0 / 3.0).unwrap(); // cells valued 7, 8, 9
        let spec = g.spec();
        let users = UserSet::new(vec![
            spec.cell_center(CellIndex::new(0, 0)),
            spec.cell_center(CellIndex::new(2, 0)), // value 7: in region
            spec.cell_center(CellIndex::new(0, 1)),
            spec.cell_center(CellIndex::new(1, 1)),
        ]);
        let d = select_user(&g, &region, &users, 123).unwrap();
        assert_eq!(d.selected_user, 1);
        assert!(d.in_high_region);
        assert_eq!(d.scheduled_rss, 7.0);
    }

    #[test]
    fn two_in_region_users_split_evenly_over_seeds() {
        let g = grid_3x3(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0]);
        let region = high_rss_region(&g, 1.0 / 3.0).unwrap();
        let spec = g.spec();
        let users = UserSet::new(vec![
            spec.cell_center(CellIndex::new(2, 1)), // value 8
            spec.cell_center(CellIndex::new(2, 2)), // value 9
        ]);
        let mut first = 0usize;
        let draws = 10_000;
        for seed in 0..draws {
            let d = select_user(&g, &region, &users, seed).unwrap();
            if d.selected_user == 0 {
                first += 1;
            }
        }
        let frac = first as f64 / draws as f64;
        assert!((frac - 0.5).abs() < 0.02, "split {frac}");
    }

    #[test]
    fn fallback_prefers_max_rss_then_lowest_index() {
        let g = grid_3x3(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0]);
        let region: BTreeSet<CellIndex> = [CellIndex::new(2, 2)].into_iter().collect();
        let spec = g.spec();
        let users = UserSet::new(vec![
            spec.cell_center(CellIndex::new(0, 2)), // 3
            spec.cell_center(CellIndex::new(1, 2)), // 6: strongest
            spec.cell_center(CellIndex::new(0, 0)), // 1
        ]);
        let d = select_user(&g, &region, &users, 5).unwrap();
        assert_eq!(d.selected_user, 1);
        assert!(!d.in_high_region);
        // Duplicate strongest cells tie to the lowest user index.
        let users = UserSet::new(vec![
            spec.cell_center(CellIndex::new(1, 2)),
            spec.cell_center(CellIndex::new(1, 2)),
        ]);
        let d = select_user(&g, &region, &users, 5).unwrap();
        assert_eq!(d.selected_user, 0);
    }

    #[test]
    fn out_of_coverage_user_is_identified() {
        let g = grid_3x3(&[1.0; 9]);
        let region = high_rss_region(&g, 0.5).unwrap();
        let users = UserSet::new(vec![
            g.spec().cell_center(CellIndex::new(0, 0)),
            Point3::new(50.0, 50.0, 0.0),
        ]);
        match select_user(&g, &region, &users, 1) {
            Err(Error::OutOfCoverage { user: Some(1), .. }) => {}
            other => panic!("expected OutOfCoverage for user 1, got {other:?}"),
        }
    }

    #[test]
    fn uniform_grid_diversity_is_a_step_function() {
        let g = grid_3x3(&[-50.0; 9]);
        let region = high_rss_region(&g, 0.25).unwrap();
        for k in [1, 2, 4] {
            let curve = diversity_ccdf(&g, &region, k, 500, 9).unwrap();
            for (&t, &p) in curve.thresholds.iter().zip(&curve.prob) {
                assert_eq!(p, if t < -50.0 { 1.0 } else { 0.0 });
            }
        }
    }

    #[test]
    fn selection_is_permutation_equivariant_for_distinct_cells() {
        let g = grid_3x3(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0]);
        let region = high_rss_region(&g, 1.0 / 3.0).unwrap();
        let spec = g.spec();
        let a = spec.cell_center(CellIndex::new(2, 1));
        let b = spec.cell_center(CellIndex::new(2, 2));
        for seed in 0..200 {
            let d1 = select_user(&g, &region, &UserSet::new(vec![a, b]), seed).unwrap();
            let d2 = select_user(&g, &region, &UserSet::new(vec![b, a]), seed).unwrap();
            // Same physical user selected regardless of listing order.
            assert_eq!(d1.cell, d2.cell);
            assert_eq!(d1.selected_user, 1 - d2.selected_user);
        }
    }

    #[test]
    fn diversity_samples_are_deterministic_and_k_sensitive() {
        let g = grid_3x3(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0]);
        let region = high_rss_region(&g, 1.0 / 3.0).unwrap();
        let a = diversity_samples(&g, &region, 2, 1000, 11).unwrap();
        let b = diversity_samples(&g, &region, 2, 1000, 11).unwrap();
        assert_eq!(a, b);
        let means: Vec<f64> = [1usize, 2, 4]
            .iter()
            .map(|&k| {
                let s = diversity_samples(&g, &region, k, 4000, 11).unwrap();
                s.iter().sum::<f64>() / s.len() as f64
            })
            .collect();
        assert!(means[0] < means[1] && means[1] < means[2], "{means:?}");
    }
}
