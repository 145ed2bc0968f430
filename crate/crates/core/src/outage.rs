//! Monte Carlo outage probability versus user displacement, with an exact
//! enumeration oracle for small grids.
//!
//! A user starts at a random cell and walks greedily towards the panel.
//! The link is provisioned at the start cell's backed-off RSS; an outage
//! occurs when the measured RSS along the walk dips below that assumed
//! level. Trial `i` draws from `SplitMix64(seed ^ i)`, so curves are
//! bit-identical regardless of thread count.

use rayon::prelude::*;

use crate::backoff::{effective_rss, BackoffMap};
use crate::error::{Error, Result};
use crate::grid::{CellIndex, RssGrid};
use crate::rng::{trial_stream, SplitMix64};
use crate::scene::SceneConfig;

/// Distance ties within this tolerance are broken by a seeded draw.
const TIE_TOL: f64 = 1e-9;

/// Orientation of the outage inequality.
///
/// The printed definition compares the start RSS against the minimum of
/// the later RSS values in a direction that would make back-off increase
/// outage; `BackoffDip` is the physically consistent event "the channel
/// dips below the assumed (backed-off) level", and `LiteralPrinted` keeps
/// the printed form available for comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutageRule {
    #[default]
    BackoffDip,
    LiteralPrinted,
}

/// A greedy walk towards the panel over grid cells.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub cells: Vec<CellIndex>,
    pub step: f64,
}

impl Trajectory {
    /// Walked displacement in meters.
    pub fn displacement(&self) -> f64 {
        (self.cells.len().saturating_sub(1)) as f64 * self.step
    }
}

/// Outage probability per displacement.
#[derive(Debug, Clone, PartialEq)]
pub struct OutageCurve {
    pub displacements: Vec<f64>,
    pub p_out: Vec<f64>,
    pub trials: usize,
    pub kappa: f64,
    pub seed: u64,
}

/// Valid neighbors strictly closer to the panel center, reduced to the
/// set tied for the minimum distance.
fn closest_candidates(grid: &RssGrid, scene: &SceneConfig, cell: CellIndex) -> Vec<CellIndex> {
    let target = scene.panel.center;
    let spec = grid.spec();
    let current = spec.cell_center(cell).horizontal_distance(target);
    let improving: Vec<(f64, CellIndex)> = spec
        .neighbors8(cell)
        .map(|n| (spec.cell_center(n).horizontal_distance(target), n))
        .filter(|&(d, _)| d < current)
        .collect();
    let Some(best) = improving
        .iter()
        .map(|&(d, _)| d)
        .fold(None, |acc: Option<f64>, d| Some(acc.map_or(d, |m| m.min(d))))
    else {
        return Vec::new();
    };
    improving
        .into_iter()
        .filter(|&(d, _)| d <= best + TIE_TOL)
        .map(|(_, c)| c)
        .collect()
}

fn walk(
    grid: &RssGrid,
    scene: &SceneConfig,
    start: CellIndex,
    n_steps: usize,
    stream: &mut SplitMix64,
) -> Result<Trajectory> {
    grid.rss(start)?; // bounds check
    let mut cells = Vec::with_capacity(n_steps + 1);
    cells.push(start);
    let mut current = start;
    for _ in 0..n_steps {
        let tied = closest_candidates(grid, scene, current);
        let next = match tied.len() {
            0 => break,
            1 => tied[0],
            n => tied[stream.index(n)],
        };
        cells.push(next);
        current = next;
    }
    Ok(Trajectory {
        cells,
        step: grid.spec().cell_size,
    })
}

/// Greedy walk of `n_steps` cells from `start` towards the panel center,
/// with seeded uniform tie-breaking. Truncates early once no valid
/// neighbor decreases the distance.
pub fn generate_trajectory(
    grid: &RssGrid,
    scene: &SceneConfig,
    start: CellIndex,
    n_steps: usize,
    seed: u64,
) -> Result<Trajectory> {
    walk(grid, scene, start, n_steps, &mut SplitMix64::new(seed))
}

/// Whether the walk experiences an outage: the minimum RSS over the
/// visited cells after the start falls below the level assumed at the
/// start. A single-cell trajectory never sees an outage.
pub fn outage_event(
    grid: &RssGrid,
    map: &BackoffMap,
    traj: &Trajectory,
    rule: OutageRule,
) -> Result<bool> {
    let Some((&start, rest)) = traj.cells.split_first() else {
        return Err(Error::InvalidParameter("empty trajectory".into()));
    };
    let assumed = effective_rss(grid, map, start)?;
    if rest.is_empty() {
        return Ok(false);
    }
    let mut min_later = f64::INFINITY;
    for &cell in rest {
        min_later = min_later.min(grid.rss(cell)?);
    }
    Ok(match rule {
        OutageRule::BackoffDip => min_later < assumed,
        OutageRule::LiteralPrinted => assumed < min_later,
    })
}

/// Monte Carlo outage curve: for each displacement, `trials` seeded walks
/// from uniformly drawn start cells.
pub fn estimate_outage(
    grid: &RssGrid,
    map: &BackoffMap,
    scene: &SceneConfig,
    displacements: &[f64],
    trials: usize,
    seed: u64,
    rule: OutageRule,
) -> Result<OutageCurve> {
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be at least 1".into()));
    }
    if grid.spec() != map.spec() {
        return Err(Error::SpecMismatch(
            "back-off map was built over a different grid".into(),
        ));
    }
    if displacements.is_empty() {
        return Err(Error::InvalidParameter("empty displacement list".into()));
    }
    if displacements.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter(
            "displacements must be strictly increasing".into(),
        ));
    }
    let steps: Vec<usize> = displacements
        .iter()
        .map(|&d| {
            if d.is_finite() && d >= 0.0 {
                Ok((d / grid.spec().cell_size).round() as usize)
            } else {
                Err(Error::InvalidParameter(format!(
                    "displacement {d} is not representable as a non-negative step count"
                )))
            }
        })
        .collect::<Result<_>>()?;
    let cells: Vec<CellIndex> = grid.spec().valid_cells().collect();

    let mut p_out = Vec::with_capacity(displacements.len());
    for &n_steps in &steps {
        // Trial i re-derives its stream from (seed, i), so trajectories
        // for larger displacements extend those for smaller ones.
        let outcomes: Vec<bool> = (0..trials)
            .into_par_iter()
            .map(|trial| {
                let mut stream = trial_stream(seed, trial as u64);
                let start = cells[stream.index(cells.len())];
                let traj =
                    walk(grid, scene, start, n_steps, &mut stream).expect("start cell is valid");
                outage_event(grid, map, &traj, rule).expect("specs verified above")
            })
            .collect();
        let hits = outcomes.iter().filter(|&&o| o).count();
        p_out.push(hits as f64 / trials as f64);
    }
    Ok(OutageCurve {
        displacements: displacements.to_vec(),
        p_out,
        trials,
        kappa: map.kappa,
        seed,
    })
}

/// Exact outage probability by enumerating every start cell and every
/// tie-break branch with uniform weights. Intended for small grids.
pub fn brute_force_outage(
    grid: &RssGrid,
    map: &BackoffMap,
    scene: &SceneConfig,
    n_steps: usize,
    rule: OutageRule,
) -> Result<f64> {
    if grid.spec() != map.spec() {
        return Err(Error::SpecMismatch(
            "back-off map was built over a different grid".into(),
        ));
    }
    let cells: Vec<CellIndex> = grid.spec().valid_cells().collect();
    let start_weight = 1.0 / cells.len() as f64;
    let mut total = 0.0;
    let mut path = Vec::with_capacity(n_steps + 1);
    for &start in &cells {
        path.clear();
        path.push(start);
        total += start_weight * branch(grid, map, scene, &mut path, n_steps, rule)?;
    }
    Ok(total)
}

fn branch(
    grid: &RssGrid,
    map: &BackoffMap,
    scene: &SceneConfig,
    path: &mut Vec<CellIndex>,
    steps_left: usize,
    rule: OutageRule,
) -> Result<f64> {
    let current = *path.last().expect("path is non-empty");
    let tied = if steps_left == 0 {
        Vec::new()
    } else {
        closest_candidates(grid, scene, current)
    };
    if tied.is_empty() {
        let traj = Trajectory {
            cells: path.clone(),
            step: grid.spec().cell_size,
        };
        return Ok(if outage_event(grid, map, &traj, rule)? {
            1.0
        } else {
            0.0
        });
    }
    let weight = 1.0 / tied.len() as f64;
    let mut total = 0.0;
    for next in tied {
        path.push(next);
        total += weight * branch(grid, map, scene, path, steps_left - 1, rule)?;
        path.pop();
    }
    Ok(total)
}
