//! Receiver-grid data model: a masked rectangular grid of RSS cells with
//! CSV persistence, neighborhood queries and high-RSS region extraction.
//!
//! Grid CSV format (the interchange contract for all CLI commands):
//! header `x_m,y_m,rss_db`, then one row per valid cell in row-major
//! order; coordinates are cell centers and all values carry four decimal
//! places.

use std::collections::BTreeSet;
use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::scene::Point3;
use crate::units::{db_to_linear, linear_to_db};

/// Cell address within a grid; row-major ordering.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CellIndex {
    pub row: usize,
    pub col: usize,
}

impl CellIndex {
    pub const fn new(row: usize, col: usize) -> Self {
        Self { row, col }
    }
}

/// Geometry and validity mask of a receiver grid.
///
/// `origin` is the center of cell (0, 0); cell (r, c) is centered at
/// `origin + (c * cell_size, r * cell_size)`. The mask marks which lattice
/// cells are measurement points. The default grid is the 17 x 6 lattice at
/// 0.3 m pitch whose 102 cells cover the NLoS corridor leg.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub origin: Point3,
    pub cell_size: f64,
    pub n_rows: usize,
    pub n_cols: usize,
    mask: Vec<bool>,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec::full(Point3::new(0.5, 3.0, 0.0), 0.3, 17, 6).expect("default grid is valid")
    }
}

impl GridSpec {
    pub fn new(
        origin: Point3,
        cell_size: f64,
        n_rows: usize,
        n_cols: usize,
        mask: Vec<bool>,
    ) -> Result<Self> {
        if !origin.is_finite() {
            return Err(Error::InvalidParameter("grid origin must be finite".into()));
        }
        if !(cell_size > 0.0 && cell_size.is_finite()) {
            return Err(Error::InvalidParameter("cell_size must be positive".into()));
        }
        if n_rows == 0 || n_cols == 0 {
            return Err(Error::InvalidParameter(
                "grid must have at least one row and column".into(),
            ));
        }
        if mask.len() != n_rows * n_cols {
            return Err(Error::InvalidParameter(format!(
                "mask has {} entries for a {} x {} grid",
                mask.len(),
                n_rows,
                n_cols
            )));
        }
        if !mask.iter().any(|&m| m) {
            return Err(Error::InvalidParameter(
                "grid mask has no valid cells".into(),
            ));
        }
        Ok(Self {
            origin,
            cell_size,
            n_rows,
            n_cols,
            mask,
        })
    }

    /// Grid with every lattice cell valid.
    pub fn full(origin: Point3, cell_size: f64, n_rows: usize, n_cols: usize) -> Result<Self> {
        Self::new(origin, cell_size, n_rows, n_cols, vec![true; n_rows * n_cols])
    }

    pub fn in_bounds(&self, cell: CellIndex) -> bool {
        cell.row < self.n_rows && cell.col < self.n_cols
    }

    pub fn is_valid(&self, cell: CellIndex) -> bool {
        self.in_bounds(cell) && self.mask[self.flat_index(cell)]
    }

    pub fn flat_index(&self, cell: CellIndex) -> usize {
        cell.row * self.n_cols + cell.col
    }

    pub fn cell_center(&self, cell: CellIndex) -> Point3 {
        Point3::new(
            self.origin.x + cell.col as f64 * self.cell_size,
            self.origin.y + cell.row as f64 * self.cell_size,
            self.origin.z,
        )
    }

    pub fn n_valid(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }

    /// Valid cells in row-major order.
    pub fn valid_cells(&self) -> impl Iterator<Item = CellIndex> + '_ {
        (0..self.n_rows).flat_map(move |row| {
            (0..self.n_cols)
                .map(move |col| CellIndex::new(row, col))
                .filter(move |&c| self.is_valid(c))
        })
    }

    /// Valid 8-connected neighbors of `cell`, row-major order.
    pub fn neighbors8(&self, cell: CellIndex) -> impl Iterator<Item = CellIndex> + '_ {
        const OFFSETS: [(i64, i64); 8] = [
            (-1, -1),
            (-1, 0),
            (-1, 1),
            (0, -1),
            (0, 1),
            (1, -1),
            (1, 0),
            (1, 1),
        ];
        OFFSETS.into_iter().filter_map(move |(dr, dc)| {
            let row = cell.row as i64 + dr;
            let col = cell.col as i64 + dc;
            if row < 0 || col < 0 {
                return None;
            }
            let c = CellIndex::new(row as usize, col as usize);
            self.is_valid(c).then_some(c)
        })
    }
}

/// Per-cell RSS values over a masked grid; the simulator's central map.
#[derive(Debug, Clone, PartialEq)]
pub struct RssGrid {
    spec: GridSpec,
    values: Vec<f64>, // full lattice; NaN on masked-out cells
}

impl RssGrid {
    /// Builds a grid by evaluating `f` on every valid cell.
    pub fn from_fn(
        spec: GridSpec,
        mut f: impl FnMut(CellIndex) -> Result<f64>,
    ) -> Result<Self> {
        let mut values = vec![f64::NAN; spec.n_rows * spec.n_cols];
        for cell in spec.valid_cells() {
            let v = f(cell)?;
            if !v.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "non-finite RSS at cell ({}, {})",
                    cell.row, cell.col
                )));
            }
            values[spec.flat_index(cell)] = v;
        }
        Ok(Self { spec, values })
    }

    /// Builds a grid from values listed over valid cells in row-major order.
    pub fn from_values(spec: GridSpec, rss: &[f64]) -> Result<Self> {
        if rss.len() != spec.n_valid() {
            return Err(Error::InvalidParameter(format!(
                "{} values supplied for {} valid cells",
                rss.len(),
                spec.n_valid()
            )));
        }
        let mut it = rss.iter().copied();
        Self::from_fn(spec, |_| Ok(it.next().expect("length checked")))
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    /// RSS of a valid cell; bounds error otherwise.
    pub fn rss(&self, cell: CellIndex) -> Result<f64> {
        if !self.spec.is_valid(cell) {
            return Err(Error::CellOutOfBounds {
                row: cell.row,
                col: cell.col,
            });
        }
        Ok(self.values[self.spec.flat_index(cell)])
    }

    pub fn get(&self, cell: CellIndex) -> Option<f64> {
        self.spec
            .is_valid(cell)
            .then(|| self.values[self.spec.flat_index(cell)])
    }

    /// RSS values of all valid cells, row-major order.
    pub fn samples(&self) -> Vec<f64> {
        self.spec
            .valid_cells()
            .map(|c| self.values[self.spec.flat_index(c)])
            .collect()
    }

    pub fn max_rss(&self) -> f64 {
        self.samples().into_iter().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min_rss(&self) -> f64 {
        self.samples().into_iter().fold(f64::INFINITY, f64::min)
    }
}

/// Mean RSS of the valid 8-connected neighbors of `cell`, computed in
/// linear power and converted back to dB. A cell with no valid neighbor
/// falls back to its own RSS.
pub fn nearest_neighbor_mean(grid: &RssGrid, cell: CellIndex) -> Result<f64> {
    let own = grid.rss(cell)?;
    let mut sum = 0.0;
    let mut count = 0usize;
    for n in grid.spec().neighbors8(cell) {
        sum += db_to_linear(grid.rss(n)?);
        count += 1;
    }
    if count == 0 {
        Ok(own)
    } else {
        Ok(linear_to_db(sum / count as f64))
    }
}

/// Cells forming the top-`quantile` fraction of the grid by RSS; ties at
/// the cut are all included.
pub fn high_rss_region(grid: &RssGrid, quantile: f64) -> Result<BTreeSet<CellIndex>> {
    if !(quantile > 0.0 && quantile < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "quantile must lie in (0, 1), got {quantile}"
        )));
    }
    let mut values = grid.samples();
    values.sort_by(|a, b| b.partial_cmp(a).expect("finite RSS values"));
    let k = ((quantile * values.len() as f64).ceil() as usize).clamp(1, values.len());
    let cut = values[k - 1];
    Ok(grid
        .spec()
        .valid_cells()
        .filter(|&c| grid.get(c).expect("valid cell") >= cut)
        .collect())
}

/// Loads a grid from the grid CSV format.
pub fn load_grid(path: &Path) -> Result<RssGrid> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    parse_grid_csv(&text, path)
}

const GRID_HEADER: &str = "x_m,y_m,rss_db";
const DEFAULT_CELL_SIZE: f64 = 0.3;

fn parse_grid_csv(text: &str, path: &Path) -> Result<RssGrid> {
    let bad = |line: usize, message: String| Error::GridFormat {
        path: path.to_path_buf(),
        line,
        message,
    };

    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header.trim_end_matches('\r') == GRID_HEADER => {}
        Some((_, header)) => {
            return Err(bad(
                1,
                format!("expected header '{GRID_HEADER}', found '{header}'"),
            ))
        }
        None => return Err(Error::NoValidCells(path.to_path_buf())),
    }

    struct Row {
        x: f64,
        y: f64,
        rss: f64,
        line: usize,
    }
    let mut rows: Vec<Row> = Vec::new();
    for (idx, raw) in lines {
        let line = idx + 1;
        let trimmed = raw.trim_end_matches('\r');
        let fields: Vec<&str> = trimmed.split(',').collect();
        if fields.len() != 3 {
            return Err(bad(
                line,
                format!("malformed row: expected 3 comma-separated fields, found {}", fields.len()),
            ));
        }
        let parse = |s: &str, name: &str| -> Result<f64> {
            s.trim()
                .parse::<f64>()
                .map_err(|_| bad(line, format!("malformed row: cannot parse {name} '{s}'")))
        };
        let x = parse(fields[0], "x_m")?;
        let y = parse(fields[1], "y_m")?;
        let rss = parse(fields[2], "rss_db")?;
        if !x.is_finite() || !y.is_finite() {
            return Err(bad(line, "non-finite coordinate".into()));
        }
        if !rss.is_finite() {
            return Err(bad(line, "non-finite RSS value".into()));
        }
        rows.push(Row { x, y, rss, line });
    }
    if rows.is_empty() {
        return Err(Error::NoValidCells(path.to_path_buf()));
    }

    let min_x = rows.iter().map(|r| r.x).fold(f64::INFINITY, f64::min);
    let min_y = rows.iter().map(|r| r.y).fold(f64::INFINITY, f64::min);
    let pitch = infer_pitch(&rows.iter().map(|r| r.x).collect::<Vec<_>>())
        .into_iter()
        .chain(infer_pitch(&rows.iter().map(|r| r.y).collect::<Vec<_>>()))
        .fold(f64::INFINITY, f64::min);
    let pitch = if pitch.is_finite() { pitch } else { DEFAULT_CELL_SIZE };

    // Snap every row onto the lattice.
    let mut indexed: Vec<(CellIndex, &Row)> = Vec::with_capacity(rows.len());
    let mut n_rows = 0usize;
    let mut n_cols = 0usize;
    for row in &rows {
        let fx = (row.x - min_x) / pitch;
        let fy = (row.y - min_y) / pitch;
        if (fx - fx.round()).abs() > 1e-4 || (fy - fy.round()).abs() > 1e-4 {
            return Err(bad(
                row.line,
                format!("cell ({:.4}, {:.4}) is not on the grid lattice", row.x, row.y),
            ));
        }
        let cell = CellIndex::new(fy.round() as usize, fx.round() as usize);
        n_rows = n_rows.max(cell.row + 1);
        n_cols = n_cols.max(cell.col + 1);
        indexed.push((cell, row));
    }
    if n_rows.saturating_mul(n_cols) > 4_000_000 {
        let far = indexed
            .iter()
            .max_by_key(|(c, _)| c.row.max(c.col))
            .expect("non-empty");
        return Err(bad(
            far.1.line,
            "coordinates span too many lattice cells; grid is irregular".into(),
        ));
    }

    let mut mask = vec![false; n_rows * n_cols];
    let mut values = vec![f64::NAN; n_rows * n_cols];
    let mut first_line = vec![0usize; n_rows * n_cols];
    for (cell, row) in indexed {
        let flat = cell.row * n_cols + cell.col;
        if mask[flat] {
            return Err(bad(
                row.line,
                format!("duplicate cell: same lattice point as line {}", first_line[flat]),
            ));
        }
        mask[flat] = true;
        values[flat] = row.rss;
        first_line[flat] = row.line;
    }

    let spec = GridSpec::new(Point3::new(min_x, min_y, 0.0), pitch, n_rows, n_cols, mask)?;
    let flat = values;
    RssGrid::from_fn(spec.clone(), |cell| Ok(flat[spec.flat_index(cell)]))
}

/// Minimum positive difference between consecutive sorted unique values.
fn infer_pitch(coords: &[f64]) -> Option<f64> {
    let mut unique = coords.to_vec();
    unique.sort_by(|a, b| a.partial_cmp(b).expect("finite coordinates"));
    unique.dedup();
    unique
        .windows(2)
        .map(|w| w[1] - w[0])
        .filter(|&d| d > 0.0)
        .fold(None, |acc, d| Some(acc.map_or(d, |m: f64| m.min(d))))
}

/// Saves a grid in the grid CSV format.
pub fn save_grid(grid: &RssGrid, path: &Path) -> Result<()> {
    let io_err = |e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    };
    let mut out = String::new();
    out.push_str(GRID_HEADER);
    out.push('\n');
    for cell in grid.spec().valid_cells() {
        let center = grid.spec().cell_center(cell);
        let rss = grid.get(cell).expect("valid cell");
        out.push_str(&format!("{:.4},{:.4},{:.4}\n", center.x, center.y, rss));
    }
    let mut file = fs::File::create(path).map_err(io_err)?;
    file.write_all(out.as_bytes()).map_err(io_err)?;
    Ok(())
}
