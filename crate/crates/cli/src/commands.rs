//! Subcommand implementations: thin compositions of library operations
//! plus table writing. No numerical logic lives here.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use reflector_core::backoff::compute_backoff_map;
use reflector_core::config::{load_config, SimConfig};
use reflector_core::grid::{high_rss_region, load_grid, save_grid, RssGrid};
use reflector_core::lidar::coverage_fraction;
use reflector_core::outage::estimate_outage;
use reflector_core::scheduler::diversity_samples;
use reflector_core::stats::{ccdf, default_thresholds};
use reflector_core::Error as CoreError;

use crate::args::{Cli, Command};
use crate::output::{write_table, Field, RunManifest};

/// Failures after argument parsing, with their exit codes.
#[derive(Debug)]
pub struct CommandError {
    code: i32,
    message: String,
}

impl CommandError {
    pub const CONFIG: i32 = 4;
    pub const GRID_FILE: i32 = 5;
    pub const PARAMETER: i32 = 6;
    pub const OUTPUT_IO: i32 = 7;

    pub fn exit_code(&self) -> i32 {
        self.code
    }

    fn config(err: CoreError) -> Self {
        Self {
            code: Self::CONFIG,
            message: err.to_string(),
        }
    }

    fn grid_file(err: CoreError) -> Self {
        Self {
            code: Self::GRID_FILE,
            message: err.to_string(),
        }
    }

    fn parameter(err: CoreError) -> Self {
        Self {
            code: Self::PARAMETER,
            message: err.to_string(),
        }
    }

    fn parameter_msg(message: impl Into<String>) -> Self {
        Self {
            code: Self::PARAMETER,
            message: message.into(),
        }
    }

    fn output_io(path: &Path, err: std::io::Error) -> Self {
        Self {
            code: Self::OUTPUT_IO,
            message: format!("{}: {err}", path.display()),
        }
    }
}

impl fmt::Display for CommandError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

type CmdResult<T> = Result<T, CommandError>;

pub fn run(cli: Cli) -> CmdResult<()> {
    match cli.threads {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| CommandError::parameter_msg(format!("thread pool: {e}")))?;
            pool.install(|| execute(&cli))
        }
        None => execute(&cli),
    }
}

fn execute(cli: &Cli) -> CmdResult<()> {
    let config = match &cli.config {
        Some(path) => load_config(path).map_err(CommandError::config)?,
        None => SimConfig::default(),
    };
    let seed = cli.seed.unwrap_or(config.synth.seed);
    let command_name = cli.command.name();
    let config_path = cli.config.as_deref();

    match &cli.command {
        Command::SynthGrid { out } => {
            let spec = config.grid.to_spec().map_err(CommandError::config)?;
            let mut params = config.synth.clone();
            params.seed = seed;
            let grid = reflector_core::synth::synthesize_rss_grid(&config.scene, &spec, &params)
                .map_err(CommandError::parameter)?;
            write_grid(&grid, out, cli.json)?;
            finish(command_name, config_path, seed, &[out])
        }
        Command::ImportGrid { grid, out } => {
            let loaded = load_grid(grid).map_err(CommandError::grid_file)?;
            write_grid(&loaded, out, cli.json)?;
            finish(command_name, config_path, seed, &[out])
        }
        Command::BackoffMap {
            grid,
            kappa,
            delta_max,
            out,
        } => {
            let loaded = load_grid(grid).map_err(CommandError::grid_file)?;
            let kappa = kappa.unwrap_or(config.backoff.kappa);
            let delta_max = delta_max.unwrap_or(config.backoff.delta_max);
            let map = compute_backoff_map(&loaded, kappa, delta_max)
                .map_err(CommandError::parameter)?;
            let rows: Vec<Vec<Field>> = loaded
                .spec()
                .valid_cells()
                .map(|cell| {
                    let center = loaded.spec().cell_center(cell);
                    let delta = map.delta(cell).expect("valid cell");
                    vec![Field::f4(center.x), Field::f4(center.y), Field::f4(delta)]
                })
                .collect();
            write_table(out, &["x_m", "y_m", "delta_db"], &rows, cli.json)
                .map_err(|e| CommandError::output_io(out, e))?;
            finish(command_name, config_path, seed, &[out])
        }
        Command::Outage {
            grid,
            kappa,
            displacements,
            trials,
            out,
        } => {
            let loaded = load_grid(grid).map_err(CommandError::grid_file)?;
            let kappas = kappa.clone().unwrap_or(config.backoff.kappa_sweep.clone());
            let rule = config.outage.rule();
            let mut rows = Vec::new();
            for &k in &kappas {
                let map = compute_backoff_map(&loaded, k, config.backoff.delta_max)
                    .map_err(CommandError::parameter)?;
                let curve = estimate_outage(
                    &loaded,
                    &map,
                    &config.scene,
                    displacements,
                    *trials,
                    seed,
                    rule,
                )
                .map_err(CommandError::parameter)?;
                for (&d, &p) in curve.displacements.iter().zip(&curve.p_out) {
                    rows.push(vec![
                        Field::f4(d),
                        Field::f4(k),
                        Field::f6(p),
                        Field::Int(*trials as u64),
                    ]);
                }
            }
            write_table(
                out,
                &["displacement_m", "kappa", "p_out", "trials"],
                &rows,
                cli.json,
            )
            .map_err(|e| CommandError::output_io(out, e))?;
            finish(command_name, config_path, seed, &[out])
        }
        Command::Schedule {
            grid,
            k,
            instances,
            quantile,
            out,
        } => {
            let loaded = load_grid(grid).map_err(CommandError::grid_file)?;
            let region = high_rss_region(&loaded, *quantile).map_err(CommandError::parameter)?;
            let mut per_k = Vec::new();
            let mut pooled = Vec::new();
            for &users in k {
                let samples = diversity_samples(&loaded, &region, users, *instances, seed)
                    .map_err(CommandError::parameter)?;
                pooled.extend_from_slice(&samples);
                per_k.push((users, samples));
            }
            let thresholds = default_thresholds(&pooled).map_err(CommandError::parameter)?;
            let mut rows = Vec::new();
            for (users, samples) in &per_k {
                let curve = ccdf(samples, &thresholds).map_err(CommandError::parameter)?;
                for (&t, &p) in curve.thresholds.iter().zip(&curve.prob) {
                    rows.push(vec![Field::f4(t), Field::Int(*users as u64), Field::f6(p)]);
                }
            }
            write_table(out, &["threshold_db", "k", "ccdf"], &rows, cli.json)
                .map_err(|e| CommandError::output_io(out, e))?;
            finish(command_name, config_path, seed, &[out])
        }
        Command::LidarCoverage {
            widths,
            heights,
            detection_grid,
            out,
        } => {
            let spec = config.grid.to_spec().map_err(CommandError::config)?;
            let lidar = config.lidar.to_config(&config.scene);
            if detection_grid.is_some() && widths.len() * heights.len() != 1 {
                return Err(CommandError::parameter_msg(
                    "--detection-grid requires exactly one mirror size",
                ));
            }
            let mut rows = Vec::new();
            let mut extra_output: Option<PathBuf> = None;
            for &width in widths {
                for &height in heights {
                    let mut scene = config.scene.clone();
                    scene.panel = scene.panel.with_size(width, height);
                    scene.panel.validate().map_err(CommandError::parameter)?;
                    let map = coverage_fraction(&scene, &lidar, &spec)
                        .map_err(CommandError::parameter)?;
                    rows.push(vec![
                        Field::f4(width),
                        Field::f4(height),
                        Field::f6(map.coverage),
                    ]);
                    if let Some(path) = detection_grid {
                        let cells: Vec<Vec<Field>> = spec
                            .valid_cells()
                            .map(|cell| {
                                let center = spec.cell_center(cell);
                                vec![
                                    Field::f4(center.x),
                                    Field::f4(center.y),
                                    Field::Bool(map.detectable(cell).expect("valid cell")),
                                ]
                            })
                            .collect();
                        write_table(path, &["x_m", "y_m", "detectable"], &cells, cli.json)
                            .map_err(|e| CommandError::output_io(path, e))?;
                        extra_output = Some(path.clone());
                    }
                }
            }
            write_table(out, &["width_m", "height_m", "coverage"], &rows, cli.json)
                .map_err(|e| CommandError::output_io(out, e))?;
            let mut outputs: Vec<&Path> = vec![out];
            if let Some(extra) = &extra_output {
                outputs.push(extra);
            }
            finish(command_name, config_path, seed, &outputs)
        }
        Command::Ccdf { grid, samples, out } => {
            let values = match (grid, samples) {
                (Some(path), None) => load_grid(path)
                    .map_err(CommandError::grid_file)?
                    .samples(),
                (None, Some(path)) => load_samples(path)?,
                _ => {
                    return Err(CommandError::parameter_msg(
                        "exactly one of --grid or --samples is required",
                    ))
                }
            };
            let thresholds = default_thresholds(&values).map_err(CommandError::parameter)?;
            let curve = ccdf(&values, &thresholds).map_err(CommandError::parameter)?;
            let rows: Vec<Vec<Field>> = curve
                .thresholds
                .iter()
                .zip(&curve.prob)
                .map(|(&t, &p)| vec![Field::f4(t), Field::f6(p)])
                .collect();
            write_table(out, &["threshold_db", "ccdf"], &rows, cli.json)
                .map_err(|e| CommandError::output_io(out, e))?;
            finish(command_name, config_path, seed, &[out])
        }
    }
}

fn write_grid(grid: &RssGrid, out: &Path, json: bool) -> CmdResult<()> {
    if json {
        let rows: Vec<Vec<Field>> = grid
            .spec()
            .valid_cells()
            .map(|cell| {
                let center = grid.spec().cell_center(cell);
                vec![
                    Field::f4(center.x),
                    Field::f4(center.y),
                    Field::f4(grid.get(cell).expect("valid cell")),
                ]
            })
            .collect();
        write_table(out, &["x_m", "y_m", "rss_db"], &rows, true)
            .map_err(|e| CommandError::output_io(out, e))
    } else {
        save_grid(grid, out).map_err(|e| match e {
            CoreError::Io { path, source } => CommandError::output_io(&path, source),
            other => CommandError::parameter(other),
        })
    }
}

/// Raw sample CSV: header `rss_db`, one finite value per line.
fn load_samples(path: &Path) -> CmdResult<Vec<f64>> {
    let bad = |line: usize, message: String| {
        CommandError::grid_file(CoreError::GridFormat {
            path: path.to_path_buf(),
            line,
            message,
        })
    };
    let text = fs::read_to_string(path).map_err(|e| {
        CommandError::grid_file(CoreError::Io {
            path: path.to_path_buf(),
            source: e,
        })
    })?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header.trim_end_matches('\r') == "rss_db" => {}
        Some((_, header)) => {
            return Err(bad(1, format!("expected header 'rss_db', found '{header}'")))
        }
        None => {
            return Err(CommandError::grid_file(CoreError::NoValidCells(
                path.to_path_buf(),
            )))
        }
    }
    let mut values = Vec::new();
    for (idx, raw) in lines {
        let line = idx + 1;
        let trimmed = raw.trim_end_matches('\r');
        let value: f64 = trimmed
            .trim()
            .parse()
            .map_err(|_| bad(line, format!("cannot parse rss_db '{trimmed}'")))?;
        if !value.is_finite() {
            return Err(bad(line, "non-finite RSS value".into()));
        }
        values.push(value);
    }
    if values.is_empty() {
        return Err(CommandError::grid_file(CoreError::NoValidCells(
            path.to_path_buf(),
        )));
    }
    Ok(values)
}

fn finish(
    command: &str,
    config_path: Option<&Path>,
    seed: u64,
    outputs: &[&Path],
) -> CmdResult<()> {
    let manifest = RunManifest::new(command, config_path, seed, outputs);
    let primary = outputs.first().expect("every command has an output");
    manifest
        .write_beside(primary)
        .map_err(|e| CommandError::output_io(primary, e))?;
    Ok(())
}
