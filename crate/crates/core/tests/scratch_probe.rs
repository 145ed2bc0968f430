// Temporary calibration probe; deleted before finishing.

use reflector_core::backoff::{compute_backoff_map, neighborhood_power};
use reflector_core::config::SimConfig;
use reflector_core::grid::high_rss_region;
use reflector_core::scheduler::diversity_samples;
use reflector_core::stats::{ccdf, default_thresholds, spearman};
use reflector_core::synth::synthesize_rss_grid;

#[test]
fn probe_spearman_and_dominance() {
    let config = SimConfig::default();
    let spec = config.grid.to_spec().unwrap();
    let mut worst_rho: f64 = 0.0;
    let mut worst_margin: f64 = 1.0;
    for seed in 100..120u64 {
        let mut params = config.synth.clone();
        params.seed = seed;
        let grid = synthesize_rss_grid(&config.scene, &spec, &params).unwrap();
        let map = compute_backoff_map(&grid, 0.5, 10.0).unwrap();
        let cells: Vec<_> = grid.spec().valid_cells().collect();
        let g: Vec<f64> = cells
            .iter()
            .map(|&c| neighborhood_power(&grid, c).unwrap())
            .collect();
        let d: Vec<f64> = cells.iter().map(|&c| map.delta(c).unwrap()).collect();
        let rho = spearman(&d, &g).unwrap();
        let capped = d.iter().filter(|&&x| x >= 10.0).count();
        let rng_db = grid.max_rss() - grid.min_rss();
        if rho > worst_rho {
            worst_rho = rho;
        }
        println!("seed {seed}: rho {rho:.5}, capped {capped}/102, range {rng_db:.1} dB");

        // diversity dominance margins
        let region = high_rss_region(&grid, 0.25).unwrap();
        for k in [1usize, 2, 4] {
            let a = diversity_samples(&grid, &region, k, 10_000, 5000 + seed).unwrap();
            let b = diversity_samples(&grid, &region, k + 1, 10_000, 5000 + seed).unwrap();
            let pooled: Vec<f64> = a.iter().chain(b.iter()).cloned().collect();
            let thr = default_thresholds(&pooled).unwrap();
            let ca = ccdf(&a, &thr).unwrap();
            let cb = ccdf(&b, &thr).unwrap();
            let margin = cb
                .prob
                .iter()
                .zip(&ca.prob)
                .map(|(&pb, &pa)| pb - pa)
                .fold(f64::INFINITY, f64::min);
            if margin < worst_margin {
                worst_margin = margin;
                println!("  k {k}: min margin {margin:.4} (seed {seed})");
            }
        }
    }
    println!("WORST rho {worst_rho:.5}, WORST dominance margin {worst_margin:.4}");
}
