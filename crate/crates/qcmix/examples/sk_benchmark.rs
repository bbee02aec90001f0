//! Spin-glass benchmark: average final ground-state probability over random
//! instances as a function of mixing parameter and annealing time. Fast
//! ramps favor pure thermal relaxation, slow ramps favor coherent
//! annealing, and in between a blend of the two wins.
//!
//! This is a reduced grid sized to run in about a minute; the `sk-bench`
//! subcommand exposes the full configurable version.
//!
//! ```bash
//! cargo run --release --example sk_benchmark
//! ```

use qcmix::engine::Temperature;
use qcmix::experiments::{sk_benchmark, SkBenchConfig};
use qcmix::output::write_csv;
use std::path::PathBuf;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let alphas: Vec<f64> = (0..=5).map(|k| k as f64 / 5.0).collect();
    let cfg = SkBenchConfig {
        n: 6,
        seeds: (42..50).collect(),
        alphas: alphas.clone(),
        taus: vec![2.0, 10.0, 50.0],
        gammas: vec![0.4],
        temperature: Temperature::Zero,
        dt: 1e-3,
        scale: 1.0,
    };
    let result = sk_benchmark(&cfg, &[], None)?;

    let mut rows = Vec::new();
    for agg in &result.aggregates {
        rows.push(vec![agg.alpha, agg.tau, agg.gamma, agg.mean, agg.std_err]);
    }
    for &tau in &cfg.taus {
        let best = result
            .aggregates
            .iter()
            .filter(|a| a.tau == tau)
            .max_by(|x, y| x.mean.total_cmp(&y.mean))
            .unwrap();
        println!(
            "tau = {tau:>4}: best alpha = {} (mean p_ground = {:.3} +- {:.3})",
            best.alpha, best.mean, best.std_err
        );
    }

    let dir = std::env::var("QCMIX_OUT_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|_| PathBuf::from("qcmix-out"));
    let path = dir.join("sk_benchmark.csv");
    let columns = ["alpha", "tau", "gamma", "mean", "std_err"]
        .map(String::from)
        .to_vec();
    write_csv(&path, &columns, &rows)?;
    println!("wrote {}", path.display());
    Ok(())
}
