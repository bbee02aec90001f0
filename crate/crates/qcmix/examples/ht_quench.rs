//! Relaxation of the 4-spin uniform ferromagnet after a sudden quench to
//! s = 0.8: the three energy-level probabilities ring down onto the
//! long-time stationary values of the blended dynamics.
//!
//! ```bash
//! cargo run --release --example ht_quench
//! ```

use qcmix::engine::{MixConfig, Temperature};
use qcmix::experiments::{run_annealing, stationary_oracle, Observable, ObservableSpec};
use qcmix::ising::husimi_temperley;
use qcmix::output::write_csv;
use qcmix::schedule::Schedule;
use std::path::PathBuf;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let inst = husimi_temperley(4)?;
    let mut cfg = MixConfig::new(0.1, Temperature::Zero, 1e-3)?;
    cfg.sample_every = 100;
    let schedule = Schedule::constant(0.8, 100.0)?;
    let spec = ObservableSpec::new(vec![Observable::LevelProbabilities]);
    let run = run_annealing(&inst, &schedule, &cfg, &spec)?;

    let oracle = stationary_oracle(&inst, 0.8, 0.1, Temperature::Zero)?;
    println!("stationary level probabilities: {oracle:?}");
    let last = run.rows.last().unwrap();
    for (k, level) in run.levels.iter().enumerate() {
        println!(
            "level {k} (E = {:+.2}, {} states): p(t=100) = {:.5} vs stationary {:.5}",
            level.energy,
            level.indices.len(),
            last[2 + k],
            oracle[k]
        );
    }

    let dir = std::env::var("QCMIX_OUT_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|_| PathBuf::from("qcmix-out"));
    let path = dir.join("ht_quench.csv");
    write_csv(&path, &run.columns, &run.rows)?;
    println!("wrote {}", path.display());
    Ok(())
}
