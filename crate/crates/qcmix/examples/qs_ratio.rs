//! The 8-spin quantum-signature model separates coherent from thermal
//! dynamics: its 17 degenerate ground states split into a 16-state cluster
//! and one isolated state, and the ratio P_I / P_C of their annealing
//! weights grows monotonically with the mixing parameter.
//!
//! ```bash
//! cargo run --release --example qs_ratio
//! ```

use qcmix::engine::{evolve_trajectory, InitialState, MixConfig, Temperature};
use qcmix::experiments::{pi_pc, QsLabels};
use qcmix::ising::quantum_signature;
use qcmix::output::write_csv;
use qcmix::schedule::Schedule;
use std::path::PathBuf;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let inst = quantum_signature();
    let labels = QsLabels::standard();
    let schedule = Schedule::power(0.5, 100.0, 1.0)?;
    let alphas = [0.0, 0.25, 0.5, 0.75, 1.0];

    let mut columns = vec!["t".to_string(), "s".to_string()];
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (k, &alpha) in alphas.iter().enumerate() {
        let mut cfg = MixConfig::new(alpha, Temperature::Zero, 1e-3)?;
        cfg.sample_every = 1000;
        let traj = evolve_trajectory(&inst, &schedule, &cfg, InitialState::UniformSuperposition)?;
        columns.push(format!("pi_pc_alpha_{alpha}"));
        for (i, sample) in traj.samples.iter().enumerate() {
            if k == 0 {
                rows.push(vec![sample.t, sample.s]);
            }
            let ratio = pi_pc(&sample.probs, &labels);
            rows[i].push(ratio);
        }
        println!(
            "alpha = {alpha:>4}: final P_I/P_C = {:.4}",
            pi_pc(&traj.final_sample().probs, &labels)
        );
    }

    let dir = std::env::var("QCMIX_OUT_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|_| PathBuf::from("qcmix-out"));
    let path = dir.join("qs_ratio.csv");
    write_csv(&path, &columns, &rows)?;
    println!("wrote {}", path.display());
    Ok(())
}
