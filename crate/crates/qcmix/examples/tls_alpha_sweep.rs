//! Stationary occupation of the two-level system as a function of the
//! mixing parameter at zero temperature: the stable branch interpolates
//! monotonically from the quantum ground-state value (2+sqrt2)/4 to the
//! classical value 1.
//!
//! ```bash
//! cargo run --release --example tls_alpha_sweep
//! ```

use qcmix::engine::Temperature;
use qcmix::output::write_csv_mixed;
use qcmix::tls::{stable_branch, sweep_stationary, Stability, SweepAxis, TlsParams};
use std::path::PathBuf;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let base = TlsParams::new(1.0, 1.0, 0.5, Temperature::Zero)?;
    let values: Vec<f64> = (0..=100).map(|k| k as f64 / 100.0).collect();
    let rows = sweep_stationary(&base, SweepAxis::Alpha, &values)?;

    let columns = ["alpha", "branch", "z", "x", "y", "stability"]
        .map(String::from)
        .to_vec();
    let text_rows: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                format!("{}", r.parameter),
                r.branch.to_string(),
                format!("{}", r.z),
                format!("{}", r.x),
                format!("{}", r.y),
                match r.stability {
                    Stability::Stable => "stable".to_string(),
                    Stability::Unstable => "unstable".to_string(),
                },
            ]
        })
        .collect();

    let dir = std::env::var("QCMIX_OUT_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|_| PathBuf::from("qcmix-out"));
    let path = dir.join("tls_alpha_sweep.csv");
    write_csv_mixed(&path, &columns, &text_rows)?;

    let branch = stable_branch(&rows);
    println!(
        "stable branch: z(0) = {:.6} -> z(1) = {:.6} over {} grid points",
        branch.first().unwrap().1,
        branch.last().unwrap().1,
        branch.len()
    );
    println!("wrote {}", path.display());
    Ok(())
}
