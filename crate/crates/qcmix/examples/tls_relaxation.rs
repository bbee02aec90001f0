//! Two-level relaxation under the blended dynamics: the mixing parameter
//! sets the relaxation rate toward the stationary occupation.
//!
//! ```bash
//! cargo run --release --example tls_relaxation
//! ```

use qcmix::engine::Temperature;
use qcmix::output::write_csv;
use qcmix::tls::{settle_time, tls_evolve, tls_stationary, Stability, TlsParams, TlsState};
use std::path::PathBuf;

fn out_dir() -> PathBuf {
    std::env::var("QCMIX_OUT_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|_| PathBuf::from("qcmix-out"))
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let start = TlsState::new(0.5, 0.0)?; // uniform superposition
    let mut columns = vec!["t".to_string()];
    let mut series: Vec<Vec<f64>> = Vec::new();

    for (k, alpha) in [0.1, 0.2].into_iter().enumerate() {
        let params = TlsParams::new(1.0, 1.0, alpha, Temperature::Zero)?;
        let samples = tls_evolve(&params, &start, 1e-3, 120.0, 50)?;
        let stable_z = tls_stationary(&params)?
            .into_iter()
            .find(|p| p.stability == Stability::Stable)
            .expect("stable stationary point")
            .z;
        let settle = settle_time(&samples, stable_z, 0.01).expect("relaxes");
        println!(
            "alpha = {alpha}: stationary z = {stable_z:.6}, settles within 0.01 after t = {settle:.1}"
        );
        columns.push(format!("z_alpha_{alpha}"));
        if k == 0 {
            for s in &samples {
                series.push(vec![s.t, s.z]);
            }
        } else {
            for (row, s) in series.iter_mut().zip(&samples) {
                row.push(s.z);
            }
        }
    }

    let path = out_dir().join("tls_relaxation.csv");
    write_csv(&path, &columns, &series)?;
    println!("wrote {}", path.display());
    Ok(())
}
