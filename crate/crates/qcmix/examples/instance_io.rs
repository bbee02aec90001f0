//! Instance construction and JSON round-tripping: build the stock models,
//! inspect their classical spectra, and dump/load the portable JSON form.
//!
//! ```bash
//! cargo run --release --example instance_io
//! ```

use qcmix::ising::{classical_energies, husimi_temperley, quantum_signature, sk_random, IsingInstance};
use std::path::PathBuf;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for inst in [
        husimi_temperley(4)?,
        quantum_signature(),
        sk_random(6, 42)?,
    ] {
        let table = classical_energies(&inst);
        println!(
            "{}: {} spins, {} couplings, ground energy {:.4} with degeneracy {}",
            inst.label(),
            inst.n(),
            inst.pair_couplings().len(),
            table.ground_energy(),
            table.ground_indices().len()
        );
    }

    // Round-trip through the on-disk schema.
    let dir = std::env::var("QCMIX_OUT_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|_| PathBuf::from("qcmix-out"));
    std::fs::create_dir_all(&dir)?;
    let path = dir.join("sk_instance.json");
    let original = sk_random(6, 42)?;
    std::fs::write(&path, original.to_json_string())?;
    let loaded = IsingInstance::from_json_str(&std::fs::read_to_string(&path)?)?;
    assert_eq!(original, loaded);
    println!("round-tripped {} byte-exactly", path.display());
    Ok(())
}
