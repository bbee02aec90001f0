//! Interpolated quantum-classical spin dynamics.
//!
//! A pure quantum state and a classical probability vector evolve side by
//! side — one under the Schrodinger equation, the other under a heat-bath
//! master equation — and are blended after every step by a mixing parameter
//! `alpha`. The blend keeps the quantum subsystem in a pure state at every
//! `alpha`, giving a one-knob bridge between coherent quantum annealing
//! (`alpha = 0`) and zero-temperature simulated annealing (`alpha = 1`).
//!
//! Modules:
//! - [`ising`]: problem instances (uniform ferromagnet, the 8-spin
//!   quantum-signature model, Sherrington-Kirkpatrick glasses, custom JSON),
//!   exact classical spectra, and the matrix-free annealing Hamiltonian.
//! - [`engine`]: the mixed evolution itself — subsystem RK4 steps, the
//!   amplitude blend, trajectory recording, purity diagnostics.
//! - [`tls`]: closed-form two-level dynamics, stationary-state solving with
//!   stability classification, parameter sweeps, and the optical-Bloch
//!   comparison.
//! - [`experiments`]: annealing drivers, observables (level probabilities,
//!   ground-state probability, the cluster/isolated ratio of the
//!   quantum-signature model), stationary oracles, and the spin-glass
//!   benchmark grid.
//! - [`schedule`]: quench and power-law annealing schedules.
//! - [`output`]: deterministic CSV/JSON/summary writers.
//! - [`cli`]: the `qcmix` command-line front end.
//!
//! Each major capability also has a runnable example under `examples/`:
//!
//! ```bash
//! cargo run --release --example tls_relaxation
//! cargo run --release --example tls_alpha_sweep
//! cargo run --release --example tls_temperature_sweep
//! cargo run --release --example ht_quench
//! cargo run --release --example ht_anneal
//! cargo run --release --example qs_ratio
//! cargo run --release --example sk_benchmark
//! cargo run --release --example instance_io
//! ```

pub mod cli;
pub mod engine;
pub mod experiments;
pub mod ising;
pub mod output;
pub mod schedule;
pub mod tls;

pub use engine::{
    density_check, evolve_fixed_weights, evolve_step, evolve_trajectory, master_rhs, mix_update,
    schrodinger_rhs, ClassicalDistribution, EngineError, InitialState, MixConfig, PureState,
    Sample, Temperature, Trajectory,
};
pub use ising::{
    apply_total_hamiltonian, classical_energies, husimi_temperley, quantum_signature, sk_random,
    EnergyLevel, IsingError, IsingInstance, SpectrumTable,
};
pub use schedule::{Schedule, ScheduleError};
