//! Annealing experiment drivers: observables, stationary oracles, and the
//! spin-glass benchmark grid.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::engine::{
    evolve_trajectory, EngineError, InitialState, MixConfig, Temperature, Trajectory,
};
use crate::ising::{
    classical_energies, quantum_signature, sk_random, EnergyLevel, IsingError, IsingInstance,
};
use crate::schedule::{Schedule, ScheduleError};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Ising(#[from] IsingError),
    #[error(transparent)]
    Schedule(#[from] ScheduleError),
    #[error("the cluster/isolated ratio is only defined for the quantum-signature instance")]
    NotQuantumSignature,
    #[error("purity tracking requires n <= 8, instance has {0} spins")]
    PurityTooLarge(usize),
    #[error("dense stationary oracle limited to 10 spins, instance has {0}")]
    OracleTooLarge(usize),
    #[error(
        "stationary oracle did not converge within t = {max_time} \
         (last window drift {drift:.3e})"
    )]
    OracleNonConvergence { max_time: f64, drift: f64 },
    #[error("benchmark grid is empty")]
    EmptyGrid,
}

/// Core/outer spin labeling of the 8-spin quantum-signature model.
#[derive(Debug, Clone, Copy)]
pub struct QsLabels {
    core: [usize; 4],
    outer: [usize; 4],
}

impl QsLabels {
    pub fn standard() -> Self {
        Self {
            core: [0, 1, 2, 3],
            outer: [4, 5, 6, 7],
        }
    }

    /// Labels for `inst` if it is structurally the quantum-signature model.
    pub fn for_instance(inst: &IsingInstance) -> Option<Self> {
        (*inst == quantum_signature()).then(Self::standard)
    }

    pub fn core_spins(&self) -> &[usize; 4] {
        &self.core
    }

    pub fn outer_spins(&self) -> &[usize; 4] {
        &self.outer
    }

    /// The 16 degenerate cluster states: all core spins up, outer spins free.
    pub fn cluster_indices(&self) -> Vec<usize> {
        (0..16usize)
            .map(|m| {
                let mut idx = 0usize;
                for (bit, &spin) in self.outer.iter().enumerate() {
                    if m >> bit & 1 == 1 {
                        idx |= 1 << spin;
                    }
                }
                idx
            })
            .collect()
    }

    /// The isolated all-down ground state.
    pub fn isolated_index(&self) -> usize {
        self.core
            .iter()
            .chain(self.outer.iter())
            .fold(0usize, |acc, &spin| acc | 1 << spin)
    }
}

/// Isolated-state probability over the mean cluster-state probability.
/// Returns `+inf` when the cluster carries no probability at all.
pub fn pi_pc(probs: &[f64], labels: &QsLabels) -> f64 {
    let cluster = labels.cluster_indices();
    let p_c = cluster.iter().map(|&i| probs[i]).sum::<f64>() / cluster.len() as f64;
    let p_i = probs[labels.isolated_index()];
    if p_c == 0.0 {
        f64::INFINITY
    } else {
        p_i / p_c
    }
}

/// Quantities attached to a recorded trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Observable {
    /// Total probability per classical energy level, ascending in energy.
    LevelProbabilities,
    /// Total probability on the classical ground set.
    GroundProbability,
    /// Isolated/cluster probability ratio (quantum-signature instance only).
    PiPcRatio,
    /// Dense purity defect of the pure state (`n <= 8`).
    PurityDefect,
    /// Every basis-state probability.
    StateDump,
}

#[derive(Debug, Clone, Serialize)]
pub struct ObservableSpec {
    pub selection: Vec<Observable>,
}

impl ObservableSpec {
    pub fn new(selection: Vec<Observable>) -> Self {
        Self { selection }
    }

    fn validate(&self, inst: &IsingInstance) -> Result<(), ExperimentError> {
        if self.selection.contains(&Observable::PiPcRatio)
            && QsLabels::for_instance(inst).is_none()
        {
            return Err(ExperimentError::NotQuantumSignature);
        }
        if self.selection.contains(&Observable::PurityDefect) && inst.n() > 8 {
            return Err(ExperimentError::PurityTooLarge(inst.n()));
        }
        Ok(())
    }
}

/// A trajectory plus the requested observables tabulated per sample
/// (columns start with `t` and `s`).
#[derive(Debug, Clone)]
pub struct AnnealingRun {
    pub trajectory: Trajectory,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub levels: Vec<EnergyLevel>,
}

/// Evolve from the uniform superposition under `schedule` and attach the
/// requested observables.
pub fn run_annealing(
    inst: &IsingInstance,
    schedule: &Schedule,
    config: &MixConfig,
    observables: &ObservableSpec,
) -> Result<AnnealingRun, ExperimentError> {
    observables.validate(inst)?;
    let mut config = *config;
    if observables.selection.contains(&Observable::PurityDefect) {
        config.track_purity = true;
    }
    let spectrum = classical_energies(inst);
    let levels = spectrum.levels();
    let labels = QsLabels::for_instance(inst);

    let trajectory = evolve_trajectory(inst, schedule, &config, InitialState::UniformSuperposition)?;

    let mut columns = vec!["t".to_string(), "s".to_string()];
    for obs in &observables.selection {
        match obs {
            Observable::LevelProbabilities => {
                for k in 0..levels.len() {
                    columns.push(format!("p_level_{k}"));
                }
            }
            Observable::GroundProbability => columns.push("p_ground".to_string()),
            Observable::PiPcRatio => columns.push("pi_pc".to_string()),
            Observable::PurityDefect => columns.push("purity_defect".to_string()),
            Observable::StateDump => {
                for i in 0..inst.dim() {
                    columns.push(format!("p_state_{i}"));
                }
            }
        }
    }

    let ground = spectrum.ground_indices().to_vec();
    let mut rows = Vec::with_capacity(trajectory.samples.len());
    for sample in &trajectory.samples {
        let mut row = vec![sample.t, sample.s];
        for obs in &observables.selection {
            match obs {
                Observable::LevelProbabilities => {
                    for level in &levels {
                        row.push(level.indices.iter().map(|&i| sample.probs[i]).sum());
                    }
                }
                Observable::GroundProbability => {
                    row.push(ground.iter().map(|&i| sample.probs[i]).sum());
                }
                Observable::PiPcRatio => {
                    row.push(pi_pc(&sample.probs, labels.as_ref().expect("validated")));
                }
                Observable::PurityDefect => {
                    row.push(sample.purity_defect.expect("tracking enabled"));
                }
                Observable::StateDump => row.extend_from_slice(&sample.probs),
            }
        }
        rows.push(row);
    }

    Ok(AnnealingRun {
        trajectory,
        columns,
        rows,
        levels,
    })
}

/// Total probability on the classical ground set.
pub fn ground_probability(probs: &[f64], ground_indices: &[usize]) -> f64 {
    ground_indices.iter().map(|&i| probs[i]).sum()
}

/// Controls for the long-time stationary oracle.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct OracleConfig {
    pub dt: f64,
    /// Averaging window length in time units.
    pub window: f64,
    /// Convergence threshold on the change between consecutive window means.
    pub drift_tol: f64,
    pub max_time: f64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            window: 10.0,
            drift_tol: 1e-6,
            max_time: 2000.0,
        }
    }
}

/// Per-level stationary probabilities at fixed `s`.
///
/// Two modes: at `alpha = 0` the stationary state is the ground eigenvector
/// of `H(s)`, obtained by dense diagonalization; otherwise the mixed engine
/// is integrated at constant `s` until the window-averaged level
/// probabilities stop drifting, and the converged window average is
/// returned.
pub fn stationary_oracle(
    inst: &IsingInstance,
    s: f64,
    alpha: f64,
    temperature: Temperature,
) -> Result<Vec<f64>, ExperimentError> {
    stationary_oracle_with(inst, s, alpha, temperature, &OracleConfig::default())
}

pub fn stationary_oracle_with(
    inst: &IsingInstance,
    s: f64,
    alpha: f64,
    temperature: Temperature,
    oracle: &OracleConfig,
) -> Result<Vec<f64>, ExperimentError> {
    if inst.n() > 10 {
        return Err(ExperimentError::OracleTooLarge(inst.n()));
    }
    let spectrum = classical_energies(inst);
    let levels = spectrum.levels();

    if alpha == 0.0 {
        let dim = inst.dim();
        let mut m = DMatrix::<f64>::zeros(dim, dim);
        for i in 0..dim {
            m[(i, i)] = s * spectrum.energy(i);
            for k in 0..inst.n() {
                m[(i, i ^ (1 << k))] = -(1.0 - s);
            }
        }
        let eig = m.symmetric_eigen();
        let mut ground = 0;
        for k in 1..dim {
            if eig.eigenvalues[k] < eig.eigenvalues[ground] {
                ground = k;
            }
        }
        let v = eig.eigenvectors.column(ground);
        return Ok(levels
            .iter()
            .map(|level| level.indices.iter().map(|&i| v[i] * v[i]).sum())
            .collect());
    }

    let mut config = MixConfig::new(alpha, temperature, oracle.dt)?;
    // Keep roughly a hundred samples per averaging window.
    config.sample_every = ((oracle.window / oracle.dt / 100.0).ceil() as usize).max(1);
    let window_schedule = Schedule::constant(s, oracle.window)?;

    let mut state = InitialState::UniformSuperposition;
    let mut prev_mean: Option<Vec<f64>> = None;
    let mut elapsed = 0.0;
    let mut drift = f64::INFINITY;
    while elapsed < oracle.max_time {
        let traj = evolve_trajectory(inst, &window_schedule, &config, state)?;
        elapsed += oracle.window;
        let mut mean = vec![0.0; levels.len()];
        let mut count = 0usize;
        for sample in traj.samples.iter().filter(|s| s.t > 0.0) {
            for (k, level) in levels.iter().enumerate() {
                mean[k] += level.indices.iter().map(|&i| sample.probs[i]).sum::<f64>();
            }
            count += 1;
        }
        for v in &mut mean {
            *v /= count as f64;
        }
        if let Some(prev) = &prev_mean {
            drift = prev
                .iter()
                .zip(&mean)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            if drift < oracle.drift_tol {
                return Ok(mean);
            }
        }
        prev_mean = Some(mean);
        state = InitialState::Custom {
            psi: traj.final_psi,
            classical: traj.final_classical,
        };
    }
    Err(ExperimentError::OracleNonConvergence {
        max_time: oracle.max_time,
        drift,
    })
}

/// One benchmark grid.
#[derive(Debug, Clone, Serialize)]
pub struct SkBenchConfig {
    pub n: usize,
    pub seeds: Vec<u64>,
    pub alphas: Vec<f64>,
    pub taus: Vec<f64>,
    pub gammas: Vec<f64>,
    pub temperature: Temperature,
    pub dt: f64,
    /// Schedule scale; the ramp ends at `s = scale`.
    pub scale: f64,
}

/// Final ground-state probability of one grid cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CellResult {
    pub seed: u64,
    pub alpha: f64,
    pub tau: f64,
    pub gamma: f64,
    pub p_ground: f64,
}

/// Mean and standard error over seeds at one `(alpha, tau, gamma)` point.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct AggregateRow {
    pub alpha: f64,
    pub tau: f64,
    pub gamma: f64,
    pub mean: f64,
    pub std_err: f64,
    pub n_instances: usize,
}

#[derive(Debug, Clone)]
pub struct BenchmarkResult {
    /// Sorted by `(alpha, tau, gamma, seed)`.
    pub per_instance: Vec<CellResult>,
    pub aggregates: Vec<AggregateRow>,
}

fn cell_key(c: &CellResult) -> (u64, u64, u64, u64) {
    (c.alpha.to_bits(), c.tau.to_bits(), c.gamma.to_bits(), c.seed)
}

/// Recompute the aggregates from per-instance rows: seeds are averaged in
/// ascending order, so a rerun over persisted rows reproduces the reported
/// means bit for bit.
pub fn aggregate_cells(cells: &[CellResult]) -> Vec<AggregateRow> {
    let mut sorted = cells.to_vec();
    sorted.sort_by_key(cell_key);
    let mut out: Vec<AggregateRow> = Vec::new();
    let mut group: Vec<&CellResult> = Vec::new();
    let flush = |group: &mut Vec<&CellResult>, out: &mut Vec<AggregateRow>| {
        if group.is_empty() {
            return;
        }
        let k = group.len();
        let mean = group.iter().map(|c| c.p_ground).sum::<f64>() / k as f64;
        let std_err = if k > 1 {
            let var = group
                .iter()
                .map(|c| (c.p_ground - mean).powi(2))
                .sum::<f64>()
                / (k - 1) as f64;
            (var / k as f64).sqrt()
        } else {
            0.0
        };
        let first = group[0];
        out.push(AggregateRow {
            alpha: first.alpha,
            tau: first.tau,
            gamma: first.gamma,
            mean,
            std_err,
            n_instances: k,
        });
        group.clear();
    };
    for cell in &sorted {
        if let Some(prev) = group.last() {
            if (prev.alpha, prev.tau, prev.gamma) != (cell.alpha, cell.tau, cell.gamma) {
                flush(&mut group, &mut out);
            }
        }
        group.push(cell);
    }
    flush(&mut group, &mut out);
    out
}

/// Run the full `(seed, alpha, tau, gamma)` grid of annealing runs in
/// parallel and aggregate the final ground-state probabilities. The result
/// is fully deterministic given the seed list: cells are independent and the
/// output is sorted by grid key. `on_cell` is invoked as cells complete
/// (completion order is not deterministic) so partial results can be
/// persisted; `precomputed` cells are trusted and skipped.
pub fn sk_benchmark(
    cfg: &SkBenchConfig,
    precomputed: &[CellResult],
    on_cell: Option<&(dyn Fn(&CellResult) + Sync)>,
) -> Result<BenchmarkResult, ExperimentError> {
    if cfg.seeds.is_empty() || cfg.alphas.is_empty() || cfg.taus.is_empty() || cfg.gammas.is_empty()
    {
        return Err(ExperimentError::EmptyGrid);
    }
    let mut instances = Vec::new();
    for &seed in &cfg.seeds {
        let inst = sk_random(cfg.n, seed)?;
        let spectrum = classical_energies(&inst);
        let ground = spectrum.ground_indices().to_vec();
        instances.push((seed, inst, ground));
    }

    let done: std::collections::HashSet<(u64, u64, u64, u64)> =
        precomputed.iter().map(cell_key).collect();

    let mut pending = Vec::new();
    for (idx, (seed, _, _)) in instances.iter().enumerate() {
        for &alpha in &cfg.alphas {
            for &tau in &cfg.taus {
                for &gamma in &cfg.gammas {
                    let key = (alpha.to_bits(), tau.to_bits(), gamma.to_bits(), *seed);
                    if !done.contains(&key) {
                        pending.push((idx, alpha, tau, gamma));
                    }
                }
            }
        }
    }

    let computed: Result<Vec<CellResult>, ExperimentError> = pending
        .par_iter()
        .map(|&(idx, alpha, tau, gamma)| {
            let (seed, inst, ground) = &instances[idx];
            let schedule = Schedule::power(gamma, tau, cfg.scale)?;
            let mut config = MixConfig::new(alpha, cfg.temperature, cfg.dt)?;
            config.sample_every = usize::MAX / 2;
            let traj =
                evolve_trajectory(inst, &schedule, &config, InitialState::UniformSuperposition)?;
            let cell = CellResult {
                seed: *seed,
                alpha,
                tau,
                gamma,
                p_ground: ground_probability(&traj.final_sample().probs, ground),
            };
            if let Some(cb) = on_cell {
                cb(&cell);
            }
            Ok(cell)
        })
        .collect();

    let mut per_instance = computed?;
    per_instance.extend_from_slice(precomputed);
    per_instance.sort_by_key(cell_key);
    let aggregates = aggregate_cells(&per_instance);
    Ok(BenchmarkResult {
        per_instance,
        aggregates,
    })
}
