//! Interpolated quantum-classical evolution.
//!
//! A pure state and a classical probability vector evolve side by side: the
//! state under the Schrodinger equation for `H(s)`, the probabilities under
//! a heat-bath single-spin-flip master equation for the diagonal
//! Hamiltonian. After each step of length `dt` the two solutions are blended
//! amplitude by amplitude,
//!
//! ```text
//! r_i^2 = (1 - alpha) |a_i|^2 + alpha P_i,
//! a_i  <- r_i * a_i / |a_i|,      P_i <- r_i^2,
//! ```
//!
//! which keeps the quantum subsystem in a pure state for every `alpha`.
//! Each subsystem is advanced with classical RK4, so the observable step
//! error is dominated by the splitting and is first order in `dt`.

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::ising::{classical_energies, HamiltonianOp, IsingError, IsingInstance, SpectrumTable};
use crate::schedule::{Schedule, ScheduleError};

/// Amplitude magnitude below which the phase factor defaults to 1.
pub const PHASE_FLOOR_DEFAULT: f64 = 1e-15;

/// Largest pre-renormalization defect tolerated per step; anything bigger
/// means the step size is too coarse or a subsystem integrator is broken.
pub const RENORM_DEFECT_MAX: f64 = 1e-9;

/// Master-equation RK4 output may round a fully drained probability a hair
/// below zero; anything more negative than this is treated as a bug.
const PROBABILITY_FLOOR: f64 = -1e-12;

#[derive(Debug, Error)]
pub enum EngineError {
    #[error(transparent)]
    Ising(#[from] IsingError),
    #[error(transparent)]
    Schedule(#[from] ScheduleError),
    #[error("temperature must be finite and non-negative, got {0}")]
    InvalidTemperature(f64),
    #[error("mixing parameter must lie in [0, 1], got {0}")]
    AlphaOutOfRange(f64),
    #[error("step size must be positive and finite, got {0}")]
    InvalidStepSize(f64),
    #[error("phase floor must be positive, got {0}")]
    InvalidPhaseFloor(f64),
    #[error("sample stride must be at least 1")]
    InvalidSampleStride,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("state vector length {0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("state vector has zero or non-finite norm")]
    DegenerateState,
    #[error("probability vector has negative, non-finite, or zero-sum entries")]
    DegenerateDistribution,
    #[error(
        "pre-renormalization defect {defect:.3e} at t = {t} exceeds {max:.1e}; \
         reduce dt or investigate the subsystem integrators"
    )]
    NormalizationDrift { t: f64, defect: f64, max: f64 },
    #[error("master step produced probability {value:.3e} at state {index}")]
    NegativeProbability { index: usize, value: f64 },
    #[error("dense density check limited to 8 spins, instance has {0}")]
    DensityCheckTooLarge(usize),
    #[error("evolution horizon must be positive, got {0}")]
    NonPositiveHorizon(f64),
    #[error("non-finite Hamiltonian weights ({0}, {1})")]
    NonFiniteWeights(f64, f64),
}

/// Bath temperature. `Zero` is symbolic (infinite beta) so the zero-
/// temperature flip rule is exact instead of overflowing `exp`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Temperature {
    Zero,
    Finite(f64),
}

impl Temperature {
    pub fn new(t: f64) -> Result<Self, EngineError> {
        if t.is_nan() || t < 0.0 {
            return Err(EngineError::InvalidTemperature(t));
        }
        if t == 0.0 {
            Ok(Temperature::Zero)
        } else {
            Ok(Temperature::Finite(t))
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Temperature::Zero)
    }

    /// Inverse temperature; `None` means infinite.
    pub fn beta(&self) -> Option<f64> {
        match *self {
            Temperature::Zero => None,
            Temperature::Finite(t) => Some(1.0 / t),
        }
    }

    pub fn value(&self) -> f64 {
        match *self {
            Temperature::Zero => 0.0,
            Temperature::Finite(t) => t,
        }
    }
}

impl Serialize for Temperature {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_f64(self.value())
    }
}

impl<'de> Deserialize<'de> for Temperature {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let t = f64::deserialize(deserializer)?;
        Temperature::new(t).map_err(serde::de::Error::custom)
    }
}

/// Normalized complex amplitudes over the `2^n` basis states.
#[derive(Debug, Clone)]
pub struct PureState {
    amps: Vec<Complex64>,
}

impl PureState {
    /// Equal superposition of all basis states.
    pub fn uniform_superposition(n: usize) -> Self {
        let dim = 1usize << n;
        let amp = Complex64::new(1.0 / (dim as f64).sqrt(), 0.0);
        Self {
            amps: vec![amp; dim],
        }
    }

    pub fn basis_state(n: usize, index: usize) -> Self {
        let dim = 1usize << n;
        assert!(index < dim, "basis index out of range");
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        amps[index] = Complex64::new(1.0, 0.0);
        Self { amps }
    }

    /// Wrap and normalize an amplitude vector (length must be a power of two).
    pub fn from_amplitudes(mut amps: Vec<Complex64>) -> Result<Self, EngineError> {
        let dim = amps.len();
        if dim == 0 || !dim.is_power_of_two() {
            return Err(EngineError::NotPowerOfTwo(dim));
        }
        let norm_sqr: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if !norm_sqr.is_finite() || norm_sqr <= 0.0 {
            return Err(EngineError::DegenerateState);
        }
        let inv = 1.0 / norm_sqr.sqrt();
        for a in &mut amps {
            *a *= inv;
        }
        Ok(Self { amps })
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn n_spins(&self) -> usize {
        self.amps.len().trailing_zeros() as usize
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    /// `|sum |a_i|^2 - 1|`.
    pub fn norm_defect(&self) -> f64 {
        (self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>() - 1.0).abs()
    }
}

/// Normalized probabilities over the `2^n` basis states.
#[derive(Debug, Clone)]
pub struct ClassicalDistribution {
    probs: Vec<f64>,
}

impl ClassicalDistribution {
    pub fn uniform(n: usize) -> Self {
        let dim = 1usize << n;
        Self {
            probs: vec![1.0 / dim as f64; dim],
        }
    }

    /// Wrap and normalize a non-negative vector (length must be a power of two).
    pub fn from_probabilities(mut probs: Vec<f64>) -> Result<Self, EngineError> {
        let dim = probs.len();
        if dim == 0 || !dim.is_power_of_two() {
            return Err(EngineError::NotPowerOfTwo(dim));
        }
        if probs.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(EngineError::DegenerateDistribution);
        }
        let sum: f64 = probs.iter().sum();
        if sum <= 0.0 {
            return Err(EngineError::DegenerateDistribution);
        }
        let inv = 1.0 / sum;
        for p in &mut probs {
            *p *= inv;
        }
        Ok(Self { probs })
    }

    /// Diagonal of the pure state: `P_i = |a_i|^2`.
    pub fn from_pure_state(psi: &PureState) -> Self {
        Self {
            probs: psi.probabilities(),
        }
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probs
    }

    pub fn dim(&self) -> usize {
        self.probs.len()
    }

    pub fn sum_defect(&self) -> f64 {
        (self.probs.iter().sum::<f64>() - 1.0).abs()
    }
}

/// Parameters of one mixed evolution.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct MixConfig {
    /// Mixing parameter: 0 is pure Schrodinger evolution, 1 is pure
    /// master-equation relaxation.
    pub alpha: f64,
    pub temperature: Temperature,
    /// Integration step.
    pub dt: f64,
    /// Amplitude magnitude below which the phase factor defaults to 1.
    pub phase_floor: f64,
    /// Record one sample every this many steps (plus the final step).
    pub sample_every: usize,
    /// Run the dense purity check at each sample (needs `n <= 8`).
    pub track_purity: bool,
}

impl MixConfig {
    pub fn new(alpha: f64, temperature: Temperature, dt: f64) -> Result<Self, EngineError> {
        let cfg = Self {
            alpha,
            temperature,
            dt,
            phase_floor: PHASE_FLOOR_DEFAULT,
            sample_every: 100,
            track_purity: false,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), EngineError> {
        if !self.alpha.is_finite() || !(0.0..=1.0).contains(&self.alpha) {
            return Err(EngineError::AlphaOutOfRange(self.alpha));
        }
        if !self.dt.is_finite() || self.dt <= 0.0 {
            return Err(EngineError::InvalidStepSize(self.dt));
        }
        if !self.phase_floor.is_finite() || self.phase_floor <= 0.0 {
            return Err(EngineError::InvalidPhaseFloor(self.phase_floor));
        }
        if self.sample_every == 0 {
            return Err(EngineError::InvalidSampleStride);
        }
        Ok(())
    }
}

/// Heat-bath transition rate into the state with energy `e_to` from a
/// single-flip neighbor with energy `e_from`:
/// `exp(-beta e_to) / (exp(-beta e_to) + exp(-beta e_from))`, evaluated in
/// the overflow-free form `1 / (1 + exp(beta (e_to - e_from)))`. At zero
/// temperature the limit is 1 downhill, 1/2 on a tie, 0 uphill, with ties
/// decided by the spectrum's degeneracy tolerance.
#[inline]
fn flip_rate(e_to: f64, e_from: f64, beta: Option<f64>, tie_tol: f64) -> f64 {
    match beta {
        Some(b) => 1.0 / (1.0 + (b * (e_to - e_from)).exp()),
        None => {
            if (e_to - e_from).abs() <= tie_tol {
                0.5
            } else if e_to < e_from {
                1.0
            } else {
                0.0
            }
        }
    }
}

fn master_rhs_into(
    probs: &[f64],
    n: usize,
    spectrum: &SpectrumTable,
    beta: Option<f64>,
    out: &mut [f64],
) {
    let energies = spectrum.energies();
    let tie_tol = spectrum.tie_tolerance();
    for i in 0..probs.len() {
        let e_i = energies[i];
        let mut acc = 0.0;
        for k in 0..n {
            let j = i ^ (1 << k);
            let e_j = energies[j];
            let rate_in = flip_rate(e_i, e_j, beta, tie_tol);
            let rate_out = flip_rate(e_j, e_i, beta, tie_tol);
            acc += rate_in * probs[j] - rate_out * probs[i];
        }
        out[i] = acc;
    }
}

/// `dP/dt = L P` for the heat-bath single-spin-flip rate matrix of the
/// diagonal Hamiltonian. Matrix-free: each state talks only to its `n`
/// single-flip neighbors. Columns of the implied dense `L` sum to zero and
/// its off-diagonal entries satisfy detailed balance with the Boltzmann
/// distribution.
pub fn master_rhs(
    p: &ClassicalDistribution,
    spectrum: &SpectrumTable,
    temperature: Temperature,
) -> Result<Vec<f64>, EngineError> {
    if p.dim() != spectrum.dim() {
        return Err(EngineError::DimensionMismatch {
            expected: spectrum.dim(),
            got: p.dim(),
        });
    }
    let n = p.dim().trailing_zeros() as usize;
    let mut out = vec![0.0; p.dim()];
    master_rhs_into(p.probabilities(), n, spectrum, temperature.beta(), &mut out);
    Ok(out)
}

#[inline]
fn times_minus_i(v: Complex64) -> Complex64 {
    Complex64::new(v.im, -v.re)
}

fn schrodinger_rhs_into(
    op: &HamiltonianOp,
    w_c: f64,
    w_q: f64,
    a: &[Complex64],
    out: &mut [Complex64],
) {
    op.apply_weighted_into(w_c, w_q, a, out);
    for v in out.iter_mut() {
        *v = times_minus_i(*v);
    }
}

/// `da/dt = -i H(s) a`.
pub fn schrodinger_rhs(
    psi: &PureState,
    inst: &IsingInstance,
    s: f64,
) -> Result<Vec<Complex64>, EngineError> {
    if psi.dim() != inst.dim() {
        return Err(EngineError::DimensionMismatch {
            expected: inst.dim(),
            got: psi.dim(),
        });
    }
    let spectrum = classical_energies(inst);
    let op = HamiltonianOp::new(inst, &spectrum)?;
    let mut out = vec![Complex64::new(0.0, 0.0); psi.dim()];
    schrodinger_rhs_into(&op, s, 1.0 - s, psi.amplitudes(), &mut out);
    Ok(out)
}

/// Blend the two subsystem solutions and renormalize both by their exact
/// sums. Returns the pre-renormalization defect `|sum r_i^2 - 1|`.
///
/// At `alpha = 0` the amplitudes pass through untouched; at `alpha = 1` the
/// probabilities do. The phase factor `a_i / |a_i|` defaults to 1 whenever
/// `|a_i|` falls below `phase_floor`.
fn mix_update_raw(
    amps: &mut [Complex64],
    probs: &mut [f64],
    alpha: f64,
    phase_floor: f64,
    t: f64,
) -> Result<f64, EngineError> {
    let mut sum_r2 = 0.0;
    if alpha == 0.0 {
        for i in 0..amps.len() {
            let r2 = amps[i].norm_sqr();
            probs[i] = r2;
            sum_r2 += r2;
        }
    } else if alpha == 1.0 {
        for i in 0..amps.len() {
            let r2 = probs[i];
            let mag = amps[i].norm();
            let phase = if mag >= phase_floor {
                amps[i] / mag
            } else {
                Complex64::new(1.0, 0.0)
            };
            amps[i] = phase * r2.sqrt();
            sum_r2 += r2;
        }
    } else {
        for i in 0..amps.len() {
            let r2 = (1.0 - alpha) * amps[i].norm_sqr() + alpha * probs[i];
            assert!(r2 >= 0.0, "blended radicand went negative");
            let mag = amps[i].norm();
            let phase = if mag >= phase_floor {
                amps[i] / mag
            } else {
                Complex64::new(1.0, 0.0)
            };
            amps[i] = phase * r2.sqrt();
            probs[i] = r2;
            sum_r2 += r2;
        }
    }
    let defect = (sum_r2 - 1.0).abs();
    if !(defect <= RENORM_DEFECT_MAX) {
        return Err(EngineError::NormalizationDrift {
            t,
            defect,
            max: RENORM_DEFECT_MAX,
        });
    }
    let inv = 1.0 / sum_r2;
    let inv_amp = inv.sqrt();
    for i in 0..amps.len() {
        probs[i] *= inv;
        amps[i] *= inv_amp;
    }
    Ok(defect)
}

/// Blend a pure state and a classical distribution into the next mixed pair.
pub fn mix_update(
    psi_next: &PureState,
    p_next: &ClassicalDistribution,
    alpha: f64,
    phase_floor: f64,
) -> Result<(PureState, ClassicalDistribution), EngineError> {
    if psi_next.dim() != p_next.dim() {
        return Err(EngineError::DimensionMismatch {
            expected: psi_next.dim(),
            got: p_next.dim(),
        });
    }
    if !(0.0..=1.0).contains(&alpha) {
        return Err(EngineError::AlphaOutOfRange(alpha));
    }
    if phase_floor <= 0.0 {
        return Err(EngineError::InvalidPhaseFloor(phase_floor));
    }
    let mut amps = psi_next.amplitudes().to_vec();
    let mut probs = p_next.probabilities().to_vec();
    mix_update_raw(&mut amps, &mut probs, alpha, phase_floor, f64::NAN)
        .map(|_| (PureState { amps }, ClassicalDistribution { probs }))
}

/// Scratch space for RK4 over both subsystems.
struct StepBuffers {
    ak: Vec<Complex64>,
    aacc: Vec<Complex64>,
    astage: Vec<Complex64>,
    pk: Vec<f64>,
    pacc: Vec<f64>,
    pstage: Vec<f64>,
}

impl StepBuffers {
    fn new(dim: usize) -> Self {
        Self {
            ak: vec![Complex64::new(0.0, 0.0); dim],
            aacc: vec![Complex64::new(0.0, 0.0); dim],
            astage: vec![Complex64::new(0.0, 0.0); dim],
            pk: vec![0.0; dim],
            pacc: vec![0.0; dim],
            pstage: vec![0.0; dim],
        }
    }
}

fn rk4_schrodinger(
    op: &HamiltonianOp,
    w_c: f64,
    w_q: f64,
    dt: f64,
    amps: &mut [Complex64],
    b: &mut StepBuffers,
) {
    let dim = amps.len();
    schrodinger_rhs_into(op, w_c, w_q, amps, &mut b.ak);
    for i in 0..dim {
        b.aacc[i] = b.ak[i];
        b.astage[i] = amps[i] + b.ak[i] * (0.5 * dt);
    }
    schrodinger_rhs_into(op, w_c, w_q, &b.astage, &mut b.ak);
    for i in 0..dim {
        b.aacc[i] += b.ak[i] * 2.0;
        b.astage[i] = amps[i] + b.ak[i] * (0.5 * dt);
    }
    schrodinger_rhs_into(op, w_c, w_q, &b.astage, &mut b.ak);
    for i in 0..dim {
        b.aacc[i] += b.ak[i] * 2.0;
        b.astage[i] = amps[i] + b.ak[i] * dt;
    }
    schrodinger_rhs_into(op, w_c, w_q, &b.astage, &mut b.ak);
    for i in 0..dim {
        amps[i] += (b.aacc[i] + b.ak[i]) * (dt / 6.0);
    }
}

fn rk4_master(
    n: usize,
    spectrum: &SpectrumTable,
    beta: Option<f64>,
    dt: f64,
    probs: &mut [f64],
    b: &mut StepBuffers,
) {
    let dim = probs.len();
    master_rhs_into(probs, n, spectrum, beta, &mut b.pk);
    for i in 0..dim {
        b.pacc[i] = b.pk[i];
        b.pstage[i] = probs[i] + 0.5 * dt * b.pk[i];
    }
    master_rhs_into(&b.pstage, n, spectrum, beta, &mut b.pk);
    for i in 0..dim {
        b.pacc[i] += 2.0 * b.pk[i];
        b.pstage[i] = probs[i] + 0.5 * dt * b.pk[i];
    }
    master_rhs_into(&b.pstage, n, spectrum, beta, &mut b.pk);
    for i in 0..dim {
        b.pacc[i] += 2.0 * b.pk[i];
        b.pstage[i] = probs[i] + dt * b.pk[i];
    }
    master_rhs_into(&b.pstage, n, spectrum, beta, &mut b.pk);
    for i in 0..dim {
        probs[i] += dt / 6.0 * (b.pacc[i] + b.pk[i]);
    }
}

/// One operator-split step: RK4 on each subsystem over `dt` with the
/// Hamiltonian weights held fixed, then one blend. Returns the pre-blend
/// defects `(|norm^2 - 1|, |sum P - 1|)` of the two subsystem steps.
fn split_step(
    op: &HamiltonianOp,
    spectrum: &SpectrumTable,
    cfg: &MixConfig,
    w_c: f64,
    w_q: f64,
    dt: f64,
    t: f64,
    amps: &mut [Complex64],
    probs: &mut [f64],
    bufs: &mut StepBuffers,
) -> Result<(f64, f64), EngineError> {
    let n = amps.len().trailing_zeros() as usize;
    rk4_schrodinger(op, w_c, w_q, dt, amps, bufs);
    let norm_defect = (amps.iter().map(|a| a.norm_sqr()).sum::<f64>() - 1.0).abs();

    let prob_defect = if cfg.alpha == 0.0 {
        // The blend overwrites P with |a|^2, so the master step would be
        // discarded; skip it.
        norm_defect
    } else {
        rk4_master(n, spectrum, cfg.temperature.beta(), dt, probs, bufs);
        for (i, p) in probs.iter_mut().enumerate() {
            if *p < 0.0 {
                if *p > PROBABILITY_FLOOR {
                    *p = 0.0;
                } else {
                    return Err(EngineError::NegativeProbability {
                        index: i,
                        value: *p,
                    });
                }
            }
        }
        (probs.iter().sum::<f64>() - 1.0).abs()
    };

    mix_update_raw(amps, probs, cfg.alpha, cfg.phase_floor, t)?;
    Ok((norm_defect, prob_defect))
}

/// Advance one mixed pair by a single step at annealing parameter `s`.
pub fn evolve_step(
    psi: &PureState,
    p: &ClassicalDistribution,
    inst: &IsingInstance,
    spectrum: &SpectrumTable,
    s: f64,
    config: &MixConfig,
) -> Result<(PureState, ClassicalDistribution), EngineError> {
    config.validate()?;
    if psi.dim() != inst.dim() || p.dim() != inst.dim() {
        return Err(EngineError::DimensionMismatch {
            expected: inst.dim(),
            got: psi.dim().min(p.dim()),
        });
    }
    let op = HamiltonianOp::new(inst, spectrum)?;
    let mut amps = psi.amplitudes().to_vec();
    let mut probs = p.probabilities().to_vec();
    let mut bufs = StepBuffers::new(inst.dim());
    split_step(
        &op,
        spectrum,
        config,
        s,
        1.0 - s,
        config.dt,
        0.0,
        &mut amps,
        &mut probs,
        &mut bufs,
    )?;
    Ok((PureState { amps }, ClassicalDistribution { probs }))
}

/// Starting point of a trajectory.
#[derive(Debug, Clone)]
pub enum InitialState {
    UniformSuperposition,
    Custom {
        psi: PureState,
        classical: ClassicalDistribution,
    },
}

/// How the Hamiltonian weights were driven during a run.
#[derive(Debug, Clone, Copy, Serialize)]
#[serde(tag = "drive", rename_all = "kebab-case")]
pub enum DriveEcho {
    Schedule { schedule: Schedule },
    FixedWeights { classical: f64, quantum: f64 },
}

/// One recorded time point. `probs` is the blended distribution, which at
/// sample times coincides with `|a_i|^2`.
#[derive(Debug, Clone)]
pub struct Sample {
    pub t: f64,
    /// Schedule value at the sample time (classical weight for fixed-weight
    /// runs).
    pub s: f64,
    pub probs: Vec<f64>,
    pub norm_defect: f64,
    pub prob_defect: f64,
    pub purity_defect: Option<f64>,
}

/// A full recorded run.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    pub config: MixConfig,
    pub drive: DriveEcho,
    pub final_psi: PureState,
    pub final_classical: ClassicalDistribution,
    pub max_norm_defect: f64,
    pub max_prob_defect: f64,
    pub max_purity_defect: Option<f64>,
}

impl Trajectory {
    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.t).collect()
    }

    pub fn final_sample(&self) -> &Sample {
        self.samples.last().expect("trajectory has samples")
    }
}

enum WeightRule<'a> {
    Schedule(&'a Schedule),
    Fixed { w_c: f64, w_q: f64 },
}

impl WeightRule<'_> {
    fn weights(&self, t: f64) -> (f64, f64) {
        match *self {
            WeightRule::Schedule(sched) => {
                let s = sched.value(t);
                (s, 1.0 - s)
            }
            WeightRule::Fixed { w_c, w_q } => (w_c, w_q),
        }
    }

    /// Value recorded in the `s` column of samples.
    fn s_column(&self, t: f64) -> f64 {
        match *self {
            WeightRule::Schedule(sched) => sched.value(t),
            WeightRule::Fixed { w_c, .. } => w_c,
        }
    }
}

fn run_trajectory(
    inst: &IsingInstance,
    rule: WeightRule,
    tau: f64,
    config: &MixConfig,
    initial: InitialState,
    drive: DriveEcho,
) -> Result<Trajectory, EngineError> {
    config.validate()?;
    if !tau.is_finite() || tau <= 0.0 {
        return Err(EngineError::NonPositiveHorizon(tau));
    }
    if config.track_purity && inst.n() > 8 {
        return Err(EngineError::DensityCheckTooLarge(inst.n()));
    }
    let dim = inst.dim();
    let (mut amps, mut probs) = match initial {
        InitialState::UniformSuperposition => {
            let psi = PureState::uniform_superposition(inst.n());
            let p = ClassicalDistribution::from_pure_state(&psi);
            (psi.amps, p.probs)
        }
        InitialState::Custom { psi, classical } => {
            if psi.dim() != dim || classical.dim() != dim {
                return Err(EngineError::DimensionMismatch {
                    expected: dim,
                    got: psi.dim().min(classical.dim()),
                });
            }
            (psi.amps, classical.probs)
        }
    };

    let spectrum = classical_energies(inst);
    let op = HamiltonianOp::new(inst, &spectrum)?;
    let mut bufs = StepBuffers::new(dim);

    // Whole steps of dt plus a shortened final step landing exactly on tau.
    let full_steps = (tau / config.dt).floor() as usize;
    let remainder = tau - full_steps as f64 * config.dt;
    let has_partial = remainder > config.dt * 1e-12;
    let n_steps = full_steps + usize::from(has_partial);

    let mut samples = Vec::new();
    let purity_at = |amps: &[Complex64]| -> Option<f64> {
        config.track_purity.then(|| {
            let (purity, _) = density_defects(amps);
            purity
        })
    };
    samples.push(Sample {
        t: 0.0,
        s: rule.s_column(0.0),
        probs: probs.clone(),
        norm_defect: 0.0,
        prob_defect: 0.0,
        purity_defect: purity_at(&amps),
    });

    let mut max_norm_defect = 0.0f64;
    let mut max_prob_defect = 0.0f64;
    let mut max_purity_defect: Option<f64> = None;

    for k in 0..n_steps {
        let t = k as f64 * config.dt;
        let last = k + 1 == n_steps;
        let dt_k = if last && has_partial {
            remainder
        } else {
            config.dt
        };
        let (w_c, w_q) = rule.weights(t);
        if !w_c.is_finite() || !w_q.is_finite() {
            return Err(EngineError::NonFiniteWeights(w_c, w_q));
        }
        let (norm_defect, prob_defect) = split_step(
            &op, &spectrum, config, w_c, w_q, dt_k, t, &mut amps, &mut probs, &mut bufs,
        )?;
        max_norm_defect = max_norm_defect.max(norm_defect);
        max_prob_defect = max_prob_defect.max(prob_defect);

        if (k + 1) % config.sample_every == 0 || last {
            let t_next = if last { tau } else { (k + 1) as f64 * config.dt };
            let purity = purity_at(&amps);
            if let Some(p) = purity {
                max_purity_defect = Some(max_purity_defect.unwrap_or(0.0).max(p));
            }
            samples.push(Sample {
                t: t_next,
                s: rule.s_column(t_next),
                probs: probs.clone(),
                norm_defect,
                prob_defect,
                purity_defect: purity,
            });
        }
    }

    Ok(Trajectory {
        samples,
        config: *config,
        drive,
        final_psi: PureState { amps },
        final_classical: ClassicalDistribution { probs },
        max_norm_defect,
        max_prob_defect,
        max_purity_defect,
    })
}

/// Evolve from `t = 0` to the schedule horizon, evaluating `s` at the start
/// of each step. The initial classical distribution is the diagonal of the
/// initial state.
pub fn evolve_trajectory(
    inst: &IsingInstance,
    schedule: &Schedule,
    config: &MixConfig,
    initial: InitialState,
) -> Result<Trajectory, EngineError> {
    schedule.validate()?;
    run_trajectory(
        inst,
        WeightRule::Schedule(schedule),
        schedule.horizon(),
        config,
        initial,
        DriveEcho::Schedule {
            schedule: *schedule,
        },
    )
}

/// Evolve under fixed Hamiltonian weights `w_c H_c + w_q H_q` instead of the
/// `s`-interpolation. This exposes Hamiltonians outside the annealing family
/// (for instance a two-level system with independent longitudinal and
/// transverse fields) to the same mixed dynamics.
pub fn evolve_fixed_weights(
    inst: &IsingInstance,
    w_classical: f64,
    w_quantum: f64,
    t_final: f64,
    config: &MixConfig,
    initial: InitialState,
) -> Result<Trajectory, EngineError> {
    if !w_classical.is_finite() || !w_quantum.is_finite() {
        return Err(EngineError::NonFiniteWeights(w_classical, w_quantum));
    }
    run_trajectory(
        inst,
        WeightRule::Fixed {
            w_c: w_classical,
            w_q: w_quantum,
        },
        t_final,
        config,
        initial,
        DriveEcho::FixedWeights {
            classical: w_classical,
            quantum: w_quantum,
        },
    )
}

fn density_defects(amps: &[Complex64]) -> (f64, f64) {
    let dim = amps.len();
    // rho = a a^dagger; purity defect is the max-norm of rho^2 - rho.
    let mut rho = vec![Complex64::new(0.0, 0.0); dim * dim];
    for i in 0..dim {
        for j in 0..dim {
            rho[i * dim + j] = amps[i] * amps[j].conj();
        }
    }
    let mut max_defect = 0.0f64;
    for i in 0..dim {
        for j in 0..dim {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 0..dim {
                acc += rho[i * dim + k] * rho[k * dim + j];
            }
            max_defect = max_defect.max((acc - rho[i * dim + j]).norm());
        }
    }
    let trace: f64 = (0..dim).map(|i| rho[i * dim + i].re).sum();
    (max_defect, (trace - 1.0).abs())
}

/// Form the dense density matrix `rho_ij = a_i conj(a_j)` and return the
/// max-norm defects of `rho^2 - rho` and `trace(rho) - 1`. Limited to
/// `n <= 8` where the `4^n` entries stay affordable.
pub fn density_check(psi: &PureState) -> Result<(f64, f64), EngineError> {
    if psi.n_spins() > 8 {
        return Err(EngineError::DensityCheckTooLarge(psi.n_spins()));
    }
    Ok(density_defects(psi.amplitudes()))
}
