//! Closed-form mixed dynamics of a single two-level system.
//!
//! The Hamiltonian is `H = -h Z - G X` with both fields positive, and the
//! heat bath acts through the two-state master equation for the diagonal
//! part. Writing `rho_11 = z` and `rho_12 = x + i y`, the blended evolution
//! reduces to three real ODEs:
//!
//! ```text
//! dz = 2 (1-a) G y + a g(z)
//! dx = a G (2z-1) x y / (x^2+y^2) - (c a / 2) x - 2 h y
//! dy = G (2z-1) [-x^2 - (1-a) y^2] / (x^2+y^2) - (c a / 2) y + 2 h x
//! ```
//!
//! where `g(z) = (1-z) w+ - z w-` with thermal weights
//! `w+- = 1 / (1 + exp(-+ 2 beta h))` (so `g = 1 - z` at zero temperature)
//! and `c = (2z-1) g(z) / (z (1-z))`.
//!
//! Trajectories launched from pure states stay on the purity shell
//! `x^2 + y^2 = z (1-z)`, but the stationary structure of the equations
//! lives in the full `(x, y, z)` space: next to the pure quantum-like
//! branch there is an exact classical branch `z = w+`, `y = 0`,
//! `x = G (2z-1) / (2h)` that detaches from the shell. The two branches
//! cross and exchange stability at one temperature, which is the kink in
//! the stable stationary occupation.

use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::engine::Temperature;

const NEWTON_MAX_ITER: usize = 100;
const NEWTON_RESIDUAL_TOL: f64 = 1e-12;
const ROOT_DEDUP_TOL: f64 = 1e-8;
const STATIONARITY_NORM_TOL: f64 = 1e-8;
const JACOBIAN_FD_STEP: f64 = 1e-6;
const Z_INTERIOR_MIN: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum TlsError {
    #[error("two-level fields must be positive, got h = {h}, gamma_x = {gamma_x}")]
    NonPositiveFields { h: f64, gamma_x: f64 },
    #[error("mixing parameter must lie in [0, 1], got {0}")]
    AlphaOutOfRange(f64),
    #[error("occupation z must lie in [0, 1], got {0}")]
    ZOutOfRange(f64),
    #[error("dynamics undefined at the boundary z = {0}")]
    BoundaryState(f64),
    #[error("dynamics undefined at zero coherence (rho_12 = 0)")]
    ZeroCoherence,
    #[error("state violates the purity constraint by {0:.3e}")]
    PurityViolation(f64),
    #[error("non-finite state or parameter")]
    NonFinite,
    #[error("step size must be positive, got {0}")]
    InvalidStepSize(f64),
    #[error("no stationary point converged from any start (alpha = {alpha}, T = {temperature})")]
    NoRootsFound { alpha: f64, temperature: f64 },
    #[error("sweep grid is empty")]
    EmptySweep,
}

/// Fields, mixing parameter, and bath temperature of the two-level problem.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TlsParams {
    pub h: f64,
    pub gamma_x: f64,
    pub alpha: f64,
    pub temperature: Temperature,
}

impl TlsParams {
    pub fn new(
        h: f64,
        gamma_x: f64,
        alpha: f64,
        temperature: Temperature,
    ) -> Result<Self, TlsError> {
        if !h.is_finite() || !gamma_x.is_finite() || h <= 0.0 || gamma_x <= 0.0 {
            return Err(TlsError::NonPositiveFields { h, gamma_x });
        }
        if !alpha.is_finite() || !(0.0..=1.0).contains(&alpha) {
            return Err(TlsError::AlphaOutOfRange(alpha));
        }
        Ok(Self {
            h,
            gamma_x,
            alpha,
            temperature,
        })
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn with_temperature(mut self, temperature: Temperature) -> Self {
        self.temperature = temperature;
        self
    }

    /// Thermal occupation weights `(w+, w-)`; `(1, 0)` at zero temperature.
    fn thermal_weights(&self) -> (f64, f64) {
        match self.temperature.beta() {
            None => (1.0, 0.0),
            Some(beta) => (
                1.0 / (1.0 + (-2.0 * beta * self.h).exp()),
                1.0 / (1.0 + (2.0 * beta * self.h).exp()),
            ),
        }
    }

    /// Ground-state occupation of the bare quantum Hamiltonian,
    /// `z = (1 + h / sqrt(h^2 + G^2)) / 2`.
    pub fn quantum_ground_occupation(&self) -> f64 {
        0.5 * (1.0 + self.h / (self.h * self.h + self.gamma_x * self.gamma_x).sqrt())
    }

    /// Boltzmann occupation of the diagonal Hamiltonian,
    /// `exp(beta h) / (2 cosh(beta h))`; 1 at zero temperature.
    pub fn classical_boltzmann_occupation(&self) -> f64 {
        match self.temperature.beta() {
            None => 1.0,
            Some(beta) => 1.0 / (1.0 + (-2.0 * beta * self.h).exp()),
        }
    }
}

/// A pure two-level state in reduced coordinates: `rho_11 = z` and
/// `rho_12 = sqrt(z(1-z)) exp(i theta)`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TlsState {
    z: f64,
    theta: f64,
}

fn wrap_angle(theta: f64) -> f64 {
    let mut t = theta % std::f64::consts::TAU;
    if t > std::f64::consts::PI {
        t -= std::f64::consts::TAU;
    } else if t <= -std::f64::consts::PI {
        t += std::f64::consts::TAU;
    }
    t
}

impl TlsState {
    /// Boundary values `z = 0` and `z = 1` are representable (they appear as
    /// stationary-state limits) but cannot be evolved.
    pub fn new(z: f64, theta: f64) -> Result<Self, TlsError> {
        if !z.is_finite() || !theta.is_finite() {
            return Err(TlsError::NonFinite);
        }
        if !(0.0..=1.0).contains(&z) {
            return Err(TlsError::ZOutOfRange(z));
        }
        Ok(Self {
            z,
            theta: wrap_angle(theta),
        })
    }

    /// Recover `(z, theta)` from Cartesian coordinates, checking purity.
    pub fn from_xyz(x: f64, y: f64, z: f64) -> Result<Self, TlsError> {
        if !(0.0..=1.0).contains(&z) {
            return Err(TlsError::ZOutOfRange(z));
        }
        let defect = (x * x + y * y - z * (1.0 - z)).abs();
        if defect > 1e-9 {
            return Err(TlsError::PurityViolation(defect));
        }
        let theta = if x == 0.0 && y == 0.0 {
            0.0
        } else {
            y.atan2(x)
        };
        Self::new(z, theta)
    }

    pub fn z(&self) -> f64 {
        self.z
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn radius(&self) -> f64 {
        (self.z * (1.0 - self.z)).sqrt()
    }

    pub fn x(&self) -> f64 {
        self.radius() * self.theta.cos()
    }

    pub fn y(&self) -> f64 {
        self.radius() * self.theta.sin()
    }
}

/// Right-hand side of the blended two-level dynamics in `(x, y, z)`.
///
/// Requires `0 < z < 1` (the relaxation coefficient has `z` and `1-z`
/// denominators) and `rho_12 != 0` (the dephasing weight is built from the
/// phase factor `rho_12 / |rho_12|`, which has no limit at the origin).
pub fn tls_rhs(x: f64, y: f64, z: f64, params: &TlsParams) -> Result<(f64, f64, f64), TlsError> {
    if !x.is_finite() || !y.is_finite() || !z.is_finite() {
        return Err(TlsError::NonFinite);
    }
    if z <= 0.0 || z >= 1.0 {
        return Err(TlsError::BoundaryState(z));
    }
    let r2 = x * x + y * y;
    if r2 == 0.0 {
        return Err(TlsError::ZeroCoherence);
    }
    let alpha = params.alpha;
    let gamma = params.gamma_x;
    let h = params.h;
    let (g, c) = match params.temperature.beta() {
        None => (1.0 - z, (2.0 * z - 1.0) / z),
        Some(_) => {
            let (w_plus, w_minus) = params.thermal_weights();
            let g = (1.0 - z) * w_plus - z * w_minus;
            (g, (2.0 * z - 1.0) * g / (z * (1.0 - z)))
        }
    };
    let two_z1 = 2.0 * z - 1.0;
    let dz = 2.0 * (1.0 - alpha) * gamma * y + alpha * g;
    let dx = alpha * gamma * two_z1 * x * y / r2 - 0.5 * c * alpha * x - 2.0 * h * y;
    let dy = gamma * two_z1 * (-x * x - (1.0 - alpha) * y * y) / r2 - 0.5 * c * alpha * y
        + 2.0 * h * x;
    Ok((dx, dy, dz))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stability {
    Stable,
    Unstable,
}

/// A stationary point of the two-level equations in `(x, y, z)` with its
/// linearization. Points off the purity shell are legitimate solutions of
/// the stationary system (the classical branch lives there).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct StationaryPoint {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub stability: Stability,
    /// The two largest real parts of the Jacobian eigenvalues (ascending);
    /// the point is stable iff both are negative. The boundary attractor at
    /// `alpha = 1, T = 0` reports `-inf` for its instantaneously locking
    /// phase; at `alpha = 0` the linearization is a pure rotation and both
    /// entries are zero (the point is labeled stable as the limit of the
    /// stable branch); the phase-precessing attractor at `alpha = 1` and
    /// high temperature carries a neutral zero along its orbit.
    pub jacobian_eigen_real_parts: (f64, f64),
}

impl StationaryPoint {
    /// Distance from the purity shell, `|x^2 + y^2 - z (1-z)|`.
    pub fn purity_defect(&self) -> f64 {
        (self.x * self.x + self.y * self.y - self.z * (1.0 - self.z)).abs()
    }

    /// Coherence phase `atan2(y, x)`.
    pub fn theta(&self) -> f64 {
        if self.x == 0.0 && self.y == 0.0 {
            0.0
        } else {
            self.y.atan2(self.x)
        }
    }

    /// The reduced pure-state coordinates, when the point lies on the shell.
    pub fn manifold_state(&self) -> Option<TlsState> {
        TlsState::from_xyz(self.x, self.y, self.z).ok()
    }
}

fn rhs3(params: &TlsParams, s: [f64; 3]) -> Result<[f64; 3], TlsError> {
    let (dx, dy, dz) = tls_rhs(s[0], s[1], s[2], params)?;
    Ok([dx, dy, dz])
}

fn residual_norm(params: &TlsParams, s: [f64; 3]) -> f64 {
    match rhs3(params, s) {
        Ok(f) => f.iter().map(|v| v.abs()).fold(0.0, f64::max),
        Err(_) => f64::INFINITY,
    }
}

fn jacobian3(params: &TlsParams, s: [f64; 3]) -> Result<Matrix3<f64>, TlsError> {
    let mut j = Matrix3::zeros();
    for col in 0..3 {
        let mut h = JACOBIAN_FD_STEP;
        let mut sp = s;
        let mut sm = s;
        if col == 2 {
            // Keep the z probes strictly interior.
            sp[2] = (s[2] + h).min(1.0 - Z_INTERIOR_MIN);
            sm[2] = (s[2] - h).max(Z_INTERIOR_MIN);
            h = (sp[2] - sm[2]) / 2.0;
        } else {
            sp[col] += h;
            sm[col] -= h;
        }
        let fp = rhs3(params, sp)?;
        let fm = rhs3(params, sm)?;
        for row in 0..3 {
            j[(row, col)] = (fp[row] - fm[row]) / (2.0 * h);
        }
    }
    Ok(j)
}

/// Real parts of the Jacobian eigenvalues, ascending.
fn eigen_real_parts(j: &Matrix3<f64>) -> [f64; 3] {
    let mut re: Vec<f64> = j.complex_eigenvalues().iter().map(|e| e.re).collect();
    re.sort_by(|a, b| a.total_cmp(b));
    [re[0], re[1], re[2]]
}

fn classify(params: &TlsParams, s: [f64; 3]) -> Result<StationaryPoint, TlsError> {
    let j = jacobian3(params, s)?;
    let re = eigen_real_parts(&j);
    let stability = if re[2] < 0.0 {
        Stability::Stable
    } else {
        Stability::Unstable
    };
    Ok(StationaryPoint {
        x: s[0],
        y: s[1],
        z: s[2],
        stability,
        jacobian_eigen_real_parts: (re[1], re[2]),
    })
}

/// Damped Newton iteration on the full three-dimensional stationary system.
fn newton3(params: &TlsParams, start: [f64; 3]) -> Option<[f64; 3]> {
    let clamp = |mut s: [f64; 3]| {
        s[0] = s[0].clamp(-2.0, 2.0);
        s[1] = s[1].clamp(-2.0, 2.0);
        s[2] = s[2].clamp(Z_INTERIOR_MIN, 1.0 - Z_INTERIOR_MIN);
        s
    };
    let mut s = clamp(start);
    for _ in 0..NEWTON_MAX_ITER {
        let f = rhs3(params, s).ok()?;
        let norm = f.iter().map(|v| v.abs()).fold(0.0, f64::max);
        if norm < NEWTON_RESIDUAL_TOL {
            return Some(s);
        }
        let j = jacobian3(params, s).ok()?;
        let delta = j.lu().solve(&Vector3::new(f[0], f[1], f[2]))?;
        let mut lambda = 1.0;
        let mut accepted = false;
        while lambda >= 1e-3 {
            let trial = clamp([
                s[0] - lambda * delta[0],
                s[1] - lambda * delta[1],
                s[2] - lambda * delta[2],
            ]);
            if residual_norm(params, trial) <= (1.0 - 1e-4 * lambda) * norm {
                s = trial;
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        if !accepted {
            return None;
        }
    }
    None
}

fn push_dedup(roots: &mut Vec<[f64; 3]>, s: [f64; 3]) {
    let duplicate = roots.iter().any(|r| {
        ((r[0] - s[0]).powi(2) + (r[1] - s[1]).powi(2) + (r[2] - s[2]).powi(2)).sqrt()
            < ROOT_DEDUP_TOL
    });
    if !duplicate {
        roots.push(s);
    }
}

fn stationary_roots(
    params: &TlsParams,
    extra_starts: &[[f64; 3]],
) -> Result<Vec<StationaryPoint>, TlsError> {
    // alpha = 0: the stationary system degenerates to a one-parameter family
    // (every coherence-aligned state of the bare quantum flow). Return the
    // ground state analytically.
    if params.alpha == 0.0 {
        let z = params.quantum_ground_occupation();
        let x = params.gamma_x
            / (2.0 * (params.h * params.h + params.gamma_x * params.gamma_x).sqrt());
        return Ok(vec![StationaryPoint {
            x,
            y: 0.0,
            z,
            stability: Stability::Stable,
            jacobian_eigen_real_parts: (0.0, 0.0),
        }]);
    }

    // alpha = 1: the occupation decouples (dz = g(z)) and the stationary set
    // is degenerate (a circle of constant occupation); handled analytically.
    if params.alpha == 1.0 {
        return stationary_alpha_one(params);
    }

    let mut roots: Vec<[f64; 3]> = Vec::new();
    let try_start = |roots: &mut Vec<[f64; 3]>, start: [f64; 3]| {
        if let Some(root) = newton3(params, start) {
            push_dedup(roots, root);
        }
    };
    for &s in extra_starts {
        try_start(&mut roots, s);
    }
    // The classical branch is exact: z with g(z) = 0, y = 0,
    // x = G (2z-1) / (2h). Seed it directly so Newton just polishes.
    if let Some(_) = params.temperature.beta() {
        let (w_plus, _) = params.thermal_weights();
        let x = params.gamma_x * (2.0 * w_plus - 1.0) / (2.0 * params.h);
        try_start(&mut roots, [x, 0.0, w_plus]);
    }
    // Grid of on-shell starts plus radially contracted copies to reach
    // off-shell roots.
    for iz in 0..10 {
        let z0 = 0.05 + 0.1 * iz as f64;
        let radius = (z0 * (1.0 - z0)).sqrt();
        for it in 0..8 {
            let t0 = std::f64::consts::FRAC_PI_4 * it as f64;
            for factor in [1.0, 0.5] {
                let r = radius * factor;
                try_start(&mut roots, [r * t0.cos(), r * t0.sin(), z0]);
            }
        }
    }
    if roots.is_empty() {
        return Err(TlsError::NoRootsFound {
            alpha: params.alpha,
            temperature: params.temperature.value(),
        });
    }
    let mut points = Vec::new();
    for root in roots {
        // Guard against accepting a slow-flow point that is not stationary.
        let f = rhs3(params, root)?;
        if (f[0] * f[0] + f[1] * f[1] + f[2] * f[2]).sqrt() > STATIONARITY_NORM_TOL {
            continue;
        }
        points.push(classify(params, root)?);
    }
    points.sort_by(|a, b| a.z.total_cmp(&b.z));
    Ok(points)
}

/// At `alpha = 1` the occupation obeys `dz = g(z)` on its own, so the
/// stationary occupation is the classical one: `z = 1` at zero temperature
/// (boundary attractor) or the Boltzmann weight at finite temperature. The
/// remaining stationary freedom is a circle of constant occupation; the
/// physical attractor on the purity shell has fixed coherence phases only
/// when `2 h R <= G (2z - 1)`, and otherwise precesses at constant
/// occupation (reported as a single stable point with a neutral zero phase
/// eigenvalue).
fn stationary_alpha_one(params: &TlsParams) -> Result<Vec<StationaryPoint>, TlsError> {
    match params.temperature.beta() {
        None => Ok(vec![StationaryPoint {
            x: 0.0,
            y: 0.0,
            z: 1.0,
            stability: Stability::Stable,
            jacobian_eigen_real_parts: (f64::NEG_INFINITY, -1.0),
        }]),
        Some(_) => {
            let (w_plus, w_minus) = params.thermal_weights();
            let z = w_plus;
            let dg_dz = -(w_plus + w_minus); // = -1
            let r = (z * (1.0 - z)).sqrt();
            let denom = params.gamma_x * (2.0 * z - 1.0);
            let cos_t = if denom.abs() > 0.0 {
                2.0 * params.h * r / denom
            } else {
                f64::INFINITY
            };
            if cos_t.abs() <= 1.0 {
                let t_stable = -cos_t.acos();
                let t_unstable = cos_t.acos();
                let phase_eig = |theta: f64| denom * theta.sin() / r;
                let point = |theta: f64, eig: f64, stability: Stability| StationaryPoint {
                    x: r * theta.cos(),
                    y: r * theta.sin(),
                    z,
                    stability,
                    jacobian_eigen_real_parts: if eig < dg_dz {
                        (eig, dg_dz)
                    } else {
                        (dg_dz, eig)
                    },
                };
                Ok(vec![
                    point(t_stable, phase_eig(t_stable), Stability::Stable),
                    point(t_unstable, phase_eig(t_unstable), Stability::Unstable),
                ])
            } else {
                Ok(vec![StationaryPoint {
                    x: 0.0,
                    y: r,
                    z,
                    stability: Stability::Stable,
                    jacobian_eigen_real_parts: (dg_dz, 0.0),
                }])
            }
        }
    }
}

/// Find the stationary points of the two-level equations in the full
/// `(x, y, z)` space by multi-start damped Newton iteration (grid
/// `z in {0.05..0.95} x theta in {0, pi/4, ..., 7pi/4}`, on the purity
/// shell and radially contracted, plus the exact classical-branch seed),
/// with analytic handling of the degenerate ends `alpha = 0` and
/// `alpha = 1`.
pub fn tls_stationary(params: &TlsParams) -> Result<Vec<StationaryPoint>, TlsError> {
    stationary_roots(params, &[])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepAxis {
    Alpha,
    Temperature,
}

/// One stationary point at one grid value of the sweep parameter.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SweepPoint {
    pub parameter: f64,
    pub branch: usize,
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub stability: Stability,
    pub jacobian_eigen_real_parts: (f64, f64),
}

/// Trace stationary points over a parameter grid, warm-starting each point
/// from the previous grid point's roots and assigning branch ids by
/// continuity. Continuation is serial along the sweep axis.
pub fn sweep_stationary(
    base: &TlsParams,
    axis: SweepAxis,
    values: &[f64],
) -> Result<Vec<SweepPoint>, TlsError> {
    if values.is_empty() {
        return Err(TlsError::EmptySweep);
    }
    let mut rows: Vec<SweepPoint> = Vec::new();
    let mut prev: Vec<(usize, [f64; 3])> = Vec::new();
    let mut next_branch = 0usize;
    for &v in values {
        let params = match axis {
            SweepAxis::Alpha => {
                if !(0.0..=1.0).contains(&v) {
                    return Err(TlsError::AlphaOutOfRange(v));
                }
                base.with_alpha(v)
            }
            SweepAxis::Temperature => {
                base.with_temperature(Temperature::new(v).map_err(|_| TlsError::NonFinite)?)
            }
        };
        let starts: Vec<[f64; 3]> = prev.iter().map(|&(_, s)| s).collect();
        let points = stationary_roots(&params, &starts)?;
        let mut assigned: Vec<(usize, [f64; 3])> = Vec::new();
        for point in points {
            let here = [point.x, point.y, point.z];
            let nearest = prev
                .iter()
                .map(|&(id, s)| {
                    let d = ((s[0] - here[0]).powi(2)
                        + (s[1] - here[1]).powi(2)
                        + (s[2] - here[2]).powi(2))
                    .sqrt();
                    (id, d)
                })
                .filter(|&(_, d)| d < 0.15)
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .map(|(id, _)| id);
            let branch = match nearest {
                Some(id) if !assigned.iter().any(|&(b, _)| b == id) => id,
                _ => {
                    let id = next_branch;
                    next_branch += 1;
                    id
                }
            };
            if branch >= next_branch {
                next_branch = branch + 1;
            }
            assigned.push((branch, here));
            rows.push(SweepPoint {
                parameter: v,
                branch,
                x: point.x,
                y: point.y,
                z: point.z,
                stability: point.stability,
                jacobian_eigen_real_parts: point.jacobian_eigen_real_parts,
            });
        }
        prev = assigned;
    }
    Ok(rows)
}

/// Per-parameter occupation of the stable branch, chosen by continuity
/// (nearest stable root to the previous choice).
pub fn stable_branch(rows: &[SweepPoint]) -> Vec<(f64, f64)> {
    let mut out: Vec<(f64, f64)> = Vec::new();
    let mut params_seen: Vec<f64> = Vec::new();
    for row in rows {
        if !params_seen.iter().any(|&p| p == row.parameter) {
            params_seen.push(row.parameter);
        }
    }
    let mut prev_z: Option<f64> = None;
    for p in params_seen {
        let candidates: Vec<f64> = rows
            .iter()
            .filter(|r| r.parameter == p && r.stability == Stability::Stable)
            .map(|r| r.z)
            .collect();
        if candidates.is_empty() {
            continue;
        }
        let z = match prev_z {
            None => candidates[0],
            Some(zp) => candidates
                .iter()
                .copied()
                .min_by(|a, b| (a - zp).abs().total_cmp(&(b - zp).abs()))
                .unwrap(),
        };
        prev_z = Some(z);
        out.push((p, z));
    }
    out
}

/// Locate the sharpest bend of a sampled curve: the grid point with the
/// largest absolute second difference. Returns `None` for curves shorter
/// than three points.
pub fn locate_kink(series: &[(f64, f64)]) -> Option<f64> {
    if series.len() < 3 {
        return None;
    }
    let mut best = (0.0f64, None);
    for i in 1..series.len() - 1 {
        let curvature = (series[i + 1].1 - 2.0 * series[i].1 + series[i - 1].1).abs();
        if curvature > best.0 {
            best = (curvature, Some(series[i].0));
        }
    }
    best.1
}

/// One recorded point of a two-level trajectory.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TlsSample {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

/// Integrate the closed-form dynamics with RK4 in `(x, y, z)`, sampling
/// every `sample_every` steps plus the final step. Purity conservation
/// along the trajectory is a property of the flow, not enforced; its
/// defect is a useful integration diagnostic.
pub fn tls_evolve(
    params: &TlsParams,
    initial: &TlsState,
    dt: f64,
    t_final: f64,
    sample_every: usize,
) -> Result<Vec<TlsSample>, TlsError> {
    if !(dt.is_finite() && dt > 0.0 && t_final.is_finite() && t_final > 0.0) {
        return Err(TlsError::InvalidStepSize(dt));
    }
    let stride = sample_every.max(1);
    let mut state = [initial.x(), initial.y(), initial.z()];
    let full_steps = (t_final / dt).floor() as usize;
    let remainder = t_final - full_steps as f64 * dt;
    let has_partial = remainder > dt * 1e-12;
    let n_steps = full_steps + usize::from(has_partial);

    let mut samples = vec![TlsSample {
        t: 0.0,
        x: state[0],
        y: state[1],
        z: state[2],
    }];
    for k in 0..n_steps {
        let last = k + 1 == n_steps;
        let dt_k = if last && has_partial { remainder } else { dt };
        let k1 = rhs3(params, state)?;
        let s2 = [
            state[0] + 0.5 * dt_k * k1[0],
            state[1] + 0.5 * dt_k * k1[1],
            state[2] + 0.5 * dt_k * k1[2],
        ];
        let k2 = rhs3(params, s2)?;
        let s3 = [
            state[0] + 0.5 * dt_k * k2[0],
            state[1] + 0.5 * dt_k * k2[1],
            state[2] + 0.5 * dt_k * k2[2],
        ];
        let k3 = rhs3(params, s3)?;
        let s4 = [
            state[0] + dt_k * k3[0],
            state[1] + dt_k * k3[1],
            state[2] + dt_k * k3[2],
        ];
        let k4 = rhs3(params, s4)?;
        for i in 0..3 {
            state[i] += dt_k / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        if (k + 1) % stride == 0 || last {
            let t = if last { t_final } else { (k + 1) as f64 * dt };
            samples.push(TlsSample {
                t,
                x: state[0],
                y: state[1],
                z: state[2],
            });
        }
    }
    Ok(samples)
}

/// Time after which `z(t)` stays within `band` of `target`; `None` if it is
/// still outside at the end of the series.
pub fn settle_time(samples: &[TlsSample], target: f64, band: f64) -> Option<f64> {
    let last_outside = samples
        .iter()
        .rev()
        .find(|s| (s.z - target).abs() > band)
        .map(|s| s.t);
    match last_outside {
        None => Some(0.0),
        Some(t) if t < samples.last().map_or(0.0, |s| s.t) => Some(t),
        Some(_) => None,
    }
}

/// Optical Bloch right-hand side for a decaying driven two-level atom:
///
/// ```text
/// d rho_gg = + decay rho_ee + (i/2) (conj(rabi) rho_eg - rabi rho_ge)
/// d rho_ge = - (decay/2 + i detuning) rho_ge + (i/2) conj(rabi) (rho_ee - rho_gg)
/// ```
///
/// with `rho_ee = 1 - rho_gg` and `rho_eg = conj(rho_ge)`.
pub fn optical_bloch_rhs(
    rho_gg: f64,
    rho_ge: Complex64,
    rabi: Complex64,
    detuning: f64,
    decay: f64,
) -> (f64, Complex64) {
    let rho_ee = 1.0 - rho_gg;
    let rho_eg = rho_ge.conj();
    let i = Complex64::i();
    let d_gg = decay * rho_ee + (i * 0.5 * (rabi.conj() * rho_eg - rabi * rho_ge)).re;
    let d_ge =
        -Complex64::new(0.5 * decay, detuning) * rho_ge + i * 0.5 * rabi.conj() * (rho_ee - rho_gg);
    (d_gg, d_ge)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!(
            (a - b).abs() <= tol,
            "expected {a} and {b} to agree within {tol}"
        );
    }

    fn params(h: f64, gamma_x: f64, alpha: f64, t: Temperature) -> TlsParams {
        TlsParams::new(h, gamma_x, alpha, t).unwrap()
    }

    #[test]
    fn alpha_zero_recovers_bare_quantum_flow() {
        let p = params(1.3, 0.7, 0.0, Temperature::Zero);
        let (x, y, z) = (0.21, -0.33, 0.6);
        let (dx, dy, dz) = tls_rhs(x, y, z, &p).unwrap();
        assert_close(dz, 2.0 * p.gamma_x * y, 1e-14);
        assert_close(dx, -2.0 * p.h * y, 1e-14);
        assert_close(dy, -p.gamma_x * (2.0 * z - 1.0) + 2.0 * p.h * x, 1e-14);
    }

    #[test]
    fn purely_imaginary_coherence_saturates_dephasing_weight() {
        // At x = 0 the phase factor squares to -1, so the transverse
        // coefficient becomes (1 - alpha) Gamma.
        let p = params(1.0, 1.0, 0.4, Temperature::Zero);
        let z: f64 = 0.7;
        let y = (z * (1.0 - z)).sqrt();
        let (dx, dy, _) = tls_rhs(0.0, y, z, &p).unwrap();
        assert_close(dx, -2.0 * p.h * y, 1e-14);
        assert_close(
            dy,
            -(1.0 - p.alpha) * p.gamma_x * (2.0 * z - 1.0)
                - 0.5 * ((2.0 * z - 1.0) / z) * p.alpha * y,
            1e-14,
        );
    }

    #[test]
    fn rhs_rejects_degenerate_states() {
        let p = params(1.0, 1.0, 0.5, Temperature::Zero);
        assert!(matches!(
            tls_rhs(0.1, 0.0, 1.0, &p),
            Err(TlsError::BoundaryState(_))
        ));
        assert!(matches!(
            tls_rhs(0.0, 0.0, 0.5, &p),
            Err(TlsError::ZeroCoherence)
        ));
    }

    #[test]
    fn finite_temperature_reduces_to_zero_temperature_limit() {
        let cold = params(1.0, 1.0, 0.3, Temperature::Finite(1e-3));
        let zero = params(1.0, 1.0, 0.3, Temperature::Zero);
        let (x, y, z) = (0.3, -0.2, 0.6);
        let a = tls_rhs(x, y, z, &cold).unwrap();
        let b = tls_rhs(x, y, z, &zero).unwrap();
        assert_close(a.0, b.0, 1e-9);
        assert_close(a.1, b.1, 1e-9);
        assert_close(a.2, b.2, 1e-9);
    }

    #[test]
    fn state_round_trip() {
        let s = TlsState::new(0.37, 2.1).unwrap();
        let back = TlsState::from_xyz(s.x(), s.y(), s.z()).unwrap();
        assert_close(back.z(), s.z(), 1e-12);
        assert_close(back.theta(), s.theta(), 1e-12);
    }

    #[test]
    fn stationary_alpha_to_zero_limit() {
        let p = params(1.0, 1.0, 0.0, Temperature::Zero);
        let pts = tls_stationary(&p).unwrap();
        assert_eq!(pts.len(), 1);
        let expected = (2.0 + 2.0f64.sqrt()) / 4.0;
        assert_close(pts[0].z, expected, 1e-12);
        assert_eq!(pts[0].stability, Stability::Stable);
        assert!(pts[0].purity_defect() < 1e-15);
    }

    #[test]
    fn stationary_alpha_one_zero_temperature_is_boundary() {
        let p = params(1.0, 1.0, 1.0, Temperature::Zero);
        let pts = tls_stationary(&p).unwrap();
        assert_eq!(pts.len(), 1);
        assert_eq!(pts[0].z, 1.0);
        assert_eq!(pts[0].stability, Stability::Stable);
        assert!(pts[0].jacobian_eigen_real_parts.1 < 0.0);
    }

    #[test]
    fn stationary_alpha_one_finite_temperature_is_boltzmann() {
        for t in [0.5, 1.0, 2.0] {
            let p = params(1.0, 1.0, 1.0, Temperature::Finite(t));
            let pts = tls_stationary(&p).unwrap();
            let stable: Vec<_> = pts
                .iter()
                .filter(|q| q.stability == Stability::Stable)
                .collect();
            assert!(!stable.is_empty());
            let beta = 1.0 / t;
            let boltzmann = beta.exp() / (beta.exp() + (-beta).exp());
            for q in stable {
                assert_close(q.z, boltzmann, 1e-12);
            }
        }
    }

    #[test]
    fn interior_roots_are_stationary_and_classified() {
        let p = params(1.0, 1.0, 0.3, Temperature::Zero);
        let pts = tls_stationary(&p).unwrap();
        assert!(pts.len() >= 2);
        let mut stable_count = 0;
        for q in &pts {
            let (dx, dy, dz) = tls_rhs(q.x, q.y, q.z, &p).unwrap();
            let norm = (dx * dx + dy * dy + dz * dz).sqrt();
            assert!(norm < 1e-8, "stationarity residual {norm}");
            if q.stability == Stability::Stable {
                stable_count += 1;
                // The stable branch sits just above the bare quantum value,
                // on the purity shell, with negative coherence phase.
                assert!(q.z > 0.85 && q.z < 0.9);
                assert!(q.y < 0.0);
                assert!(q.purity_defect() < 1e-9);
            }
        }
        assert_eq!(stable_count, 1);
    }

    #[test]
    fn classical_branch_exists_off_the_purity_shell() {
        // At finite temperature the stationary system has an exact root at
        // the classical occupation with zero coherence tilt.
        let p = params(1.0, 1.0, 0.1, Temperature::Finite(2.0));
        let pts = tls_stationary(&p).unwrap();
        let w_plus = p.classical_boltzmann_occupation();
        let classical = pts
            .iter()
            .find(|q| (q.z - w_plus).abs() < 1e-9)
            .expect("classical branch root");
        assert_close(classical.y, 0.0, 1e-10);
        assert_close(
            classical.x,
            p.gamma_x * (2.0 * w_plus - 1.0) / (2.0 * p.h),
            1e-9,
        );
        assert!(classical.purity_defect() > 1e-2);
        // Above the branch crossing the classical root is the stable one and
        // the quantum-like root has lost stability.
        assert_eq!(classical.stability, Stability::Stable);
        let quantum = pts
            .iter()
            .find(|q| (q.z - 0.8536).abs() < 0.01)
            .expect("quantum-like root");
        assert_eq!(quantum.stability, Stability::Unstable);
    }

    #[test]
    fn stability_labels_match_dynamics() {
        let p = params(1.0, 1.0, 0.25, Temperature::Zero);
        let pts = tls_stationary(&p).unwrap();
        let stable = pts
            .iter()
            .find(|q| q.stability == Stability::Stable)
            .unwrap();
        // The low-occupation companion root: attracting within the purity
        // shell but repelling transverse to it, hence unstable.
        let unstable = pts
            .iter()
            .find(|q| q.stability == Stability::Unstable && q.z > 0.05)
            .expect("an unstable companion root");

        // Perturb the stable root: the trajectory returns.
        let start = TlsState::from_xyz(stable.x, stable.y, stable.z)
            .and_then(|s| TlsState::new(s.z() + 1e-3, s.theta()))
            .unwrap();
        let samples = tls_evolve(&p, &start, 1e-3, 150.0, 1000).unwrap();
        let end = samples.last().unwrap();
        assert!(
            (end.z - stable.z).abs() < 1e-4,
            "did not return: {} vs {}",
            end.z,
            stable.z
        );

        // Perturb the unstable root: the trajectory departs (possibly all
        // the way into a boundary, which the integrator reports as an error).
        let start = TlsState::from_xyz(unstable.x, unstable.y, unstable.z)
            .and_then(|s| TlsState::new(s.z() + 1e-3, s.theta()))
            .unwrap();
        match tls_evolve(&p, &start, 1e-3, 200.0, 1000) {
            Err(TlsError::BoundaryState(_)) => {}
            Err(e) => panic!("unexpected integration failure: {e}"),
            Ok(samples) => {
                let max_dev = samples
                    .iter()
                    .map(|s| (s.z - unstable.z).abs())
                    .fold(0.0, f64::max);
                assert!(max_dev > 0.05, "never departed (max dev {max_dev})");
            }
        }
    }

    #[test]
    fn purity_is_conserved_along_integration() {
        let p = params(1.0, 1.0, 0.1, Temperature::Zero);
        let start = TlsState::new(0.5, 0.0).unwrap();
        let samples = tls_evolve(&p, &start, 1e-3, 50.0, 100).unwrap();
        for s in &samples {
            let defect = (s.x * s.x + s.y * s.y - s.z * (1.0 - s.z)).abs();
            assert!(defect < 1e-8, "purity defect {defect} at t = {}", s.t);
        }
    }

    #[test]
    fn relaxation_is_faster_at_larger_alpha() {
        let start = TlsState::new(0.5, 0.0).unwrap();
        let mut settle = Vec::new();
        for alpha in [0.1, 0.2] {
            let p = params(1.0, 1.0, alpha, Temperature::Zero);
            let stable_z = tls_stationary(&p)
                .unwrap()
                .into_iter()
                .find(|q| q.stability == Stability::Stable)
                .unwrap()
                .z;
            let samples = tls_evolve(&p, &start, 1e-3, 200.0, 10).unwrap();
            settle.push(settle_time(&samples, stable_z, 0.01).expect("settles"));
        }
        assert!(
            settle[1] < settle[0],
            "alpha = 0.2 should settle before alpha = 0.1 ({} vs {})",
            settle[1],
            settle[0]
        );
    }

    #[test]
    fn alpha_sweep_is_monotone_at_zero_temperature() {
        let base = params(1.0, 1.0, 0.5, Temperature::Zero);
        let values: Vec<f64> = (0..=20).map(|k| k as f64 / 20.0).collect();
        let rows = sweep_stationary(&base, SweepAxis::Alpha, &values).unwrap();
        let branch = stable_branch(&rows);
        assert_eq!(branch.len(), values.len());
        assert_close(branch[0].1, (2.0 + 2.0f64.sqrt()) / 4.0, 1e-9);
        assert_close(branch.last().unwrap().1, 1.0, 1e-12);
        for pair in branch.windows(2) {
            assert!(
                pair[1].1 >= pair[0].1 - 1e-10,
                "stable branch dipped: {:?}",
                pair
            );
        }
    }

    #[test]
    fn alpha_one_column_of_temperature_sweep_is_boltzmann() {
        for t in [0.3, 0.9, 1.7] {
            let p = params(1.0, 1.0, 1.0, Temperature::Finite(t));
            let pts = tls_stationary(&p).unwrap();
            let z = pts
                .iter()
                .find(|q| q.stability == Stability::Stable)
                .unwrap()
                .z;
            assert_close(z, p.classical_boltzmann_occupation(), 1e-8);
        }
    }

    #[test]
    fn optical_bloch_free_evolution() {
        let rho_ge = Complex64::new(0.21, -0.13);
        let (d_gg, d_ge) = optical_bloch_rhs(0.8, rho_ge, Complex64::new(0.0, 0.0), 1.4, 0.0);
        assert_eq!(d_gg, 0.0);
        let want = -Complex64::i() * 1.4 * rho_ge;
        assert!((d_ge - want).norm() < 1e-15);
    }

    #[test]
    fn optical_bloch_conserves_total_population() {
        // The ee counterpart of the gg equation is its negative.
        let rho_gg = 0.63;
        let rho_ge = Complex64::new(0.1, 0.22);
        let rabi = Complex64::new(1.7, 0.4);
        let (d_gg, _) = optical_bloch_rhs(rho_gg, rho_ge, rabi, -0.8, 0.35);
        let rho_ee = 1.0 - rho_gg;
        let rho_eg = rho_ge.conj();
        let i = Complex64::i();
        let d_ee = -0.35 * rho_ee + (i * 0.5 * (rabi * rho_ge - rabi.conj() * rho_eg)).re;
        assert!((d_gg + d_ee).abs() < 1e-15);
    }
}
