//! Annealing schedules for the classical-Hamiltonian weight `s(t)`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ScheduleError {
    #[error("schedule horizon must be positive, got {0}")]
    NonPositiveHorizon(f64),
    #[error("schedule index must be positive, got {0}")]
    NonPositiveIndex(f64),
    #[error("schedule scale must lie in (0, 1], got {0}")]
    ScaleOutOfRange(f64),
    #[error("constant schedule value must lie in [0, 1], got {0}")]
    ConstantOutOfRange(f64),
    #[error("non-finite schedule parameter")]
    NonFinite,
}

/// Either a quench (constant `s`) or a power-law ramp
/// `s(t) = scale * (t / tau)^gamma`, clamped to `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "kebab-case")]
pub enum Schedule {
    Constant { s: f64, tau: f64 },
    Power { gamma: f64, tau: f64, scale: f64 },
}

impl Schedule {
    /// Power-law ramp reaching `scale` at `tau`.
    pub fn power(gamma: f64, tau: f64, scale: f64) -> Result<Self, ScheduleError> {
        let sched = Schedule::Power { gamma, tau, scale };
        sched.validate()?;
        Ok(sched)
    }

    /// Quench: `s` held fixed for a run of length `tau`.
    pub fn constant(s: f64, tau: f64) -> Result<Self, ScheduleError> {
        let sched = Schedule::Constant { s, tau };
        sched.validate()?;
        Ok(sched)
    }

    pub fn validate(&self) -> Result<(), ScheduleError> {
        match *self {
            Schedule::Constant { s, tau } => {
                if !s.is_finite() || !tau.is_finite() {
                    return Err(ScheduleError::NonFinite);
                }
                if tau <= 0.0 {
                    return Err(ScheduleError::NonPositiveHorizon(tau));
                }
                if !(0.0..=1.0).contains(&s) {
                    return Err(ScheduleError::ConstantOutOfRange(s));
                }
            }
            Schedule::Power { gamma, tau, scale } => {
                if !gamma.is_finite() || !tau.is_finite() || !scale.is_finite() {
                    return Err(ScheduleError::NonFinite);
                }
                if tau <= 0.0 {
                    return Err(ScheduleError::NonPositiveHorizon(tau));
                }
                if gamma <= 0.0 {
                    return Err(ScheduleError::NonPositiveIndex(gamma));
                }
                if !(scale > 0.0 && scale <= 1.0) {
                    return Err(ScheduleError::ScaleOutOfRange(scale));
                }
            }
        }
        Ok(())
    }

    /// Total run length the schedule is defined on.
    pub fn horizon(&self) -> f64 {
        match *self {
            Schedule::Constant { tau, .. } | Schedule::Power { tau, .. } => tau,
        }
    }

    pub fn value(&self, t: f64) -> f64 {
        match *self {
            Schedule::Constant { s, .. } => s,
            Schedule::Power { gamma, tau, scale } => {
                let x = (t / tau).max(0.0);
                (scale * x.powf(gamma)).clamp(0.0, 1.0)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn power_schedule_endpoints() {
        let s = Schedule::power(0.5, 100.0, 0.8).unwrap();
        assert_eq!(s.value(0.0), 0.0);
        assert!((s.value(100.0) - 0.8).abs() < 1e-15);
        // Non-decreasing on a coarse grid.
        let mut prev = -1.0;
        for k in 0..=100 {
            let v = s.value(k as f64);
            assert!(v >= prev);
            prev = v;
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(Schedule::power(0.0, 10.0, 1.0).is_err());
        assert!(Schedule::power(0.5, 0.0, 1.0).is_err());
        assert!(Schedule::power(0.5, 10.0, 1.5).is_err());
        assert!(Schedule::constant(1.2, 10.0).is_err());
        assert!(Schedule::constant(0.5, -1.0).is_err());
    }
}
