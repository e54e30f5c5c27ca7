//! The intensity process θ controlling local grid density.
//!
//! Evaluators are always clamped to `[theta_min, theta_max]`. The clamp makes
//! the standing hypotheses (strict positivity, boundedness, Riemann
//! integrability of 1/θ) constructively true, and every activation is counted
//! so runs can report how often the raw formula left the admissible band.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default clamp band applied when a design does not choose its own.
pub const DEFAULT_CLAMP: (f64, f64) = (1e-3, 1e3);

/// Raw evaluator: `(t, state at the snapped mesh point)` → intensity.
pub type IntensityFn = Arc<dyn Fn(f64, &[f64]) -> f64 + Send + Sync>;

/// A clamped intensity process.
#[derive(Clone)]
pub struct Intensity {
    pub label: String,
    pub theta_min: f64,
    pub theta_max: f64,
    eval: IntensityFn,
}

impl fmt::Debug for Intensity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Intensity")
            .field("label", &self.label)
            .field("clamp", &(self.theta_min, self.theta_max))
            .finish()
    }
}

/// Outcome of one clamped evaluation.
#[derive(Debug, Clone, Copy)]
pub struct IntensityValue {
    pub value: f64,
    pub clamped: bool,
}

/// Running tally of clamp activations over a grid or an ensemble.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClampLog {
    pub evaluations: u64,
    pub clamped: u64,
}

impl ClampLog {
    pub fn record(&mut self, v: IntensityValue) {
        self.evaluations += 1;
        if v.clamped {
            self.clamped += 1;
        }
    }

    pub fn merge(&mut self, other: ClampLog) {
        self.evaluations += other.evaluations;
        self.clamped += other.clamped;
    }

    pub fn fraction(&self) -> f64 {
        if self.evaluations == 0 {
            0.0
        } else {
            self.clamped as f64 / self.evaluations as f64
        }
    }
}

impl Intensity {
    pub fn new(
        label: impl Into<String>,
        clamp: (f64, f64),
        eval: IntensityFn,
    ) -> Result<Self> {
        let (lo, hi) = clamp;
        if !(lo > 0.0) || !(hi >= lo) || !hi.is_finite() {
            return Err(Error::Config(format!(
                "clamp bounds must satisfy 0 < min <= max < inf, got [{lo}, {hi}]"
            )));
        }
        Ok(Intensity {
            label: label.into(),
            theta_min: lo,
            theta_max: hi,
            eval,
        })
    }

    /// Constant intensity; the clamp band is collapsed onto the value so the
    /// mesh-sizing rule sees the true maximum.
    pub fn constant(value: f64) -> Result<Self> {
        if !(value > 0.0) || !value.is_finite() {
            return Err(Error::Config(format!(
                "constant intensity must be positive and finite, got {value}"
            )));
        }
        Intensity::new("constant", (value, value), Arc::new(move |_, _| value))
    }

    /// Constant intensity inside a wider clamp band, so audit normalization
    /// can still rescale it (unlike [`Intensity::constant`], whose band is
    /// collapsed onto the value).
    pub fn constant_in_band(value: f64, clamp: (f64, f64)) -> Result<Self> {
        if !(value > 0.0) || !value.is_finite() {
            return Err(Error::Config(format!(
                "constant intensity must be positive and finite, got {value}"
            )));
        }
        Intensity::new("constant", clamp, Arc::new(move |_, _| value))
    }

    /// Deterministic time-dependent intensity.
    pub fn of_time(
        label: impl Into<String>,
        clamp: (f64, f64),
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        Intensity::new(label, clamp, Arc::new(move |t, _| f(t)))
    }

    /// Path-functional intensity reading the state at the snapped mesh point.
    pub fn of_state(
        label: impl Into<String>,
        clamp: (f64, f64),
        f: impl Fn(f64, &[f64]) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        Intensity::new(label, clamp, Arc::new(f))
    }

    /// Clamped evaluation. Errors if the raw evaluator returns something that
    /// no clamp can repair (NaN).
    pub fn evaluate(&self, t: f64, state: &[f64]) -> Result<IntensityValue> {
        let raw = (self.eval)(t, state);
        if raw.is_nan() {
            return Err(Error::IntensityViolation { value: raw, t });
        }
        let value = raw.clamp(self.theta_min, self.theta_max);
        Ok(IntensityValue {
            value,
            clamped: value != raw,
        })
    }

    /// Same intensity with the raw evaluator scaled by `gamma` (clamp band
    /// unchanged). Used by the audit to normalize candidates to a common
    /// expected intervention count.
    pub fn scaled(&self, gamma: f64) -> Result<Self> {
        if !(gamma > 0.0) || !gamma.is_finite() {
            return Err(Error::Config(format!("scale factor must be positive, got {gamma}")));
        }
        let inner = self.eval.clone();
        Intensity::new(
            format!("{}*{:.6}", self.label, gamma),
            (self.theta_min, self.theta_max),
            Arc::new(move |t, y| gamma * inner(t, y)),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clamping_is_applied_and_logged() {
        let theta = Intensity::of_state("square", (0.5, 4.0), |_, y| y[0] * y[0]).unwrap();
        let mut log = ClampLog::default();
        let v = theta.evaluate(0.0, &[10.0]).unwrap();
        log.record(v);
        assert_eq!(v.value, 4.0);
        assert!(v.clamped);
        let v = theta.evaluate(0.0, &[1.0]).unwrap();
        log.record(v);
        assert_eq!(v.value, 1.0);
        assert!(!v.clamped);
        assert_eq!(log.clamped, 1);
        assert_eq!(log.evaluations, 2);
    }

    #[test]
    fn nan_evaluations_error() {
        let theta = Intensity::of_state("nan", (0.5, 4.0), |_, _| f64::NAN).unwrap();
        assert!(theta.evaluate(0.1, &[0.0]).is_err());
    }

    #[test]
    fn negative_and_infinite_values_are_repaired_by_clamp() {
        let theta = Intensity::of_state("bad", (0.5, 4.0), |t, _| {
            if t < 0.5 {
                -3.0
            } else {
                f64::INFINITY
            }
        })
        .unwrap();
        assert_eq!(theta.evaluate(0.0, &[0.0]).unwrap().value, 0.5);
        assert_eq!(theta.evaluate(0.9, &[0.0]).unwrap().value, 4.0);
    }

    #[test]
    fn bad_clamp_bounds_rejected() {
        assert!(Intensity::of_state("x", (0.0, 1.0), |_, _| 1.0).is_err());
        assert!(Intensity::of_state("x", (2.0, 1.0), |_, _| 1.0).is_err());
        assert!(Intensity::of_state("x", (1.0, f64::INFINITY), |_, _| 1.0).is_err());
    }
}
