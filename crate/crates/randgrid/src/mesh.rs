//! Uniform time mesh carrying every path-valued object in the crate.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform mesh `t_i = i·T/M`, `i = 0..=M`, on `[0, T]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeMesh {
    horizon: f64,
    steps: usize,
}

impl TimeMesh {
    pub fn new(horizon: f64, steps: usize) -> Result<Self> {
        if steps == 0 {
            return Err(Error::Config("mesh must have at least one step".into()));
        }
        if !(horizon > 0.0) || !horizon.is_finite() {
            return Err(Error::Config(format!(
                "mesh horizon must be positive and finite, got {horizon}"
            )));
        }
        Ok(TimeMesh { horizon, steps })
    }

    /// Mesh fine enough that every random-grid interval of a grid with scale
    /// `n` and clamped intensity at most `theta_max` contains at least
    /// `kappa` mesh steps: `M = ceil(kappa · n · theta_max · T)`.
    pub fn for_grid(horizon: f64, n: u64, theta_max: f64, kappa: u32) -> Result<Self> {
        if kappa == 0 || n == 0 {
            return Err(Error::Config("kappa and n must be positive".into()));
        }
        if !(theta_max > 0.0) || !theta_max.is_finite() {
            return Err(Error::Config(format!(
                "theta_max must be positive and finite, got {theta_max}"
            )));
        }
        let steps = (kappa as f64 * n as f64 * theta_max * horizon).ceil() as usize;
        TimeMesh::new(horizon, steps.max(1))
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn dt(&self) -> f64 {
        self.horizon / self.steps as f64
    }

    /// Time of mesh point `i`; exact at both endpoints.
    pub fn time(&self, i: usize) -> f64 {
        debug_assert!(i <= self.steps);
        self.horizon * (i as f64 / self.steps as f64)
    }

    /// Index of the first mesh point at or after `t` (snap-up). Times within
    /// a relative 1e-9 of a mesh point snap to it rather than the next one,
    /// so grid times like k/10 do not drift upward from rounding.
    pub fn snap_up(&self, t: f64) -> usize {
        let x = t / self.dt();
        let r = x.round();
        let idx = if (x - r).abs() <= 1e-9 * (1.0 + x.abs()) {
            r as usize
        } else {
            x.ceil() as usize
        };
        idx.min(self.steps)
    }

    /// Iterator over mesh times `t_0..=t_M`.
    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..=self.steps).map(move |i| self.time(i))
    }
}
