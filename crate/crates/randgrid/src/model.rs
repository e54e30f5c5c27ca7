//! SDE coefficient specifications and the named model presets.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Drift evaluator: writes α(y) into `out` (d entries).
pub type DriftFn = Arc<dyn Fn(&[f64], &mut [f64]) + Send + Sync>;
/// Diffusion evaluator: writes β(y) into `out` (d×d entries, row-major).
pub type DiffusionFn = Arc<dyn Fn(&[f64], &mut [f64]) + Send + Sync>;

/// Coefficients of `dY = α(Y)dt + β(Y)dB` with initial state.
///
/// The caller declares that α and β satisfy the linear-growth and Lipschitz
/// conditions needed for a unique continuous solution; the flag is carried
/// for reporting, not enforced.
#[derive(Clone)]
pub struct SdeSpec {
    pub dim: usize,
    pub initial: Vec<f64>,
    pub label: String,
    pub lipschitz_declared: bool,
    drift: DriftFn,
    diffusion: DiffusionFn,
}

impl fmt::Debug for SdeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SdeSpec")
            .field("dim", &self.dim)
            .field("initial", &self.initial)
            .field("label", &self.label)
            .finish()
    }
}

impl SdeSpec {
    pub fn new(
        label: impl Into<String>,
        initial: Vec<f64>,
        drift: DriftFn,
        diffusion: DiffusionFn,
    ) -> Result<Self> {
        let dim = initial.len();
        if dim == 0 {
            return Err(Error::Config("state dimension must be >= 1".into()));
        }
        Ok(SdeSpec {
            dim,
            initial,
            label: label.into(),
            lipschitz_declared: true,
            drift,
            diffusion,
        })
    }

    pub fn drift_into(&self, y: &[f64], out: &mut [f64]) {
        (self.drift)(y, out);
    }

    pub fn diffusion_into(&self, y: &[f64], out: &mut [f64]) {
        (self.diffusion)(y, out);
    }

    /// `Y = y0 + B`: zero drift, identity diffusion. The Euler scheme
    /// reproduces it exactly, so paths built from this spec are bitwise the
    /// shifted Brownian path.
    pub fn brownian(dim: usize, y0: Vec<f64>) -> Result<Self> {
        if y0.len() != dim {
            return Err(Error::Config(format!(
                "initial state has {} entries, model dimension is {dim}",
                y0.len()
            )));
        }
        SdeSpec::new(
            "brownian",
            y0,
            Arc::new(|_y, out| out.fill(0.0)),
            Arc::new(move |_y, out| {
                out.fill(0.0);
                for i in 0..dim {
                    out[i * dim + i] = 1.0;
                }
            }),
        )
    }

    /// Geometric Brownian motion, one dimension:
    /// `dY = μY dt + σY dB`.
    pub fn gbm(mu: f64, sigma: f64, y0: f64) -> Result<Self> {
        if !(y0 > 0.0) || !(sigma > 0.0) {
            return Err(Error::Config(
                "gbm needs positive initial value and volatility".into(),
            ));
        }
        SdeSpec::new(
            "gbm",
            vec![y0],
            Arc::new(move |y, out| out[0] = mu * y[0]),
            Arc::new(move |y, out| out[0] = sigma * y[0]),
        )
    }

    /// Black-Scholes market state `Y = (S, R)`:
    /// `dS = μS dt + σS dB_1`, `dR = rR dt`, `R(0) = 1`.
    /// Only β_{1,1} = σS is nonzero.
    pub fn black_scholes(mu: f64, sigma: f64, rate: f64, s0: f64) -> Result<Self> {
        if !(s0 > 0.0) || !(sigma > 0.0) {
            return Err(Error::Config(
                "black-scholes needs positive spot and volatility".into(),
            ));
        }
        SdeSpec::new(
            "black-scholes",
            vec![s0, 1.0],
            Arc::new(move |y, out| {
                out[0] = mu * y[0];
                out[1] = rate * y[1];
            }),
            Arc::new(move |y, out| {
                out.fill(0.0);
                out[0] = sigma * y[0];
            }),
        )
    }
}
