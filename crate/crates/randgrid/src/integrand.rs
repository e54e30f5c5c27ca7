//! Integrand vector fields `f = (f_1, …, f_d)` and their Jacobians.
//!
//! Besides the state, evaluators receive the current time; a time-dependent
//! integrand is equivalent to a time-free one on a state extended with a
//! clock coordinate, and passing `t` directly avoids carrying that extra
//! coordinate through every simulation.

use std::fmt;
use std::sync::Arc;

use rand::Rng;

use crate::error::{Error, Result};

/// Writes `f(t, y)` into `out` (d entries).
pub type VectorFieldFn = Arc<dyn Fn(f64, &[f64], &mut [f64]) + Send + Sync>;
/// Writes `∂f_i/∂x_j (t, y)` into `out` (d×d entries, row-major, row = i).
pub type JacobianFn = Arc<dyn Fn(f64, &[f64], &mut [f64]) + Send + Sync>;

/// A continuously differentiable integrand with an optional closed-form
/// Jacobian; central finite differences are used when none is supplied.
#[derive(Clone)]
pub struct Integrand {
    pub dim: usize,
    pub label: String,
    f: VectorFieldFn,
    jacobian: Option<JacobianFn>,
}

impl fmt::Debug for Integrand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Integrand")
            .field("dim", &self.dim)
            .field("label", &self.label)
            .field("closed_form_jacobian", &self.jacobian.is_some())
            .finish()
    }
}

impl Integrand {
    pub fn new(
        label: impl Into<String>,
        dim: usize,
        f: VectorFieldFn,
        jacobian: Option<JacobianFn>,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Config("integrand dimension must be >= 1".into()));
        }
        Ok(Integrand {
            dim,
            label: label.into(),
            f,
            jacobian,
        })
    }

    #[inline]
    pub fn eval_into(&self, t: f64, y: &[f64], out: &mut [f64]) {
        (self.f)(t, y, out);
    }

    /// Jacobian at `(t, y)`: closed form when available, otherwise central
    /// finite differences with per-coordinate step `1e-6·(1 + |y_j|)`.
    pub fn jacobian_into(&self, t: f64, y: &[f64], out: &mut [f64]) {
        if let Some(jac) = &self.jacobian {
            jac(t, y, out);
            return;
        }
        let d = self.dim;
        let mut yp = y.to_vec();
        let mut fp = vec![0.0; d];
        let mut fm = vec![0.0; d];
        for j in 0..d {
            let h = 1e-6 * (1.0 + y[j].abs());
            yp[j] = y[j] + h;
            (self.f)(t, &yp, &mut fp);
            yp[j] = y[j] - h;
            (self.f)(t, &yp, &mut fm);
            yp[j] = y[j];
            for i in 0..d {
                out[i * d + j] = (fp[i] - fm[i]) / (2.0 * h);
            }
        }
    }

    /// Checks a supplied closed-form Jacobian against central finite
    /// differences at random states; relative error must stay within 1e-5.
    pub fn check_jacobian(
        &self,
        rng: &mut impl Rng,
        trials: usize,
        t_range: (f64, f64),
        coord_range: (f64, f64),
    ) -> Result<()> {
        let Some(jac) = &self.jacobian else {
            return Ok(());
        };
        let d = self.dim;
        let mut closed = vec![0.0; d * d];
        let mut numeric = vec![0.0; d * d];
        let probe = Integrand {
            dim: d,
            label: self.label.clone(),
            f: self.f.clone(),
            jacobian: None,
        };
        for _ in 0..trials {
            let t = t_range.0 + (t_range.1 - t_range.0) * rng.random::<f64>();
            let y: Vec<f64> = (0..d)
                .map(|_| coord_range.0 + (coord_range.1 - coord_range.0) * rng.random::<f64>())
                .collect();
            jac(t, &y, &mut closed);
            probe.jacobian_into(t, &y, &mut numeric);
            for idx in 0..d * d {
                let scale = 1.0 + closed[idx].abs();
                if (closed[idx] - numeric[idx]).abs() / scale > 1e-5 {
                    return Err(Error::Config(format!(
                        "jacobian of '{}' disagrees with finite differences at t={t}, y={y:?}: \
                         entry {idx} closed {} vs numeric {}",
                        self.label, closed[idx], numeric[idx]
                    )));
                }
            }
        }
        Ok(())
    }

    /// `f(x) = x` coordinate-wise; Jacobian is the identity.
    pub fn identity(dim: usize) -> Self {
        Integrand {
            dim,
            label: "identity".into(),
            f: Arc::new(|_t, y, out| out.copy_from_slice(y)),
            jacobian: Some(Arc::new(move |_t, _y, out| {
                out.fill(0.0);
                for i in 0..dim {
                    out[i * dim + i] = 1.0;
                }
            })),
        }
    }

    /// `f(x) = x²` in one dimension.
    pub fn square() -> Self {
        Integrand {
            dim: 1,
            label: "square".into(),
            f: Arc::new(|_t, y, out| out[0] = y[0] * y[0]),
            jacobian: Some(Arc::new(|_t, y, out| out[0] = 2.0 * y[0])),
        }
    }

    /// `f(x) = sin x` in one dimension.
    pub fn sine() -> Self {
        Integrand {
            dim: 1,
            label: "sine".into(),
            f: Arc::new(|_t, y, out| out[0] = y[0].sin()),
            jacobian: Some(Arc::new(|_t, y, out| out[0] = y[0].cos())),
        }
    }

    /// `f(t, x) = (1+t)·x` in one dimension: the state derivative `1+t` is
    /// deterministic and time-varying, which makes the design strategies
    /// exercise a non-constant rate with no randomness in it.
    pub fn time_linear() -> Self {
        Integrand {
            dim: 1,
            label: "time-linear".into(),
            f: Arc::new(|t, y, out| out[0] = (1.0 + t) * y[0]),
            jacobian: Some(Arc::new(|t, _y, out| out[0] = 1.0 + t)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn closed_form_jacobians_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for integrand in [
            Integrand::identity(3),
            Integrand::square(),
            Integrand::sine(),
            Integrand::time_linear(),
        ] {
            integrand
                .check_jacobian(&mut rng, 50, (0.0, 1.0), (-2.0, 2.0))
                .unwrap();
        }
    }

    #[test]
    fn inconsistent_jacobian_is_caught() {
        let broken = Integrand::new(
            "broken",
            1,
            Arc::new(|_t, y: &[f64], out: &mut [f64]| out[0] = y[0] * y[0]),
            Some(Arc::new(|_t, y: &[f64], out: &mut [f64]| out[0] = 3.0 * y[0])),
        )
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        assert!(broken
            .check_jacobian(&mut rng, 20, (0.0, 1.0), (0.5, 2.0))
            .is_err());
    }

    #[test]
    fn finite_difference_fallback_is_accurate() {
        let no_jac = Integrand::new(
            "cubic",
            1,
            Arc::new(|_t, y: &[f64], out: &mut [f64]| out[0] = y[0].powi(3)),
            None,
        )
        .unwrap();
        let mut out = [0.0];
        no_jac.jacobian_into(0.0, &[1.5], &mut out);
        assert!((out[0] - 3.0 * 1.5 * 1.5).abs() < 1e-6);
    }
}
