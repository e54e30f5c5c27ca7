//! Black-Scholes call hedging: pricing, the hedge vector, the hedging-error
//! limit integrand, and the two grid designs specialized to the call.
//!
//! Market state is `Y = (S, R)` with `dS = μS dt + σS dB_1`, `dR = rR dt`,
//! `R(0) = 1`. The European call price is
//! `Π(t) = Φ(d₊)S − Ke^{−r(T−t)}Φ(d₋)` and the self-financing hedge vector is
//! `f = (Φ(d₊), −Φ(d₋)Ke^{−rT})`, so `Π(t) − Π(0) = ∫ f(Y) dY`.
//!
//! Hedging experiments are truncated at a horizon `V < T`: at maturity the
//! designed intensities degenerate (they vanish off the strike and blow up on
//! it), so the grid hypotheses only hold up to a constant time short of `T`.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::design::{min_std_theta, MeanIntegralEstimate, RateProcess};
use crate::error::{Error, Result};
use crate::integrand::Integrand;
use crate::intensity::Intensity;
use crate::model::SdeSpec;

/// Standard normal density.
#[inline]
pub fn norm_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

/// Standard normal CDF via the Abramowitz-Stegun 26.2.17 rational
/// approximation, absolute error below 7.5e-8.
pub fn norm_cdf(x: f64) -> f64 {
    let ax = x.abs();
    let t = 1.0 / (1.0 + 0.2316419 * ax);
    let poly = t
        * (0.319381530
            + t * (-0.356563782 + t * (1.781477937 + t * (-1.821255978 + t * 1.330274429))));
    let tail = norm_pdf(ax) * poly;
    if x >= 0.0 {
        1.0 - tail
    } else {
        tail
    }
}

/// Contract and model parameters for the call-hedging experiments.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct BsSpec {
    pub s0: f64,
    pub strike: f64,
    pub rate: f64,
    pub drift: f64,
    pub sigma: f64,
    pub maturity: f64,
    /// Truncation horizon `V < T` for hedging experiments.
    pub truncation: f64,
}

impl BsSpec {
    pub fn new(
        s0: f64,
        strike: f64,
        rate: f64,
        drift: f64,
        sigma: f64,
        maturity: f64,
        truncation: Option<f64>,
    ) -> Result<Self> {
        if !(s0 > 0.0 && strike > 0.0 && sigma > 0.0 && maturity > 0.0) {
            return Err(Error::Config(
                "spot, strike, volatility, and maturity must be positive".into(),
            ));
        }
        // default V = T − 0.05·T, configurable
        let truncation = truncation.unwrap_or(0.95 * maturity);
        if !(truncation > 0.0 && truncation < maturity) {
            return Err(Error::Config(format!(
                "truncation horizon must lie in (0, T), got {truncation} with T = {maturity}"
            )));
        }
        Ok(BsSpec {
            s0,
            strike,
            rate,
            drift,
            sigma,
            maturity,
            truncation,
        })
    }

    /// `d±(t) = (log(S/K) + (r ± σ²/2)(T−t)) / (σ√(T−t))`.
    pub fn d_pm(&self, s: f64, t: f64) -> Result<(f64, f64)> {
        if t >= self.maturity {
            return Err(Error::Domain(format!(
                "d± undefined at t = {t} >= maturity {}",
                self.maturity
            )));
        }
        if !(s > 0.0) {
            return Err(Error::Domain(format!("spot must be positive, got {s}")));
        }
        let ttm = self.maturity - t;
        let vol = self.sigma * ttm.sqrt();
        let base = (s / self.strike).ln();
        let d_plus = (base + (self.rate + 0.5 * self.sigma * self.sigma) * ttm) / vol;
        let d_minus = (base + (self.rate - 0.5 * self.sigma * self.sigma) * ttm) / vol;
        Ok((d_plus, d_minus))
    }

    /// Call price `Φ(d₊)S − Ke^{−r(T−t)}Φ(d₋)`.
    pub fn price(&self, s: f64, t: f64) -> Result<f64> {
        let (dp, dm) = self.d_pm(s, t)?;
        let ttm = self.maturity - t;
        Ok(norm_cdf(dp) * s - self.strike * (-self.rate * ttm).exp() * norm_cdf(dm))
    }

    /// Self-financing hedge vector `(Φ(d₊), −Φ(d₋)Ke^{−rT})` applied to the
    /// state `Y = (S, R)`.
    pub fn hedge_vector(&self, s: f64, t: f64) -> Result<[f64; 2]> {
        let (dp, dm) = self.d_pm(s, t)?;
        Ok([
            norm_cdf(dp),
            -norm_cdf(dm) * self.strike * (-self.rate * self.maturity).exp(),
        ])
    }

    /// Hedging-error limit integrand `φ(d₊)σS/√(2θ(T−t))`, defined up to the
    /// truncation horizon.
    pub fn error_integrand(&self, theta: f64, s: f64, t: f64) -> Result<f64> {
        if t > self.truncation {
            return Err(Error::Domain(format!(
                "hedging-error integrand truncated at V = {}, got t = {t}",
                self.truncation
            )));
        }
        let (dp, _) = self.d_pm(s, t)?;
        let ttm = self.maturity - t;
        Ok(norm_pdf(dp) * self.sigma * s / (2.0 * theta * ttm).sqrt())
    }

    /// The intensity-free error-rate process `f(t) = φ(d₊)σS/√(2(T−t))`
    /// consumed by the design strategies (state layout `(S, R)`).
    pub fn rate_process(&self) -> RateProcess {
        let spec = *self;
        Arc::new(move |t, y| {
            let s = y[0];
            match spec.d_pm(s, t) {
                Ok((dp, _)) => {
                    norm_pdf(dp) * spec.sigma * s / (2.0 * (spec.maturity - t)).sqrt()
                }
                Err(_) => 0.0,
            }
        })
    }

    /// The market model `Y = (S, R)` under the physical drift.
    pub fn model(&self) -> Result<SdeSpec> {
        SdeSpec::black_scholes(self.drift, self.sigma, self.rate, self.s0)
    }

    /// The hedge vector as an integrand with closed-form Jacobian (only the
    /// S-partials are nonzero; R carries no state dependence of the hedge).
    pub fn integrand(&self) -> Integrand {
        let spec = *self;
        let spec_jac = *self;
        Integrand::new(
            "bs-hedge",
            2,
            Arc::new(move |t, y, out| {
                let f = spec.hedge_vector(y[0], t).expect("t < maturity");
                out.copy_from_slice(&f);
            }),
            Some(Arc::new(move |t, y, out| {
                let s = y[0];
                let (dp, dm) = spec_jac.d_pm(s, t).expect("t < maturity");
                let vol = spec_jac.sigma * (spec_jac.maturity - t).sqrt();
                out.fill(0.0);
                // ∂Φ(d₊)/∂S and ∂(−Φ(d₋)Ke^{−rT})/∂S
                out[0] = norm_pdf(dp) / (s * vol);
                out[2] = -norm_pdf(dm) / (s * vol)
                    * spec_jac.strike
                    * (-spec_jac.rate * spec_jac.maturity).exp();
            })),
        )
        .expect("dimension 2")
    }

    /// No-bad-days intensity `θ(t) = c·φ(d₊)²σ²S²/(2(T−t))`.
    pub fn no_bad_days_theta(&self, c: f64, clamp: (f64, f64)) -> Result<Intensity> {
        if !(c > 0.0) || !c.is_finite() {
            return Err(Error::Config(format!(
                "no-bad-days constant must be positive, got {c}"
            )));
        }
        let rate = self.rate_process();
        Intensity::new("bs-no-bad-days", clamp, Arc::new(move |t, y| {
            let f = rate(t, y);
            c * f * f
        }))
    }

    /// Min-std intensity `θ(t) = C·f(t)/(n·∫_0^V E f ds)` with
    /// `f = φ(d₊)σS/√(2(T−t))`.
    pub fn min_std_theta(
        &self,
        budget: f64,
        mean_f: &MeanIntegralEstimate,
        n: u64,
        clamp: (f64, f64),
    ) -> Result<Intensity> {
        min_std_theta(&self.rate_process(), budget, mean_f, n, clamp)
    }
}
