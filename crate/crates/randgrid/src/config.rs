//! Experiment configuration: a single TOML file with typed sections.
//!
//! The parser is strict (unknown keys are errors, with line/column positions
//! from the TOML reader) and every field is validated before a run starts.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which end-to-end experiment a config drives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    /// Ensemble of `U^n` paths with moment summaries.
    Convergence,
    /// `U^n` against the sampled limit: KS, joint law, independence.
    LimitCompare,
    /// Intervention-count asymptotics `N/n` against `∫θ`.
    CountAsymptotics,
    /// Budget-normalized design comparison against the variance bound.
    DesignAudit,
    /// Black-Scholes hedging run under a designed intensity.
    Hedge,
    /// Step-moment functional deviation percentiles.
    LemmaPsi,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    /// `brownian`, `gbm`, or `black-scholes`.
    pub preset: String,
    /// State dimension (brownian only).
    pub dimension: Option<usize>,
    pub mu: Option<f64>,
    pub sigma: Option<f64>,
    pub y0: Option<f64>,
    /// Risk-free rate (black-scholes).
    pub rate: Option<f64>,
    pub strike: Option<f64>,
    /// Horizon `T`.
    pub maturity: Option<f64>,
    /// Truncation/design horizon `V ≤ T` (defaults: `T`, or `0.95·T` for
    /// black-scholes).
    pub truncation: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegrandConfig {
    /// `identity`, `square`, `sine`, `time-linear`, or `bs-hedge`.
    pub preset: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThetaConfig {
    /// `constant`, `no-bad-days`, or `min-std`.
    pub strategy: String,
    /// Constant intensity value.
    pub value: Option<f64>,
    /// No-bad-days constant `c`.
    pub c: Option<f64>,
    /// Min-std intervention budget `C`.
    pub budget: Option<f64>,
    pub clamp_min: Option<f64>,
    pub clamp_max: Option<f64>,
    /// Pilot ensemble size for design normalizers.
    pub pilot_paths: Option<u64>,
    pub pilot_mesh_steps: Option<usize>,
}

impl Default for ThetaConfig {
    fn default() -> Self {
        ThetaConfig {
            strategy: "constant".into(),
            value: Some(1.0),
            c: None,
            budget: None,
            clamp_min: None,
            clamp_max: None,
            pilot_paths: None,
            pilot_mesh_steps: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AuditConfig {
    /// Candidate strategies to normalize and compare; `min-std` and
    /// `constant` are supported.
    pub candidates: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PsiConfig {
    /// Moment power `p ∈ {1, 2}`.
    pub power: u32,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareConfig {
    pub alpha: Option<f64>,
    /// `array` or `collapsed` limit sampler.
    pub sampler: Option<String>,
}

/// Optional assertions that turn a run into a pass/fail test.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpectConfig {
    /// Target variance of `U^n` at the horizon (convergence kind).
    pub variance: Option<f64>,
    /// Relative tolerance for `variance`.
    pub variance_tol: Option<f64>,
    /// Bound on |mean N/n − mean ∫θ| / mean ∫θ (count kind).
    pub count_rel_dev: Option<f64>,
    /// Bound on the 95th percentile of the ψ sup-deviation (lemma-psi kind).
    pub psi_p95: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub seed: u64,
    /// Grid scale parameter.
    pub n: u64,
    /// Ensemble size.
    pub paths: u64,
    /// Mesh factor κ: every grid interval spans at least κ mesh steps.
    pub mesh_factor: Option<u32>,
    /// Explicit mesh size, overriding the κ rule (count/psi kinds mostly).
    pub mesh_steps: Option<usize>,
    /// Time bins recorded per path for variance profiles.
    pub bins: Option<usize>,
    /// Export the first k paths in full (path/grid/error CSV files).
    pub dump_paths: Option<u64>,
    pub model: ModelConfig,
    pub integrand: Option<IntegrandConfig>,
    #[serde(default)]
    pub theta: ThetaConfig,
    pub audit: Option<AuditConfig>,
    pub psi: Option<PsiConfig>,
    pub compare: Option<CompareConfig>,
    #[serde(default)]
    pub expect: ExpectConfig,
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let config: ExperimentConfig = toml::from_str(text)
            .map_err(|e| Error::Config(format!("config parse error: {e}")))?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::Config(format!("cannot read config {}: {e}", path.display()))
        })?;
        Self::from_toml_str(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::Config("n must be positive".into()));
        }
        if self.paths == 0 {
            return Err(Error::Config("paths must be positive".into()));
        }
        if self.mesh_factor == Some(0) {
            return Err(Error::Config("mesh_factor must be positive".into()));
        }
        if self.mesh_steps == Some(0) {
            return Err(Error::Config("mesh_steps must be positive".into()));
        }
        match self.model.preset.as_str() {
            "brownian" | "gbm" | "black-scholes" => {}
            other => {
                return Err(Error::Config(format!(
                    "unknown model preset '{other}' (expected brownian, gbm, or black-scholes)"
                )))
            }
        }
        if let Some(integrand) = &self.integrand {
            match integrand.preset.as_str() {
                "identity" | "square" | "sine" | "time-linear" | "bs-hedge" => {}
                other => {
                    return Err(Error::Config(format!(
                        "unknown integrand preset '{other}'"
                    )))
                }
            }
        }
        match self.theta.strategy.as_str() {
            "constant" | "no-bad-days" | "min-std" => {}
            other => {
                return Err(Error::Config(format!(
                    "unknown theta strategy '{other}'"
                )))
            }
        }
        if let Some(compare) = &self.compare {
            if let Some(s) = &compare.sampler {
                if s != "array" && s != "collapsed" {
                    return Err(Error::Config(format!("unknown limit sampler '{s}'")));
                }
            }
        }
        if let Some(psi) = &self.psi {
            if psi.power != 1 && psi.power != 2 {
                return Err(Error::Config(format!(
                    "psi power must be 1 or 2, got {}",
                    psi.power
                )));
            }
        }
        Ok(())
    }

    /// Horizon `T` (defaults to 1).
    pub fn horizon(&self) -> f64 {
        self.model.maturity.unwrap_or(1.0)
    }

    /// Design/evaluation horizon `V` (defaults to `T`, or `0.95·T` for
    /// black-scholes).
    pub fn truncation(&self) -> f64 {
        match self.model.truncation {
            Some(v) => v,
            None if self.model.preset == "black-scholes" => 0.95 * self.horizon(),
            None => self.horizon(),
        }
    }

    pub fn clamp(&self) -> (f64, f64) {
        (
            self.theta.clamp_min.unwrap_or(crate::intensity::DEFAULT_CLAMP.0),
            self.theta.clamp_max.unwrap_or(crate::intensity::DEFAULT_CLAMP.1),
        )
    }

    pub fn kappa(&self) -> u32 {
        self.mesh_factor.unwrap_or(16)
    }
}
