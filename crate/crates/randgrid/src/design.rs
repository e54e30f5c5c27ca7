//! Grid-design strategies in the asymptotic regime.
//!
//! With grid intensity θ the scaled error converges to `∫ f/√θ dW` for the
//! model's error-rate process `f`, so in the asymptotic regime
//!
//! ```text
//! E N = n ∫ E θ dt,       E ε(t)² = (1/n) ∫_0^t E[f²/θ] ds.
//! ```
//!
//! Two designs are implemented on top of these identities: `θ = c·f²`, which
//! turns the limiting error into a time-homogeneous Brownian motion
//! (`ε = W(t)/√(cn)`, "no bad days"), and `θ = C·f/(n·∫E f ds)`, which
//! minimizes the terminal standard deviation subject to the intervention
//! budget `E N ≤ C` and attains the lower bound `E ε(T)² = (∫E f ds)²/C`.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::ensemble::{par_map, ErrorPipeline};
use crate::error::{Error, Result};
use crate::grid::build_grid;
use crate::intensity::Intensity;
use crate::integrand::Integrand;
use crate::mesh::TimeMesh;
use crate::model::SdeSpec;
use crate::path::{simulate_brownian, simulate_sde};
use crate::rng::SeedPlan;
use crate::stats::moments;

/// Nonnegative error-rate process `(t, state) → f(t)` consumed by designs.
pub type RateProcess = Arc<dyn Fn(f64, &[f64]) -> f64 + Send + Sync>;

/// Monte Carlo estimate of `∫_0^V E f(s) ds`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct MeanIntegralEstimate {
    pub value: f64,
    pub stderr: f64,
    pub paths: u64,
}

/// Estimates `∫_0^V E f ds` by per-path mesh quadrature of the rate process
/// over a pilot ensemble (uses the plan's pilot substreams, so it never pairs
/// with evaluation ensembles).
pub fn estimate_mean_f_integral(
    model: &SdeSpec,
    rate: &RateProcess,
    horizon: f64,
    mesh: TimeMesh,
    paths: u64,
    plan: &SeedPlan,
) -> Result<MeanIntegralEstimate> {
    estimate_rate_integral(model, rate, horizon, mesh, paths, plan, false)
}

/// Same as [`estimate_mean_f_integral`] but for `∫_0^V E f² ds` (the
/// no-bad-days intervention-count normalizer).
pub fn estimate_mean_f_squared_integral(
    model: &SdeSpec,
    rate: &RateProcess,
    horizon: f64,
    mesh: TimeMesh,
    paths: u64,
    plan: &SeedPlan,
) -> Result<MeanIntegralEstimate> {
    estimate_rate_integral(model, rate, horizon, mesh, paths, plan, true)
}

fn estimate_rate_integral(
    model: &SdeSpec,
    rate: &RateProcess,
    horizon: f64,
    mesh: TimeMesh,
    paths: u64,
    plan: &SeedPlan,
    squared: bool,
) -> Result<MeanIntegralEstimate> {
    if paths < 2 {
        return Err(Error::InsufficientData(
            "mean-integral estimate needs >= 2 paths".into(),
        ));
    }
    let per_path = par_map(paths, None, |i| {
        let b = simulate_brownian(mesh, model.dim, plan.pilot_stream(i))?;
        let y = simulate_sde(model, &b)?;
        let dt = mesh.dt();
        let upto = mesh.snap_up(horizon);
        let mut acc = 0.0;
        for j in 0..upto {
            let v = rate(mesh.time(j), y.at(j));
            acc += if squared { v * v } else { v } * dt;
        }
        Ok(acc)
    })?;
    let m = moments(&per_path);
    Ok(MeanIntegralEstimate {
        value: m.mean,
        stderr: m.stderr,
        paths,
    })
}

/// Prediction attached to a designed intensity.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct DesignPrediction {
    /// Predicted expected intervention count.
    pub expected_interventions: f64,
    /// Predicted `E ε(V)²` of the scaled error `ε = U^n/√n` at the horizon.
    pub error_variance: f64,
}

/// `θ(t) = c·f(t)²`: the limiting error becomes `W(t)/√(cn)`.
pub fn no_bad_days_theta(rate: &RateProcess, c: f64, clamp: (f64, f64)) -> Result<Intensity> {
    if !(c > 0.0) || !c.is_finite() {
        return Err(Error::Config(format!("no-bad-days constant must be positive, got {c}")));
    }
    let rate = rate.clone();
    Intensity::new("no-bad-days", clamp, Arc::new(move |t, y| {
        let f = rate(t, y);
        c * f * f
    }))
}

/// Prediction for the no-bad-days design: `E N = c·n·∫E f² ds` and
/// `E ε(V)² = V/(c·n)`.
pub fn predict_no_bad_days(
    c: f64,
    n: u64,
    horizon: f64,
    mean_f_squared: &MeanIntegralEstimate,
) -> DesignPrediction {
    DesignPrediction {
        expected_interventions: c * n as f64 * mean_f_squared.value,
        error_variance: horizon / (c * n as f64),
    }
}

/// `θ(t) = C·f(t)/(n·∫_0^V E f ds)`: minimum terminal standard deviation
/// under the budget `E N ≤ C`.
pub fn min_std_theta(
    rate: &RateProcess,
    budget: f64,
    mean_f: &MeanIntegralEstimate,
    n: u64,
    clamp: (f64, f64),
) -> Result<Intensity> {
    if !(budget > 0.0) || !budget.is_finite() {
        return Err(Error::Config(format!("budget must be positive, got {budget}")));
    }
    if !(mean_f.value > 0.0) {
        return Err(Error::DegenerateDesign(format!(
            "∫E f ds estimate must be positive, got {}",
            mean_f.value
        )));
    }
    let rate = rate.clone();
    let scale = budget / (n as f64 * mean_f.value);
    Intensity::new("min-std", clamp, Arc::new(move |t, y| scale * rate(t, y)))
}

/// Prediction for the min-std design: `E N = C` and
/// `E ε(V)² = (∫E f ds)²/C` (the optimal bound, attained).
pub fn predict_min_std(budget: f64, mean_f: &MeanIntegralEstimate) -> DesignPrediction {
    DesignPrediction {
        expected_interventions: budget,
        error_variance: mean_f.value * mean_f.value / budget,
    }
}

/// Monte Carlo evaluation of `E ε(V)² = (1/n)∫_0^V E[f²/θ] ds` for a given
/// intensity (the analytic route: quadrature along simulated paths, no grids).
/// Returns `(estimate, stderr)`.
pub fn error_variance(
    model: &SdeSpec,
    rate: &RateProcess,
    theta: &Intensity,
    n: u64,
    horizon: f64,
    mesh: TimeMesh,
    paths: u64,
    plan: &SeedPlan,
) -> Result<(f64, f64)> {
    let per_path = par_map(paths, None, |i| {
        let b = simulate_brownian(mesh, model.dim, plan.pilot_stream(i))?;
        let y = simulate_sde(model, &b)?;
        let dt = mesh.dt();
        let upto = mesh.snap_up(horizon);
        let mut acc = 0.0;
        for j in 0..upto {
            let t = mesh.time(j);
            let f = rate(t, y.at(j));
            let th = theta.evaluate(t, y.at(j))?.value;
            acc += f * f / th * dt;
        }
        Ok(acc / n as f64)
    })?;
    let m = moments(&per_path);
    Ok((m.mean, m.stderr))
}

/// One row of the optimality audit.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AuditRow {
    pub strategy: String,
    /// EN after normalization (the common budget).
    pub en_pred: f64,
    /// Mean realized intervention count over the evaluation ensemble.
    pub en_real: f64,
    /// Analytic-route variance prediction via the variance identity.
    pub var_pred: f64,
    /// Realized `Var(U^n(V))/n` from the full pipeline.
    pub var_real: f64,
    pub var_real_stderr: f64,
    /// Optimal lower bound `(∫E f ds)²/C`.
    pub bound: f64,
    /// Fraction of clamped intensity evaluations during grid construction.
    pub clamp_fraction: f64,
}

/// Audit configuration: the model/integrand pair the designs hedge, the
/// budget, and the evaluation scales.
#[derive(Clone)]
pub struct AuditSetup {
    pub model: SdeSpec,
    pub integrand: Integrand,
    pub rate: RateProcess,
    pub budget: f64,
    pub n: u64,
    pub kappa: u32,
    /// Mesh horizon `T`.
    pub mesh_horizon: f64,
    /// Design/evaluation horizon `V ≤ T`.
    pub horizon: f64,
    pub eval_paths: u64,
    pub pilot_paths: u64,
    pub pilot_mesh_steps: usize,
    pub jobs: Option<usize>,
}

/// Rescales `theta` until the Monte Carlo estimate of `E N` over the pilot
/// ensemble matches the budget within 1%.
pub fn normalize_to_budget(
    setup: &AuditSetup,
    theta: &Intensity,
    plan: &SeedPlan,
) -> Result<Intensity> {
    let mesh = TimeMesh::new(setup.mesh_horizon, setup.pilot_mesh_steps)?;
    let mut gamma = 1.0;
    let mut current = theta.clone();
    for _ in 0..12 {
        let counts = par_map(setup.pilot_paths, setup.jobs, |i| {
            let b = simulate_brownian(mesh, setup.model.dim, plan.pilot_stream(i))?;
            let y = simulate_sde(&setup.model, &b)?;
            let grid = build_grid(&current, setup.n, &y, setup.horizon)?;
            Ok(grid.intervention_count() as f64)
        })?;
        let en = moments(&counts).mean;
        if (en - setup.budget).abs() <= 0.01 * setup.budget {
            return Ok(current);
        }
        gamma *= setup.budget / en;
        current = theta.scaled(gamma)?;
    }
    Err(Error::AuditConfig(format!(
        "could not normalize '{}' to EN = {} within 1% in 12 iterations",
        theta.label, setup.budget
    )))
}

/// Runs the full audit: normalizes every candidate to the budget, evaluates
/// each by the analytic variance identity and by the full `U^n` pipeline, and
/// reports the optimal bound alongside.
pub fn optimality_audit(
    setup: &AuditSetup,
    candidates: Vec<(String, Intensity)>,
    plan: &SeedPlan,
) -> Result<Vec<AuditRow>> {
    if candidates.is_empty() {
        return Err(Error::AuditConfig("no candidates".into()));
    }
    let pilot_mesh = TimeMesh::new(setup.mesh_horizon, setup.pilot_mesh_steps)?;
    let pilot_plan = plan.derived(0x70696c6f74); // pilot ensembles never pair with evaluation
    let mean_f = estimate_mean_f_integral(
        &setup.model,
        &setup.rate,
        setup.horizon,
        pilot_mesh,
        setup.pilot_paths,
        &pilot_plan,
    )?;
    if mean_f.value <= 0.0 {
        return Err(Error::DegenerateDesign(
            "audit rate process integrates to zero".into(),
        ));
    }
    let bound = mean_f.value * mean_f.value / setup.budget;

    let mut rows = Vec::with_capacity(candidates.len());
    for (strategy, theta) in candidates {
        let normalized = normalize_to_budget(setup, &theta, &pilot_plan)?;
        let (var_pred, _) = error_variance(
            &setup.model,
            &setup.rate,
            &normalized,
            setup.n,
            setup.horizon,
            pilot_mesh,
            setup.pilot_paths,
            &pilot_plan,
        )?;
        let mesh = TimeMesh::for_grid(
            setup.mesh_horizon,
            setup.n,
            normalized.theta_max,
            setup.kappa,
        )?;
        let pipeline = ErrorPipeline::new(
            setup.model.clone(),
            setup.integrand.clone(),
            normalized.clone(),
            setup.n,
            mesh,
            setup.horizon,
        );
        let summaries = pipeline.run(plan, setup.eval_paths, setup.jobs)?;
        let counts: Vec<f64> = summaries.iter().map(|s| s.interventions as f64).collect();
        let eps: Vec<f64> = summaries
            .iter()
            .map(|s| s.u_terminal / (setup.n as f64).sqrt())
            .collect();
        let eps_m = moments(&eps);
        let var_stderr = eps_m.variance * (2.0 / (eps.len() as f64 - 1.0)).sqrt();
        let clamp = summaries
            .iter()
            .fold(crate::intensity::ClampLog::default(), |mut acc, s| {
                acc.merge(s.clamp);
                acc
            });
        rows.push(AuditRow {
            strategy,
            en_pred: setup.budget,
            en_real: moments(&counts).mean,
            var_pred,
            var_real: eps_m.variance,
            var_real_stderr: var_stderr,
            bound,
            clamp_fraction: clamp.fraction(),
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_rate() -> RateProcess {
        Arc::new(|_t, _y| 1.0)
    }

    #[test]
    fn constant_rate_mean_integral_is_exact() {
        let model = SdeSpec::brownian(1, vec![0.0]).unwrap();
        let mesh = TimeMesh::new(1.0, 256).unwrap();
        let est = estimate_mean_f_integral(
            &model,
            &unit_rate(),
            1.0,
            mesh,
            16,
            &SeedPlan::new(1),
        )
        .unwrap();
        assert!((est.value - 1.0).abs() < 1e-12);
        assert!(est.stderr < 1e-12);
    }

    #[test]
    fn deterministic_time_rate_quadrature() {
        // f(t) = t on [0,1]: ∫ = 1/2 up to O(Δt) quadrature error
        let model = SdeSpec::brownian(1, vec![0.0]).unwrap();
        let mesh = TimeMesh::new(1.0, 2048).unwrap();
        let rate: RateProcess = Arc::new(|t, _| t);
        let est =
            estimate_mean_f_integral(&model, &rate, 1.0, mesh, 8, &SeedPlan::new(2)).unwrap();
        assert!((est.value - 0.5).abs() < 1e-3, "value {}", est.value);
    }

    #[test]
    fn squared_brownian_rate_matches_closed_form() {
        // f(t) = B(t)²: ∫ E B² ds = 1/2; estimate within 3 stderr.
        let model = SdeSpec::brownian(1, vec![0.0]).unwrap();
        let mesh = TimeMesh::new(1.0, 512).unwrap();
        let rate: RateProcess = Arc::new(|_t, y| y[0] * y[0]);
        let est = estimate_mean_f_integral(&model, &rate, 1.0, mesh, 4000, &SeedPlan::new(3))
            .unwrap();
        assert!(
            (est.value - 0.5).abs() <= 3.0 * est.stderr,
            "value {} stderr {}",
            est.value,
            est.stderr
        );
    }

    #[test]
    fn nbd_constant_rate_reduces_to_constant_theta() {
        let theta = no_bad_days_theta(&unit_rate(), 2.0, (1e-3, 1e3)).unwrap();
        assert_eq!(theta.evaluate(0.3, &[0.0]).unwrap().value, 2.0);
        let est = MeanIntegralEstimate {
            value: 1.0,
            stderr: 0.0,
            paths: 1,
        };
        let pred = predict_no_bad_days(2.0, 100, 1.0, &est);
        assert!((pred.expected_interventions - 200.0).abs() < 1e-12);
    }

    #[test]
    fn nbd_quadratic_rate_prediction() {
        // f(t) = t on [0,1], c = 1: EN/n = ∫ t² dt = 1/3
        let model = SdeSpec::brownian(1, vec![0.0]).unwrap();
        let mesh = TimeMesh::new(1.0, 4096).unwrap();
        let rate: RateProcess = Arc::new(|t, _| t);
        let fsq = estimate_mean_f_squared_integral(&model, &rate, 1.0, mesh, 8, &SeedPlan::new(4))
            .unwrap();
        let pred = predict_no_bad_days(1.0, 1, 1.0, &fsq);
        assert!(
            (pred.expected_interventions - 1.0 / 3.0).abs() < 1e-3,
            "EN/n {}",
            pred.expected_interventions
        );
    }

    #[test]
    fn min_std_constant_rate() {
        // f ≡ 1, V = 1 ⇒ ∫E f = 1; C = 100 ⇒ θ ≡ 100/n, predicted std 0.1
        let est = MeanIntegralEstimate {
            value: 1.0,
            stderr: 0.0,
            paths: 2,
        };
        let theta = min_std_theta(&unit_rate(), 100.0, &est, 400, (1e-6, 1e3)).unwrap();
        assert!((theta.evaluate(0.0, &[0.0]).unwrap().value - 0.25).abs() < 1e-12);
        let pred = predict_min_std(100.0, &est);
        assert!((pred.error_variance.sqrt() - 0.1).abs() < 1e-12);
    }

    #[test]
    fn min_std_rejects_degenerate_normalizer() {
        let est = MeanIntegralEstimate {
            value: 0.0,
            stderr: 0.0,
            paths: 2,
        };
        assert!(matches!(
            min_std_theta(&unit_rate(), 100.0, &est, 1, (1e-6, 1e3)),
            Err(Error::DegenerateDesign(_))
        ));
    }

    #[test]
    fn error_variance_direct_substitution() {
        // f ≡ 1, θ ≡ 1, n = 100, V = 1 ⇒ 0.01 exactly
        let model = SdeSpec::brownian(1, vec![0.0]).unwrap();
        let mesh = TimeMesh::new(1.0, 128).unwrap();
        let theta = Intensity::constant(1.0).unwrap();
        let (v, _) = error_variance(
            &model,
            &unit_rate(),
            &theta,
            100,
            1.0,
            mesh,
            8,
            &SeedPlan::new(5),
        )
        .unwrap();
        assert!((v - 0.01).abs() < 1e-12, "variance {v}");
    }

    #[test]
    fn nbd_variance_identity() {
        // θ = c·f² ⇒ E ε(V)² = V/(c·n) whatever f is (f > 0 unclamped)
        let model = SdeSpec::brownian(1, vec![0.0]).unwrap();
        let mesh = TimeMesh::new(1.0, 512).unwrap();
        let rate: RateProcess = Arc::new(|t, _| 1.0 + t);
        let c = 2.0;
        let theta = no_bad_days_theta(&rate, c, (1e-3, 1e3)).unwrap();
        let (v, _) = error_variance(&model, &rate, &theta, 64, 1.0, mesh, 8, &SeedPlan::new(6))
            .unwrap();
        let target = 1.0 / (c * 64.0);
        assert!((v - target).abs() / target < 1e-6, "variance {v} vs {target}");
    }
}
