//! Grid-design strategies: no-bad-days flatness and min-std optimality.
//!
//! Uses the time-linear integrand on Brownian motion (error rate
//! f(t) = (1+t)/√2, deterministic and non-constant). Under θ = c·f² the error
//! becomes a homogeneous Brownian motion; under the budgeted min-std design
//! the terminal variance attains (∫E f)²/C.
//!
//! Run with: `cargo run --example design_strategies`

use std::sync::Arc;

use randgrid::design::{
    estimate_mean_f_integral, no_bad_days_theta, optimality_audit, AuditSetup, RateProcess,
};
use randgrid::ensemble::ErrorPipeline;
use randgrid::limit::error_rate_process;
use randgrid::stats::binned_variance_profile;
use randgrid::{Integrand, Intensity, SdeSpec, SeedPlan, TimeMesh};

fn main() -> randgrid::Result<()> {
    let plan = SeedPlan::new(21);
    let model = SdeSpec::brownian(1, vec![0.0])?;
    let integrand = Integrand::time_linear();
    let rate: RateProcess = Arc::new(error_rate_process(&integrand, &model));
    let n = 128;

    // no bad days: theta = c f², flat binned variances, Var U(t) = t/c
    let c = 2.0;
    let theta = no_bad_days_theta(&rate, c, (0.05, 10.0))?;
    let mesh = TimeMesh::for_grid(1.0, n, theta.theta_max, 16)?;
    let mut pipeline = ErrorPipeline::new(model.clone(), integrand.clone(), theta, n, mesh, 1.0);
    pipeline.bins = 8;
    let summaries = pipeline.run(&plan, 6000, None)?;
    let rows: Vec<Vec<f64>> = summaries.iter().map(|s| s.u_at_bins.clone()).collect();
    let profile = binned_variance_profile(&rows, 8)?;
    println!("no-bad-days (c = {c}): per-bin increment variances (expect {:.5} each):", 0.125 / c);
    for (b, v) in profile.iter().enumerate() {
        println!("  bin {b}: {:.5} ± {:.5}", v.variance, v.stderr);
    }

    // min-std under budget C: realized variance vs the bound (∫E f)²/C
    let budget = 160.0;
    let setup = AuditSetup {
        model: model.clone(),
        integrand,
        rate: rate.clone(),
        budget,
        n,
        kappa: 16,
        mesh_horizon: 1.0,
        horizon: 1.0,
        eval_paths: 4000,
        pilot_paths: 1000,
        pilot_mesh_steps: 2048,
        jobs: None,
    };
    let pilot_plan = plan.derived(1);
    let pilot_mesh = TimeMesh::new(1.0, 2048)?;
    let mean_f =
        estimate_mean_f_integral(&model, &rate, 1.0, pilot_mesh, 1000, &pilot_plan)?;
    let candidates = vec![
        (
            "constant".to_string(),
            Intensity::constant_in_band(budget / n as f64, (0.05, 10.0))?,
        ),
        (
            "min-std".to_string(),
            randgrid::design::min_std_theta(&rate, budget, &mean_f, n, (0.05, 10.0))?,
        ),
    ];
    println!("\nmin-std audit (budget C = {budget}):");
    for row in optimality_audit(&setup, candidates, &plan)? {
        println!(
            "  {:9} EN = {:7.2} | realized var = {:.6} ± {:.6} | analytic var = {:.6} | bound = {:.6}",
            row.strategy, row.en_real, row.var_real, row.var_real_stderr, row.var_pred, row.bound
        );
    }
    Ok(())
}
