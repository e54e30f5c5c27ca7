//! Discrete hedging of a Black-Scholes call on a random grid.
//!
//! Prices the call, reconstructs the price process from the self-financing
//! hedge integral, then runs the two designed rebalancing strategies up to
//! the truncation horizon V < T: no-bad-days (flat error growth) and min-std
//! (budgeted, minimal terminal standard deviation).
//!
//! Run with: `cargo run --example bs_hedging`

use randgrid::black_scholes::BsSpec;
use randgrid::design::estimate_mean_f_integral;
use randgrid::ensemble::ErrorPipeline;
use randgrid::euler::ito_sum;
use randgrid::path::{simulate_brownian, simulate_sde};
use randgrid::stats::moments;
use randgrid::{SeedPlan, TimeMesh};

fn main() -> randgrid::Result<()> {
    let spec = BsSpec::new(100.0, 100.0, 0.0, 0.05, 0.2, 1.0, None)?;
    let plan = SeedPlan::new(13);
    println!(
        "call price at S = K = 100, T − t = 1: {:.4}",
        spec.price(100.0, 0.0)?
    );

    // self-financing reconstruction: Σ f(Y)·ΔY tracks Π(t) − Π(0)
    let model = spec.model()?;
    let mesh = TimeMesh::new(1.0, 8192)?;
    let b = simulate_brownian(mesh, 2, plan.path_stream(0))?;
    let y = simulate_sde(&model, &b)?;
    let upto = mesh.snap_up(spec.truncation);
    let mut sup_dev = 0.0_f64;
    let mut holdings = vec![0.0; (mesh.steps() + 1) * 2];
    for i in 0..=mesh.steps() {
        let t = mesh.time(i);
        if t < spec.maturity {
            let f = spec.hedge_vector(y.coord(i, 0), t)?;
            holdings[2 * i] = f[0];
            holdings[2 * i + 1] = f[1];
        }
    }
    let stock_leg = ito_sum(
        &holdings.iter().step_by(2).cloned().collect::<Vec<_>>(),
        &y.values.iter().step_by(2).cloned().collect::<Vec<_>>(),
    )?;
    let cash_leg = ito_sum(
        &holdings.iter().skip(1).step_by(2).cloned().collect::<Vec<_>>(),
        &y.values.iter().skip(1).step_by(2).cloned().collect::<Vec<_>>(),
    )?;
    let pi0 = spec.price(100.0, 0.0)?;
    for i in 0..=upto {
        let reconstructed = stock_leg[i] + cash_leg[i];
        let exact = spec.price(y.coord(i, 0), mesh.time(i))? - pi0;
        sup_dev = sup_dev.max((reconstructed - exact).abs());
    }
    println!("self-financing reconstruction sup-error on [0, V]: {sup_dev:.4}");

    // the two rebalancing designs at n = 128
    let n = 128;
    let pilot_mesh = TimeMesh::new(1.0, 4096)?;
    let rate = spec.rate_process();
    let mean_f = estimate_mean_f_integral(
        &model,
        &rate,
        spec.truncation,
        pilot_mesh,
        1500,
        &plan.derived(1),
    )?;
    println!("pilot estimate of ∫ E f ds on [0, V]: {:.3} ± {:.3}", mean_f.value, mean_f.stderr);

    for (name, theta, predicted_var) in [
        (
            "no-bad-days c=0.05",
            spec.no_bad_days_theta(0.05, (0.05, 16.0))?,
            spec.truncation / (0.05 * n as f64),
        ),
        (
            "min-std C=300",
            spec.min_std_theta(300.0, &mean_f, n, (0.05, 16.0))?,
            mean_f.value * mean_f.value / 300.0,
        ),
    ] {
        let mesh = TimeMesh::for_grid(1.0, n, theta.theta_max, 16)?;
        let pipeline = ErrorPipeline::new(
            model.clone(),
            spec.integrand(),
            theta,
            n,
            mesh,
            spec.truncation,
        );
        let summaries = pipeline.run(&plan, 3000, None)?;
        let eps: Vec<f64> = summaries
            .iter()
            .map(|s| s.u_terminal / (n as f64).sqrt())
            .collect();
        let counts: Vec<f64> = summaries.iter().map(|s| s.interventions as f64).collect();
        println!(
            "{name:20} mean N = {:7.2}, Var ε(V) = {:.6} (predicted {:.6})",
            moments(&counts).mean,
            moments(&eps).variance,
            predicted_var,
        );
    }
    Ok(())
}
