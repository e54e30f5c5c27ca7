//! Sampling the asymptotic error law and comparing it with U^n.
//!
//! Builds the Δ field along GBM paths, samples the limit both as a d×d
//! Brownian array and in the collapsed single-Brownian form, checks the two
//! samplers agree in law, and runs a two-sample KS of U^n(T) against U*(T).
//!
//! Run with: `cargo run --example limit_law`

use randgrid::ensemble::{ErrorPipeline, LimitPipeline};
use randgrid::limit::LimitSampler;
use randgrid::stats::{ks_two_sample, SampleSet};
use randgrid::{Integrand, Intensity, SdeSpec, SeedPlan, TimeMesh};

fn main() -> randgrid::Result<()> {
    let plan = SeedPlan::new(31);
    let n = 128;
    let samples = 8000;
    let model = SdeSpec::gbm(0.05, 0.2, 1.0)?;
    let integrand = Integrand::square();
    let theta = Intensity::constant(1.0)?;
    let mesh = TimeMesh::for_grid(1.0, n, 1.0, 64)?;

    let base = LimitPipeline {
        model: model.clone(),
        integrand: integrand.clone(),
        theta: theta.clone(),
        mesh,
        horizon: 1.0,
        sampler: LimitSampler::Array,
    };
    let array = base.run(&plan, samples, None)?;
    let collapsed = LimitPipeline {
        sampler: LimitSampler::Collapsed,
        ..base.clone()
    }
    .run(&plan.derived(9), samples, None)?;

    let set = |label: &str, v: Vec<f64>| SampleSet::new(label, v, "seed 31");
    let ks = ks_two_sample(
        &set("array", array.iter().map(|s| s.u_terminal).collect())?,
        &set("collapsed", collapsed.iter().map(|s| s.u_terminal).collect())?,
        0.01,
    )?;
    println!(
        "sampler agreement: KS D = {:.4} vs critical {:.4} → {}",
        ks.statistic,
        ks.critical_value,
        if ks.pass { "same law" } else { "MISMATCH" }
    );

    let pipeline = ErrorPipeline::new(model, integrand, theta, n, mesh, 1.0);
    let un = pipeline.run(&plan, samples, None)?;
    let ks = ks_two_sample(
        &set("u_n", un.iter().map(|s| s.u_terminal).collect())?,
        &set("u_star", array.iter().map(|s| s.u_terminal).collect())?,
        0.01,
    )?;
    println!(
        "U^n (n = {n}) vs sampled limit: KS D = {:.4} vs critical {:.4} → {}",
        ks.statistic,
        ks.critical_value,
        if ks.pass { "match" } else { "MISMATCH" }
    );
    println!(
        "variances: U^n {:.5}, U* {:.5}",
        ks.moments_a.variance, ks.moments_b.variance
    );
    Ok(())
}
