//! Intervention-count asymptotics: N/n → ∫θ dt.
//!
//! Checks the limit for a constant, a deterministic time-dependent, and a
//! clamped path-functional intensity.
//!
//! Run with: `cargo run --example count_asymptotics`

use randgrid::grid::check_count_asymptotics;
use randgrid::path::{simulate_brownian, simulate_sde};
use randgrid::{Intensity, SdeSpec, SeedPlan, TimeMesh};

fn main() -> randgrid::Result<()> {
    let plan = SeedPlan::new(11);
    let mesh = TimeMesh::new(1.0, 4096)?;
    let model = SdeSpec::gbm(0.05, 0.2, 1.0)?;
    let paths: Vec<_> = (0..50)
        .map(|i| {
            let b = simulate_brownian(mesh, 1, plan.path_stream(i))?;
            simulate_sde(&model, &b)
        })
        .collect::<randgrid::Result<_>>()?;

    let cases: Vec<(&str, Intensity)> = vec![
        ("constant 2", Intensity::constant(2.0)?),
        ("1 + t", Intensity::of_time("linear", (0.5, 4.0), |t| 1.0 + t)?),
        (
            "clamped GBM functional",
            Intensity::of_state("gbm-func", (0.5, 4.0), |_, y| y[0] * y[0])?,
        ),
    ];
    for n in [100u64, 1000, 10_000] {
        println!("n = {n}:");
        for (name, theta) in &cases {
            let report = check_count_asymptotics(theta, n, &paths, 1.0)?;
            println!(
                "  {name:24} mean N/n = {:.5}, mean ∫θ = {:.5}, max rel dev = {:.4}",
                report.mean_count_over_n,
                report.mean_theta_integral,
                report.max_relative_deviation
            );
        }
    }
    Ok(())
}
