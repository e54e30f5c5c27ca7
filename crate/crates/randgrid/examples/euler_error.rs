//! The scaled Euler approximation error U^n and its variance law.
//!
//! For Y = B, f(x) = x, θ ≡ 1 the error U^n(1) converges in law to a centered
//! Gaussian with variance 1/2. This example runs the pipeline at two scales
//! and prints the sample variances, plus a full error-path CSV
//! (`t, U, Z_11`).
//!
//! Run with: `cargo run --example euler_error`

use randgrid::ensemble::ErrorPipeline;
use randgrid::euler::{euler_error, z_process};
use randgrid::export::error_sample_csv;
use randgrid::grid::build_grid;
use randgrid::path::{simulate_brownian, simulate_sde};
use randgrid::stats::moments;
use randgrid::{Integrand, Intensity, SdeSpec, SeedPlan, TimeMesh};

fn main() -> randgrid::Result<()> {
    let plan = SeedPlan::new(1);
    for n in [64u64, 256] {
        let mesh = TimeMesh::for_grid(1.0, n, 1.0, 32)?;
        let pipeline = ErrorPipeline::new(
            SdeSpec::brownian(1, vec![0.0])?,
            Integrand::identity(1),
            Intensity::constant(1.0)?,
            n,
            mesh,
            1.0,
        );
        let summaries = pipeline.run(&plan, 4000, None)?;
        let terminals: Vec<f64> = summaries.iter().map(|s| s.u_terminal).collect();
        let m = moments(&terminals);
        println!(
            "n = {n:4}: Var U^n(1) = {:.4} (limit 1/2), mean = {:+.4}",
            m.variance, m.mean
        );
    }

    // one full error path with its Z companion
    let n = 64;
    let mesh = TimeMesh::for_grid(1.0, n, 1.0, 32)?;
    let b = simulate_brownian(mesh, 1, plan.path_stream(0))?;
    let y = simulate_sde(&SdeSpec::brownian(1, vec![0.0])?, &b)?;
    let grid = build_grid(&Intensity::constant(1.0)?, n, &y, 1.0)?;
    let z = z_process(&y, &grid, None)?;
    let mut err = euler_error(&Integrand::square(), &y, &grid, None)?;
    err.z = z.z;
    std::fs::write("error_path.csv", error_sample_csv(&err, &y))?;
    println!("wrote error_path.csv (U for f(x)=x² and Z_11 along one path)");
    Ok(())
}
