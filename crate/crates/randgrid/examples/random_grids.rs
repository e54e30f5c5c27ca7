//! Adaptive random grids from an intensity process.
//!
//! Builds grids driven by constant and path-dependent intensities, shows the
//! spacing law 1/(n·θ(τ_k)), the step map, and the clamp log, and writes one
//! grid as CSV (`k, tau_k, snapped_index`).
//!
//! Run with: `cargo run --example random_grids`

use randgrid::export::grid_csv;
use randgrid::grid::build_grid;
use randgrid::path::{simulate_brownian, simulate_sde};
use randgrid::{Intensity, SdeSpec, SeedPlan, TimeMesh};

fn main() -> randgrid::Result<()> {
    let plan = SeedPlan::new(7);
    let n = 50;

    // constant intensity: uniform spacing 1/(n·theta)
    let mesh = TimeMesh::for_grid(1.0, n, 2.0, 16)?;
    let b = simulate_brownian(mesh, 1, plan.path_stream(0))?;
    let y = simulate_sde(&SdeSpec::brownian(1, vec![0.0])?, &b)?;
    let theta = Intensity::constant(2.0)?;
    let grid = build_grid(&theta, n, &y, 1.0)?;
    println!(
        "constant theta = 2: N = {} interventions, first spacings: {:?}",
        grid.intervention_count(),
        grid.spacings().take(3).collect::<Vec<_>>()
    );
    println!(
        "step map: last grid time before t = 0.513 is {:.4}",
        grid.last_grid_time(0.513)?
    );

    // path-dependent intensity with clamping: dense where |Y| is large
    let theta = Intensity::of_state("abs-state", (0.5, 4.0), |_, y| 4.0 * y[0].abs())?;
    let mesh = TimeMesh::for_grid(1.0, n, theta.theta_max, 16)?;
    let b = simulate_brownian(mesh, 1, plan.path_stream(1))?;
    let y = simulate_sde(&SdeSpec::brownian(1, vec![0.0])?, &b)?;
    let grid = build_grid(&theta, n, &y, 1.0)?;
    let spacings: Vec<f64> = grid.spacings().collect();
    let (lo, hi) = (
        spacings.iter().cloned().fold(f64::INFINITY, f64::min),
        spacings.iter().cloned().fold(0.0, f64::max),
    );
    println!(
        "path-dependent theta: N = {}, spacings in [{:.5}, {:.5}] \
         (clamp band gives [{:.5}, {:.5}]), {} of {} evaluations clamped",
        grid.intervention_count(),
        lo,
        hi,
        1.0 / (n as f64 * theta.theta_max),
        1.0 / (n as f64 * theta.theta_min),
        grid.clamp_log.clamped,
        grid.clamp_log.evaluations,
    );

    std::fs::write("grid.csv", grid_csv(&grid))?;
    println!("wrote grid.csv");
    Ok(())
}
