//! Seeded Brownian paths and Euler-Maruyama solutions on a fine mesh.
//!
//! Simulates a 2-dimensional Brownian motion and a geometric Brownian motion
//! driven by it, checks the terminal moments against closed forms, and writes
//! one full path as CSV (`t, Y_1, B_1, B_2` style columns).
//!
//! Run with: `cargo run --example brownian_paths`

use randgrid::export::state_path_csv;
use randgrid::path::{simulate_brownian, simulate_sde};
use randgrid::{SdeSpec, SeedPlan, TimeMesh};

fn main() -> randgrid::Result<()> {
    let plan = SeedPlan::new(42);
    let mesh = TimeMesh::new(1.0, 512)?;

    // terminal variance of each coordinate should be close to T = 1
    let paths = 20_000;
    let mut sums = [0.0_f64; 2];
    let mut sumsq = [0.0_f64; 2];
    for i in 0..paths {
        let b = simulate_brownian(mesh, 2, plan.path_stream(i))?;
        for c in 0..2 {
            let v = b.coord(512, c);
            sums[c] += v;
            sumsq[c] += v * v;
        }
    }
    for c in 0..2 {
        let n = paths as f64;
        let var = (sumsq[c] - sums[c] * sums[c] / n) / (n - 1.0);
        println!("coordinate {}: sample variance of B(1) = {var:.4} (expect 1)", c + 1);
    }

    // GBM mean: E Y(1) = exp(mu)
    let gbm = SdeSpec::gbm(0.05, 0.2, 1.0)?;
    let mut sum = 0.0;
    for i in 0..paths {
        let b = simulate_brownian(mesh, 1, plan.path_stream(i))?;
        let y = simulate_sde(&gbm, &b)?;
        sum += y.terminal()[0];
    }
    println!(
        "GBM(mu=0.05, sigma=0.2): mean Y(1) = {:.4} (expect {:.4})",
        sum / paths as f64,
        0.05_f64.exp()
    );

    // dump one path to CSV
    let b = simulate_brownian(mesh, 1, plan.path_stream(0))?;
    let y = simulate_sde(&gbm, &b)?;
    let csv = state_path_csv(&y, &b);
    std::fs::write("gbm_path.csv", &csv)?;
    println!("wrote gbm_path.csv ({} lines)", csv.lines().count());
    Ok(())
}
