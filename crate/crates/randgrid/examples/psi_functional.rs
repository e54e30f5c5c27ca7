//! The step-moment functional ψ_n and its uniform limit.
//!
//! ∫₀ᵗ ψ_n(s) ds converges uniformly to E_p ∫₀ᵗ a/θ^{p/2} ds with E_1 = 0 and
//! E_2 = 1/2. The sup-deviation percentiles shrink as n grows.
//!
//! Run with: `cargo run --example psi_functional`

use randgrid::euler::psi_functional;
use randgrid::grid::build_grid;
use randgrid::path::{simulate_brownian, simulate_sde};
use randgrid::{Intensity, SdeSpec, SeedPlan, TimeMesh};

fn main() -> randgrid::Result<()> {
    let plan = SeedPlan::new(5);
    let theta = Intensity::constant(1.0)?;
    let model = SdeSpec::brownian(1, vec![0.0])?;
    let paths = 800;

    for p in [1u32, 2] {
        println!("p = {p} (E_p = {}):", if p == 1 { 0.0 } else { 0.5 });
        for n in [128u64, 512, 2048] {
            let mesh = TimeMesh::for_grid(1.0, n, 1.0, 16)?;
            let mut deviations = Vec::with_capacity(paths as usize);
            for i in 0..paths {
                let b = simulate_brownian(mesh, 1, plan.path_stream(i))?;
                let y = simulate_sde(&model, &b)?;
                let grid = build_grid(&theta, n, &y, 1.0)?;
                deviations.push(psi_functional(&|_, _| 1.0, &theta, &b, &y, &grid, p)?);
            }
            deviations.sort_unstable_by(f64::total_cmp);
            let p95 = deviations[(deviations.len() as f64 * 0.95) as usize - 1];
            println!("  n = {n:5}: 95th percentile of sup-deviation = {p95:.4}");
        }
    }
    Ok(())
}
