//! Driving experiments through the config layer (what the `randgrid` binary
//! does), including a deterministic-rerun check: same config and seed give
//! byte-identical artifacts for any worker count.
//!
//! Run with: `cargo run --example batch_runner`

use randgrid::config::ExperimentConfig;
use randgrid::experiment::{run, RunOptions};

const CONFIG: &str = r#"
kind = "count-asymptotics"
seed = 7
n = 2000
paths = 64
mesh_steps = 2048

[model]
preset = "gbm"
mu = 0.05
sigma = 0.2
y0 = 1.0

[theta]
strategy = "constant"
value = 2.0

[expect]
count_rel_dev = 0.001
"#;

fn main() -> randgrid::Result<()> {
    let config = ExperimentConfig::from_toml_str(CONFIG)?;
    let dir = std::env::temp_dir().join("randgrid_batch_example");

    let serial = run(
        &config,
        &dir.join("serial"),
        &RunOptions {
            seed_override: None,
            jobs: Some(1),
        },
    )?;
    let parallel = run(
        &config,
        &dir.join("parallel"),
        &RunOptions {
            seed_override: None,
            jobs: Some(4),
        },
    )?;

    println!("count-asymptotics pass = {}", serial.pass);
    for (k, v) in &serial.key_stats {
        println!("  {k} = {v}");
    }
    for (a, b) in serial.manifest.iter().zip(&parallel.manifest) {
        println!(
            "{}: 1 worker {} == 4 workers {} → {}",
            a.file,
            &a.sha256[..12],
            &b.sha256[..12],
            if a.sha256 == b.sha256 { "identical" } else { "DIFFER" }
        );
    }
    println!("artifacts in {}", dir.display());
    Ok(())
}
