//! Parallel ensemble execution with deterministic fan-out.
//!
//! Work is distributed over path indices; every index owns its substreams, so
//! the ensemble is identical for any worker count. Reductions happen after an
//! ordered gather (`collect` preserves index order), never inside the
//! parallel region.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::euler::euler_error;
use crate::grid::build_grid;
use crate::integrand::Integrand;
use crate::intensity::{ClampLog, Intensity};
use crate::limit::{delta_field, sample_limit, LimitSampler};
use crate::mesh::TimeMesh;
use crate::model::SdeSpec;
use crate::path::{simulate_brownian, simulate_sde, StatePath};
use crate::rng::SeedPlan;

/// Maps `f` over `0..total` path indices, optionally on a dedicated pool with
/// `jobs` workers. Results come back in index order.
pub fn par_map<T: Send>(
    total: u64,
    jobs: Option<usize>,
    f: impl Fn(u64) -> Result<T> + Sync,
) -> Result<Vec<T>> {
    let run = || (0..total).into_par_iter().map(|i| f(i)).collect();
    match jobs {
        Some(k) => rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build()
            .map_err(|e| Error::Config(format!("cannot build worker pool: {e}")))?
            .install(run),
        None => run(),
    }
}

/// Everything the error-process pipeline needs to run one configuration.
#[derive(Debug, Clone)]
pub struct ErrorPipeline {
    pub model: SdeSpec,
    pub integrand: Integrand,
    pub theta: Intensity,
    pub n: u64,
    pub mesh: TimeMesh,
    /// Grid/truncation horizon `V ≤ T`; integration of `U^n` stops here.
    pub horizon: f64,
    /// Number of equal time bins on `[0, horizon]` recorded per path.
    pub bins: usize,
    /// Also accumulate the mesh quadrature of the clamped θ along each path.
    pub record_theta_integral: bool,
}

impl ErrorPipeline {
    pub fn new(
        model: SdeSpec,
        integrand: Integrand,
        theta: Intensity,
        n: u64,
        mesh: TimeMesh,
        horizon: f64,
    ) -> Self {
        ErrorPipeline {
            model,
            integrand,
            theta,
            n,
            mesh,
            horizon,
            bins: 8,
            record_theta_integral: false,
        }
    }
}

/// Per-path summary of one error-pipeline run.
#[derive(Debug, Clone)]
pub struct PathSummary {
    pub index: u64,
    /// First state coordinate at the mesh horizon `T`.
    pub y_terminal: f64,
    /// `U^n` at the grid horizon.
    pub u_terminal: f64,
    pub u_sup: f64,
    /// `U^n` at the `bins + 1` bin boundaries on `[0, horizon]`.
    pub u_at_bins: Vec<f64>,
    pub interventions: usize,
    /// Mesh quadrature of clamped θ up to the horizon (0 unless recorded).
    pub theta_integral: f64,
    pub clamp: ClampLog,
}

impl ErrorPipeline {
    pub fn run_path(&self, plan: &SeedPlan, index: u64) -> Result<PathSummary> {
        if self.bins < 2 || self.bins > self.mesh.steps() {
            return Err(Error::Config(format!(
                "{} bins do not fit a mesh of {} steps",
                self.bins,
                self.mesh.steps()
            )));
        }
        let b = simulate_brownian(self.mesh, self.model.dim, plan.path_stream(index))?;
        let y = simulate_sde(&self.model, &b)?;
        let grid = build_grid(&self.theta, self.n, &y, self.horizon)?;
        let err = euler_error(&self.integrand, &y, &grid, None)?;

        let boundaries = bin_boundaries(&self.mesh, self.horizon, self.bins);
        let u_at_bins = boundaries.iter().map(|&i| err.u[i]).collect();
        let theta_integral = if self.record_theta_integral {
            theta_quadrature(&self.theta, &y, self.horizon)?
        } else {
            0.0
        };
        Ok(PathSummary {
            index,
            y_terminal: y.terminal()[0],
            u_terminal: err.u[self.mesh.snap_up(self.horizon)],
            u_sup: err.sup_abs(),
            u_at_bins,
            interventions: grid.intervention_count(),
            theta_integral,
            clamp: grid.clamp_log,
        })
    }

    pub fn run(&self, plan: &SeedPlan, paths: u64, jobs: Option<usize>) -> Result<Vec<PathSummary>> {
        par_map(paths, jobs, |i| self.run_path(plan, i))
    }
}

/// Mesh indices of the `bins + 1` equally spaced boundaries on `[0, horizon]`.
pub fn bin_boundaries(mesh: &TimeMesh, horizon: f64, bins: usize) -> Vec<usize> {
    (0..=bins)
        .map(|b| mesh.snap_up(horizon * b as f64 / bins as f64))
        .collect()
}

/// Left-endpoint mesh quadrature of the clamped intensity along a path.
pub fn theta_quadrature(theta: &Intensity, y: &StatePath, horizon: f64) -> Result<f64> {
    let dt = y.mesh.dt();
    let upto = y.mesh.snap_up(horizon);
    let mut acc = 0.0;
    for i in 0..upto {
        acc += theta.evaluate(y.mesh.time(i), y.at(i))?.value * dt;
    }
    Ok(acc)
}

/// Pipeline drawing samples of the limiting error process: a fresh state
/// path, the Δ field along it, and the Itô sum of Δ against an independent
/// Brownian array.
#[derive(Debug, Clone)]
pub struct LimitPipeline {
    pub model: SdeSpec,
    pub integrand: Integrand,
    pub theta: Intensity,
    pub mesh: TimeMesh,
    pub horizon: f64,
    pub sampler: LimitSampler,
}

/// Per-sample summary of the limit pipeline.
#[derive(Debug, Clone, Copy)]
pub struct LimitSummary {
    pub index: u64,
    pub y_terminal: f64,
    pub u_terminal: f64,
    pub u_sup: f64,
}

impl LimitPipeline {
    pub fn run_sample(&self, plan: &SeedPlan, index: u64) -> Result<LimitSummary> {
        let b = simulate_brownian(self.mesh, self.model.dim, plan.path_stream(index))?;
        let y = simulate_sde(&self.model, &b)?;
        let delta = delta_field(&self.integrand, &self.model, &self.theta, &y, self.horizon)?;
        let sample = sample_limit(&delta, plan.limit_stream(index), self.sampler)?;
        Ok(LimitSummary {
            index,
            y_terminal: y.terminal()[0],
            u_terminal: sample.terminal(),
            u_sup: sample.sup_abs(),
        })
    }

    pub fn run(&self, plan: &SeedPlan, samples: u64, jobs: Option<usize>) -> Result<Vec<LimitSummary>> {
        par_map(samples, jobs, |i| self.run_sample(plan, i))
    }
}
