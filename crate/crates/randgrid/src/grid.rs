//! The adaptive random evaluation grid and its step map.
//!
//! Grid times follow the recursion `τ_0 = 0`,
//! `τ_{k+1} = (τ_k + 1/(n·θ(τ_k))) ∧ T`. The exact (un-snapped) values drive
//! the recursion; each τ_k is additionally snapped up to the next mesh point
//! so discrete integrals read frozen values from the mesh without looking
//! into the future. θ(τ_k) itself is read from the state at the snapped mesh
//! point, which keeps the evaluation adapted on the discrete carrier.

use crate::error::{Error, Result};
use crate::intensity::{ClampLog, Intensity};
use crate::path::StatePath;

/// Random evaluation grid for one path at scale `n`.
#[derive(Debug, Clone)]
pub struct RandomGrid {
    /// Scale parameter of the recursion.
    pub n: u64,
    /// `τ_0 = 0 < τ_1 < … < τ_last = T` (the final capped time is included).
    pub taus: Vec<f64>,
    /// Mesh index each τ_k snaps up to; nondecreasing.
    pub snap_indices: Vec<usize>,
    /// Horizon `T` (the mesh horizon of the path the grid was built on).
    pub horizon: f64,
    /// Clamp activity during construction.
    pub clamp_log: ClampLog,
}

/// Builds the grid along `path` using intensity `theta`.
///
/// The recursion runs on exact times; θ is evaluated at `(τ_k, Y(snap(τ_k)))`.
pub fn build_grid(
    theta: &Intensity,
    n: u64,
    path: &StatePath,
    horizon: f64,
) -> Result<RandomGrid> {
    if n == 0 {
        return Err(Error::Config("grid scale n must be >= 1".into()));
    }
    let mesh_t = path.mesh.horizon();
    if horizon > mesh_t + 1e-12 {
        return Err(Error::Config(format!(
            "grid horizon {horizon} exceeds mesh horizon {mesh_t}"
        )));
    }
    let mut taus = Vec::with_capacity((n as f64 * theta.theta_max * horizon) as usize / 2 + 2);
    let mut snaps = Vec::with_capacity(taus.capacity());
    let mut clamp_log = ClampLog::default();

    let mut tau = 0.0_f64;
    loop {
        let idx = path.mesh.snap_up(tau);
        taus.push(tau);
        snaps.push(idx);
        if tau >= horizon {
            break;
        }
        let theta_k = theta.evaluate(tau, path.at(idx))?;
        clamp_log.record(theta_k);
        // cap at the horizon; a step landing within relative 1e-12 of it is
        // treated as capped so accumulated rounding cannot manufacture an
        // extra stopping time just below T
        let mut next = tau + 1.0 / (n as f64 * theta_k.value);
        if next >= horizon * (1.0 - 1e-12) {
            next = horizon;
        }
        debug_assert!(next > tau);
        tau = next;
    }
    Ok(RandomGrid {
        n,
        taus,
        snap_indices: snaps,
        horizon,
        clamp_log,
    })
}

impl RandomGrid {
    /// Step map: the largest stopping time ≤ `t` (right-continuous in `t`).
    /// The capped final time is not an evaluation time, so `t = T` maps to
    /// the last stopping time strictly before `T`.
    pub fn last_grid_time(&self, t: f64) -> Result<f64> {
        if !(0.0..=self.horizon).contains(&t) {
            return Err(Error::Domain(format!(
                "t = {t} outside [0, {}]",
                self.horizon
            )));
        }
        let evaluation_times = &self.taus[..(self.taus.len() - 1).max(1)];
        let pos = evaluation_times.partition_point(|&tau| tau <= t);
        Ok(evaluation_times[pos.saturating_sub(1)])
    }

    /// Number of grid times strictly before the horizon (τ_0 = 0 counts).
    pub fn intervention_count(&self) -> usize {
        // taus always ends with the capped time T, everything before is < T.
        self.taus.len() - 1
    }

    /// Largest grid interval index `k` with `snap(τ_k) ≤ mesh index i`.
    /// Iterating mesh indices in order makes this an O(1) cursor; see
    /// [`StepCursor`].
    pub fn interval_of(&self, mesh_index: usize) -> usize {
        self.snap_indices.partition_point(|&s| s <= mesh_index) - 1
    }

    /// Grid spacings `τ_{k+1} − τ_k` (the last one may be capped).
    pub fn spacings(&self) -> impl Iterator<Item = f64> + '_ {
        self.taus.windows(2).map(|w| w[1] - w[0])
    }
}

/// Forward-only cursor mapping mesh indices to grid intervals.
pub struct StepCursor<'a> {
    grid: &'a RandomGrid,
    k: usize,
}

impl<'a> StepCursor<'a> {
    pub fn new(grid: &'a RandomGrid) -> Self {
        StepCursor { grid, k: 0 }
    }

    /// Index `k` of the interval containing mesh index `i`; `i` must be
    /// nondecreasing across calls. Returns the index of the last grid point
    /// whose snapped mesh index is ≤ `i`.
    #[inline]
    pub fn advance(&mut self, i: usize) -> usize {
        let snaps = &self.grid.snap_indices;
        while self.k + 1 < snaps.len() && snaps[self.k + 1] <= i {
            self.k += 1;
        }
        self.k
    }
}

/// Per-path result of the intervention-count check.
#[derive(Debug, Clone, Copy)]
pub struct CountSample {
    /// N/n for this path.
    pub count_over_n: f64,
    /// Mesh quadrature of the clamped θ along this path.
    pub theta_integral: f64,
    /// |N/n − ∫θ| / ∫θ.
    pub relative_deviation: f64,
}

/// Ensemble report for the intervention-count asymptotics.
#[derive(Debug, Clone)]
pub struct CountReport {
    pub samples: Vec<CountSample>,
    pub mean_count_over_n: f64,
    pub mean_theta_integral: f64,
    pub mean_relative_deviation: f64,
    pub max_relative_deviation: f64,
    pub clamp_log: ClampLog,
}

/// Grid count and θ quadrature for a single path.
pub fn count_sample(
    theta: &Intensity,
    n: u64,
    path: &StatePath,
    horizon: f64,
) -> Result<(CountSample, ClampLog)> {
    let grid = build_grid(theta, n, path, horizon)?;
    let dt = path.mesh.dt();
    let upto = path.mesh.snap_up(horizon);
    let mut integral = 0.0;
    for i in 0..upto {
        let v = theta.evaluate(path.mesh.time(i), path.at(i))?;
        integral += v.value * dt;
    }
    let count_over_n = grid.intervention_count() as f64 / n as f64;
    let relative_deviation = (count_over_n - integral).abs() / integral;
    Ok((
        CountSample {
            count_over_n,
            theta_integral: integral,
            relative_deviation,
        },
        grid.clamp_log,
    ))
}

impl CountReport {
    pub fn from_samples(samples: Vec<CountSample>, clamp_log: ClampLog) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::InsufficientData("count check needs >= 1 path".into()));
        }
        let len = samples.len() as f64;
        let mean_count_over_n = samples.iter().map(|s| s.count_over_n).sum::<f64>() / len;
        let mean_theta_integral = samples.iter().map(|s| s.theta_integral).sum::<f64>() / len;
        let mean_relative_deviation =
            samples.iter().map(|s| s.relative_deviation).sum::<f64>() / len;
        let max_relative_deviation = samples
            .iter()
            .map(|s| s.relative_deviation)
            .fold(0.0, f64::max);
        Ok(CountReport {
            samples,
            mean_count_over_n,
            mean_theta_integral,
            mean_relative_deviation,
            max_relative_deviation,
            clamp_log,
        })
    }
}

/// Compares N/n against the per-path quadrature of the clamped intensity.
///
/// Left-endpoint quadrature of θ on the mesh up to `horizon`; the grid itself
/// is built by [`build_grid`] on each path.
pub fn check_count_asymptotics(
    theta: &Intensity,
    n: u64,
    paths: &[StatePath],
    horizon: f64,
) -> Result<CountReport> {
    let mut samples = Vec::with_capacity(paths.len());
    let mut clamp_log = ClampLog::default();
    for path in paths {
        let (sample, clamp) = count_sample(theta, n, path, horizon)?;
        clamp_log.merge(clamp);
        samples.push(sample);
    }
    CountReport::from_samples(samples, clamp_log)
}
