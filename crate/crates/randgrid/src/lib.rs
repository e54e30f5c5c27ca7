//! Random-grid Euler approximation of stochastic integrals.
//!
//! This crate simulates solutions of multidimensional SDEs on a fine uniform
//! mesh, builds adaptive random evaluation grids from an intensity process,
//! computes the scaled approximation-error processes of left-endpoint Euler
//! schemes, samples the explicit asymptotic error law, and implements two
//! grid-design strategies (uniform-risk and minimum-variance under an
//! intervention budget) together with a Black-Scholes discrete-hedging
//! application.
//!
//! The main pieces:
//!
//! - [`mesh`], [`model`], [`path`]: seeded Brownian paths and Euler-Maruyama
//!   solutions on a uniform mesh.
//! - [`intensity`], [`grid`]: the intensity process θ and the random grid
//!   τ_{k+1} = (τ_k + 1/(nθ(τ_k))) ∧ T with its step map.
//! - [`euler`]: discrete Itô sums, the error processes U^n and Z^n, the exact
//!   discrete identity linking them, and the step-moment functional ψ_n.
//! - [`limit`]: the asymptotic error field Δ and samplers for the limit law.
//! - [`design`]: error-variance evaluation and the no-bad-days / min-std
//!   intensity designs under an intervention budget.
//! - [`black_scholes`]: call pricing, hedge vector, hedging-error integrand,
//!   and the two designs specialized to discrete hedging.
//! - [`stats`]: two-sample Kolmogorov-Smirnov, independence probes, binned
//!   variance profiles, and joint-law checks.
//! - [`config`], [`experiment`]: batch experiment runner behind the `randgrid`
//!   binary (`run` and `sweep` subcommands).
//!
//! Everything is deterministic given a master seed: each path index draws from
//! its own counter-based substream, so ensembles are reproducible bit-for-bit
//! for any worker count.

pub mod black_scholes;
pub mod config;
pub mod design;
pub mod ensemble;
pub mod error;
pub mod euler;
pub mod experiment;
pub mod export;
pub mod grid;
pub mod intensity;
pub mod integrand;
pub mod limit;
pub mod mesh;
pub mod model;
pub mod path;
pub mod rng;
pub mod stats;

pub use error::{Error, Result};
pub use grid::RandomGrid;
pub use intensity::Intensity;
pub use integrand::Integrand;
pub use mesh::TimeMesh;
pub use model::SdeSpec;
pub use path::{BrownianPath, StatePath};
pub use rng::SeedPlan;
