//! Brownian paths on the mesh and Euler-Maruyama solutions driven by them.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::TimeMesh;
use crate::model::SdeSpec;
use crate::rng::Substream;

/// Seed provenance carried by every simulated path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedStamp {
    pub master: u64,
    pub stream: u64,
}

impl From<Substream> for SeedStamp {
    fn from(s: Substream) -> Self {
        SeedStamp {
            master: s.master,
            stream: s.stream,
        }
    }
}

/// A d-dimensional Brownian path sampled on a uniform mesh.
///
/// Values are stored row-major: coordinate `c` at mesh point `i` is
/// `values[i * dims + c]`. `B(t_0) = 0` in every coordinate and increments
/// are i.i.d. centered Gaussians with variance Δt.
#[derive(Debug, Clone)]
pub struct BrownianPath {
    pub mesh: TimeMesh,
    pub dims: usize,
    pub values: Vec<f64>,
    pub seed: SeedStamp,
}

impl BrownianPath {
    #[inline]
    pub fn at(&self, i: usize) -> &[f64] {
        &self.values[i * self.dims..(i + 1) * self.dims]
    }

    #[inline]
    pub fn coord(&self, i: usize, c: usize) -> f64 {
        self.values[i * self.dims + c]
    }
}

/// Euler-Maruyama solution path, sharing the mesh of its driving noise.
#[derive(Debug, Clone)]
pub struct StatePath {
    pub mesh: TimeMesh,
    pub dims: usize,
    pub values: Vec<f64>,
    pub seed: SeedStamp,
    pub model_label: String,
}

impl StatePath {
    #[inline]
    pub fn at(&self, i: usize) -> &[f64] {
        &self.values[i * self.dims..(i + 1) * self.dims]
    }

    #[inline]
    pub fn coord(&self, i: usize, c: usize) -> f64 {
        self.values[i * self.dims + c]
    }

    pub fn terminal(&self) -> &[f64] {
        self.at(self.mesh.steps())
    }
}

/// Samples a d-dimensional Brownian path on `mesh` from the given substream.
pub fn simulate_brownian(mesh: TimeMesh, dims: usize, sub: Substream) -> Result<BrownianPath> {
    if dims == 0 {
        return Err(Error::Config("brownian dimension must be >= 1".into()));
    }
    let steps = mesh.steps();
    let sqrt_dt = mesh.dt().sqrt();
    let mut rng = sub.rng();
    let mut values = vec![0.0; (steps + 1) * dims];
    for i in 0..steps {
        for c in 0..dims {
            let z: f64 = rng.sample(StandardNormal);
            values[(i + 1) * dims + c] = values[i * dims + c] + sqrt_dt * z;
        }
    }
    Ok(BrownianPath {
        mesh,
        dims,
        values,
        seed: sub.into(),
    })
}

/// Left-endpoint Euler-Maruyama scheme on the driving path's mesh:
/// `Y_{i+1} = Y_i + α(Y_i)Δt + β(Y_i)·ΔB_i`.
pub fn simulate_sde(spec: &SdeSpec, bpath: &BrownianPath) -> Result<StatePath> {
    let d = spec.dim;
    if d != bpath.dims {
        return Err(Error::MeshMismatch(format!(
            "model dimension {d} does not match driving path dimension {}",
            bpath.dims
        )));
    }
    let steps = bpath.mesh.steps();
    let dt = bpath.mesh.dt();
    let mut values = vec![0.0; (steps + 1) * d];
    values[..d].copy_from_slice(&spec.initial);

    let mut alpha = vec![0.0; d];
    let mut beta = vec![0.0; d * d];
    for i in 0..steps {
        let (head, tail) = values.split_at_mut((i + 1) * d);
        let y = &head[i * d..];
        spec.drift_into(y, &mut alpha);
        spec.diffusion_into(y, &mut beta);
        let next = &mut tail[..d];
        for r in 0..d {
            let mut acc = y[r] + alpha[r] * dt;
            for c in 0..d {
                let db = bpath.coord(i + 1, c) - bpath.coord(i, c);
                acc += beta[r * d + c] * db;
            }
            if !acc.is_finite() {
                return Err(Error::NonFinite {
                    what: "euler step",
                    index: i + 1,
                });
            }
            next[r] = acc;
        }
    }
    Ok(StatePath {
        mesh: bpath.mesh,
        dims: d,
        values,
        seed: bpath.seed,
        model_label: spec.label.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeedPlan;
    use std::sync::Arc;

    fn mesh(steps: usize) -> TimeMesh {
        TimeMesh::new(1.0, steps).unwrap()
    }

    #[test]
    fn same_seed_same_path() {
        let plan = SeedPlan::new(11);
        let a = simulate_brownian(mesh(64), 2, plan.path_stream(5)).unwrap();
        let b = simulate_brownian(mesh(64), 2, plan.path_stream(5)).unwrap();
        assert_eq!(a.values, b.values);
        let c = simulate_brownian(mesh(64), 2, plan.path_stream(6)).unwrap();
        assert_ne!(a.values, c.values);
    }

    #[test]
    fn terminal_variance_matches_horizon() {
        // M = 1, T = 1: B(1) is one Gaussian draw per path; sample variance
        // over 50_000 seeds must sit inside the 3σ CLT band [0.97, 1.03].
        let plan = SeedPlan::new(2024);
        let m = mesh(1);
        let paths = 50_000;
        let mut sum = 0.0;
        let mut sumsq = 0.0;
        for i in 0..paths {
            let b = simulate_brownian(m, 1, plan.path_stream(i)).unwrap();
            let v = b.coord(1, 0);
            sum += v;
            sumsq += v * v;
        }
        let n = paths as f64;
        let var = (sumsq - sum * sum / n) / (n - 1.0);
        assert!((0.97..=1.03).contains(&var), "sample variance {var}");
    }

    #[test]
    fn coordinates_are_uncorrelated() {
        let plan = SeedPlan::new(5);
        let m = mesh(1);
        let paths = 50_000;
        let (mut sx, mut sy, mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for i in 0..paths {
            let b = simulate_brownian(m, 2, plan.path_stream(i)).unwrap();
            let (x, y) = (b.coord(1, 0), b.coord(1, 1));
            sx += x;
            sy += y;
            sxy += x * y;
            sxx += x * x;
            syy += y * y;
        }
        let n = paths as f64;
        let cov = sxy / n - sx / n * sy / n;
        let r = cov / ((sxx / n - (sx / n).powi(2)) * (syy / n - (sy / n).powi(2))).sqrt();
        assert!(r.abs() <= 0.03, "cross correlation {r}");
    }

    #[test]
    fn identity_diffusion_reproduces_brownian_exactly() {
        let plan = SeedPlan::new(3);
        let b = simulate_brownian(mesh(128), 2, plan.path_stream(0)).unwrap();
        let spec = SdeSpec::brownian(2, vec![0.5, -1.0]).unwrap();
        let y = simulate_sde(&spec, &b).unwrap();
        for i in 0..=128 {
            for c in 0..2 {
                // incremental accumulation may differ from y0 + B in the last ulp
                let expect = spec.initial[c] + b.coord(i, c);
                assert!((y.coord(i, c) - expect).abs() <= 1e-13 * (1.0 + expect.abs()));
            }
        }
    }

    #[test]
    fn constant_coefficients_are_exact() {
        let plan = SeedPlan::new(9);
        let b = simulate_brownian(mesh(64), 1, plan.path_stream(1)).unwrap();
        let spec = SdeSpec::new(
            "affine",
            vec![2.0],
            Arc::new(|_, out: &mut [f64]| out[0] = 0.3),
            Arc::new(|_, out: &mut [f64]| out[0] = 1.7),
        )
        .unwrap();
        let y = simulate_sde(&spec, &b).unwrap();
        for i in 0..=64 {
            let expect = 2.0 + 0.3 * b.mesh.time(i) + 1.7 * b.coord(i, 0);
            assert!((y.coord(i, 0) - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn gbm_terminal_mean_matches_closed_form() {
        // E Y(1) = exp(mu) for GBM; 100_000 paths, ±1%.
        let plan = SeedPlan::new(77);
        let m = mesh(512);
        let spec = SdeSpec::gbm(0.05, 0.2, 1.0).unwrap();
        let paths = 100_000u64;
        let mut sum = 0.0;
        for i in 0..paths {
            let b = simulate_brownian(m, 1, plan.path_stream(i)).unwrap();
            let y = simulate_sde(&spec, &b).unwrap();
            sum += y.terminal()[0];
        }
        let mean = sum / paths as f64;
        let target = 0.05_f64.exp();
        assert!(
            (mean - target).abs() <= 0.01 * target,
            "GBM mean {mean} vs {target}"
        );
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let plan = SeedPlan::new(1);
        let b = simulate_brownian(mesh(8), 1, plan.path_stream(0)).unwrap();
        let spec = SdeSpec::brownian(2, vec![0.0, 0.0]).unwrap();
        assert!(simulate_sde(&spec, &b).is_err());
    }

    #[test]
    fn nonfinite_coefficients_are_reported() {
        let plan = SeedPlan::new(1);
        let b = simulate_brownian(mesh(8), 1, plan.path_stream(0)).unwrap();
        let spec = SdeSpec::new(
            "blowup",
            vec![1.0],
            Arc::new(|_, out: &mut [f64]| out[0] = f64::INFINITY),
            Arc::new(|_, out: &mut [f64]| out[0] = 1.0),
        )
        .unwrap();
        match simulate_sde(&spec, &b) {
            Err(Error::NonFinite { index, .. }) => assert_eq!(index, 1),
            other => panic!("expected NonFinite, got {other:?}"),
        }
    }
}
