//! The asymptotic error field Δ and samplers for the limiting process.
//!
//! Along a state path `Y` with intensity θ, the limit of `U^n` is
//! `Σ_{k,m} ∫ Δ_{k,m}(u) dW_{k,m}(u)` for a d×d Brownian array `W`
//! independent of the driving noise, where
//!
//! ```text
//! Δ_{k,m}(t) = Σ_{i,j} ∂f_i/∂x_j(Y(t)) β_{k,i}(Y(t)) β_{m,j}(Y(t)) / √(2θ(t)),
//! ```
//!
//! i.e. `Δ(t) = β J βᵀ / √(2θ)` with `J` the integrand Jacobian. Two samplers
//! are provided: the full d×d array, and the collapsed single-Brownian form
//! with integrand `√(Σ_{k,m} Δ_{k,m}²)`, which has the same law.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::integrand::Integrand;
use crate::intensity::Intensity;
use crate::mesh::TimeMesh;
use crate::model::SdeSpec;
use crate::path::{SeedStamp, StatePath};
use crate::rng::{require_kind, StreamKind, Substream};

/// The matrix field Δ evaluated pointwise on the mesh (row-major d×d per
/// mesh point).
#[derive(Debug, Clone)]
pub struct DeltaField {
    pub mesh: TimeMesh,
    pub dims: usize,
    pub values: Vec<f64>,
}

impl DeltaField {
    #[inline]
    pub fn at(&self, i: usize) -> &[f64] {
        let dd = self.dims * self.dims;
        &self.values[i * dd..(i + 1) * dd]
    }

    /// `√(Σ_{k,m} Δ_{k,m}(t_i)²)`: the collapsed scalar integrand.
    pub fn frobenius_at(&self, i: usize) -> f64 {
        self.at(i).iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

/// A sampled path of the limiting error process.
#[derive(Debug, Clone)]
pub struct LimitSample {
    pub u: Vec<f64>,
    pub w_seed: SeedStamp,
}

impl LimitSample {
    pub fn terminal(&self) -> f64 {
        *self.u.last().unwrap()
    }

    pub fn sup_abs(&self) -> f64 {
        crate::euler::sup_statistic(&self.u)
    }
}

/// How the limit sampler realizes the Brownian array.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LimitSampler {
    /// d×d independent Brownian motions, one per Δ entry.
    Array,
    /// One Brownian motion against the collapsed integrand √(ΣΔ²).
    Collapsed,
}

/// Evaluates Δ pointwise along `y` up to `horizon` (entries past the horizon
/// are zero, so integrals of the field stop there).
pub fn delta_field(
    f: &Integrand,
    model: &SdeSpec,
    theta: &Intensity,
    y: &StatePath,
    horizon: f64,
) -> Result<DeltaField> {
    if f.dim != y.dims || model.dim != y.dims {
        return Err(Error::UnsupportedDimension {
            got: f.dim.max(model.dim),
            expected: y.dims,
        });
    }
    let d = y.dims;
    let steps = y.mesh.steps();
    let stop = y.mesh.snap_up(horizon);
    let mut values = vec![0.0; (steps + 1) * d * d];
    let mut jac = vec![0.0; d * d];
    let mut beta = vec![0.0; d * d];

    for i in 0..=steps.min(stop) {
        let t = y.mesh.time(i);
        let state = y.at(i);
        f.jacobian_into(t, state, &mut jac);
        model.diffusion_into(state, &mut beta);
        let theta_t = theta.evaluate(t, state)?.value;
        let denom = (2.0 * theta_t).sqrt();
        let out = &mut values[i * d * d..(i + 1) * d * d];
        for k in 0..d {
            for m in 0..d {
                let mut acc = 0.0;
                for ii in 0..d {
                    for jj in 0..d {
                        acc += jac[ii * d + jj] * beta[k * d + ii] * beta[m * d + jj];
                    }
                }
                let v = acc / denom;
                if !v.is_finite() {
                    return Err(Error::NonFinite {
                        what: "delta field",
                        index: i,
                    });
                }
                out[k * d + m] = v;
            }
        }
    }
    Ok(DeltaField {
        mesh: y.mesh,
        dims: d,
        values,
    })
}

/// The intensity-free error-rate process `f(t) = √(½ Σ_{k,m} A_{k,m}²)` with
/// `A = β J βᵀ`, so that the limit of `U^n` is `∫ f/√θ dW`. This is the `f`
/// the grid-design strategies consume.
pub fn error_rate_process(
    f: &Integrand,
    model: &SdeSpec,
) -> impl Fn(f64, &[f64]) -> f64 + Send + Sync {
    let f = f.clone();
    let model = model.clone();
    move |t: f64, state: &[f64]| {
        let d = model.dim;
        let mut jac = vec![0.0; d * d];
        let mut beta = vec![0.0; d * d];
        f.jacobian_into(t, state, &mut jac);
        model.diffusion_into(state, &mut beta);
        let mut sumsq = 0.0;
        for k in 0..d {
            for m in 0..d {
                let mut acc = 0.0;
                for ii in 0..d {
                    for jj in 0..d {
                        acc += jac[ii * d + jj] * beta[k * d + ii] * beta[m * d + jj];
                    }
                }
                sumsq += acc * acc;
            }
        }
        (0.5 * sumsq).sqrt()
    }
}

/// Samples the limiting process by the left-endpoint Itô sum of Δ against a
/// fresh Brownian array drawn from `w_sub`, which must be a `Limit`
/// substream: handing the sampler a path substream is a seed-collision
/// configuration error.
pub fn sample_limit(
    delta: &DeltaField,
    w_sub: Substream,
    sampler: LimitSampler,
) -> Result<LimitSample> {
    require_kind(&w_sub, StreamKind::Limit)?;
    let steps = delta.mesh.steps();
    let sqrt_dt = delta.mesh.dt().sqrt();
    let dd = delta.dims * delta.dims;
    let mut rng = w_sub.rng();
    let mut u = Vec::with_capacity(steps + 1);
    u.push(0.0);
    let mut acc = 0.0;
    match sampler {
        LimitSampler::Array => {
            for i in 0..steps {
                let row = delta.at(i);
                for e in 0..dd {
                    let z: f64 = rng.sample(StandardNormal);
                    acc += row[e] * sqrt_dt * z;
                }
                u.push(acc);
            }
        }
        LimitSampler::Collapsed => {
            for i in 0..steps {
                let z: f64 = rng.sample(StandardNormal);
                acc += delta.frobenius_at(i) * sqrt_dt * z;
                u.push(acc);
            }
        }
    }
    Ok(LimitSample {
        u,
        w_seed: w_sub.into(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::path::{simulate_brownian, simulate_sde};
    use crate::rng::SeedPlan;

    fn unit_brownian_path(steps: usize, seed: u64, index: u64) -> StatePath {
        let mesh = TimeMesh::new(1.0, steps).unwrap();
        let b = simulate_brownian(mesh, 1, SeedPlan::new(seed).path_stream(index)).unwrap();
        simulate_sde(&SdeSpec::brownian(1, vec![0.0]).unwrap(), &b).unwrap()
    }

    #[test]
    fn identity_case_is_inverse_root_two_theta() {
        let y = unit_brownian_path(64, 1, 0);
        let model = SdeSpec::brownian(1, vec![0.0]).unwrap();
        let f = Integrand::identity(1);
        let delta = delta_field(
            &f,
            &model,
            &Intensity::constant(1.0).unwrap(),
            &y,
            1.0,
        )
        .unwrap();
        for i in 0..=64 {
            assert!((delta.at(i)[0] - 1.0 / 2.0_f64.sqrt()).abs() < 1e-15);
        }
        let delta2 = delta_field(
            &f,
            &model,
            &Intensity::constant(2.0).unwrap(),
            &y,
            1.0,
        )
        .unwrap();
        for i in 0..=64 {
            assert!((delta2.at(i)[0] - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn zero_field_gives_zero_sample() {
        let mesh = TimeMesh::new(1.0, 32).unwrap();
        let delta = DeltaField {
            mesh,
            dims: 1,
            values: vec![0.0; 33],
        };
        let plan = SeedPlan::new(4);
        let sample = sample_limit(&delta, plan.limit_stream(0), LimitSampler::Array).unwrap();
        assert!(sample.u.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn sampler_rejects_path_substreams() {
        let mesh = TimeMesh::new(1.0, 8).unwrap();
        let delta = DeltaField {
            mesh,
            dims: 1,
            values: vec![0.0; 9],
        };
        let plan = SeedPlan::new(4);
        let err = sample_limit(&delta, plan.path_stream(0), LimitSampler::Array);
        assert!(matches!(err, Err(Error::StreamCollision(_))));
    }

    #[test]
    fn constant_field_terminal_variance() {
        // Δ ≡ 1/√2 on [0,1] ⇒ Var U*(1) = 1/2; 50_000 samples, ±3%.
        let mesh = TimeMesh::new(1.0, 128).unwrap();
        let delta = DeltaField {
            mesh,
            dims: 1,
            values: vec![1.0 / 2.0_f64.sqrt(); 129],
        };
        let plan = SeedPlan::new(99);
        let mut sum = 0.0;
        let mut sumsq = 0.0;
        let paths = 50_000;
        for i in 0..paths {
            let s = sample_limit(&delta, plan.limit_stream(i), LimitSampler::Array).unwrap();
            let v = s.terminal();
            sum += v;
            sumsq += v * v;
        }
        let n = paths as f64;
        let var = (sumsq - sum * sum / n) / (n - 1.0);
        assert!((var - 0.5).abs() <= 0.03 * 0.5, "variance {var}");
    }

    #[test]
    fn limit_sample_uncorrelated_with_driving_path() {
        // cov(U*(T), B(T)) ≈ 0 because W streams are disjoint from path
        // streams by construction.
        let plan = SeedPlan::new(123);
        let model = SdeSpec::brownian(1, vec![0.0]).unwrap();
        let f = Integrand::identity(1);
        let theta = Intensity::constant(1.0).unwrap();
        let paths = 20_000;
        let (mut su, mut sb, mut sub2, mut suu, mut sbb) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for i in 0..paths {
            let mesh = TimeMesh::new(1.0, 64).unwrap();
            let b = simulate_brownian(mesh, 1, plan.path_stream(i)).unwrap();
            let y = simulate_sde(&model, &b).unwrap();
            let delta = delta_field(&f, &model, &theta, &y, 1.0).unwrap();
            let s = sample_limit(&delta, plan.limit_stream(i), LimitSampler::Array).unwrap();
            let (u, bt) = (s.terminal(), b.values[64]);
            su += u;
            sb += bt;
            sub2 += u * bt;
            suu += u * u;
            sbb += bt * bt;
        }
        let n = paths as f64;
        let cov = sub2 / n - su / n * sb / n;
        let r = cov / ((suu / n - (su / n).powi(2)) * (sbb / n - (sb / n).powi(2))).sqrt();
        assert!(r.abs() <= 0.02, "correlation {r}");
    }

    #[test]
    fn error_rate_is_theta_free_delta_norm() {
        let y = unit_brownian_path(16, 5, 0);
        let model = SdeSpec::brownian(1, vec![0.0]).unwrap();
        let f = Integrand::square();
        let theta = Intensity::constant(3.0).unwrap();
        let rate = error_rate_process(&f, &model);
        let delta = delta_field(&f, &model, &theta, &y, 1.0).unwrap();
        for i in 0..=16 {
            let t = y.mesh.time(i);
            // rate = √θ · ‖Δ‖_F by construction
            let expect = (3.0_f64).sqrt() * delta.frobenius_at(i);
            assert!((rate(t, y.at(i)) - expect).abs() < 1e-12);
        }
    }
}
