//! Discrete stochastic integrals and the scaled approximation-error
//! processes.
//!
//! All integrals are left-endpoint Riemann-Itô sums on the mesh. The error
//! process from approximating `∫ f(Y) dY` with the integrand frozen at the
//! last grid time is
//!
//! ```text
//! U^n(t) = λ_n Σ_i Σ_c (f_c(Y(t_i)) − f_c(Y∘η_n(t_i))) · ΔY_c(t_i),
//! ```
//!
//! with `λ_n = √n` by default, and the matrix companion
//! `Z^n_{ij}(t) = λ_n ∫ (Y_j − Y_j∘η_n) dY_i`. On the discrete carrier the
//! two satisfy the exact identity `U^n = ∫ g(Y, Y∘η_n) dZ^n` in one
//! dimension, with `g(x,y) = (f(x)−f(y))/(x−y)` continued by `f'` on the
//! diagonal; `theorem_identity` verifies it to full precision.

use crate::error::{Error, Result};
use crate::grid::{RandomGrid, StepCursor};
use crate::integrand::Integrand;
use crate::intensity::Intensity;
use crate::path::{BrownianPath, StatePath};

/// Scaled error processes for one path: `u` is scalar, `z` is d×d row-major
/// per mesh point. Both start at 0.
#[derive(Debug, Clone)]
pub struct ErrorSample {
    pub n: u64,
    pub scale: f64,
    pub u: Vec<f64>,
    pub z: Option<Vec<f64>>,
    pub dims: usize,
}

impl ErrorSample {
    pub fn terminal(&self) -> f64 {
        *self.u.last().unwrap()
    }

    pub fn sup_abs(&self) -> f64 {
        sup_statistic(&self.u)
    }

    pub fn z_entry(&self, i: usize, r: usize, c: usize) -> f64 {
        let d = self.dims;
        self.z.as_ref().expect("z not computed")[i * d * d + r * d + c]
    }
}

/// Running maximum of |path|.
pub fn sup_statistic(path: &[f64]) -> f64 {
    path.iter().fold(0.0, |m, &v| m.max(v.abs()))
}

/// Left-endpoint Itô sum `Σ_i H(t_i)(X(t_{i+1}) − X(t_i))` as a cumulative
/// path; `H` and `X` are scalar paths on the same mesh.
pub fn ito_sum(h: &[f64], x: &[f64]) -> Result<Vec<f64>> {
    if h.len() != x.len() || h.is_empty() {
        return Err(Error::MeshMismatch(format!(
            "integrand has {} points, integrator {}",
            h.len(),
            x.len()
        )));
    }
    let mut out = Vec::with_capacity(x.len());
    let mut acc = 0.0;
    out.push(0.0);
    for i in 0..x.len() - 1 {
        acc += h[i] * (x[i + 1] - x[i]);
        out.push(acc);
    }
    Ok(out)
}

fn check_grid_mesh(y: &StatePath, grid: &RandomGrid) -> Result<()> {
    match grid.snap_indices.last() {
        Some(&last) if last <= y.mesh.steps() => Ok(()),
        Some(_) => Err(Error::MeshMismatch(
            "grid snap indices exceed path mesh".into(),
        )),
        None => Err(Error::MeshMismatch("grid has no points".into())),
    }
}

/// The scaled Euler approximation error `U^n` for integrand `f` along `Y`
/// over `grid`, as a cumulative path on the mesh (zero past the grid horizon
/// increment-wise: integration stops at the grid horizon).
///
/// `scale` defaults to √n when `None`.
pub fn euler_error(
    f: &Integrand,
    y: &StatePath,
    grid: &RandomGrid,
    scale: Option<f64>,
) -> Result<ErrorSample> {
    compute_error(f, y, grid, scale, false)
}

/// The matrix error process `Z^n_{ij}(t) = λ_n ∫ (Y_j − Y_j∘η_n) dY_i`.
pub fn z_process(y: &StatePath, grid: &RandomGrid, scale: Option<f64>) -> Result<ErrorSample> {
    // Z is the special case f = identity of the pairwise accumulation; the
    // u component returned alongside is the coordinate-summed identity error.
    compute_error(&Integrand::identity(y.dims), y, grid, scale, true)
}

fn compute_error(
    f: &Integrand,
    y: &StatePath,
    grid: &RandomGrid,
    scale: Option<f64>,
    with_z: bool,
) -> Result<ErrorSample> {
    if f.dim != y.dims {
        return Err(Error::UnsupportedDimension {
            got: f.dim,
            expected: y.dims,
        });
    }
    check_grid_mesh(y, grid)?;
    let d = y.dims;
    let steps = y.mesh.steps();
    let lambda = scale.unwrap_or((grid.n as f64).sqrt());
    let stop = y.mesh.snap_up(grid.horizon);

    let mut u = Vec::with_capacity(steps + 1);
    let mut z = if with_z {
        Some(vec![0.0; (steps + 1) * d * d])
    } else {
        None
    };
    u.push(0.0);

    let mut cursor = StepCursor::new(grid);
    let mut f_now = vec![0.0; d];
    let mut f_frozen = vec![0.0; d];
    let mut frozen_interval = usize::MAX;
    let mut frozen_idx = 0usize;
    let mut acc = 0.0;
    let mut zacc = vec![0.0; d * d];

    for i in 0..steps {
        if i < stop {
            let k = cursor.advance(i);
            if k != frozen_interval {
                frozen_interval = k;
                frozen_idx = grid.snap_indices[k].min(i);
                f.eval_into(y.mesh.time(frozen_idx), y.at(frozen_idx), &mut f_frozen);
            }
            f.eval_into(y.mesh.time(i), y.at(i), &mut f_now);
            let y_now = y.at(i);
            let y_next = y.at(i + 1);
            let y_frozen = y.at(frozen_idx);
            for c in 0..d {
                let dy = y_next[c] - y_now[c];
                let gap = f_now[c] - f_frozen[c];
                if !gap.is_finite() {
                    return Err(Error::NonFinite {
                        what: "integrand value",
                        index: i,
                    });
                }
                acc += lambda * gap * dy;
            }
            if let Some(zpath) = z.as_mut() {
                for r in 0..d {
                    let dy_r = y_next[r] - y_now[r];
                    for c in 0..d {
                        zacc[r * d + c] += lambda * (y_now[c] - y_frozen[c]) * dy_r;
                    }
                }
                zpath[(i + 1) * d * d..(i + 2) * d * d].copy_from_slice(&zacc);
            }
        } else if let Some(zpath) = z.as_mut() {
            zpath[(i + 1) * d * d..(i + 2) * d * d].copy_from_slice(&zacc);
        }
        u.push(acc);
    }
    Ok(ErrorSample {
        n: grid.n,
        scale: lambda,
        u,
        z,
        dims: d,
    })
}

/// Verifies the exact discrete identity `U^n = ∫ g(Y, Y∘η_n) dZ^n` in one
/// dimension and returns the relative sup-deviation
/// `sup_t |U(t) − I(t)| / max(1, sup_t |U(t)|)`.
pub fn theorem_identity(f: &Integrand, y: &StatePath, grid: &RandomGrid) -> Result<f64> {
    if y.dims != 1 || f.dim != 1 {
        return Err(Error::UnsupportedDimension {
            got: y.dims.max(f.dim),
            expected: 1,
        });
    }
    let err = compute_error(f, y, grid, None, true)?;
    let z = err.z.as_ref().unwrap();
    let steps = y.mesh.steps();
    let stop = y.mesh.snap_up(grid.horizon);

    let mut cursor = StepCursor::new(grid);
    let mut frozen_interval = usize::MAX;
    let mut frozen_idx = 0usize;
    let mut integral = 0.0;
    let mut sup_dev = 0.0_f64;
    let mut fx = [0.0];
    let mut fy = [0.0];
    let mut fprime = [0.0];

    for i in 0..stop.min(steps) {
        let k = cursor.advance(i);
        if k != frozen_interval {
            frozen_interval = k;
            frozen_idx = grid.snap_indices[k].min(i);
        }
        let t = y.mesh.time(i);
        let x_now = y.coord(i, 0);
        let x_frozen = y.coord(frozen_idx, 0);
        f.eval_into(t, &[x_now], &mut fx);
        f.eval_into(y.mesh.time(frozen_idx), &[x_frozen], &mut fy);
        // difference quotient, continued by f' near the diagonal
        let g = if (x_now - x_frozen).abs() < 1e-8 * (1.0 + x_now.abs()) {
            f.jacobian_into(t, &[x_now], &mut fprime);
            fprime[0]
        } else {
            (fx[0] - fy[0]) / (x_now - x_frozen)
        };
        let dz = z[i + 1] - z[i];
        integral += g * dz;
        sup_dev = sup_dev.max((err.u[i + 1] - integral).abs());
    }
    Ok(sup_dev / err.sup_abs().max(1.0))
}

/// Sup-deviation report for the step-moment functional
/// `ψ_n(t) = n^{p/2} a(τ_k)(B(t) − B(τ_k))^p` on `τ_k ≤ t < τ_{k+1}`:
/// compares `∫_0^t ψ_n ds` with `E_p ∫_0^t a/θ^{p/2} ds` uniformly in `t`,
/// with `E_1 = 0` and `E_2 = 1/2`.
pub fn psi_functional(
    a: &(dyn Fn(f64, &[f64]) -> f64 + Sync),
    theta: &Intensity,
    b: &BrownianPath,
    y: &StatePath,
    grid: &RandomGrid,
    p: u32,
) -> Result<f64> {
    let e_p = match p {
        1 => 0.0,
        2 => 0.5,
        _ => {
            return Err(Error::Config(format!(
                "psi functional supports p in {{1, 2}}, got {p}"
            )))
        }
    };
    if b.dims != 1 {
        return Err(Error::UnsupportedDimension {
            got: b.dims,
            expected: 1,
        });
    }
    if b.mesh != y.mesh {
        return Err(Error::MeshMismatch(
            "driving path and state path meshes differ".into(),
        ));
    }
    let steps = b.mesh.steps();
    let dt = b.mesh.dt();
    let stop = b.mesh.snap_up(grid.horizon);
    let n_pow = (grid.n as f64).powf(p as f64 / 2.0);

    let mut cursor = StepCursor::new(grid);
    let mut frozen_interval = usize::MAX;
    let mut frozen_idx = 0usize;
    let mut a_frozen = 0.0;
    let mut lhs = 0.0;
    let mut rhs = 0.0;
    let mut sup_dev = 0.0_f64;

    for i in 0..stop.min(steps) {
        let k = cursor.advance(i);
        if k != frozen_interval {
            frozen_interval = k;
            frozen_idx = grid.snap_indices[k].min(i);
            a_frozen = a(b.mesh.time(frozen_idx), y.at(frozen_idx));
        }
        let incr = b.coord(i, 0) - b.coord(frozen_idx, 0);
        let psi = n_pow * a_frozen * incr.powi(p as i32);
        lhs += psi * dt;

        let t = b.mesh.time(i);
        let a_here = a(t, y.at(i));
        let theta_here = theta.evaluate(t, y.at(i))?.value;
        rhs += e_p * a_here / theta_here.powf(p as f64 / 2.0) * dt;

        sup_dev = sup_dev.max((lhs - rhs).abs());
    }
    Ok(sup_dev)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::build_grid;
    use crate::mesh::TimeMesh;
    use crate::model::SdeSpec;
    use crate::path::{simulate_brownian, simulate_sde};
    use crate::rng::SeedPlan;

    fn brownian_state(steps: usize, seed: u64, index: u64) -> (BrownianPath, StatePath) {
        let mesh = TimeMesh::new(1.0, steps).unwrap();
        let b = simulate_brownian(mesh, 1, SeedPlan::new(seed).path_stream(index)).unwrap();
        let y = simulate_sde(&SdeSpec::brownian(1, vec![0.0]).unwrap(), &b).unwrap();
        (b, y)
    }

    #[test]
    fn ito_sum_constant_integrand() {
        let (b, _) = brownian_state(256, 1, 0);
        let ones = vec![1.0; 257];
        let path = ito_sum(&ones, &b.values).unwrap();
        for i in 0..=256 {
            assert!((path[i] - b.values[i]).abs() < 1e-12);
        }
        let threes = vec![3.0; 257];
        let path = ito_sum(&threes, &b.values).unwrap();
        for i in 0..=256 {
            assert!((path[i] - 3.0 * b.values[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn ito_sum_mismatched_lengths_rejected() {
        assert!(ito_sum(&[1.0, 2.0], &[0.0, 1.0, 2.0]).is_err());
    }

    #[test]
    fn ito_sum_self_integral_matches_ito_formula() {
        // terminal of ∫B dB is (B(T)² − [B]_M)/2 exactly; ensemble mean of the
        // gap against (B(T)² − T)/2 is the quadratic-variation error, which is
        // centered with variance 2·T·Δt/paths.
        let plan = SeedPlan::new(42);
        let paths = 2000;
        let steps = 512;
        let mut mean_gap = 0.0;
        for i in 0..paths {
            let mesh = TimeMesh::new(1.0, steps).unwrap();
            let b = simulate_brownian(mesh, 1, plan.path_stream(i)).unwrap();
            let integral = ito_sum(&b.values, &b.values).unwrap();
            let bt = b.values[steps as usize];
            mean_gap += integral[steps as usize] - (bt * bt - 1.0) / 2.0;
        }
        mean_gap /= paths as f64;
        let tol = 3.0 * (2.0 / (steps as f64 * paths as f64)).sqrt() / 2.0;
        assert!(mean_gap.abs() < tol.max(1e-3), "gap {mean_gap}, tol {tol}");
    }

    #[test]
    fn grid_at_every_mesh_point_kills_the_error() {
        let (_, y) = brownian_state(128, 3, 0);
        // n·theta = mesh density: spacing 1/128 puts a grid point on every
        // mesh point, so f(Y∘η) = f(Y) pointwise.
        let theta = Intensity::constant(1.0).unwrap();
        let grid = build_grid(&theta, 128, &y, 1.0).unwrap();
        let err = euler_error(&Integrand::square(), &y, &grid, None).unwrap();
        assert!(err.sup_abs() < 1e-12);
        let z = z_process(&y, &grid, None).unwrap();
        assert!(sup_statistic(z.z.as_ref().unwrap()) < 1e-12);
    }

    #[test]
    fn identity_integrand_error_is_bitwise_z() {
        let (_, y) = brownian_state(1024, 4, 1);
        let theta = Intensity::constant(1.0).unwrap();
        let grid = build_grid(&theta, 32, &y, 1.0).unwrap();
        let err = euler_error(&Integrand::identity(1), &y, &grid, None).unwrap();
        let z = z_process(&y, &grid, None).unwrap();
        for i in 0..=1024 {
            assert_eq!(err.u[i], z.z_entry(i, 0, 0));
        }
    }

    #[test]
    fn identity_reduces_to_z_in_theorem_check() {
        let (_, y) = brownian_state(2048, 5, 2);
        let theta = Intensity::constant(1.0).unwrap();
        let grid = build_grid(&theta, 64, &y, 1.0).unwrap();
        let dev = theorem_identity(&Integrand::identity(1), &y, &grid).unwrap();
        assert_eq!(dev, 0.0);
    }

    #[test]
    fn discrete_identity_holds_for_smooth_integrands() {
        for (seed, integrand) in [(7u64, Integrand::square()), (8u64, Integrand::sine())] {
            for index in 0..10 {
                let (_, y) = brownian_state(2048, seed, index);
                let theta = Intensity::constant(1.0).unwrap();
                let grid = build_grid(&theta, 64, &y, 1.0).unwrap();
                let dev = theorem_identity(&integrand, &y, &grid).unwrap();
                assert!(dev <= 1e-10, "{} deviation {dev}", integrand.label);
            }
        }
    }

    #[test]
    fn psi_rejects_unsupported_power() {
        let (b, y) = brownian_state(256, 9, 0);
        let theta = Intensity::constant(1.0).unwrap();
        let grid = build_grid(&theta, 16, &y, 1.0).unwrap();
        let err = psi_functional(&|_, _| 1.0, &theta, &b, &y, &grid, 3);
        assert!(err.is_err());
    }

    #[test]
    fn psi_zero_weight_gives_zero_deviation() {
        let (b, y) = brownian_state(256, 10, 0);
        let theta = Intensity::constant(1.0).unwrap();
        let grid = build_grid(&theta, 16, &y, 1.0).unwrap();
        let dev = psi_functional(&|_, _| 0.0, &theta, &b, &y, &grid, 2).unwrap();
        assert_eq!(dev, 0.0);
    }

    #[test]
    fn error_stops_at_truncated_horizon() {
        let (_, y) = brownian_state(512, 11, 0);
        let theta = Intensity::constant(1.0).unwrap();
        let grid = build_grid(&theta, 32, &y, 0.5).unwrap();
        let err = euler_error(&Integrand::square(), &y, &grid, None).unwrap();
        let at_half = err.u[y.mesh.snap_up(0.5)];
        assert_eq!(err.terminal(), at_half);
    }
}
