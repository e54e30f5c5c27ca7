//! Property tests for the structural invariants: grid monotonicity and
//! spacing laws, step-map behaviour, Itô-sum linearity, the discrete
//! identity, and KS invariance under monotone transforms.

use proptest::prelude::*;

use randgrid::euler::{ito_sum, sup_statistic, theorem_identity};
use randgrid::grid::build_grid;
use randgrid::path::{simulate_brownian, simulate_sde};
use randgrid::stats::ks_statistic;
use randgrid::{Integrand, Intensity, SdeSpec, SeedPlan, TimeMesh};

fn brownian_path(steps: usize, seed: u64) -> randgrid::StatePath {
    let mesh = TimeMesh::new(1.0, steps).unwrap();
    let b = simulate_brownian(mesh, 1, SeedPlan::new(seed).path_stream(0)).unwrap();
    simulate_sde(&SdeSpec::brownian(1, vec![0.0]).unwrap(), &b).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn grid_spacing_law_and_monotonicity(
        seed in 0u64..1000,
        n in 8u64..128,
        lo in 0.2f64..1.0,
        width in 0.5f64..4.0,
    ) {
        let hi = lo + width;
        let theta = Intensity::of_state("prop", (lo, hi), move |t, y| {
            lo + (1.0 + (8.0 * t).sin() * y[0]).abs()
        }).unwrap();
        let path = brownian_path(4096, seed);
        let grid = build_grid(&theta, n, &path, 1.0).unwrap();

        // strictly increasing, snapped indices nondecreasing
        prop_assert!(grid.taus.windows(2).all(|w| w[1] > w[0]));
        prop_assert!(grid.snap_indices.windows(2).all(|w| w[1] >= w[0]));
        prop_assert_eq!(*grid.taus.last().unwrap(), 1.0);

        // spacing in [1/(n·hi), 1/(n·lo)] except the capped final interval
        let spacings: Vec<f64> = grid.spacings().collect();
        for (k, s) in spacings.iter().enumerate() {
            if k + 1 < spacings.len() {
                prop_assert!(*s >= 1.0 / (n as f64 * hi) - 1e-12);
            }
            prop_assert!(*s <= 1.0 / (n as f64 * lo) + 1e-12);
        }

        // step map: nondecreasing, ≤ t, gap bounded by 1/(n·theta_min)
        let mut prev = 0.0;
        for i in 0..=64 {
            let t = i as f64 / 64.0;
            let e = grid.last_grid_time(t).unwrap();
            prop_assert!(e >= prev && e <= t + 1e-15);
            prop_assert!(t - e <= 1.0 / (n as f64 * lo) + 1e-12);
            prev = e;
        }
    }

    #[test]
    fn constant_theta_count_scales_exactly(
        seed in 0u64..200,
        n in 4u64..256,
        value in 0.3f64..5.0,
    ) {
        let theta = Intensity::constant(value).unwrap();
        let path = brownian_path(512, seed);
        let n1 = build_grid(&theta, n, &path, 1.0).unwrap().intervention_count();
        let n2 = build_grid(&theta, 2 * n, &path, 1.0).unwrap().intervention_count();
        prop_assert!(n2 >= 2 * n1 - 1, "N({}) = {}, N({}) = {}", n, n1, 2 * n, n2);
        // constant intensity: the count is the ceiling of n·theta·T
        prop_assert_eq!(n1 as f64, (n as f64 * value).ceil());
    }

    #[test]
    fn ito_sum_is_linear(
        seed in 0u64..200,
        a in -3.0f64..3.0,
        b in -3.0f64..3.0,
    ) {
        let path = brownian_path(256, seed);
        let x = &path.values;
        let h1: Vec<f64> = x.iter().map(|v| v.cos()).collect();
        let h2: Vec<f64> = x.iter().map(|v| v * v).collect();
        let combined: Vec<f64> = h1.iter().zip(&h2).map(|(p, q)| a * p + b * q).collect();
        let lhs = ito_sum(&combined, x).unwrap();
        let s1 = ito_sum(&h1, x).unwrap();
        let s2 = ito_sum(&h2, x).unwrap();
        for i in 0..x.len() {
            let rhs = a * s1[i] + b * s2[i];
            prop_assert!((lhs[i] - rhs).abs() <= 1e-9 * (1.0 + rhs.abs()));
        }
    }

    #[test]
    fn discrete_identity_for_random_quadratics(
        seed in 0u64..200,
        c2 in -2.0f64..2.0,
        c1 in -2.0f64..2.0,
    ) {
        use std::sync::Arc;
        let f = Integrand::new(
            "quadratic",
            1,
            Arc::new(move |_t, y: &[f64], out: &mut [f64]| out[0] = c2 * y[0] * y[0] + c1 * y[0]),
            Some(Arc::new(move |_t, y: &[f64], out: &mut [f64]| out[0] = 2.0 * c2 * y[0] + c1)),
        ).unwrap();
        let path = brownian_path(1024, seed);
        let theta = Intensity::constant(1.0).unwrap();
        let grid = build_grid(&theta, 32, &path, 1.0).unwrap();
        let dev = theorem_identity(&f, &path, &grid).unwrap();
        prop_assert!(dev <= 1e-10, "deviation {}", dev);
    }

    #[test]
    fn ks_statistic_invariant_under_monotone_transforms(
        xs in prop::collection::vec(-50.0f64..50.0, 30..200),
        ys in prop::collection::vec(-50.0f64..50.0, 30..200),
        scale in 0.1f64..4.0,
    ) {
        let d0 = ks_statistic(&xs, &ys);
        let t = |v: &f64| (v * scale * 0.05).exp() + v * scale;
        let tx: Vec<f64> = xs.iter().map(t).collect();
        let ty: Vec<f64> = ys.iter().map(t).collect();
        let d1 = ks_statistic(&tx, &ty);
        prop_assert!((d0 - d1).abs() < 1e-12);
        prop_assert!((0.0..=1.0).contains(&d0));
    }

    #[test]
    fn error_paths_start_at_zero_and_stay_finite(
        seed in 0u64..100,
        n in 8u64..64,
    ) {
        let path = brownian_path(2048, seed);
        let theta = Intensity::constant(1.0).unwrap();
        let grid = build_grid(&theta, n, &path, 1.0).unwrap();
        let err = randgrid::euler::euler_error(&Integrand::square(), &path, &grid, None).unwrap();
        prop_assert_eq!(err.u[0], 0.0);
        prop_assert!(err.u.iter().all(|v| v.is_finite()));
        let z = randgrid::euler::z_process(&path, &grid, None).unwrap();
        prop_assert_eq!(z.z_entry(0, 0, 0), 0.0);
        prop_assert!(sup_statistic(&z.u).is_finite());
    }
}
