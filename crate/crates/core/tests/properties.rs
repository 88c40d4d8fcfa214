//! Property tests for the structural invariants: filter linearity and
//! positivity, admissibility projection, stream determinism, and the
//! closed-form fixed-effect concentration.

mod common;

use common::{dense_concentrated_mu, dense_unit_objective_at};
use ndarray::{Array2, Array3};
use panelgarch::arma::ConcentrationKernel;
use panelgarch::seeding::{derive_key, substream};
use panelgarch::{
    garch_filter, residual_filter, ArmaParams, GarchParams, ModelOrders, PanelData,
};
use proptest::prelude::*;
use rand::RngCore;

fn small_panel(n: usize, t: usize, seed: u64) -> PanelData {
    let mut rng = substream(seed, &[0]);
    let y = Array2::from_shape_fn((n, t), |_| {
        (rng.next_u64() as f64 / u64::MAX as f64) * 4.0 - 2.0
    });
    let x = Array3::from_shape_fn((n, t, 1), |_| {
        (rng.next_u64() as f64 / u64::MAX as f64) * 2.0 - 1.0
    });
    PanelData::from_arrays(y, x).unwrap()
}

fn arma_case(phi: f64, psi: f64) -> (ModelOrders, ArmaParams) {
    (
        ModelOrders::new(1, 1, 0, 0, 1).unwrap(),
        ArmaParams::new(vec![0.5], vec![phi], vec![psi]),
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// The residual recursion is a linear map of (y, x, mu) jointly.
    #[test]
    fn residual_filter_is_linear(
        seed in 0u64..1000,
        phi in -0.9f64..0.9,
        psi in -0.9f64..0.9,
        scale in 0.25f64..4.0,
    ) {
        let (_, params) = arma_case(phi, psi);
        let panel = small_panel(3, 12, seed);
        let mu = vec![0.3, -0.8, 1.2];
        let u = residual_filter(&panel, &params, &mu, None).unwrap();

        let scaled = PanelData::from_arrays(&panel.y * scale, &panel.x * scale).unwrap();
        let mu_scaled: Vec<f64> = mu.iter().map(|m| m * scale).collect();
        let u_scaled = residual_filter(&scaled, &params, &mu_scaled, None).unwrap();
        for (a, b) in u.iter().zip(u_scaled.iter()) {
            prop_assert!((a * scale - b).abs() <= 1e-10 * (1.0 + b.abs()));
        }
    }

    /// Conditional variances stay above the intercept floor for admissible
    /// coefficients and positive targets.
    #[test]
    fn volatility_filter_respects_the_floor(
        seed in 0u64..1000,
        tau in 0.0f64..0.5,
        nu in 0.0f64..0.45,
    ) {
        let params = GarchParams::new(vec![tau], vec![nu]);
        prop_assume!(params.is_admissible());
        let panel = small_panel(2, 20, seed);
        let omega = vec![0.7, 2.0];
        let h = garch_filter(
            &panel.y,
            &params,
            &omega,
            panelgarch::VolatilityInit::UnconditionalVariance,
        )
        .unwrap();
        for (i, row) in h.outer_iter().enumerate() {
            let floor = omega[i] * (1.0 - tau - nu) - 1e-12;
            prop_assert!(row.iter().all(|&v| v >= floor && v.is_finite()));
        }
    }

    /// Without ARCH or GARCH terms the filter returns the targets.
    #[test]
    fn volatility_filter_is_flat_without_dynamics(seed in 0u64..1000) {
        let params = GarchParams::new(vec![], vec![]);
        let panel = small_panel(2, 10, seed);
        let omega = vec![1.3, 0.4];
        let h = garch_filter(
            &panel.y,
            &params,
            &omega,
            panelgarch::VolatilityInit::UnconditionalVariance,
        )
        .unwrap();
        for (i, row) in h.outer_iter().enumerate() {
            prop_assert!(row.iter().all(|&v| (v - omega[i]).abs() < 1e-15));
        }
    }

    /// Projection lands inside the admissible set, never moves a point that
    /// is already admissible, and keeps coefficients nonnegative.
    #[test]
    fn admissibility_projection_is_sound(
        tau in -0.5f64..1.5,
        nu in -0.5f64..1.5,
    ) {
        let raw = GarchParams::new(vec![tau], vec![nu]);
        let proj = raw.project_admissible();
        prop_assert!(proj.is_admissible());
        prop_assert!(proj.tau[0] >= 0.0 && proj.nu[0] >= 0.0);
        if raw.is_admissible() {
            prop_assert!((proj.tau[0] - tau).abs() < 1e-15);
            prop_assert!((proj.nu[0] - nu).abs() < 1e-15);
        }
        let twice = proj.project_admissible();
        prop_assert!((twice.tau[0] - proj.tau[0]).abs() < 1e-15);
        prop_assert!((twice.nu[0] - proj.nu[0]).abs() < 1e-15);
    }

    /// Substreams are pure functions of (seed, path): same path replays the
    /// same draws, sibling paths differ.
    #[test]
    fn substreams_replay_and_separate(seed in any::<u64>(), a in 0u64..50, b in 0u64..50) {
        let mut s1 = substream(seed, &[a, b]);
        let mut s2 = substream(seed, &[a, b]);
        let first: Vec<u64> = (0..4).map(|_| s1.next_u64()).collect();
        let replay: Vec<u64> = (0..4).map(|_| s2.next_u64()).collect();
        prop_assert_eq!(&first, &replay);

        let mut other = substream(seed, &[a, b + 1]);
        let sibling: Vec<u64> = (0..4).map(|_| other.next_u64()).collect();
        prop_assert_ne!(first, sibling);
        prop_assert_ne!(derive_key(seed, &[a]), derive_key(seed, &[a, b]));
    }

    /// The banded concentration solves match the dense generalized least
    /// squares expression for the fixed effect, and the concentrated value
    /// minimizes the unit objective.
    #[test]
    fn concentration_matches_dense_gls(
        seed in 0u64..1000,
        psi in -0.85f64..0.85,
    ) {
        let t = 9usize;
        let mut rng = substream(seed, &[1]);
        let v: Vec<f64> = (0..t)
            .map(|_| (rng.next_u64() as f64 / u64::MAX as f64) * 2.0 - 1.0)
            .collect();
        let psi_vec = vec![psi];
        let kernel = ConcentrationKernel::new(&psi_vec, t);
        let mu_banded = kernel.mu_for(&v);
        let mu_dense = dense_concentrated_mu(&psi_vec, &v);
        prop_assert!((mu_banded - mu_dense).abs() <= 1e-10 * (1.0 + mu_dense.abs()));

        let at = |mu: f64| dense_unit_objective_at(&psi_vec, &v, mu);
        let eps = 1e-4;
        prop_assert!(at(mu_banded) <= at(mu_banded + eps) + 1e-12);
        prop_assert!(at(mu_banded) <= at(mu_banded - eps) + 1e-12);
    }
}
