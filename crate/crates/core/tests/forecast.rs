//! Rolling-origin backtest invariants: forecasts read nothing after their
//! origin, degenerate series take the trivial path, and panel fits do not
//! depend on unit order.

mod common;

use common::simulate_benchmark;
use ndarray::{Array2, Array3, Axis};
use panelgarch::{
    rolling_backtest, ForecastMethod, ForecastOptions, ForecastRecord, ModelOrders, PanelData,
};

fn options(fhs_draws: usize) -> ForecastOptions {
    ForecastOptions {
        fhs_draws,
        seed: 5,
        workers: 1,
        ..ForecastOptions::default()
    }
}

fn forecast_fields_equal(a: &ForecastRecord, b: &ForecastRecord) -> bool {
    a.unit == b.unit
        && a.origin == b.origin
        && a.y_point == b.y_point
        && a.lower == b.lower
        && a.upper == b.upper
        && a.h_forecast == b.h_forecast
        && a.degenerate == b.degenerate
}

/// Forecasts at origins before a mutation point are bit-identical when y
/// changes only after it, and fully identical (actuals included) when only
/// x beyond the target changes. The regressor at the target itself is
/// legitimately read: it enters the model with a lag.
#[test]
fn forecasts_ignore_data_after_their_origin() {
    let (orders, _, sim) = simulate_benchmark(3, 50, 1301);
    let window = 36;
    let opts = options(400);
    let base = rolling_backtest(&sim.panel, &orders, window, ForecastMethod::Panel, &opts).unwrap();
    assert!(base.skipped.is_empty());

    // Corrupt y strictly after `cut`.
    let cut = 42;
    let mut y_mut = sim.panel.y.clone();
    for mut row in y_mut.outer_iter_mut() {
        for t in (cut + 1)..row.len() {
            row[t] += 40.0 * (1.0 + t as f64);
        }
    }
    let mutated = PanelData::from_arrays(y_mut, sim.panel.x.clone()).unwrap();
    let shifted =
        rolling_backtest(&mutated, &orders, window, ForecastMethod::Panel, &opts).unwrap();
    for (a, b) in base.records.iter().zip(shifted.records.iter()) {
        if a.origin < cut {
            assert!(
                forecast_fields_equal(a, b) && a.y_actual == b.y_actual,
                "origin {} before the cut changed",
                a.origin
            );
        }
        if a.origin == cut {
            // The target y is corrupted but everything the forecast computed
            // from the window must be untouched.
            assert!(forecast_fields_equal(a, b));
            assert!(a.y_actual != b.y_actual);
        }
    }

    // Corrupt x strictly after `cut + 1`, the target of origin `cut`.
    let mut x_mut = sim.panel.x.clone();
    for mut unit in x_mut.axis_iter_mut(Axis(0)) {
        for t in (cut + 2)..unit.shape()[0] {
            unit[[t, 0]] -= 17.5;
        }
    }
    let mutated_x = PanelData::from_arrays(sim.panel.y.clone(), x_mut).unwrap();
    let shifted_x =
        rolling_backtest(&mutated_x, &orders, window, ForecastMethod::Panel, &opts).unwrap();
    for (a, b) in base.records.iter().zip(shifted_x.records.iter()) {
        if a.origin <= cut {
            assert!(
                forecast_fields_equal(a, b) && a.y_actual == b.y_actual,
                "origin {} saw the regressor mutation beyond its target",
                a.origin
            );
        }
    }
}

#[test]
fn constant_series_take_the_degenerate_path() {
    let t = 30;
    let y = Array2::from_elem((2, t), 5.0);
    let x = Array3::zeros((2, t, 0));
    let panel = PanelData::from_arrays(y, x).unwrap();
    let orders = ModelOrders::new(0, 0, 0, 0, 0).unwrap();
    let out = rolling_backtest(&panel, &orders, 25, ForecastMethod::Panel, &options(200)).unwrap();

    assert!(out.skipped.is_empty());
    assert_eq!(out.records.len(), 2 * (t - 25));
    for r in &out.records {
        assert!(r.degenerate, "constant window must flag the interval");
        assert!((r.y_point - 5.0).abs() < 1e-10);
        assert!((r.h_forecast).abs() < 1e-12);
    }
    for u in &out.units {
        assert!(u.rmse < 1e-10);
        assert!(u.hits.iter().all(|h| !h), "a collapsed interval at the true
            constant still contains the realized value");
    }
}

/// Reversing unit order relabels the records but leaves every point and
/// variance forecast identical: the pooled criterion is a sum over units.
/// Interval endpoints are excluded, the resampling pool order shifts.
#[test]
fn panel_point_forecasts_are_invariant_to_unit_order() {
    let (orders, _, sim) = simulate_benchmark(4, 46, 77);
    let window = 38;
    let opts = options(200);
    let base = rolling_backtest(&sim.panel, &orders, window, ForecastMethod::Panel, &opts).unwrap();

    let n = sim.panel.y.shape()[0];
    let mut y_rev = sim.panel.y.clone();
    let mut x_rev = sim.panel.x.clone();
    for i in 0..n {
        y_rev
            .row_mut(i)
            .assign(&sim.panel.y.row(n - 1 - i));
        x_rev
            .index_axis_mut(Axis(0), i)
            .assign(&sim.panel.x.index_axis(Axis(0), n - 1 - i));
    }
    let reversed = PanelData::from_arrays(y_rev, x_rev).unwrap();
    let flipped =
        rolling_backtest(&reversed, &orders, window, ForecastMethod::Panel, &opts).unwrap();

    for a in &base.records {
        let b = flipped
            .records
            .iter()
            .find(|r| r.unit == n - 1 - a.unit && r.origin == a.origin)
            .expect("every (unit, origin) pair survives the relabeling");
        assert!(
            (a.y_point - b.y_point).abs() < 1e-9 && (a.h_forecast - b.h_forecast).abs() < 1e-9,
            "unit {} origin {}: point {} vs {}, h {} vs {}",
            a.unit,
            a.origin,
            a.y_point,
            b.y_point,
            a.h_forecast,
            b.h_forecast
        );
    }
}

#[test]
fn backtests_are_rejected_without_room_for_a_target() {
    let (orders, _, sim) = simulate_benchmark(2, 40, 9);
    let err = rolling_backtest(
        &sim.panel,
        &orders,
        39,
        ForecastMethod::Panel,
        &options(200),
    );
    assert!(err.is_err());
}

#[test]
fn univariate_and_panel_backtests_cover_every_unit_and_origin() {
    // The univariate pool is one unit's window, so it must reach the
    // resampling minimum of 50 on its own.
    let (orders, _, sim) = simulate_benchmark(5, 64, 2024);
    let window = 50;
    for method in [ForecastMethod::Panel, ForecastMethod::Univariate] {
        let out = rolling_backtest(&sim.panel, &orders, window, method, &options(300)).unwrap();
        assert_eq!(out.records.len(), 5 * (64 - window), "{method:?}");
        assert_eq!(out.units.len(), 5);
        for r in &out.records {
            assert!(r.y_point.is_finite() && r.h_forecast > 0.0);
            assert!(r.lower <= r.upper);
        }
        for u in &out.units {
            assert!(u.rmse.is_finite() && u.rmse > 0.0);
            assert!((0.0..=1.0).contains(&u.hit_rate));
            // 12 origins is below the conditional-coverage minimum.
            assert!(u.lr_cc.is_none());
        }
    }
}
