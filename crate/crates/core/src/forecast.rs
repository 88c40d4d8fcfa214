//! Rolling-window one-step-ahead forecasting: point forecasts from the
//! fitted recursions, interval forecasts by filtered historical simulation,
//! and out-of-sample evaluation with RMSE and the conditional coverage test
//! of Christoffersen (1998).
//!
//! Conventions. An origin is the index of the last observed period; the
//! forecast targets origin + 1. Regressors are treated as lag-1 exogenous
//! values, so x at the target date is known at the origin and may be read;
//! y at the target is never read by the forecast itself. Forecasts at an
//! origin therefore depend only on information available at that origin,
//! and the backtest verifies as much by construction of its window slices.

use crate::arma::{fit_arma, ArmaEstimate, FitOptions};
use crate::error::{Error, Result};
use crate::filter::{garch_filter, VolatilityInit};
use crate::garch::{fit_garch, GarchEstimate};
use crate::inference::{
    analytic_correct_arma, jackknife_arma, jackknife_garch, ResidualSource,
};
use crate::panel::{ModelOrders, PanelData};
use crate::params::GarchParams;
use crate::seeding::{derive_key, substream};
use crate::stats;
use ndarray::Array2;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

/// How the window is estimated before forecasting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ForecastMethod {
    /// Joint panel fit, no bias correction.
    Panel,
    /// Analytically corrected mean parameters paired with jackknifed
    /// volatility parameters.
    PanelAnalytic,
    /// Jackknife-corrected mean and volatility parameters.
    PanelJackknife,
    /// Each unit fit on its own, unit-specific parameters throughout.
    Univariate,
}

pub const ALL_METHODS: [ForecastMethod; 4] = [
    ForecastMethod::Panel,
    ForecastMethod::PanelAnalytic,
    ForecastMethod::PanelJackknife,
    ForecastMethod::Univariate,
];

impl ForecastMethod {
    pub fn label(self) -> &'static str {
        match self {
            ForecastMethod::Panel => "panel",
            ForecastMethod::PanelAnalytic => "panel-analytic",
            ForecastMethod::PanelJackknife => "panel-jackknife",
            ForecastMethod::Univariate => "univariate",
        }
    }

    pub fn parse(label: &str) -> Result<Self> {
        ALL_METHODS
            .into_iter()
            .find(|m| m.label() == label)
            .ok_or_else(|| {
                Error::InvalidParams(format!(
                    "unknown method {label:?}; expected panel, panel-analytic, panel-jackknife, or univariate"
                ))
            })
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ForecastOptions {
    /// Nominal violation rate of the interval; 0.05 gives 95% intervals.
    pub alpha: f64,
    /// Resampling draws per interval.
    pub fhs_draws: usize,
    pub seed: u64,
    /// Score replications inside the analytic correction.
    pub bootstrap_reps: usize,
    pub init: VolatilityInit,
    pub fit: FitOptions,
    /// Worker threads across origins; 0 uses the library default.
    pub workers: usize,
}

impl Default for ForecastOptions {
    fn default() -> Self {
        // Forecasting needs point estimates only.
        let fit = FitOptions {
            compute_covariance: false,
            ..FitOptions::default()
        };
        Self {
            alpha: 0.05,
            fhs_draws: 10_000,
            seed: 0,
            bootstrap_reps: 100,
            init: VolatilityInit::UnconditionalVariance,
            fit,
            workers: 0,
        }
    }
}

/// One out-of-sample forecast. `origin` is the last observed period; the
/// target is `origin + 1`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ForecastRecord {
    pub unit: usize,
    pub origin: usize,
    pub y_actual: f64,
    pub y_point: f64,
    pub lower: f64,
    pub upper: f64,
    pub h_forecast: f64,
    /// Interval collapsed because the standardized residual pool was
    /// (numerically) constant.
    pub degenerate: bool,
}

/// Per-unit evaluation over the recorded origins.
#[derive(Debug, Clone, Serialize)]
pub struct UnitBacktest {
    pub unit_id: String,
    pub rmse: f64,
    /// Violation indicators in origin order.
    pub hits: Vec<bool>,
    pub hit_rate: f64,
    /// Conditional coverage statistic and p-value; absent when the hit
    /// sequence is shorter than the test's minimum length.
    pub lr_cc: Option<(f64, f64)>,
}

#[derive(Debug, Clone, Serialize)]
pub struct BacktestSummary {
    pub method: ForecastMethod,
    pub window: usize,
    pub records: Vec<ForecastRecord>,
    pub units: Vec<UnitBacktest>,
    /// (origin, error) pairs for origins whose window fit failed.
    pub skipped: Vec<(usize, String)>,
}

/// Estimated state a forecast is computed from: parameters, fixed effects,
/// and the filtered residual and variance paths over one window. The
/// volatility part may be a corrected estimate rather than a direct fit, so
/// it is carried explicitly rather than through `GarchEstimate`.
struct WindowState {
    arma: ArmaEstimate,
    garch_params: GarchParams,
    /// Intercepts varpi_i implied by the carried coefficients.
    varpi: Vec<f64>,
    omega: Vec<f64>,
    h: Array2<f64>,
}

impl WindowState {
    fn from_fits(arma: ArmaEstimate, garch: GarchEstimate) -> Self {
        let spread = 1.0 - garch.params.persistence();
        let varpi = garch.omega.iter().map(|w| w * spread).collect();
        Self {
            arma,
            garch_params: garch.params.clone(),
            varpi,
            omega: garch.omega.clone(),
            h: garch.h.clone(),
        }
    }
}

/// One-step point forecast for `unit` standing at `origin`, using a window
/// fit whose final period is `origin`. Lagged y comes from the panel,
/// lagged residuals and variances from the fit; x at the target is read
/// from the panel per the lag-1 exogeneity convention.
///
/// Returns (y_point, h_forecast).
pub fn point_forecast(
    arma_fit: &ArmaEstimate,
    garch_fit: &GarchEstimate,
    panel: &PanelData,
    unit: usize,
    origin: usize,
) -> Result<(f64, f64)> {
    let state = WindowState::from_fits(arma_fit.clone(), garch_fit.clone());
    point_forecast_state(&state, panel, unit, origin)
}

fn point_forecast_state(
    state: &WindowState,
    panel: &PanelData,
    unit: usize,
    origin: usize,
) -> Result<(f64, f64)> {
    let orders = state.arma.orders;
    let (n, w) = state.arma.residuals.dim();
    if unit >= panel.n_units() || unit >= n {
        return Err(Error::InvalidParams(format!(
            "unit {unit} out of range for the fitted window"
        )));
    }
    let target = origin + 1;
    if origin + 1 > panel.n_periods() {
        return Err(Error::InvalidParams(format!(
            "origin {origin} beyond the panel (T = {})",
            panel.n_periods()
        )));
    }
    let lag_need = orders.p.max(orders.q).max(orders.l).max(orders.k);
    if w < lag_need || origin + 1 < lag_need {
        return Err(Error::InsufficientData(format!(
            "window of {w} periods ending at {origin} cannot supply {lag_need} lags"
        )));
    }
    if orders.d_x > 0 && target >= panel.n_periods() {
        return Err(Error::InsufficientData(
            "no regressor row at the target period; the panel ends at the origin".into(),
        ));
    }

    // Window column for panel time s: s - origin + w - 1.
    let col = |s: usize| s + w - 1 - origin;

    let params = &state.arma.params;
    let mut y_point = state.arma.mu[unit];
    for (j, &b) in params.beta.iter().enumerate() {
        y_point += b * panel.x[[unit, target, j]];
    }
    for (p, &phi) in params.phi.iter().enumerate() {
        let lag = target - 1 - p;
        y_point += phi * panel.y[[unit, lag]];
    }
    for (q, &psi) in params.psi.iter().enumerate() {
        let lag = target - 1 - q;
        if lag + w > origin {
            y_point += psi * state.arma.residuals[[unit, col(lag)]];
        }
    }

    let mut h_forecast = state.varpi[unit];
    for (l, &tau) in state.garch_params.tau.iter().enumerate() {
        let lag = target - 1 - l;
        if lag + w > origin {
            let u = state.arma.residuals[[unit, col(lag)]];
            h_forecast += tau * u * u;
        } else {
            h_forecast += tau * state.omega[unit];
        }
    }
    for (k, &nu) in state.garch_params.nu.iter().enumerate() {
        let lag = target - 1 - k;
        if lag + w > origin {
            h_forecast += nu * state.h[[unit, col(lag)]];
        } else {
            h_forecast += nu * state.omega[unit];
        }
    }
    if !y_point.is_finite() || !h_forecast.is_finite() || h_forecast < 0.0 {
        return Err(Error::NonFinite(format!(
            "forecast ({y_point}, {h_forecast}) for unit {unit} at origin {origin}"
        )));
    }
    Ok((y_point, h_forecast))
}

/// Interval from filtered historical simulation: standardized residuals are
/// pooled across the whole window panel, resampled `draws` times, and
/// rescaled by the forecast volatility.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FhsInterval {
    pub lower: f64,
    pub upper: f64,
    pub degenerate: bool,
}

/// Minimum pooled residuals for a meaningful empirical quantile.
pub const FHS_MIN_POOL: usize = 50;

#[allow(clippy::too_many_arguments)]
pub fn fhs_interval(
    arma_fit: &ArmaEstimate,
    garch_fit: &GarchEstimate,
    panel: &PanelData,
    unit: usize,
    origin: usize,
    alpha: f64,
    draws: usize,
    seed: u64,
) -> Result<FhsInterval> {
    let state = WindowState::from_fits(arma_fit.clone(), garch_fit.clone());
    let (y_point, h_forecast) = point_forecast_state(&state, panel, unit, origin)?;
    let pool = standardized_pool(&state)?;
    fhs_from_pool(&pool, y_point, h_forecast, alpha, draws, seed)
}

fn standardized_pool(state: &WindowState) -> Result<Vec<f64>> {
    let mut pool = Vec::with_capacity(state.arma.residuals.len());
    for (u, h) in state.arma.residuals.iter().zip(state.h.iter()) {
        if *h > 0.0 {
            pool.push(u / h.sqrt());
        } else if *u == 0.0 {
            // Constant-variance degenerate window: zero residual, zero scale.
            pool.push(0.0);
        }
    }
    if pool.len() < FHS_MIN_POOL {
        return Err(Error::InsufficientData(format!(
            "standardized residual pool has {} values, need {FHS_MIN_POOL}",
            pool.len()
        )));
    }
    Ok(pool)
}

fn fhs_from_pool(
    pool: &[f64],
    y_point: f64,
    h_forecast: f64,
    alpha: f64,
    draws: usize,
    seed: u64,
) -> Result<FhsInterval> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParams(format!(
            "violation rate alpha must lie in (0, 1), got {alpha}"
        )));
    }
    if draws < 100 {
        return Err(Error::InvalidParams(format!(
            "interval needs at least 100 draws, got {draws}"
        )));
    }
    let spread = pool.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
        (lo.min(v), hi.max(v))
    });
    let scale = h_forecast.sqrt();
    if spread.1 - spread.0 < 1e-12 || scale == 0.0 {
        return Ok(FhsInterval {
            lower: y_point,
            upper: y_point,
            degenerate: true,
        });
    }
    let mut rng = substream(seed, &[2]);
    let mut sample = Vec::with_capacity(draws);
    for _ in 0..draws {
        let idx = rng.random_range(0..pool.len());
        sample.push(y_point + scale * pool[idx]);
    }
    sample.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let lower = stats::quantile(&sample, alpha / 2.0);
    let upper = stats::quantile(&sample, 1.0 - alpha / 2.0);
    Ok(FhsInterval {
        lower,
        upper,
        degenerate: false,
    })
}

/// Conditional coverage test: unconditional coverage plus first-order
/// Markov independence, statistic asymptotically chi-squared with 2 degrees
/// of freedom. Degenerate hit sequences stay finite through the 0 log 0 = 0
/// convention.
pub fn lr_cc(hits: &[bool], alpha: f64) -> Result<(f64, f64)> {
    let n = hits.len();
    if n < 20 {
        return Err(Error::InsufficientData(format!(
            "conditional coverage test needs >= 20 observations, got {n}"
        )));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParams(format!(
            "violation rate alpha must lie in (0, 1), got {alpha}"
        )));
    }
    fn xlog(x: f64, p: f64) -> f64 {
        if x == 0.0 {
            0.0
        } else {
            x * p.ln()
        }
    }
    let n1 = hits.iter().filter(|&&h| h).count() as f64;
    let n0 = n as f64 - n1;
    let p_hat = n1 / n as f64;
    let lr_uc = -2.0
        * (xlog(n0, 1.0 - alpha) + xlog(n1, alpha) - xlog(n0, 1.0 - p_hat) - xlog(n1, p_hat));

    let (mut n00, mut n01, mut n10, mut n11) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for pair in hits.windows(2) {
        match (pair[0], pair[1]) {
            (false, false) => n00 += 1.0,
            (false, true) => n01 += 1.0,
            (true, false) => n10 += 1.0,
            (true, true) => n11 += 1.0,
        }
    }
    let trans = n00 + n01 + n10 + n11;
    let p01 = if n00 + n01 > 0.0 { n01 / (n00 + n01) } else { 0.0 };
    let p11 = if n10 + n11 > 0.0 { n11 / (n10 + n11) } else { 0.0 };
    let p_pool = (n01 + n11) / trans;
    let l0 = xlog(n00 + n10, 1.0 - p_pool) + xlog(n01 + n11, p_pool);
    let l1 = xlog(n00, 1.0 - p01) + xlog(n01, p01) + xlog(n10, 1.0 - p11) + xlog(n11, p11);
    let lr_ind = -2.0 * (l0 - l1);

    let stat = (lr_uc + lr_ind).max(0.0);
    Ok((stat, stats::chi_squared_sf(stat, 2.0)))
}

/// Fits one window and packages the state the chosen method forecasts from.
fn fit_window(
    window: &PanelData,
    orders: &ModelOrders,
    method: ForecastMethod,
    opts: &ForecastOptions,
    origin: usize,
) -> Result<WindowState> {
    let fit = fit_arma(window, orders, &opts.fit)?;
    match method {
        ForecastMethod::Panel | ForecastMethod::Univariate => {
            let garch = constant_or_fit_garch(&fit, orders, opts)?;
            Ok(WindowState::from_fits(fit, garch))
        }
        ForecastMethod::PanelAnalytic | ForecastMethod::PanelJackknife => {
            // Shared base seed so the mean correction here and the one the
            // volatility jackknife derives internally are the same draw.
            let base = derive_key(opts.seed, &[3, origin as u64]);
            let source = match method {
                ForecastMethod::PanelAnalytic => ResidualSource::Analytic {
                    bootstrap_reps: opts.bootstrap_reps,
                    seed: base,
                },
                _ => ResidualSource::Jackknife,
            };
            let lambda = match method {
                ForecastMethod::PanelAnalytic => analytic_correct_arma(
                    window,
                    &fit,
                    opts.bootstrap_reps,
                    derive_key(base, &[0]),
                )?,
                _ => jackknife_arma(window, &fit, &opts.fit)?,
            };
            let arma = ArmaEstimate {
                orders: *orders,
                params: lambda.params.clone(),
                mu: lambda.mu.clone(),
                residuals: lambda.residuals.clone(),
                objective: f64::NAN,
                converged: fit.converged,
                evaluations: fit.evaluations,
                covariance: None,
            };
            if orders.garch_dim() == 0 {
                let garch = constant_or_fit_garch(&arma, orders, opts)?;
                return Ok(WindowState::from_fits(arma, garch));
            }
            let corr = jackknife_garch(window, &fit, source, opts.init, &opts.fit)?;
            // Corrected coefficients can leave the admissible set; the
            // forecast recursion runs on their projection so predicted
            // variances stay positive. Estimates themselves are never
            // projected.
            let zeta = corr.zeta.project_admissible();
            let h = garch_filter(&arma.residuals, &zeta, &corr.omega, opts.init)?;
            let spread = 1.0 - zeta.persistence();
            let varpi = corr.omega.iter().map(|w| w * spread).collect();
            Ok(WindowState {
                arma,
                garch_params: zeta,
                varpi,
                omega: corr.omega.clone(),
                h,
            })
        }
    }
}

/// Volatility state for a window: the fitted model when volatility orders
/// are present, otherwise a constant-variance surrogate that tolerates
/// exactly-zero residuals (perfect in-sample fits).
fn constant_or_fit_garch(
    fit: &ArmaEstimate,
    orders: &ModelOrders,
    opts: &ForecastOptions,
) -> Result<GarchEstimate> {
    if orders.garch_dim() > 0 {
        return fit_garch(&fit.residuals, orders, opts.init, &opts.fit);
    }
    let (n, w) = fit.residuals.dim();
    let mut omega = Vec::with_capacity(n);
    for i in 0..n {
        let ssq: f64 = fit.residuals.row(i).iter().map(|u| u * u).sum();
        omega.push(ssq / w as f64);
    }
    let mut h = Array2::zeros((n, w));
    for (i, &wv) in omega.iter().enumerate() {
        h.row_mut(i).fill(wv);
    }
    Ok(GarchEstimate {
        orders: *orders,
        params: GarchParams::new(Vec::new(), Vec::new()),
        omega,
        h,
        loglik: f64::NAN,
        init: opts.init,
        converged: true,
        evaluations: 0,
        at_boundary: false,
        covariance: None,
    })
}

/// Rolling out-of-sample evaluation. For each origin from `window - 1` to
/// `T - 2` the trailing `window` periods are fit by `method` and the next
/// period forecast; origins whose fit fails are skipped and logged, and
/// more than 20% skips aborts. Origins run in parallel with deterministic
/// collation, and every interval's resampling seed depends only on (seed,
/// origin, unit), never on scheduling.
pub fn rolling_backtest(
    panel: &PanelData,
    orders: &ModelOrders,
    window: usize,
    method: ForecastMethod,
    opts: &ForecastOptions,
) -> Result<BacktestSummary> {
    let t_len = panel.n_periods();
    let n = panel.n_units();
    if t_len < window + 2 {
        return Err(Error::InsufficientData(format!(
            "need T >= window + 2 = {}, got {t_len}",
            window + 2
        )));
    }
    if window < orders.min_periods() {
        return Err(Error::InsufficientData(format!(
            "window {window} shorter than the model needs ({})",
            orders.min_periods()
        )));
    }

    let targets: Vec<usize> = (window..t_len).collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.workers)
        .build()
        .map_err(|e| Error::FitFailure {
            stage: "worker pool",
            detail: e.to_string(),
        })?;

    let per_origin: Vec<(usize, Result<Vec<ForecastRecord>>)> = pool.install(|| {
        targets
            .par_iter()
            .map(|&target| {
                let origin = target - 1;
                (origin, forecast_origin(panel, orders, window, method, opts, target))
            })
            .collect()
    });

    let mut records = Vec::new();
    let mut skipped = Vec::new();
    for (origin, outcome) in per_origin {
        match outcome {
            Ok(mut recs) => records.append(&mut recs),
            Err(e) => skipped.push((origin, e.to_string())),
        }
    }
    if skipped.len() * 5 > targets.len() {
        return Err(Error::FitFailure {
            stage: "rolling backtest",
            detail: format!(
                "{} of {} origins failed; first: {}",
                skipped.len(),
                targets.len(),
                skipped[0].1
            ),
        });
    }

    let mut units = Vec::with_capacity(n);
    for i in 0..n {
        let unit_records: Vec<&ForecastRecord> =
            records.iter().filter(|r| r.unit == i).collect();
        let m = unit_records.len();
        let rmse = if m == 0 {
            f64::NAN
        } else {
            (unit_records
                .iter()
                .map(|r| (r.y_actual - r.y_point).powi(2))
                .sum::<f64>()
                / m as f64)
                .sqrt()
        };
        let hits: Vec<bool> = unit_records
            .iter()
            .map(|r| r.y_actual < r.lower || r.y_actual > r.upper)
            .collect();
        let hit_rate = if m == 0 {
            f64::NAN
        } else {
            hits.iter().filter(|&&h| h).count() as f64 / m as f64
        };
        let lr = lr_cc(&hits, opts.alpha).ok();
        units.push(UnitBacktest {
            unit_id: panel.unit_ids[i].clone(),
            rmse,
            hits,
            hit_rate,
            lr_cc: lr,
        });
    }
    Ok(BacktestSummary {
        method,
        window,
        records,
        units,
        skipped,
    })
}

/// Forecasts every unit at one target period: fit the trailing window, then
/// point and interval forecasts per unit.
fn forecast_origin(
    panel: &PanelData,
    orders: &ModelOrders,
    window: usize,
    method: ForecastMethod,
    opts: &ForecastOptions,
    target: usize,
) -> Result<Vec<ForecastRecord>> {
    let origin = target - 1;
    let start = target - window;
    let slice = panel.time_slice(start, target)?;
    let n = panel.n_units();

    let states: Vec<(usize, WindowState)> = if method == ForecastMethod::Univariate {
        let mut states = Vec::with_capacity(n);
        for i in 0..n {
            let unit_window = slice.unit_slice(i)?;
            let state = fit_window(&unit_window, orders, method, opts, origin)
                .map_err(|e| Error::FitFailure {
                    stage: "univariate window",
                    detail: format!("unit {}: {e}", panel.unit_ids[i]),
                })?;
            states.push((i, state));
        }
        states
    } else {
        let state = fit_window(&slice, orders, method, opts, origin)?;
        vec![(usize::MAX, state)]
    };

    let mut records = Vec::with_capacity(n);
    for unit in 0..n {
        let (state, state_unit) = match method {
            ForecastMethod::Univariate => {
                let (_, state) = &states[unit];
                (state, 0usize)
            }
            _ => (&states[0].1, unit),
        };
        // Unit slices keep full-panel time indexing, so forecasts can read
        // lags from the matching per-unit view of the panel.
        let view;
        let forecast_panel: &PanelData = if method == ForecastMethod::Univariate {
            view = panel.unit_slice(unit)?;
            &view
        } else {
            panel
        };
        let (y_point, h_forecast) =
            point_forecast_state(state, forecast_panel, state_unit, origin)?;
        let pool_vals = standardized_pool(state)?;
        let interval = fhs_from_pool(
            &pool_vals,
            y_point,
            h_forecast,
            opts.alpha,
            opts.fhs_draws,
            derive_key(opts.seed, &[origin as u64, unit as u64]),
        )?;
        records.push(ForecastRecord {
            unit,
            origin,
            y_actual: panel.y[[unit, target]],
            y_point,
            lower: interval.lower,
            upper: interval.upper,
            h_forecast,
            degenerate: interval.degenerate,
        });
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::ArmaParams;
    use approx::assert_abs_diff_eq;
    use ndarray::Array3;

    fn state_for(
        orders: ModelOrders,
        params: ArmaParams,
        mu: f64,
        residuals: Vec<f64>,
        garch: GarchParams,
        omega: f64,
        h: Vec<f64>,
    ) -> (ArmaEstimate, GarchEstimate) {
        let w = residuals.len();
        let arma = ArmaEstimate {
            orders,
            params,
            mu: vec![mu],
            residuals: Array2::from_shape_vec((1, w), residuals).unwrap(),
            objective: 0.0,
            converged: true,
            evaluations: 0,
            covariance: None,
        };
        let garch_est = GarchEstimate {
            orders,
            params: garch,
            omega: vec![omega],
            h: Array2::from_shape_vec((1, w), h).unwrap(),
            loglik: 0.0,
            init: VolatilityInit::UnconditionalVariance,
            converged: true,
            evaluations: 0,
            at_boundary: false,
            covariance: None,
        };
        (arma, garch_est)
    }

    fn panel_from_y(y: Vec<f64>) -> PanelData {
        let t = y.len();
        PanelData::from_arrays(
            Array2::from_shape_vec((1, t), y).unwrap(),
            Array3::zeros((1, t, 0)),
        )
        .unwrap()
    }

    #[test]
    fn hand_point_forecast() {
        // mu = 0, phi = 0.5, psi = 0.2, y_T = 2, u_T = 1 -> 1.2.
        let orders = ModelOrders::new(1, 1, 0, 0, 0).unwrap();
        let params = ArmaParams::new(vec![], vec![0.5], vec![0.2]);
        let y = vec![0.0, 0.5, -0.3, 1.1, 2.0];
        let (arma, garch) = state_for(
            orders,
            params,
            0.0,
            vec![0.1, -0.2, 0.4, 1.0],
            GarchParams::new(vec![], vec![]),
            0.9,
            vec![0.9; 4],
        );
        let panel = panel_from_y(y);
        let (y_point, h) = point_forecast(&arma, &garch, &panel, 0, 4).unwrap();
        assert_abs_diff_eq!(y_point, 1.2, epsilon = 1e-12);
        // No ARCH terms: forecast variance is the intercept = omega.
        assert_abs_diff_eq!(h, 0.9, epsilon = 1e-12);
    }

    #[test]
    fn constant_mean_model_forecasts_the_effect() {
        let orders = ModelOrders::new(0, 0, 1, 1, 0).unwrap();
        let params = ArmaParams::new(vec![], vec![], vec![]);
        let (arma, garch) = state_for(
            orders,
            params,
            1.7,
            vec![0.3, -0.3, 0.2, -0.2],
            GarchParams::new(vec![0.1], vec![0.2]),
            1.0,
            vec![1.0, 0.9, 1.1, 1.0],
        );
        let panel = panel_from_y(vec![2.0, 1.4, 1.9, 1.5, 1.6]);
        let (y_point, h) = point_forecast(&arma, &garch, &panel, 0, 4).unwrap();
        assert_abs_diff_eq!(y_point, 1.7, epsilon = 1e-12);
        // varpi + tau u_T^2 + nu h_T = 0.7 + 0.1 * 0.04 + 0.2 * 1.0.
        assert_abs_diff_eq!(h, 0.7 + 0.004 + 0.2, epsilon = 1e-12);
    }

    #[test]
    fn lr_cc_is_small_under_matched_independent_hits() {
        // 5 isolated violations in 100, matching alpha = 0.05.
        let mut hits = vec![false; 100];
        for idx in [7usize, 26, 45, 71, 90] {
            hits[idx] = true;
        }
        let (stat, p) = lr_cc(&hits, 0.05).unwrap();
        assert!(stat < 1.0, "statistic {stat}");
        assert!(p > 0.5, "p-value {p}");
    }

    #[test]
    fn lr_cc_flags_clustered_violations() {
        let mut hits = vec![false; 100];
        for h in hits.iter_mut().take(60).skip(50) {
            *h = true;
        }
        let (stat, p) = lr_cc(&hits, 0.05).unwrap();
        assert!(stat > 20.0, "statistic {stat}");
        assert!(p < 0.01, "p-value {p}");
    }

    #[test]
    fn lr_cc_survives_all_clear_sequences() {
        let hits = vec![false; 50];
        let (stat, p) = lr_cc(&hits, 0.05).unwrap();
        assert!(stat.is_finite());
        assert!((0.0..=1.0).contains(&p));
    }

    #[test]
    fn fhs_matches_normal_quantiles_on_a_normal_pool() {
        let mut rng = substream(99, &[0]);
        let normal = rand_distr::Normal::new(0.0, 1.0).unwrap();
        let pool: Vec<f64> = (0..20_000)
            .map(|_| rand_distr::Distribution::sample(&normal, &mut rng))
            .collect();
        let iv = fhs_from_pool(&pool, 1.0, 4.0, 0.05, 100_000, 5).unwrap();
        assert!(!iv.degenerate);
        // y_point +/- 1.96 * 2 within 2%.
        assert_abs_diff_eq!(iv.lower, 1.0 - 3.92, epsilon = 0.08);
        assert_abs_diff_eq!(iv.upper, 1.0 + 3.92, epsilon = 0.08);
    }

    #[test]
    fn degenerate_pool_collapses_and_flags() {
        let pool = vec![0.0; 200];
        let iv = fhs_from_pool(&pool, 2.5, 1.0, 0.05, 1000, 1).unwrap();
        assert!(iv.degenerate);
        assert_eq!((iv.lower, iv.upper), (2.5, 2.5));
    }

    #[test]
    fn intervals_widen_as_alpha_shrinks() {
        let mut rng = substream(3, &[0]);
        let normal = rand_distr::Normal::new(0.0, 1.0).unwrap();
        let pool: Vec<f64> = (0..5_000)
            .map(|_| rand_distr::Distribution::sample(&normal, &mut rng))
            .collect();
        let wide = fhs_from_pool(&pool, 0.0, 1.0, 0.01, 20_000, 9).unwrap();
        let narrow = fhs_from_pool(&pool, 0.0, 1.0, 0.20, 20_000, 9).unwrap();
        assert!(wide.lower < narrow.lower && narrow.upper < wide.upper);
    }
}
