//! First-step estimation of the mean model: least squares on the feasible
//! residual recursion with unit fixed effects concentrated out.
//!
//! For a candidate lambda = (beta, phi, psi), write v_i for the AR-filtered
//! series of unit i and B_psi for the unit-lower-triangular banded Toeplitz
//! matrix of the MA polynomial. The residual vector is affine in the fixed
//! effect,
//!
//!   u_i(mu) = r_i - mu s,   r_i = B_psi^{-1} v_i,   s = B_psi^{-1} l,
//!
//! so mu_i has the closed form <s, r_i> / <s, s> restricted to whatever
//! period window the criterion sums over. Full-sample fits use the whole
//! range; split-sample refits keep the recursions running from the first
//! period and restrict only the sums, so a window that starts mid-panel
//! conditions on the observed data before it. A dense-matrix version of the
//! same quadratic form exists only in the test oracles.

use crate::error::{Error, Result};
use crate::filter::{ar_filter_unit, ma_recursion_unit, residual_filter, PreSample};
use crate::optim::{NelderMead, OptimResult};
use crate::panel::{ModelOrders, PanelData};
use crate::params::{validate_arma, ArmaParams};
use ndarray::Array2;

/// Concentration weights for a given MA polynomial and panel length:
/// `weights` is S^{-1} l and `denom` is l' S^{-1} l.
#[derive(Debug, Clone)]
pub struct ConcentrationKernel {
    pub weights: Vec<f64>,
    pub denom: f64,
}

impl ConcentrationKernel {
    pub fn new(psi: &[f64], t_len: usize) -> Self {
        // Forward solve B z = l, backward solve B' w = z.
        let z = effect_loading(psi, t_len);
        let mut w = vec![0.0; t_len];
        for t in (0..t_len).rev() {
            let mut val = z[t];
            for (lag, p) in psi.iter().enumerate() {
                let off = lag + 1;
                if t + off < t_len {
                    val -= p * w[t + off];
                }
            }
            w[t] = val;
        }
        let denom = w.iter().sum();
        Self { weights: w, denom }
    }

    /// Concentrated fixed effect for one AR-filtered series.
    pub fn mu_for(&self, v: &[f64]) -> f64 {
        let num: f64 = self.weights.iter().zip(v).map(|(w, v)| w * v).sum();
        num / self.denom
    }
}

fn check_lambda_shape(panel: &PanelData, params: &ArmaParams) -> Result<()> {
    if params.beta.len() != panel.n_regressors() {
        return Err(Error::DimensionMismatch {
            context: "arma objective (beta)",
            expected: panel.n_regressors().to_string(),
            got: params.beta.len().to_string(),
        });
    }
    Ok(())
}

/// Cold MA filter of the constant regressor: s = B_psi^{-1} l. Pre-sample
/// residuals are fixed values, so the derivative of the residual in mu is
/// -s under the warm convention as well.
fn effect_loading(psi: &[f64], t_len: usize) -> Vec<f64> {
    let mut s = vec![0.0; t_len];
    for t in 0..t_len {
        let mut val = 1.0;
        for (lag, p) in psi.iter().enumerate() {
            let off = lag + 1;
            if t >= off {
                val -= p * s[t - off];
            }
        }
        s[t] = val;
    }
    s
}

/// Least-squares fixed effect and criterion value over `window` for one
/// unit's mu = 0 residuals.
fn mu_ssq_window(s: &[f64], r: &[f64], window: (usize, usize)) -> (f64, f64) {
    let (a, b) = window;
    let mut num = 0.0;
    let mut den = 0.0;
    for t in a..b {
        num += s[t] * r[t];
        den += s[t] * s[t];
    }
    let mu = num / den;
    let mut ssq = 0.0;
    for t in a..b {
        let e = r[t] - mu * s[t];
        ssq += e * e;
    }
    (mu, ssq)
}

fn concentrate_mu_impl(
    panel: &PanelData,
    params: &ArmaParams,
    presample: Option<&PreSample>,
    window: (usize, usize),
) -> Result<Vec<f64>> {
    check_lambda_shape(panel, params)?;
    let t_len = panel.n_periods();
    let s = effect_loading(&params.psi, t_len);
    let mut buf = vec![0.0; t_len];
    let mut mu = Vec::with_capacity(panel.n_units());
    for i in 0..panel.n_units() {
        ar_filter_unit(panel, params, presample, i, &mut buf);
        if let Some(pre) = presample {
            boundary_adjust(&params.psi, pre, i, &mut buf);
        }
        ma_recursion_unit(&params.psi, 0.0, None, &mut buf);
        mu.push(mu_ssq_window(&s, &buf, window).0);
    }
    Ok(mu)
}

/// Concentrated fixed effects mu_i(lambda) for every unit.
pub fn concentrate_mu(
    panel: &PanelData,
    params: &ArmaParams,
    presample: Option<&PreSample>,
) -> Result<Vec<f64>> {
    concentrate_mu_impl(panel, params, presample, (0, panel.n_periods()))
}

/// Concentrated effects when the criterion sums over `window` only. The
/// recursions still run from the first period.
pub(crate) fn concentrate_mu_window(
    panel: &PanelData,
    params: &ArmaParams,
    window: (usize, usize),
) -> Result<Vec<f64>> {
    concentrate_mu_impl(panel, params, None, window)
}

/// Folds known pre-sample errors into the first Q entries of v so the cold
/// MA recursion on the adjusted series equals the warm-started one.
fn boundary_adjust(psi: &[f64], pre: &PreSample, unit: usize, v: &mut [f64]) {
    let q = psi.len();
    for t in 0..q.min(v.len()) {
        for (lag, p) in psi.iter().enumerate() {
            let off = lag + 1;
            if off > t {
                v[t] -= p * pre.u[[unit, q - (off - t)]];
            }
        }
    }
}

/// Sum of squared concentrated residuals over `window`; optionally fills
/// per-unit values.
fn objective_impl(
    panel: &PanelData,
    params: &ArmaParams,
    presample: Option<&PreSample>,
    window: (usize, usize),
    mut per_unit: Option<&mut [f64]>,
) -> Result<f64> {
    check_lambda_shape(panel, params)?;
    let t_len = panel.n_periods();
    let s = effect_loading(&params.psi, t_len);
    let mut buf = vec![0.0; t_len];
    let mut total = 0.0;
    for i in 0..panel.n_units() {
        ar_filter_unit(panel, params, presample, i, &mut buf);
        if let Some(pre) = presample {
            boundary_adjust(&params.psi, pre, i, &mut buf);
        }
        ma_recursion_unit(&params.psi, 0.0, None, &mut buf);
        let (_, ssq) = mu_ssq_window(&s, &buf, window);
        if let Some(out) = per_unit.as_deref_mut() {
            out[i] = ssq;
        }
        total += ssq;
    }
    Ok(total)
}

/// Concentrated least-squares objective at lambda.
pub fn concentrated_objective(
    panel: &PanelData,
    params: &ArmaParams,
    presample: Option<&PreSample>,
) -> Result<f64> {
    objective_impl(panel, params, presample, (0, panel.n_periods()), None)
}

/// Per-unit contributions to the concentrated objective (cluster scores
/// differentiate these).
pub fn objective_by_unit(
    panel: &PanelData,
    params: &ArmaParams,
    presample: Option<&PreSample>,
) -> Result<Vec<f64>> {
    let mut out = vec![0.0; panel.n_units()];
    objective_impl(panel, params, presample, (0, panel.n_periods()), Some(&mut out))?;
    Ok(out)
}

fn objective_flat_window(
    panel: &PanelData,
    orders: &ModelOrders,
    window: (usize, usize),
    flat: &[f64],
) -> f64 {
    let params = match ArmaParams::from_flat(orders, flat) {
        Ok(p) => p,
        Err(_) => return f64::INFINITY,
    };
    if !validate_arma(&params).is_valid() {
        return f64::INFINITY;
    }
    match objective_impl(panel, &params, None, window, None) {
        Ok(v) if v.is_finite() => v,
        _ => f64::INFINITY,
    }
}

/// Objective as a function of the flat parameter vector, +inf outside the
/// stationarity/invertibility region. This is the callable handed to the
/// optimizer and to all finite-difference plug-ins.
pub fn objective_flat(panel: &PanelData, orders: &ModelOrders, flat: &[f64]) -> f64 {
    objective_flat_window(panel, orders, (0, panel.n_periods()), flat)
}

/// Result of the first-step fit.
#[derive(Debug, Clone)]
pub struct ArmaEstimate {
    pub orders: ModelOrders,
    pub params: ArmaParams,
    pub mu: Vec<f64>,
    pub residuals: Array2<f64>,
    pub objective: f64,
    pub converged: bool,
    pub evaluations: usize,
    /// Sandwich covariance of lambda-hat; filled unless disabled in options.
    pub covariance: Option<crate::inference::SandwichCovariance>,
}

impl ArmaEstimate {
    pub fn lambda_flat(&self) -> Vec<f64> {
        self.params.to_flat()
    }

    pub fn std_errors(&self) -> Option<&[f64]> {
        self.covariance.as_ref().map(|c| c.std_errors.as_slice())
    }
}

/// Options for `fit_arma` and `fit_garch`.
#[derive(Debug, Clone, Copy)]
pub struct FitOptions {
    pub optimizer: NelderMead,
    pub compute_covariance: bool,
    /// Perturbed MA starting points in addition to the pooled-OLS start.
    pub multi_start: bool,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            optimizer: NelderMead::default(),
            compute_covariance: true,
            multi_start: true,
        }
    }
}

/// Pooled within-OLS of y on (x, lagged y) over `window`: the exact
/// first-step estimator when Q = 0 and the starting point otherwise. Lags
/// reach back past the window start; only lags before the first period are
/// zero. Returns (beta, phi).
fn within_ols(
    panel: &PanelData,
    orders: &ModelOrders,
    window: (usize, usize),
) -> Result<Vec<f64>> {
    let n = panel.n_units();
    let (w0, w1) = window;
    let w_len = (w1 - w0) as f64;
    let d = orders.d_x + orders.p;
    if d == 0 {
        return Ok(Vec::new());
    }
    let mut xtx = nalgebra::DMatrix::<f64>::zeros(d, d);
    let mut xty = nalgebra::DVector::<f64>::zeros(d);
    let mut cols = vec![0.0; d];
    let mut col_means = vec![0.0; d];
    for i in 0..n {
        // Column means for within-demeaning, zero pre-sample lags included.
        col_means.iter_mut().for_each(|m| *m = 0.0);
        let mut y_mean = 0.0;
        for t in w0..w1 {
            for dx in 0..orders.d_x {
                col_means[dx] += panel.x[[i, t, dx]];
            }
            for lag in 1..=orders.p {
                if t >= lag {
                    col_means[orders.d_x + lag - 1] += panel.y[[i, t - lag]];
                }
            }
            y_mean += panel.y[[i, t]];
        }
        col_means.iter_mut().for_each(|m| *m /= w_len);
        y_mean /= w_len;
        for t in w0..w1 {
            for dx in 0..orders.d_x {
                cols[dx] = panel.x[[i, t, dx]] - col_means[dx];
            }
            for lag in 1..=orders.p {
                let ylag = if t >= lag { panel.y[[i, t - lag]] } else { 0.0 };
                cols[orders.d_x + lag - 1] = ylag - col_means[orders.d_x + lag - 1];
            }
            let yd = panel.y[[i, t]] - y_mean;
            for a in 0..d {
                for b in a..d {
                    xtx[(a, b)] += cols[a] * cols[b];
                }
                xty[a] += cols[a] * yd;
            }
        }
    }
    for a in 0..d {
        for b in 0..a {
            xtx[(a, b)] = xtx[(b, a)];
        }
    }
    xtx.clone()
        .cholesky()
        .map(|ch| ch.solve(&xty).iter().cloned().collect())
        .or_else(|| xtx.lu().solve(&xty).map(|s| s.iter().cloned().collect()))
        .ok_or(Error::SingularMatrix {
            what: "within-regression normal equations",
            cond: f64::INFINITY,
        })
}

/// Pulls a starting point inside the valid region, shrinking the dynamic
/// coefficients toward zero and breaking accidental root cancellation.
fn make_feasible(orders: &ModelOrders, mut flat: Vec<f64>) -> Option<Vec<f64>> {
    for attempt in 0..100 {
        let params = ArmaParams::from_flat(orders, &flat).ok()?;
        let validity = validate_arma(&params);
        if validity.is_valid() {
            return Some(flat);
        }
        let only_common = validity.violations.iter().all(|v| {
            matches!(v, crate::params::RootViolation::CommonRoot { .. })
        });
        if only_common && orders.q > 0 {
            flat[orders.d_x + orders.p] += 0.017 * (1.0 + attempt as f64 * 0.1);
        } else {
            for j in orders.d_x..flat.len() {
                flat[j] *= 0.9;
            }
        }
    }
    None
}

fn run_starts(
    panel: &PanelData,
    orders: &ModelOrders,
    opts: &FitOptions,
    window: (usize, usize),
    starts: &[Vec<f64>],
) -> Option<(OptimResult, usize)> {
    let mut best: Option<OptimResult> = None;
    let mut evals = 0usize;
    for start in starts {
        let step: Vec<f64> = start.iter().map(|&v| 0.1f64.max(0.05 * v.abs())).collect();
        let res = opts
            .optimizer
            .minimize(|x| objective_flat_window(panel, orders, window, x), start, &step);
        evals += res.evaluations;
        best = Some(match best {
            None => res,
            Some(cur) => pick_better(cur, res),
        });
    }
    best.map(|b| (b, evals))
}

/// Smaller objective wins; near-ties go to the smaller parameter norm so the
/// reported minimizer is stable under start reordering.
fn pick_better(a: OptimResult, b: OptimResult) -> OptimResult {
    let scale = a.f.abs().max(b.f.abs()).max(1e-300);
    if (a.f - b.f).abs() <= 1e-12 * scale {
        let na: f64 = a.x.iter().map(|v| v * v).sum();
        let nb: f64 = b.x.iter().map(|v| v * v).sum();
        if nb < na {
            return b;
        }
        return a;
    }
    if b.f < a.f {
        b
    } else {
        a
    }
}

/// Fits the mean model by concentrated least squares.
///
/// With Q = 0 the objective is an exact within regression and is solved in
/// closed form; otherwise a multi-start simplex search runs over the valid
/// region. The returned estimate carries concentrated fixed effects,
/// residuals, and (by default) the cluster-robust sandwich covariance.
pub fn fit_arma(
    panel: &PanelData,
    orders: &ModelOrders,
    opts: &FitOptions,
) -> Result<ArmaEstimate> {
    let window = (0, panel.n_periods());
    fit_arma_impl(panel, orders, opts, None, window)
}

/// Fit whose criterion sums over `window` only, warm started from a
/// caller-supplied point so subsample refits descend into the full-sample
/// basin. Recursions run from the first period, so a window that starts
/// mid-panel conditions on the data before it. The reported residuals
/// cover the whole panel; mu, the objective, and the variance targets
/// downstream come from the window. No covariance is attached.
pub(crate) fn fit_arma_window(
    panel: &PanelData,
    orders: &ModelOrders,
    opts: &FitOptions,
    warm: Option<&[f64]>,
    window: (usize, usize),
) -> Result<ArmaEstimate> {
    fit_arma_impl(panel, orders, opts, warm, window)
}

fn fit_arma_impl(
    panel: &PanelData,
    orders: &ModelOrders,
    opts: &FitOptions,
    warm: Option<&[f64]>,
    window: (usize, usize),
) -> Result<ArmaEstimate> {
    panel.validate_for(orders)?;
    let (w0, w1) = window;
    if w0 >= w1 || w1 > panel.n_periods() {
        return Err(Error::InvalidParams(format!(
            "estimation window [{w0}, {w1}) out of range for T = {}",
            panel.n_periods()
        )));
    }
    if w1 - w0 < orders.min_periods() {
        return Err(Error::InsufficientData(format!(
            "window length {} but orders require at least {}",
            w1 - w0,
            orders.min_periods()
        )));
    }
    let dim = orders.arma_dim();

    let mut converged = true;
    let mut evaluations = 0usize;
    let mut lambda_flat: Vec<f64>;

    if dim == 0 {
        lambda_flat = Vec::new();
    } else if orders.q == 0 {
        // Quadratic objective: the within estimator is the exact minimizer.
        lambda_flat = within_ols(panel, orders, window)?;
        let params = ArmaParams::from_flat(orders, &lambda_flat)?;
        if !validate_arma(&params).is_valid() {
            // Closed form landed outside the stationary region; fall back to
            // the constrained search from a shrunken start.
            let start = make_feasible(orders, lambda_flat.clone()).ok_or(Error::FitFailure {
                stage: "fit_arma",
                detail: "no feasible starting point".into(),
            })?;
            let (res, ev) = run_starts(panel, orders, opts, window, &[start]).unwrap();
            evaluations = ev;
            converged = res.converged;
            lambda_flat = res.x;
        }
    } else {
        let mut starts = Vec::new();
        if let Some(w) = warm {
            if let Some(s) = make_feasible(orders, w.to_vec()) {
                starts.push(s);
            }
        }
        if starts.is_empty() {
            let mut ols = within_ols(panel, orders, window)?;
            ols.extend(std::iter::repeat_n(0.0, orders.q));
            if let Some(s) = make_feasible(orders, ols.clone()) {
                starts.push(s);
            }
            if opts.multi_start {
                for sign in [1.0, -1.0] {
                    let mut s = ols.clone();
                    for j in 0..orders.q {
                        s[orders.d_x + orders.p + j] = sign * 0.3;
                    }
                    if let Some(s) = make_feasible(orders, s) {
                        if !starts.contains(&s) {
                            starts.push(s);
                        }
                    }
                }
            }
        }
        if starts.is_empty() {
            return Err(Error::FitFailure {
                stage: "fit_arma",
                detail: "no feasible starting point".into(),
            });
        }
        let (mut res, ev) = run_starts(panel, orders, opts, window, &starts).unwrap();
        evaluations = ev;
        // One restart from the incumbent tightens the simplex around the
        // optimum; cheap insurance against premature contraction.
        let (polished, ev2) = run_starts(panel, orders, opts, window, &[res.x.clone()]).unwrap();
        evaluations += ev2;
        res = pick_better(res, polished);
        converged = res.converged;
        lambda_flat = res.x;
    }

    let params = ArmaParams::from_flat(orders, &lambda_flat)?;
    let mu = concentrate_mu_impl(panel, &params, None, window)?;
    let residuals = residual_filter(panel, &params, &mu, None)?;
    let objective: f64 = residuals
        .slice(ndarray::s![.., w0..w1])
        .iter()
        .map(|u| u * u)
        .sum();
    if !objective.is_finite() {
        return Err(Error::FitFailure {
            stage: "fit_arma",
            detail: "objective not finite at the reported minimizer".into(),
        });
    }

    let full_window = window == (0, panel.n_periods());
    let mut estimate = ArmaEstimate {
        orders: *orders,
        params,
        mu,
        residuals,
        objective,
        converged,
        evaluations,
        covariance: None,
    };
    if opts.compute_covariance && dim > 0 && full_window {
        estimate.covariance = Some(crate::inference::covariance_lambda(panel, &estimate)?);
    }
    Ok(estimate)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulate::{simulate, DgpParams, Innovation};
    use approx::assert_abs_diff_eq;
    use ndarray::{arr2, Array3};

    fn panel_from_y(y: Array2<f64>) -> PanelData {
        let (n, t) = y.dim();
        PanelData::from_arrays(y, Array3::zeros((n, t, 0))).unwrap()
    }

    #[test]
    fn kernel_reduces_to_uniform_weights_without_ma() {
        let kernel = ConcentrationKernel::new(&[], 5);
        assert_eq!(kernel.weights, vec![1.0; 5]);
        assert_abs_diff_eq!(kernel.denom, 5.0);
    }

    #[test]
    fn concentrated_mu_is_row_mean_without_ma() {
        let y = arr2(&[[1.0, 2.0, 3.0], [4.0, 4.0, 4.0]]);
        let panel = panel_from_y(y);
        let params = ArmaParams::new(vec![], vec![], vec![]);
        let mu = concentrate_mu(&panel, &params, None).unwrap();
        assert_abs_diff_eq!(mu[0], 2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(mu[1], 4.0, epsilon = 1e-14);
    }

    #[test]
    fn objective_reduces_to_within_ssq() {
        let y = arr2(&[[1.0, 2.0, 3.0], [-1.0, 0.0, 1.0]]);
        let panel = panel_from_y(y.clone());
        let params = ArmaParams::new(vec![], vec![], vec![]);
        let obj = concentrated_objective(&panel, &params, None).unwrap();
        assert_abs_diff_eq!(obj, 4.0, epsilon = 1e-14);
    }

    #[test]
    fn shift_equivariance_of_concentrated_effect() {
        // P = 1, Q = 0: adding c to y shifts mu by c (1 - phi) + c phi / T,
        // the last term coming from the zeroed pre-sample lag at t = 1.
        let y = arr2(&[[0.4, -0.2, 0.9, 0.3, -0.5, 0.1]]);
        let t_len = 6.0;
        let phi = 0.45;
        let params = ArmaParams::new(vec![], vec![phi], vec![]);
        let base = concentrate_mu(&panel_from_y(y.clone()), &params, None).unwrap()[0];
        let c = 2.5;
        let shifted = concentrate_mu(&panel_from_y(y.mapv(|v| v + c)), &params, None).unwrap()[0];
        assert_abs_diff_eq!(
            shifted - base,
            c * (1.0 - phi) + c * phi / t_len,
            epsilon = 1e-12
        );
    }

    #[test]
    fn objective_is_nonnegative_and_finite_on_valid_params() {
        let y = arr2(&[[0.3, 1.0, -0.4, 0.8], [0.0, 0.2, 0.4, -0.1]]);
        let panel = panel_from_y(y);
        for (phi, psi) in [(0.0, 0.0), (0.5, 0.3), (-0.4, -0.2), (0.9, 0.7)] {
            let params = ArmaParams::new(vec![], vec![phi], vec![psi]);
            let obj = concentrated_objective(&panel, &params, None).unwrap();
            assert!(obj >= 0.0 && obj.is_finite());
        }
    }

    #[test]
    fn invalid_lambda_maps_to_infinity() {
        let y = arr2(&[[0.3, 1.0, -0.4, 0.8]]);
        let panel = panel_from_y(y);
        let orders = ModelOrders::new(1, 0, 0, 0, 0).unwrap();
        assert!(objective_flat(&panel, &orders, &[1.0]).is_infinite());
        assert!(objective_flat(&panel, &orders, &[0.5]).is_finite());
    }

    #[test]
    fn recovers_parameters_on_clean_panel() {
        let orders = ModelOrders::new(1, 1, 1, 1, 1).unwrap();
        let n = 30;
        let dgp = DgpParams {
            mu: (0..n).map(|i| (i as f64 - 15.0) / 10.0).collect(),
            arma: ArmaParams::new(vec![3.0], vec![0.3], vec![0.3]),
            omega: vec![1.5; n],
            garch: GarchParamsFixture::benchmark(),
        };
        let sim = simulate(&orders, &dgp, Innovation::Normal, 200, 500, 11).unwrap();
        let fit = fit_arma(
            &sim.panel,
            &orders,
            &FitOptions {
                compute_covariance: false,
                ..FitOptions::default()
            },
        )
        .unwrap();
        assert!(fit.converged);
        assert!((fit.params.beta[0] - 3.0).abs() < 0.05, "{:?}", fit.params);
        assert!((fit.params.phi[0] - 0.3).abs() < 0.05, "{:?}", fit.params);
        assert!((fit.params.psi[0] - 0.3).abs() < 0.08, "{:?}", fit.params);

        // In-sample optimality relative to the truth.
        let truth = concentrated_objective(&sim.panel, &dgp.arma, None).unwrap();
        assert!(fit.objective <= truth * (1.0 + 1e-9));
    }

    #[test]
    fn unit_permutation_leaves_estimate_unchanged() {
        let orders = ModelOrders::new(1, 1, 0, 0, 0).unwrap();
        let n = 12;
        let dgp = DgpParams {
            mu: (0..n).map(|i| 0.3 * i as f64).collect(),
            arma: ArmaParams::new(vec![], vec![0.4], vec![0.2]),
            omega: vec![1.0; n],
            garch: crate::params::GarchParams::new(vec![], vec![]),
        };
        let sim = simulate(&orders, &dgp, Innovation::Normal, 120, 200, 21).unwrap();
        let opts = FitOptions {
            compute_covariance: false,
            ..FitOptions::default()
        };
        let fit = fit_arma(&sim.panel, &orders, &opts).unwrap();

        let perm: Vec<usize> = (0..n).rev().collect();
        let y2 = Array2::from_shape_fn((n, 120), |(i, t)| sim.panel.y[[perm[i], t]]);
        let panel2 = panel_from_y(y2);
        let fit2 = fit_arma(&panel2, &orders, &opts).unwrap();
        for (a, b) in fit.lambda_flat().iter().zip(fit2.lambda_flat()) {
            assert_abs_diff_eq!(a, &b, epsilon = 1e-6);
        }
        for i in 0..n {
            assert_abs_diff_eq!(fit.mu[perm[i]], fit2.mu[i], epsilon = 1e-6);
        }
    }

    struct GarchParamsFixture;
    impl GarchParamsFixture {
        fn benchmark() -> crate::params::GarchParams {
            crate::params::GarchParams::new(vec![0.2], vec![0.4])
        }
    }
}
