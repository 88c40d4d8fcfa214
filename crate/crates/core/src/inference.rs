//! Sandwich covariances, bias corrections and per-unit interval inference
//! for the two-step estimator.
//!
//! Every curvature and score input is a numerical derivative of one of the
//! two criterion functions, so the routines hold for any orders without
//! model-specific derivative code. Scores cluster by unit; serial dependence
//! lives inside each cluster. The second-step covariance stacks the two
//! criteria and propagates first-step noise through the cross block of the
//! joint curvature, which is the numerical analogue of the asymptotic
//! expansion for the profiled volatility estimator.

use crate::arma::{self, ArmaEstimate, ConcentrationKernel, FitOptions};
use crate::error::{Error, Result};
use crate::filter::{residual_filter, VolatilityInit};
use crate::garch::{self, GarchEstimate};
use crate::numdiff;
use crate::panel::{ModelOrders, PanelData};
use crate::params::{validate_arma, ArmaParams, GarchParams};
use crate::seeding::derive_key;
use crate::simulate::{simulate_with_x_law, DgpParams, Innovation};
use crate::stats;
use nalgebra::DMatrix;

/// Condition-number ceiling past which a curvature matrix is reported as
/// singular instead of being inverted.
pub const SINGULAR_CONDITION_LIMIT: f64 = 1e10;

/// Burn-in for bootstrap panels in the analytic correction, long enough that
/// the kept sample is a stationary draw to machine precision.
const BOOTSTRAP_BURN_IN: usize = 300;

/// Cluster-robust sandwich covariance of a criterion minimizer.
#[derive(Debug, Clone)]
pub struct SandwichCovariance {
    /// Scaled curvature of the minimized criterion at the estimate,
    /// (NT)^-1 times the numerical Hessian. Positive definite at an interior
    /// minimum; the analytic bias correction relies on this orientation.
    pub gamma: DMatrix<f64>,
    /// (NT)^-1 times the sum of per-unit score outer products.
    pub omega: DMatrix<f64>,
    /// gamma^-1 omega gamma^-1, the asymptotic covariance of the scaled
    /// estimation error.
    pub sigma: DMatrix<f64>,
    /// sqrt(diag(sigma) / NT): finite-sample standard errors.
    pub std_errors: Vec<f64>,
    pub gamma_condition: f64,
}

fn invert_checked(m: &DMatrix<f64>, what: &'static str) -> Result<(DMatrix<f64>, f64)> {
    let cond = numdiff::condition_number(m);
    if !cond.is_finite() || cond > SINGULAR_CONDITION_LIMIT {
        return Err(Error::SingularMatrix { what, cond });
    }
    let inv = m
        .clone()
        .try_inverse()
        .ok_or(Error::SingularMatrix { what, cond })?;
    Ok((inv, cond))
}

fn sandwich_from_parts(
    gamma: DMatrix<f64>,
    omega: DMatrix<f64>,
    cells: f64,
    what: &'static str,
) -> Result<SandwichCovariance> {
    let (inv, cond) = invert_checked(&gamma, what)?;
    let raw = &inv * &omega * inv.transpose();
    let sigma = (&raw + &raw.transpose()) * 0.5;
    let std_errors = (0..sigma.nrows())
        .map(|j| (sigma[(j, j)] / cells).max(0.0).sqrt())
        .collect();
    Ok(SandwichCovariance {
        gamma,
        omega,
        sigma,
        std_errors,
        gamma_condition: cond,
    })
}

fn empty_sandwich() -> SandwichCovariance {
    SandwichCovariance {
        gamma: DMatrix::zeros(0, 0),
        omega: DMatrix::zeros(0, 0),
        sigma: DMatrix::zeros(0, 0),
        std_errors: Vec::new(),
        gamma_condition: 1.0,
    }
}

fn per_unit_objective(panel: &PanelData, orders: &ModelOrders, x: &[f64]) -> Vec<f64> {
    let n = panel.n_units();
    let params = match ArmaParams::from_flat(orders, x) {
        Ok(p) => p,
        Err(_) => return vec![f64::INFINITY; n],
    };
    if !validate_arma(&params).is_valid() {
        return vec![f64::INFINITY; n];
    }
    arma::objective_by_unit(panel, &params, None).unwrap_or_else(|_| vec![f64::INFINITY; n])
}

fn lambda_curvature(panel: &PanelData, fit: &ArmaEstimate) -> Result<DMatrix<f64>> {
    if let Some(cov) = &fit.covariance {
        return Ok(cov.gamma.clone());
    }
    let cells = (panel.n_units() * panel.n_periods()) as f64;
    let lambda = fit.lambda_flat();
    let hess = numdiff::hessian(|x| arma::objective_flat(panel, &fit.orders, x), &lambda)
        .ok_or_else(|| Error::FitFailure {
            stage: "lambda curvature",
            detail: "least-squares criterion is not twice differentiable at the estimate".into(),
        })?;
    Ok(hess / cells)
}

/// Cluster sandwich for the common mean parameters.
///
/// gamma is the scaled Hessian of the concentrated least-squares criterion,
/// omega the outer product of per-unit criterion gradients at the minimizer.
pub fn covariance_lambda(panel: &PanelData, fit: &ArmaEstimate) -> Result<SandwichCovariance> {
    let orders = fit.orders;
    let lambda = fit.lambda_flat();
    if lambda.is_empty() {
        return Ok(empty_sandwich());
    }
    let n = panel.n_units();
    let cells = (n * panel.n_periods()) as f64;

    let hess = numdiff::hessian(|x| arma::objective_flat(panel, &orders, x), &lambda)
        .ok_or_else(|| Error::FitFailure {
            stage: "covariance_lambda",
            detail: "least-squares criterion is not twice differentiable at the estimate".into(),
        })?;
    let gamma = hess / cells;

    let jac = numdiff::jacobian(|x| per_unit_objective(panel, &orders, x), &lambda, n)
        .ok_or_else(|| Error::FitFailure {
        stage: "covariance_lambda",
        detail: "per-unit scores did not evaluate finitely near the estimate".into(),
    })?;
    let omega = jac.transpose() * &jac / cells;
    sandwich_from_parts(gamma, omega, cells, "lambda covariance")
}

/// How the first-step bias was removed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum CorrectionMethod {
    Analytic,
    Jackknife,
}

/// Bias-corrected first step.
///
/// The corrected parameters are plain arithmetic on estimates and may land
/// just outside the stationarity margin enforced during optimization; they
/// are reported as computed. Fixed effects and residuals are re-derived at
/// the corrected point so the second step sees consistent inputs.
#[derive(Debug, Clone)]
pub struct BiasCorrection {
    pub method: CorrectionMethod,
    pub params: ArmaParams,
    pub mu: Vec<f64>,
    pub residuals: ndarray::Array2<f64>,
    /// Half-sample estimates, jackknife method only.
    pub halves: Option<[Vec<f64>; 2]>,
    /// Fixed-effect bias component, scaled so the subtraction is c1 / T.
    pub c1: Option<Vec<f64>>,
    /// Initial-values bias component on the same scale.
    pub c1_dag: Option<Vec<f64>>,
    /// Bootstrap standard error of the estimated bias per component.
    pub bias_se: Option<Vec<f64>>,
}

impl BiasCorrection {
    pub fn lambda_flat(&self) -> Vec<f64> {
        self.params.to_flat()
    }
}

fn corrected_outputs(
    panel: &PanelData,
    orders: &ModelOrders,
    flat: &[f64],
) -> Result<(ArmaParams, Vec<f64>, ndarray::Array2<f64>)> {
    let params = ArmaParams::from_flat(orders, flat)?;
    let mu = arma::concentrate_mu(panel, &params, None)?;
    let residuals = residual_filter(panel, &params, &mu, None)?;
    Ok((params, mu, residuals))
}

/// Two half-window first-step estimates for the split-sample corrections.
/// The halves split `window`; each criterion sums over its own half while
/// the recursions run from the first period, so the later half conditions
/// on the observed data before it instead of restarting from zero
/// pre-sample values. Both warm start at `warm`.
fn half_lambda_estimates(
    panel: &PanelData,
    orders: &ModelOrders,
    window: (usize, usize),
    warm: &[f64],
    opts: &FitOptions,
) -> Result<[Vec<f64>; 2]> {
    let (s, e) = window;
    let len = e - s;
    let floor = 2 * (orders.p + orders.q + 5);
    if len < floor {
        return Err(Error::InsufficientData(format!(
            "split-panel jackknife needs T >= {floor}, got {len}"
        )));
    }
    let mid = s + len / 2;
    let first = arma::fit_arma_window(panel, orders, opts, Some(warm), (s, mid))?;
    let second = arma::fit_arma_window(panel, orders, opts, Some(warm), (mid, e))?;
    Ok([first.lambda_flat(), second.lambda_flat()])
}

/// 2 full - (a + b) / 2, the split-sample combination.
fn split_combine(full: &[f64], halves: &[Vec<f64>; 2]) -> Vec<f64> {
    full.iter()
        .zip(halves[0].iter().zip(halves[1].iter()))
        .map(|(&f, (&a, &b))| 2.0 * f - 0.5 * (a + b))
        .collect()
}

/// Split-panel jackknife for the common mean parameters: twice the full
/// estimate minus the average of the two half-sample estimates, each half
/// estimated on its own half of the periods.
pub fn jackknife_arma(
    panel: &PanelData,
    fit: &ArmaEstimate,
    opts: &FitOptions,
) -> Result<BiasCorrection> {
    let orders = fit.orders;
    let full = fit.lambda_flat();
    let sub_opts = FitOptions {
        compute_covariance: false,
        ..*opts
    };
    let halves =
        half_lambda_estimates(panel, &orders, (0, panel.n_periods()), &full, &sub_opts)?;
    let corrected = split_combine(&full, &halves);
    let (params, mu, residuals) = corrected_outputs(panel, &orders, &corrected)?;
    Ok(BiasCorrection {
        method: CorrectionMethod::Jackknife,
        params,
        mu,
        residuals,
        halves: Some(halves),
        c1: None,
        c1_dag: None,
        bias_se: None,
    })
}

/// Analytic correction via a score bootstrap at the fitted model.
///
/// Panels are simulated from the fitted parameters with i.i.d. normal errors
/// at the unit variance targets; the expected first-step bias is the scaled
/// curvature inverse applied to the mean criterion gradient at the fitted
/// parameters. The gradient is evaluated twice per panel: once warm started
/// from the simulator's true pre-sample state, isolating the fixed-effect
/// component, and once under the feasible zero pre-sample convention, whose
/// excess over the warm score is the initial-values component. Errors need
/// only match second moments for the score expectation, since the gradient
/// is a quadratic form in the errors; volatility dynamics are therefore not
/// simulated. Regressors are redrawn i.i.d. normal matched to the observed
/// per-dimension mean and standard deviation.
pub fn analytic_correct_arma(
    panel: &PanelData,
    fit: &ArmaEstimate,
    bootstrap_reps: usize,
    seed: u64,
) -> Result<BiasCorrection> {
    let orders = fit.orders;
    let dim = orders.arma_dim();
    if dim == 0 {
        return Ok(BiasCorrection {
            method: CorrectionMethod::Analytic,
            params: fit.params.clone(),
            mu: fit.mu.clone(),
            residuals: fit.residuals.clone(),
            halves: None,
            c1: Some(Vec::new()),
            c1_dag: Some(Vec::new()),
            bias_se: Some(Vec::new()),
        });
    }
    if bootstrap_reps < 2 {
        return Err(Error::InvalidParams(format!(
            "analytic correction needs at least 2 bootstrap replications, got {bootstrap_reps}"
        )));
    }
    let n = panel.n_units();
    let t_len = panel.n_periods();
    let cells = (n * t_len) as f64;
    let lambda = fit.lambda_flat();

    let gamma = lambda_curvature(panel, fit)?;
    let (gamma_inv, _) = invert_checked(&gamma, "bias curvature")?;

    let omega_hat = garch::variance_target(&fit.residuals)?;
    let x_law: Vec<(f64, f64)> = (0..orders.d_x)
        .map(|d| {
            let col: Vec<f64> = panel.x.slice(ndarray::s![.., .., d]).iter().copied().collect();
            (stats::mean(&col), stats::sample_sd(&col))
        })
        .collect();
    let dgp = DgpParams {
        mu: fit.mu.clone(),
        arma: fit.params.clone(),
        omega: omega_hat,
        garch: GarchParams::new(Vec::new(), Vec::new()),
    };
    let sim_orders = ModelOrders::new(orders.p, orders.q, 0, 0, orders.d_x)?;

    let mut warm_scores: Vec<Vec<f64>> = Vec::with_capacity(bootstrap_reps);
    let mut cold_scores: Vec<Vec<f64>> = Vec::with_capacity(bootstrap_reps);
    let mut failures = 0usize;
    for b in 0..bootstrap_reps {
        let rep_seed = derive_key(seed, &[b as u64]);
        let sim = simulate_with_x_law(
            &sim_orders,
            &dgp,
            Innovation::Normal,
            &x_law,
            t_len,
            BOOTSTRAP_BURN_IN,
            rep_seed,
        )?;
        let cold = numdiff::gradient(|x| arma::objective_flat(&sim.panel, &orders, x), &lambda);
        let warm = numdiff::gradient(
            |x| {
                let params = match ArmaParams::from_flat(&orders, x) {
                    Ok(p) => p,
                    Err(_) => return f64::INFINITY,
                };
                if !validate_arma(&params).is_valid() {
                    return f64::INFINITY;
                }
                arma::concentrated_objective(&sim.panel, &params, Some(&sim.presample))
                    .unwrap_or(f64::INFINITY)
            },
            &lambda,
        );
        match (warm, cold) {
            (Some(w), Some(c)) => {
                warm_scores.push(w);
                cold_scores.push(c);
            }
            _ => failures += 1,
        }
    }
    let used = warm_scores.len();
    if failures * 5 > bootstrap_reps || used < 2 {
        return Err(Error::FitFailure {
            stage: "analytic_correct_arma",
            detail: format!("{failures} of {bootstrap_reps} bootstrap scores failed to evaluate"),
        });
    }

    // bias ~= -Gamma^-1 E[grad Q at the truth] / NT, estimated by the
    // bootstrap mean; the warm-score part of it is the fixed-effect term.
    let apply = |score: &[f64]| -> Vec<f64> {
        let v = DMatrix::from_column_slice(dim, 1, score);
        let b = &gamma_inv * v;
        (0..dim).map(|j| -b[(j, 0)] / cells).collect()
    };
    let mut bias_mean = vec![0.0; dim];
    let mut warm_mean = vec![0.0; dim];
    let mut bias_sq = vec![0.0; dim];
    for (w, c) in warm_scores.iter().zip(cold_scores.iter()) {
        let bw = apply(w);
        let bc = apply(c);
        for j in 0..dim {
            bias_mean[j] += bc[j];
            warm_mean[j] += bw[j];
            bias_sq[j] += bc[j] * bc[j];
        }
    }
    let used_f = used as f64;
    let mut bias_se = vec![0.0; dim];
    for j in 0..dim {
        bias_mean[j] /= used_f;
        warm_mean[j] /= used_f;
        let var = (bias_sq[j] / used_f - bias_mean[j] * bias_mean[j]).max(0.0);
        bias_se[j] = (var / used_f).sqrt();
    }

    let t_f = t_len as f64;
    let c1: Vec<f64> = warm_mean.iter().map(|&b| b * t_f).collect();
    let c1_dag: Vec<f64> = bias_mean
        .iter()
        .zip(warm_mean.iter())
        .map(|(&b, &w)| (b - w) * t_f)
        .collect();
    let corrected: Vec<f64> = lambda
        .iter()
        .zip(bias_mean.iter())
        .map(|(&l, &b)| l - b)
        .collect();
    let (params, mu, residuals) = corrected_outputs(panel, &orders, &corrected)?;
    Ok(BiasCorrection {
        method: CorrectionMethod::Analytic,
        params,
        mu,
        residuals,
        halves: None,
        c1: Some(c1),
        c1_dag: Some(c1_dag),
        bias_se: Some(bias_se),
    })
}

/// Which corrected first step supplies residuals to the volatility
/// correction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResidualSource {
    Jackknife,
    Analytic { bootstrap_reps: usize, seed: u64 },
}

/// Split-panel jackknife of the volatility parameters.
#[derive(Debug, Clone)]
pub struct GarchCorrection {
    /// Corrected coefficients, plain jackknife arithmetic; may sit outside
    /// the admissible set.
    pub zeta: GarchParams,
    /// Full-sample refit on bias-corrected residuals.
    pub zeta_star: GarchParams,
    /// Variance targets from the corrected full-sample residuals.
    pub omega: Vec<f64>,
    /// Implied intercepts omega_i (1 - persistence) at the corrected
    /// coefficients.
    pub varpi: Vec<f64>,
    pub halves: [Vec<f64>; 2],
    /// The first-step correction the residuals came from.
    pub lambda: BiasCorrection,
}

impl GarchCorrection {
    pub fn zeta_flat(&self) -> Vec<f64> {
        self.zeta.to_flat()
    }
}

fn corrected_lambda(
    panel: &PanelData,
    fit: &ArmaEstimate,
    source: ResidualSource,
    opts: &FitOptions,
    stream: u64,
) -> Result<BiasCorrection> {
    match source {
        ResidualSource::Jackknife => jackknife_arma(panel, fit, opts),
        ResidualSource::Analytic {
            bootstrap_reps,
            seed,
        } => analytic_correct_arma(panel, fit, bootstrap_reps, derive_key(seed, &[stream])),
    }
}

/// Split-panel jackknife for the volatility parameters.
///
/// Both steps are re-estimated on each half: the first step refit with its
/// criterion summed over the half, its bias corrected by `source`, and the
/// volatility model fit on the corrected residuals with likelihood and
/// variance targets from the same half. The full-sample refit on corrected
/// residuals anchors the correction.
pub fn jackknife_garch(
    panel: &PanelData,
    fit: &ArmaEstimate,
    source: ResidualSource,
    init: VolatilityInit,
    opts: &FitOptions,
) -> Result<GarchCorrection> {
    let orders = fit.orders;
    if orders.garch_dim() == 0 {
        return Err(Error::InvalidOrders(
            "volatility jackknife needs L + K > 0".into(),
        ));
    }
    let t_len = panel.n_periods();
    let floor = (2 * orders.min_periods()).max(2 * (orders.p + orders.q + 5));
    if t_len < floor {
        return Err(Error::InsufficientData(format!(
            "volatility jackknife needs T >= {floor}, got {t_len}"
        )));
    }
    let sub_opts = FitOptions {
        compute_covariance: false,
        ..*opts
    };
    let full_corr = corrected_lambda(panel, fit, source, opts, 0)?;
    let star = garch::fit_garch(&full_corr.residuals, &orders, init, &sub_opts)?;

    let full_flat = fit.lambda_flat();
    let (first, second) = panel.half_ranges();
    let mut halves: Vec<Vec<f64>> = Vec::with_capacity(2);
    for (idx, (s, e)) in [first, second].into_iter().enumerate() {
        let half_fit =
            arma::fit_arma_window(panel, &orders, &sub_opts, Some(&full_flat), (s, e))?;
        let half_flat = half_fit.lambda_flat();
        let corrected_half = match source {
            ResidualSource::Jackknife => {
                let quarters =
                    half_lambda_estimates(panel, &orders, (s, e), &half_flat, &sub_opts)?;
                split_combine(&half_flat, &quarters)
            }
            ResidualSource::Analytic {
                bootstrap_reps,
                seed,
            } => {
                // The plug-in bootstraps fresh panels at the half estimates,
                // so it sees the half as a standalone panel.
                let sub = panel.time_slice(s, e)?;
                let mu = arma::concentrate_mu(&sub, &half_fit.params, None)?;
                let residuals = residual_filter(&sub, &half_fit.params, &mu, None)?;
                let objective: f64 = residuals.iter().map(|u| u * u).sum();
                let est = ArmaEstimate {
                    orders,
                    params: half_fit.params.clone(),
                    mu,
                    residuals,
                    objective,
                    converged: half_fit.converged,
                    evaluations: half_fit.evaluations,
                    covariance: None,
                };
                analytic_correct_arma(
                    &sub,
                    &est,
                    bootstrap_reps,
                    derive_key(seed, &[idx as u64 + 1]),
                )?
                .lambda_flat()
            }
        };
        let params = ArmaParams::from_flat(&orders, &corrected_half)?;
        let mu = arma::concentrate_mu_window(panel, &params, (s, e))?;
        let residuals = residual_filter(panel, &params, &mu, None)?;
        let half_garch = garch::fit_garch_window(&residuals, &orders, init, &sub_opts, (s, e))?;
        halves.push(half_garch.zeta_flat());
    }

    let mut it = halves.into_iter();
    let halves = [it.next().unwrap(), it.next().unwrap()];
    let corrected = split_combine(&star.zeta_flat(), &halves);
    let zeta = GarchParams::from_flat(&orders, &corrected)?;
    let omega = garch::variance_target(&full_corr.residuals)?;
    let factor = 1.0 - zeta.persistence();
    let varpi = omega.iter().map(|&w| w * factor).collect();
    Ok(GarchCorrection {
        zeta,
        zeta_star: star.params.clone(),
        omega,
        varpi,
        halves,
        lambda: full_corr,
    })
}

/// Stacked two-step sandwich for the volatility parameters.
///
/// The stacked criterion pairs the per-unit least-squares gradients with the
/// per-unit likelihood gradients. First-step noise enters through the cross
/// block of the joint curvature: unit scores are adjusted to
/// psi_i = g2_i - H21 H11^-1 g1_i before the outer product, so the reported
/// covariance includes the common-parameter estimation effect. Fixed effects
/// and variance targets are profiled inside the criterion, which carries
/// their per-unit estimation noise into the scores.
///
/// Pre: `garch_fit` was estimated on `arma_fit.residuals` with the same
/// pre-sample convention it records.
pub fn covariance_zeta(
    panel: &PanelData,
    arma_fit: &ArmaEstimate,
    garch_fit: &GarchEstimate,
) -> Result<SandwichCovariance> {
    let orders = arma_fit.orders;
    let dz = orders.garch_dim();
    if dz == 0 {
        return Ok(empty_sandwich());
    }
    let n = panel.n_units();
    let cells = (n * panel.n_periods()) as f64;
    let dl = orders.arma_dim();
    let lambda = arma_fit.lambda_flat();
    let zeta = garch_fit.zeta_flat();
    let init = garch_fit.init;

    // Joint curvature of the profiled second-step criterion in (lambda, zeta).
    let joint = |v: &[f64]| -> f64 {
        let (lam, zet) = v.split_at(dl);
        let params = match ArmaParams::from_flat(&orders, lam) {
            Ok(p) => p,
            Err(_) => return f64::INFINITY,
        };
        if !validate_arma(&params).is_valid() {
            return f64::INFINITY;
        }
        let mu = match arma::concentrate_mu(panel, &params, None) {
            Ok(m) => m,
            Err(_) => return f64::INFINITY,
        };
        let resid = match residual_filter(panel, &params, &mu, None) {
            Ok(r) => r,
            Err(_) => return f64::INFINITY,
        };
        let omega = match garch::variance_target(&resid) {
            Ok(o) => o,
            Err(_) => return f64::INFINITY,
        };
        garch::neg_loglik_flat(&resid, &orders, &omega, init, zet)
    };
    let mut theta = lambda.clone();
    theta.extend_from_slice(&zeta);
    let boundary_note = || Error::FitFailure {
        stage: "covariance_zeta",
        detail: if garch_fit.at_boundary {
            "criterion is not differentiable at a boundary estimate".into()
        } else {
            "stacked criterion did not evaluate finitely near the estimate".into()
        },
    };
    let joint_hess = numdiff::hessian(joint, &theta).ok_or_else(boundary_note)?;
    let h22 = joint_hess.view((dl, dl), (dz, dz)).into_owned() / cells;

    // Per-unit likelihood scores at fixed first-step output.
    let g2 = numdiff::jacobian(
        |z| match GarchParams::from_flat(&orders, z) {
            Ok(p) => garch::loglik_by_unit(&arma_fit.residuals, &p, &garch_fit.omega, init)
                .map(|v| v.iter().map(|l| -l).collect())
                .unwrap_or_else(|_| vec![f64::INFINITY; n]),
            Err(_) => vec![f64::INFINITY; n],
        },
        &zeta,
        n,
    )
    .ok_or_else(boundary_note)?;

    let psi = if dl == 0 {
        g2
    } else {
        let h21 = joint_hess.view((dl, 0), (dz, dl)).into_owned() / cells;
        let h11 = lambda_curvature(panel, arma_fit)?;
        let (h11_inv, _) = invert_checked(&h11, "lambda curvature")?;
        let g1 = numdiff::jacobian(|x| per_unit_objective(panel, &orders, x), &lambda, n)
            .ok_or_else(boundary_note)?;
        // psi_i' = g2_i' - g1_i' H11^-1 H21'; rows stay per-unit.
        &g2 - &g1 * (&h11_inv * h21.transpose())
    };
    let omega_mat = psi.transpose() * &psi / cells;
    sandwich_from_parts(h22, omega_mat, cells, "zeta covariance")
}

/// Two-sided confidence interval.
#[derive(Debug, Clone, Copy, serde::Serialize, serde::Deserialize)]
pub struct IntervalEstimate {
    pub estimate: f64,
    pub std_error: f64,
    pub lower: f64,
    pub upper: f64,
}

fn interval(estimate: f64, std_error: f64, z: f64) -> IntervalEstimate {
    IntervalEstimate {
        estimate,
        std_error,
        lower: estimate - z * std_error,
        upper: estimate + z * std_error,
    }
}

/// Per-unit interval inference for the fixed effects.
#[derive(Debug, Clone)]
pub struct FixedEffectIntervals {
    pub unit: usize,
    /// Confidence level, e.g. 0.95.
    pub level: f64,
    pub mu: IntervalEstimate,
    pub omega: IntervalEstimate,
    pub varpi: IntervalEstimate,
}

/// Root-T intervals for the unit fixed effects mu_i, omega_i and the implied
/// intercept varpi_i.
///
/// Plug-ins: omega_i for the error variance, the finite-T concentration
/// denominator for the mean effect, the pooled fourth moment of standardized
/// residuals, and the unit mean of squared fitted variances. Errors if the
/// pooled fourth moment does not exceed one or persistence reaches one,
/// since the variance formulas degenerate there.
pub fn fixed_effect_inference(
    arma_fit: &ArmaEstimate,
    garch_fit: &GarchEstimate,
    unit: usize,
    level: f64,
) -> Result<FixedEffectIntervals> {
    let (n, t_len) = arma_fit.residuals.dim();
    if unit >= n {
        return Err(Error::InvalidParams(format!(
            "unit {unit} out of range for N = {n}"
        )));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::InvalidParams(format!(
            "confidence level must lie in (0, 1), got {level}"
        )));
    }
    if garch_fit.h.dim() != (n, t_len) {
        return Err(Error::DimensionMismatch {
            context: "fixed_effect_inference (h)",
            expected: format!("{n} x {t_len}"),
            got: format!("{} x {}", garch_fit.h.dim().0, garch_fit.h.dim().1),
        });
    }
    let t_f = t_len as f64;
    let z = stats::normal_quantile(0.5 + level / 2.0);

    let kernel = ConcentrationKernel::new(&arma_fit.params.psi, t_len);
    if !(kernel.denom > 0.0) || !kernel.denom.is_finite() {
        return Err(Error::FitFailure {
            stage: "fixed_effect_inference",
            detail: format!("concentration denominator {} is not positive", kernel.denom),
        });
    }
    let omega_i = garch_fit.omega[unit];
    let se_mu = (omega_i * t_f / kernel.denom / t_f).sqrt();

    let mut eps4 = 0.0;
    for ((_, u), h) in arma_fit.residuals.indexed_iter().zip(garch_fit.h.iter()) {
        let e2 = u * u / h;
        eps4 += e2 * e2;
    }
    eps4 /= (n * t_len) as f64;
    if !(eps4 > 1.0) {
        return Err(Error::FitFailure {
            stage: "fixed_effect_inference",
            detail: format!("pooled fourth moment {eps4} of standardized residuals must exceed 1"),
        });
    }
    let h2: f64 = garch_fit
        .h
        .row(unit)
        .iter()
        .map(|&h| h * h)
        .sum::<f64>()
        / t_f;

    let s_nu: f64 = garch_fit.params.nu.iter().sum();
    let spread = 1.0 - garch_fit.params.persistence();
    if !(spread > 0.0) {
        return Err(Error::FitFailure {
            stage: "fixed_effect_inference",
            detail: format!("persistence {} leaves no intercept spread", 1.0 - spread),
        });
    }
    let var_omega = ((1.0 - s_nu) / spread).powi(2) * (eps4 - 1.0) * h2;
    let var_varpi = (1.0 - s_nu).powi(2) * (eps4 - 1.0) * h2;
    let varpi_i = omega_i * spread;

    Ok(FixedEffectIntervals {
        unit,
        level,
        mu: interval(arma_fit.mu[unit], se_mu, z),
        omega: interval(omega_i, (var_omega / t_f).sqrt(), z),
        varpi: interval(varpi_i, (var_varpi / t_f).sqrt(), z),
    })
}
