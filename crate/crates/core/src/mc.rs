//! Monte Carlo harness for the estimator suite: bias, dispersion, and
//! SD/AD tables for the raw and bias-corrected estimators over an (N, T)
//! grid.
//!
//! Replications are independent and parallelize over a local worker pool;
//! every replication derives its own seed from (master seed, grid index,
//! replication index), so reports are invariant to worker count and adding
//! grid points never perturbs existing cells. Failed replications are
//! logged with their seeds and excluded from the summaries; a grid point
//! aborts once failures exceed 5% of its replications.

use crate::arma::{fit_arma, ArmaEstimate, FitOptions};
use crate::error::{Error, Result};
use crate::filter::{garch_filter, VolatilityInit};
use crate::garch::{fit_garch, vt_quasi_loglik, GarchEstimate};
use crate::inference::{
    analytic_correct_arma, covariance_lambda, covariance_zeta, jackknife_arma, jackknife_garch,
    BiasCorrection, ResidualSource,
};
use crate::panel::{ModelOrders, PanelData};
use crate::params::{ArmaParams, GarchParams};
use crate::seeding::{derive_key, substream};
use crate::simulate::{simulate, DgpParams, Innovation};
use crate::stats;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

/// Volatility fits need a minimal span to identify (tau, nu); shorter
/// panels skip the volatility estimators rather than fail the cell.
pub const GARCH_MIN_T: usize = 30;

/// Law of a unit-level effect.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum EffectLaw {
    Fixed(f64),
    Normal { mean: f64, sd: f64 },
    Uniform { lo: f64, hi: f64 },
}

impl EffectLaw {
    fn validate(&self, name: &str, positive: bool) -> Result<()> {
        let ok = match *self {
            EffectLaw::Fixed(v) => v.is_finite() && (!positive || v > 0.0),
            EffectLaw::Normal { mean, sd } => mean.is_finite() && sd.is_finite() && sd >= 0.0,
            EffectLaw::Uniform { lo, hi } => {
                lo.is_finite() && hi > lo && (!positive || lo > 0.0)
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParams(format!(
                "{name} law {self:?} is not admissible"
            )))
        }
    }

    fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        match *self {
            EffectLaw::Fixed(v) => v,
            EffectLaw::Normal { mean, sd } => {
                mean + sd * Normal::new(0.0, 1.0).unwrap().sample(rng)
            }
            EffectLaw::Uniform { lo, hi } => lo + (hi - lo) * rng.random::<f64>(),
        }
    }
}

/// Data-generating process for the experiments: common dynamics plus laws
/// for the unit effects. Regressors are standard normal draws.
#[derive(Debug, Clone)]
pub struct DgpSpec {
    pub arma: ArmaParams,
    pub garch: GarchParams,
    pub innovation: Innovation,
    pub mu_law: EffectLaw,
    pub omega_law: EffectLaw,
    pub burn_in: usize,
}

impl DgpSpec {
    /// The benchmark design: ARMA(1,1) with one regressor and GARCH(1,1)
    /// errors, lambda = (3, 0.3, 0.3), zeta = (0.2, 0.4), mu_i ~ N(0,1),
    /// omega_i ~ U(1,3), normal shocks.
    pub fn benchmark() -> Self {
        Self {
            arma: ArmaParams::new(vec![3.0], vec![0.3], vec![0.3]),
            garch: GarchParams::new(vec![0.2], vec![0.4]),
            innovation: Innovation::Normal,
            mu_law: EffectLaw::Normal { mean: 0.0, sd: 1.0 },
            omega_law: EffectLaw::Uniform { lo: 1.0, hi: 3.0 },
            // Start the recursions at the same zero pre-sample state the
            // feasible filters assume. With a stationary start instead, the
            // first few residuals absorb the truncated tails and their
            // squares are inflated enough to tilt the GARCH step's bias
            // allocation between tau and nu at T around 100.
            burn_in: 0,
        }
    }

    pub fn orders(&self) -> Result<ModelOrders> {
        ModelOrders::new(
            self.arma.phi.len(),
            self.arma.psi.len(),
            self.garch.tau.len(),
            self.garch.nu.len(),
            self.arma.beta.len(),
        )
    }

    pub fn validate(&self) -> Result<()> {
        self.orders()?;
        self.garch.validate()?;
        self.mu_law.validate("mu", false)?;
        self.omega_law.validate("omega", true)?;
        Ok(())
    }

    pub fn lambda_truth(&self) -> Vec<f64> {
        self.arma.to_flat()
    }

    pub fn zeta_truth(&self) -> Vec<f64> {
        self.garch.to_flat()
    }

    /// Unit effects for the replication at `seed`, drawn on the reserved
    /// effect substream so the period shocks of `simulate` stay untouched.
    pub fn draw_effects(&self, n: usize, seed: u64) -> Result<DgpParams> {
        let mut rng = substream(seed, &[u64::MAX]);
        self.materialize(n, &mut rng)
    }

    /// Draws the unit effects for one replication.
    fn materialize<R: Rng>(&self, n: usize, rng: &mut R) -> Result<DgpParams> {
        let mut mu = Vec::with_capacity(n);
        let mut omega = Vec::with_capacity(n);
        for i in 0..n {
            mu.push(self.mu_law.sample(rng));
            let mut w = self.omega_law.sample(rng);
            let mut tries = 0;
            while w <= 0.0 && tries < 64 {
                w = self.omega_law.sample(rng);
                tries += 1;
            }
            if w <= 0.0 {
                return Err(Error::DegenerateUnit {
                    unit: i.to_string(),
                    reason: "omega law kept producing non-positive draws".into(),
                });
            }
            omega.push(w);
        }
        Ok(DgpParams {
            mu,
            arma: self.arma.clone(),
            omega,
            garch: self.garch.clone(),
        })
    }
}

/// Estimators the harness can run. `Ls`-prefixed kinds report the mean
/// parameters, the rest the volatility parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum EstimatorKind {
    Ls,
    LsAnalytic,
    LsJackknife,
    Vtqml,
    VtqmlJackknife,
}

pub const ALL_ESTIMATORS: [EstimatorKind; 5] = [
    EstimatorKind::Ls,
    EstimatorKind::LsAnalytic,
    EstimatorKind::LsJackknife,
    EstimatorKind::Vtqml,
    EstimatorKind::VtqmlJackknife,
];

impl EstimatorKind {
    pub fn label(self) -> &'static str {
        match self {
            EstimatorKind::Ls => "ls",
            EstimatorKind::LsAnalytic => "analytic",
            EstimatorKind::LsJackknife => "jackknife",
            EstimatorKind::Vtqml => "vtqml",
            EstimatorKind::VtqmlJackknife => "garch-jackknife",
        }
    }

    pub fn parse(label: &str) -> Result<Self> {
        ALL_ESTIMATORS
            .into_iter()
            .find(|e| e.label() == label)
            .ok_or_else(|| {
                Error::InvalidParams(format!(
                    "unknown estimator {label:?}; expected one of ls, analytic, jackknife, vtqml, garch-jackknife"
                ))
            })
    }

    pub fn is_garch(self) -> bool {
        matches!(self, EstimatorKind::Vtqml | EstimatorKind::VtqmlJackknife)
    }

    /// Column suffix in the rendered tables.
    fn suffix(self) -> &'static str {
        match self {
            EstimatorKind::Ls | EstimatorKind::Vtqml => "",
            EstimatorKind::LsAnalytic => "_A",
            EstimatorKind::LsJackknife | EstimatorKind::VtqmlJackknife => "_J",
        }
    }
}

/// Full experiment description.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub grid: Vec<(usize, usize)>,
    pub replications: usize,
    pub dgp: DgpSpec,
    pub estimators: Vec<EstimatorKind>,
    pub seed: u64,
    /// Worker threads; 0 uses the library default.
    pub workers: usize,
    /// Score replications inside each analytic bias correction.
    pub bootstrap_reps: usize,
    pub init: VolatilityInit,
    pub fit: FitOptions,
}

impl ExperimentConfig {
    pub fn new(dgp: DgpSpec) -> Self {
        Self {
            grid: vec![(50, 100)],
            replications: 200,
            dgp,
            estimators: ALL_ESTIMATORS.to_vec(),
            seed: 0,
            workers: 0,
            bootstrap_reps: 100,
            init: VolatilityInit::UnconditionalVariance,
            fit: FitOptions::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.dgp.validate()?;
        if self.replications < 50 {
            return Err(Error::InvalidParams(format!(
                "need at least 50 replications for stable summaries, got {}",
                self.replications
            )));
        }
        if self.grid.is_empty() {
            return Err(Error::InvalidParams("empty (N, T) grid".into()));
        }
        let orders = self.dgp.orders()?;
        for &(n, t) in &self.grid {
            if n == 0 || t < orders.min_periods() {
                return Err(Error::InvalidParams(format!(
                    "grid cell ({n}, {t}) cannot hold the model"
                )));
            }
        }
        if self.estimators.is_empty() {
            return Err(Error::InvalidParams("no estimators requested".into()));
        }
        if self.estimators.contains(&EstimatorKind::LsAnalytic) && self.bootstrap_reps < 2 {
            return Err(Error::InvalidParams(
                "analytic correction needs bootstrap_reps >= 2".into(),
            ));
        }
        Ok(())
    }
}

/// Summary for one (cell, estimator, parameter) triple.
#[derive(Debug, Clone, Serialize)]
pub struct SummaryRow {
    pub n: usize,
    pub t: usize,
    pub estimator: EstimatorKind,
    pub param: String,
    pub truth: f64,
    /// Successful replications behind the estimate moments.
    pub replications: usize,
    pub bias: f64,
    pub sd: f64,
    pub rmse: f64,
    /// Mean of the per-replication asymptotic standard deviations, over the
    /// replications where the sandwich was available.
    pub mean_ad: Option<f64>,
    pub sd_ad: Option<f64>,
    pub ad_count: usize,
    /// Monte Carlo standard error of the bias, SD / sqrt(R).
    pub mc_se: f64,
}

impl SummaryRow {
    pub fn sd_over_ad(&self) -> Option<f64> {
        self.mean_ad.map(|ad| self.sd / ad)
    }
}

/// Per-cell bookkeeping: failures, skips, abort status.
#[derive(Debug, Clone, Serialize)]
pub struct CellDiagnostics {
    pub n: usize,
    pub t: usize,
    pub requested: usize,
    pub failures: usize,
    /// Estimators not run in this cell (panel too short for them).
    pub skipped: Vec<EstimatorKind>,
    /// (replication index, replication seed, error) per failure.
    pub failure_log: Vec<(usize, u64, String)>,
    /// Set when the failure rate exceeded 5% and the cell was dropped.
    pub aborted: Option<String>,
}

/// Experiment output: long-form summary rows plus per-cell diagnostics.
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentReport {
    pub rows: Vec<SummaryRow>,
    pub cells: Vec<CellDiagnostics>,
    pub seed: u64,
    pub replications: usize,
}

/// Monte Carlo standard error of the bias for one summary row; `None` when
/// the cell had no successful replications.
#[derive(Debug, Clone, Serialize)]
pub struct McStderr {
    pub n: usize,
    pub t: usize,
    pub estimator: EstimatorKind,
    pub param: String,
    pub se: Option<f64>,
}

/// Extracts SD / sqrt(R) per summary row, `None` for empty cells.
pub fn mc_stderr(report: &ExperimentReport) -> Vec<McStderr> {
    report
        .rows
        .iter()
        .map(|r| McStderr {
            n: r.n,
            t: r.t,
            estimator: r.estimator,
            param: r.param.clone(),
            se: if r.replications == 0 {
                None
            } else {
                Some(r.mc_se)
            },
        })
        .collect()
}

/// One replication's output: (estimator, parameter index within its block,
/// estimate, asymptotic SD when available).
struct RepOutcome {
    values: Vec<(EstimatorKind, usize, f64, Option<f64>)>,
}

pub fn lambda_param_names(orders: &ModelOrders) -> Vec<String> {
    let mut names = Vec::with_capacity(orders.arma_dim());
    for j in 0..orders.d_x {
        names.push(format!("beta{}", j + 1));
    }
    for j in 0..orders.p {
        names.push(format!("phi{}", j + 1));
    }
    for j in 0..orders.q {
        names.push(format!("psi{}", j + 1));
    }
    names
}

pub fn zeta_param_names(orders: &ModelOrders) -> Vec<String> {
    let mut names = Vec::with_capacity(orders.garch_dim());
    for j in 0..orders.l {
        names.push(format!("tau{}", j + 1));
    }
    for j in 0..orders.k {
        names.push(format!("nu{}", j + 1));
    }
    names
}

/// Runs the full grid. Deterministic in `config.seed` for any worker count.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let orders = config.dgp.orders()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| Error::FitFailure {
            stage: "worker pool",
            detail: e.to_string(),
        })?;

    let lambda_names = lambda_param_names(&orders);
    let zeta_names = zeta_param_names(&orders);
    let lambda_truth = config.dgp.lambda_truth();
    let zeta_truth = config.dgp.zeta_truth();

    let mut rows = Vec::new();
    let mut cells = Vec::new();
    for (gi, &(n, t)) in config.grid.iter().enumerate() {
        let mut active = Vec::new();
        let mut skipped = Vec::new();
        for &est in &config.estimators {
            if est.is_garch() && (t < GARCH_MIN_T || orders.garch_dim() == 0) {
                skipped.push(est);
            } else {
                active.push(est);
            }
        }

        let outcomes: Vec<(u64, Result<RepOutcome>)> = pool.install(|| {
            (0..config.replications)
                .into_par_iter()
                .map(|r| {
                    let rep_seed = derive_key(config.seed, &[gi as u64, r as u64]);
                    (
                        rep_seed,
                        run_replication(config, &orders, n, t, &active, rep_seed),
                    )
                })
                .collect()
        });

        let mut failure_log = Vec::new();
        let mut successes = Vec::new();
        for (r, (rep_seed, outcome)) in outcomes.into_iter().enumerate() {
            match outcome {
                Ok(out) => successes.push(out),
                Err(e) => failure_log.push((r, rep_seed, e.to_string())),
            }
        }
        let failures = failure_log.len();
        let aborted = if failures * 20 > config.replications {
            Some(format!(
                "{failures} of {} replications failed; first error: {}",
                config.replications,
                failure_log
                    .first()
                    .map(|(_, _, e)| e.as_str())
                    .unwrap_or("none")
            ))
        } else {
            None
        };
        if aborted.is_none() {
            for &est in &active {
                let (names, truth): (&[String], &[f64]) = if est.is_garch() {
                    (&zeta_names, &zeta_truth)
                } else {
                    (&lambda_names, &lambda_truth)
                };
                for (j, name) in names.iter().enumerate() {
                    let mut estimates = Vec::new();
                    let mut ads = Vec::new();
                    for out in &successes {
                        for &(e, idx, value, ad) in &out.values {
                            if e == est && idx == j {
                                estimates.push(value);
                                if let Some(ad) = ad {
                                    ads.push(ad);
                                }
                            }
                        }
                    }
                    rows.push(summarize_cell(
                        n, t, est, name, truth[j], &estimates, &ads,
                    ));
                }
            }
        }
        cells.push(CellDiagnostics {
            n,
            t,
            requested: config.replications,
            failures,
            skipped: skipped.clone(),
            failure_log,
            aborted,
        });
    }
    Ok(ExperimentReport {
        rows,
        cells,
        seed: config.seed,
        replications: config.replications,
    })
}

fn summarize_cell(
    n: usize,
    t: usize,
    estimator: EstimatorKind,
    param: &str,
    truth: f64,
    estimates: &[f64],
    ads: &[f64],
) -> SummaryRow {
    let reps = estimates.len();
    let (bias, sd, rmse, mc_se) = if reps == 0 {
        (f64::NAN, f64::NAN, f64::NAN, f64::NAN)
    } else {
        let mean = stats::mean(estimates);
        let sd = stats::sample_sd(estimates);
        let rmse = (estimates
            .iter()
            .map(|e| (e - truth) * (e - truth))
            .sum::<f64>()
            / reps as f64)
            .sqrt();
        (mean - truth, sd, rmse, sd / (reps as f64).sqrt())
    };
    let (mean_ad, sd_ad) = if ads.is_empty() {
        (None, None)
    } else {
        (Some(stats::mean(ads)), Some(stats::sample_sd(ads)))
    };
    SummaryRow {
        n,
        t,
        estimator,
        param: param.to_string(),
        truth,
        replications: reps,
        bias,
        sd,
        rmse,
        mean_ad,
        sd_ad,
        ad_count: ads.len(),
        mc_se,
    }
}

fn run_replication(
    config: &ExperimentConfig,
    orders: &ModelOrders,
    n: usize,
    t: usize,
    active: &[EstimatorKind],
    rep_seed: u64,
) -> Result<RepOutcome> {
    let dgp = config.dgp.draw_effects(n, rep_seed)?;
    let sim = simulate(
        orders,
        &dgp,
        config.dgp.innovation,
        t,
        config.dgp.burn_in,
        rep_seed,
    )?;
    let panel = &sim.panel;
    let fit = fit_arma(panel, orders, &config.fit)?;
    let mut values = Vec::new();

    for &est in active {
        match est {
            EstimatorKind::Ls => {
                record_lambda(&mut values, est, &fit.lambda_flat(), ad_of(&fit));
            }
            EstimatorKind::LsAnalytic => {
                let corr = analytic_correct_arma(
                    panel,
                    &fit,
                    config.bootstrap_reps,
                    derive_key(rep_seed, &[7]),
                )?;
                let ad = lambda_ad_at(panel, orders, &corr, &config.fit);
                record_lambda(&mut values, est, &corr.lambda_flat(), ad);
            }
            EstimatorKind::LsJackknife => {
                let corr = jackknife_arma(panel, &fit, &config.fit)?;
                let ad = lambda_ad_at(panel, orders, &corr, &config.fit);
                record_lambda(&mut values, est, &corr.lambda_flat(), ad);
            }
            EstimatorKind::Vtqml => {
                let garch = fit_garch(&fit.residuals, orders, config.init, &config.fit)?;
                let ad = if config.fit.compute_covariance {
                    covariance_zeta(panel, &fit, &garch)
                        .ok()
                        .map(|c| c.std_errors)
                } else {
                    None
                };
                record_lambda(&mut values, est, &garch.zeta_flat(), ad);
            }
            EstimatorKind::VtqmlJackknife => {
                let corr = jackknife_garch(
                    panel,
                    &fit,
                    ResidualSource::Jackknife,
                    config.init,
                    &config.fit,
                )?;
                let ad = zeta_ad_at(panel, orders, &corr, config.init, &config.fit);
                record_lambda(&mut values, est, &corr.zeta_flat(), ad);
            }
        }
    }
    Ok(RepOutcome { values })
}

fn record_lambda(
    values: &mut Vec<(EstimatorKind, usize, f64, Option<f64>)>,
    est: EstimatorKind,
    flat: &[f64],
    ads: Option<Vec<f64>>,
) {
    for (j, &v) in flat.iter().enumerate() {
        let ad = ads.as_ref().and_then(|a| a.get(j).copied());
        values.push((est, j, v, ad));
    }
}

fn ad_of(fit: &ArmaEstimate) -> Option<Vec<f64>> {
    fit.std_errors().map(|s| s.to_vec())
}

/// Asymptotic SDs evaluated at a corrected first-step estimate: the
/// sandwich is recomputed at the corrected point, mirroring how the
/// corrected estimator would be reported in practice.
fn lambda_ad_at(
    panel: &PanelData,
    orders: &ModelOrders,
    corr: &BiasCorrection,
    opts: &FitOptions,
) -> Option<Vec<f64>> {
    if !opts.compute_covariance {
        return None;
    }
    let pseudo = ArmaEstimate {
        orders: *orders,
        params: corr.params.clone(),
        mu: corr.mu.clone(),
        residuals: corr.residuals.clone(),
        objective: f64::NAN,
        converged: true,
        evaluations: 0,
        covariance: None,
    };
    covariance_lambda(panel, &pseudo).ok().map(|c| c.std_errors)
}

/// Two-step sandwich at the corrected pair (lambda_J, zeta_J). Inadmissible
/// corrected coefficients have no defined criterion curvature; those
/// replications contribute no AD.
fn zeta_ad_at(
    panel: &PanelData,
    orders: &ModelOrders,
    corr: &crate::inference::GarchCorrection,
    init: VolatilityInit,
    opts: &FitOptions,
) -> Option<Vec<f64>> {
    if !opts.compute_covariance || corr.zeta.validate().is_err() {
        return None;
    }
    let arma_pseudo = ArmaEstimate {
        orders: *orders,
        params: corr.lambda.params.clone(),
        mu: corr.lambda.mu.clone(),
        residuals: corr.lambda.residuals.clone(),
        objective: f64::NAN,
        converged: true,
        evaluations: 0,
        covariance: None,
    };
    let h = garch_filter(&arma_pseudo.residuals, &corr.zeta, &corr.omega, init).ok()?;
    let loglik = vt_quasi_loglik(&arma_pseudo.residuals, &corr.zeta, &corr.omega, init).ok()?;
    let garch_pseudo = GarchEstimate {
        orders: *orders,
        params: corr.zeta.clone(),
        omega: corr.omega.clone(),
        h,
        loglik,
        init,
        converged: true,
        evaluations: 0,
        at_boundary: false,
        covariance: None,
    };
    covariance_zeta(panel, &arma_pseudo, &garch_pseudo)
        .ok()
        .map(|c| c.std_errors)
}

impl ExperimentReport {
    /// Long-form CSV, one row per (cell, estimator, parameter).
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "n,t,estimator,param,truth,replications,bias,sd,rmse,mean_ad,sd_ad,ad_count,mc_se\n",
        );
        for r in &self.rows {
            let mean_ad = r.mean_ad.map(|v| v.to_string()).unwrap_or_default();
            let sd_ad = r.sd_ad.map(|v| v.to_string()).unwrap_or_default();
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{},{},{}",
                r.n,
                r.t,
                r.estimator.label(),
                r.param,
                r.truth,
                r.replications,
                r.bias,
                r.sd,
                r.rmse,
                mean_ad,
                sd_ad,
                r.ad_count,
                r.mc_se
            );
        }
        out
    }

    fn find(&self, n: usize, t: usize, est: EstimatorKind, param: &str) -> Option<&SummaryRow> {
        self.rows
            .iter()
            .find(|r| r.n == n && r.t == t && r.estimator == est && r.param == param)
    }

    /// Aligned text tables: bias, SD, and SD/AD per cell, parameters as
    /// columns with the correction suffix. Volatility columns at very short
    /// T are rendered blank.
    pub fn render_tables(&self) -> String {
        let mut cells: Vec<(usize, usize)> = self.cells.iter().map(|c| (c.n, c.t)).collect();
        cells.dedup();

        // Column plan: per lambda parameter the raw and corrected variants,
        // then the same for zeta parameters.
        let mut lambda_params: Vec<String> = Vec::new();
        let mut zeta_params: Vec<String> = Vec::new();
        for r in &self.rows {
            let bucket = if r.estimator.is_garch() {
                &mut zeta_params
            } else {
                &mut lambda_params
            };
            if !bucket.contains(&r.param) {
                bucket.push(r.param.clone());
            }
        }
        let mut columns: Vec<(EstimatorKind, String, String)> = Vec::new();
        for p in &lambda_params {
            for est in [
                EstimatorKind::Ls,
                EstimatorKind::LsAnalytic,
                EstimatorKind::LsJackknife,
            ] {
                if self.rows.iter().any(|r| r.estimator == est) {
                    columns.push((est, p.clone(), format!("{p}{}", est.suffix())));
                }
            }
        }
        for p in &zeta_params {
            for est in [EstimatorKind::Vtqml, EstimatorKind::VtqmlJackknife] {
                if self.rows.iter().any(|r| r.estimator == est) {
                    columns.push((est, p.clone(), format!("{p}{}", est.suffix())));
                }
            }
        }

        let mut out = String::new();
        for (title, field) in [
            ("bias", 0usize),
            ("SD", 1),
            ("SD/AD", 2),
        ] {
            let _ = writeln!(out, "{title}");
            let _ = write!(out, "{:>5} {:>5}", "N", "T");
            for (_, _, header) in &columns {
                let _ = write!(out, " {header:>9}");
            }
            out.push('\n');
            for &(n, t) in &cells {
                let _ = write!(out, "{n:>5} {t:>5}");
                for (est, param, _) in &columns {
                    let cell = self.find(n, t, *est, param);
                    let text = match cell {
                        Some(row) => {
                            let v = match field {
                                0 => Some(row.bias),
                                1 => Some(row.sd),
                                _ => row.sd_over_ad(),
                            };
                            match v {
                                Some(v) if v.is_finite() => format!("{v:>9.4}"),
                                _ => format!("{:>9}", "."),
                            }
                        }
                        None => format!("{:>9}", "."),
                    };
                    out.push(' ');
                    out.push_str(&text);
                }
                out.push('\n');
            }
            out.push('\n');
        }
        for c in &self.cells {
            if let Some(reason) = &c.aborted {
                let _ = writeln!(out, "cell ({}, {}) aborted: {reason}", c.n, c.t);
            }
            if c.failures > 0 && c.aborted.is_none() {
                let _ = writeln!(
                    out,
                    "cell ({}, {}): {} of {} replications failed and were excluded",
                    c.n, c.t, c.failures, c.requested
                );
            }
            if !c.skipped.is_empty() {
                let labels: Vec<&str> = c.skipped.iter().map(|e| e.label()).collect();
                let _ = writeln!(
                    out,
                    "cell ({}, {}): skipped {} (T below {GARCH_MIN_T})",
                    c.n,
                    c.t,
                    labels.join(", ")
                );
            }
        }
        out
    }
}
