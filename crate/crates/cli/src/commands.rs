//! Command implementations. Artifacts go to `--output`, human-readable
//! tables to stdout, progress notes to stderr.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use ndarray::Array2;
use panelgarch::{
    analytic_correct_arma, clt_montecarlo, fit_model, fixed_effect_inference, jackknife_arma,
    jackknife_garch, rolling_backtest, run_experiment, simulate, BlockMatrix, ExperimentConfig,
    FitOptions, FixedEffectIntervals, ForecastMethod, ForecastOptions, LqProblem, ModelFit,
    ModelOrders, PanelData, ResidualSource,
};

use crate::config::{
    dgp_from_config, lq_innovation_from_config, parse_estimators, parse_grid, parse_orders,
    require, resolve, volatility_init, FileConfig,
};
use crate::csvio;
use crate::doc::{self, Corrections, LambdaCorrectionDoc, ZetaCorrectionDoc};
use crate::error::{CliError, Result};
use crate::{
    CorrectArgs, FitArgs, ForecastArgs, InferArgs, LqVerifyArgs, MontecarloArgs, SimulateArgs,
};

fn load(path: &Option<PathBuf>) -> Result<FileConfig> {
    match path {
        Some(p) => FileConfig::load(p),
        None => Ok(FileConfig::empty()),
    }
}

fn read_panel_reported(path: &Path) -> Result<PanelData> {
    let panel = csvio::read_panel(path)?;
    eprintln!(
        "panel: {} units x {} periods, {} regressors",
        panel.n_units(),
        panel.n_periods(),
        panel.n_regressors()
    );
    Ok(panel)
}

fn orders_for(panel: &PanelData, text: &str) -> Result<ModelOrders> {
    let (p, q, l, k) = parse_orders(text)?;
    ModelOrders::new(p, q, l, k, panel.n_regressors()).map_err(CliError::from)
}

fn emit_json(document: &doc::ResultDocument, output: Option<&Path>) -> Result<()> {
    let text = doc::to_json(document)?;
    match output {
        Some(path) => {
            std::fs::write(path, text).map_err(|e| CliError::io("writing result", e))?;
            eprintln!("wrote {}", path.display());
            Ok(())
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn checked_level(level: Option<f64>) -> Result<f64> {
    let level = level.unwrap_or(0.95);
    if level > 0.0 && level < 1.0 {
        Ok(level)
    } else {
        Err(CliError::Validation(format!(
            "level must lie in (0, 1), got {level}"
        )))
    }
}

pub fn cmd_simulate(args: &SimulateArgs) -> Result<()> {
    let cfg = load(&args.config)?;
    let seed = resolve(args.seed, &cfg, "seed")?.unwrap_or(0);
    let n = cfg.typed::<usize>("n")?.unwrap_or(50);
    let t = cfg.typed::<usize>("t")?.unwrap_or(100);
    let output = require(resolve(args.output.clone(), &cfg, "output")?, "output")?;

    let spec = dgp_from_config(&cfg)?;
    let orders = spec.orders()?;
    let effects = spec.draw_effects(n, seed)?;
    let sim = simulate(&orders, &effects, spec.innovation, t, spec.burn_in, seed)?;
    csvio::write_panel(&sim.panel, &output)?;
    eprintln!(
        "wrote {} ({n} units x {t} periods, {} regressors, seed {seed})",
        output.display(),
        orders.d_x
    );
    Ok(())
}

pub fn cmd_fit(args: &FitArgs) -> Result<()> {
    let cfg = load(&args.config)?;
    let input = require(resolve(args.input.clone(), &cfg, "input")?, "input")?;
    let orders_text = require(resolve(args.orders.clone(), &cfg, "orders")?, "orders")?;
    let init = volatility_init(resolve(args.c_h, &cfg, "c-h")?)?;
    let output = resolve(args.output.clone(), &cfg, "output")?;

    let panel = read_panel_reported(&input)?;
    let orders = orders_for(&panel, &orders_text)?;
    let fit = fit_model(&panel, &orders, init, &FitOptions::default())?;
    let document = doc::document("fit", None, &panel, &fit, None);
    emit_json(&document, output.as_deref())
}

pub fn cmd_correct(args: &CorrectArgs) -> Result<()> {
    let cfg = load(&args.config)?;
    let input = require(resolve(args.input.clone(), &cfg, "input")?, "input")?;
    let orders_text = require(resolve(args.orders.clone(), &cfg, "orders")?, "orders")?;
    let init = volatility_init(resolve(args.c_h, &cfg, "c-h")?)?;
    let seed = resolve(args.seed, &cfg, "seed")?.unwrap_or(0);
    let bootstrap_reps = cfg.typed::<usize>("bootstrap-reps")?.unwrap_or(100);
    let output = resolve(args.output.clone(), &cfg, "output")?;

    let panel = read_panel_reported(&input)?;
    let orders = orders_for(&panel, &orders_text)?;
    let opts = FitOptions::default();
    let fit = fit_model(&panel, &orders, init, &opts)?;
    let analytic = analytic_correct_arma(&panel, &fit.arma, bootstrap_reps, seed)?;
    let (lambda_jackknife, zeta_jackknife) = if orders.garch_dim() > 0 {
        let garch = jackknife_garch(&panel, &fit.arma, ResidualSource::Jackknife, init, &opts)?;
        (
            LambdaCorrectionDoc::from_core(&garch.lambda),
            Some(ZetaCorrectionDoc::from_core(&garch)),
        )
    } else {
        let jack = jackknife_arma(&panel, &fit.arma, &opts)?;
        (LambdaCorrectionDoc::from_core(&jack), None)
    };
    let corrections = Corrections {
        lambda_analytic: Some(LambdaCorrectionDoc::from_core(&analytic)),
        lambda_jackknife: Some(lambda_jackknife),
        zeta_jackknife,
    };
    let document = doc::document("correct", Some(seed), &panel, &fit, Some(corrections));
    emit_json(&document, output.as_deref())
}

pub fn cmd_infer(args: &InferArgs) -> Result<()> {
    let cfg = load(&args.config)?;
    let input = require(resolve(args.input.clone(), &cfg, "input")?, "input")?;
    let orders_text = require(resolve(args.orders.clone(), &cfg, "orders")?, "orders")?;
    let init = volatility_init(resolve(args.c_h, &cfg, "c-h")?)?;
    let level = checked_level(resolve(args.level, &cfg, "level")?)?;
    let output = resolve(args.output.clone(), &cfg, "output")?;

    let panel = read_panel_reported(&input)?;
    let orders = orders_for(&panel, &orders_text)?;
    let fit = fit_model(&panel, &orders, init, &FitOptions::default())?;
    let mut intervals = Vec::with_capacity(panel.n_units());
    for unit in 0..panel.n_units() {
        intervals.push(fixed_effect_inference(&fit.arma, &fit.garch, unit, level)?);
    }

    print!("{}", render_inference(&panel, &fit, &intervals, level));
    if let Some(path) = output {
        let csv = inference_csv(&panel, &fit, &intervals);
        std::fs::write(&path, csv).map_err(|e| CliError::io("writing inference table", e))?;
        eprintln!("wrote {}", path.display());
    }
    Ok(())
}

fn param_table(fit: &ModelFit) -> Vec<(&'static str, String, f64, Option<f64>)> {
    use panelgarch::mc::{lambda_param_names, zeta_param_names};
    let orders = fit.arma.orders;
    let mut rows = Vec::new();
    let lse = fit.arma.std_errors();
    for (j, name) in lambda_param_names(&orders).into_iter().enumerate() {
        rows.push(("lambda", name, fit.arma.lambda_flat()[j], lse.map(|s| s[j])));
    }
    let zse = fit.garch.std_errors();
    for (j, name) in zeta_param_names(&orders).into_iter().enumerate() {
        rows.push(("zeta", name, fit.garch.zeta_flat()[j], zse.map(|s| s[j])));
    }
    rows
}

fn render_inference(
    panel: &PanelData,
    fit: &ModelFit,
    intervals: &[FixedEffectIntervals],
    level: f64,
) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "common parameters");
    let _ = writeln!(out, "{:<8} {:>12} {:>12}", "param", "estimate", "se");
    for (_, name, estimate, se) in param_table(fit) {
        let se = match se {
            Some(se) => format!("{se:>12.6}"),
            None => format!("{:>12}", "."),
        };
        let _ = writeln!(out, "{name:<8} {estimate:>12.6} {se}");
    }
    let _ = writeln!(out);
    let _ = writeln!(out, "fixed effects ({:.0}% intervals)", level * 100.0);
    let width = panel
        .unit_ids
        .iter()
        .map(String::len)
        .max()
        .unwrap_or(4)
        .max(4);
    let _ = write!(out, "{:<width$}", "unit");
    for head in [
        "mu", "se", "lower", "upper", "omega", "se", "lower", "upper", "varpi", "se", "lower",
        "upper",
    ] {
        let _ = write!(out, " {head:>10}");
    }
    out.push('\n');
    for (i, fe) in intervals.iter().enumerate() {
        let _ = write!(out, "{:<width$}", panel.unit_ids[i]);
        for iv in [&fe.mu, &fe.omega, &fe.varpi] {
            let _ = write!(
                out,
                " {:>10.4} {:>10.4} {:>10.4} {:>10.4}",
                iv.estimate, iv.std_error, iv.lower, iv.upper
            );
        }
        out.push('\n');
    }
    out
}

fn inference_csv(
    panel: &PanelData,
    fit: &ModelFit,
    intervals: &[FixedEffectIntervals],
) -> String {
    let mut out = String::from("kind,name,estimate,std_error,lower,upper\n");
    for (kind, name, estimate, se) in param_table(fit) {
        let se = se.map(|s| format!("{s:?}")).unwrap_or_default();
        let _ = writeln!(out, "{kind},{name},{estimate:?},{se},,");
    }
    for (i, fe) in intervals.iter().enumerate() {
        for (kind, iv) in [("mu", &fe.mu), ("omega", &fe.omega), ("varpi", &fe.varpi)] {
            let _ = writeln!(
                out,
                "{kind},{},{:?},{:?},{:?},{:?}",
                panel.unit_ids[i], iv.estimate, iv.std_error, iv.lower, iv.upper
            );
        }
    }
    out
}

pub fn cmd_forecast(args: &ForecastArgs) -> Result<()> {
    let cfg = load(&args.config)?;
    let input = require(resolve(args.input.clone(), &cfg, "input")?, "input")?;
    let orders_text = require(resolve(args.orders.clone(), &cfg, "orders")?, "orders")?;
    let window = require(resolve(args.window, &cfg, "window")?, "window")?;
    let method_text = resolve(args.method.clone(), &cfg, "method")?
        .unwrap_or_else(|| "panel".to_string());
    let method = ForecastMethod::parse(&method_text)?;
    let level = checked_level(resolve(args.level, &cfg, "level")?)?;
    let fhs_draws = resolve(args.fhs_draws, &cfg, "fhs-draws")?.unwrap_or(10_000);
    let seed = resolve(args.seed, &cfg, "seed")?.unwrap_or(0);
    let workers = resolve(args.threads, &cfg, "threads")?.unwrap_or(0);
    let init = volatility_init(resolve(args.c_h, &cfg, "c-h")?)?;
    let bootstrap_reps = cfg.typed::<usize>("bootstrap-reps")?.unwrap_or(100);
    let output = require(resolve(args.output.clone(), &cfg, "output")?, "output")?;

    let panel = read_panel_reported(&input)?;
    let orders = orders_for(&panel, &orders_text)?;
    let opts = ForecastOptions {
        alpha: 1.0 - level,
        fhs_draws,
        seed,
        bootstrap_reps,
        init,
        workers,
        ..ForecastOptions::default()
    };
    let summary = rolling_backtest(&panel, &orders, window, method, &opts)?;
    for (origin, reason) in &summary.skipped {
        eprintln!("origin t = {}: skipped ({reason})", panel.times[*origin]);
    }

    let mut table = String::from("unit_id,method,window,origins,rmse,hit_rate,lr_cc_stat,lr_cc_pvalue\n");
    for unit in &summary.units {
        let (stat, pval) = match unit.lr_cc {
            Some((s, p)) => (format!("{s:?}"), format!("{p:?}")),
            None => (String::new(), String::new()),
        };
        let _ = writeln!(
            table,
            "{},{},{window},{},{:?},{:?},{stat},{pval}",
            unit.unit_id,
            method.label(),
            unit.hits.len(),
            unit.rmse,
            unit.hit_rate
        );
    }
    std::fs::write(&output, table).map_err(|e| CliError::io("writing backtest summary", e))?;

    let records_path = sibling_records_path(&output);
    let mut records = String::from(
        "unit_id,method,origin_time,target_time,y_actual,y_point,lower,upper,h_forecast,degenerate\n",
    );
    for r in &summary.records {
        let _ = writeln!(
            records,
            "{},{},{},{},{:?},{:?},{:?},{:?},{:?},{}",
            panel.unit_ids[r.unit],
            method.label(),
            panel.times[r.origin],
            panel.times[r.origin + 1],
            r.y_actual,
            r.y_point,
            r.lower,
            r.upper,
            r.h_forecast,
            r.degenerate
        );
    }
    std::fs::write(&records_path, records)
        .map_err(|e| CliError::io("writing forecast records", e))?;
    eprintln!(
        "wrote {} and {} ({} forecasts, {} skipped origins)",
        output.display(),
        records_path.display(),
        summary.records.len(),
        summary.skipped.len()
    );
    Ok(())
}

/// `dir/back.csv` gets its per-forecast file at `dir/back.records.csv`.
fn sibling_records_path(summary: &Path) -> PathBuf {
    match summary.extension().and_then(|e| e.to_str()) {
        Some(ext) => summary.with_extension(format!("records.{ext}")),
        None => summary.with_extension("records"),
    }
}

pub fn cmd_montecarlo(args: &MontecarloArgs) -> Result<()> {
    let cfg = load(&args.config)?;
    let dgp = dgp_from_config(&cfg)?;
    let mut config = ExperimentConfig::new(dgp);
    if let Some(text) = cfg.raw("grid") {
        config.grid = parse_grid(text)?;
    }
    if let Some(reps) = resolve(args.reps, &cfg, "reps")? {
        config.replications = reps;
    }
    config.seed = resolve(args.seed, &cfg, "seed")?.unwrap_or(0);
    config.workers = resolve(args.threads, &cfg, "threads")?.unwrap_or(0);
    if let Some(reps) = cfg.typed::<usize>("bootstrap-reps")? {
        config.bootstrap_reps = reps;
    }
    if let Some(text) = cfg.raw("estimators") {
        config.estimators = parse_estimators(text)?;
    }
    config.init = volatility_init(resolve(args.c_h, &cfg, "c-h")?)?;
    let output = resolve(args.output.clone(), &cfg, "output")?;

    let report = run_experiment(&config)?;
    print!("{}", report.render_tables());
    if let Some(path) = output {
        std::fs::write(&path, report.to_csv())
            .map_err(|e| CliError::io("writing experiment CSV", e))?;
        eprintln!("wrote {}", path.display());
    }
    Ok(())
}

pub fn cmd_lq_verify(args: &LqVerifyArgs) -> Result<()> {
    let cfg = load(&args.config)?;
    let n = cfg.typed::<usize>("n")?.unwrap_or(100);
    let t = cfg.typed::<usize>("t")?.unwrap_or(50);
    let reps = resolve(args.reps, &cfg, "reps")?.unwrap_or(10_000);
    let seed = resolve(args.seed, &cfg, "seed")?.unwrap_or(0);
    let innovation = lq_innovation_from_config(&cfg)?;
    let output = resolve(args.output.clone(), &cfg, "output")?;

    // The within-centering quadratic form, the one the estimator theory
    // rests on.
    let problem = LqProblem::new(
        BlockMatrix::blockwise_centering(n, t),
        Array2::zeros((n, t)),
        innovation,
    )?;
    let report = clt_montecarlo(&problem, reps, seed)?;

    println!("mu_lq,sigma2_lq,mean,variance,skewness,kurtosis,ks_distance");
    println!(
        "{:?},{:?},{:?},{:?},{:?},{:?},{:?}",
        report.mu_lq,
        report.sigma2_lq,
        report.mean,
        report.variance,
        report.skewness,
        report.kurtosis,
        report.ks_distance
    );
    if let Some(path) = output {
        let mut sample = String::from("replication,z\n");
        for (r, z) in report.standardized.iter().enumerate() {
            let _ = writeln!(sample, "{r},{z:?}");
        }
        std::fs::write(&path, sample)
            .map_err(|e| CliError::io("writing standardized sample", e))?;
        eprintln!("wrote {}", path.display());
    }
    Ok(())
}
