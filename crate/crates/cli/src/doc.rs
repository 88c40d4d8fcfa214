//! Self-describing result document for `fit` and `correct`. Floats are
//! written with 17 significant digits, enough to reconstruct every f64
//! exactly, so the document round-trips bit for bit.

use std::io;

use panelgarch::mc::{lambda_param_names, zeta_param_names};
use panelgarch::{BiasCorrection, CorrectionMethod, GarchCorrection, ModelFit, PanelData};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultDocument {
    pub version: String,
    pub command: String,
    /// Master seed of the randomized parts; absent for deterministic runs.
    pub seed: Option<u64>,
    pub orders: OrdersDoc,
    pub n_units: usize,
    pub n_periods: usize,
    pub unit_ids: Vec<String>,
    pub estimates: Estimates,
    pub corrections: Option<Corrections>,
    pub convergence: Convergence,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrdersDoc {
    pub p: usize,
    pub q: usize,
    pub l: usize,
    pub k: usize,
    pub d_x: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamEstimate {
    pub param: String,
    pub estimate: f64,
    pub std_error: Option<f64>,
}

/// Point estimates of both steps. `varpi` holds the implied volatility
/// intercepts omega_i (1 - persistence).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Estimates {
    pub lambda: Vec<ParamEstimate>,
    pub zeta: Vec<ParamEstimate>,
    pub mu: Vec<f64>,
    pub omega: Vec<f64>,
    pub varpi: Vec<f64>,
    pub objective: f64,
    pub loglik: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LambdaCorrectionDoc {
    pub method: String,
    pub lambda: Vec<f64>,
    /// Fixed effects re-concentrated at the corrected point.
    pub mu: Vec<f64>,
    pub halves: Option<Vec<Vec<f64>>>,
    pub c1: Option<Vec<f64>>,
    pub c1_dag: Option<Vec<f64>>,
    pub bias_se: Option<Vec<f64>>,
}

impl LambdaCorrectionDoc {
    pub fn from_core(c: &BiasCorrection) -> Self {
        Self {
            method: match c.method {
                CorrectionMethod::Analytic => "analytic",
                CorrectionMethod::Jackknife => "jackknife",
            }
            .to_string(),
            lambda: c.params.to_flat(),
            mu: c.mu.clone(),
            halves: c.halves.as_ref().map(|h| h.to_vec()),
            c1: c.c1.clone(),
            c1_dag: c.c1_dag.clone(),
            bias_se: c.bias_se.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZetaCorrectionDoc {
    /// Split-panel jackknife arithmetic on the volatility coefficients.
    pub zeta: Vec<f64>,
    /// Full-sample refit on the bias-corrected residuals.
    pub zeta_star: Vec<f64>,
    pub omega: Vec<f64>,
    pub varpi: Vec<f64>,
    pub halves: Vec<Vec<f64>>,
}

impl ZetaCorrectionDoc {
    pub fn from_core(c: &GarchCorrection) -> Self {
        Self {
            zeta: c.zeta.to_flat(),
            zeta_star: c.zeta_star.to_flat(),
            omega: c.omega.clone(),
            varpi: c.varpi.clone(),
            halves: c.halves.to_vec(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Corrections {
    pub lambda_analytic: Option<LambdaCorrectionDoc>,
    pub lambda_jackknife: Option<LambdaCorrectionDoc>,
    pub zeta_jackknife: Option<ZetaCorrectionDoc>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Convergence {
    pub arma_converged: bool,
    pub arma_evaluations: usize,
    pub garch_converged: bool,
    pub garch_evaluations: usize,
    pub at_boundary: bool,
}

pub fn document(
    command: &str,
    seed: Option<u64>,
    panel: &PanelData,
    fit: &ModelFit,
    corrections: Option<Corrections>,
) -> ResultDocument {
    let orders = fit.arma.orders;
    let persistence = fit.garch.params.persistence();
    let lambda = param_rows(
        &lambda_param_names(&orders),
        &fit.arma.lambda_flat(),
        fit.arma.std_errors(),
    );
    let zeta = param_rows(
        &zeta_param_names(&orders),
        &fit.garch.zeta_flat(),
        fit.garch.std_errors(),
    );
    ResultDocument {
        version: env!("CARGO_PKG_VERSION").to_string(),
        command: command.to_string(),
        seed,
        orders: OrdersDoc {
            p: orders.p,
            q: orders.q,
            l: orders.l,
            k: orders.k,
            d_x: orders.d_x,
        },
        n_units: panel.n_units(),
        n_periods: panel.n_periods(),
        unit_ids: panel.unit_ids.clone(),
        estimates: Estimates {
            lambda,
            zeta,
            mu: fit.arma.mu.clone(),
            omega: fit.garch.omega.clone(),
            varpi: fit
                .garch
                .omega
                .iter()
                .map(|w| w * (1.0 - persistence))
                .collect(),
            objective: fit.arma.objective,
            loglik: fit.garch.loglik,
        },
        corrections,
        convergence: Convergence {
            arma_converged: fit.arma.converged,
            arma_evaluations: fit.arma.evaluations,
            garch_converged: fit.garch.converged,
            garch_evaluations: fit.garch.evaluations,
            at_boundary: fit.garch.at_boundary,
        },
    }
}

fn param_rows(names: &[String], values: &[f64], se: Option<&[f64]>) -> Vec<ParamEstimate> {
    names
        .iter()
        .zip(values)
        .enumerate()
        .map(|(j, (name, &estimate))| ParamEstimate {
            param: name.clone(),
            estimate,
            std_error: se.map(|s| s[j]),
        })
        .collect()
}

/// JSON formatter writing every float as `d.dddddddddddddddde<exp>`:
/// 17 significant digits, the minimum that reconstructs any f64 exactly.
struct Digits17;

impl serde_json::ser::Formatter for Digits17 {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        if value.is_finite() {
            write!(writer, "{value:.16e}")
        } else {
            writer.write_all(b"null")
        }
    }

    fn write_f32<W>(&mut self, writer: &mut W, value: f32) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        self.write_f64(writer, value as f64)
    }
}

pub fn to_json(doc: &ResultDocument) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Digits17);
    doc.serialize(&mut ser)
        .map_err(|e| CliError::Numerical(format!("serializing result document: {e}")))?;
    buf.push(b'\n');
    String::from_utf8(buf)
        .map_err(|e| CliError::Numerical(format!("result document is not UTF-8: {e}")))
}

pub fn from_json(text: &str) -> Result<ResultDocument> {
    serde_json::from_str(text)
        .map_err(|e| CliError::Validation(format!("result document: {e}")))
}
