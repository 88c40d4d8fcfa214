//! Panel simulator for the ARMA-GARCH data generating process.
//!
//! Each unit evolves on its own substream, so generation is reproducible and
//! embarrassingly parallel in the replication dimension. The volatility
//! recursion starts at the unconditional variance and a burn-in window brings
//! the joint (y, u, h) state to stationarity before the sample is kept.

use crate::error::{Error, Result};
use crate::filter::PreSample;
use crate::panel::{ModelOrders, PanelData};
use crate::params::{ArmaParams, GarchParams};
use crate::seeding::substream;
use ndarray::{Array2, Array3};
use rand::Rng;
use rand_distr::{Distribution, Normal, StudentT};

/// Innovation law for the standardized errors (mean zero, variance one).
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub enum Innovation {
    Normal,
    /// Student-t rescaled to unit variance; requires df > 4 so that the
    /// fourth moments used by the inference formulas exist.
    StudentT { df: f64 },
}

impl Innovation {
    pub fn validate(&self) -> Result<()> {
        if let Innovation::StudentT { df } = self {
            if !(*df > 4.0) {
                return Err(Error::InvalidParams(format!(
                    "Student-t innovations need df > 4 for finite fourth moments, got {df}"
                )));
            }
        }
        Ok(())
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        match self {
            Innovation::Normal => Normal::new(0.0, 1.0).unwrap().sample(rng),
            Innovation::StudentT { df } => {
                let t = StudentT::new(*df).unwrap().sample(rng);
                t * ((df - 2.0) / df).sqrt()
            }
        }
    }
}

/// Complete parameterization of the generating process.
#[derive(Debug, Clone)]
pub struct DgpParams {
    /// Unit fixed effects in the mean, length N.
    pub mu: Vec<f64>,
    pub arma: ArmaParams,
    /// Unconditional error variances per unit, length N.
    pub omega: Vec<f64>,
    pub garch: GarchParams,
}

/// Simulator output: the observable panel plus the latent errors, variances
/// and the pre-sample tails immediately before the first kept period.
#[derive(Debug, Clone)]
pub struct SimulatedPanel {
    pub panel: PanelData,
    pub u: Array2<f64>,
    pub h: Array2<f64>,
    pub presample: PreSample,
}

/// Simulates an N x T panel. Regressors (when the DGP has any) are i.i.d.
/// standard normal on a separate substream per unit. `burn_in = 0` starts
/// the recursions exactly at zero pre-sample values, matching the feasible
/// filters; positive burn-in yields a draw from the stationary process.
pub fn simulate(
    orders: &ModelOrders,
    dgp: &DgpParams,
    innovation: Innovation,
    n_periods: usize,
    burn_in: usize,
    seed: u64,
) -> Result<SimulatedPanel> {
    let law = vec![(0.0, 1.0); orders.d_x];
    simulate_with_x_law(orders, dgp, innovation, &law, n_periods, burn_in, seed)
}

/// Same generator with i.i.d. normal regressors of given per-dimension mean
/// and standard deviation. The score bootstrap matches these to the observed
/// regressor moments so the simulated design carries the same scale.
pub fn simulate_with_x_law(
    orders: &ModelOrders,
    dgp: &DgpParams,
    innovation: Innovation,
    x_law: &[(f64, f64)],
    n_periods: usize,
    burn_in: usize,
    seed: u64,
) -> Result<SimulatedPanel> {
    orders.validate()?;
    innovation.validate()?;
    dgp.garch.validate()?;
    let n = dgp.mu.len();
    if dgp.omega.len() != n {
        return Err(Error::DimensionMismatch {
            context: "simulate (omega)",
            expected: n.to_string(),
            got: dgp.omega.len().to_string(),
        });
    }
    if dgp.arma.beta.len() != orders.d_x
        || dgp.arma.phi.len() != orders.p
        || dgp.arma.psi.len() != orders.q
    {
        return Err(Error::DimensionMismatch {
            context: "simulate (arma)",
            expected: format!("beta {}, phi {}, psi {}", orders.d_x, orders.p, orders.q),
            got: format!(
                "beta {}, phi {}, psi {}",
                dgp.arma.beta.len(),
                dgp.arma.phi.len(),
                dgp.arma.psi.len()
            ),
        });
    }
    if let Some(&w) = dgp.omega.iter().find(|&&w| !(w > 0.0)) {
        return Err(Error::InvalidParams(format!(
            "simulate needs positive omega, got {w}"
        )));
    }
    if x_law.len() != orders.d_x {
        return Err(Error::DimensionMismatch {
            context: "simulate (x law)",
            expected: orders.d_x.to_string(),
            got: x_law.len().to_string(),
        });
    }
    if let Some(&(_, s)) = x_law.iter().find(|&&(_, s)| !(s >= 0.0) || !s.is_finite()) {
        return Err(Error::InvalidParams(format!(
            "regressor law needs finite sd >= 0, got {s}"
        )));
    }
    if !crate::params::validate_arma(&dgp.arma).is_valid() {
        return Err(Error::InvalidParams(
            "simulate called with non-stationary or non-invertible ARMA parameters".into(),
        ));
    }

    let total = burn_in + n_periods;
    let mut y = Array2::zeros((n, n_periods));
    let mut x = Array3::zeros((n, n_periods, orders.d_x));
    let mut u_out = Array2::zeros((n, n_periods));
    let mut h_out = Array2::zeros((n, n_periods));
    let mut pre = PreSample::zeros(n, orders.p, orders.q);

    let varpi_factor = 1.0 - dgp.garch.persistence();
    for i in 0..n {
        let mut rng_eps = substream(seed, &[i as u64, 0]);
        let mut rng_x = substream(seed, &[i as u64, 1]);
        let omega_i = dgp.omega[i];
        let varpi = omega_i * varpi_factor;
        let mut ys = vec![0.0; total];
        let mut us = vec![0.0; total];
        let mut hs = vec![0.0; total];
        let mut xs = vec![0.0; total * orders.d_x];
        for t in 0..total {
            let mut h = varpi;
            for (lag, tau) in dgp.garch.tau.iter().enumerate() {
                let off = lag + 1;
                let usq = if t >= off { us[t - off] * us[t - off] } else { 0.0 };
                h += tau * usq;
            }
            for (lag, nu) in dgp.garch.nu.iter().enumerate() {
                let off = lag + 1;
                let hlag = if t >= off { hs[t - off] } else { omega_i };
                h += nu * hlag;
            }
            hs[t] = h;
            let eps = innovation.sample(&mut rng_eps);
            us[t] = h.sqrt() * eps;
            let mut mean = dgp.mu[i];
            for (d, &(xm, xsd)) in x_law.iter().enumerate() {
                let z: f64 = Normal::new(0.0, 1.0).unwrap().sample(&mut rng_x);
                let xv = xm + xsd * z;
                xs[t * orders.d_x + d] = xv;
                mean += dgp.arma.beta[d] * xv;
            }
            for (lag, phi) in dgp.arma.phi.iter().enumerate() {
                let off = lag + 1;
                if t >= off {
                    mean += phi * ys[t - off];
                }
            }
            for (lag, psi) in dgp.arma.psi.iter().enumerate() {
                let off = lag + 1;
                if t >= off {
                    mean += psi * us[t - off];
                }
            }
            ys[t] = mean + us[t];
        }
        for t in 0..n_periods {
            y[[i, t]] = ys[burn_in + t];
            u_out[[i, t]] = us[burn_in + t];
            h_out[[i, t]] = hs[burn_in + t];
            for d in 0..orders.d_x {
                x[[i, t, d]] = xs[(burn_in + t) * orders.d_x + d];
            }
        }
        for j in 1..=orders.p {
            pre.y[[i, orders.p - j]] = if burn_in >= j { ys[burn_in - j] } else { 0.0 };
        }
        for j in 1..=orders.q {
            pre.u[[i, orders.q - j]] = if burn_in >= j { us[burn_in - j] } else { 0.0 };
        }
    }

    Ok(SimulatedPanel {
        panel: PanelData::from_arrays(y, x)?,
        u: u_out,
        h: h_out,
        presample: pre,
    })
}
