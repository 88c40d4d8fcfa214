//! The two feasible recursions everything else is built on.
//!
//! Residuals: u_it = y_it - mu_i - x_it' beta - sum_p phi_p y_{i,t-p}
//!                   - sum_q psi_q u_{i,t-q},
//! volatility: h_it = omega_i (1 - sum tau - sum nu) + sum_l tau_l u_{i,t-l}^2
//!                   + sum_k nu_k h_{i,t-k}.
//!
//! Pre-sample values default to zero for y and u and to a constant for h,
//! which makes both filters exact linear maps of the observed sample. The
//! optional warm start carries true pre-sample tails through; the simulator
//! uses it to expose the truncation error of the zero convention.

use crate::error::{Error, Result};
use crate::panel::PanelData;
use crate::params::{ArmaParams, GarchParams};
use ndarray::Array2;

/// Known pre-sample tails, most recent value last: `y` is N x P with column
/// P-1 holding y_{i,0}, `u` is N x Q with column Q-1 holding u_{i,0}.
#[derive(Debug, Clone)]
pub struct PreSample {
    pub y: Array2<f64>,
    pub u: Array2<f64>,
}

impl PreSample {
    pub fn zeros(n: usize, p: usize, q: usize) -> Self {
        Self {
            y: Array2::zeros((n, p)),
            u: Array2::zeros((n, q)),
        }
    }
}

/// Pre-sample convention for the volatility recursion.
#[derive(Debug, Clone, Copy, PartialEq, Default, serde::Serialize, serde::Deserialize)]
pub enum VolatilityInit {
    /// h_{i,s} = omega_i for s <= 0 (the stationary mean; default).
    #[default]
    UnconditionalVariance,
    /// h_{i,s} = c for s <= 0, c > 0.
    Fixed(f64),
}

impl VolatilityInit {
    pub(crate) fn value_for(&self, omega_i: f64) -> f64 {
        match self {
            VolatilityInit::UnconditionalVariance => omega_i,
            VolatilityInit::Fixed(c) => *c,
        }
    }
}

pub(crate) fn regression_part(panel: &PanelData, beta: &[f64], unit: usize, t: usize) -> f64 {
    let mut acc = 0.0;
    for (d, b) in beta.iter().enumerate() {
        acc += b * panel.x[[unit, t, d]];
    }
    acc
}

/// AR-filtered series v_it = y_it - x_it' beta - sum_p phi_p y_{i,t-p} for a
/// single unit, written into `out` (length T). Pre-sample y values come from
/// `presample` when given, otherwise they are zero.
pub(crate) fn ar_filter_unit(
    panel: &PanelData,
    params: &ArmaParams,
    presample: Option<&PreSample>,
    unit: usize,
    out: &mut [f64],
) {
    let t_len = panel.n_periods();
    let p = params.phi.len();
    for t in 0..t_len {
        let mut v = panel.y[[unit, t]] - regression_part(panel, &params.beta, unit, t);
        for (lag, phi) in params.phi.iter().enumerate() {
            let offset = lag + 1;
            let ylag = if t >= offset {
                panel.y[[unit, t - offset]]
            } else if let Some(pre) = presample {
                // t - offset is -(offset - t); column p-1 is y_{i,0}.
                pre.y[[unit, p - (offset - t)]]
            } else {
                0.0
            };
            v -= phi * ylag;
        }
        out[t] = v;
    }
}

/// MA recursion u_t = v_t - mu - sum_q psi_q u_{t-q} for one unit, in place:
/// `buf` holds v on entry and u on exit.
pub(crate) fn ma_recursion_unit(
    psi: &[f64],
    mu_i: f64,
    presample_u: Option<&[f64]>,
    buf: &mut [f64],
) {
    let q = psi.len();
    for t in 0..buf.len() {
        let mut u = buf[t] - mu_i;
        for (lag, psi_q) in psi.iter().enumerate() {
            let offset = lag + 1;
            if t >= offset {
                u -= psi_q * buf[t - offset];
            } else if let Some(pre) = presample_u {
                u -= psi_q * pre[q - (offset - t)];
            }
        }
        buf[t] = u;
    }
}

/// Feasible residuals for the whole panel at (mu, lambda).
pub fn residual_filter(
    panel: &PanelData,
    params: &ArmaParams,
    mu: &[f64],
    presample: Option<&PreSample>,
) -> Result<Array2<f64>> {
    let n = panel.n_units();
    let t_len = panel.n_periods();
    if mu.len() != n {
        return Err(Error::DimensionMismatch {
            context: "residual_filter (mu)",
            expected: n.to_string(),
            got: mu.len().to_string(),
        });
    }
    if params.beta.len() != panel.n_regressors() {
        return Err(Error::DimensionMismatch {
            context: "residual_filter (beta)",
            expected: panel.n_regressors().to_string(),
            got: params.beta.len().to_string(),
        });
    }
    if let Some(pre) = presample {
        if pre.y.dim() != (n, params.phi.len()) || pre.u.dim() != (n, params.psi.len()) {
            return Err(Error::DimensionMismatch {
                context: "residual_filter (presample)",
                expected: format!("{n} x {} / {n} x {}", params.phi.len(), params.psi.len()),
                got: format!("{:?} / {:?}", pre.y.dim(), pre.u.dim()),
            });
        }
    }
    let mut u = Array2::zeros((n, t_len));
    let mut buf = vec![0.0; t_len];
    for i in 0..n {
        ar_filter_unit(panel, params, presample, i, &mut buf);
        let pre_u = presample.map(|p| p.u.row(i).to_owned());
        ma_recursion_unit(&params.psi, mu[i], pre_u.as_ref().map(|r| r.as_slice().unwrap()), &mut buf);
        u.row_mut(i).iter_mut().zip(&buf).for_each(|(o, &v)| *o = v);
    }
    Ok(u)
}

/// Volatility recursion for one unit; returns h_1..h_T given residuals.
pub(crate) fn garch_filter_unit(
    u: &[f64],
    params: &GarchParams,
    omega_i: f64,
    init: f64,
    out: &mut [f64],
) {
    let varpi = omega_i * (1.0 - params.persistence());
    for t in 0..u.len() {
        let mut h = varpi;
        for (lag, tau) in params.tau.iter().enumerate() {
            let offset = lag + 1;
            let usq = if t >= offset {
                u[t - offset] * u[t - offset]
            } else {
                0.0
            };
            h += tau * usq;
        }
        for (lag, nu) in params.nu.iter().enumerate() {
            let offset = lag + 1;
            let hlag = if t >= offset { out[t - offset] } else { init };
            h += nu * hlag;
        }
        out[t] = h;
    }
}

/// Conditional variances for the whole panel under the variance-targeted
/// parameterization; `omega` holds the per-unit unconditional variances.
pub fn garch_filter(
    u: &Array2<f64>,
    params: &GarchParams,
    omega: &[f64],
    init: VolatilityInit,
) -> Result<Array2<f64>> {
    let (n, t_len) = u.dim();
    if omega.len() != n {
        return Err(Error::DimensionMismatch {
            context: "garch_filter (omega)",
            expected: n.to_string(),
            got: omega.len().to_string(),
        });
    }
    if let Some(&w) = omega.iter().find(|&&w| !(w > 0.0)) {
        return Err(Error::InvalidParams(format!(
            "unconditional variance must be positive, got {w}"
        )));
    }
    if let VolatilityInit::Fixed(c) = init {
        if !(c > 0.0) {
            return Err(Error::InvalidParams(format!(
                "pre-sample variance must be positive, got {c}"
            )));
        }
    }
    let mut h = Array2::zeros((n, t_len));
    let mut buf = vec![0.0; t_len];
    for i in 0..n {
        let row = u.row(i);
        let urow = row.as_slice().unwrap();
        garch_filter_unit(urow, params, omega[i], init.value_for(omega[i]), &mut buf);
        h.row_mut(i).iter_mut().zip(&buf).for_each(|(o, &v)| *o = v);
    }
    Ok(h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::panel::ModelOrders;
    use approx::assert_abs_diff_eq;
    use ndarray::{arr2, Array3};
    use proptest::prelude::*;

    fn panel_from_y(y: Array2<f64>) -> PanelData {
        let (n, t) = y.dim();
        PanelData::from_arrays(y, Array3::zeros((n, t, 0))).unwrap()
    }

    #[test]
    fn ma_recursion_hand_values() {
        // psi = 0.5, y = (1, 1, 1), mu = 0: u = (1, 0.5, 0.75).
        let panel = panel_from_y(arr2(&[[1.0, 1.0, 1.0]]));
        let params = ArmaParams::new(vec![], vec![], vec![0.5]);
        let u = residual_filter(&panel, &params, &[0.0], None).unwrap();
        assert_eq!(u.row(0).to_vec(), vec![1.0, 0.5, 0.75]);
    }

    #[test]
    fn pure_ar_matches_direct_formula() {
        let y = arr2(&[[0.7, -0.3, 1.1, 0.4]]);
        let panel = panel_from_y(y.clone());
        let params = ArmaParams::new(vec![], vec![0.6], vec![]);
        let mu = 0.2;
        let u = residual_filter(&panel, &params, &[mu], None).unwrap();
        assert_abs_diff_eq!(u[[0, 0]], y[[0, 0]] - mu, epsilon = 1e-15);
        for t in 1..4 {
            assert_abs_diff_eq!(
                u[[0, t]],
                y[[0, t]] - mu - 0.6 * y[[0, t - 1]],
                epsilon = 1e-15
            );
        }
    }

    #[test]
    fn warm_start_uses_provided_tails() {
        let panel = panel_from_y(arr2(&[[1.0, 1.0]]));
        let params = ArmaParams::new(vec![], vec![0.5], vec![0.5]);
        let pre = PreSample {
            y: arr2(&[[2.0]]),
            u: arr2(&[[-1.0]]),
        };
        let u = residual_filter(&panel, &params, &[0.0], Some(&pre)).unwrap();
        // t=1: v = 1 - 0.5*2 = 0, u = 0 - 0.5*(-1) = 0.5
        // t=2: v = 1 - 0.5*1 = 0.5, u = 0.5 - 0.5*0.5 = 0.25
        assert_abs_diff_eq!(u[[0, 0]], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(u[[0, 1]], 0.25, epsilon = 1e-15);
    }

    #[test]
    fn garch_filter_hand_values() {
        // omega = 1, tau = 0.2, nu = 0.4, c_h = 1: h_1 = 0.4 + 0.4 = 0.8,
        // h_2 = 0.4 + 0.2 u_1^2 + 0.4 * 0.8.
        let u = arr2(&[[1.0, 1.0]]);
        let params = GarchParams::new(vec![0.2], vec![0.4]);
        let h = garch_filter(&u, &params, &[1.0], VolatilityInit::Fixed(1.0)).unwrap();
        assert_abs_diff_eq!(h[[0, 0]], 0.8, epsilon = 1e-15);
        assert_abs_diff_eq!(h[[0, 1]], 0.92, epsilon = 1e-15);
    }

    #[test]
    fn constant_variance_when_orders_are_null() {
        let u = arr2(&[[0.3, -0.8, 0.1]]);
        let params = GarchParams::new(vec![], vec![]);
        let h = garch_filter(&u, &params, &[2.5], VolatilityInit::UnconditionalVariance).unwrap();
        assert!(h.iter().all(|&v| v == 2.5));
    }

    #[test]
    fn nonpositive_inputs_rejected() {
        let u = arr2(&[[1.0, 1.0]]);
        let params = GarchParams::new(vec![0.2], vec![0.4]);
        assert!(garch_filter(&u, &params, &[0.0], VolatilityInit::Fixed(1.0)).is_err());
        assert!(garch_filter(&u, &params, &[1.0], VolatilityInit::Fixed(0.0)).is_err());
    }

    #[test]
    fn mu_dimension_checked() {
        let panel = panel_from_y(arr2(&[[1.0, 1.0], [0.0, 0.0]]));
        let params = ArmaParams::zeros(&ModelOrders::new(0, 0, 0, 0, 0).unwrap());
        assert!(residual_filter(&panel, &params, &[0.0], None).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        /// Positivity: admissible parameters and positive omega keep h > 0
        /// for arbitrary finite residuals.
        #[test]
        fn volatility_stays_positive(
            tau in 0.0..0.9f64,
            nu_share in 0.0..1.0f64,
            omega in 0.01..10.0f64,
            us in proptest::collection::vec(-50.0..50.0f64, 1..40),
        ) {
            let nu = (0.999 - tau) * nu_share * 0.999;
            let params = GarchParams::new(vec![tau], vec![nu]);
            prop_assume!(params.is_admissible());
            let u = Array2::from_shape_vec((1, us.len()), us).unwrap();
            let h = garch_filter(&u, &params, &[omega], VolatilityInit::UnconditionalVariance).unwrap();
            prop_assert!(h.iter().all(|&v| v > 0.0));
        }

        /// Prefix property: h_1..h_t only depends on u_1..u_{t-1}.
        #[test]
        fn volatility_is_causal(
            us in proptest::collection::vec(-3.0..3.0f64, 6..24),
            bump in 1.0..5.0f64,
        ) {
            let t_len = us.len();
            let params = GarchParams::new(vec![0.25], vec![0.5]);
            let u1 = Array2::from_shape_vec((1, t_len), us.clone()).unwrap();
            let mut us2 = us;
            let cut = t_len / 2;
            for v in &mut us2[cut..] {
                *v += bump;
            }
            let u2 = Array2::from_shape_vec((1, t_len), us2).unwrap();
            let h1 = garch_filter(&u1, &params, &[1.0], VolatilityInit::UnconditionalVariance).unwrap();
            let h2 = garch_filter(&u2, &params, &[1.0], VolatilityInit::UnconditionalVariance).unwrap();
            for t in 0..=cut {
                prop_assert_eq!(h1[[0, t]], h2[[0, t]]);
            }
        }

        /// The residual filter is linear in y: filtering y + c shifts v by
        /// known amounts; here we just check additivity of the full map.
        #[test]
        fn residual_filter_is_linear(
            ya in proptest::collection::vec(-2.0..2.0f64, 8),
            yb in proptest::collection::vec(-2.0..2.0f64, 8),
        ) {
            let params = ArmaParams::new(vec![], vec![0.4], vec![0.3]);
            let mk = |v: &[f64]| panel_from_y(Array2::from_shape_vec((1, 8), v.to_vec()).unwrap());
            let ua = residual_filter(&mk(&ya), &params, &[0.0], None).unwrap();
            let ub = residual_filter(&mk(&yb), &params, &[0.0], None).unwrap();
            let sum: Vec<f64> = ya.iter().zip(&yb).map(|(a, b)| a + b).collect();
            let us = residual_filter(&mk(&sum), &params, &[0.0], None).unwrap();
            for t in 0..8 {
                prop_assert!((us[[0, t]] - ua[[0, t]] - ub[[0, t]]).abs() < 1e-12);
            }
        }
    }
}
