//! Balanced panel container and model order bookkeeping.

use crate::error::{Error, Result};
use ndarray::{Array2, Array3, Axis};

/// Lag orders of the panel ARMA(P,Q)-GARCH(L,K) specification plus the
/// number of exogenous regressors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct ModelOrders {
    /// Autoregressive order P.
    pub p: usize,
    /// Moving-average order Q.
    pub q: usize,
    /// ARCH order L.
    pub l: usize,
    /// GARCH order K.
    pub k: usize,
    /// Number of exogenous regressors D.
    pub d_x: usize,
}

impl ModelOrders {
    pub fn new(p: usize, q: usize, l: usize, k: usize, d_x: usize) -> Result<Self> {
        let orders = Self { p, q, l, k, d_x };
        orders.validate()?;
        Ok(orders)
    }

    pub fn validate(&self) -> Result<()> {
        if self.k >= 1 && self.l == 0 {
            return Err(Error::InvalidOrders(
                "K >= 1 requires L >= 1 (a GARCH term without any ARCH term is unidentified)"
                    .into(),
            ));
        }
        Ok(())
    }

    /// Dimension of the mean-model parameter vector (beta, phi, psi).
    pub fn arma_dim(&self) -> usize {
        self.d_x + self.p + self.q
    }

    /// Dimension of the volatility parameter vector (tau, nu).
    pub fn garch_dim(&self) -> usize {
        self.l + self.k
    }

    /// Minimum number of periods needed to fit anything sensible.
    pub fn min_periods(&self) -> usize {
        self.p.max(self.q).max(self.l).max(self.k) + 2
    }
}

/// A balanced panel: N units observed over the same T consecutive periods.
///
/// `y` is N x T, `x` is N x T x D. Units carry string identifiers in
/// canonical (lexicographic) order; times are consecutive integers.
#[derive(Debug, Clone)]
pub struct PanelData {
    pub unit_ids: Vec<String>,
    pub times: Vec<i64>,
    pub y: Array2<f64>,
    pub x: Array3<f64>,
}

impl PanelData {
    pub fn new(
        unit_ids: Vec<String>,
        times: Vec<i64>,
        y: Array2<f64>,
        x: Array3<f64>,
    ) -> Result<Self> {
        let n = unit_ids.len();
        let t = times.len();
        if y.dim() != (n, t) {
            return Err(Error::DimensionMismatch {
                context: "PanelData::new (y)",
                expected: format!("{n} x {t}"),
                got: format!("{:?}", y.dim()),
            });
        }
        if x.dim().0 != n || x.dim().1 != t {
            return Err(Error::DimensionMismatch {
                context: "PanelData::new (x)",
                expected: format!("{n} x {t} x D"),
                got: format!("{:?}", x.dim()),
            });
        }
        if !times.windows(2).all(|w| w[1] == w[0] + 1) {
            return Err(Error::InvalidParams(
                "panel times must be consecutive integers".into(),
            ));
        }
        Ok(Self {
            unit_ids,
            times,
            y,
            x,
        })
    }

    /// Panel with synthetic unit ids `u000..` and times `1..=t`.
    pub fn from_arrays(y: Array2<f64>, x: Array3<f64>) -> Result<Self> {
        let (n, t) = y.dim();
        let unit_ids = (0..n).map(|i| format!("u{i:03}")).collect();
        let times = (1..=t as i64).collect();
        Self::new(unit_ids, times, y, x)
    }

    pub fn n_units(&self) -> usize {
        self.unit_ids.len()
    }

    pub fn n_periods(&self) -> usize {
        self.times.len()
    }

    pub fn n_regressors(&self) -> usize {
        self.x.dim().2
    }

    /// Checks the panel against the requirements of a fit at `orders`.
    pub fn validate_for(&self, orders: &ModelOrders) -> Result<()> {
        orders.validate()?;
        if self.n_regressors() != orders.d_x {
            return Err(Error::DimensionMismatch {
                context: "validate_for (regressors)",
                expected: orders.d_x.to_string(),
                got: self.n_regressors().to_string(),
            });
        }
        if self.n_periods() < orders.min_periods() {
            return Err(Error::InsufficientData(format!(
                "T = {} but orders require at least {}",
                self.n_periods(),
                orders.min_periods()
            )));
        }
        if self.n_units() == 0 {
            return Err(Error::InsufficientData("panel has no units".into()));
        }
        if self.y.iter().any(|v| !v.is_finite()) || self.x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("panel data".into()));
        }
        Ok(())
    }

    /// Sub-panel over the half-open period range `[start, end)` (0-based
    /// positions). Recursions on the slice restart from zero pre-sample
    /// values; rolling-window fits treat each window this way.
    pub fn time_slice(&self, start: usize, end: usize) -> Result<Self> {
        if start >= end || end > self.n_periods() {
            return Err(Error::InvalidParams(format!(
                "time_slice [{start}, {end}) out of range for T = {}",
                self.n_periods()
            )));
        }
        Ok(Self {
            unit_ids: self.unit_ids.clone(),
            times: self.times[start..end].to_vec(),
            y: self.y.slice(ndarray::s![.., start..end]).to_owned(),
            x: self.x.slice(ndarray::s![.., start..end, ..]).to_owned(),
        })
    }

    /// Single-unit sub-panel (used by univariate benchmark fits).
    pub fn unit_slice(&self, unit: usize) -> Result<Self> {
        if unit >= self.n_units() {
            return Err(Error::InvalidParams(format!(
                "unit {unit} out of range for N = {}",
                self.n_units()
            )));
        }
        Ok(Self {
            unit_ids: vec![self.unit_ids[unit].clone()],
            times: self.times.clone(),
            y: self
                .y
                .index_axis(Axis(0), unit)
                .to_owned()
                .insert_axis(Axis(0)),
            x: self
                .x
                .index_axis(Axis(0), unit)
                .to_owned()
                .insert_axis(Axis(0)),
        })
    }

    /// Index ranges of the two half panels used by split-sample corrections.
    pub fn half_ranges(&self) -> ((usize, usize), (usize, usize)) {
        let t = self.n_periods();
        let mid = t / 2;
        ((0, mid), (mid, t))
    }
}
