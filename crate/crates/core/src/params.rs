//! Parameter vectors and the stationarity/invertibility checks that gate
//! every mean-model evaluation.

use crate::error::{Error, Result};
use crate::panel::ModelOrders;
use nalgebra::{Complex, DMatrix};

/// Margin by which characteristic roots must clear the unit circle.
pub const ROOT_MARGIN: f64 = 1e-8;
/// Relative distance below which an AR and an MA root count as common.
pub const COMMON_ROOT_TOL: f64 = 1e-6;
/// Strict upper bound imposed on the GARCH persistence sum.
pub const PERSISTENCE_CAP: f64 = 1.0 - 1e-6;

/// Mean-model parameters lambda = (beta, phi, psi).
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ArmaParams {
    pub beta: Vec<f64>,
    pub phi: Vec<f64>,
    pub psi: Vec<f64>,
}

impl ArmaParams {
    pub fn new(beta: Vec<f64>, phi: Vec<f64>, psi: Vec<f64>) -> Self {
        Self { beta, phi, psi }
    }

    pub fn zeros(orders: &ModelOrders) -> Self {
        Self {
            beta: vec![0.0; orders.d_x],
            phi: vec![0.0; orders.p],
            psi: vec![0.0; orders.q],
        }
    }

    /// Lays (beta, phi, psi) out as one flat vector, the ordering used by the
    /// optimizer and all derivative code.
    pub fn to_flat(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.dim());
        v.extend_from_slice(&self.beta);
        v.extend_from_slice(&self.phi);
        v.extend_from_slice(&self.psi);
        v
    }

    pub fn from_flat(orders: &ModelOrders, flat: &[f64]) -> Result<Self> {
        if flat.len() != orders.arma_dim() {
            return Err(Error::DimensionMismatch {
                context: "ArmaParams::from_flat",
                expected: orders.arma_dim().to_string(),
                got: flat.len().to_string(),
            });
        }
        let (b, rest) = flat.split_at(orders.d_x);
        let (p, q) = rest.split_at(orders.p);
        Ok(Self {
            beta: b.to_vec(),
            phi: p.to_vec(),
            psi: q.to_vec(),
        })
    }

    pub fn dim(&self) -> usize {
        self.beta.len() + self.phi.len() + self.psi.len()
    }

    pub fn norm(&self) -> f64 {
        self.to_flat().iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

/// Volatility parameters zeta = (tau, nu) of the variance-targeted GARCH.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct GarchParams {
    pub tau: Vec<f64>,
    pub nu: Vec<f64>,
}

impl GarchParams {
    pub fn new(tau: Vec<f64>, nu: Vec<f64>) -> Self {
        Self { tau, nu }
    }

    pub fn zeros(orders: &ModelOrders) -> Self {
        Self {
            tau: vec![0.0; orders.l],
            nu: vec![0.0; orders.k],
        }
    }

    pub fn to_flat(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.dim());
        v.extend_from_slice(&self.tau);
        v.extend_from_slice(&self.nu);
        v
    }

    pub fn from_flat(orders: &ModelOrders, flat: &[f64]) -> Result<Self> {
        if flat.len() != orders.garch_dim() {
            return Err(Error::DimensionMismatch {
                context: "GarchParams::from_flat",
                expected: orders.garch_dim().to_string(),
                got: flat.len().to_string(),
            });
        }
        let (t, n) = flat.split_at(orders.l);
        Ok(Self {
            tau: t.to_vec(),
            nu: n.to_vec(),
        })
    }

    pub fn dim(&self) -> usize {
        self.tau.len() + self.nu.len()
    }

    /// Sum of all ARCH and GARCH coefficients.
    pub fn persistence(&self) -> f64 {
        self.tau.iter().sum::<f64>() + self.nu.iter().sum::<f64>()
    }

    /// True iff tau, nu are nonnegative and persistence stays below the cap.
    pub fn is_admissible(&self) -> bool {
        self.tau.iter().chain(self.nu.iter()).all(|&v| v >= 0.0 && v.is_finite())
            && self.persistence() <= PERSISTENCE_CAP
    }

    pub fn validate(&self) -> Result<()> {
        if !self.is_admissible() {
            return Err(Error::InvalidParams(format!(
                "GARCH parameters outside the admissible region (tau = {:?}, nu = {:?}, persistence = {:.6})",
                self.tau,
                self.nu,
                self.persistence()
            )));
        }
        Ok(())
    }

    /// Nearest admissible point, componentwise: negatives clip to zero and
    /// the vector rescales when persistence exceeds the cap. Forecast
    /// recursions run on this so corrected estimates always yield positive
    /// variances; estimation and reporting never project.
    pub fn project_admissible(&self) -> Self {
        let clip = |v: &[f64]| -> Vec<f64> {
            v.iter()
                .map(|&c| if c.is_finite() { c.max(0.0) } else { 0.0 })
                .collect()
        };
        let mut out = Self {
            tau: clip(&self.tau),
            nu: clip(&self.nu),
        };
        let persistence = out.persistence();
        if persistence > PERSISTENCE_CAP {
            // Aim slightly inside the cap so rounding in the rescaled sum
            // cannot push the result back over it.
            let scale = (PERSISTENCE_CAP - 1e-12) / persistence;
            for c in out.tau.iter_mut().chain(out.nu.iter_mut()) {
                *c *= scale;
            }
        }
        out
    }
}

/// One violated root condition, reported in z-space where valid roots have
/// |z| > 1.
#[derive(Debug, Clone, PartialEq)]
pub enum RootViolation {
    ArRootInsideMargin(Complex<f64>),
    MaRootInsideMargin(Complex<f64>),
    CommonRoot {
        ar: Complex<f64>,
        ma: Complex<f64>,
    },
    NonFinite,
}

/// Outcome of `validate_arma`: either clean, or the list of offending roots.
#[derive(Debug, Clone)]
pub struct ArmaValidity {
    pub ar_roots: Vec<Complex<f64>>,
    pub ma_roots: Vec<Complex<f64>>,
    pub violations: Vec<RootViolation>,
}

impl ArmaValidity {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Roots (in z) of 1 - c_1 z - ... - c_m z^m, found as reciprocals of the
/// eigenvalues of the companion matrix of the reversed polynomial. Roots at
/// infinity (reciprocal eigenvalue 0) are dropped; they can never violate
/// the unit-circle condition.
fn lag_polynomial_roots(coeffs: &[f64], negate: bool) -> Vec<Complex<f64>> {
    let m = coeffs.len();
    if m == 0 || coeffs.iter().all(|&c| c == 0.0) {
        return Vec::new();
    }
    // Companion matrix of w^m - s*c_1 w^{m-1} - ... - s*c_m, s = +1 for the
    // AR polynomial (1 - sum phi z^p), s = -1 for the MA one (1 + sum psi z^q).
    let sign = if negate { -1.0 } else { 1.0 };
    let mut comp = DMatrix::<f64>::zeros(m, m);
    for j in 0..m {
        comp[(0, j)] = sign * coeffs[j];
    }
    for i in 1..m {
        comp[(i, i - 1)] = 1.0;
    }
    comp.complex_eigenvalues()
        .iter()
        .filter(|w| w.norm() > 1e-300)
        .map(|w| Complex::new(1.0, 0.0) / w)
        .collect()
}

/// Checks stationarity of phi(z), invertibility of psi(z) (both with margin
/// `ROOT_MARGIN`) and absence of near-common roots.
pub fn validate_arma(params: &ArmaParams) -> ArmaValidity {
    if params.to_flat().iter().any(|v| !v.is_finite()) {
        return ArmaValidity {
            ar_roots: Vec::new(),
            ma_roots: Vec::new(),
            violations: vec![RootViolation::NonFinite],
        };
    }
    let ar_roots = lag_polynomial_roots(&params.phi, false);
    let ma_roots = lag_polynomial_roots(&params.psi, true);
    let mut violations = Vec::new();
    let bound = 1.0 + ROOT_MARGIN;
    for &z in &ar_roots {
        if z.norm() <= bound {
            violations.push(RootViolation::ArRootInsideMargin(z));
        }
    }
    for &z in &ma_roots {
        if z.norm() <= bound {
            violations.push(RootViolation::MaRootInsideMargin(z));
        }
    }
    for &za in &ar_roots {
        for &zm in &ma_roots {
            let scale = za.norm().max(zm.norm()).max(1.0);
            if (za - zm).norm() <= COMMON_ROOT_TOL * scale {
                violations.push(RootViolation::CommonRoot { ar: za, ma: zm });
            }
        }
    }
    ArmaValidity {
        ar_roots,
        ma_roots,
        violations,
    }
}
