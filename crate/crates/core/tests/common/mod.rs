//! Shared fixtures and dense linear-algebra oracles for the integration
//! tests. The oracles rebuild quantities the library computes by recursion
//! (banded solves, filters) as explicit dense matrices, so agreement is
//! evidence of correctness rather than of shared code.

#![allow(dead_code)]

use nalgebra::DMatrix;
use panelgarch::{ArmaParams, DgpParams, GarchParams, Innovation, ModelOrders, SimulatedPanel};

/// The simulation design used across the test suite: ARMA(1,1)-GARCH(1,1)
/// with one regressor, normal effects in the mean and uniform variance
/// levels.
pub fn benchmark_dgp(n: usize, seed_offset: u64) -> (ModelOrders, DgpParams) {
    let orders = ModelOrders::new(1, 1, 1, 1, 1).unwrap();
    // Deterministic spread of effects; the Monte Carlo harness draws them
    // randomly, tests prefer fixed values.
    let mu: Vec<f64> = (0..n)
        .map(|i| -1.0 + 2.0 * (i as f64 + seed_offset as f64 * 0.1) / n.max(1) as f64)
        .collect();
    let omega: Vec<f64> = (0..n).map(|i| 1.0 + 2.0 * (i as f64 / n.max(1) as f64)).collect();
    let dgp = DgpParams {
        mu,
        arma: ArmaParams::new(vec![3.0], vec![0.3], vec![0.3]),
        omega,
        garch: GarchParams::new(vec![0.2], vec![0.4]),
    };
    (orders, dgp)
}

pub fn simulate_benchmark(n: usize, t: usize, seed: u64) -> (ModelOrders, DgpParams, SimulatedPanel) {
    let (orders, dgp) = benchmark_dgp(n, 0);
    let sim = panelgarch::simulate(&orders, &dgp, Innovation::Normal, t, 300, seed).unwrap();
    (orders, dgp, sim)
}

/// Dense T x T moving-average band matrix B_psi: ones on the diagonal,
/// psi_q on subdiagonal q.
pub fn dense_ma_band(psi: &[f64], t_len: usize) -> DMatrix<f64> {
    let mut b = DMatrix::identity(t_len, t_len);
    for (lag, &p) in psi.iter().enumerate() {
        let off = lag + 1;
        for t in off..t_len {
            b[(t, t - off)] = p;
        }
    }
    b
}

/// Dense Sigma_psi = B B' and its inverse, the error covariance implied by
/// the truncated MA recursion (unit innovation variance).
pub fn dense_sigma_psi(psi: &[f64], t_len: usize) -> (DMatrix<f64>, DMatrix<f64>) {
    let b = dense_ma_band(psi, t_len);
    let sigma = &b * b.transpose();
    let inv = sigma.clone().try_inverse().expect("Sigma_psi is invertible");
    (sigma, inv)
}

/// Concentrated fixed effect via the dense formula
/// (l' Sigma^-1 l)^-1 l' Sigma^-1 v.
pub fn dense_concentrated_mu(psi: &[f64], v: &[f64]) -> f64 {
    let t_len = v.len();
    let (_, inv) = dense_sigma_psi(psi, t_len);
    let ones = DMatrix::from_element(t_len, 1, 1.0);
    let vv = DMatrix::from_column_slice(t_len, 1, v);
    let denom = (ones.transpose() * &inv * &ones)[(0, 0)];
    let num = (ones.transpose() * &inv * &vv)[(0, 0)];
    num / denom
}

/// Dense quadratic form (v - mu l)' Sigma^-1 (v - mu l) at an arbitrary mu.
pub fn dense_unit_objective_at(psi: &[f64], v: &[f64], mu: f64) -> f64 {
    let t_len = v.len();
    let (_, inv) = dense_sigma_psi(psi, t_len);
    let centered = DMatrix::from_iterator(t_len, 1, v.iter().map(|&x| x - mu));
    (centered.transpose() * &inv * &centered)[(0, 0)]
}

/// Dense quadratic-form value of the concentrated objective for one unit:
/// (v - mu l)' Sigma^-1 (v - mu l) at the concentrated mu.
pub fn dense_unit_objective(psi: &[f64], v: &[f64]) -> f64 {
    dense_unit_objective_at(psi, v, dense_concentrated_mu(psi, v))
}
