//! Exact-enumeration oracles for the linear-quadratic moments. The laws here
//! have finite support, so E(Z) and Var(Z) can be computed by weighing every
//! path; agreement with the closed-form tables validates each moment channel
//! (squared covariances, third-by-first, squared-by-first, and two-lag
//! moments) without shared code.

mod common;

use ndarray::Array2;
use panelgarch::seeding::substream;
use panelgarch::{
    check_conditions, lq_mean, lq_variance, BlockMatrix, CrossMoments, LaggedMoments,
    LqInnovation, LqProblem, MomentProfile,
};
use rand::RngCore;
use std::collections::BTreeMap;

fn uniform_block(t: usize, seed: u64, path: &[u64]) -> Array2<f64> {
    let mut rng = substream(seed, path);
    Array2::from_shape_fn((t, t), |_| {
        (rng.next_u64() as f64 / u64::MAX as f64) * 2.0 - 1.0
    })
}

fn uniform_b(n: usize, t: usize, seed: u64) -> Array2<f64> {
    let mut rng = substream(seed, &[99]);
    Array2::from_shape_fn((n, t), |_| {
        (rng.next_u64() as f64 / u64::MAX as f64) * 2.0 - 1.0
    })
}

/// Z = sum_{stored blocks} v_i' M_ij v_j + sum_i b_i'v_i, computed with plain
/// loops so the oracle does not reuse the library's evaluation path.
fn manual_value(m: &BlockMatrix, b: &Array2<f64>, v: &Array2<f64>) -> f64 {
    let t = m.n_periods();
    let mut acc = 0.0;
    for (&(i, j), block) in m.iter_blocks() {
        for a in 0..t {
            for c in 0..t {
                acc += v[[i, a]] * block[[a, c]] * v[[j, c]];
            }
        }
    }
    for (bv, vv) in b.iter().zip(v.iter()) {
        acc += bv * vv;
    }
    acc
}

/// Exact mean and variance of Z by enumerating every path of a digit-coded
/// innovation construction. `paths_per_unit` digits per unit, each over
/// `support.len()` outcomes; `decode` maps one unit's digit string to its
/// innovation path v_{i,0..t}.
fn enumerate_exact(
    m: &BlockMatrix,
    b: &Array2<f64>,
    digits_per_unit: usize,
    support_probs: &[f64],
    decode: &dyn Fn(&[usize], &mut [f64]),
) -> (f64, f64) {
    let n = m.n_units();
    let t = m.n_periods();
    let total_digits = n * digits_per_unit;
    let base = support_probs.len();
    let mut digit = vec![0usize; total_digits];
    let mut v = Array2::zeros((n, t));
    let mut mean = 0.0;
    let mut second = 0.0;
    loop {
        let mut prob = 1.0;
        for &d in &digit {
            prob *= support_probs[d];
        }
        for i in 0..n {
            let unit_digits = &digit[i * digits_per_unit..(i + 1) * digits_per_unit];
            decode(unit_digits, v.row_mut(i).into_slice().unwrap());
        }
        let z = manual_value(m, b, &v);
        mean += prob * z;
        second += prob * z * z;

        // Odometer increment.
        let mut pos = 0;
        loop {
            if pos == total_digits {
                return (mean, second - mean * mean);
            }
            digit[pos] += 1;
            if digit[pos] < base {
                break;
            }
            digit[pos] = 0;
            pos += 1;
        }
    }
}

/// One-lag multiplicative construction v_t = e_t w(e_{t-1}) with e on
/// {-1, 2}, P(-1) = 2/3, and w(-1) = 1, w(2) = 1/2. A martingale difference
/// with skewed marginals and every lag table nonzero at gap one:
///   sigma2 = 3/2, E v^3 = 17/12, E v^4 = 33/8,
///   Cov(v_t^2, v_{t-1}^2) = -3/4,    E(v_t^3 v_{t-1}) = -35/36,
///   E(v_t^2 v_{t-1})     = -5/6,     E(v_t^2 v_{t-1} v_{t-2}) = 5/18,
/// and exact zeros at every larger gap.
struct SkewedChain;

impl SkewedChain {
    const E_SUPPORT: [f64; 2] = [-1.0, 2.0];
    const E_PROBS: [f64; 2] = [2.0 / 3.0, 1.0 / 3.0];

    fn w(e: f64) -> f64 {
        if e < 0.0 {
            1.0
        } else {
            0.5
        }
    }

    /// digits = (e_{-1}, e_0, ..., e_{t-1}); path length t.
    fn decode(digits: &[usize], out: &mut [f64]) {
        for (s, slot) in out.iter_mut().enumerate() {
            let e_now = Self::E_SUPPORT[digits[s + 1]];
            let e_prev = Self::E_SUPPORT[digits[s]];
            *slot = e_now * Self::w(e_prev);
        }
    }

    /// Tables padded with exact zeros out to gap 3 so a T = 4 problem is
    /// fully covered and no truncation is reported.
    fn profile(n: usize) -> MomentProfile {
        let table = LaggedMoments {
            varsigma: vec![-0.75, 0.0, 0.0],
            theta: BTreeMap::from([((1, 2), 5.0 / 18.0)]),
            rho: vec![-35.0 / 36.0, 0.0, 0.0],
            pi: vec![-5.0 / 6.0, 0.0, 0.0],
        };
        MomentProfile {
            sigma2: vec![1.5; n],
            third: vec![17.0 / 12.0; n],
            fourth: vec![33.0 / 8.0; n],
            cross: CrossMoments::Lagged(vec![table; n]),
        }
    }
}

/// Placeholder law for problems whose moments come from a hand-built
/// profile; only used to satisfy the constructor.
fn carrier_law() -> LqInnovation {
    LqInnovation::IidNormal { sigma2: 1.0 }
}

#[test]
fn skewed_chain_single_unit_matches_enumeration() {
    let t = 4;
    let mut m = BlockMatrix::new(1, t);
    m.set_block(0, 0, uniform_block(t, 41, &[0])).unwrap();
    let b = uniform_b(1, t, 41);
    let problem = LqProblem::new(m, b, carrier_law()).unwrap();
    let profile = SkewedChain::profile(1);

    let (mean_exact, var_exact) = enumerate_exact(
        &problem.m,
        &problem.b,
        t + 1,
        &SkewedChain::E_PROBS,
        &SkewedChain::decode,
    );
    let mean = lq_mean(&problem, &profile).unwrap();
    let var = lq_variance(&problem, &profile).unwrap();

    assert!(
        (mean - mean_exact).abs() <= 1e-12 * (1.0 + mean_exact.abs()),
        "mean {mean} vs exact {mean_exact}"
    );
    assert!(
        (var.value - var_exact).abs() <= 1e-10 * (1.0 + var_exact.abs()),
        "variance {} vs exact {var_exact}",
        var.value
    );
    assert!(var.truncation.is_none());
}

#[test]
fn skewed_chain_two_units_with_partial_blocks_matches_enumeration() {
    // Off-diagonal storage is deliberately one-sided: block (1, 0) is absent
    // and therefore an exact zero in both the form and the formulas.
    let t = 4;
    let mut m = BlockMatrix::new(2, t);
    m.set_block(0, 0, uniform_block(t, 42, &[0])).unwrap();
    m.set_block(1, 1, uniform_block(t, 42, &[1])).unwrap();
    m.set_block(0, 1, uniform_block(t, 42, &[2])).unwrap();
    let b = uniform_b(2, t, 42);
    let problem = LqProblem::new(m, b, carrier_law()).unwrap();
    let profile = SkewedChain::profile(2);

    let (mean_exact, var_exact) = enumerate_exact(
        &problem.m,
        &problem.b,
        t + 1,
        &SkewedChain::E_PROBS,
        &SkewedChain::decode,
    );
    let mean = lq_mean(&problem, &profile).unwrap();
    let var = lq_variance(&problem, &profile).unwrap();

    assert!(
        (mean - mean_exact).abs() <= 1e-12 * (1.0 + mean_exact.abs()),
        "mean {mean} vs exact {mean_exact}"
    );
    assert!(
        (var.value - var_exact).abs() <= 1e-10 * (1.0 + var_exact.abs()),
        "variance {} vs exact {var_exact}",
        var.value
    );
}

#[test]
fn three_point_iid_matches_enumeration() {
    let (n, t, p) = (2, 3, 0.3);
    let mut m = BlockMatrix::new(n, t);
    for i in 0..n {
        for j in 0..n {
            m.set_block(i, j, uniform_block(t, 77, &[(i * n + j) as u64]))
                .unwrap();
        }
    }
    let b = uniform_b(n, t, 77);
    let problem = LqProblem::new(m, b, LqInnovation::ThreePoint { p }).unwrap();
    let profile = problem.innovation.profile(n, t, 0).unwrap();

    let support_probs = [p, p, 1.0 - 2.0 * p];
    let decode = |digits: &[usize], out: &mut [f64]| {
        for (d, slot) in digits.iter().zip(out.iter_mut()) {
            *slot = [-1.0, 1.0, 0.0][*d];
        }
    };
    let (mean_exact, var_exact) =
        enumerate_exact(&problem.m, &problem.b, t, &support_probs, &decode);
    let mean = lq_mean(&problem, &profile).unwrap();
    let var = lq_variance(&problem, &profile).unwrap();

    assert!(
        (mean - mean_exact).abs() <= 1e-12 * (1.0 + mean_exact.abs()),
        "mean {mean} vs exact {mean_exact}"
    );
    assert!(
        (var.value - var_exact).abs() <= 1e-10 * (1.0 + var_exact.abs()),
        "variance {} vs exact {var_exact}",
        var.value
    );
}

#[test]
fn short_lag_tables_report_truncation_with_a_tail_bound() {
    let t = 12;
    let mut banded = Array2::zeros((t, t));
    for a in 0..t {
        banded[[a, a]] = 1.0;
        if a + 1 < t {
            banded[[a, a + 1]] = 0.4;
            banded[[a + 1, a]] = 0.4;
        }
    }
    let mut m = BlockMatrix::new(1, t);
    m.set_block(0, 0, banded).unwrap();
    let problem = LqProblem::new(m, Array2::zeros((1, t)), carrier_law()).unwrap();

    // Eight geometric entries cover gaps 1..=8 < t - 1 = 11.
    let table = LaggedMoments {
        varsigma: (0..8).map(|g| 0.5 * 0.6f64.powi(g)).collect(),
        theta: BTreeMap::new(),
        rho: Vec::new(),
        pi: Vec::new(),
    };
    let profile = MomentProfile {
        sigma2: vec![1.0],
        third: vec![0.0],
        fourth: vec![3.0],
        cross: CrossMoments::Lagged(vec![table]),
    };
    let var = lq_variance(&problem, &profile).unwrap();
    let trunc = var.truncation.expect("tables shorter than the panel");
    assert_eq!(trunc.first_missing_gap, 9);
    let bound = trunc.tail_bound.expect("geometric tail is extrapolable");
    assert!(bound > 0.0 && bound.is_finite());
}

#[test]
fn condition_report_separates_banded_from_far_mass() {
    let t = 25;
    let problem_near = LqProblem::new(
        BlockMatrix::identity(1, t),
        Array2::zeros((1, t)),
        carrier_law(),
    )
    .unwrap();
    let near = check_conditions(&problem_near);
    assert_eq!(near.chi, 5);
    assert!(near.far_mass == 0.0);
    assert!((near.max_abs_row_sum - 1.0).abs() < 1e-15);
    assert!((near.diag_mean_sq - 1.0).abs() < 1e-15);
    assert!(near.smoothness < 1e-15);

    let mut far_block = Array2::eye(t);
    far_block[[0, 20]] = 0.5;
    let mut m = BlockMatrix::new(1, t);
    m.set_block(0, 0, far_block).unwrap();
    let problem_far = LqProblem::new(m, Array2::zeros((1, t)), carrier_law()).unwrap();
    let far = check_conditions(&problem_far);
    assert!((far.far_mass - 0.25 / t as f64).abs() < 1e-15);
    assert!((far.max_abs_row_sum - 1.5).abs() < 1e-15);
}
