//! Central finite differences for score and curvature plug-ins.
//!
//! Step size is max(1e-5, 1e-5 |x_j|) per coordinate. When an evaluation
//! lands outside the domain (non-finite value, e.g. just past the GARCH
//! positivity boundary) the step is halved a few times before giving up.

use nalgebra::DMatrix;

pub fn fd_step(x: f64) -> f64 {
    1e-5f64.max(1e-5 * x.abs())
}

fn finite_pair<F: FnMut(&[f64]) -> f64>(
    f: &mut F,
    x: &mut [f64],
    j: usize,
    mut h: f64,
) -> Option<(f64, f64, f64)> {
    let xj = x[j];
    for _ in 0..8 {
        x[j] = xj + h;
        let fp = f(x);
        x[j] = xj - h;
        let fm = f(x);
        x[j] = xj;
        if fp.is_finite() && fm.is_finite() {
            return Some((fp, fm, h));
        }
        h *= 0.5;
    }
    x[j] = xj;
    None
}

/// Central-difference gradient; `None` if some coordinate never yields a
/// finite pair of evaluations.
pub fn gradient<F: FnMut(&[f64]) -> f64>(mut f: F, x: &[f64]) -> Option<Vec<f64>> {
    let mut xs = x.to_vec();
    let mut g = vec![0.0; x.len()];
    for j in 0..x.len() {
        let (fp, fm, h) = finite_pair(&mut f, &mut xs, j, fd_step(x[j]))?;
        g[j] = (fp - fm) / (2.0 * h);
    }
    Some(g)
}

/// Central-difference Jacobian of a vector-valued map (rows index outputs).
pub fn jacobian<F: FnMut(&[f64]) -> Vec<f64>>(
    mut f: F,
    x: &[f64],
    dim_out: usize,
) -> Option<DMatrix<f64>> {
    let mut xs = x.to_vec();
    let mut jac = DMatrix::zeros(dim_out, x.len());
    for j in 0..x.len() {
        let xj = xs[j];
        let mut h = fd_step(xj);
        let mut ok = false;
        for _ in 0..8 {
            xs[j] = xj + h;
            let fp = f(&xs);
            xs[j] = xj - h;
            let fm = f(&xs);
            xs[j] = xj;
            if fp.iter().all(|v| v.is_finite()) && fm.iter().all(|v| v.is_finite()) {
                for r in 0..dim_out {
                    jac[(r, j)] = (fp[r] - fm[r]) / (2.0 * h);
                }
                ok = true;
                break;
            }
            h *= 0.5;
        }
        if !ok {
            return None;
        }
    }
    Some(jac)
}

/// Central-difference Hessian, symmetrized.
pub fn hessian<F: FnMut(&[f64]) -> f64>(mut f: F, x: &[f64]) -> Option<DMatrix<f64>> {
    let dim = x.len();
    let mut xs = x.to_vec();
    let f0 = f(&xs);
    if !f0.is_finite() {
        return None;
    }
    let steps: Vec<f64> = x.iter().map(|&v| fd_step(v)).collect();
    let mut h = DMatrix::zeros(dim, dim);
    for j in 0..dim {
        let (fp, fm, hj) = finite_pair(&mut f, &mut xs, j, steps[j])?;
        h[(j, j)] = (fp - 2.0 * f0 + fm) / (hj * hj);
    }
    for j in 0..dim {
        for k in (j + 1)..dim {
            let (hj, hk) = (steps[j], steps[k]);
            let xj = xs[j];
            let xk = xs[k];
            let mut val = None;
            let (mut sj, mut sk) = (hj, hk);
            for _ in 0..8 {
                xs[j] = xj + sj;
                xs[k] = xk + sk;
                let fpp = f(&xs);
                xs[k] = xk - sk;
                let fpm = f(&xs);
                xs[j] = xj - sj;
                let fmm = f(&xs);
                xs[k] = xk + sk;
                let fmp = f(&xs);
                xs[j] = xj;
                xs[k] = xk;
                if [fpp, fpm, fmm, fmp].iter().all(|v| v.is_finite()) {
                    val = Some((fpp - fpm - fmp + fmm) / (4.0 * sj * sk));
                    break;
                }
                sj *= 0.5;
                sk *= 0.5;
            }
            let v = val?;
            h[(j, k)] = v;
            h[(k, j)] = v;
        }
    }
    Some(h)
}

/// Two-norm condition number via SVD.
pub fn condition_number(m: &DMatrix<f64>) -> f64 {
    let svd = m.clone().svd(false, false);
    let max = svd.singular_values.max();
    let min = svd.singular_values.min();
    if min <= 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}
