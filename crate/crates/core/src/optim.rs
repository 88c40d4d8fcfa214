//! Derivative-free simplex minimizer (Nelder and Mead, 1965).
//!
//! Constraints are handled by letting the objective return +inf outside the
//! admissible region; infeasible vertices sort worst and the simplex pulls
//! back inside. Deterministic for a fixed starting point, which the
//! reproducibility guarantees of the whole crate rely on.

/// Stopping rules and iteration cap.
#[derive(Debug, Clone, Copy)]
pub struct NelderMead {
    pub max_iters: usize,
    /// Converged when the simplex objective spread falls below
    /// `f_tol_rel * (|f_best| + 1e-300)`.
    pub f_tol_rel: f64,
    /// ... or when the parameter spread falls below this absolute level.
    pub x_tol: f64,
}

impl Default for NelderMead {
    fn default() -> Self {
        Self {
            max_iters: 2000,
            f_tol_rel: 1e-10,
            x_tol: 1e-8,
        }
    }
}

#[derive(Debug, Clone)]
pub struct OptimResult {
    pub x: Vec<f64>,
    pub f: f64,
    pub iterations: usize,
    pub converged: bool,
    pub evaluations: usize,
}

impl NelderMead {
    /// Minimizes `f` starting from `x0` with per-coordinate initial steps.
    /// `x0` must be feasible (finite objective).
    pub fn minimize<F: FnMut(&[f64]) -> f64>(
        &self,
        mut f: F,
        x0: &[f64],
        step: &[f64],
    ) -> OptimResult {
        let dim = x0.len();
        assert_eq!(step.len(), dim, "step size per coordinate");
        if dim == 0 {
            let fv = f(x0);
            return OptimResult {
                x: Vec::new(),
                f: fv,
                iterations: 0,
                converged: true,
                evaluations: 1,
            };
        }

        let mut evals = 0usize;
        let eval = |x: &[f64], f: &mut F, evals: &mut usize| -> f64 {
            *evals += 1;
            let v = f(x);
            if v.is_nan() {
                f64::INFINITY
            } else {
                v
            }
        };

        let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(dim + 1);
        simplex.push(x0.to_vec());
        for j in 0..dim {
            let mut v = x0.to_vec();
            v[j] += step[j];
            simplex.push(v);
        }
        let mut fvals: Vec<f64> = simplex
            .iter()
            .map(|v| eval(v, &mut f, &mut evals))
            .collect();

        let mut order: Vec<usize> = (0..=dim).collect();
        let sort_order = |order: &mut Vec<usize>, fvals: &[f64]| {
            order.sort_by(|&a, &b| fvals[a].partial_cmp(&fvals[b]).unwrap());
        };
        sort_order(&mut order, &fvals);

        let mut iter = 0usize;
        let mut converged = false;
        while iter < self.max_iters {
            iter += 1;
            let best = order[0];
            let worst = order[dim];
            let second_worst = order[dim - 1];

            let f_spread = fvals[worst] - fvals[best];
            let rel_ok =
                f_spread.is_finite() && f_spread <= self.f_tol_rel * (fvals[best].abs() + 1e-300);
            let mut x_spread = 0.0f64;
            for v in &simplex {
                for j in 0..dim {
                    x_spread = x_spread.max((v[j] - simplex[best][j]).abs());
                }
            }
            if rel_ok || x_spread <= self.x_tol {
                converged = true;
                break;
            }

            // Centroid of all but the worst vertex.
            let mut centroid = vec![0.0; dim];
            for &idx in order.iter().take(dim) {
                for j in 0..dim {
                    centroid[j] += simplex[idx][j];
                }
            }
            for c in &mut centroid {
                *c /= dim as f64;
            }

            let blend = |a: &[f64], b: &[f64], w: f64| -> Vec<f64> {
                a.iter()
                    .zip(b)
                    .map(|(ai, bi)| ai + w * (ai - bi))
                    .collect()
            };

            let reflected = blend(&centroid, &simplex[worst], 1.0);
            let f_r = eval(&reflected, &mut f, &mut evals);

            if f_r < fvals[order[0]] {
                let expanded = blend(&centroid, &simplex[worst], 2.0);
                let f_e = eval(&expanded, &mut f, &mut evals);
                if f_e < f_r {
                    simplex[worst] = expanded;
                    fvals[worst] = f_e;
                } else {
                    simplex[worst] = reflected;
                    fvals[worst] = f_r;
                }
            } else if f_r < fvals[second_worst] {
                simplex[worst] = reflected;
                fvals[worst] = f_r;
            } else {
                let contracted = if f_r < fvals[worst] {
                    blend(&centroid, &simplex[worst], 0.5)
                } else {
                    blend(&centroid, &simplex[worst], -0.5)
                };
                let f_c = eval(&contracted, &mut f, &mut evals);
                if f_c < fvals[worst].min(f_r) {
                    simplex[worst] = contracted;
                    fvals[worst] = f_c;
                } else {
                    // Shrink toward the best vertex.
                    let best_point = simplex[best].clone();
                    for &idx in order.iter().skip(1) {
                        let shrunk: Vec<f64> = simplex[idx]
                            .iter()
                            .zip(&best_point)
                            .map(|(v, b)| b + 0.5 * (v - b))
                            .collect();
                        simplex[idx] = shrunk;
                        fvals[idx] = eval(&simplex[idx], &mut f, &mut evals);
                    }
                }
            }
            sort_order(&mut order, &fvals);
        }

        sort_order(&mut order, &fvals);
        OptimResult {
            x: simplex[order[0]].clone(),
            f: fvals[order[0]],
            iterations: iter,
            converged,
            evaluations: evals,
        }
    }
}
