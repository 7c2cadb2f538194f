//! Levenberg–Marquardt for small dense least-squares problems.

use nalgebra::{DMatrix, DVector};

#[derive(Debug, Clone, Copy)]
pub struct LmOptions {
    pub max_iterations: usize,
    /// Stop when every |gⱼ| ≤ gtol·‖Jⱼ‖·‖r‖, the cosine between residual and column j.
    pub gtol: f64,
    /// Stop when the accepted step is below `xtol·(‖x‖ + xtol)`.
    pub xtol: f64,
}

impl Default for LmOptions {
    fn default() -> Self {
        LmOptions {
            max_iterations: 200,
            gtol: 1e-10,
            xtol: 1e-15,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LmReport {
    pub params: Vec<f64>,
    /// Half the sum of squared residuals at `params`.
    pub cost: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Largest scaled gradient component at the final point.
    pub gradient_measure: f64,
    /// Jacobian at the final point; callers use it for rank checks.
    pub jacobian: DMatrix<f64>,
}

/// Minimizes `½‖r(x)‖²` given a closure that returns the residuals and Jacobian.
pub fn levenberg_marquardt<F>(mut model: F, x0: &[f64], opts: LmOptions) -> LmReport
where
    F: FnMut(&[f64]) -> (DVector<f64>, DMatrix<f64>),
{
    let n = x0.len();
    let mut x = DVector::from_column_slice(x0);
    let (mut r, mut jac) = model(x.as_slice());
    let mut cost = 0.5 * r.norm_squared();
    let mut lambda = 1e-3;
    let mut converged = false;
    let mut iterations = 0;

    let gradient_measure = |r: &DVector<f64>, jac: &DMatrix<f64>| -> f64 {
        let rn = r.norm();
        if rn == 0.0 {
            return 0.0;
        }
        let g = jac.transpose() * r;
        (0..n)
            .map(|j| {
                let cn = jac.column(j).norm();
                if cn == 0.0 {
                    0.0
                } else {
                    g[j].abs() / (cn * rn)
                }
            })
            .fold(0.0, f64::max)
    };

    while iterations < opts.max_iterations {
        if cost == 0.0 || gradient_measure(&r, &jac) <= opts.gtol {
            converged = true;
            break;
        }
        iterations += 1;
        let jtj = jac.transpose() * &jac;
        let g = jac.transpose() * &r;
        let mut accepted = false;
        for _ in 0..60 {
            let mut a = jtj.clone();
            for j in 0..n {
                a[(j, j)] += lambda * jtj[(j, j)].max(1e-300);
            }
            let Some(chol) = a.cholesky() else {
                lambda *= 10.0;
                continue;
            };
            let step = -chol.solve(&g);
            let trial = &x + &step;
            let (rt, jt) = model(trial.as_slice());
            let trial_cost = 0.5 * rt.norm_squared();
            if trial_cost.is_finite() && trial_cost <= cost {
                let small = step.norm() <= opts.xtol * (x.norm() + opts.xtol);
                x = trial;
                r = rt;
                jac = jt;
                let improved = trial_cost < cost;
                cost = trial_cost;
                lambda = (lambda / 3.0).max(1e-15);
                accepted = true;
                if small || !improved {
                    converged = true;
                }
                break;
            }
            lambda *= 4.0;
        }
        if !accepted || converged {
            converged = converged || gradient_measure(&r, &jac) <= opts.gtol;
            break;
        }
    }
    LmReport {
        params: x.as_slice().to_vec(),
        cost,
        iterations,
        converged,
        gradient_measure: gradient_measure(&r, &jac),
        jacobian: jac,
    }
}
