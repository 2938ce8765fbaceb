//! Small shared numerical machinery: golden-section maximization and a
//! bounded damped least-squares (Levenberg-Marquardt) fitter with a numeric
//! Jacobian.
//!
//! The fitter only ever accepts parameter steps that reduce the cost, so the
//! reported residual is monotone in the number of accepted iterations.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Maximize a unimodal function on [a, b] by golden-section search.
/// Returns the abscissa of the maximum to within `tol`.
pub fn golden_section_max(f: &mut dyn FnMut(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let (mut a, mut b) = (a, b);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while b - a > tol {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// Minimize a scalar function on [a, b] (golden section on -f).
pub fn golden_section_min(f: &mut dyn FnMut(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    golden_section_max(&mut |x| -f(x), a, b, tol)
}

#[derive(Debug, Clone)]
pub struct LeastSquaresOptions {
    /// Hard cap on residual-vector evaluations (Jacobian columns included).
    pub max_evaluations: usize,
    /// Cap on accepted LM iterations.
    pub max_iterations: usize,
    /// Relative cost-decrease threshold treated as convergence.
    pub cost_tolerance: f64,
    /// Relative step size used for forward-difference Jacobians.
    pub diff_step: f64,
}

impl Default for LeastSquaresOptions {
    fn default() -> Self {
        LeastSquaresOptions {
            max_evaluations: 10_000,
            max_iterations: 500,
            cost_tolerance: 1e-14,
            diff_step: 1e-7,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LeastSquaresFit {
    pub params: Vec<f64>,
    /// Sum of squared residuals at `params`.
    pub cost: f64,
    pub initial_cost: f64,
    pub evaluations: usize,
    pub iterations: usize,
    pub converged: bool,
}

/// Bounded Levenberg-Marquardt with numeric Jacobian.
///
/// Parameters are scaled by `max(|x0_j|, 1)` so that the difference step and
/// the damping term are meaningful for mixed-magnitude parameter sets.
/// Candidate parameters are clamped to `[lower, upper]` componentwise.
pub fn fit_least_squares(
    residuals: &mut dyn FnMut(&[f64]) -> Vec<f64>,
    x0: &[f64],
    lower: &[f64],
    upper: &[f64],
    opts: &LeastSquaresOptions,
) -> Result<LeastSquaresFit> {
    let n = x0.len();
    if n == 0 {
        return Err(Error::invalid("no parameters to fit"));
    }
    if lower.len() != n || upper.len() != n {
        return Err(Error::invalid("bounds length mismatch"));
    }
    for j in 0..n {
        if lower[j] > upper[j] {
            return Err(Error::invalid(format!("lower bound above upper bound at {j}")));
        }
    }

    let clamp = |x: &mut [f64]| {
        for j in 0..n {
            x[j] = x[j].clamp(lower[j], upper[j]);
        }
    };

    let mut x: Vec<f64> = x0.to_vec();
    clamp(&mut x);
    let scale: Vec<f64> = x.iter().map(|v| v.abs().max(1.0)).collect();

    let mut evaluations = 0usize;
    let mut eval = |p: &[f64], evaluations: &mut usize| -> Vec<f64> {
        *evaluations += 1;
        residuals(p)
    };

    let r0 = eval(&x, &mut evaluations);
    let m = r0.len();
    if m == 0 {
        return Err(Error::invalid("empty residual vector"));
    }
    let cost_of = |r: &[f64]| r.iter().map(|v| v * v).sum::<f64>();
    let mut r = r0;
    let mut cost = cost_of(&r);
    let initial_cost = cost;

    let mut lambda = 1e-3;
    let mut iterations = 0usize;
    let mut converged = false;

    'outer: while iterations < opts.max_iterations {
        if evaluations + n + 1 > opts.max_evaluations {
            break;
        }
        // forward-difference Jacobian
        let mut jac = DMatrix::<f64>::zeros(m, n);
        for j in 0..n {
            let h = opts.diff_step * scale[j];
            let mut xp = x.clone();
            // step inward if at the upper bound
            let h = if xp[j] + h > upper[j] { -h } else { h };
            xp[j] += h;
            if h == 0.0 {
                continue;
            }
            let rp = eval(&xp, &mut evaluations);
            for i in 0..m {
                jac[(i, j)] = (rp[i] - r[i]) / h;
            }
        }
        let rv = DVector::from_column_slice(&r);
        let jtj = jac.transpose() * &jac;
        let jtr = jac.transpose() * rv;

        // gradient-based convergence
        if jtr.amax() < 1e-14 * (1.0 + cost) {
            converged = true;
            break;
        }

        // try damped steps, growing lambda until one is accepted
        let mut accepted = false;
        for _ in 0..25 {
            if evaluations >= opts.max_evaluations {
                break 'outer;
            }
            let mut a = jtj.clone();
            for j in 0..n {
                let d = jtj[(j, j)].max(1e-30);
                a[(j, j)] += lambda * d;
            }
            let delta = match a.lu().solve(&(-&jtr)) {
                Some(d) => d,
                None => {
                    lambda *= 10.0;
                    continue;
                }
            };
            let mut xc: Vec<f64> = (0..n).map(|j| x[j] + delta[j]).collect();
            clamp(&mut xc);
            let rc = eval(&xc, &mut evaluations);
            let cc = cost_of(&rc);
            if cc < cost {
                let rel_drop = (cost - cc) / cost.max(1e-300);
                x = xc;
                r = rc;
                cost = cc;
                lambda = (lambda / 3.0).max(1e-12);
                accepted = true;
                iterations += 1;
                if rel_drop < opts.cost_tolerance || cost == 0.0 {
                    converged = true;
                    break 'outer;
                }
                break;
            }
            lambda *= 10.0;
            if lambda > 1e12 {
                // stuck in a flat or non-descending region
                converged = true;
                break 'outer;
            }
        }
        if !accepted {
            break;
        }
    }

    Ok(LeastSquaresFit { params: x, cost, initial_cost, evaluations, iterations, converged })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_finds_parabola_peak() {
        let x = golden_section_max(&mut |x| -(x - 1.25).powi(2), 0.0, 3.0, 1e-10);
        assert!((x - 1.25).abs() < 1e-8);
    }

    #[test]
    fn lm_solves_linear_problem() {
        // residuals y - (a x + b) over a few points, exact solution a=2, b=-1
        let xs = [0.0, 1.0, 2.0, 3.0];
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 * x - 1.0).collect();
        let mut f = |p: &[f64]| {
            xs.iter().zip(&ys).map(|(x, y)| p[0] * x + p[1] - y).collect::<Vec<_>>()
        };
        let fit = fit_least_squares(
            &mut f,
            &[0.5, 0.0],
            &[-10.0, -10.0],
            &[10.0, 10.0],
            &LeastSquaresOptions::default(),
        )
        .unwrap();
        assert!(fit.converged);
        assert!((fit.params[0] - 2.0).abs() < 1e-8);
        assert!((fit.params[1] + 1.0).abs() < 1e-8);
    }

    #[test]
    fn lm_respects_bounds() {
        // minimum of (x-5)^2 with x clamped to [0, 2]
        let mut f = |p: &[f64]| vec![p[0] - 5.0];
        let fit = fit_least_squares(
            &mut f,
            &[1.0],
            &[0.0],
            &[2.0],
            &LeastSquaresOptions::default(),
        )
        .unwrap();
        assert!((fit.params[0] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn lm_cost_is_monotone() {
        // Rosenbrock-style residuals; check final cost <= initial cost
        let mut f = |p: &[f64]| vec![10.0 * (p[1] - p[0] * p[0]), 1.0 - p[0]];
        let fit = fit_least_squares(
            &mut f,
            &[-1.2, 1.0],
            &[-5.0, -5.0],
            &[5.0, 5.0],
            &LeastSquaresOptions::default(),
        )
        .unwrap();
        assert!(fit.cost <= fit.initial_cost);
        assert!(fit.cost < 1e-10);
    }
}
