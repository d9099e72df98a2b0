use std::collections::VecDeque;

use super::Minimum;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LbfgsOptions {
    pub max_iter: usize,
    pub memory: usize,
    /// Central-difference step for the numerical gradient.
    pub fd_step: f64,
    pub g_tol: f64,
    pub f_tol: f64,
}

impl Default for LbfgsOptions {
    fn default() -> Self {
        Self { max_iter: 200, memory: 10, fd_step: 1e-6, g_tol: 1e-8, f_tol: 1e-12 }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Quasi-Newton minimization with central-difference gradients and Armijo backtracking.
pub fn lbfgs(mut f: impl FnMut(&[f64]) -> f64, x0: &[f64], opts: &LbfgsOptions) -> Minimum {
    let n = x0.len();
    let mut evals = 0usize;
    let mut value = |x: &[f64], evals: &mut usize| {
        *evals += 1;
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    let grad = |x: &[f64], evals: &mut usize, value: &mut dyn FnMut(&[f64], &mut usize) -> f64| {
        let mut g = vec![0.0; n];
        let mut y = x.to_vec();
        for i in 0..n {
            y[i] = x[i] + opts.fd_step;
            let up = value(&y, evals);
            y[i] = x[i] - opts.fd_step;
            let down = value(&y, evals);
            y[i] = x[i];
            g[i] = (up - down) / (2.0 * opts.fd_step);
        }
        g
    };

    let mut x = x0.to_vec();
    let mut fx = value(&x, &mut evals);
    let mut g = grad(&x, &mut evals, &mut value);
    let mut history: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::new();
    let mut trace = vec![fx];
    let mut iterations = 0;
    let mut converged = false;
    while iterations < opts.max_iter {
        if !fx.is_finite() || g.iter().any(|v| !v.is_finite()) {
            break;
        }
        if dot(&g, &g).sqrt() < opts.g_tol {
            converged = true;
            break;
        }
        iterations += 1;
        // Two-loop recursion for the search direction.
        let mut q = g.clone();
        let mut alphas = Vec::with_capacity(history.len());
        for (s, y, rho) in history.iter().rev() {
            let a = rho * dot(s, &q);
            q.iter_mut().zip(y).for_each(|(qi, yi)| *qi -= a * yi);
            alphas.push(a);
        }
        if let Some((s, y, _)) = history.back() {
            let scale = dot(s, y) / dot(y, y);
            q.iter_mut().for_each(|qi| *qi *= scale);
        }
        for ((s, y, rho), a) in history.iter().zip(alphas.iter().rev()) {
            let b = rho * dot(y, &q);
            q.iter_mut().zip(s).for_each(|(qi, si)| *qi += (a - b) * si);
        }
        if history.is_empty() {
            // Unit-length first step along the steepest descent.
            let norm = dot(&q, &q).sqrt().max(1.0);
            q.iter_mut().for_each(|qi| *qi /= norm);
        }
        let mut dir: Vec<f64> = q.iter().map(|v| -v).collect();
        let mut slope = dot(&g, &dir);
        if slope >= 0.0 {
            history.clear();
            let norm = dot(&g, &g).sqrt().max(1.0);
            dir = g.iter().map(|v| -v / norm).collect();
            slope = dot(&g, &dir);
        }
        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..40 {
            let xn: Vec<f64> = x.iter().zip(&dir).map(|(xi, di)| xi + step * di).collect();
            let fxn = value(&xn, &mut evals);
            if fxn <= fx + 1e-4 * step * slope {
                accepted = Some((xn, fxn));
                break;
            }
            step *= 0.5;
        }
        let Some((xn, fxn)) = accepted else {
            converged = true;
            break;
        };
        let gn = grad(&xn, &mut evals, &mut value);
        let s: Vec<f64> = xn.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = gn.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-10 * dot(&s, &s).sqrt() * dot(&y, &y).sqrt() {
            if history.len() == opts.memory {
                history.pop_front();
            }
            history.push_back((s, y, 1.0 / sy));
        } else {
            history.clear();
        }
        let improvement = fx - fxn;
        x = xn;
        fx = fxn;
        g = gn;
        trace.push(fx);
        if improvement.abs() <= opts.f_tol * (1.0 + fx.abs()) {
            converged = true;
            break;
        }
    }
    Minimum { x, value: fx, iterations, evaluations: evals, converged, trace }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimizes_rosenbrock() {
        let rosen = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let m = lbfgs(rosen, &[-1.2, 1.0], &LbfgsOptions { max_iter: 500, ..Default::default() });
        assert!(m.value < 1e-8, "value {}", m.value);
        assert!(m.trace.windows(2).all(|w| w[1] <= w[0]));
    }
}
