//! Limited-memory BFGS with a backtracking Armijo line search.

use alloc::collections::VecDeque;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LbfgsConfig {
    pub max_iter: usize,
    /// Stop once the gradient norm drops to this value.
    pub grad_tol: f64,
    /// Number of correction pairs kept.
    pub memory: usize,
}

impl Default for LbfgsConfig {
    fn default() -> Self {
        Self { max_iter: 500, grad_tol: 1e-6, memory: 10 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LbfgsReport {
    pub iterations: usize,
    /// Loss after each accepted step, starting with the initial loss.
    pub loss_history: Vec<f64>,
    pub grad_norm: f64,
    /// True when the gradient tolerance was reached.
    pub converged: bool,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Minimizes `objective`, which returns the loss and writes the gradient.
pub fn minimize(
    x: &mut [f64],
    cfg: &LbfgsConfig,
    mut objective: impl FnMut(&[f64], &mut [f64]) -> f64,
) -> Result<LbfgsReport> {
    let n = x.len();
    let mut grad = alloc::vec![0.0; n];
    let mut loss = objective(x, &mut grad);
    if !loss.is_finite() {
        return Err(Error::NonFiniteLoss { iteration: 0 });
    }
    let mut history: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::with_capacity(cfg.memory);
    let mut report = LbfgsReport { iterations: 0, loss_history: alloc::vec![loss], grad_norm: 0.0, converged: false };
    let mut trial = alloc::vec![0.0; n];
    let mut trial_grad = alloc::vec![0.0; n];
    let mut direction = alloc::vec![0.0; n];
    let mut alpha = alloc::vec![0.0; cfg.memory.max(1)];

    for iter in 0..cfg.max_iter {
        let gnorm = math::sqrt(dot(&grad, &grad));
        report.grad_norm = gnorm;
        if gnorm <= cfg.grad_tol {
            report.converged = true;
            break;
        }

        // two-loop recursion: direction = -H * grad
        direction.copy_from_slice(&grad);
        for (k, (s, y, rho)) in history.iter().enumerate().rev() {
            let a = rho * dot(s, &direction);
            alpha[k] = a;
            for (d, yi) in direction.iter_mut().zip(y) {
                *d -= a * yi;
            }
        }
        let gamma = match history.back() {
            Some((s, y, _)) => dot(s, y) / dot(y, y),
            None => 1.0 / gnorm.max(1.0),
        };
        for d in direction.iter_mut() {
            *d *= gamma;
        }
        for (k, (s, y, rho)) in history.iter().enumerate() {
            let b = rho * dot(y, &direction);
            for (d, si) in direction.iter_mut().zip(s) {
                *d += (alpha[k] - b) * si;
            }
        }
        for d in direction.iter_mut() {
            *d = -*d;
        }
        let mut slope = dot(&grad, &direction);
        if slope >= 0.0 {
            // not a descent direction: restart from steepest descent
            history.clear();
            for (d, g) in direction.iter_mut().zip(&grad) {
                *d = -g / gnorm.max(1.0);
            }
            slope = dot(&grad, &direction);
        }

        let mut step = 1.0;
        let mut accepted = false;
        let mut trial_loss = loss;
        for _ in 0..50 {
            for ((t, xi), d) in trial.iter_mut().zip(x.iter()).zip(&direction) {
                *t = xi + step * d;
            }
            trial_loss = objective(&trial, &mut trial_grad);
            if trial_loss.is_nan() {
                return Err(Error::NonFiniteLoss { iteration: iter + 1 });
            }
            if trial_loss.is_finite() && trial_loss <= loss + 1e-4 * step * slope {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted || trial_loss > loss {
            break;
        }

        let s: Vec<f64> = trial.iter().zip(x.iter()).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = trial_grad.iter().zip(&grad).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-12 * math::sqrt(dot(&s, &s) * dot(&y, &y)) {
            if history.len() == cfg.memory.max(1) {
                history.pop_front();
            }
            history.push_back((s, y, 1.0 / sy));
        }
        x.copy_from_slice(&trial);
        grad.copy_from_slice(&trial_grad);
        loss = trial_loss;
        report.loss_history.push(loss);
        report.iterations = iter + 1;
    }
    report.grad_norm = math::sqrt(dot(&grad, &grad));
    report.converged |= report.grad_norm <= cfg.grad_tol;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimizes_rosenbrock() {
        let mut x = [-1.2, 1.0];
        let cfg = LbfgsConfig { max_iter: 500, grad_tol: 1e-10, memory: 6 };
        let report = minimize(&mut x, &cfg, |p, g| {
            let (a, b) = (p[0], p[1]);
            g[0] = -2.0 * (1.0 - a) - 400.0 * a * (b - a * a);
            g[1] = 200.0 * (b - a * a);
            (1.0 - a).powi(2) + 100.0 * (b - a * a).powi(2)
        })
        .unwrap();
        assert!(report.converged);
        assert!((x[0] - 1.0).abs() < 1e-6 && (x[1] - 1.0).abs() < 1e-6);
        assert!(report.loss_history.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn nan_loss_is_reported() {
        let mut x = [1.0];
        let err = minimize(&mut x, &LbfgsConfig::default(), |_, g| {
            g[0] = 1.0;
            f64::NAN
        })
        .unwrap_err();
        assert_eq!(err, Error::NonFiniteLoss { iteration: 0 });
    }
}
