//! Resilience-angle calculator and empirical estimates of the constants it needs.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{mean_of, GradVector};

/// Resilience angle `α` (radians) of the filtered rule, from
///
/// ```text
/// sin α = √(2(n − f)·dσ² / k) · (V / V′)^¼ / ‖∇F‖
/// ```
///
/// Fails when `sin α ≥ 1`, i.e. when the variance term is not dominated by the
/// true gradient norm.
#[allow(clippy::too_many_arguments)]
pub fn theoretical_alpha(
    n: usize,
    f: usize,
    k: usize,
    d_sigma2: f64,
    v_hat: f64,
    vprime_hat: f64,
    grad_norm: f64,
) -> Result<f64> {
    if n <= 2 * f {
        return Err(Error::BreakdownPoint { n, f });
    }
    if k == 0 {
        return Err(Error::domain("k must be at least 1"));
    }
    if !(vprime_hat > 0.0) {
        return Err(Error::domain("V' must be positive"));
    }
    if !(grad_norm > 0.0) {
        return Err(Error::domain("gradient norm must be positive"));
    }
    if !(d_sigma2 >= 0.0) || !(v_hat >= 0.0) {
        return Err(Error::domain("variance and V must be nonnegative"));
    }
    let sin_alpha = (2.0 * (n - f) as f64 * d_sigma2 / k as f64).sqrt()
        * (v_hat / vprime_hat).powf(0.25)
        / grad_norm;
    if !(sin_alpha < 1.0) {
        return Err(Error::ResilienceViolated { sin_alpha });
    }
    Ok(sin_alpha.asin())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AssumptionEstimates {
    /// Mean squared deviation of worker gradients from their sample mean.
    pub d_sigma2: f64,
    /// Largest squared norm over worker and validation gradients.
    pub v_hat: f64,
    /// Smallest squared norm over validation gradients.
    pub vprime_hat: f64,
    /// Largest observed `‖∇F(θ₁) − ∇F(θ₂)‖ / ‖θ₁ − θ₂‖`.
    pub l_hat: f64,
}

pub fn estimate_assumption_constants(
    worker_grads: &[GradVector],
    validation_grads: &[GradVector],
    param_grad_pairs: &[(GradVector, GradVector)],
) -> Result<AssumptionEstimates> {
    if worker_grads.len() < 2 {
        return Err(Error::domain("need at least two worker gradient samples"));
    }
    if validation_grads.is_empty() {
        return Err(Error::domain("need at least one validation gradient"));
    }
    if param_grad_pairs.len() < 2 {
        return Err(Error::domain("need at least two (theta, gradient) pairs"));
    }

    let center = mean_of(worker_grads)?;
    let d_sigma2 = worker_grads.iter().map(|g| g.dist_sq(&center)).sum::<f64>()
        / worker_grads.len() as f64;

    let v_hat = worker_grads
        .iter()
        .chain(validation_grads)
        .map(GradVector::norm_sq)
        .fold(0.0, f64::max);
    let vprime_hat = validation_grads
        .iter()
        .map(GradVector::norm_sq)
        .fold(f64::INFINITY, f64::min);

    let mut l_hat: f64 = 0.0;
    for (i, (theta_a, grad_a)) in param_grad_pairs.iter().enumerate() {
        for (theta_b, grad_b) in &param_grad_pairs[i + 1..] {
            let step = theta_a.dist_sq(theta_b).sqrt();
            if step == 0.0 {
                continue;
            }
            l_hat = l_hat.max(grad_a.dist_sq(grad_b).sqrt() / step);
        }
    }

    Ok(AssumptionEstimates {
        d_sigma2,
        v_hat,
        vprime_hat,
        l_hat,
    })
}
