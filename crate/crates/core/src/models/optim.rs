use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::GradVector;

pub const ADAM_BETA1: f64 = 0.9;
pub const ADAM_BETA2: f64 = 0.999;
pub const ADAM_EPSILON: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OptimizerKind {
    Sgd,
    Adam,
}

#[derive(Debug, Clone, PartialEq)]
pub enum OptimizerState {
    Sgd {
        eta: f64,
    },
    Adam {
        eta: f64,
        first_moment: GradVector,
        second_moment: GradVector,
        step: u64,
    },
}

impl OptimizerState {
    pub fn new(kind: OptimizerKind, eta: f64, dim: usize) -> Result<Self> {
        if !(eta > 0.0) || !eta.is_finite() {
            return Err(Error::domain(format!("step size must be positive, got {eta}")));
        }
        Ok(match kind {
            OptimizerKind::Sgd => OptimizerState::Sgd { eta },
            OptimizerKind::Adam => OptimizerState::Adam {
                eta,
                first_moment: GradVector::zeros(dim),
                second_moment: GradVector::zeros(dim),
                step: 0,
            },
        })
    }

    pub fn eta(&self) -> f64 {
        match self {
            OptimizerState::Sgd { eta } | OptimizerState::Adam { eta, .. } => *eta,
        }
    }

    /// Applies one update to `theta` in place.
    pub fn step(&mut self, theta: &mut GradVector, grad: &GradVector) -> Result<()> {
        if theta.dim() != grad.dim() {
            return Err(Error::DimensionMismatch {
                expected: theta.dim(),
                found: grad.dim(),
            });
        }
        match self {
            OptimizerState::Sgd { eta } => theta.axpy(-*eta, grad),
            OptimizerState::Adam {
                eta,
                first_moment,
                second_moment,
                step,
            } => {
                if first_moment.dim() != theta.dim() {
                    return Err(Error::DimensionMismatch {
                        expected: first_moment.dim(),
                        found: theta.dim(),
                    });
                }
                *step += 1;
                let t = *step as i32;
                let c1 = 1.0 - ADAM_BETA1.powi(t);
                let c2 = 1.0 - ADAM_BETA2.powi(t);
                for (((th, g), m), v) in theta
                    .iter_mut()
                    .zip(grad.iter())
                    .zip(first_moment.iter_mut())
                    .zip(second_moment.iter_mut())
                {
                    *m = ADAM_BETA1 * *m + (1.0 - ADAM_BETA1) * g;
                    *v = ADAM_BETA2 * *v + (1.0 - ADAM_BETA2) * g * g;
                    let m_hat = *m / c1;
                    let v_hat = *v / c2;
                    *th -= *eta * m_hat / (v_hat.sqrt() + ADAM_EPSILON);
                }
            }
        }
        Ok(())
    }
}

/// Functional form of [`OptimizerState::step`].
pub fn optimizer_step(
    opt: &OptimizerState,
    theta: &GradVector,
    grad: &GradVector,
) -> Result<(GradVector, OptimizerState)> {
    let mut theta = theta.clone();
    let mut opt = opt.clone();
    opt.step(&mut theta, grad)?;
    Ok((theta, opt))
}
