//! Empirical check of the resilience-angle preconditions at the initial
//! parameters of a configured run.

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::engine::Simulation;
use crate::aggregation::{estimate_assumption_constants, theoretical_alpha, AssumptionEstimates};
use crate::error::{Error, Result};
use crate::models::gradient;
use crate::numerics::{streams, GradVector, RngStream};

/// Mini-batches drawn per honest worker.
pub const PROBE_WORKER_BATCHES: usize = 8;
/// Mini-batches drawn from the validation shard.
pub const PROBE_VALIDATION_BATCHES: usize = 32;
/// Random parameter perturbations used for the Lipschitz estimate.
pub const PROBE_PERTURBATIONS: usize = 4;
const PERTURBATION_STD: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub n: usize,
    pub f: usize,
    pub k: usize,
    pub estimates: AssumptionEstimates,
    /// Norm of the full training-split gradient at the initial parameters.
    pub grad_norm: f64,
    /// Resilience angle in radians, when the bound holds.
    pub alpha: Option<f64>,
    pub sin_alpha: Option<f64>,
    /// Why no angle could be computed.
    pub violation: Option<String>,
}

pub fn probe_assumptions(config: &ExperimentConfig) -> Result<ProbeReport> {
    let sim = Simulation::new(config.clone())?;
    let data = sim.data();
    let model = sim.model();
    let n_b = config.n_b;
    let mut rng = RngStream::new(config.seed, streams::PROBE);

    let mut worker_grads = Vec::new();
    for w in sim.workers().iter().filter(|w| w.honest) {
        for _ in 0..PROBE_WORKER_BATCHES {
            let rows = w.shard.sample_batch(n_b, &mut rng);
            worker_grads.push(gradient(model, data, &rows)?);
        }
    }
    let validation_grads = (0..PROBE_VALIDATION_BATCHES)
        .map(|_| {
            let rows = sim.validation_shard().sample_batch(n_b, &mut rng);
            gradient(model, data, &rows)
        })
        .collect::<Result<Vec<_>>>()?;

    let theta0 = model.params().clone();
    let full_grad = gradient(model, data, sim.train_rows())?;
    let grad_norm = full_grad.norm();
    let mut pairs = vec![(theta0.clone(), full_grad)];
    for _ in 0..PROBE_PERTURBATIONS {
        let theta = GradVector::new(
            theta0
                .iter()
                .map(|x| x + PERTURBATION_STD * rng.standard_normal())
                .collect(),
        );
        let g = gradient(&model.with_params(theta.clone())?, data, sim.train_rows())?;
        pairs.push((theta, g));
    }

    let estimates = estimate_assumption_constants(&worker_grads, &validation_grads, &pairs)?;
    let (n, f, k) = (config.n_workers, config.f, config.k);
    let outcome = theoretical_alpha(
        n,
        f,
        k,
        estimates.d_sigma2,
        estimates.v_hat,
        estimates.vprime_hat,
        grad_norm,
    );
    let (alpha, sin_alpha, violation) = match outcome {
        Ok(a) => (Some(a), Some(a.sin()), None),
        Err(Error::ResilienceViolated { sin_alpha }) => (
            None,
            Some(sin_alpha),
            Some(format!("sin(alpha) = {sin_alpha:.6} >= 1: gradient noise dominates the true gradient")),
        ),
        Err(e @ Error::Domain(_)) => (None, None, Some(e.to_string())),
        Err(e) => return Err(e),
    };
    Ok(ProbeReport {
        n,
        f,
        k,
        estimates,
        grad_norm,
        alpha,
        sin_alpha,
        violation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aggregation::Gar;

    #[test]
    fn probe_reports_consistent_constants() {
        let mut cfg = ExperimentConfig::blobs_default(5, 1, 2, 1, Gar::Dstar);
        cfg.dataset = super::super::config::DatasetSpec::Blobs {
            n: 600,
            p: 4,
            classes: 2,
            separation: 4.0,
        };
        let r = probe_assumptions(&cfg).unwrap();
        assert!(r.estimates.vprime_hat > 0.0);
        assert!(r.estimates.vprime_hat <= r.estimates.v_hat);
        assert!(r.estimates.l_hat > 0.0);
        assert!(r.grad_norm > 0.0);
        assert!(r.alpha.is_some() != r.violation.is_some());
        assert_eq!(probe_assumptions(&cfg).unwrap(), r);
    }
}
