//! The logical-clock training loop.
//!
//! Each iteration every worker computes a gradient at the current parameters
//! (Byzantine workers substitute the configured attack), draws a response
//! delay, and the server aggregates according to the configured rule. Worker
//! gradients may be computed in parallel; every worker draws only from its own
//! streams and results are gathered in worker-id order, so a run is
//! bit-identical regardless of thread count.

use rayon::prelude::*;

use super::arrivals::{sample_arrivals, Arrival, WorkerSpec};
use super::config::{DatasetSpec, ExperimentConfig};
use super::partition::{partition_data, Partition};
use crate::adversary::honest_stats;
use crate::aggregation::{
    aggregate_sync, collect_fastest_k, combine_thresholds, compute_thresholds, dstar_aggregate,
    FilterThresholds, Gar,
};
use crate::error::{Error, Result};
use crate::models::{
    generate_blobs, gradient, load_idx, loss_and_accuracy, Dataset, ModelKind, ModelShape,
    ModelState, OptimizerState, Shard,
};
use crate::numerics::{coordinate_median, streams, GradVector, RngStream};

/// Fresh validation batches drawn after a zero-norm validation gradient before
/// the run is aborted.
pub const VALIDATION_RETRIES: usize = 3;

#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub t: usize,
    /// Seconds the server waited for gradients this iteration.
    pub wait_time: f64,
    pub cumulative_time: f64,
    /// Full training-split loss on eval iterations, validation-batch loss
    /// otherwise. Always measured after the update.
    pub loss: f64,
    /// Test-split accuracy, present on eval iterations only.
    pub accuracy: Option<f64>,
    pub n_received: usize,
    pub n_accepted: usize,
    pub accepted_ids: Vec<usize>,
    pub rejected_ids: Vec<usize>,
    /// False when nothing was accepted and the parameters were left unchanged.
    pub updated: bool,
}

pub fn build_dataset(config: &ExperimentConfig) -> Result<Dataset> {
    match &config.dataset {
        DatasetSpec::Blobs {
            n,
            p,
            classes,
            separation,
        } => generate_blobs(
            *n,
            *p,
            *classes,
            *separation,
            &mut RngStream::new(config.seed, streams::DATA),
        ),
        DatasetSpec::Idx { images, labels } => load_idx(images, labels),
    }
}

/// Result of one fastest-k filtered collection.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterOutcome {
    /// Mean of the accepted gradients, `None` when nothing passed.
    pub aggregate: Option<GradVector>,
    pub wait_time: f64,
    pub n_received: usize,
    pub accepted_ids: Vec<usize>,
    pub rejected_ids: Vec<usize>,
}

/// Walks `arrivals` in order, filtering `grads[worker_id]` until `k` are
/// accepted or every arrival is processed. The server waits until the last
/// processed arrival.
pub fn filter_phase(
    arrivals: &[Arrival],
    grads: &[GradVector],
    g_v: &GradVector,
    thresholds: &FilterThresholds,
    k: usize,
) -> Result<FilterOutcome> {
    if arrivals.is_empty() {
        return Err(Error::domain("no arrivals to filter"));
    }
    if let Some(a) = arrivals.iter().find(|a| a.worker_id >= grads.len()) {
        return Err(Error::domain(format!("arrival from unknown worker {}", a.worker_id)));
    }
    let collection = collect_fastest_k(arrivals.iter().map(|a| &grads[a.worker_id]), g_v, thresholds, k)?;
    let accepted_ids: Vec<usize> = collection.accepted.iter().map(|&p| arrivals[p].worker_id).collect();
    let rejected_ids = collection.rejected.iter().map(|&p| arrivals[p].worker_id).collect();
    let accepted: Vec<GradVector> = accepted_ids.iter().map(|&id| grads[id].clone()).collect();
    let aggregate = match dstar_aggregate(&accepted) {
        Ok(g) => Some(g),
        Err(Error::NoneAccepted) => None,
        Err(e) => return Err(e),
    };
    Ok(FilterOutcome {
        aggregate,
        wait_time: arrivals[collection.processed - 1].arrival_time,
        n_received: collection.processed,
        accepted_ids,
        rejected_ids,
    })
}

pub struct Simulation {
    config: ExperimentConfig,
    data: Dataset,
    workers: Vec<WorkerSpec>,
    validation: Shard,
    test: Shard,
    train_rows: Vec<usize>,
    batch_rngs: Vec<RngStream>,
    delay_rngs: Vec<RngStream>,
    validation_rng: RngStream,
    model: ModelState,
    optimizer: OptimizerState,
    warmup_rounds: Vec<FilterThresholds>,
    thresholds: Option<FilterThresholds>,
    cumulative_time: f64,
    next_t: usize,
}

impl Simulation {
    pub fn new(config: ExperimentConfig) -> Result<Self> {
        config.validate()?;
        let data = build_dataset(&config)?;
        let partition = partition_data(
            &data,
            config.n_workers,
            config.val_frac,
            config.test_frac,
            &mut RngStream::new(config.seed, streams::PARTITION),
        )?;
        Self::from_parts(config, data, partition)
    }

    /// Builds a simulation over an explicit data split. Worker `i` gets
    /// `partition.shards[i]`; the last `f` workers are Byzantine.
    pub fn from_parts(config: ExperimentConfig, data: Dataset, partition: Partition) -> Result<Self> {
        config.validate()?;
        let n = config.n_workers;
        if partition.shards.len() != n {
            return Err(Error::domain(format!(
                "{} shards for {n} workers",
                partition.shards.len()
            )));
        }
        if partition.shards.iter().chain([&partition.validation, &partition.test]).any(Shard::is_empty) {
            return Err(Error::domain("every shard must be nonempty"));
        }

        let honest_count = n - config.f;
        let workers: Vec<WorkerSpec> = partition
            .shards
            .into_iter()
            .enumerate()
            .map(|(id, shard)| {
                let honest = id < honest_count;
                WorkerSpec {
                    id,
                    honest,
                    delay_scale: if honest {
                        config.delay_scale_honest
                    } else {
                        config.delay_scale_byz
                    },
                    shard,
                }
            })
            .collect();

        let mut train_rows: Vec<usize> = workers.iter().flat_map(|w| w.shard.rows().iter().copied()).collect();
        train_rows.sort_unstable();
        train_rows.dedup();

        let classes = data.num_classes();
        let shape = match config.model {
            ModelKind::Logistic => ModelShape::logistic(data.width(), classes),
            ModelKind::Mlp1 => ModelShape::mlp1(data.width(), config.hidden, classes),
        };
        let model = ModelState::init(shape, &mut RngStream::new(config.seed, streams::INIT))?;
        let optimizer = OptimizerState::new(config.optimizer, config.eta, shape.param_count())?;

        let seed = config.seed;
        Ok(Simulation {
            batch_rngs: (0..n).map(|i| RngStream::new(seed, streams::worker_batch(i))).collect(),
            delay_rngs: (0..n).map(|i| RngStream::new(seed, streams::worker_delay(i))).collect(),
            validation_rng: RngStream::new(seed, streams::VALIDATION),
            config,
            data,
            workers,
            validation: partition.validation,
            test: partition.test,
            train_rows,
            model,
            optimizer,
            warmup_rounds: Vec::new(),
            thresholds: None,
            cumulative_time: 0.0,
            next_t: 1,
        })
    }

    pub fn config(&self) -> &ExperimentConfig {
        &self.config
    }

    pub fn data(&self) -> &Dataset {
        &self.data
    }

    pub fn workers(&self) -> &[WorkerSpec] {
        &self.workers
    }

    pub fn model(&self) -> &ModelState {
        &self.model
    }

    pub fn train_rows(&self) -> &[usize] {
        &self.train_rows
    }

    pub fn validation_shard(&self) -> &Shard {
        &self.validation
    }

    pub fn test_shard(&self) -> &Shard {
        &self.test
    }

    pub fn thresholds(&self) -> Option<&FilterThresholds> {
        self.thresholds.as_ref()
    }

    /// Replaces the filter thresholds used by subsequent filter-phase iterations.
    pub fn set_thresholds(&mut self, thresholds: Option<FilterThresholds>) {
        self.thresholds = thresholds;
    }

    /// Index of the iteration the next [`Simulation::step`] will run.
    pub fn next_iteration(&self) -> usize {
        self.next_t
    }

    pub fn step(&mut self) -> Result<IterationRecord> {
        let t = self.next_t;
        let record = self.run_iteration(t).map_err(|e| e.at_iteration(t))?;
        self.next_t += 1;
        Ok(record)
    }

    pub fn run(mut self) -> Result<Vec<IterationRecord>> {
        (0..self.config.iterations).map(|_| self.step()).collect()
    }

    /// Gradients of all workers at the current parameters, indexed by id.
    pub fn worker_gradients(&mut self) -> Result<Vec<GradVector>> {
        let attack = self.config.attack_kind();
        let attacking = attack.name() != "none";
        let n_b = self.config.n_b;
        let model = &self.model;
        let data = &self.data;
        let computed = self
            .workers
            .par_iter()
            .zip(self.batch_rngs.par_iter_mut())
            .map(|(w, rng)| {
                if attacking && !w.honest {
                    return Ok(None);
                }
                let rows = w.shard.sample_batch(n_b, rng);
                gradient(model, data, &rows).map(Some)
            })
            .collect::<Result<Vec<Option<GradVector>>>>()?;

        if !attacking {
            return Ok(computed.into_iter().flatten().collect());
        }
        let honest: Vec<GradVector> = computed.iter().flatten().cloned().collect();
        let stats = honest_stats(&honest)?;
        let fake = attack.fabricate(&stats, self.config.n_workers, self.config.f)?;
        Ok(computed
            .into_iter()
            .map(|g| match g {
                Some(g) => g,
                None => fake.clone().expect("active attack fabricates a vector"),
            })
            .collect())
    }

    /// Validation gradient on a fresh batch, redrawing after a zero-norm result.
    fn validation_gradient(&mut self, require_nonzero: bool) -> Result<(GradVector, Vec<usize>)> {
        for _ in 0..=VALIDATION_RETRIES {
            let rows = self.validation.sample_batch(self.config.n_b, &mut self.validation_rng);
            let g_v = gradient(&self.model, &self.data, &rows)?;
            let norm = g_v.norm();
            if !require_nonzero || (norm > 0.0 && norm.is_finite()) {
                return Ok((g_v, rows));
            }
            log::warn!("zero-norm validation gradient; drawing a fresh batch");
        }
        Err(Error::DegenerateValidation)
    }

    fn run_iteration(&mut self, t: usize) -> Result<IterationRecord> {
        let n = self.config.n_workers;
        let grads = self.worker_gradients()?;
        let arrivals: Vec<Arrival> = sample_arrivals(&self.workers, &mut self.delay_rngs)?;
        let slowest = arrivals.last().map_or(0.0, |a| a.arrival_time);
        let is_dstar = self.config.gar == Gar::Dstar;
        let (g_v, validation_rows) = self.validation_gradient(is_dstar)?;
        let everyone: Vec<usize> = (0..n).collect();

        let (aggregate, wait_time, n_received, accepted_ids, rejected_ids) = match self.config.gar {
            Gar::Dstar if t <= self.config.warmup_rounds => {
                let median = coordinate_median(&grads)?;
                self.warmup_rounds.push(compute_thresholds(median.clone(), g_v.clone())?);
                self.thresholds = Some(combine_thresholds(&self.warmup_rounds)?);
                (Some(median), slowest, n, everyone, Vec::new())
            }
            Gar::Dstar => {
                let thresholds = self
                    .thresholds
                    .as_ref()
                    .ok_or_else(|| Error::domain("filter phase reached without warm-up thresholds"))?;
                let out = filter_phase(&arrivals, &grads, &g_v, thresholds, self.config.k)?;
                (out.aggregate, out.wait_time, out.n_received, out.accepted_ids, out.rejected_ids)
            }
            gar => {
                let aggregate = aggregate_sync(gar, &grads, self.config.sync_params())?;
                (Some(aggregate), slowest, n, everyone, Vec::new())
            }
        };

        let updated = aggregate.is_some();
        if let Some(g) = aggregate {
            let mut theta = self.model.params().clone();
            self.optimizer.step(&mut theta, &g)?;
            self.model.set_params(theta)?;
        }

        self.cumulative_time += wait_time;
        let eval = t.is_multiple_of(self.config.eval_every) || t == self.config.iterations;
        let (loss, accuracy) = if eval {
            let (loss, _) = loss_and_accuracy(&self.model, &self.data, &self.train_rows)?;
            let (_, acc) = loss_and_accuracy(&self.model, &self.data, self.test.rows())?;
            (loss, Some(acc))
        } else {
            (loss_and_accuracy(&self.model, &self.data, &validation_rows)?.0, None)
        };

        Ok(IterationRecord {
            t,
            wait_time,
            cumulative_time: self.cumulative_time,
            loss,
            accuracy,
            n_received,
            n_accepted: accepted_ids.len(),
            accepted_ids,
            rejected_ids,
            updated,
        })
    }
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<IterationRecord>> {
    Simulation::new(config.clone())?.run()
}
