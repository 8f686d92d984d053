use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::adversary::AttackKind;
use crate::aggregation::{Gar, SyncParams};
use crate::error::{Error, Result};
use crate::models::{ModelKind, OptimizerKind, DEFAULT_HIDDEN};

pub const DEFAULT_BATCH_SIZE: usize = 16;
pub const DEFAULT_SEPARATION: f64 = 4.0;
pub const DEFAULT_DELAY_HONEST: f64 = 0.2;
pub const DEFAULT_DELAY_BYZANTINE: f64 = 0.001;
pub const DEFAULT_VAL_FRAC: f64 = 0.1;
pub const DEFAULT_TEST_FRAC: f64 = 0.1;
pub const DEFAULT_EVAL_EVERY: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AttackName {
    #[default]
    None,
    Little,
    Empire,
}

impl AttackName {
    pub const ALL: [AttackName; 3] = [AttackName::None, AttackName::Little, AttackName::Empire];

    pub fn name(self) -> &'static str {
        match self {
            AttackName::None => "none",
            AttackName::Little => "little",
            AttackName::Empire => "empire",
        }
    }
}

impl std::str::FromStr for AttackName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        AttackName::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::config("attack", format!("unknown attack `{s}`")))
    }
}

/// Optional per-rule trimming overrides. Unset values default to the
/// configured Byzantine count `f`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GarParams {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum DatasetSpec {
    Blobs {
        n: usize,
        p: usize,
        classes: usize,
        #[serde(default = "default_separation")]
        separation: f64,
    },
    Idx { images: PathBuf, labels: PathBuf },
}

/// Declarative description of one training run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Number of workers.
    #[serde(rename = "N")]
    pub n_workers: usize,
    /// Number of Byzantine workers; they take the last `f` ids.
    pub f: usize,
    /// Acceptances the fastest-k filter waits for.
    pub k: usize,
    /// Iterations to run.
    #[serde(rename = "T")]
    pub iterations: usize,
    #[serde(default = "default_batch_size")]
    pub n_b: usize,
    pub eta: f64,
    #[serde(default = "default_one")]
    pub warmup_rounds: usize,
    pub gar: Gar,
    #[serde(default)]
    pub gar_params: GarParams,
    #[serde(default)]
    pub attack: AttackName,
    #[serde(default = "default_empire_scale")]
    pub empire_scale: f64,
    #[serde(default = "default_optimizer")]
    pub optimizer: OptimizerKind,
    pub model: ModelKind,
    #[serde(default = "default_hidden")]
    pub hidden: usize,
    pub dataset: DatasetSpec,
    #[serde(default = "default_delay_honest")]
    pub delay_scale_honest: f64,
    #[serde(default = "default_delay_byz")]
    pub delay_scale_byz: f64,
    #[serde(default = "default_val_frac")]
    pub val_frac: f64,
    #[serde(default = "default_test_frac")]
    pub test_frac: f64,
    #[serde(default = "default_eval_every")]
    pub eval_every: usize,
    pub seed: u64,
    /// Reserved for an adaptive-k policy; currently ignored.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau_k: Option<usize>,
}

fn default_separation() -> f64 {
    DEFAULT_SEPARATION
}
fn default_batch_size() -> usize {
    DEFAULT_BATCH_SIZE
}
fn default_one() -> usize {
    1
}
fn default_empire_scale() -> f64 {
    crate::adversary::DEFAULT_EMPIRE_SCALE
}
fn default_optimizer() -> OptimizerKind {
    OptimizerKind::Sgd
}
fn default_hidden() -> usize {
    DEFAULT_HIDDEN
}
fn default_delay_honest() -> f64 {
    DEFAULT_DELAY_HONEST
}
fn default_delay_byz() -> f64 {
    DEFAULT_DELAY_BYZANTINE
}
fn default_val_frac() -> f64 {
    DEFAULT_VAL_FRAC
}
fn default_test_frac() -> f64 {
    DEFAULT_TEST_FRAC
}
fn default_eval_every() -> usize {
    DEFAULT_EVAL_EVERY
}

fn positive(key: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::config(key, format!("must be a positive number, got {v}")))
    }
}

impl ExperimentConfig {
    /// A blobs/logistic configuration with every optional field at its default.
    pub fn blobs_default(n_workers: usize, f: usize, k: usize, iterations: usize, gar: Gar) -> Self {
        ExperimentConfig {
            n_workers,
            f,
            k,
            iterations,
            n_b: DEFAULT_BATCH_SIZE,
            eta: 0.1,
            warmup_rounds: 1,
            gar,
            gar_params: GarParams::default(),
            attack: AttackName::None,
            empire_scale: default_empire_scale(),
            optimizer: OptimizerKind::Sgd,
            model: ModelKind::Logistic,
            hidden: DEFAULT_HIDDEN,
            dataset: DatasetSpec::Blobs {
                n: 10_000,
                p: 20,
                classes: 2,
                separation: DEFAULT_SEPARATION,
            },
            delay_scale_honest: DEFAULT_DELAY_HONEST,
            delay_scale_byz: DEFAULT_DELAY_BYZANTINE,
            val_frac: DEFAULT_VAL_FRAC,
            test_frac: DEFAULT_TEST_FRAC,
            eval_every: DEFAULT_EVAL_EVERY,
            seed: 0,
            tau_k: None,
        }
    }

    pub fn attack_kind(&self) -> AttackKind {
        match self.attack {
            AttackName::None => AttackKind::None,
            AttackName::Little => AttackKind::Little,
            AttackName::Empire => AttackKind::Empire {
                scale: self.empire_scale,
            },
        }
    }

    pub fn sync_params(&self) -> SyncParams {
        SyncParams {
            f: self.gar_params.f.unwrap_or(self.f),
            b: self.gar_params.b.unwrap_or(self.f),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n_workers;
        if n == 0 {
            return Err(Error::config("N", "need at least one worker"));
        }
        if n <= 2 * self.f {
            return Err(Error::BreakdownPoint { n, f: self.f });
        }
        if self.k == 0 || self.k > n {
            return Err(Error::config("k", format!("must satisfy 1 <= k <= N (k={}, N={n})", self.k)));
        }
        if self.iterations == 0 {
            return Err(Error::config("T", "must be at least 1"));
        }
        if self.n_b == 0 {
            return Err(Error::config("n_b", "must be at least 1"));
        }
        positive("eta", self.eta)?;
        if self.warmup_rounds == 0 {
            return Err(Error::config("warmup_rounds", "must be at least 1"));
        }
        positive("empire_scale", self.empire_scale)?;
        positive("delay_scale_honest", self.delay_scale_honest)?;
        positive("delay_scale_byz", self.delay_scale_byz)?;
        positive("val_frac", self.val_frac)?;
        positive("test_frac", self.test_frac)?;
        if self.val_frac + self.test_frac >= 1.0 {
            return Err(Error::config(
                "val_frac",
                format!("val_frac + test_frac must be < 1, got {}", self.val_frac + self.test_frac),
            ));
        }
        if self.eval_every == 0 {
            return Err(Error::config("eval_every", "must be at least 1"));
        }
        if self.model == ModelKind::Mlp1 && self.hidden == 0 {
            return Err(Error::config("hidden", "must be at least 1"));
        }
        if let DatasetSpec::Blobs { n: m, p, classes, separation } = self.dataset {
            if classes < 2 {
                return Err(Error::config("dataset.classes", "must be at least 2"));
            }
            if m < classes {
                return Err(Error::config("dataset.n", "must be at least the class count"));
            }
            if p == 0 {
                return Err(Error::config("dataset.p", "must be at least 1"));
            }
            positive("dataset.separation", separation)?;
        }

        let params = self.sync_params();
        match self.gar {
            Gar::Krum if n < params.f + 3 => Err(Error::config(
                "gar_params.f",
                format!("krum needs N - f - 2 >= 1 (N={n}, f={})", params.f),
            )),
            Gar::Cge if n <= params.f => Err(Error::config(
                "gar_params.f",
                format!("cge needs N > f (N={n}, f={})", params.f),
            )),
            Gar::Trmean if n <= 2 * params.b => Err(Error::config(
                "gar_params.b",
                format!("trmean needs N > 2b (N={n}, b={})", params.b),
            )),
            _ => Ok(()),
        }
    }
}
