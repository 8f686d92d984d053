//! Gradient aggregation rules (GARs).

mod dstar;
mod rules;
mod theory;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::GradVector;

pub use dstar::{
    collect_fastest_k, combine_thresholds, compute_thresholds, dstar_aggregate, filter_gradient,
    filter_statistics, Collection, FilterThresholds, FilterVerdict,
};
pub use rules::{
    aggregate_aksel, aggregate_average, aggregate_cge, aggregate_krum, aggregate_median,
    aggregate_trmean, krum_scores, krum_select,
};
pub use theory::{estimate_assumption_constants, theoretical_alpha, AssumptionEstimates};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Gar {
    Dstar,
    Average,
    Median,
    Krum,
    Cge,
    Trmean,
    Aksel,
}

impl Gar {
    pub const ALL: [Gar; 7] = [
        Gar::Dstar,
        Gar::Average,
        Gar::Median,
        Gar::Krum,
        Gar::Cge,
        Gar::Trmean,
        Gar::Aksel,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Gar::Dstar => "dstar",
            Gar::Average => "average",
            Gar::Median => "median",
            Gar::Krum => "krum",
            Gar::Cge => "cge",
            Gar::Trmean => "trmean",
            Gar::Aksel => "aksel",
        }
    }

    pub fn is_synchronous(self) -> bool {
        self != Gar::Dstar
    }
}

impl fmt::Display for Gar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Gar {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Gar::ALL
            .into_iter()
            .find(|g| g.name() == s)
            .ok_or_else(|| Error::config("gar", format!("unknown rule `{s}`")))
    }
}

/// Trimming parameters for the synchronous rules that take one.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SyncParams {
    /// Assumed Byzantine count for Krum and CGE.
    pub f: usize,
    /// Per-side trim count for TrMean.
    pub b: usize,
}

/// Applies a synchronous rule to the full set of received gradients.
pub fn aggregate_sync(gar: Gar, grads: &[GradVector], params: SyncParams) -> Result<GradVector> {
    match gar {
        Gar::Average => aggregate_average(grads),
        Gar::Median => aggregate_median(grads),
        Gar::Krum => aggregate_krum(grads, params.f),
        Gar::Cge => aggregate_cge(grads, params.f),
        Gar::Trmean => aggregate_trmean(grads, params.b),
        Gar::Aksel => aggregate_aksel(grads),
        Gar::Dstar => Err(Error::domain(
            "dstar is not a synchronous rule; use the fastest-k collection",
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for g in Gar::ALL {
            assert_eq!(g.name().parse::<Gar>().unwrap(), g);
        }
        assert!("zeno".parse::<Gar>().is_err());
    }
}
