//! The fastest-k filtered aggregation rule.
//!
//! A synchronous warm-up records how far the coordinate-wise median sat from
//! the server's validation gradient. Later rounds accept an incoming gradient
//! `g` against that round's validation gradient `g_v` when both hold:
//!
//! ```text
//! s = ‖g − g_v‖² / ‖g_v‖     ≤ S = ‖g_m − g_v1‖² / ‖g_v1‖
//! d = ⟨g, g_v⟩ / ‖g_v‖²      ≥ D = ⟨g_m, g_v1⟩ / ‖g_v1‖²
//! ```
//!
//! Collection stops after `k` acceptances; accepted gradients are averaged.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{mean_of, median_in_place, GradVector};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterThresholds {
    /// Normalized squared-distance bound.
    pub s: f64,
    /// Normalized dot-product bound.
    pub d: f64,
    /// Warm-up coordinate-wise median.
    pub median: GradVector,
    /// Warm-up validation gradient.
    pub validation: GradVector,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterVerdict {
    pub accepted: bool,
    pub s: f64,
    pub d: f64,
}

fn validation_norm(g_v: &GradVector) -> Result<f64> {
    let norm = g_v.norm();
    if norm > 0.0 && norm.is_finite() {
        Ok(norm)
    } else {
        Err(Error::DegenerateValidation)
    }
}

/// `(s, d)` statistics of `g` against the validation gradient `g_v`.
pub fn filter_statistics(g: &GradVector, g_v: &GradVector) -> Result<(f64, f64)> {
    if g.dim() != g_v.dim() {
        return Err(Error::DimensionMismatch {
            expected: g_v.dim(),
            found: g.dim(),
        });
    }
    let norm = validation_norm(g_v)?;
    // dividing by the summed ‖g_v‖² (not norm·norm) keeps d(g_v, g_v) == 1 exactly
    Ok((g.dist_sq(g_v) / norm, g.dot(g_v) / g_v.norm_sq()))
}

pub fn compute_thresholds(median: GradVector, validation: GradVector) -> Result<FilterThresholds> {
    let (s, d) = filter_statistics(&median, &validation)?;
    Ok(FilterThresholds {
        s,
        d,
        median,
        validation,
    })
}

/// Combines per-round warm-up thresholds: `S` and `D` become the medians of
/// the per-round values, the stored vectors are the last round's.
pub fn combine_thresholds(rounds: &[FilterThresholds]) -> Result<FilterThresholds> {
    let last = rounds
        .last()
        .ok_or_else(|| Error::domain("no warm-up rounds to combine"))?;
    if rounds.len() == 1 {
        return Ok(last.clone());
    }
    let mut ss: Vec<f64> = rounds.iter().map(|r| r.s).collect();
    let mut ds: Vec<f64> = rounds.iter().map(|r| r.d).collect();
    Ok(FilterThresholds {
        s: median_in_place(&mut ss)?,
        d: median_in_place(&mut ds)?,
        median: last.median.clone(),
        validation: last.validation.clone(),
    })
}

pub fn filter_gradient(
    g: &GradVector,
    g_v: &GradVector,
    thresholds: &FilterThresholds,
) -> Result<FilterVerdict> {
    let (s, d) = filter_statistics(g, g_v)?;
    Ok(FilterVerdict {
        accepted: s <= thresholds.s && d >= thresholds.d,
        s,
        d,
    })
}

/// Mean of the accepted gradients, divided by how many were actually accepted.
pub fn dstar_aggregate(accepted: &[GradVector]) -> Result<GradVector> {
    if accepted.is_empty() {
        return Err(Error::NoneAccepted);
    }
    mean_of(accepted)
}

/// Outcome of one fastest-k collection pass. Positions index the input order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Collection {
    pub accepted: Vec<usize>,
    pub rejected: Vec<usize>,
    /// Number of inputs examined before stopping.
    pub processed: usize,
}

/// Screens `arrivals` (already in arrival order) until `k` are accepted or the
/// input is exhausted.
pub fn collect_fastest_k<'a, I>(
    arrivals: I,
    g_v: &GradVector,
    thresholds: &FilterThresholds,
    k: usize,
) -> Result<Collection>
where
    I: IntoIterator<Item = &'a GradVector>,
{
    validation_norm(g_v)?;
    let mut out = Collection::default();
    for (pos, g) in arrivals.into_iter().enumerate() {
        if out.accepted.len() >= k {
            break;
        }
        out.processed += 1;
        if filter_gradient(g, g_v, thresholds)?.accepted {
            out.accepted.push(pos);
        } else {
            out.rejected.push(pos);
        }
    }
    Ok(out)
}
