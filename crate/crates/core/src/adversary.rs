//! Omniscient colluding attackers. Every Byzantine worker sends the same
//! fabricated vector, built from the mean and spread of this round's honest
//! gradients.

use std::fmt;

use crate::error::{Error, Result};
use crate::numerics::{common_dim, normal_quantile, GradVector};

pub const DEFAULT_EMPIRE_SCALE: f64 = 1.0;

/// Coordinate-wise mean and population standard deviation of honest gradients.
#[derive(Debug, Clone, PartialEq)]
pub struct HonestStats {
    pub mu: GradVector,
    pub sigma: GradVector,
    pub count: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AttackKind {
    None,
    /// Shift the honest mean by `z_max` standard deviations per coordinate.
    Little,
    /// Send the honest mean negated and scaled.
    Empire { scale: f64 },
}

impl AttackKind {
    pub fn name(&self) -> &'static str {
        match self {
            AttackKind::None => "none",
            AttackKind::Little => "little",
            AttackKind::Empire { .. } => "empire",
        }
    }

    /// The vector every Byzantine worker sends, or `None` when the workers
    /// behave honestly. A degenerate "little" configuration falls back to `mu`.
    pub fn fabricate(&self, stats: &HonestStats, n: usize, f: usize) -> Result<Option<GradVector>> {
        match *self {
            AttackKind::None => Ok(None),
            AttackKind::Little => match attack_little(stats, n, f) {
                Ok(g) => Ok(Some(g)),
                Err(Error::AttackDegenerate(msg)) => {
                    log::warn!("little attack degenerate ({msg}); sending the honest mean");
                    Ok(Some(stats.mu.clone()))
                }
                Err(e) => Err(e),
            },
            AttackKind::Empire { scale } => attack_empire(stats, scale).map(Some),
        }
    }
}

impl fmt::Display for AttackKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

pub fn honest_stats(honest: &[GradVector]) -> Result<HonestStats> {
    let d = common_dim(honest)?;
    let n = honest.len() as f64;
    let mut mu = vec![0.0; d];
    for g in honest {
        for (m, x) in mu.iter_mut().zip(g.iter()) {
            *m += x;
        }
    }
    mu.iter_mut().for_each(|m| *m /= n);
    let mut var = vec![0.0; d];
    for g in honest {
        for ((v, x), m) in var.iter_mut().zip(g.iter()).zip(&mu) {
            *v += (x - m) * (x - m);
        }
    }
    let sigma = var.into_iter().map(|v| (v / n).sqrt()).collect();
    Ok(HonestStats {
        mu: GradVector::new(mu),
        sigma: GradVector::new(sigma),
        count: honest.len(),
    })
}

/// `z_max` for `n` workers of which `f` are Byzantine: with
/// `s = ⌊n/2 + 1⌋ − f` extra workers needed for a majority, the standard
/// normal quantile at `(n − s) / n`.
pub fn little_z_max(n: usize, f: usize) -> Result<f64> {
    if n == 0 || f >= n {
        return Err(Error::domain(format!("need 0 <= f < n (n={n}, f={f})")));
    }
    let s = (n / 2 + 1) as i64 - f as i64;
    let p = (n as i64 - s) as f64 / n as f64;
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::AttackDegenerate(format!(
            "majority fraction (n - s)/n = {p} is outside (0, 1) for n={n}, f={f}"
        )));
    }
    normal_quantile(p)
}

pub fn attack_little(stats: &HonestStats, n: usize, f: usize) -> Result<GradVector> {
    let z = little_z_max(n, f)?;
    Ok(GradVector::new(
        stats
            .mu
            .iter()
            .zip(stats.sigma.iter())
            .map(|(m, s)| m + z * s)
            .collect(),
    ))
}

pub fn attack_empire(stats: &HonestStats, scale: f64) -> Result<GradVector> {
    if !(scale > 0.0) || !scale.is_finite() {
        return Err(Error::config(
            "empire_scale",
            format!("must be positive, got {scale}"),
        ));
    }
    Ok(stats.mu.scaled(-scale))
}
