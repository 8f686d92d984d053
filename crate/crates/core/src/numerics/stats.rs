use statrs::distribution::{ContinuousCDF, Normal};

use super::vector::{common_dim, GradVector};
use crate::error::{Error, Result};

/// Median of a nonempty scalar slice, reordering it in place.
/// Even counts average the two middle order statistics.
pub fn median_in_place(values: &mut [f64]) -> Result<f64> {
    let n = values.len();
    if n == 0 {
        return Err(Error::domain("median of an empty sequence"));
    }
    let mid = n / 2;
    let (lower, upper_mid, _) = values.select_nth_unstable_by(mid, f64::total_cmp);
    let upper_mid = *upper_mid;
    if n % 2 == 1 {
        return Ok(upper_mid);
    }
    let lower_mid = lower
        .iter()
        .copied()
        .max_by(f64::total_cmp)
        .expect("even n >= 2 leaves a nonempty lower half");
    Ok(0.5 * (lower_mid + upper_mid))
}

/// Coordinate-wise median of a nonempty list of equal-dimension vectors.
pub fn coordinate_median(vectors: &[GradVector]) -> Result<GradVector> {
    let d = common_dim(vectors)?;
    let mut column = vec![0.0; vectors.len()];
    let mut out = Vec::with_capacity(d);
    for j in 0..d {
        for (slot, v) in column.iter_mut().zip(vectors) {
            *slot = v[j];
        }
        out.push(median_in_place(&mut column)?);
    }
    Ok(GradVector::new(out))
}

/// Standard normal quantile `Φ⁻¹(p)` for `p ∈ (0, 1)`.
pub fn normal_quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::domain(format!(
            "normal quantile needs 0 < p < 1, got {p}"
        )));
    }
    // Evaluate on the lower half and reflect, so q(1 - p) = -q(p) holds exactly
    // whenever 1 - p is representable.
    let std_normal = Normal::standard();
    if p > 0.5 {
        Ok(-std_normal.inverse_cdf(1.0 - p))
    } else {
        Ok(std_normal.inverse_cdf(p))
    }
}

/// Inverse-transform exponential draw with mean `scale`: `−scale · ln(1 − u)`.
pub fn sample_exponential(scale: f64, u: f64) -> Result<f64> {
    if !(scale > 0.0) || !scale.is_finite() {
        return Err(Error::domain(format!(
            "exponential scale must be positive, got {scale}"
        )));
    }
    if !(0.0..1.0).contains(&u) {
        return Err(Error::domain(format!("uniform draw must be in [0, 1), got {u}")));
    }
    Ok(-scale * (-u).ln_1p())
}
