//! Synchronous aggregation rules. Each takes the full set of received
//! gradients. Ties are broken by lowest input index everywhere.

use crate::error::{Error, Result};
use crate::numerics::{common_dim, coordinate_median, mean_of, median_in_place, GradVector};

pub fn aggregate_average(grads: &[GradVector]) -> Result<GradVector> {
    mean_of(grads)
}

pub fn aggregate_median(grads: &[GradVector]) -> Result<GradVector> {
    coordinate_median(grads)
}

/// Krum score of every input: the sum of squared distances to its
/// `n − f − 2` nearest other inputs.
pub fn krum_scores(grads: &[GradVector], f: usize) -> Result<Vec<f64>> {
    common_dim(grads)?;
    let n = grads.len();
    let neighbors = n
        .checked_sub(f + 2)
        .filter(|&m| m >= 1)
        .ok_or_else(|| {
            Error::config(
                "gar_params.f",
                format!("krum needs n - f - 2 >= 1 (n={n}, f={f})"),
            )
        })?;

    let mut dist = vec![0.0; n * n];
    for i in 0..n {
        for j in i + 1..n {
            let d = grads[i].dist_sq(&grads[j]);
            dist[i * n + j] = d;
            dist[j * n + i] = d;
        }
    }
    let mut row = Vec::with_capacity(n - 1);
    Ok((0..n)
        .map(|i| {
            row.clear();
            row.extend((0..n).filter(|&j| j != i).map(|j| dist[i * n + j]));
            row.select_nth_unstable_by(neighbors - 1, f64::total_cmp);
            row[..neighbors].iter().sum()
        })
        .collect())
}

/// Index of the Krum-selected input.
pub fn krum_select(grads: &[GradVector], f: usize) -> Result<usize> {
    let scores = krum_scores(grads, f)?;
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate() {
        if s < scores[best] {
            best = i;
        }
    }
    Ok(best)
}

pub fn aggregate_krum(grads: &[GradVector], f: usize) -> Result<GradVector> {
    Ok(grads[krum_select(grads, f)?].clone())
}

/// Average of the `n − f` inputs with the smallest Euclidean norms.
pub fn aggregate_cge(grads: &[GradVector], f: usize) -> Result<GradVector> {
    common_dim(grads)?;
    let n = grads.len();
    if n <= f {
        return Err(Error::config(
            "gar_params.f",
            format!("cge needs n > f (n={n}, f={f})"),
        ));
    }
    let mut order: Vec<(f64, usize)> = grads.iter().map(|g| g.norm_sq()).zip(0..).collect();
    order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let kept: Vec<&GradVector> = order[..n - f].iter().map(|&(_, i)| &grads[i]).collect();
    mean_of(&kept)
}

/// Coordinate-wise trimmed mean: per coordinate, drop the `b` largest and `b`
/// smallest values and average the remaining `n − 2b`.
pub fn aggregate_trmean(grads: &[GradVector], b: usize) -> Result<GradVector> {
    let d = common_dim(grads)?;
    let n = grads.len();
    if n <= 2 * b {
        return Err(Error::config(
            "gar_params.b",
            format!("trmean needs n > 2b (n={n}, b={b})"),
        ));
    }
    let kept = (n - 2 * b) as f64;
    let mut column = vec![0.0; n];
    let out = (0..d)
        .map(|j| {
            for (slot, g) in column.iter_mut().zip(grads) {
                *slot = g[j];
            }
            column.sort_unstable_by(f64::total_cmp);
            column[b..n - b].iter().sum::<f64>() / kept
        })
        .collect();
    Ok(GradVector::new(out))
}

/// Averages the inputs whose squared distance to the coordinate-wise median
/// is at most the median of those distances.
pub fn aggregate_aksel(grads: &[GradVector]) -> Result<GradVector> {
    let center = coordinate_median(grads)?;
    let dists: Vec<f64> = grads.iter().map(|g| g.dist_sq(&center)).collect();
    let cutoff = median_in_place(&mut dists.clone())?;
    let kept: Vec<&GradVector> = grads
        .iter()
        .zip(&dists)
        .filter(|(_, &q)| q <= cutoff)
        .map(|(g, _)| g)
        .collect();
    mean_of(&kept)
}
