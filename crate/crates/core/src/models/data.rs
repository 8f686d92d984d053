use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::RngStream;

/// Row-major feature matrix with integer class labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: Vec<f64>,
    labels: Vec<usize>,
    width: usize,
    num_classes: usize,
}

impl Dataset {
    pub fn new(
        features: Vec<f64>,
        labels: Vec<usize>,
        width: usize,
        num_classes: usize,
    ) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::domain("dataset must have at least one row"));
        }
        if width == 0 {
            return Err(Error::domain("feature width must be positive"));
        }
        if features.len() != labels.len() * width {
            return Err(Error::domain(format!(
                "{} feature values do not form {} rows of width {width}",
                features.len(),
                labels.len()
            )));
        }
        if let Some(&bad) = labels.iter().find(|&&y| y >= num_classes) {
            return Err(Error::domain(format!(
                "label {bad} out of range for {num_classes} classes"
            )));
        }
        Ok(Dataset {
            features,
            labels,
            width,
            num_classes,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.width..(i + 1) * self.width]
    }

    pub fn label(&self, i: usize) -> usize {
        self.labels[i]
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn features(&self) -> &[f64] {
        &self.features
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ShardOwner {
    Worker(usize),
    Validation,
    Test,
}

/// A subset of dataset rows held by one party, kept in increasing order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Shard {
    pub owner: ShardOwner,
    rows: Vec<usize>,
}

impl Shard {
    pub fn new(owner: ShardOwner, mut rows: Vec<usize>) -> Self {
        rows.sort_unstable();
        rows.dedup();
        Shard { owner, rows }
    }

    pub fn rows(&self) -> &[usize] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Draws `n` row indices uniformly with replacement.
    pub fn sample_batch(&self, n: usize, rng: &mut RngStream) -> Vec<usize> {
        (0..n).map(|_| self.rows[rng.index(self.rows.len())]).collect()
    }
}

/// Isotropic Gaussian clusters with unit variance. Class centers sit
/// `separation` apart: on scaled basis vectors when `classes <= width`,
/// otherwise evenly along the first axis.
pub fn generate_blobs(
    n_samples: usize,
    width: usize,
    classes: usize,
    separation: f64,
    rng: &mut RngStream,
) -> Result<Dataset> {
    if classes < 2 {
        return Err(Error::domain("blobs need at least 2 classes"));
    }
    if n_samples < classes {
        return Err(Error::domain(format!(
            "{n_samples} samples cannot cover {classes} classes"
        )));
    }
    if width == 0 {
        return Err(Error::domain("feature width must be positive"));
    }
    if !(separation > 0.0) || !separation.is_finite() {
        return Err(Error::domain("blob separation must be positive"));
    }

    let centers: Vec<Vec<f64>> = (0..classes)
        .map(|c| {
            let mut center = vec![0.0; width];
            if classes <= width {
                center[c] = separation / std::f64::consts::SQRT_2;
            } else {
                center[0] = c as f64 * separation;
            }
            center
        })
        .collect();

    let mut features = Vec::with_capacity(n_samples * width);
    let mut labels = Vec::with_capacity(n_samples);
    for i in 0..n_samples {
        let label = i % classes;
        labels.push(label);
        features.extend(centers[label].iter().map(|c| c + rng.standard_normal()));
    }
    Dataset::new(features, labels, width, classes)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn blobs_are_deterministic() {
        let a = generate_blobs(4, 2, 2, 10.0, &mut RngStream::new(5, 1)).unwrap();
        let b = generate_blobs(4, 2, 2, 10.0, &mut RngStream::new(5, 1)).unwrap();
        assert_eq!(a, b);
        let c = generate_blobs(4, 2, 2, 10.0, &mut RngStream::new(6, 1)).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn blobs_reject_bad_sizes() {
        let mut rng = RngStream::new(0, 0);
        assert!(generate_blobs(3, 2, 4, 1.0, &mut rng).is_err());
        assert!(generate_blobs(10, 0, 2, 1.0, &mut rng).is_err());
        assert!(generate_blobs(10, 2, 1, 1.0, &mut rng).is_err());
        assert!(generate_blobs(10, 2, 2, 0.0, &mut rng).is_err());
    }

    #[test]
    fn blob_centers_are_separated() {
        // Empirical class means approximate the centers.
        for (width, classes) in [(5, 3), (2, 4)] {
            let d = generate_blobs(4000, width, classes, 6.0, &mut RngStream::new(1, 1)).unwrap();
            let mut means = vec![vec![0.0; width]; classes];
            let mut counts = vec![0usize; classes];
            for i in 0..d.len() {
                counts[d.label(i)] += 1;
                for (m, x) in means[d.label(i)].iter_mut().zip(d.row(i)) {
                    *m += x;
                }
            }
            for (m, c) in means.iter_mut().zip(&counts) {
                m.iter_mut().for_each(|v| *v /= *c as f64);
            }
            for a in 0..classes {
                for b in a + 1..classes {
                    let dist: f64 = means[a]
                        .iter()
                        .zip(&means[b])
                        .map(|(x, y)| (x - y) * (x - y))
                        .sum::<f64>()
                        .sqrt();
                    assert!(dist > 6.0 - 0.3, "classes {a},{b}: {dist}");
                }
            }
        }
    }

    #[test]
    fn dataset_validates_labels() {
        assert!(Dataset::new(vec![0.0; 4], vec![0, 2], 2, 2).is_err());
        assert!(Dataset::new(vec![0.0; 3], vec![0, 1], 2, 2).is_err());
        assert!(Dataset::new(vec![], vec![], 2, 2).is_err());
    }
}
