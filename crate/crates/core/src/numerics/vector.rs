use std::ops::{Deref, DerefMut};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A dense d-dimensional real vector: gradients, parameters, and aggregates.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GradVector(Vec<f64>);

impl GradVector {
    pub fn new(values: Vec<f64>) -> Self {
        GradVector(values)
    }

    pub fn zeros(dim: usize) -> Self {
        GradVector(vec![0.0; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    pub fn dot(&self, other: &GradVector) -> f64 {
        debug_assert_eq!(self.dim(), other.dim());
        self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum()
    }

    pub fn norm_sq(&self) -> f64 {
        self.dot(self)
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// Squared Euclidean distance `‖self − other‖²`.
    pub fn dist_sq(&self, other: &GradVector) -> f64 {
        debug_assert_eq!(self.dim(), other.dim());
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b) * (a - b))
            .sum()
    }

    pub fn scaled(&self, c: f64) -> GradVector {
        GradVector(self.0.iter().map(|v| v * c).collect())
    }

    pub fn sub(&self, other: &GradVector) -> GradVector {
        debug_assert_eq!(self.dim(), other.dim());
        GradVector(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn add(&self, other: &GradVector) -> GradVector {
        debug_assert_eq!(self.dim(), other.dim());
        GradVector(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// `self += alpha * x`
    pub fn axpy(&mut self, alpha: f64, x: &GradVector) {
        debug_assert_eq!(self.dim(), x.dim());
        for (s, v) in self.0.iter_mut().zip(&x.0) {
            *s += alpha * v;
        }
    }
}

impl From<Vec<f64>> for GradVector {
    fn from(values: Vec<f64>) -> Self {
        GradVector(values)
    }
}

impl From<&[f64]> for GradVector {
    fn from(values: &[f64]) -> Self {
        GradVector(values.to_vec())
    }
}

impl Deref for GradVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl DerefMut for GradVector {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }
}

/// Checks that `vectors` is nonempty and every member has the same dimension.
/// Returns that dimension.
pub fn common_dim<V: AsRef<[f64]>>(vectors: &[V]) -> Result<usize> {
    let first = vectors
        .first()
        .ok_or_else(|| Error::domain("empty vector list"))?;
    let d = first.as_ref().len();
    for v in vectors {
        let found = v.as_ref().len();
        if found != d {
            return Err(Error::DimensionMismatch { expected: d, found });
        }
    }
    Ok(d)
}

impl AsRef<[f64]> for GradVector {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

/// Arithmetic mean of a nonempty list of equal-dimension vectors.
pub fn mean_of<V: AsRef<[f64]>>(vectors: &[V]) -> Result<GradVector> {
    let d = common_dim(vectors)?;
    let mut acc = vec![0.0; d];
    for v in vectors {
        for (a, x) in acc.iter_mut().zip(v.as_ref()) {
            *a += x;
        }
    }
    let n = vectors.len() as f64;
    acc.iter_mut().for_each(|a| *a /= n);
    Ok(GradVector(acc))
}
