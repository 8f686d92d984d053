//! Softmax classifiers with hand-written backpropagation.
//!
//! `Logistic` is multinomial logistic regression in reference-class form: class
//! 0 has a fixed zero logit and classes `1..C` each own a weight row and bias.
//! With two classes this is the usual sigmoid model `P(y=1) = σ(w·x + b)`.
//! `Mlp1` is one tanh hidden layer followed by a full softmax output layer.
//!
//! Parameters are a single flat [`GradVector`]; each dense layer contributes
//! its row-major `outputs × inputs` weights followed by its `outputs` biases.

use serde::{Deserialize, Serialize};

use super::data::Dataset;
use crate::error::{Error, Result};
use crate::numerics::{GradVector, RngStream};

pub const DEFAULT_HIDDEN: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModelKind {
    #[serde(rename = "logistic", alias = "logistic_regression")]
    Logistic,
    #[serde(rename = "mlp1")]
    Mlp1,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModelShape {
    pub kind: ModelKind,
    pub inputs: usize,
    /// Hidden width; ignored for logistic regression.
    pub hidden: usize,
    pub classes: usize,
}

impl ModelShape {
    pub fn logistic(inputs: usize, classes: usize) -> Self {
        ModelShape {
            kind: ModelKind::Logistic,
            inputs,
            hidden: 0,
            classes,
        }
    }

    pub fn mlp1(inputs: usize, hidden: usize, classes: usize) -> Self {
        ModelShape {
            kind: ModelKind::Mlp1,
            inputs,
            hidden,
            classes,
        }
    }

    /// `(inputs, outputs)` of each dense layer in parameter order.
    pub fn layer_dims(&self) -> Vec<(usize, usize)> {
        match self.kind {
            ModelKind::Logistic => vec![(self.inputs, self.classes - 1)],
            ModelKind::Mlp1 => vec![(self.inputs, self.hidden), (self.hidden, self.classes)],
        }
    }

    pub fn param_count(&self) -> usize {
        self.layer_dims().iter().map(|(i, o)| o * (i + 1)).sum()
    }

    fn validate(&self) -> Result<()> {
        if self.inputs == 0 {
            return Err(Error::domain("model needs at least one input"));
        }
        if self.classes < 2 {
            return Err(Error::domain("model needs at least two classes"));
        }
        if self.kind == ModelKind::Mlp1 && self.hidden == 0 {
            return Err(Error::domain("mlp1 needs a positive hidden width"));
        }
        Ok(())
    }
}

/// One unflattened dense layer.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseLayer {
    pub inputs: usize,
    pub outputs: usize,
    /// Row-major `outputs × inputs`.
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelState {
    shape: ModelShape,
    params: GradVector,
}

impl ModelState {
    pub fn zeros(shape: ModelShape) -> Result<Self> {
        shape.validate()?;
        Ok(ModelState {
            shape,
            params: GradVector::zeros(shape.param_count()),
        })
    }

    pub fn from_params(shape: ModelShape, params: GradVector) -> Result<Self> {
        shape.validate()?;
        if params.dim() != shape.param_count() {
            return Err(Error::DimensionMismatch {
                expected: shape.param_count(),
                found: params.dim(),
            });
        }
        Ok(ModelState { shape, params })
    }

    /// Glorot-uniform weights in `[−a, a]`, `a = √(6 / (fan_in + fan_out))`;
    /// zero biases.
    pub fn init(shape: ModelShape, rng: &mut RngStream) -> Result<Self> {
        shape.validate()?;
        let mut values = Vec::with_capacity(shape.param_count());
        for (inputs, outputs) in shape.layer_dims() {
            let a = (6.0 / (inputs + outputs) as f64).sqrt();
            values.extend((0..inputs * outputs).map(|_| a * (2.0 * rng.uniform() - 1.0)));
            values.extend(std::iter::repeat_n(0.0, outputs));
        }
        Ok(ModelState {
            shape,
            params: GradVector::new(values),
        })
    }

    pub fn shape(&self) -> &ModelShape {
        &self.shape
    }

    pub fn params(&self) -> &GradVector {
        &self.params
    }

    pub fn set_params(&mut self, params: GradVector) -> Result<()> {
        if params.dim() != self.params.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.params.dim(),
                found: params.dim(),
            });
        }
        self.params = params;
        Ok(())
    }

    pub fn with_params(&self, params: GradVector) -> Result<Self> {
        let mut out = self.clone();
        out.set_params(params)?;
        Ok(out)
    }

    pub fn unflatten(&self) -> Vec<DenseLayer> {
        let mut offset = 0;
        self.shape
            .layer_dims()
            .into_iter()
            .map(|(inputs, outputs)| {
                let w_end = offset + inputs * outputs;
                let b_end = w_end + outputs;
                let layer = DenseLayer {
                    inputs,
                    outputs,
                    weights: self.params[offset..w_end].to_vec(),
                    bias: self.params[w_end..b_end].to_vec(),
                };
                offset = b_end;
                layer
            })
            .collect()
    }

    pub fn flatten(shape: ModelShape, layers: &[DenseLayer]) -> Result<Self> {
        let mut values = Vec::with_capacity(shape.param_count());
        for layer in layers {
            values.extend_from_slice(&layer.weights);
            values.extend_from_slice(&layer.bias);
        }
        Self::from_params(shape, GradVector::new(values))
    }

    /// Class logits for one input row. `hidden` receives the tanh activations
    /// for `Mlp1` and is left empty otherwise.
    fn forward(&self, x: &[f64], hidden: &mut Vec<f64>, logits: &mut Vec<f64>) {
        let p = &self.params;
        let s = &self.shape;
        hidden.clear();
        logits.clear();
        match s.kind {
            ModelKind::Logistic => {
                let n_in = s.inputs;
                let bias_at = (s.classes - 1) * n_in;
                logits.push(0.0);
                for c in 0..s.classes - 1 {
                    let w = &p[c * n_in..(c + 1) * n_in];
                    logits.push(dot(w, x) + p[bias_at + c]);
                }
            }
            ModelKind::Mlp1 => {
                let (n_in, n_h) = (s.inputs, s.hidden);
                let b1 = n_h * n_in;
                let w2 = b1 + n_h;
                let b2 = w2 + s.classes * n_h;
                for j in 0..n_h {
                    let w = &p[j * n_in..(j + 1) * n_in];
                    hidden.push((dot(w, x) + p[b1 + j]).tanh());
                }
                for c in 0..s.classes {
                    let w = &p[w2 + c * n_h..w2 + (c + 1) * n_h];
                    logits.push(dot(w, hidden) + p[b2 + c]);
                }
            }
        }
    }

    fn check_batch(&self, data: &Dataset, rows: &[usize]) -> Result<()> {
        if rows.is_empty() {
            return Err(Error::domain("batch is empty"));
        }
        if data.width() != self.shape.inputs {
            return Err(Error::DimensionMismatch {
                expected: self.shape.inputs,
                found: data.width(),
            });
        }
        if data.num_classes() > self.shape.classes {
            return Err(Error::domain(format!(
                "dataset has {} classes but the model only {}",
                data.num_classes(),
                self.shape.classes
            )));
        }
        Ok(())
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// In-place softmax; returns `log Σ exp(z)` of the input logits.
fn softmax(logits: &mut [f64]) -> f64 {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for z in logits.iter_mut() {
        *z = (*z - max).exp();
        sum += *z;
    }
    logits.iter_mut().for_each(|z| *z /= sum);
    max + sum.ln()
}

/// Mean cross-entropy gradient over `rows` of `data`.
pub fn gradient(model: &ModelState, data: &Dataset, rows: &[usize]) -> Result<GradVector> {
    model.check_batch(data, rows)?;
    let s = model.shape;
    let p = &model.params;
    let mut grad = vec![0.0; s.param_count()];
    let mut hidden = Vec::new();
    let mut probs = Vec::new();
    let mut d_hidden = vec![0.0; s.hidden];

    for &r in rows {
        let x = data.row(r);
        let y = data.label(r);
        model.forward(x, &mut hidden, &mut probs);
        softmax(&mut probs);
        // probs now holds dL/dz = softmax - onehot after this adjustment
        probs[y] -= 1.0;
        let delta = &probs;

        match s.kind {
            ModelKind::Logistic => {
                let n_in = s.inputs;
                let bias_at = (s.classes - 1) * n_in;
                for c in 1..s.classes {
                    let dc = delta[c];
                    let row = &mut grad[(c - 1) * n_in..c * n_in];
                    for (g, xi) in row.iter_mut().zip(x) {
                        *g += dc * xi;
                    }
                    grad[bias_at + c - 1] += dc;
                }
            }
            ModelKind::Mlp1 => {
                let (n_in, n_h) = (s.inputs, s.hidden);
                let b1 = n_h * n_in;
                let w2 = b1 + n_h;
                let b2 = w2 + s.classes * n_h;
                d_hidden.iter_mut().for_each(|v| *v = 0.0);
                for c in 0..s.classes {
                    let dc = delta[c];
                    let w_row = w2 + c * n_h;
                    for j in 0..n_h {
                        grad[w_row + j] += dc * hidden[j];
                        d_hidden[j] += p[w_row + j] * dc;
                    }
                    grad[b2 + c] += dc;
                }
                for j in 0..n_h {
                    let dj = d_hidden[j] * (1.0 - hidden[j] * hidden[j]);
                    let row = &mut grad[j * n_in..(j + 1) * n_in];
                    for (g, xi) in row.iter_mut().zip(x) {
                        *g += dj * xi;
                    }
                    grad[b1 + j] += dj;
                }
            }
        }
    }

    let n = rows.len() as f64;
    grad.iter_mut().for_each(|g| *g /= n);
    Ok(GradVector::new(grad))
}

/// Mean cross-entropy and argmax accuracy (ties go to the lowest class index).
pub fn loss_and_accuracy(model: &ModelState, data: &Dataset, rows: &[usize]) -> Result<(f64, f64)> {
    model.check_batch(data, rows)?;
    let mut hidden = Vec::new();
    let mut logits = Vec::new();
    let mut loss = 0.0;
    let mut correct = 0usize;
    for &r in rows {
        let y = data.label(r);
        model.forward(data.row(r), &mut hidden, &mut logits);
        let predicted = logits
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (c, &z)| if z > best.1 { (c, z) } else { best })
            .0;
        if predicted == y {
            correct += 1;
        }
        let z_y = logits[y];
        loss += softmax(&mut logits) - z_y;
    }
    let n = rows.len() as f64;
    Ok((loss / n, correct as f64 / n))
}
