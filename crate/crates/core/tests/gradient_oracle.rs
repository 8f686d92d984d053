//! Analytic gradients against central finite differences of the loss.

use dstar_core::models::{gradient, loss_and_accuracy, Dataset, ModelShape, ModelState};
use dstar_core::numerics::{GradVector, RngStream};

const H: f64 = 1e-5;
const TOL: f64 = 1e-5;

fn random_case(rng: &mut RngStream, case: usize) -> (ModelState, Dataset, Vec<usize>) {
    let inputs = 1 + rng.index(6);
    let classes = 2 + rng.index(3);
    let shape = if case.is_multiple_of(2) {
        ModelShape::logistic(inputs, classes)
    } else {
        ModelShape::mlp1(inputs, 1 + rng.index(6), classes)
    };
    let params = GradVector::new((0..shape.param_count()).map(|_| rng.standard_normal()).collect());
    let model = ModelState::from_params(shape, params).unwrap();

    let m = 3 + rng.index(10);
    let features = (0..m * inputs).map(|_| 2.0 * rng.standard_normal()).collect();
    let labels = (0..m).map(|_| rng.index(classes)).collect();
    let data = Dataset::new(features, labels, inputs, classes).unwrap();
    // batches drawn with replacement, so duplicates are exercised too
    let rows = (0..1 + rng.index(8)).map(|_| rng.index(m)).collect();
    (model, data, rows)
}

fn loss_at(model: &ModelState, params: Vec<f64>, data: &Dataset, rows: &[usize]) -> f64 {
    let m = model.with_params(GradVector::new(params)).unwrap();
    loss_and_accuracy(&m, data, rows).unwrap().0
}

fn worst_error(model: &ModelState, data: &Dataset, rows: &[usize]) -> f64 {
    let analytic = gradient(model, data, rows).unwrap();
    let theta = model.params().as_slice().to_vec();
    let mut worst: f64 = 0.0;
    for j in 0..theta.len() {
        let mut plus = theta.clone();
        let mut minus = theta.clone();
        plus[j] += H;
        minus[j] -= H;
        let numeric = (loss_at(model, plus, data, rows) - loss_at(model, minus, data, rows)) / (2.0 * H);
        worst = worst.max((analytic[j] - numeric).abs() / analytic[j].abs().max(1.0));
    }
    worst
}

#[test]
fn analytic_gradients_match_finite_differences() {
    let mut rng = RngStream::new(2024, 77);
    for case in 0..200 {
        let (model, data, rows) = random_case(&mut rng, case);
        let err = worst_error(&model, &data, &rows);
        assert!(err <= TOL, "case {case}: relative error {err:e} ({:?})", model.shape());
    }
}

#[test]
fn binary_logistic_matches_closed_form() {
    // one weight row against the reference class: ∂/∂w = (σ(wx + b) − y)·x
    let data = Dataset::new(vec![1.5, -0.5], vec![1, 0], 1, 2).unwrap();
    let model = ModelState::from_params(ModelShape::logistic(1, 2), GradVector::new(vec![0.8, -0.3])).unwrap();
    let sigmoid = |z: f64| 1.0 / (1.0 + (-z).exp());
    let (p0, p1) = (sigmoid(0.8 * 1.5 - 0.3), sigmoid(0.8 * -0.5 - 0.3));
    let dw = ((p0 - 1.0) * 1.5 + p1 * -0.5) / 2.0;
    let db = ((p0 - 1.0) + p1) / 2.0;
    let g = gradient(&model, &data, &[0, 1]).unwrap();
    assert!((g[0] - dw).abs() < 1e-14 && (g[1] - db).abs() < 1e-14, "{g:?} vs {dw} {db}");
}
