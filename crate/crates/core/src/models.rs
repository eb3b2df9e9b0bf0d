//! Loss models: value and full-batch gradient (or subgradient) for linear
//! regression, ridge-regularized logistic regression, lasso regression, and a
//! one-hidden-layer MLP, plus smoothness-constant estimation.
//!
//! All operations are pure; a model never owns data. Gradients are exact
//! full-batch sums in sample order, which the engine relies on for
//! reproducibility.

use crate::data::SeededRng;
use crate::linalg;
use thiserror::Error;

/// One labeled observation: dense features plus a real label. Class labels
/// are encoded as reals (±1 for binary tasks, 0..C-1 otherwise).
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub features: Vec<f64>,
    pub label: f64,
}

impl Sample {
    pub fn new(features: Vec<f64>, label: f64) -> Self {
        Self { features, label }
    }
}

/// Hidden-layer width used throughout when none is given.
pub const DEFAULT_MLP_HIDDEN: usize = 30;

/// Shape of the one-hidden-layer network: input dim, hidden width, classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MlpShape {
    pub input: usize,
    pub hidden: usize,
    pub classes: usize,
}

impl MlpShape {
    pub fn new(input: usize, hidden: usize, classes: usize) -> Self {
        Self { input, hidden, classes }
    }

    /// Length of the flattened parameter vector:
    /// `[W1 (hidden×input), b1 (hidden), W2 (classes×hidden), b2 (classes)]`.
    pub fn param_len(&self) -> usize {
        self.hidden * self.input + self.hidden + self.classes * self.hidden + self.classes
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    LinearRegression,
    RidgeLogistic,
    Lasso,
    Mlp,
}

impl ModelKind {
    pub fn name(&self) -> &'static str {
        match self {
            ModelKind::LinearRegression => "linear",
            ModelKind::RidgeLogistic => "logistic",
            ModelKind::Lasso => "lasso",
            ModelKind::Mlp => "mlp",
        }
    }
}

/// A loss model: which task, its regularization weight, and (for the MLP)
/// the network shape.
#[derive(Debug, Clone, PartialEq)]
pub struct LossModel {
    pub kind: ModelKind,
    /// Regularization weight; ignored by `LinearRegression`.
    pub lambda: f64,
    pub mlp_shape: Option<MlpShape>,
}

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("dimension mismatch: parameter length {theta_len}, expected {expected}")]
    DimensionMismatch { theta_len: usize, expected: usize },
    #[error("empty shard")]
    EmptyShard,
    #[error("non-finite intermediate at sample {sample_index}")]
    NumericDomain { sample_index: usize },
    #[error("model kind {kind} has no closed smoothness bound; supply L manually")]
    UnsupportedModel { kind: &'static str },
    #[error("power iteration did not converge in {max_iter} iterations (last residual {residual:e})")]
    NoConvergence { max_iter: usize, residual: f64 },
    #[error("invalid model: {0}")]
    Invalid(String),
    #[error("label {label} does not encode a class below {classes} (sample {sample_index})")]
    BadClassLabel { label: f64, classes: usize, sample_index: usize },
}

impl LossModel {
    pub fn linear_regression() -> Self {
        Self { kind: ModelKind::LinearRegression, lambda: 0.0, mlp_shape: None }
    }

    pub fn ridge_logistic(lambda: f64) -> Self {
        Self { kind: ModelKind::RidgeLogistic, lambda, mlp_shape: None }
    }

    pub fn lasso(lambda: f64) -> Self {
        Self { kind: ModelKind::Lasso, lambda, mlp_shape: None }
    }

    pub fn mlp(input: usize, hidden: usize, classes: usize, lambda: f64) -> Self {
        Self {
            kind: ModelKind::Mlp,
            lambda,
            mlp_shape: Some(MlpShape::new(input, hidden, classes)),
        }
    }

    /// Parameter-vector length for feature dimension `d`.
    pub fn param_len(&self, d: usize) -> usize {
        match self.kind {
            ModelKind::Mlp => self.mlp_shape.expect("mlp model has a shape").param_len(),
            _ => d,
        }
    }

    /// Initial parameter vector. Zero except for the MLP, which draws weights
    /// uniformly from [-1/√fan_in, +1/√fan_in] (biases zero) so the sigmoid
    /// layer starts unsaturated and hidden units are not symmetric.
    pub fn init_params(&self, d: usize, rng: &mut SeededRng) -> Vec<f64> {
        match self.kind {
            ModelKind::Mlp => {
                let shape = self.mlp_shape.expect("mlp model has a shape");
                let mut theta = vec![0.0; shape.param_len()];
                let (w1, _b1, w2, _b2) = mlp_slices_mut(&mut theta, &shape);
                let s1 = 1.0 / (shape.input as f64).sqrt();
                for w in w1.iter_mut() {
                    *w = rng.next_uniform_symmetric(s1);
                }
                let s2 = 1.0 / (shape.hidden as f64).sqrt();
                for w in w2.iter_mut() {
                    *w = rng.next_uniform_symmetric(s2);
                }
                theta
            }
            _ => vec![0.0; d],
        }
    }

    fn check(&self, theta: &[f64], shard: &[Sample]) -> Result<(), ModelError> {
        if shard.is_empty() {
            return Err(ModelError::EmptyShard);
        }
        let d = shard[0].features.len();
        let expected = self.param_len(d);
        if theta.len() != expected {
            return Err(ModelError::DimensionMismatch { theta_len: theta.len(), expected });
        }
        Ok(())
    }
}

/// Numerically stable `log(1 + exp(-t))`.
fn log1p_exp_neg(t: f64) -> f64 {
    if t >= 0.0 {
        (-t).exp().ln_1p()
    } else {
        -t + t.exp().ln_1p()
    }
}

/// Logistic sigmoid `1 / (1 + exp(-z))`, stable for large |z|.
fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

fn sign0(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Local objective `f_m(θ)` over one shard.
///
/// - linear: `½ Σ (y − xᵀθ)²`
/// - logistic: `Σ log(1 + exp(−y·xᵀθ)) + (λ/2)‖θ‖²`, labels in {−1,+1}
/// - lasso: `½ Σ (y − xᵀθ)² + λ‖θ‖₁`
/// - mlp: softmax cross-entropy + (λ/2)·L2 on weight matrices
pub fn eval_loss(model: &LossModel, theta: &[f64], shard: &[Sample]) -> Result<f64, ModelError> {
    model.check(theta, shard)?;
    let value = match model.kind {
        ModelKind::LinearRegression => {
            let mut s = 0.0;
            for sample in shard {
                let r = sample.label - linalg::dot(&sample.features, theta);
                s += 0.5 * r * r;
            }
            s
        }
        ModelKind::RidgeLogistic => {
            let mut s = 0.0;
            for sample in shard {
                s += log1p_exp_neg(sample.label * linalg::dot(&sample.features, theta));
            }
            s + 0.5 * model.lambda * linalg::norm_sq(theta)
        }
        ModelKind::Lasso => {
            let mut s = 0.0;
            for sample in shard {
                let r = sample.label - linalg::dot(&sample.features, theta);
                s += 0.5 * r * r;
            }
            s + model.lambda * theta.iter().map(|t| t.abs()).sum::<f64>()
        }
        ModelKind::Mlp => mlp_loss(model, theta, shard)?,
    };
    if !value.is_finite() {
        // Locate the first offending sample for the error message.
        for (i, sample) in shard.iter().enumerate() {
            let one = eval_loss_single(model, theta, sample);
            if !one.is_finite() {
                return Err(ModelError::NumericDomain { sample_index: i });
            }
        }
        return Err(ModelError::NumericDomain { sample_index: 0 });
    }
    Ok(value)
}

fn eval_loss_single(model: &LossModel, theta: &[f64], sample: &Sample) -> f64 {
    match model.kind {
        ModelKind::LinearRegression | ModelKind::Lasso => {
            let r = sample.label - linalg::dot(&sample.features, theta);
            0.5 * r * r
        }
        ModelKind::RidgeLogistic => log1p_exp_neg(sample.label * linalg::dot(&sample.features, theta)),
        ModelKind::Mlp => {
            mlp_loss(model, theta, std::slice::from_ref(sample)).unwrap_or(f64::INFINITY)
        }
    }
}

/// Local gradient `∇f_m(θ)` (a subgradient for lasso, with sign(0) = 0).
/// Samples are accumulated in shard order.
pub fn eval_gradient(
    model: &LossModel,
    theta: &[f64],
    shard: &[Sample],
) -> Result<Vec<f64>, ModelError> {
    model.check(theta, shard)?;
    let g = match model.kind {
        ModelKind::LinearRegression | ModelKind::Lasso => {
            let mut g = vec![0.0; theta.len()];
            for sample in shard {
                let r = sample.label - linalg::dot(&sample.features, theta);
                // ∇ ½(y − xᵀθ)² = −x(y − xᵀθ)
                linalg::axpy(&mut g, -r, &sample.features);
            }
            if model.kind == ModelKind::Lasso {
                for (gi, ti) in g.iter_mut().zip(theta) {
                    *gi += model.lambda * sign0(*ti);
                }
            }
            g
        }
        ModelKind::RidgeLogistic => {
            let mut g = vec![0.0; theta.len()];
            for sample in shard {
                let t = sample.label * linalg::dot(&sample.features, theta);
                // d/dθ log(1+exp(−t)) = −y·σ(−t)·x
                let c = -sample.label * sigmoid(-t);
                linalg::axpy(&mut g, c, &sample.features);
            }
            linalg::axpy(&mut g, model.lambda, theta);
            g
        }
        ModelKind::Mlp => mlp_gradient(model, theta, shard)?,
    };
    if g.iter().any(|v| !v.is_finite()) {
        // Locate the first offending sample for the error message.
        for (i, sample) in shard.iter().enumerate() {
            if !eval_loss_single(model, theta, sample).is_finite() {
                return Err(ModelError::NumericDomain { sample_index: i });
            }
        }
        return Err(ModelError::NumericDomain { sample_index: 0 });
    }
    Ok(g)
}

// ---------------------------------------------------------------------------
// MLP: input → hidden (sigmoid) → softmax cross-entropy.
// ---------------------------------------------------------------------------

fn mlp_slices<'a>(theta: &'a [f64], s: &MlpShape) -> (&'a [f64], &'a [f64], &'a [f64], &'a [f64]) {
    let n1 = s.hidden * s.input;
    let n2 = n1 + s.hidden;
    let n3 = n2 + s.classes * s.hidden;
    (&theta[..n1], &theta[n1..n2], &theta[n2..n3], &theta[n3..])
}

fn mlp_slices_mut<'a>(
    theta: &'a mut [f64],
    s: &MlpShape,
) -> (&'a mut [f64], &'a mut [f64], &'a mut [f64], &'a mut [f64]) {
    let n1 = s.hidden * s.input;
    let n2 = n1 + s.hidden;
    let n3 = n2 + s.classes * s.hidden;
    let (w1, rest) = theta.split_at_mut(n1);
    let (b1, rest) = rest.split_at_mut(n2 - n1);
    let (w2, b2) = rest.split_at_mut(n3 - n2);
    (w1, b1, w2, b2)
}

fn class_of(label: f64, classes: usize, sample_index: usize) -> Result<usize, ModelError> {
    // ±1 binary labels map to classes {0, 1}; otherwise the label must round
    // to a valid class index.
    let idx = if label < 0.0 { 0.0 } else { label.round() };
    let idx = if classes == 2 && label > 0.0 { 1.0 } else { idx };
    if label < 0.0 && label.round() != -1.0 && classes != 2 {
        return Err(ModelError::BadClassLabel { label, classes, sample_index });
    }
    let i = idx as usize;
    if !(0..classes).contains(&i) {
        return Err(ModelError::BadClassLabel { label, classes, sample_index });
    }
    Ok(i)
}

struct MlpForward {
    hidden_act: Vec<f64>,
    /// Softmax probabilities.
    probs: Vec<f64>,
    /// Cross-entropy −log p_class.
    loss: f64,
}

fn mlp_forward(
    shape: &MlpShape,
    w1: &[f64],
    b1: &[f64],
    w2: &[f64],
    b2: &[f64],
    x: &[f64],
    class: usize,
) -> MlpForward {
    let mut hidden_act = vec![0.0; shape.hidden];
    for h in 0..shape.hidden {
        let z = linalg::dot(&w1[h * shape.input..(h + 1) * shape.input], x) + b1[h];
        hidden_act[h] = sigmoid(z);
    }
    let mut logits = vec![0.0; shape.classes];
    for c in 0..shape.classes {
        logits[c] = linalg::dot(&w2[c * shape.hidden..(c + 1) * shape.hidden], &hidden_act) + b2[c];
    }
    let zmax = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut denom = 0.0;
    for z in &logits {
        denom += (z - zmax).exp();
    }
    let log_denom = denom.ln() + zmax;
    let probs: Vec<f64> = logits.iter().map(|z| (z - log_denom).exp()).collect();
    let loss = log_denom - logits[class];
    MlpForward { hidden_act, probs, loss }
}

fn mlp_loss(model: &LossModel, theta: &[f64], shard: &[Sample]) -> Result<f64, ModelError> {
    let shape = model.mlp_shape.ok_or(ModelError::Invalid("mlp model without shape".into()))?;
    let (w1, b1, w2, b2) = mlp_slices(theta, &shape);
    let mut total = 0.0;
    for (i, sample) in shard.iter().enumerate() {
        let class = class_of(sample.label, shape.classes, i)?;
        let fwd = mlp_forward(&shape, w1, b1, w2, b2, &sample.features, class);
        total += fwd.loss;
    }
    // Biases are unregularized.
    total += 0.5 * model.lambda * (linalg::norm_sq(w1) + linalg::norm_sq(w2));
    Ok(total)
}

fn mlp_gradient(model: &LossModel, theta: &[f64], shard: &[Sample]) -> Result<Vec<f64>, ModelError> {
    let shape = model.mlp_shape.ok_or(ModelError::Invalid("mlp model without shape".into()))?;
    let (w1, b1, w2, b2) = mlp_slices(theta, &shape);
    let mut grad = vec![0.0; theta.len()];
    {
        let (gw1, gb1, gw2, gb2) = mlp_slices_mut(&mut grad, &shape);
        for (i, sample) in shard.iter().enumerate() {
            let class = class_of(sample.label, shape.classes, i)?;
            let fwd = mlp_forward(&shape, w1, b1, w2, b2, &sample.features, class);
            // dL/dlogits = p − onehot(class)
            let mut dz2 = fwd.probs;
            dz2[class] -= 1.0;
            // Backprop into the hidden activations.
            let mut da1 = vec![0.0; shape.hidden];
            for c in 0..shape.classes {
                let row = &w2[c * shape.hidden..(c + 1) * shape.hidden];
                linalg::axpy(&mut da1, dz2[c], row);
                let grow = &mut gw2[c * shape.hidden..(c + 1) * shape.hidden];
                linalg::axpy(grow, dz2[c], &fwd.hidden_act);
                gb2[c] += dz2[c];
            }
            for h in 0..shape.hidden {
                let a = fwd.hidden_act[h];
                let dz1 = da1[h] * a * (1.0 - a);
                let grow = &mut gw1[h * shape.input..(h + 1) * shape.input];
                linalg::axpy(grow, dz1, &sample.features);
                gb1[h] += dz1;
            }
        }
        linalg::axpy(gw1, model.lambda, w1);
        linalg::axpy(gw2, model.lambda, w2);
    }
    Ok(grad)
}

// ---------------------------------------------------------------------------
// Smoothness estimation.
// ---------------------------------------------------------------------------

/// Default power-iteration settings: deterministic fixed start vector
/// `(1,…,1)/√d`, relative-residual tolerance, iteration cap.
pub const POWER_ITER_TOL: f64 = 1e-8;
pub const POWER_ITER_MAX: usize = 10_000;

/// Largest eigenvalue of a symmetric PSD operator by power iteration from the
/// fixed start vector `(1,…,1)/√d`. Returns `λ_max` once the residual
/// `‖A v − λ v‖ ≤ tol·λ`.
pub fn top_eigenvalue(
    apply: impl Fn(&[f64]) -> Vec<f64>,
    d: usize,
    tol: f64,
    max_iter: usize,
) -> Result<f64, ModelError> {
    if d == 0 {
        return Err(ModelError::Invalid("zero-dimensional operator".into()));
    }
    let mut v = vec![1.0 / (d as f64).sqrt(); d];
    let mut residual = f64::INFINITY;
    for _ in 0..max_iter {
        let av = apply(&v);
        let lambda = linalg::dot(&v, &av);
        // ‖Av − λv‖ ≤ tol·λ accepts (λ, v) as an eigenpair.
        let mut r = av.clone();
        linalg::axpy(&mut r, -lambda, &v);
        residual = linalg::norm(&r);
        if residual <= tol * lambda.abs() {
            return Ok(lambda);
        }
        let n = linalg::norm(&av);
        if n == 0.0 {
            // Operator annihilates v: eigenvalue 0 along this direction.
            return Ok(0.0);
        }
        v = av;
        linalg::scale(&mut v, 1.0 / n);
    }
    Err(ModelError::NoConvergence { max_iter, residual })
}

/// Smoothness constant `L_m` of the local objective over one shard:
/// `λ_max(Σ x xᵀ)` for linear/lasso, `λ + λ_max(0.25 Σ y² x xᵀ)` for
/// logistic (the 0.25 sigmoid-curvature bound). The MLP has no closed bound.
pub fn smoothness_constant(model: &LossModel, shard: &[Sample]) -> Result<f64, ModelError> {
    if shard.is_empty() {
        return Err(ModelError::EmptyShard);
    }
    let d = shard[0].features.len();
    match model.kind {
        ModelKind::LinearRegression | ModelKind::Lasso => {
            let apply = |v: &[f64]| {
                let mut out = vec![0.0; d];
                for s in shard {
                    let c = linalg::dot(&s.features, v);
                    linalg::axpy(&mut out, c, &s.features);
                }
                out
            };
            top_eigenvalue(apply, d, POWER_ITER_TOL, POWER_ITER_MAX)
        }
        ModelKind::RidgeLogistic => {
            let apply = |v: &[f64]| {
                let mut out = vec![0.0; d];
                for s in shard {
                    let c = 0.25 * s.label * s.label * linalg::dot(&s.features, v);
                    linalg::axpy(&mut out, c, &s.features);
                }
                out
            };
            Ok(model.lambda + top_eigenvalue(apply, d, POWER_ITER_TOL, POWER_ITER_MAX)?)
        }
        ModelKind::Mlp => Err(ModelError::UnsupportedModel { kind: "mlp" }),
    }
}

/// Smoothness constant of the summed objective, estimated on the pooled
/// dataset (union of all shards in worker order). Used to set `α = 1/L`.
pub fn global_smoothness(
    model: &LossModel,
    fed: &crate::data::FederatedDataset,
) -> Result<f64, ModelError> {
    let pooled: Vec<Sample> = fed.shards.iter().flat_map(|s| s.iter().cloned()).collect();
    smoothness_constant(model, &pooled)
}

/// Per-worker and pooled smoothness estimates.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoothnessEstimate {
    pub per_worker: Vec<f64>,
    pub global: f64,
}

pub fn estimate_smoothness(
    model: &LossModel,
    fed: &crate::data::FederatedDataset,
) -> Result<SmoothnessEstimate, ModelError> {
    let per_worker = fed
        .shards
        .iter()
        .map(|shard| smoothness_constant(model, shard))
        .collect::<Result<Vec<_>, _>>()?;
    let global = global_smoothness(model, fed)?;
    Ok(SmoothnessEstimate { per_worker, global })
}
