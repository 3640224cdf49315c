//! Task-feature extraction and logistic regression of solvability.
//!
//! Nine numeric features are read off each task (pixel counts, color
//! counts, change counts, sizes, and the number of demonstrations). A
//! from-scratch logistic regression — z-score standardization, full-batch
//! gradient descent on the L2-regularized mean negative log-likelihood,
//! zero initialization — relates those features to solved/unsolved labels
//! and reports coefficients plus per-class precision and recall.
//!
//! The module is generic over the scalar type through [`num_traits`], so
//! the same code runs in `f32` or `f64`; [`crate::Real`] is the default.

use std::collections::BTreeMap;
use std::fmt::Display;

use num_traits::{Float, FromPrimitive};

use crate::harness::{RunRecord, Verdict};
use crate::task::{Color, Grid, Task};

/// Number of features; see [`FEATURE_NAMES`] for their order.
pub const FEATURE_COUNT: usize = 9;

/// Feature names, in the order they appear in every [`FeatureVector`].
pub const FEATURE_NAMES: [&str; FEATURE_COUNT] = [
    "colored_pixels_test_input",
    "mean_colored_pixels_train_inputs",
    "unique_colors_test_input",
    "mean_unique_colors_train_inputs",
    "pixels_changed_test",
    "mean_pixels_changed_train",
    "test_input_size",
    "mean_train_input_size",
    "num_train_instances",
];

/// The nine per-task features, in [`FEATURE_NAMES`] order.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureVector<F> {
    pub values: [F; FEATURE_COUNT],
}

fn count_colored(grid: &Grid, background: Color) -> usize {
    grid.cells().iter().filter(|c| **c != background).count()
}

fn count_unique_colors(grid: &Grid, background: Color) -> usize {
    let mut seen = [false; 10];
    for c in grid.cells() {
        seen[c.code() as usize] = true;
    }
    seen.iter().enumerate().filter(|(code, present)| **present && *code != background.code() as usize).count()
}

/// Cells that differ between input and output: direct comparison over the
/// common overlap, plus every cell of either grid outside the overlap
/// (the defined extension for dimension-changing tasks).
fn pixels_changed(input: &Grid, output: &Grid) -> usize {
    let overlap_h = input.height().min(output.height());
    let overlap_w = input.width().min(output.width());
    let mut changed = 0;
    for r in 0..overlap_h {
        for c in 0..overlap_w {
            if input.get(r, c) != output.get(r, c) {
                changed += 1;
            }
        }
    }
    let overlap = overlap_h * overlap_w;
    changed + (input.height() * input.width() - overlap)
        + (output.height() * output.width() - overlap)
}

/// Compute the nine features of a task. Counts are cast losslessly into
/// the scalar type; "colored" and "unique colors" both ignore the
/// background color.
pub fn extract_features<F: Float + FromPrimitive>(task: &Task, background: Color) -> FeatureVector<F> {
    let n = |v: usize| F::from_usize(v).expect("counts fit any float type");
    let mean =
        |values: Vec<usize>| n(values.iter().sum::<usize>()) / n(values.len().max(1));

    let test = &task.test[0];
    let values = [
        n(count_colored(&test.input, background)),
        mean(task.train.iter().map(|p| count_colored(&p.input, background)).collect()),
        n(count_unique_colors(&test.input, background)),
        mean(task.train.iter().map(|p| count_unique_colors(&p.input, background)).collect()),
        n(pixels_changed(&test.input, &test.output)),
        mean(task.train.iter().map(|p| pixels_changed(&p.input, &p.output)).collect()),
        n(test.input.height() * test.input.width()),
        mean(task.train.iter().map(|p| p.input.height() * p.input.width()).collect()),
        n(task.train.len()),
    ];
    FeatureVector { values }
}

/// Derive solvability labels from persisted run records: a task counts
/// as solved when any of its records has a solved verdict.
pub fn labels_from_records(records: &[RunRecord]) -> BTreeMap<String, bool> {
    let mut labels = BTreeMap::new();
    for record in records {
        let entry = labels.entry(record.task_id.clone()).or_insert(false);
        if record.verdict == Verdict::Solved {
            *entry = true;
        }
    }
    labels
}

/// Per-feature mean and population standard deviation captured at fit
/// time, plus the indices of the features that were kept (non-constant).
#[derive(Clone, Debug, PartialEq)]
pub struct Standardizer<F> {
    pub mean: Vec<F>,
    pub std: Vec<F>,
    /// Indices into [`FEATURE_NAMES`] of retained features.
    pub kept: Vec<usize>,
}

impl<F: Float> Standardizer<F> {
    /// Project a raw feature vector onto the kept, z-scored coordinates.
    pub fn transform(&self, fv: &FeatureVector<F>) -> Vec<F> {
        self.kept
            .iter()
            .enumerate()
            .map(|(j, &i)| (fv.values[i] - self.mean[j]) / self.std[j])
            .collect()
    }
}

fn standardize<F: Float>(features: &[FeatureVector<F>]) -> (Standardizer<F>, Vec<Vec<F>>) {
    let count = F::from(features.len() as f64).unwrap();
    let mut mean = Vec::new();
    let mut std = Vec::new();
    let mut kept = Vec::new();
    for (i, name) in FEATURE_NAMES.iter().enumerate() {
        let sum = features
            .iter()
            .fold(F::zero(), |acc, fv| acc + fv.values[i]);
        let mu = sum / count;
        let var = features
            .iter()
            .fold(F::zero(), |acc, fv| acc + (fv.values[i] - mu).powi(2))
            / count;
        let sigma = var.sqrt();
        if sigma > F::zero() && sigma.is_finite() {
            kept.push(i);
            mean.push(mu);
            std.push(sigma);
        } else {
            log::warn!(
                "dropping constant feature `{name}` (std = 0 over {} examples)",
                features.len()
            );
        }
    }
    let standardizer = Standardizer { mean, std, kept };
    let design = features.iter().map(|fv| standardizer.transform(fv)).collect();
    (standardizer, design)
}

/// A fitted model: weights on the standardized scale plus the
/// standardization itself, so raw feature vectors can be scored directly.
#[derive(Clone, Debug, PartialEq)]
pub struct LogisticModel<F> {
    /// One weight per kept feature, standardized scale.
    pub weights: Vec<F>,
    pub intercept: F,
    pub standardizer: Standardizer<F>,
}

impl<F: Float> LogisticModel<F> {
    /// P(solved) for one raw feature vector.
    pub fn predict_proba(&self, fv: &FeatureVector<F>) -> F {
        let x = self.standardizer.transform(fv);
        let z = dot(&self.weights, &x) + self.intercept;
        sigmoid(z)
    }

    /// Classify at the 0.5 threshold.
    pub fn predict(&self, fv: &FeatureVector<F>) -> bool {
        self.predict_proba(fv) >= F::from(0.5).unwrap()
    }

    /// Coefficients paired with their feature names.
    pub fn named_coefficients(&self) -> Vec<(&'static str, F)> {
        self.standardizer
            .kept
            .iter()
            .zip(&self.weights)
            .map(|(&i, &w)| (FEATURE_NAMES[i], w))
            .collect()
    }
}

fn dot<F: Float>(a: &[F], b: &[F]) -> F {
    a.iter().zip(b).fold(F::zero(), |acc, (x, y)| acc + *x * *y)
}

fn sigmoid<F: Float>(z: F) -> F {
    F::one() / (F::one() + (-z).exp())
}

/// ln(1 + e^x), computed without overflow for large |x|.
fn softplus<F: Float>(x: F) -> F {
    if x > F::zero() {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// Mean negative log-likelihood plus (l2/2)·‖w‖²; the intercept is not
/// regularized. `design` must already be standardized.
pub fn regularized_nll<F: Float>(design: &[Vec<F>], labels: &[bool], weights: &[F], intercept: F, l2: F) -> F {
    let n = F::from(design.len() as f64).unwrap();
    let mut loss = F::zero();
    for (x, &y) in design.iter().zip(labels) {
        let z = dot(weights, x) + intercept;
        // -ln σ(z) = softplus(-z); -ln(1-σ(z)) = softplus(z)
        loss = loss + if y { softplus(-z) } else { softplus(z) };
    }
    let two = F::from(2.0).unwrap();
    loss / n + l2 / two * dot(weights, weights)
}

/// Analytic gradient of [`regularized_nll`] with respect to the weights
/// and intercept.
pub fn nll_gradient<F: Float>(
    design: &[Vec<F>],
    labels: &[bool],
    weights: &[F],
    intercept: F,
    l2: F,
) -> (Vec<F>, F) {
    let n = F::from(design.len() as f64).unwrap();
    let mut grad_w = vec![F::zero(); weights.len()];
    let mut grad_b = F::zero();
    for (x, &y) in design.iter().zip(labels) {
        let z = dot(weights, x) + intercept;
        let target = if y { F::one() } else { F::zero() };
        let residual = sigmoid(z) - target;
        for (g, &xi) in grad_w.iter_mut().zip(x) {
            *g = *g + residual * xi;
        }
        grad_b = grad_b + residual;
    }
    for (g, &w) in grad_w.iter_mut().zip(weights) {
        *g = *g / n + l2 * w;
    }
    (grad_w, grad_b / n)
}

/// Gradient-descent hyperparameters.
#[derive(Clone, Copy, Debug)]
pub struct FitOptions<F> {
    pub l2: F,
    pub lr: F,
    pub iters: usize,
}

impl<F: Float + FromPrimitive> Default for FitOptions<F> {
    fn default() -> Self {
        FitOptions {
            l2: F::from_f64(0.01).unwrap(),
            lr: F::from_f64(0.1).unwrap(),
            iters: 5000,
        }
    }
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum FitError {
    #[error("need at least two examples of each class, got {solved} solved and {unsolved} unsolved")]
    SingleClass { solved: usize, unsolved: usize },
    #[error("feature and label counts differ: {features} features vs {labels} labels")]
    LengthMismatch { features: usize, labels: usize },
    #[error("every feature is constant; nothing to fit")]
    AllConstant,
}

/// Fit by full-batch gradient descent from zero initialization.
/// Deterministic: identical inputs produce identical models.
pub fn fit<F: Float + FromPrimitive>(
    features: &[FeatureVector<F>],
    labels: &[bool],
    options: &FitOptions<F>,
) -> Result<LogisticModel<F>, FitError> {
    fit_traced(features, labels, options, false).map(|(model, _)| model)
}

/// Like [`fit`], but also returns the loss value at each iteration
/// (including the initial point) when `trace` is set.
pub fn fit_traced<F: Float + FromPrimitive>(
    features: &[FeatureVector<F>],
    labels: &[bool],
    options: &FitOptions<F>,
    trace: bool,
) -> Result<(LogisticModel<F>, Vec<F>), FitError> {
    if features.len() != labels.len() {
        return Err(FitError::LengthMismatch {
            features: features.len(),
            labels: labels.len(),
        });
    }
    let solved = labels.iter().filter(|l| **l).count();
    let unsolved = labels.len() - solved;
    if solved < 2 || unsolved < 2 {
        return Err(FitError::SingleClass { solved, unsolved });
    }
    let (standardizer, design) = standardize(features);
    if standardizer.kept.is_empty() {
        return Err(FitError::AllConstant);
    }

    let mut weights = vec![F::zero(); standardizer.kept.len()];
    let mut intercept = F::zero();
    let mut losses = Vec::new();
    for _ in 0..options.iters {
        if trace {
            losses.push(regularized_nll(&design, labels, &weights, intercept, options.l2));
        }
        let (grad_w, grad_b) = nll_gradient(&design, labels, &weights, intercept, options.l2);
        for (w, g) in weights.iter_mut().zip(&grad_w) {
            *w = *w - options.lr * *g;
        }
        intercept = intercept - options.lr * grad_b;
    }
    if trace {
        losses.push(regularized_nll(&design, labels, &weights, intercept, options.l2));
    }
    Ok((
        LogisticModel {
            weights,
            intercept,
            standardizer,
        },
        losses,
    ))
}

/// Precision and recall of one class at the 0.5 threshold; a precision
/// with an empty predicted-positive set is reported as 0.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClassMetrics<F> {
    pub precision: F,
    pub recall: F,
    pub support: usize,
}

/// In-sample evaluation: coefficients plus per-class metrics.
#[derive(Clone, Debug, PartialEq)]
pub struct Report<F> {
    pub coefficients: Vec<(&'static str, F)>,
    pub intercept: F,
    pub solved: ClassMetrics<F>,
    pub unsolved: ClassMetrics<F>,
    pub accuracy: F,
}

/// Evaluate a fitted model on (normally the training) data.
pub fn evaluate<F: Float>(
    model: &LogisticModel<F>,
    features: &[FeatureVector<F>],
    labels: &[bool],
) -> Report<F> {
    let predictions: Vec<bool> = features.iter().map(|fv| model.predict(fv)).collect();
    let count = |want_pred: bool, want_label: bool| {
        predictions
            .iter()
            .zip(labels)
            .filter(|(p, l)| **p == want_pred && **l == want_label)
            .count()
    };
    let tp = count(true, true);
    let fp = count(true, false);
    let tn = count(false, false);
    let fn_ = count(false, true);
    let ratio = |num: usize, den: usize| {
        if den == 0 {
            F::zero()
        } else {
            F::from(num as f64).unwrap() / F::from(den as f64).unwrap()
        }
    };
    Report {
        coefficients: model.named_coefficients(),
        intercept: model.intercept,
        solved: ClassMetrics {
            precision: ratio(tp, tp + fp),
            recall: ratio(tp, tp + fn_),
            support: tp + fn_,
        },
        unsolved: ClassMetrics {
            precision: ratio(tn, tn + fn_),
            recall: ratio(tn, tn + fp),
            support: tn + fp,
        },
        accuracy: ratio(tp + tn, labels.len()),
    }
}

/// Render the report as Markdown: a coefficient block and a
/// precision/recall block.
pub fn render_report<F: Float + Display>(report: &Report<F>) -> String {
    let mut out = String::new();
    out.push_str("# Solvability analysis (in-sample)\n\n");
    out.push_str("## Coefficients (standardized features)\n\n");
    out.push_str("| Feature | Weight |\n|---|---:|\n");
    for (name, weight) in &report.coefficients {
        out.push_str(&format!("| {name} | {weight:.3} |\n"));
    }
    out.push_str(&format!("| (intercept) | {:.3} |\n", report.intercept));
    out.push_str("\n## Precision and recall at threshold 0.5\n\n");
    out.push_str("| Class | Precision | Recall | Support |\n|---|---:|---:|---:|\n");
    for (name, m) in [("solved", &report.solved), ("unsolved", &report.unsolved)] {
        out.push_str(&format!(
            "| {name} | {:.2} | {:.2} | {} |\n",
            m.precision, m.recall, m.support
        ));
    }
    out.push_str(&format!("\nAccuracy: {:.2}\n", report.accuracy));
    out
}
