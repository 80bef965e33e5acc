//! Five-class pair classification: multinomial logistic regression over
//! alignment features, trained by full-batch gradient descent with a
//! backtracking line search. Single-stage and two-stage (synthetic warm
//! start, then human) training, the C/norm hyperparameter grid, and the
//! fixed 7:1:2 dataset split live here.
//!
//! The objective is the summed multinomial cross-entropy plus
//! `(1/(2C)) * ||W||^2` over non-bias weights (omitted for `Norm::None`),
//! matching the usual inverse-regularization-strength convention. Training
//! is single-threaded and deterministic: identical data order, C, norm, and
//! initialization give bitwise-identical weights.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::align::AlignmentParams;
use crate::error::{Error, Result};
use crate::metrics;

pub const NUM_CLASSES: usize = 5;

pub fn label_name(label: u8) -> &'static str {
    match label {
        4 => "Identical",
        3 => "Almost Identical",
        2 => "Related",
        1 => "Partially Related",
        _ => "Unrelated",
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Human,
    Synthetic,
    Predicted,
}

impl std::str::FromStr for Provenance {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "human" => Ok(Provenance::Human),
            "synthetic" => Ok(Provenance::Synthetic),
            "predicted" => Ok(Provenance::Predicted),
            other => Err(Error::validation(format!("unknown provenance {other:?}"))),
        }
    }
}

impl std::fmt::Display for Provenance {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Provenance::Human => "human",
            Provenance::Synthetic => "synthetic",
            Provenance::Predicted => "predicted",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledPair {
    pub id_a: String,
    pub id_b: String,
    pub label: u8,
    pub provenance: Provenance,
}

impl LabeledPair {
    pub fn validate(&self) -> Result<()> {
        if self.label > 4 {
            return Err(Error::validation(format!(
                "pair ({}, {}): label {} outside 0..=4",
                self.id_a, self.id_b, self.label
            )));
        }
        // Identical synthetic pairs may self-reference by construction.
        if self.id_a == self.id_b && !(self.provenance == Provenance::Synthetic && self.label == 4)
        {
            return Err(Error::validation(format!(
                "pair ({}, {}): identical ids",
                self.id_a, self.id_b
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Norm {
    L2,
    None,
}

impl std::fmt::Display for Norm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Norm::L2 => "l2",
            Norm::None => "none",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageMeta {
    pub name: String,
    pub samples: usize,
    pub iterations: usize,
    pub initial_loss: f64,
    pub final_loss: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainMeta {
    pub c: f64,
    pub norm: Norm,
    pub stages: Vec<StageMeta>,
}

/// Trained multinomial logistic-regression model. Weights are
/// `NUM_CLASSES x (num_features + 1)` with the bias last in each row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairClassifier {
    pub weights: Vec<Vec<f64>>,
    pub feature_names: Vec<String>,
    pub params_used: AlignmentParams,
    pub train_meta: TrainMeta,
}

impl PairClassifier {
    pub fn num_features(&self) -> usize {
        self.weights[0].len() - 1
    }

    /// Softmax probabilities and the argmax label; ties break toward the
    /// lowest class index.
    pub fn predict(&self, features: &[f64]) -> Result<(u8, [f64; NUM_CLASSES])> {
        if features.len() != self.num_features() {
            return Err(Error::Dimension {
                expected: self.num_features(),
                actual: features.len(),
            });
        }
        let probs = softmax_probs(&self.weights, features);
        let mut best = 0usize;
        for c in 1..NUM_CLASSES {
            if probs[c] > probs[best] {
                best = c;
            }
        }
        Ok((best as u8, probs))
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Json {
            path: "<memory>".into(),
            source: e,
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let model: PairClassifier = serde_json::from_str(text).map_err(|e| Error::Json {
            path: "<memory>".into(),
            source: e,
        })?;
        if model.weights.len() != NUM_CLASSES || model.weights.iter().any(|r| r.len() < 2) {
            return Err(Error::validation(
                "model weights must be 5 x (features + 1)",
            ));
        }
        if model.weights.iter().flatten().any(|w| !w.is_finite()) {
            return Err(Error::validation("model weights must be finite"));
        }
        Ok(model)
    }
}

fn softmax_probs(weights: &[Vec<f64>], features: &[f64]) -> [f64; NUM_CLASSES] {
    let mut logits = [0.0f64; NUM_CLASSES];
    for (c, row) in weights.iter().enumerate() {
        let bias = row[row.len() - 1];
        logits[c] = bias
            + row[..row.len() - 1]
                .iter()
                .zip(features)
                .map(|(w, x)| w * x)
                .sum::<f64>();
    }
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut probs = [0.0f64; NUM_CLASSES];
    let mut denom = 0.0;
    for c in 0..NUM_CLASSES {
        probs[c] = (logits[c] - max).exp();
        denom += probs[c];
    }
    for p in probs.iter_mut() {
        *p /= denom;
    }
    probs
}

/// Summed cross-entropy loss plus the L2 penalty (bias excluded).
fn loss(weights: &[Vec<f64>], xs: &[Vec<f64>], ys: &[u8], c: f64, norm: Norm) -> f64 {
    let mut total = 0.0;
    for (x, &y) in xs.iter().zip(ys) {
        let probs = softmax_probs(weights, x);
        total -= probs[y as usize].max(1e-300).ln();
    }
    if norm == Norm::L2 {
        let penalty: f64 = weights
            .iter()
            .map(|row| row[..row.len() - 1].iter().map(|w| w * w).sum::<f64>())
            .sum();
        total += penalty / (2.0 * c);
    }
    total
}

/// Analytic gradient of [`loss`], same shape as the weights.
fn gradient(weights: &[Vec<f64>], xs: &[Vec<f64>], ys: &[u8], c: f64, norm: Norm) -> Vec<Vec<f64>> {
    let dim = weights[0].len();
    let mut grad = vec![vec![0.0f64; dim]; NUM_CLASSES];
    for (x, &y) in xs.iter().zip(ys) {
        let probs = softmax_probs(weights, x);
        for (cls, grow) in grad.iter_mut().enumerate() {
            let err = probs[cls] - if cls == y as usize { 1.0 } else { 0.0 };
            for (k, &xv) in x.iter().enumerate() {
                grow[k] += err * xv;
            }
            grow[dim - 1] += err;
        }
    }
    if norm == Norm::L2 {
        for (grow, wrow) in grad.iter_mut().zip(weights) {
            for k in 0..dim - 1 {
                grow[k] += wrow[k] / c;
            }
        }
    }
    grad
}

/// Objective value at arbitrary weights; exposed for gradient verification.
#[doc(hidden)]
pub fn objective(w: &[Vec<f64>], xs: &[Vec<f64>], ys: &[u8], c: f64, norm: Norm) -> f64 {
    loss(w, xs, ys, c, norm)
}

/// Analytic gradient at arbitrary weights; exposed for gradient verification.
#[doc(hidden)]
pub fn objective_gradient(
    w: &[Vec<f64>],
    xs: &[Vec<f64>],
    ys: &[u8],
    c: f64,
    norm: Norm,
) -> Vec<Vec<f64>> {
    gradient(w, xs, ys, c, norm)
}

const MAX_ITERATIONS: usize = 5000;
const RELATIVE_TOL: f64 = 1e-8;
const ARMIJO: f64 = 1e-4;

/// Full-batch gradient descent with a backtracking (Armijo) line search.
/// Accepted steps never increase the loss; stops on relative loss change
/// below 1e-8 or after 5000 iterations.
fn optimize(
    mut weights: Vec<Vec<f64>>,
    xs: &[Vec<f64>],
    ys: &[u8],
    c: f64,
    norm: Norm,
) -> (Vec<Vec<f64>>, StageMeta) {
    let dim = weights[0].len();
    let initial_loss = loss(&weights, xs, ys, c, norm);
    let mut current = initial_loss;
    let mut step = 1.0 / (1.0 + xs.len() as f64);
    let mut iterations = 0;
    let mut converged = false;

    for _ in 0..MAX_ITERATIONS {
        iterations += 1;
        let grad = gradient(&weights, xs, ys, c, norm);
        let grad_sq: f64 = grad.iter().flatten().map(|g| g * g).sum();
        if grad_sq == 0.0 {
            converged = true;
            break;
        }
        // Grow the trial step so the search can accelerate after cautious
        // iterations, then backtrack until the Armijo condition holds.
        step *= 2.0;
        let mut accepted = false;
        for _ in 0..80 {
            let mut trial = weights.clone();
            for (trow, grow) in trial.iter_mut().zip(&grad) {
                for k in 0..dim {
                    trow[k] -= step * grow[k];
                }
            }
            let trial_loss = loss(&trial, xs, ys, c, norm);
            if trial_loss <= current - ARMIJO * step * grad_sq {
                let relative = (current - trial_loss) / current.abs().max(1.0);
                weights = trial;
                current = trial_loss;
                accepted = true;
                if relative < RELATIVE_TOL {
                    converged = true;
                }
                break;
            }
            step *= 0.5;
        }
        if !accepted || converged {
            converged = converged || !accepted;
            break;
        }
    }

    let meta = StageMeta {
        name: String::new(),
        samples: xs.len(),
        iterations,
        initial_loss,
        final_loss: current,
        converged,
    };
    (weights, meta)
}

fn collect_features<F>(
    pairs: &[LabeledPair],
    features_fn: &F,
) -> Result<(Vec<Vec<f64>>, Vec<u8>, usize)>
where
    F: Fn(&LabeledPair) -> Result<Vec<f64>>,
{
    if pairs.is_empty() {
        return Err(Error::validation("train: empty pair list"));
    }
    let mut xs = Vec::with_capacity(pairs.len());
    let mut ys = Vec::with_capacity(pairs.len());
    let mut dim = None;
    for pair in pairs {
        pair.validate()?;
        let features = features_fn(pair)?;
        if features.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteFeature {
                id_a: pair.id_a.clone(),
                id_b: pair.id_b.clone(),
            });
        }
        match dim {
            None => dim = Some(features.len()),
            Some(d) if d != features.len() => {
                return Err(Error::Dimension {
                    expected: d,
                    actual: features.len(),
                })
            }
            _ => {}
        }
        xs.push(features);
        ys.push(pair.label);
    }
    let mut distinct: Vec<u8> = ys.clone();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() < 2 {
        return Err(Error::validation("train: need at least 2 distinct labels"));
    }
    Ok((xs, ys, dim.expect("nonempty")))
}

/// Trains a 5-class model on labeled pairs. `init` warm-starts the weights;
/// otherwise they start at zero.
pub fn train<F>(
    pairs: &[LabeledPair],
    features_fn: F,
    c: f64,
    norm: Norm,
    init: Option<&PairClassifier>,
    params_used: &AlignmentParams,
) -> Result<PairClassifier>
where
    F: Fn(&LabeledPair) -> Result<Vec<f64>>,
{
    if c.is_nan() || c <= 0.0 {
        return Err(Error::validation("train: C must be positive"));
    }
    let (xs, ys, dim) = collect_features(pairs, &features_fn)?;
    let initial = match init {
        Some(model) => {
            if model.num_features() != dim {
                return Err(Error::Dimension {
                    expected: model.num_features(),
                    actual: dim,
                });
            }
            model.weights.clone()
        }
        None => vec![vec![0.0; dim + 1]; NUM_CLASSES],
    };
    let (weights, mut stage) = optimize(initial, &xs, &ys, c, norm);
    stage.name = "train".to_string();
    let mut stages = init
        .map(|m| m.train_meta.stages.clone())
        .unwrap_or_default();
    stages.push(stage);
    Ok(PairClassifier {
        weights,
        feature_names: crate::align::FEATURE_NAMES
            .iter()
            .map(|s| s.to_string())
            .collect(),
        params_used: *params_used,
        train_meta: TrainMeta { c, norm, stages },
    })
}

/// Two-stage training: fit on synthetic pairs from zeros, then continue on
/// the human-labeled pairs from the stage-1 weights. An empty synthetic set
/// degenerates to plain training on the human pairs.
pub fn two_stage_train<F>(
    synthetic: &[LabeledPair],
    human: &[LabeledPair],
    features_fn: F,
    c: f64,
    norm: Norm,
    params_used: &AlignmentParams,
) -> Result<PairClassifier>
where
    F: Fn(&LabeledPair) -> Result<Vec<f64>>,
{
    if human.is_empty() {
        return Err(Error::validation(
            "two_stage_train: human pair set is empty",
        ));
    }
    if synthetic.is_empty() {
        let mut model = train(human, features_fn, c, norm, None, params_used)?;
        model.train_meta.stages[0].name = "human".to_string();
        return Ok(model);
    }
    let mut stage1 = train(synthetic, &features_fn, c, norm, None, params_used)?;
    stage1.train_meta.stages[0].name = "synthetic".to_string();
    let mut model = train(human, features_fn, c, norm, Some(&stage1), params_used)?;
    let last = model.train_meta.stages.len() - 1;
    model.train_meta.stages[last].name = "human".to_string();
    Ok(model)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSplit {
    pub train: Vec<LabeledPair>,
    pub validation: Vec<LabeledPair>,
    pub test: Vec<LabeledPair>,
    pub ratios: (f64, f64, f64),
}

/// Seeded shuffle-and-cut split; sizes match the ratios within one element.
pub fn split_dataset(
    pairs: &[LabeledPair],
    ratios: (f64, f64, f64),
    seed: u64,
) -> Result<DatasetSplit> {
    let (r_train, r_val, r_test) = ratios;
    if r_train <= 0.0 || r_val < 0.0 || r_test < 0.0 {
        return Err(Error::validation("split: ratios must be positive"));
    }
    let total = r_train + r_val + r_test;
    if !(total.is_finite() && total > 0.0) {
        return Err(Error::validation("split: ratio sum must be positive"));
    }
    let mut shuffled: Vec<LabeledPair> = pairs.to_vec();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    shuffled.shuffle(&mut rng);
    let n = shuffled.len();
    let train_end = ((r_train / total) * n as f64).round() as usize;
    let val_end = (((r_train + r_val) / total) * n as f64).round() as usize;
    let val_end = val_end.clamp(train_end, n);
    let test: Vec<LabeledPair> = shuffled.split_off(val_end);
    let validation = shuffled.split_off(train_end.min(shuffled.len()));
    Ok(DatasetSplit {
        train: shuffled,
        validation,
        test,
        ratios,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridCell {
    pub c: f64,
    pub norm: Norm,
    pub validation_macro_f1: f64,
    pub validation_accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridReport {
    pub cells: Vec<GridCell>,
    pub best_c: f64,
    pub best_norm: Norm,
}

pub fn default_grid() -> Vec<(f64, Norm)> {
    let cs = [1e-3, 1e-2, 1e-1, 1.0, 1e1, 1e2, 1e3];
    let mut grid = Vec::with_capacity(cs.len() * 2);
    for &c in &cs {
        grid.push((c, Norm::L2));
        grid.push((c, Norm::None));
    }
    grid
}

/// Evaluates every grid cell on the validation split and picks the one with
/// the highest macro F1. Ties prefer stronger regularization (smaller C),
/// then `l2` over `none`.
pub fn grid_search<F>(
    split: &DatasetSplit,
    features_fn: F,
    grid: &[(f64, Norm)],
    params_used: &AlignmentParams,
) -> Result<(GridReport, PairClassifier)>
where
    F: Fn(&LabeledPair) -> Result<Vec<f64>>,
{
    if grid.is_empty() {
        return Err(Error::validation("grid_search: empty grid"));
    }
    if split.validation.is_empty() {
        return Err(Error::validation("grid_search: empty validation split"));
    }
    let gold: Vec<u8> = split.validation.iter().map(|p| p.label).collect();
    let mut cells = Vec::with_capacity(grid.len());
    let mut best: Option<(usize, PairClassifier)> = None;
    for &(c, norm) in grid {
        let model = train(&split.train, &features_fn, c, norm, None, params_used)?;
        let mut pred = Vec::with_capacity(split.validation.len());
        for pair in &split.validation {
            let features = features_fn(pair)?;
            pred.push(model.predict(&features)?.0);
        }
        let report = metrics::evaluate(&gold, &pred, NUM_CLASSES)?;
        cells.push(GridCell {
            c,
            norm,
            validation_macro_f1: report.macro_f1,
            validation_accuracy: report.accuracy,
        });
        let better = match &best {
            None => true,
            Some((idx, _)) => {
                let incumbent = &cells[*idx];
                let candidate = cells.last().expect("just pushed");
                candidate.validation_macro_f1 > incumbent.validation_macro_f1
                    || (candidate.validation_macro_f1 == incumbent.validation_macro_f1
                        && (candidate.c < incumbent.c
                            || (candidate.c == incumbent.c
                                && candidate.norm == Norm::L2
                                && incumbent.norm == Norm::None)))
            }
        };
        if better {
            best = Some((cells.len() - 1, model));
        }
    }
    let (best_idx, model) = best.expect("grid nonempty");
    let report = GridReport {
        cells: cells.clone(),
        best_c: cells[best_idx].c,
        best_norm: cells[best_idx].norm,
    };
    Ok((report, model))
}
