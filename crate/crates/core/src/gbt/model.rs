use std::path::Path;

use serde::{Deserialize, Serialize};

use super::objective::{grad_hess, sigmoid, softmax_into, Objective};
use super::tree::{Tree, TreeBuilder};
use super::TrainParams;
use crate::dataset::FeatureTable;
use crate::error::{Error, Result};
use crate::matrix::Matrix;

pub const MODEL_SCHEMA_VERSION: u32 = 1;

/// A trained forest.
///
/// Trees are stored round-major: for softmax with `K` classes, tree
/// `t * K + c` belongs to round `t` and contributes to class `c`.
#[derive(Debug, Clone, PartialEq)]
pub struct GbtModel {
    objective: Objective,
    base_score: f64,
    eta: f64,
    n_features_expected: usize,
    trees: Vec<Tree>,
}

impl GbtModel {
    pub fn new(
        objective: Objective,
        base_score: f64,
        eta: f64,
        n_features_expected: usize,
        trees: Vec<Tree>,
    ) -> Result<Self> {
        if !base_score.is_finite() {
            return Err(Error::Corrupt("base_score is not finite".into()));
        }
        if !(eta > 0.0 && eta <= 1.0) {
            return Err(Error::Corrupt(format!("eta {eta} outside (0, 1]")));
        }
        if n_features_expected == 0 {
            return Err(Error::Corrupt("model expects zero features".into()));
        }
        if !trees.len().is_multiple_of(objective.n_outputs()) {
            return Err(Error::Corrupt(format!(
                "{} trees is not a multiple of {} outputs",
                trees.len(),
                objective.n_outputs()
            )));
        }
        for tree in &trees {
            tree.validate(n_features_expected)?;
        }
        Ok(Self {
            objective,
            base_score,
            eta,
            n_features_expected,
            trees,
        })
    }

    pub fn objective(&self) -> Objective {
        self.objective
    }

    pub fn base_score(&self) -> f64 {
        self.base_score
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn n_features_expected(&self) -> usize {
        self.n_features_expected
    }

    pub fn trees(&self) -> &[Tree] {
        &self.trees
    }

    pub fn n_rounds(&self) -> usize {
        self.trees.len() / self.objective.n_outputs()
    }

    /// The model as it stood after its first `rounds` boosting rounds.
    pub fn truncated(&self, rounds: usize) -> GbtModel {
        let keep = rounds.min(self.n_rounds()) * self.objective.n_outputs();
        GbtModel {
            trees: self.trees[..keep].to_vec(),
            ..self.clone()
        }
    }

    /// Complexity penalty of the forest: `Σ_t [γ T_t + ½ λ Σ_leaves (eta·w)²]`,
    /// measured on each tree's contribution to the raw score.
    pub fn regularization(&self, lambda: f64, gamma: f64) -> f64 {
        self.trees
            .iter()
            .map(|t| {
                let l2: f64 = t.leaf_weights().map(|w| (self.eta * w).powi(2)).sum();
                gamma * t.n_leaves() as f64 + 0.5 * lambda * l2
            })
            .sum()
    }

    fn check_columns(&self, x: &Matrix) -> Result<()> {
        if x.cols() != self.n_features_expected {
            return Err(Error::ShapeMismatch {
                expected: format!("{} feature columns", self.n_features_expected),
                found: format!("{}", x.cols()),
            });
        }
        Ok(())
    }

    fn accumulate(&self, row: &[f64], out: &mut [f64]) {
        let width = out.len();
        out.fill(self.base_score);
        for (t, tree) in self.trees.iter().enumerate() {
            out[t % width] += self.eta * tree.predict_row(row);
        }
    }

    /// Raw scores, `n × 1` (binary, regression) or `n × K` (softmax).
    pub fn predict_raw(&self, x: &Matrix) -> Result<Matrix> {
        self.check_columns(x)?;
        let width = self.objective.n_outputs();
        let mut out = vec![0.0; x.rows() * width];
        for (row, dst) in x.iter_rows().zip(out.chunks_exact_mut(width)) {
            self.accumulate(row, dst);
        }
        Matrix::new(x.rows(), width, out)
    }

    /// Class probabilities, `n × K`. Binary rows are `(1 - σ(ŷ), σ(ŷ))`.
    pub fn predict_proba(&self, x: &Matrix) -> Result<Matrix> {
        let raw = self.predict_raw(x)?;
        let k = self
            .objective
            .n_classes()
            .ok_or_else(|| Error::invalid("regression models have no class probabilities"))?;
        let mut out = vec![0.0; x.rows() * k];
        for (scores, dst) in raw.iter_rows().zip(out.chunks_exact_mut(k)) {
            match self.objective {
                Objective::BinaryLogistic => {
                    let p = sigmoid(scores[0]);
                    dst[0] = 1.0 - p;
                    dst[1] = p;
                }
                _ => softmax_into(scores, dst),
            }
        }
        Matrix::new(x.rows(), k, out)
    }

    /// Most probable class, ties to the smallest id.
    ///
    /// Decided on the raw scores (the links are monotone), so a binary score
    /// is class 1 exactly when it is positive.
    pub fn predict_class(&self, x: &Matrix) -> Result<Vec<usize>> {
        if self.objective.n_classes().is_none() {
            return Err(Error::invalid("regression models do not predict classes"));
        }
        let raw = self.predict_raw(x)?;
        Ok(raw
            .iter_rows()
            .map(|scores| match self.objective {
                Objective::BinaryLogistic => usize::from(scores[0] > 0.0),
                _ => argmax(scores),
            })
            .collect())
    }

    pub fn to_json(&self) -> String {
        let file = ModelFile {
            schema_version: MODEL_SCHEMA_VERSION,
            objective: self.objective.name().to_owned(),
            n_classes: self.objective.n_classes().unwrap_or(0),
            base_score: self.base_score,
            eta: self.eta,
            n_features_expected: self.n_features_expected,
            trees: self.trees.clone(),
        };
        serde_json::to_string(&file).expect("model serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| Error::Corrupt(e.to_string()))?;
        let version = value
            .get("schema_version")
            .and_then(serde_json::Value::as_u64)
            .ok_or_else(|| Error::Corrupt("missing schema_version".into()))?;
        if version != u64::from(MODEL_SCHEMA_VERSION) {
            return Err(Error::SchemaVersion {
                found: u32::try_from(version).unwrap_or(u32::MAX),
                supported: MODEL_SCHEMA_VERSION,
            });
        }
        let file: ModelFile =
            serde_json::from_value(value).map_err(|e| Error::Corrupt(e.to_string()))?;
        let objective = Objective::from_name(&file.objective, file.n_classes)?;
        GbtModel::new(
            objective,
            file.base_score,
            file.eta,
            file.n_features_expected,
            file.trees,
        )
    }
}

fn argmax(xs: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in xs.iter().enumerate().skip(1) {
        if x > xs[best] {
            best = i;
        }
    }
    best
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFile {
    schema_version: u32,
    objective: String,
    n_classes: usize,
    base_score: f64,
    eta: f64,
    n_features_expected: usize,
    trees: Vec<Tree>,
}

pub fn save_model(model: &GbtModel, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut text = model.to_json();
    text.push('\n');
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn load_model(path: impl AsRef<Path>) -> Result<GbtModel> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    GbtModel::from_json(&text)
}

/// Trains a classifier on `table`'s labels.
pub fn train(table: &FeatureTable, objective: Objective, params: &TrainParams) -> Result<GbtModel> {
    let k = objective.n_classes().ok_or_else(|| {
        Error::invalid("regression objectives take explicit targets; use train_regression")
    })?;
    if let Some(&label) = table.labels().iter().find(|&&l| l >= k) {
        return Err(Error::LabelOutOfRange { label, n_classes: k });
    }
    let targets: Vec<f64> = table.labels().iter().map(|&l| l as f64).collect();
    fit(table.values(), &targets, objective, params)
}

/// Trains a squared-error regressor on `targets`.
pub fn train_regression(values: &Matrix, targets: &[f64], params: &TrainParams) -> Result<GbtModel> {
    if targets.len() != values.rows() {
        return Err(Error::ShapeMismatch {
            expected: format!("{} targets", values.rows()),
            found: format!("{}", targets.len()),
        });
    }
    fit(values, targets, Objective::SquaredError, params)
}

fn fit(values: &Matrix, targets: &[f64], objective: Objective, params: &TrainParams) -> Result<GbtModel> {
    params.validate()?;
    if values.rows() == 0 {
        return Err(Error::invalid("cannot train on an empty table"));
    }
    let base_score = 0.0;
    let width = objective.n_outputs();
    let builder = TreeBuilder::new(values);
    let mut scores = vec![base_score; values.rows() * width];
    let mut trees = Vec::with_capacity(params.rounds * width);

    for _ in 0..params.rounds {
        let gradients = grad_hess(&objective, targets, &scores)?;
        for c in 0..width {
            let (g, h) = gradients.column(c);
            let tree = builder.build(&g, &h, params);
            for (i, row) in values.iter_rows().enumerate() {
                scores[i * width + c] += params.eta * tree.predict_row(row);
            }
            trees.push(tree);
        }
    }
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(Error::Invariant("training produced non-finite raw scores".into()));
    }
    GbtModel::new(objective, base_score, params.eta, values.cols(), trees)
}
