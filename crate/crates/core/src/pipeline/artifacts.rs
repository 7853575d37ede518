use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::{RunConfig, Task};
use super::cv::{run_sweep_on, NoObserver, RunObserver, SweepResult};
use crate::anova::{f_scores, FScoreTable};
use crate::dataset::{load_feature_csv, read_named_columns, FeatureTable, LabelEncoding};
use crate::error::{Error, Result};
use crate::eval::{
    binary_metrics, confusion, macro_average, per_class_metrics, ConfusionMatrix, MetricsReport,
};
use crate::gbt::{load_model, save_model, train, GbtModel};

pub const SELECTION_SCHEMA_VERSION: u32 = 1;
pub const MODEL_FILE: &str = "model.json";
pub const SELECTION_FILE: &str = "selection.json";
pub const SCORES_FILE: &str = "scores.csv";

/// Which input columns a model reads, and how its class ids are named.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SelectionFile {
    pub schema_version: u32,
    pub classes: LabelEncoding,
    /// Names of the model's input columns, in model order.
    pub feature_names: Vec<String>,
    /// The same columns as indices into the training CSV.
    pub selected_indices: Vec<usize>,
    pub n_features_total: usize,
}

impl SelectionFile {
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut text = serde_json::to_string_pretty(self).expect("selection serialization cannot fail");
        text.push('\n');
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let file: SelectionFile =
            serde_json::from_str(&text).map_err(|e| Error::Corrupt(format!("{}: {e}", path.display())))?;
        if file.schema_version != SELECTION_SCHEMA_VERSION {
            return Err(Error::SchemaVersion {
                found: file.schema_version,
                supported: SELECTION_SCHEMA_VERSION,
            });
        }
        if file.feature_names.len() != file.selected_indices.len() || file.feature_names.is_empty() {
            return Err(Error::Corrupt("selection names and indices disagree".into()));
        }
        if file.selected_indices.iter().any(|&i| i >= file.n_features_total) {
            return Err(Error::Corrupt("selected index beyond the feature count".into()));
        }
        Ok(file)
    }
}

/// Result of [`run_select`].
#[derive(Debug, Clone)]
pub struct SelectOutcome {
    pub scores: FScoreTable,
    pub feature_names: Vec<String>,
    pub scores_path: PathBuf,
}

/// Scores every feature of the configured input and writes `scores.csv`
/// into the output directory.
pub fn run_select(config: &RunConfig) -> Result<SelectOutcome> {
    let (table, _) = load_feature_csv(&config.input)?;
    let scores = f_scores(&table)?;
    create_dir(&config.out_dir)?;
    let scores_path = config.out_dir.join(SCORES_FILE);
    scores.write_csv(table.feature_names(), &scores_path)?;
    Ok(SelectOutcome {
        scores,
        feature_names: table.feature_names().to_vec(),
        scores_path,
    })
}

/// Result of [`run_train`].
#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: GbtModel,
    pub selection: SelectionFile,
    /// Present when the feature count came from a sweep.
    pub sweep: Option<SweepResult>,
    pub model_path: PathBuf,
    pub selection_path: PathBuf,
}

/// Trains on the whole configured input and writes `model.json` and
/// `selection.json` into the output directory.
pub fn run_train(config: &RunConfig) -> Result<TrainOutcome> {
    let (table, encoding) = load_feature_csv(&config.input)?;
    run_train_on(&table, &encoding, config, &NoObserver)
}

pub fn run_train_on(
    table: &FeatureTable,
    encoding: &LabelEncoding,
    config: &RunConfig,
    observer: &dyn RunObserver,
) -> Result<TrainOutcome> {
    config.validate_for(table.n_features())?;
    let objective = config.objective(table.n_classes())?;
    let (k, sweep) = match config.n_features {
        Some(k) => (k, None),
        None => {
            let s = run_sweep_on(table, encoding, config, observer)?;
            (s.best_k, Some(s))
        }
    };
    let all: Vec<usize> = (0..table.n_rows()).collect();
    observer.scores_computed(None, &all);
    let ranking = f_scores(table)?.ranking;
    let selected = ranking[..k].to_vec();
    let reduced = table.subset_columns(&selected)?;
    let model = train(&reduced, objective, &config.train_params())?;

    let selection = SelectionFile {
        schema_version: SELECTION_SCHEMA_VERSION,
        classes: encoding.clone(),
        feature_names: reduced.feature_names().to_vec(),
        selected_indices: selected,
        n_features_total: table.n_features(),
    };
    create_dir(&config.out_dir)?;
    let model_path = config.out_dir.join(MODEL_FILE);
    let selection_path = config.out_dir.join(SELECTION_FILE);
    save_model(&model, &model_path)?;
    selection.save(&selection_path)?;
    Ok(TrainOutcome {
        model,
        selection,
        sweep,
        model_path,
        selection_path,
    })
}

/// Predictions for every row of a CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct Predictions {
    pub classes: LabelEncoding,
    pub predicted: Vec<usize>,
    /// `n × K` class probabilities.
    pub proba: crate::matrix::Matrix,
    /// The CSV's `label` cells, when present.
    pub truth: Option<Vec<String>>,
}

impl Predictions {
    /// Writes `row,predicted_label,proba_0..proba_{K-1}`.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let io = |e| Error::io(path, e);
        let mut w = BufWriter::new(File::create(path).map_err(io)?);
        write!(w, "row,predicted_label").map_err(io)?;
        for c in 0..self.classes.len() {
            write!(w, ",proba_{c}").map_err(io)?;
        }
        writeln!(w).map_err(io)?;
        for (i, &p) in self.predicted.iter().enumerate() {
            let name = self.classes.name(p).expect("prediction within the encoding");
            write!(w, "{i},{}", csv_field(name)).map_err(io)?;
            for v in self.proba.row(i) {
                write!(w, ",{v:?}").map_err(io)?;
            }
            writeln!(w).map_err(io)?;
        }
        w.flush().map_err(io)
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_owned()
    }
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

/// Applies a saved model to a CSV, picking its columns by name.
///
/// Columns the selection does not mention are ignored; a missing selected
/// column is an error.
pub fn run_predict(
    model_path: impl AsRef<Path>,
    selection_path: impl AsRef<Path>,
    csv_path: impl AsRef<Path>,
) -> Result<Predictions> {
    let selection = SelectionFile::load(selection_path)?;
    let model = load_model(model_path)?;
    predict_with(&model, &selection, csv_path)
}

pub fn predict_with(
    model: &GbtModel,
    selection: &SelectionFile,
    csv_path: impl AsRef<Path>,
) -> Result<Predictions> {
    if model.n_features_expected() != selection.feature_names.len() {
        return Err(Error::ShapeMismatch {
            expected: format!("{} model inputs", model.n_features_expected()),
            found: format!("{} selected features", selection.feature_names.len()),
        });
    }
    if model.objective().n_classes() != Some(selection.classes.len()) {
        return Err(Error::ShapeMismatch {
            expected: format!("{:?} model classes", model.objective().n_classes()),
            found: format!("{} encoded classes", selection.classes.len()),
        });
    }
    let columns = read_named_columns(csv_path, &selection.feature_names)?;
    let predicted = model.predict_class(&columns.values)?;
    let proba = model.predict_proba(&columns.values)?;
    Ok(Predictions {
        classes: selection.classes.clone(),
        predicted,
        proba,
        truth: columns.labels,
    })
}

/// Metrics of a saved model on a labelled CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub classes: Vec<String>,
    pub positive_class: usize,
    pub confusion: ConfusionMatrix,
    pub metrics: MetricsReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub per_class: Option<Vec<MetricsReport>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub macro_average: Option<MetricsReport>,
}

/// Scores predictions against the CSV's `label` column.
///
/// Labels outside the stored encoding are a data error.
pub fn evaluate(predictions: &Predictions, config: &RunConfig) -> Result<Evaluation> {
    let truth_names = predictions
        .truth
        .as_ref()
        .ok_or(Error::MissingLabelColumn)?;
    let truth = truth_names
        .iter()
        .map(|n| {
            predictions
                .classes
                .id(n)
                .ok_or_else(|| Error::invalid(format!("label {n:?} unknown to the model")))
        })
        .collect::<Result<Vec<_>>>()?;
    let k = predictions.classes.len();
    let cm = confusion(&truth, &predictions.predicted, k)?;
    let positive = config.positive_class_id(&predictions.classes)?;
    let (metrics, per_class, macro_avg) = match (config.task, k) {
        (Task::Binary, 2) => (binary_metrics(&cm, positive)?, None, None),
        _ => {
            let per_class = per_class_metrics(&cm)?;
            let macro_avg = macro_average(&per_class)?;
            (per_class[positive].clone(), Some(per_class), Some(macro_avg))
        }
    };
    Ok(Evaluation {
        classes: predictions.classes.classes().to_vec(),
        positive_class: positive,
        confusion: cm,
        metrics,
        per_class,
        macro_average: macro_avg,
    })
}
