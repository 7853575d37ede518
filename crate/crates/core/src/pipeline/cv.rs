use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{Protocol, RunConfig, Selection, Task};
use crate::anova::f_scores;
use crate::dataset::{load_feature_csv, stratified_kfold, train_val_split, FeatureTable, LabelEncoding};
use crate::error::{Error, Result};
use crate::eval::{
    binary_metrics, confusion, fold_average, macro_average, overlap, per_class_metrics,
    ConfusionMatrix, MetricsReport,
};
use crate::gbt::{train, GbtModel, Objective};
use crate::rng::SplitMix64;

pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// Hooks called with the exact row sets each stage of a run touches.
///
/// `fold` is `None` for work done outside any fold (the global sweep, final
/// training). Callbacks may arrive from several threads.
pub trait RunObserver: Sync {
    fn scores_computed(&self, _fold: Option<usize>, _rows: &[usize]) {}
    fn validation_carved(&self, _fold: Option<usize>, _train: &[usize], _val: &[usize]) {}
}

/// Observer that ignores every event.
pub struct NoObserver;

impl RunObserver for NoObserver {}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub k: usize,
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    /// Feature count with the highest validation accuracy; ties to the smallest.
    pub best_k: usize,
    pub curve: Vec<SweepPoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldResult {
    pub fold: usize,
    pub n_train: usize,
    pub n_test: usize,
    pub n_features: usize,
    /// Selected columns in the original feature space, in ranking order.
    pub selected: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepResult>,
    pub confusion: ConfusionMatrix,
    /// Metrics for the positive class.
    pub metrics: MetricsReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub per_class: Option<Vec<MetricsReport>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub macro_average: Option<MetricsReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub total_seconds: f64,
    pub fold_seconds: Vec<f64>,
}

/// Per-fold and aggregate results of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub schema_version: u32,
    pub config: RunConfig,
    pub classes: Vec<String>,
    pub positive_class: usize,
    pub n_samples: usize,
    pub n_features_total: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub global_sweep: Option<SweepResult>,
    pub folds: Vec<FoldResult>,
    /// Mean of the per-fold positive-class metrics.
    pub average: MetricsReport,
    /// Multiclass: mean of the per-fold macro averages.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub macro_average: Option<MetricsReport>,
    /// Element-wise sum of the fold confusion matrices.
    pub overlapped: ConfusionMatrix,
    /// Positive-class metrics of the overlapped matrix.
    pub pooled: MetricsReport,
    /// Multiclass: macro average over the overlapped matrix.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pooled_macro: Option<MetricsReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timings: Option<Timings>,
}

impl CvReport {
    /// The report without wall-clock timings; identical across repeated runs.
    pub fn without_timings(&self) -> CvReport {
        CvReport {
            timings: None,
            ..self.clone()
        }
    }
}

/// Derives an independent seed for one purpose (and fold) from the run seed.
pub(crate) fn derive_seed(base: u64, purpose: u64, fold: u64) -> u64 {
    let mut rng = SplitMix64::new(base ^ purpose.rotate_left(32) ^ fold.wrapping_mul(0x9E37_79B9));
    rng.next_u64()
}

const SWEEP_STREAM: u64 = 1;
const RANDOM_SELECTION_STREAM: u64 = 2;
const HOLDOUT_STREAM: u64 = 3;

/// Shared, immutable state of one experiment.
pub(crate) struct Experiment<'a> {
    pub table: &'a FeatureTable,
    pub config: &'a RunConfig,
    pub objective: Objective,
    pub observer: &'a dyn RunObserver,
}

impl Experiment<'_> {
    /// Feature ranking computed from `rows` only.
    fn ranking(&self, rows: &[usize], fold: Option<usize>) -> Result<Vec<usize>> {
        match self.config.selection {
            Selection::Anova => {
                self.observer.scores_computed(fold, rows);
                let subset = self.table.subset_rows(rows)?;
                Ok(f_scores(&subset)?.ranking)
            }
            Selection::Random => {
                let mut order: Vec<usize> = (0..self.table.n_features()).collect();
                let stream = fold.map_or(u64::MAX, |f| f as u64);
                SplitMix64::new(derive_seed(self.config.seed, RANDOM_SELECTION_STREAM, stream))
                    .shuffle(&mut order);
                Ok(order)
            }
        }
    }

    fn fit(&self, rows: &[usize], columns: &[usize]) -> Result<GbtModel> {
        let subset = self.table.subset_rows(rows)?.subset_columns(columns)?;
        train(&subset, self.objective, &self.config.train_params())
    }

    fn predict(&self, model: &GbtModel, rows: &[usize], columns: &[usize]) -> Result<Vec<usize>> {
        let subset = self.table.subset_rows(rows)?.subset_columns(columns)?;
        model.predict_class(subset.values())
    }

    fn require_all_classes(&self, rows: &[usize], what: &str) -> Result<()> {
        let mut present = vec![false; self.table.n_classes()];
        for &r in rows {
            present[self.table.labels()[r]] = true;
        }
        match present.iter().position(|p| !p) {
            Some(c) => Err(Error::Stratification(format!("class {c} is missing from the {what}"))),
            None => Ok(()),
        }
    }

    /// Carves a validation split from `pool` and scores every grid size on it.
    pub fn sweep(&self, pool: &[usize], fold: Option<usize>) -> Result<SweepResult> {
        let grid = self.config.sweep_grid();
        if grid.is_empty() || grid.iter().any(|&k| k == 0 || k > self.table.n_features()) {
            return Err(Error::Config(format!(
                "sweep grid {}..={} does not fit {} features",
                self.config.k_min,
                self.config.k_max,
                self.table.n_features()
            )));
        }
        let seed = derive_seed(self.config.seed, SWEEP_STREAM, fold.map_or(u64::MAX, |f| f as u64));
        let (train_rows, val_rows) = train_val_split(pool, self.table.labels(), self.config.val_fraction, seed)?;
        self.require_all_classes(&val_rows, "sweep validation split")?;
        self.require_all_classes(&train_rows, "sweep training split")?;
        self.observer.validation_carved(fold, &train_rows, &val_rows);

        let ranking = self.ranking(&train_rows, fold)?;
        let truth: Vec<usize> = val_rows.iter().map(|&r| self.table.labels()[r]).collect();
        let curve = grid
            .par_iter()
            .map(|&k| {
                let columns = &ranking[..k];
                let model = self.fit(&train_rows, columns)?;
                let predicted = self.predict(&model, &val_rows, columns)?;
                let correct = truth.iter().zip(&predicted).filter(|(t, p)| t == p).count();
                Ok(SweepPoint {
                    k,
                    accuracy: correct as f64 / truth.len() as f64,
                })
            })
            .collect::<Vec<Result<_>>>()
            .into_iter()
            .collect::<Result<Vec<_>>>()?;

        let mut best = &curve[0];
        for point in &curve[1..] {
            if point.accuracy > best.accuracy {
                best = point;
            }
        }
        Ok(SweepResult {
            best_k: best.k,
            curve,
        })
    }

    fn run_fold(
        &self,
        fold: usize,
        train_rows: &[usize],
        test_rows: &[usize],
        positive: usize,
        global_k: Option<usize>,
    ) -> Result<FoldResult> {
        self.require_all_classes(train_rows, &format!("training rows of fold {fold}"))?;
        let (n_features, sweep) = match (self.config.n_features, global_k) {
            (Some(k), _) => (k, None),
            (None, Some(k)) => (k, None),
            (None, None) => {
                let s = self.sweep(train_rows, Some(fold))?;
                (s.best_k, Some(s))
            }
        };
        let ranking = self.ranking(train_rows, Some(fold))?;
        let selected = ranking[..n_features].to_vec();
        let model = self.fit(train_rows, &selected)?;
        let predicted = self.predict(&model, test_rows, &selected)?;
        let truth: Vec<usize> = test_rows.iter().map(|&r| self.table.labels()[r]).collect();
        let cm = confusion(&truth, &predicted, self.table.n_classes())?;

        let (metrics, per_class, macro_avg) = match self.config.task {
            Task::Binary => (binary_metrics(&cm, positive)?, None, None),
            Task::Multiclass => {
                let per_class = per_class_metrics(&cm)?;
                let macro_avg = macro_average(&per_class)?;
                (per_class[positive].clone(), Some(per_class), Some(macro_avg))
            }
        };
        Ok(FoldResult {
            fold,
            n_train: train_rows.len(),
            n_test: test_rows.len(),
            n_features,
            selected,
            sweep,
            confusion: cm,
            metrics,
            per_class,
            macro_average: macro_avg,
        })
    }
}

/// Loads the configured input and runs [`run_cv_on`].
pub fn run_cv(config: &RunConfig) -> Result<CvReport> {
    let (table, encoding) = load_feature_csv(&config.input)?;
    run_cv_on(&table, &encoding, config, &NoObserver)
}

/// Cross-validated (or hold-out) evaluation of the full pipeline.
///
/// Inside each fold the ranking, the optional sweep and the model use only
/// that fold's training rows. Folds run in parallel; results are ordered by
/// fold id.
pub fn run_cv_on(
    table: &FeatureTable,
    encoding: &LabelEncoding,
    config: &RunConfig,
    observer: &dyn RunObserver,
) -> Result<CvReport> {
    let started = Instant::now();
    config.validate_for(table.n_features())?;
    if encoding.len() != table.n_classes() {
        return Err(Error::invalid("label encoding does not match the table"));
    }
    let objective = config.objective(table.n_classes())?;
    let positive = config.positive_class_id(encoding)?;
    let experiment = Experiment {
        table,
        config,
        objective,
        observer,
    };

    let splits: Vec<(Vec<usize>, Vec<usize>)> = match config.protocol {
        Protocol::Cv => {
            let plan = stratified_kfold(table.labels(), config.folds, config.seed)?;
            (0..plan.k)
                .map(|f| (plan.train_indices(f), plan.test_indices(f)))
                .collect()
        }
        Protocol::Holdout => {
            let all: Vec<usize> = (0..table.n_rows()).collect();
            let seed = derive_seed(config.seed, HOLDOUT_STREAM, 0);
            vec![train_val_split(&all, table.labels(), config.holdout_fraction, seed)?]
        }
    };

    let global_sweep = if config.global_sweep && config.n_features.is_none() {
        let all: Vec<usize> = (0..table.n_rows()).collect();
        Some(experiment.sweep(&all, None)?)
    } else {
        None
    };
    let global_k = global_sweep.as_ref().map(|s| s.best_k);

    let timed: Vec<(FoldResult, f64)> = splits
        .par_iter()
        .enumerate()
        .map(|(fold, (train_rows, test_rows))| {
            let t = Instant::now();
            let r = experiment.run_fold(fold, train_rows, test_rows, positive, global_k)?;
            Ok((r, t.elapsed().as_secs_f64()))
        })
        .collect::<Vec<Result<_>>>()
        // First error by fold id, whichever thread finished first.
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let (folds, fold_seconds): (Vec<FoldResult>, Vec<f64>) = timed.into_iter().unzip();

    let overlapped = overlap(&folds.iter().map(|f| f.confusion.clone()).collect::<Vec<_>>())?;
    if overlapped.total() != folds.iter().map(|f| f.n_test as u64).sum::<u64>() {
        return Err(Error::Invariant("overlapped matrix total differs from tested rows".into()));
    }
    let average = fold_average(&folds.iter().map(|f| f.metrics.clone()).collect::<Vec<_>>())?;
    let (macro_avg, pooled, pooled_macro) = match config.task {
        Task::Binary => (None, binary_metrics(&overlapped, positive)?, None),
        Task::Multiclass => {
            let fold_macros: Vec<MetricsReport> =
                folds.iter().filter_map(|f| f.macro_average.clone()).collect();
            let pooled_per_class = per_class_metrics(&overlapped)?;
            (
                Some(macro_average(&fold_macros)?),
                pooled_per_class[positive].clone(),
                Some(macro_average(&pooled_per_class)?),
            )
        }
    };

    Ok(CvReport {
        schema_version: REPORT_SCHEMA_VERSION,
        config: config.clone(),
        classes: encoding.classes().to_vec(),
        positive_class: positive,
        n_samples: table.n_rows(),
        n_features_total: table.n_features(),
        global_sweep,
        folds,
        average,
        macro_average: macro_avg,
        overlapped,
        pooled,
        pooled_macro,
        timings: Some(Timings {
            total_seconds: started.elapsed().as_secs_f64(),
            fold_seconds,
        }),
    })
}

/// Loads the configured input and sweeps feature counts on it.
pub fn run_sweep(config: &RunConfig) -> Result<SweepResult> {
    let (table, encoding) = load_feature_csv(&config.input)?;
    run_sweep_on(&table, &encoding, config, &NoObserver)
}

/// Feature-count sweep over the whole table: a stratified validation split
/// is carved off, and each grid size is trained on the rest and scored on it.
pub fn run_sweep_on(
    table: &FeatureTable,
    encoding: &LabelEncoding,
    config: &RunConfig,
    observer: &dyn RunObserver,
) -> Result<SweepResult> {
    let sweep_config = RunConfig {
        n_features: None,
        ..config.clone()
    };
    sweep_config.validate_for(table.n_features())?;
    if encoding.len() != table.n_classes() {
        return Err(Error::invalid("label encoding does not match the table"));
    }
    let experiment = Experiment {
        table,
        config: &sweep_config,
        objective: config.objective(table.n_classes())?,
        observer,
    };
    let all: Vec<usize> = (0..table.n_rows()).collect();
    experiment.sweep(&all, None)
}
