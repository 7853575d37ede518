//! Confusion matrices and accuracy / precision / recall / specificity / F1.
//!
//! A metric whose denominator is zero is `None` ("undefined") rather than 0,
//! and averages skip undefined entries while counting them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `K × K` counts; rows are true classes, columns predicted classes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    n_classes: usize,
    counts: Vec<Vec<u64>>,
}

impl ConfusionMatrix {
    pub fn zeros(n_classes: usize) -> Self {
        Self {
            n_classes,
            counts: vec![vec![0; n_classes]; n_classes],
        }
    }

    pub fn from_counts(counts: Vec<Vec<u64>>) -> Result<Self> {
        let k = counts.len();
        if counts.iter().any(|r| r.len() != k) {
            return Err(Error::ShapeMismatch {
                expected: format!("{k}x{k} counts"),
                found: "ragged rows".into(),
            });
        }
        Ok(Self {
            n_classes: k,
            counts,
        })
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn counts(&self) -> &[Vec<u64>] {
        &self.counts
    }

    pub fn get(&self, truth: usize, predicted: usize) -> u64 {
        self.counts[truth][predicted]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..self.n_classes).map(|i| self.counts[i][i]).sum()
    }

    /// Fraction of predictions on the diagonal; `None` for an empty matrix.
    pub fn accuracy(&self) -> Option<f64> {
        ratio(self.trace(), self.total())
    }

    /// One-vs-rest counts `(tp, fp, fn, tn)` for `class`.
    pub fn one_vs_rest(&self, class: usize) -> (u64, u64, u64, u64) {
        let tp = self.counts[class][class];
        let fp: u64 = (0..self.n_classes).map(|t| self.counts[t][class]).sum::<u64>() - tp;
        let fn_: u64 = self.counts[class].iter().sum::<u64>() - tp;
        let tn = self.total() - tp - fp - fn_;
        (tp, fp, fn_, tn)
    }
}

/// Tallies `(y_true[i], y_pred[i])` pairs.
pub fn confusion(y_true: &[usize], y_pred: &[usize], n_classes: usize) -> Result<ConfusionMatrix> {
    if y_true.len() != y_pred.len() {
        return Err(Error::ShapeMismatch {
            expected: format!("{} predictions", y_true.len()),
            found: format!("{}", y_pred.len()),
        });
    }
    let mut cm = ConfusionMatrix::zeros(n_classes);
    for (&t, &p) in y_true.iter().zip(y_pred) {
        for label in [t, p] {
            if label >= n_classes {
                return Err(Error::LabelOutOfRange { label, n_classes });
            }
        }
        cm.counts[t][p] += 1;
    }
    Ok(cm)
}

/// Sums confusion matrices element-wise (the pooled, "overlapped" matrix).
pub fn overlap(cms: &[ConfusionMatrix]) -> Result<ConfusionMatrix> {
    let first = cms
        .first()
        .ok_or_else(|| Error::invalid("no confusion matrices to overlap"))?;
    let mut sum = ConfusionMatrix::zeros(first.n_classes);
    for cm in cms {
        if cm.n_classes != first.n_classes {
            return Err(Error::ShapeMismatch {
                expected: format!("{} classes", first.n_classes),
                found: format!("{}", cm.n_classes),
            });
        }
        for (dst, src) in sum.counts.iter_mut().flatten().zip(cm.counts.iter().flatten()) {
            *dst += src;
        }
    }
    Ok(sum)
}

/// What a [`MetricsReport`] describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "class", rename_all = "kebab-case")]
pub enum ReportScope {
    /// Binary metrics with this class as positive.
    Positive(usize),
    /// One-vs-rest metrics for this class.
    PerClass(usize),
    /// Unweighted mean over per-class reports.
    Macro,
}

/// Number of inputs whose metric was undefined when building an average.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct UndefinedCounts {
    pub accuracy: usize,
    pub precision: usize,
    pub recall: usize,
    pub specificity: usize,
    pub f1: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub scope: ReportScope,
    pub accuracy: Option<f64>,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub specificity: Option<f64>,
    /// Harmonic mean of this report's precision and recall for reports built
    /// from counts; the mean of the inputs' F1 for averaged reports.
    pub f1: Option<f64>,
    #[serde(default)]
    pub undefined: UndefinedCounts,
}

fn ratio(num: u64, den: u64) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

impl MetricsReport {
    fn from_counts(scope: ReportScope, tp: u64, fp: u64, fn_: u64, tn: u64) -> Self {
        let precision = ratio(tp, tp + fp);
        let recall = ratio(tp, tp + fn_);
        let f1 = match (precision, recall) {
            (Some(p), Some(r)) if p + r > 0.0 => Some(2.0 * r * p / (r + p)),
            (Some(_), Some(_)) => Some(0.0),
            _ => None,
        };
        Self {
            scope,
            accuracy: ratio(tp + tn, tp + fp + fn_ + tn),
            precision,
            recall,
            specificity: ratio(tn, tn + fp),
            f1,
            undefined: UndefinedCounts::default(),
        }
    }
}

/// Binary metrics reading `positive` as the positive class.
pub fn binary_metrics(cm: &ConfusionMatrix, positive: usize) -> Result<MetricsReport> {
    if cm.n_classes != 2 {
        return Err(Error::invalid(format!(
            "binary metrics need 2 classes, got {}",
            cm.n_classes
        )));
    }
    if positive > 1 {
        return Err(Error::LabelOutOfRange {
            label: positive,
            n_classes: 2,
        });
    }
    let (tp, fp, fn_, tn) = cm.one_vs_rest(positive);
    Ok(MetricsReport::from_counts(ReportScope::Positive(positive), tp, fp, fn_, tn))
}

/// One-vs-rest metrics for every class.
pub fn per_class_metrics(cm: &ConfusionMatrix) -> Result<Vec<MetricsReport>> {
    if cm.n_classes < 2 {
        return Err(Error::invalid("per-class metrics need at least 2 classes"));
    }
    Ok((0..cm.n_classes)
        .map(|c| {
            let (tp, fp, fn_, tn) = cm.one_vs_rest(c);
            MetricsReport::from_counts(ReportScope::PerClass(c), tp, fp, fn_, tn)
        })
        .collect())
}

fn mean_defined(values: impl Iterator<Item = Option<f64>>) -> (Option<f64>, usize) {
    let (mut sum, mut n, mut undefined) = (0.0, 0usize, 0usize);
    for v in values {
        match v {
            Some(v) => {
                sum += v;
                n += 1;
            }
            None => undefined += 1,
        }
    }
    ((n > 0).then(|| sum / n as f64), undefined)
}

fn average(reports: &[MetricsReport], scope: ReportScope) -> MetricsReport {
    let (accuracy, ua) = mean_defined(reports.iter().map(|r| r.accuracy));
    let (precision, up) = mean_defined(reports.iter().map(|r| r.precision));
    let (recall, ur) = mean_defined(reports.iter().map(|r| r.recall));
    let (specificity, us) = mean_defined(reports.iter().map(|r| r.specificity));
    let (f1, uf) = mean_defined(reports.iter().map(|r| r.f1));
    MetricsReport {
        scope,
        accuracy,
        precision,
        recall,
        specificity,
        f1,
        undefined: UndefinedCounts {
            accuracy: ua,
            precision: up,
            recall: ur,
            specificity: us,
            f1: uf,
        },
    }
}

/// Per-metric mean over the defined values of `reports`.
pub fn macro_average(reports: &[MetricsReport]) -> Result<MetricsReport> {
    if reports.is_empty() {
        return Err(Error::invalid("cannot average an empty list of reports"));
    }
    Ok(average(reports, ReportScope::Macro))
}

/// Per-metric mean across folds (not the metrics of pooled counts).
///
/// All reports must share one scope, which the result keeps.
pub fn fold_average(reports: &[MetricsReport]) -> Result<MetricsReport> {
    let first = reports
        .first()
        .ok_or_else(|| Error::invalid("cannot average an empty list of reports"))?;
    if reports.iter().any(|r| r.scope != first.scope) {
        return Err(Error::invalid("fold reports describe different scopes"));
    }
    Ok(average(reports, first.scope))
}
