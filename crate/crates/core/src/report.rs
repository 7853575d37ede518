//! JSON and plain-text rendering of [`CvReport`]s.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::eval::{ConfusionMatrix, MetricsReport};
use crate::pipeline::{CvReport, REPORT_SCHEMA_VERSION};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Text,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(Self::Json),
            "text" => Ok(Self::Text),
            other => Err(Error::invalid(format!("unknown report format {other:?}"))),
        }
    }
}

/// Pretty JSON with a trailing newline. Includes timings when present.
pub fn to_json(report: &CvReport) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("report serialization cannot fail");
    s.push('\n');
    s
}

pub fn from_json(text: &str) -> Result<CvReport> {
    let report: CvReport = serde_json::from_str(text).map_err(|e| Error::Corrupt(e.to_string()))?;
    if report.schema_version != REPORT_SCHEMA_VERSION {
        return Err(Error::SchemaVersion {
            found: report.schema_version,
            supported: REPORT_SCHEMA_VERSION,
        });
    }
    Ok(report)
}

pub fn load_report(path: impl AsRef<Path>) -> Result<CvReport> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    from_json(&text)
}

pub fn render(report: &CvReport, format: ReportFormat) -> String {
    match format {
        ReportFormat::Json => to_json(report),
        ReportFormat::Text => to_text(report),
    }
}

pub fn emit_report(report: &CvReport, format: ReportFormat, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, render(report, format)).map_err(|e| Error::io(path, e))
}

type Getter = fn(&MetricsReport) -> Option<f64>;

/// Rows of the metric table, in display order.
const ROWS: [(&str, Getter); 5] = [
    ("Recall", |m| m.recall),
    ("Specificity", |m| m.specificity),
    ("Precision", |m| m.precision),
    ("F1-Score", |m| m.f1),
    ("Accuracy", |m| m.accuracy),
];

fn percent(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".to_owned(), |v| format!("{:.2}", 100.0 * v))
}

/// One metric table: a row per metric, a column per fold, then `Average`.
fn metric_table(out: &mut String, title: &str, folds: &[&MetricsReport], average: &MetricsReport) {
    let mut header = vec!["Metric (%)".to_owned()];
    header.extend((1..=folds.len()).map(|i| format!("Folds-{i}")));
    header.push("Average".to_owned());

    let mut rows = vec![header];
    for (name, get) in ROWS {
        let mut row = vec![name.to_owned()];
        row.extend(folds.iter().map(|m| percent(get(m))));
        row.push(percent(get(average)));
        rows.push(row);
    }
    let widths: Vec<usize> = (0..rows[0].len())
        .map(|c| rows.iter().map(|r| r[c].len()).max().unwrap_or(0))
        .collect();

    let _ = writeln!(out, "{title}");
    for row in &rows {
        let mut line = format!("{:<w$}", row[0], w = widths[0]);
        for (cell, w) in row.iter().zip(&widths).skip(1) {
            let _ = write!(line, "  {cell:>w$}");
        }
        let _ = writeln!(out, "{}", line.trim_end());
    }
}

fn single_column(out: &mut String, title: &str, m: &MetricsReport) {
    let _ = writeln!(out, "{title}");
    for (name, get) in ROWS {
        let _ = writeln!(out, "  {name:<12} {:>7}", percent(get(m)));
    }
}

fn confusion_text(out: &mut String, title: &str, cm: &ConfusionMatrix, classes: &[String]) {
    let _ = writeln!(out, "{title} (rows: true, columns: predicted)");
    let width = classes
        .iter()
        .map(String::len)
        .chain(cm.counts().iter().flatten().map(|c| c.to_string().len()))
        .max()
        .unwrap_or(1);
    let mut line = format!("{:<width$}", "");
    for c in classes {
        let _ = write!(line, "  {c:>width$}");
    }
    let _ = writeln!(out, "{line}");
    for (name, row) in classes.iter().zip(cm.counts()) {
        let mut line = format!("{name:<width$}");
        for v in row {
            let _ = write!(line, "  {v:>width$}");
        }
        let _ = writeln!(out, "{line}");
    }
}

/// Aligned plain-text tables: per-fold metrics with their average, the
/// multiclass macro view, pooled metrics and the overlapped confusion matrix.
pub fn to_text(report: &CvReport) -> String {
    let mut out = String::new();
    let positive = report
        .classes
        .get(report.positive_class)
        .map_or("?", String::as_str);
    let _ = writeln!(
        out,
        "{} samples, {} features, {} fold(s), positive class: {positive}",
        report.n_samples,
        report.n_features_total,
        report.folds.len()
    );
    let ks: Vec<String> = report.folds.iter().map(|f| f.n_features.to_string()).collect();
    let _ = writeln!(out, "Selected features per fold: {}", ks.join(", "));
    if let Some(s) = &report.global_sweep {
        let _ = writeln!(out, "Global sweep best k: {}", s.best_k);
    }
    let _ = writeln!(out);

    let per_fold: Vec<&MetricsReport> = report.folds.iter().map(|f| &f.metrics).collect();
    metric_table(&mut out, &format!("Class {positive}"), &per_fold, &report.average);

    if let Some(macro_avg) = &report.macro_average {
        let fold_macros: Vec<&MetricsReport> =
            report.folds.iter().filter_map(|f| f.macro_average.as_ref()).collect();
        let _ = writeln!(out);
        metric_table(&mut out, "Macro average over classes", &fold_macros, macro_avg);
    }

    let _ = writeln!(out);
    single_column(&mut out, &format!("Pooled over folds, class {positive}"), &report.pooled);
    if let Some(pm) = &report.pooled_macro {
        let _ = writeln!(out);
        single_column(&mut out, "Pooled over folds, macro average", pm);
    }
    let _ = writeln!(out);
    confusion_text(&mut out, "Overlapped confusion matrix", &report.overlapped, &report.classes);
    out
}
