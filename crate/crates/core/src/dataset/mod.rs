//! Feature tables, label encoding and deterministic stratified splits.

mod csv_io;
mod split;

pub use csv_io::{load_feature_csv, read_named_columns, save_feature_csv, NamedColumns};
pub use split::{stratified_kfold, train_val_split, SplitPlan};

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Sorted, gap-free mapping between class names and integer ids.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LabelEncoding {
    classes: Vec<String>,
}

impl LabelEncoding {
    /// Builds an encoding from already sorted, distinct class names.
    pub fn from_classes(classes: Vec<String>) -> Result<Self> {
        if classes.is_empty() {
            return Err(Error::invalid("label encoding needs at least one class"));
        }
        if classes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid(
                "class names must be distinct and sorted lexicographically",
            ));
        }
        Ok(Self { classes })
    }

    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn id(&self, name: &str) -> Option<usize> {
        self.classes
            .binary_search_by(|c| c.as_str().cmp(name))
            .ok()
    }

    pub fn name(&self, id: usize) -> Option<&str> {
        self.classes.get(id).map(String::as_str)
    }
}

/// Distinct names sorted lexicographically (byte order) and numbered `0..K`.
pub fn encode_labels<S: AsRef<str>>(names: &[S]) -> Result<LabelEncoding> {
    if names.is_empty() {
        return Err(Error::invalid("cannot encode an empty label list"));
    }
    let mut classes: Vec<String> = names.iter().map(|s| s.as_ref().to_owned()).collect();
    classes.sort_unstable();
    classes.dedup();
    Ok(LabelEncoding { classes })
}

/// Feature matrix with aligned class labels.
///
/// Every value is finite, there is at least one row and one feature, and
/// every label is below `n_classes`.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTable {
    values: Matrix,
    labels: Vec<usize>,
    n_classes: usize,
    feature_names: Vec<String>,
}

impl FeatureTable {
    pub fn new(
        values: Matrix,
        labels: Vec<usize>,
        n_classes: usize,
        feature_names: Vec<String>,
    ) -> Result<Self> {
        if values.rows() == 0 {
            return Err(Error::invalid("feature table needs at least one row"));
        }
        if labels.len() != values.rows() {
            return Err(Error::ShapeMismatch {
                expected: format!("{} labels", values.rows()),
                found: format!("{} labels", labels.len()),
            });
        }
        if feature_names.len() != values.cols() {
            return Err(Error::ShapeMismatch {
                expected: format!("{} feature names", values.cols()),
                found: format!("{} feature names", feature_names.len()),
            });
        }
        if let Some(&label) = labels.iter().find(|&&l| l >= n_classes) {
            return Err(Error::LabelOutOfRange { label, n_classes });
        }
        if let Some(pos) = values.as_slice().iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!(
                "non-finite value at row {}, column {}",
                pos / values.cols(),
                pos % values.cols()
            )));
        }
        let mut seen = HashSet::with_capacity(feature_names.len());
        for name in &feature_names {
            if !seen.insert(name.as_str()) {
                return Err(Error::DuplicateFeature(name.clone()));
            }
        }
        Ok(Self {
            values,
            labels,
            n_classes,
            feature_names,
        })
    }

    /// Table with generated feature names `f0..f{d-1}` and `K = max(label) + 1`.
    pub fn from_parts(values: Matrix, labels: Vec<usize>) -> Result<Self> {
        let n_classes = labels.iter().max().map_or(0, |m| m + 1);
        let names = (0..values.cols()).map(|j| format!("f{j}")).collect();
        Self::new(values, labels, n_classes, names)
    }

    pub fn values(&self) -> &Matrix {
        &self.values
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn n_rows(&self) -> usize {
        self.values.rows()
    }

    pub fn n_features(&self) -> usize {
        self.values.cols()
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    /// Number of rows per class id.
    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.n_classes];
        for &l in &self.labels {
            counts[l] += 1;
        }
        counts
    }

    /// Rows `rows` (in that order), keeping `K` and the feature names.
    pub fn subset_rows(&self, rows: &[usize]) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::invalid("row subset is empty"));
        }
        if let Some(&bad) = rows.iter().find(|&&r| r >= self.n_rows()) {
            return Err(Error::invalid(format!(
                "row {bad} out of range for {} rows",
                self.n_rows()
            )));
        }
        Ok(Self {
            values: self.values.select_rows(rows),
            labels: rows.iter().map(|&r| self.labels[r]).collect(),
            n_classes: self.n_classes,
            feature_names: self.feature_names.clone(),
        })
    }

    /// Columns `cols` (in that order), keeping labels.
    pub fn subset_columns(&self, cols: &[usize]) -> Result<Self> {
        if cols.is_empty() {
            return Err(Error::invalid("column subset is empty"));
        }
        let values = self.values.select_columns(cols)?;
        Ok(Self {
            values,
            labels: self.labels.clone(),
            n_classes: self.n_classes,
            feature_names: cols.iter().map(|&c| self.feature_names[c].clone()).collect(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn encoding_is_lexicographic() {
        let enc = encode_labels(&["pneumonia", "covid", "normal"]).unwrap();
        assert_eq!(enc.classes(), ["covid", "normal", "pneumonia"]);
        assert_eq!(enc.id("covid"), Some(0));
        assert_eq!(enc.id("normal"), Some(1));
        assert_eq!(enc.id("pneumonia"), Some(2));
        assert_eq!(enc.id("other"), None);
    }

    #[test]
    fn encoding_collapses_duplicates() {
        let enc = encode_labels(&["a", "a", "a"]).unwrap();
        assert_eq!(enc.len(), 1);
        assert_eq!(enc.id("a"), Some(0));

        let enc = encode_labels(&["b", "a", "b", "a"]).unwrap();
        assert_eq!(enc.classes(), ["a", "b"]);
    }

    #[test]
    fn empty_class_name_is_legal() {
        let enc = encode_labels(&["", "x"]).unwrap();
        assert_eq!(enc.id(""), Some(0));
        assert!(encode_labels::<&str>(&[]).is_err());
    }

    #[test]
    fn table_rejects_bad_labels_and_shapes() {
        let m = Matrix::new(2, 1, vec![0.0, 1.0]).unwrap();
        assert!(matches!(
            FeatureTable::new(m.clone(), vec![0, 2], 2, vec!["f0".into()]),
            Err(Error::LabelOutOfRange { label: 2, .. })
        ));
        assert!(FeatureTable::new(m.clone(), vec![0], 2, vec!["f0".into()]).is_err());
        let nan = Matrix::new(1, 1, vec![f64::NAN]).unwrap();
        assert!(FeatureTable::new(nan, vec![0], 1, vec!["f0".into()]).is_err());
        let two = Matrix::new(1, 2, vec![0.0, 1.0]).unwrap();
        assert!(matches!(
            FeatureTable::new(two, vec![0], 1, vec!["a".into(), "a".into()]),
            Err(Error::DuplicateFeature(_))
        ));
    }

    #[test]
    fn subsets_keep_class_count() {
        let m = Matrix::from_rows(&[[1.0, 2.0], [3.0, 4.0], [5.0, 6.0]]).unwrap();
        let t = FeatureTable::from_parts(m, vec![0, 1, 2]).unwrap();
        let s = t.subset_rows(&[2, 0]).unwrap();
        assert_eq!(s.n_classes(), 3);
        assert_eq!(s.labels(), [2, 0]);
        assert_eq!(s.values().row(0), [5.0, 6.0]);
        let c = t.subset_columns(&[1]).unwrap();
        assert_eq!(c.feature_names(), ["f1"]);
        assert_eq!(c.values().column(0).collect::<Vec<_>>(), [2.0, 4.0, 6.0]);
    }
}
