use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::SplitMix64;

/// Fold assignment for k-fold cross-validation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitPlan {
    pub k: usize,
    pub fold_of: Vec<usize>,
    pub seed: u64,
}

impl SplitPlan {
    /// Held-out rows of `fold`, ascending.
    pub fn test_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.fold_of.len())
            .filter(|&i| self.fold_of[i] == fold)
            .collect()
    }

    /// Training rows of `fold` (every row not held out), ascending.
    pub fn train_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.fold_of.len())
            .filter(|&i| self.fold_of[i] != fold)
            .collect()
    }

    /// Writes `row_index,fold` CSV.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let io = |e| Error::io(path, e);
        let mut w = BufWriter::new(File::create(path).map_err(io)?);
        writeln!(w, "row_index,fold").map_err(io)?;
        for (i, f) in self.fold_of.iter().enumerate() {
            writeln!(w, "{i},{f}").map_err(io)?;
        }
        w.flush().map_err(io)
    }
}

/// Row indices grouped by class, ascending class id, preserving input order.
fn group_by_class(indices: impl IntoIterator<Item = usize>, labels: &[usize]) -> BTreeMap<usize, Vec<usize>> {
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in indices {
        groups.entry(labels[i]).or_default().push(i);
    }
    groups
}

/// Stratified k-fold assignment.
///
/// Classes are visited in ascending id order. Each class's rows (ascending)
/// are shuffled with one shared [`SplitMix64`] stream seeded with `seed`, then
/// dealt round-robin; the dealing position carries over from one class to the
/// next, so fold sizes overall also differ by at most one.
pub fn stratified_kfold(labels: &[usize], k: usize, seed: u64) -> Result<SplitPlan> {
    if k < 2 {
        return Err(Error::invalid(format!("fold count must be at least 2, got {k}")));
    }
    if k > labels.len() {
        return Err(Error::invalid(format!(
            "fold count {k} exceeds the number of samples {}",
            labels.len()
        )));
    }
    let mut rng = SplitMix64::new(seed);
    let mut fold_of = vec![0; labels.len()];
    let mut next = 0usize;
    for (_, mut members) in group_by_class(0..labels.len(), labels) {
        rng.shuffle(&mut members);
        for i in members {
            fold_of[i] = next % k;
            next += 1;
        }
    }
    Ok(SplitPlan { k, fold_of, seed })
}

/// Stratified, seeded split of `indices` into `(train, val)`, both ascending.
///
/// Per class, `round_half_up(count * val_fraction)` rows go to validation;
/// the remainder stays in training. Classes are visited in ascending id order
/// and share one shuffle stream, as in [`stratified_kfold`].
pub fn train_val_split(
    indices: &[usize],
    labels: &[usize],
    val_fraction: f64,
    seed: u64,
) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(val_fraction > 0.0 && val_fraction < 1.0) {
        return Err(Error::invalid(format!(
            "validation fraction must lie in (0, 1), got {val_fraction}"
        )));
    }
    if indices.len() < 2 {
        return Err(Error::invalid("need at least 2 samples to split"));
    }
    if let Some(&bad) = indices.iter().find(|&&i| i >= labels.len()) {
        return Err(Error::invalid(format!("index {bad} out of range")));
    }
    let mut rng = SplitMix64::new(seed);
    let mut train = Vec::with_capacity(indices.len());
    let mut val = Vec::new();
    for (_, mut members) in group_by_class(indices.iter().copied(), labels) {
        rng.shuffle(&mut members);
        let n_val = ((members.len() as f64 * val_fraction + 0.5).floor() as usize).min(members.len());
        val.extend_from_slice(&members[..n_val]);
        train.extend_from_slice(&members[n_val..]);
    }
    train.sort_unstable();
    val.sort_unstable();
    Ok((train, val))
}
