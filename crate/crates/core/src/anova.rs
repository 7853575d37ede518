//! One-way ANOVA F-test feature scoring and top-k selection.
//!
//! For each feature the rows are grouped by class. With `K` classes and `N`
//! rows, the between-group mean square is
//! `Σ_i n_i (mean_i - grand_mean)² / (K - 1)` and the within-group mean square
//! is `Σ_i Σ_j (x_ij - mean_i)² / (N - K)`. The score is their ratio.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::FeatureTable;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FScoreTable {
    pub msb: Vec<f64>,
    pub msw: Vec<f64>,
    /// `msb / msw`; `+inf` when only `msw` is zero, `0` when both are.
    pub f: Vec<f64>,
    pub df_between: usize,
    pub df_within: usize,
    /// Feature indices by descending `f`, ties by ascending index.
    pub ranking: Vec<usize>,
}

impl FScoreTable {
    pub fn n_features(&self) -> usize {
        self.f.len()
    }

    /// Writes `feature,msb,msw,f,rank` with 1-based ranks.
    pub fn write_csv(&self, feature_names: &[String], path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        if feature_names.len() != self.n_features() {
            return Err(Error::ShapeMismatch {
                expected: format!("{} feature names", self.n_features()),
                found: format!("{}", feature_names.len()),
            });
        }
        let mut rank = vec![0; self.n_features()];
        for (pos, &j) in self.ranking.iter().enumerate() {
            rank[j] = pos + 1;
        }
        let io = |e| Error::io(path, e);
        let mut w = BufWriter::new(File::create(path).map_err(io)?);
        writeln!(w, "feature,msb,msw,f,rank").map_err(io)?;
        for j in 0..self.n_features() {
            writeln!(
                w,
                "{},{:?},{:?},{:?},{}",
                feature_names[j], self.msb[j], self.msw[j], self.f[j], rank[j]
            )
            .map_err(io)?;
        }
        w.flush().map_err(io)
    }
}

fn f_ratio(msb: f64, msw: f64) -> f64 {
    if msw > 0.0 {
        msb / msw
    } else if msb > 0.0 {
        f64::INFINITY
    } else {
        0.0
    }
}

/// Scores every feature of `table`.
///
/// Requires `K >= 2`, `N > K` and at least one row per class. Features are
/// scored in parallel; results are assembled by feature index.
pub fn f_scores(table: &FeatureTable) -> Result<FScoreTable> {
    let k = table.n_classes();
    let n = table.n_rows();
    if k < 2 {
        return Err(Error::invalid("ANOVA needs at least two classes"));
    }
    if n <= k {
        return Err(Error::invalid(format!(
            "ANOVA needs more rows than classes ({n} rows, {k} classes)"
        )));
    }
    let counts = table.class_counts();
    if let Some(c) = counts.iter().position(|&c| c == 0) {
        return Err(Error::Stratification(format!("class {c} has no samples")));
    }

    let labels = table.labels();
    let values = table.values();
    let df_between = k - 1;
    let df_within = n - k;

    let per_feature: Vec<(f64, f64)> = (0..table.n_features())
        .into_par_iter()
        .map(|j| {
            // Pass 1: group sums.
            let mut sums = vec![0.0; k];
            for (x, &l) in values.column(j).zip(labels) {
                sums[l] += x;
            }
            let grand_mean = sums.iter().sum::<f64>() / n as f64;
            let means: Vec<f64> = sums
                .iter()
                .zip(&counts)
                .map(|(s, &c)| s / c as f64)
                .collect();
            // Pass 2: deviations from the group means.
            let mut ss_within = 0.0;
            for (x, &l) in values.column(j).zip(labels) {
                let d = x - means[l];
                ss_within += d * d;
            }
            let ss_between: f64 = means
                .iter()
                .zip(&counts)
                .map(|(m, &c)| {
                    let d = m - grand_mean;
                    c as f64 * d * d
                })
                .sum();
            (ss_between / df_between as f64, ss_within / df_within as f64)
        })
        .collect();

    let (msb, msw): (Vec<f64>, Vec<f64>) = per_feature.into_iter().unzip();
    if msb.iter().chain(&msw).any(|v| !v.is_finite()) {
        return Err(Error::invalid("feature values overflow the variance computation"));
    }
    let f: Vec<f64> = msb.iter().zip(&msw).map(|(&b, &w)| f_ratio(b, w)).collect();
    let ranking = rank_by_score(&f);
    Ok(FScoreTable {
        msb,
        msw,
        f,
        df_between,
        df_within,
        ranking,
    })
}

fn rank_by_score(f: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..f.len()).collect();
    // Stable sort keeps ascending index among equal scores.
    order.sort_by(|&a, &b| f[b].total_cmp(&f[a]));
    order
}

/// Feature indices by descending F (`+inf` first), ties by ascending index.
pub fn rank_features(scores: &FScoreTable) -> Vec<usize> {
    rank_by_score(&scores.f)
}

/// Keeps the first `k` features of `ranking`, columns in ranking order.
///
/// Returns the reduced table and the selected indices in the original
/// feature space.
pub fn select_top_k(
    table: &FeatureTable,
    ranking: &[usize],
    k: usize,
) -> Result<(FeatureTable, Vec<usize>)> {
    if k == 0 || k > table.n_features() || k > ranking.len() {
        return Err(Error::invalid(format!(
            "cannot select {k} of {} features",
            table.n_features()
        )));
    }
    let selected = ranking[..k].to_vec();
    Ok((table.subset_columns(&selected)?, selected))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::Matrix;

    fn one_feature(values: &[f64], labels: &[usize]) -> FeatureTable {
        let m = Matrix::new(values.len(), 1, values.to_vec()).unwrap();
        FeatureTable::from_parts(m, labels.to_vec()).unwrap()
    }

    #[test]
    fn small_two_class_example() {
        let t = one_feature(&[0.0, 2.0, 1.0, 3.0], &[0, 0, 1, 1]);
        let s = f_scores(&t).unwrap();
        assert_eq!(s.msb, [1.0]);
        assert_eq!(s.msw, [2.0]);
        assert_eq!(s.f, [0.5]);
        assert_eq!((s.df_between, s.df_within), (1, 2));
    }

    #[test]
    fn zero_within_variance_is_infinite() {
        let labels = [0, 0, 1, 1, 2, 2];
        let t = one_feature(&[0.0, 0.0, 1.0, 1.0, 2.0, 2.0], &labels);
        let s = f_scores(&t).unwrap();
        assert_eq!(s.msw, [0.0]);
        assert!(s.msb[0] > 0.0);
        assert_eq!(s.f, [f64::INFINITY]);

        let shifted = one_feature(&[10.0, 10.0, 11.0, 11.0, 12.0, 12.0], &labels);
        assert_eq!(f_scores(&shifted).unwrap(), s);
    }

    #[test]
    fn constant_feature_scores_zero() {
        let t = one_feature(&[4.0; 4], &[0, 1, 0, 1]);
        let s = f_scores(&t).unwrap();
        assert_eq!((s.msb[0], s.msw[0], s.f[0]), (0.0, 0.0, 0.0));
    }

    #[test]
    fn preconditions() {
        // N <= K
        let t = one_feature(&[0.0, 1.0], &[0, 1]);
        assert!(f_scores(&t).is_err());
        // single class
        let t = one_feature(&[0.0, 1.0, 2.0], &[0, 0, 0]);
        assert!(f_scores(&t).is_err());
        // empty class
        let m = Matrix::new(4, 1, vec![0.0, 1.0, 2.0, 3.0]).unwrap();
        let t = FeatureTable::new(m, vec![0, 0, 2, 2], 3, vec!["f0".into()]).unwrap();
        assert!(matches!(f_scores(&t), Err(Error::Stratification(_))));
    }

    fn table_with_scores(f: Vec<f64>) -> FScoreTable {
        FScoreTable {
            msb: vec![0.0; f.len()],
            msw: vec![0.0; f.len()],
            ranking: vec![],
            df_between: 1,
            df_within: 1,
            f,
        }
    }

    #[test]
    fn ranking_rules() {
        assert_eq!(
            rank_features(&table_with_scores(vec![0.5, f64::INFINITY, 0.5])),
            [1, 0, 2]
        );
        assert_eq!(rank_features(&table_with_scores(vec![1.0; 4])), [0, 1, 2, 3]);
        assert_eq!(rank_features(&table_with_scores(vec![3.0, 1.0, 2.0])), [0, 2, 1]);
    }

    #[test]
    fn select_top_k_bounds_and_order() {
        let m = Matrix::from_rows(&[[1.0, 2.0, 3.0], [4.0, 5.0, 6.0]]).unwrap();
        let t = FeatureTable::from_parts(m, vec![0, 1]).unwrap();
        let (all, idx) = select_top_k(&t, &[2, 0, 1], 3).unwrap();
        assert_eq!(idx, [2, 0, 1]);
        assert_eq!(all.values().row(0), [3.0, 1.0, 2.0]);
        assert_eq!(all.feature_names(), ["f2", "f0", "f1"]);
        assert!(select_top_k(&t, &[2, 0, 1], 0).is_err());
        assert!(select_top_k(&t, &[2, 0, 1], 4).is_err());
    }

    #[test]
    fn score_dump() {
        let t = one_feature(&[0.0, 2.0, 1.0, 3.0], &[0, 0, 1, 1]);
        let s = f_scores(&t).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("scores.csv");
        s.write_csv(t.feature_names(), &p).unwrap();
        assert_eq!(
            std::fs::read_to_string(p).unwrap(),
            "feature,msb,msw,f,rank\nf0,1.0,2.0,0.5,1\n"
        );
    }
}
