// Independent reference implementations shared by the integration tests.
#![allow(dead_code)]

use anovaboost::{FeatureTable, Matrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub struct AnovaRef {
    pub msb: f64,
    pub msw: f64,
    pub f: f64,
}

/// Textbook one-way ANOVA for one column, written out term by term.
pub fn anova_oracle(x: &[f64], labels: &[usize], k: usize) -> AnovaRef {
    let n = x.len();
    let grand: f64 = x.iter().sum::<f64>() / n as f64;
    let mut ss_between = 0.0;
    let mut ss_within = 0.0;
    for class in 0..k {
        let members: Vec<f64> = x
            .iter()
            .zip(labels)
            .filter(|(_, &l)| l == class)
            .map(|(&v, _)| v)
            .collect();
        let mean = members.iter().sum::<f64>() / members.len() as f64;
        // Between: every member contributes (group mean - grand mean)^2.
        for _ in &members {
            ss_between += (mean - grand) * (mean - grand);
        }
        for v in &members {
            ss_within += (v - mean) * (v - mean);
        }
    }
    let msb = ss_between / (k - 1) as f64;
    let msw = ss_within / (n - k) as f64;
    AnovaRef { msb, msw, f: msb / msw }
}

/// Oracle F for every column of a table.
pub fn oracle_f_scores(table: &FeatureTable) -> Vec<f64> {
    (0..table.n_features())
        .map(|j| {
            let col: Vec<f64> = table.values().column(j).collect();
            anova_oracle(&col, table.labels(), table.n_classes()).f
        })
        .collect()
}

/// Top `k` oracle features by descending F, ties to the lower index.
pub fn oracle_top_k(table: &FeatureTable, k: usize) -> Vec<usize> {
    let f = oracle_f_scores(table);
    let mut idx: Vec<usize> = (0..f.len()).collect();
    idx.sort_by(|&a, &b| f[b].partial_cmp(&f[a]).unwrap().then(a.cmp(&b)));
    idx.truncate(k);
    idx
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random table where every class has at least one row and `n > k`.
pub fn random_table(rng: &mut ChaCha8Rng, n: usize, d: usize, k: usize) -> FeatureTable {
    let values: Vec<f64> = (0..n * d).map(|_| rng.random_range(-5.0..5.0)).collect();
    let labels: Vec<usize> = (0..n)
        .map(|i| if i < k { i } else { rng.random_range(0..k) })
        .collect();
    FeatureTable::new(
        Matrix::new(n, d, values).unwrap(),
        labels,
        k,
        (0..d).map(|j| format!("f{j}")).collect(),
    )
    .unwrap()
}

pub fn rel_err(actual: f64, expected: f64) -> f64 {
    if actual == expected {
        0.0
    } else {
        (actual - expected).abs() / expected.abs()
    }
}

/// 100 rows in the plane, labelled by the side of `x0 + 2 x1 = 0.5` they
/// fall on, with every point at least 0.05 from the boundary.
pub fn separable_set() -> FeatureTable {
    let mut r = rng(2024);
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    while rows.len() < 100 {
        let x0: f64 = r.random_range(-1.0..1.0);
        let x1: f64 = r.random_range(-1.0..1.0);
        let margin = (x0 + 2.0 * x1 - 0.5) / 5f64.sqrt();
        if margin.abs() < 0.05 {
            continue;
        }
        rows.push([x0, x1]);
        labels.push(usize::from(margin > 0.0));
    }
    FeatureTable::from_parts(Matrix::from_rows(&rows).unwrap(), labels).unwrap()
}
