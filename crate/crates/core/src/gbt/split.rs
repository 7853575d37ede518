//! Exact greedy split search over second-order statistics.

use std::cmp::Ordering;

use crate::matrix::Matrix;

/// Hessian floor used when `lambda == 0`, so saturated leaves stay finite.
pub(crate) const HESS_FLOOR: f64 = 1e-16;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitParams {
    pub lambda: f64,
    pub gamma: f64,
    pub min_child_weight: f64,
}

/// A candidate partition: rows with `x[feature] < threshold` go left.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Split {
    pub feature: usize,
    pub threshold: f64,
    /// Objective reduction net of `gamma`; always positive for a returned split.
    pub gain: f64,
}

#[inline]
fn denominator(h: f64, lambda: f64) -> f64 {
    if lambda == 0.0 {
        h.max(HESS_FLOOR)
    } else {
        h + lambda
    }
}

/// `-G / (H + λ)`.
#[inline]
pub fn leaf_weight(g_sum: f64, h_sum: f64, lambda: f64) -> f64 {
    -g_sum / denominator(h_sum, lambda)
}

#[inline]
fn structure_score(g: f64, h: f64, lambda: f64) -> f64 {
    g * g / denominator(h, lambda)
}

/// `½[G_L²/(H_L+λ) + G_R²/(H_R+λ) − G²/(H+λ)] − γ`.
pub fn split_gain(g_left: f64, h_left: f64, g_right: f64, h_right: f64, params: &SplitParams) -> f64 {
    let lambda = params.lambda;
    0.5 * (structure_score(g_left, h_left, lambda) + structure_score(g_right, h_right, lambda)
        - structure_score(g_left + g_right, h_left + h_right, lambda))
        - params.gamma
}

/// Sums of `grad` and `hess` over `rows`, accumulated in the order given.
pub(crate) fn totals(rows: &[usize], grad: &[f64], hess: &[f64]) -> (f64, f64) {
    rows.iter()
        .fold((0.0, 0.0), |(g, h), &r| (g + grad[r], h + hess[r]))
}

/// Midpoint of two consecutive distinct values, never rounded onto `lo`.
#[inline]
fn midpoint(lo: f64, hi: f64) -> f64 {
    let mid = lo + (hi - lo) / 2.0;
    if mid > lo {
        mid
    } else {
        hi
    }
}

pub(crate) fn by_value_then_row(values: &Matrix, feature: usize) -> impl Fn(&usize, &usize) -> Ordering + '_ {
    move |&a, &b| {
        values
            .get(a, feature)
            .total_cmp(&values.get(b, feature))
            .then(a.cmp(&b))
    }
}

/// Scans one feature whose node rows are sorted by value, updating `best`
/// when a strictly better admissible split is found.
#[allow(clippy::too_many_arguments)]
pub(crate) fn scan_feature(
    feature: usize,
    sorted_rows: &[usize],
    values: &Matrix,
    grad: &[f64],
    hess: &[f64],
    (g_total, h_total): (f64, f64),
    params: &SplitParams,
    best: &mut Option<Split>,
) {
    let mut g_left = 0.0;
    let mut h_left = 0.0;
    for pair in sorted_rows.windows(2) {
        let (row, next) = (pair[0], pair[1]);
        g_left += grad[row];
        h_left += hess[row];
        let (x, x_next) = (values.get(row, feature), values.get(next, feature));
        if x_next <= x {
            continue;
        }
        let g_right = g_total - g_left;
        let h_right = h_total - h_left;
        if h_left < params.min_child_weight || h_right < params.min_child_weight {
            continue;
        }
        let gain = split_gain(g_left, h_left, g_right, h_right, params);
        if gain > 0.0 && best.is_none_or(|b| gain > b.gain) {
            *best = Some(Split {
                feature,
                threshold: midpoint(x, x_next),
                gain,
            });
        }
    }
}

/// Best admissible split of `samples`, scanning every feature and every
/// midpoint between consecutive distinct values.
///
/// Among equal gains the lower feature index wins, then the lower threshold.
/// Returns `None` for fewer than two samples or when no split has positive
/// gain with both children meeting `min_child_weight`.
pub fn best_split(
    samples: &[usize],
    grad: &[f64],
    hess: &[f64],
    values: &Matrix,
    params: &SplitParams,
) -> Option<Split> {
    if samples.len() < 2 {
        return None;
    }
    let mut rows = samples.to_vec();
    rows.sort_unstable();
    let sums = totals(&rows, grad, hess);
    let mut best = None;
    for feature in 0..values.cols() {
        rows.sort_by(by_value_then_row(values, feature));
        scan_feature(feature, &rows, values, grad, hess, sums, params, &mut best);
    }
    best
}
