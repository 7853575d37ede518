//! Gradient-boosted regression trees on a second-order objective.
//!
//! Each round computes per-row gradients `g` and hessians `h` of the loss at
//! the current raw scores and fits a tree minimising
//! `Σ_leaves [G w + ½ (H + λ) w²] + γ T`. The optimal leaf value is
//! `w* = -G / (H + λ)`; shrinkage `eta` multiplies each tree's output when it
//! is added to the raw score.

mod model;
mod objective;
mod split;
mod tree;

pub use model::{load_model, save_model, train, train_regression, GbtModel, MODEL_SCHEMA_VERSION};
pub use objective::{grad_hess, sigmoid, softmax_into, Gradients, Objective};
pub use split::{best_split, leaf_weight, split_gain, Split, SplitParams};
pub use tree::{build_tree, Node, Tree, TreeBuilder};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainParams {
    pub eta: f64,
    pub rounds: usize,
    pub max_depth: usize,
    pub lambda: f64,
    pub gamma: f64,
    pub min_child_weight: f64,
    /// Training is deterministic; the seed is carried for callers that derive
    /// splits from it.
    pub seed: u64,
}

impl Default for TrainParams {
    fn default() -> Self {
        Self {
            eta: 0.3,
            rounds: 100,
            max_depth: 6,
            lambda: 1.0,
            gamma: 0.0,
            min_child_weight: 1.0,
            seed: 0,
        }
    }
}

impl TrainParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::invalid(msg));
        if !(self.eta > 0.0 && self.eta <= 1.0) {
            return bad(format!("eta must lie in (0, 1], got {}", self.eta));
        }
        if self.rounds == 0 {
            return bad("rounds must be at least 1".into());
        }
        if self.max_depth == 0 {
            return bad("max_depth must be at least 1".into());
        }
        for (name, v) in [
            ("lambda", self.lambda),
            ("gamma", self.gamma),
            ("min_child_weight", self.min_child_weight),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return bad(format!("{name} must be a finite non-negative number, got {v}"));
            }
        }
        Ok(())
    }

    pub fn split_params(&self) -> SplitParams {
        SplitParams {
            lambda: self.lambda,
            gamma: self.gamma,
            min_child_weight: self.min_child_weight,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_params_are_valid() {
        TrainParams::default().validate().unwrap();
    }

    #[test]
    fn rejects_out_of_range_params() {
        let base = TrainParams::default();
        for p in [
            TrainParams { eta: 0.0, ..base.clone() },
            TrainParams { eta: 1.5, ..base.clone() },
            TrainParams { rounds: 0, ..base.clone() },
            TrainParams { max_depth: 0, ..base.clone() },
            TrainParams { lambda: -1.0, ..base.clone() },
            TrainParams { gamma: f64::NAN, ..base.clone() },
        ] {
            assert!(p.validate().is_err(), "{p:?}");
        }
    }
}
