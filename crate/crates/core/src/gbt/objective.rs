use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Loss minimised by boosting.
///
/// `SquaredError` is a plain regression loss (`½(y - ŷ)²`). Its derivatives
/// are exact, which makes it convenient for checking the booster itself.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Objective {
    BinaryLogistic,
    Softmax { n_classes: usize },
    SquaredError,
}

impl Objective {
    pub fn softmax(n_classes: usize) -> Result<Self> {
        if n_classes < 2 {
            return Err(Error::invalid("softmax needs at least two classes"));
        }
        Ok(Objective::Softmax { n_classes })
    }

    /// Raw scores per sample: 1, or `K` for softmax.
    pub fn n_outputs(&self) -> usize {
        match *self {
            Objective::Softmax { n_classes } => n_classes,
            _ => 1,
        }
    }

    /// Number of classes, or `None` for regression.
    pub fn n_classes(&self) -> Option<usize> {
        match *self {
            Objective::BinaryLogistic => Some(2),
            Objective::Softmax { n_classes } => Some(n_classes),
            Objective::SquaredError => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Objective::BinaryLogistic => "binary-logistic",
            Objective::Softmax { .. } => "softmax",
            Objective::SquaredError => "squared-error",
        }
    }

    pub(crate) fn from_name(name: &str, n_classes: usize) -> Result<Self> {
        match name {
            "binary-logistic" if n_classes == 2 => Ok(Objective::BinaryLogistic),
            "softmax" => Objective::softmax(n_classes),
            "squared-error" => Ok(Objective::SquaredError),
            "binary-logistic" => Err(Error::Corrupt(format!(
                "binary-logistic with n_classes = {n_classes}"
            ))),
            other => Err(Error::Corrupt(format!("unknown objective {other:?}"))),
        }
    }

    fn class_of(&self, target: f64) -> Result<usize> {
        let k = self.n_classes().unwrap_or(0);
        if target < 0.0 || target.fract() != 0.0 || target >= k as f64 {
            return Err(Error::invalid(format!(
                "target {target} is not a class id below {k}"
            )));
        }
        Ok(target as usize)
    }

    /// Loss of one sample given its raw score row.
    pub fn loss(&self, target: f64, raw: &[f64]) -> Result<f64> {
        check_width(self, raw.len())?;
        Ok(match self {
            Objective::BinaryLogistic => {
                let y = self.class_of(target)? as f64;
                // log(1 + e^s) - y s, computed without overflow.
                softplus(raw[0]) - y * raw[0]
            }
            Objective::Softmax { .. } => {
                let y = self.class_of(target)?;
                log_sum_exp(raw) - raw[y]
            }
            Objective::SquaredError => {
                let r = target - raw[0];
                0.5 * r * r
            }
        })
    }
}

fn check_width(objective: &Objective, width: usize) -> Result<()> {
    if width != objective.n_outputs() {
        return Err(Error::ShapeMismatch {
            expected: format!("{} raw scores per sample", objective.n_outputs()),
            found: format!("{width}"),
        });
    }
    Ok(())
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// Row-wise softmax with max subtraction; writes into `out`.
pub fn softmax_into(logits: &[f64], out: &mut [f64]) {
    let m = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut total = 0.0;
    for (o, &x) in out.iter_mut().zip(logits) {
        *o = (x - m).exp();
        total += *o;
    }
    for o in out.iter_mut() {
        *o /= total;
    }
}

/// First and second derivatives of the loss, row-major `n × width`.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub grad: Vec<f64>,
    pub hess: Vec<f64>,
    pub width: usize,
}

impl Gradients {
    /// Gradient and hessian of output column `c`, one entry per sample.
    pub fn column(&self, c: usize) -> (Vec<f64>, Vec<f64>) {
        let g = self.grad.iter().skip(c).step_by(self.width).copied().collect();
        let h = self.hess.iter().skip(c).step_by(self.width).copied().collect();
        (g, h)
    }
}

/// Derivatives of the loss with respect to the raw scores.
///
/// Binary: `p = σ(ŷ)`, `g = p - y`, `h = p(1 - p)`. Softmax: per class
/// `g_c = p_c - [y = c]`, `h_c = p_c(1 - p_c)`. Squared error: `g = ŷ - y`,
/// `h = 1`. For classification, targets are class ids stored as `f64`.
pub fn grad_hess(objective: &Objective, targets: &[f64], raw_scores: &[f64]) -> Result<Gradients> {
    let width = objective.n_outputs();
    if raw_scores.len() != targets.len() * width {
        return Err(Error::ShapeMismatch {
            expected: format!("{} raw scores", targets.len() * width),
            found: format!("{}", raw_scores.len()),
        });
    }
    let mut grad = vec![0.0; raw_scores.len()];
    let mut hess = vec![0.0; raw_scores.len()];
    match objective {
        Objective::BinaryLogistic => {
            for (i, &t) in targets.iter().enumerate() {
                let y = objective.class_of(t)? as f64;
                let p = sigmoid(raw_scores[i]);
                grad[i] = p - y;
                hess[i] = p * (1.0 - p);
            }
        }
        Objective::Softmax { .. } => {
            let mut p = vec![0.0; width];
            for (i, &t) in targets.iter().enumerate() {
                let y = objective.class_of(t)?;
                let row = i * width..(i + 1) * width;
                softmax_into(&raw_scores[row.clone()], &mut p);
                for c in 0..width {
                    let indicator = if c == y { 1.0 } else { 0.0 };
                    grad[row.start + c] = p[c] - indicator;
                    hess[row.start + c] = p[c] * (1.0 - p[c]);
                }
            }
        }
        Objective::SquaredError => {
            for (i, &t) in targets.iter().enumerate() {
                if !t.is_finite() {
                    return Err(Error::invalid("regression targets must be finite"));
                }
                grad[i] = raw_scores[i] - t;
                hess[i] = 1.0;
            }
        }
    }
    Ok(Gradients { grad, hess, width })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binary_examples() {
        let gh = grad_hess(&Objective::BinaryLogistic, &[1.0], &[0.0]).unwrap();
        assert_eq!((gh.grad[0], gh.hess[0]), (-0.5, 0.25));
        let gh = grad_hess(&Objective::BinaryLogistic, &[0.0], &[0.0]).unwrap();
        assert_eq!((gh.grad[0], gh.hess[0]), (0.5, 0.25));
    }

    #[test]
    fn softmax_uniform_example() {
        let obj = Objective::softmax(3).unwrap();
        let gh = grad_hess(&obj, &[0.0], &[0.0, 0.0, 0.0]).unwrap();
        let third = 1.0 / 3.0;
        assert!((gh.grad[0] + 2.0 / 3.0).abs() < 1e-15);
        assert!((gh.grad[1] - third).abs() < 1e-15);
        assert!((gh.grad[2] - third).abs() < 1e-15);
        for h in gh.hess {
            assert!((h - 2.0 / 9.0).abs() < 1e-15);
        }
    }

    #[test]
    fn shape_and_label_errors() {
        let obj = Objective::softmax(3).unwrap();
        assert!(matches!(
            grad_hess(&obj, &[0.0], &[0.0, 0.0]),
            Err(Error::ShapeMismatch { .. })
        ));
        assert!(grad_hess(&obj, &[3.0], &[0.0; 3]).is_err());
        assert!(grad_hess(&Objective::BinaryLogistic, &[0.5], &[0.0]).is_err());
        assert!(Objective::softmax(1).is_err());
    }

    #[test]
    fn extreme_scores_stay_finite() {
        for s in [-1e6, -700.0, 0.0, 700.0, 1e6] {
            let gh = grad_hess(&Objective::BinaryLogistic, &[1.0], &[s]).unwrap();
            assert!(gh.grad[0].is_finite() && gh.hess[0].is_finite());
            assert!(Objective::BinaryLogistic.loss(0.0, &[s]).unwrap().is_finite());
        }
        let mut p = [0.0; 3];
        softmax_into(&[1000.0, 0.0, 0.0], &mut p);
        assert_eq!(p[0], 1.0);
        assert!(p[1] >= 0.0 && p[1] < 1e-300);
    }

    #[test]
    fn names_round_trip() {
        for obj in [
            Objective::BinaryLogistic,
            Objective::softmax(4).unwrap(),
            Objective::SquaredError,
        ] {
            let k = obj.n_classes().unwrap_or(0);
            assert_eq!(Objective::from_name(obj.name(), k).unwrap(), obj);
        }
        assert!(Objective::from_name("binary-logistic", 3).is_err());
        assert!(Objective::from_name("rank:pairwise", 2).is_err());
    }
}
