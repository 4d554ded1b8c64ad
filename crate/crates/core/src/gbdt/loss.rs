use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Training objective, expressed over raw (link-space) scores.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Loss {
    /// Poisson negative log-likelihood with log link: `exp(s) - y*s`.
    Poisson,
    /// Logistic loss with positive examples weighted by `pos_weight`.
    WeightedLogistic { pos_weight: f64 },
}

pub(crate) fn sigmoid(s: f64) -> f64 {
    if s >= 0.0 {
        1.0 / (1.0 + (-s).exp())
    } else {
        let e = s.exp();
        e / (1.0 + e)
    }
}

/// `log(1 + exp(x))` without overflow.
fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

impl Loss {
    pub fn weighted_logistic(pos_weight: f64) -> Result<Self> {
        if !(pos_weight > 0.0 && pos_weight.is_finite()) {
            return Err(Error::argument(format!("pos_weight must be positive, got {pos_weight}")));
        }
        Ok(Loss::WeightedLogistic { pos_weight })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Loss::Poisson => "poisson",
            Loss::WeightedLogistic { .. } => "weighted_logistic",
        }
    }

    pub fn check_target(&self, y: f64) -> Result<()> {
        let ok = match self {
            Loss::Poisson => y >= 0.0 && y.is_finite(),
            Loss::WeightedLogistic { .. } => y == 0.0 || y == 1.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::argument(format!("target {y} is invalid for {} loss", self.name())))
        }
    }

    fn weight(&self, y: f64) -> f64 {
        match self {
            Loss::WeightedLogistic { pos_weight } if y == 1.0 => *pos_weight,
            _ => 1.0,
        }
    }

    /// Loss of one example at raw score `s`.
    pub fn value(&self, s: f64, y: f64) -> f64 {
        match self {
            Loss::Poisson => s.exp() - y * s,
            Loss::WeightedLogistic { .. } => {
                self.weight(y) * (y * softplus(-s) + (1.0 - y) * softplus(s))
            }
        }
    }

    /// First and second derivative of [`Loss::value`] in `s`.
    pub fn grad_hess(&self, s: f64, y: f64) -> Result<(f64, f64)> {
        self.check_target(y)?;
        Ok(self.grad_hess_unchecked(s, y))
    }

    pub(crate) fn grad_hess_unchecked(&self, s: f64, y: f64) -> (f64, f64) {
        match self {
            Loss::Poisson => {
                let mu = s.exp();
                (mu - y, mu)
            }
            Loss::WeightedLogistic { .. } => {
                let w = self.weight(y);
                let p = sigmoid(s);
                (w * (p - y), w * p * (1.0 - p))
            }
        }
    }

    /// Maps a raw score to the prediction scale.
    pub fn inverse_link(&self, s: f64) -> f64 {
        match self {
            Loss::Poisson => s.exp(),
            Loss::WeightedLogistic { .. } => sigmoid(s),
        }
    }

    /// Constant raw score minimising the loss over `targets`.
    pub fn base_score(&self, targets: &[f64]) -> Result<f64> {
        if targets.is_empty() {
            return Err(Error::argument("no training targets"));
        }
        match self {
            Loss::Poisson => {
                let mean = targets.iter().sum::<f64>() / targets.len() as f64;
                Ok((mean + 1e-12).ln())
            }
            Loss::WeightedLogistic { pos_weight } => {
                let pos = targets.iter().filter(|&&y| y == 1.0).count() as f64;
                let neg = targets.len() as f64 - pos;
                if pos == 0.0 || neg == 0.0 {
                    return Err(Error::argument("logistic training needs both classes"));
                }
                let p = pos_weight * pos / (pos_weight * pos + neg);
                Ok((p / (1.0 - p)).ln())
            }
        }
    }
}

/// Free-function form of [`Loss::grad_hess`].
pub fn grad_hess(loss: &Loss, raw_score: f64, target: f64) -> Result<(f64, f64)> {
    loss.grad_hess(raw_score, target)
}
