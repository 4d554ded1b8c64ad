use std::path::Path;

use indexmap::IndexMap;
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::tree::{grow_tree, presort, SplitParams, TreeNode};
use super::{HyperConfig, Loss};
use crate::error::{Error, Result};
use crate::features::FeatureMatrix;

/// Model file format version.
pub const MODEL_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GbdtModel {
    pub version: u32,
    pub loss: Loss,
    /// Raw-score intercept.
    pub base_score: f64,
    /// Shrinkage applied to every tree output.
    pub eta: f64,
    pub column_names: Vec<String>,
    pub trees: Vec<TreeNode>,
}

/// Per-round training diagnostics.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainingTrace {
    /// Total training loss over all rows; entry 0 is the base score alone,
    /// entry `t` follows tree `t`.
    pub loss: Vec<f64>,
    /// `0.5 * lambda * sum(w^2)` over the leaves of each tree.
    pub penalty: Vec<f64>,
    /// Raw scores of every training row after the final round.
    pub final_scores: Vec<f64>,
}

impl GbdtModel {
    pub fn n_features(&self) -> usize {
        self.column_names.len()
    }

    fn check_columns(&self, matrix: &FeatureMatrix) -> Result<()> {
        if matrix.n_cols() != self.n_features() {
            return Err(Error::argument(format!(
                "model expects {} columns, matrix has {}",
                self.n_features(),
                matrix.n_cols()
            )));
        }
        if matrix.column_names() != self.column_names.as_slice() {
            return Err(Error::argument("matrix columns differ from the model's training columns"));
        }
        Ok(())
    }

    /// Raw score of one row.
    pub fn predict_raw_row(&self, x: &[f64]) -> f64 {
        let mut s = self.base_score;
        for t in &self.trees {
            s += self.eta * t.predict(x);
        }
        s
    }

    pub fn predict_raw(&self, matrix: &FeatureMatrix) -> Result<Vec<f64>> {
        self.check_columns(matrix)?;
        Ok((0..matrix.n_rows()).map(|r| self.predict_raw_row(matrix.row(r))).collect())
    }

    /// Predicted mean count (Poisson) or probability (logistic).
    pub fn predict(&self, matrix: &FeatureMatrix) -> Result<Vec<f64>> {
        Ok(self
            .predict_raw(matrix)?
            .into_iter()
            .map(|s| self.loss.inverse_link(s))
            .collect())
    }

    /// Share of internal nodes splitting on each column, in column order.
    /// All zeros if the model has no splits.
    pub fn feature_importance(&self) -> IndexMap<String, f64> {
        let mut counts = vec![0usize; self.n_features()];
        for t in &self.trees {
            t.for_each_split(&mut |f| counts[f] += 1);
        }
        let total: usize = counts.iter().sum();
        self.column_names
            .iter()
            .zip(counts)
            .map(|(name, c)| {
                let share = if total == 0 { 0.0 } else { c as f64 / total as f64 };
                (name.clone(), share)
            })
            .collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serialises")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let model: GbdtModel = serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        if model.version != MODEL_VERSION {
            return Err(Error::Parse {
                line: 1,
                column: 1,
                message: format!("unsupported model version {}", model.version),
            });
        }
        let d = model.n_features();
        for t in &model.trees {
            let mut bad = None;
            t.for_each_split(&mut |f| {
                if f >= d {
                    bad = Some(f);
                }
            });
            if let Some(f) = bad {
                return Err(Error::Parse {
                    line: 1,
                    column: 1,
                    message: format!("split on feature {f} but the model has {d} columns"),
                });
            }
        }
        Ok(model)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Load {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text)
    }
}

pub fn save_model(model: &GbdtModel, path: &Path) -> Result<()> {
    model.save(path)
}

pub fn load_model(path: &Path) -> Result<GbdtModel> {
    GbdtModel::load(path)
}

pub fn predict(model: &GbdtModel, matrix: &FeatureMatrix) -> Result<Vec<f64>> {
    model.predict(matrix)
}

pub fn feature_importance(model: &GbdtModel) -> IndexMap<String, f64> {
    model.feature_importance()
}

/// Trains a boosted tree model; deterministic in `config.seed`.
pub fn train(matrix: &FeatureMatrix, targets: &[f64], loss: Loss, config: &HyperConfig) -> Result<GbdtModel> {
    train_with_trace(matrix, targets, loss, config).map(|(m, _)| m)
}

pub fn train_with_trace(
    matrix: &FeatureMatrix,
    targets: &[f64],
    loss: Loss,
    config: &HyperConfig,
) -> Result<(GbdtModel, TrainingTrace)> {
    config.validate()?;
    let n = matrix.n_rows();
    let d = matrix.n_cols();
    if n == 0 {
        return Err(Error::argument("cannot train on an empty matrix"));
    }
    if targets.len() != n {
        return Err(Error::argument(format!("{} targets for {n} rows", targets.len())));
    }
    for &y in targets {
        loss.check_target(y)?;
    }
    let base_score = loss.base_score(targets)?;
    let params = SplitParams {
        lambda_l2: config.lambda_l2,
        min_child_weight: config.min_child_weight,
    };

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let sorted = presort(matrix);
    let mut scores = vec![base_score; n];
    let mut grad = vec![0.0; n];
    let mut hess = vec![0.0; n];
    let n_rows_tree = ((config.subsample * n as f64).round() as usize).clamp(1, n);
    let n_cols_tree = ((config.colsample * d as f64).round() as usize).clamp(1, d.max(1));

    let total_loss = |scores: &[f64]| -> f64 {
        scores.iter().zip(targets).map(|(&s, &y)| loss.value(s, y)).sum()
    };
    let mut trace = TrainingTrace {
        loss: vec![total_loss(&scores)],
        ..Default::default()
    };
    let mut trees = Vec::with_capacity(config.n_trees);
    for _ in 0..config.n_trees {
        for r in 0..n {
            let (g, h) = loss.grad_hess_unchecked(scores[r], targets[r]);
            grad[r] = g;
            hess[r] = h;
        }
        let mut in_sample = vec![n_rows_tree == n; n];
        if n_rows_tree < n {
            for r in sample(&mut rng, n, n_rows_tree) {
                in_sample[r] = true;
            }
        }
        let features: Vec<usize> = if d == 0 {
            Vec::new()
        } else if n_cols_tree < d {
            let mut f = sample(&mut rng, d, n_cols_tree).into_vec();
            f.sort_unstable();
            f
        } else {
            (0..d).collect()
        };
        let tree = grow_tree(
            matrix,
            &sorted,
            &grad,
            &hess,
            &in_sample,
            &features,
            config.max_depth,
            &params,
        )?;
        for (r, s) in scores.iter_mut().enumerate() {
            *s += config.eta * tree.predict(matrix.row(r));
        }
        if scores.iter().any(|s| !s.is_finite()) {
            return Err(Error::numeric("raw scores diverged during boosting"));
        }
        trace.loss.push(total_loss(&scores));
        trace
            .penalty
            .push(0.5 * config.lambda_l2 * tree.leaf_weights().iter().map(|w| w * w).sum::<f64>());
        trees.push(tree);
    }
    trace.final_scores = scores;

    let model = GbdtModel {
        version: MODEL_VERSION,
        loss,
        base_score,
        eta: config.eta,
        column_names: matrix.column_names().to_vec(),
        trees,
    };
    Ok((model, trace))
}
