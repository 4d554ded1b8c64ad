use std::collections::BTreeMap;
use std::path::Path;

use indexmap::IndexMap;
use rayon::prelude::*;

use crate::dataset::{BranchId, CustomerId, DataSplit, Dataset, MIN_BRANCHES};
use crate::error::{Error, Result};
use crate::features::{FeatureGroup, FeatureMatrix, Task1Assembler};
use crate::gbdt::{self, GbdtModel, HyperConfig, Loss};
use crate::metrics::{task1_score, Task1Prediction, Task1Report, TOP_K};

/// Branch-visit feature matrices of one customer set, one matrix per branch.
#[derive(Debug, Clone)]
pub struct BranchMatrices {
    pub ids: Vec<CustomerId>,
    pub per_branch: Vec<FeatureMatrix>,
}

impl BranchMatrices {
    pub fn assemble(assembler: &Task1Assembler<'_>, n_branches: usize, ids: &[CustomerId]) -> Result<Self> {
        let per_branch = (0..n_branches as BranchId)
            .into_par_iter()
            .map(|b| assembler.assemble(b, ids))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            ids: ids.to_vec(),
            per_branch,
        })
    }

    pub fn n_branches(&self) -> usize {
        self.per_branch.len()
    }
}

/// Everything needed to fit and score branch-visit models on one split.
///
/// Assembling is the expensive part of a training run, so tuning and
/// ablation build this once and reuse it.
#[derive(Debug, Clone)]
pub struct Task1Data {
    pub train: BranchMatrices,
    pub valid: BranchMatrices,
    /// Per branch, visit counts of the training customers.
    pub train_targets: Vec<Vec<f64>>,
    /// Full visit vectors of the validation customers.
    pub valid_truth: BTreeMap<CustomerId, Vec<f64>>,
}

impl Task1Data {
    pub fn new(ds: &Dataset, split: &DataSplit) -> Result<Self> {
        let assembler = Task1Assembler::new(ds, split)?;
        let b = ds.n_branches();
        let train = BranchMatrices::assemble(&assembler, b, &split.train_ids)?;
        let valid = BranchMatrices::assemble(&assembler, b, &split.valid_ids)?;
        let train_targets = (0..b as BranchId)
            .map(|branch| split.train_ids.iter().map(|&id| ds.visits(id, branch) as f64).collect())
            .collect();
        Ok(Self {
            train,
            valid,
            train_targets,
            valid_truth: visit_truth(ds, &split.valid_ids),
        })
    }
}

/// Full visit vectors of `ids` as reals.
pub fn visit_truth(ds: &Dataset, ids: &[CustomerId]) -> BTreeMap<CustomerId, Vec<f64>> {
    ids.iter()
        .map(|&id| (id, ds.visit_vector(id).into_iter().map(f64::from).collect()))
        .collect()
}

/// One Poisson model per branch, all sharing the same feature recipe.
#[derive(Debug, Clone, PartialEq)]
pub struct Task1Model {
    pub models: Vec<GbdtModel>,
    /// Feature groups left out of every matrix before training.
    pub removed_groups: Vec<FeatureGroup>,
}

/// Seed used for the model of `branch`, so branches never share a random
/// stream while the whole model depends on `seed` alone.
pub fn branch_seed(seed: u64, branch: BranchId) -> u64 {
    seed.wrapping_mul(1_000_003).wrapping_add(u64::from(branch))
}

fn recipe(matrix: &FeatureMatrix, removed: &[FeatureGroup]) -> Result<FeatureMatrix> {
    if removed.is_empty() {
        Ok(matrix.clone())
    } else {
        matrix.without_groups(removed)
    }
}

/// Fits every branch model in parallel.
pub fn fit_task1(
    train: &BranchMatrices,
    targets: &[Vec<f64>],
    config: &HyperConfig,
    removed_groups: &[FeatureGroup],
) -> Result<Task1Model> {
    if targets.len() != train.n_branches() {
        return Err(Error::argument(format!(
            "{} target vectors for {} branches",
            targets.len(),
            train.n_branches()
        )));
    }
    let models = train
        .per_branch
        .par_iter()
        .zip(targets.par_iter())
        .enumerate()
        .map(|(b, (matrix, y))| {
            let m = recipe(matrix, removed_groups)?;
            gbdt::train(&m, y, Loss::Poisson, &config.with_seed(branch_seed(config.seed, b as BranchId)))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Task1Model {
        models,
        removed_groups: removed_groups.to_vec(),
    })
}

/// Assembles features for `split` and trains one model per branch on the
/// training fold.
pub fn train_task1(ds: &Dataset, split: &DataSplit, config: &HyperConfig) -> Result<Task1Model> {
    let assembler = Task1Assembler::new(ds, split)?;
    let train = BranchMatrices::assemble(&assembler, ds.n_branches(), &split.train_ids)?;
    let targets: Vec<Vec<f64>> = (0..ds.n_branches() as BranchId)
        .map(|b| split.train_ids.iter().map(|&id| ds.visits(id, b) as f64).collect())
        .collect();
    fit_task1(&train, &targets, config, &[])
}

impl Task1Model {
    pub fn n_branches(&self) -> usize {
        self.models.len()
    }

    /// Predicted visit counts, one row of `b` values per customer.
    pub fn predict_counts(&self, data: &BranchMatrices) -> Result<Vec<Vec<f64>>> {
        if data.n_branches() != self.n_branches() {
            return Err(Error::argument(format!(
                "model has {} branches, features cover {}",
                self.n_branches(),
                data.n_branches()
            )));
        }
        let per_branch = self
            .models
            .par_iter()
            .zip(data.per_branch.par_iter())
            .map(|(model, matrix)| model.predict(&recipe(matrix, &self.removed_groups)?))
            .collect::<Result<Vec<_>>>()?;
        Ok((0..data.ids.len())
            .map(|r| per_branch.iter().map(|p| p[r]).collect())
            .collect())
    }

    /// Writes `branch_<id>.json` per branch into `dir`.
    pub fn save(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        for (b, m) in self.models.iter().enumerate() {
            m.save(&dir.join(format!("branch_{b}.json")))?;
        }
        Ok(())
    }

    /// Reads the per-branch files written by [`Task1Model::save`]. The
    /// removed feature groups are recovered from the stored column names.
    pub fn load(dir: &Path, n_branches: usize) -> Result<Self> {
        let models = (0..n_branches)
            .map(|b| GbdtModel::load(&dir.join(format!("branch_{b}.json"))))
            .collect::<Result<Vec<_>>>()?;
        let present: Vec<FeatureGroup> = models
            .first()
            .map(|m| m.column_names.iter().filter_map(|c| FeatureGroup::of_column(c)).collect())
            .unwrap_or_default();
        let removed_groups = FeatureGroup::TASK1
            .iter()
            .copied()
            .filter(|g| !present.contains(g))
            .collect();
        Ok(Self { models, removed_groups })
    }

    /// Split frequency over the trees of all branch models together.
    pub fn feature_importance(&self) -> IndexMap<String, f64> {
        let mut counts: IndexMap<String, usize> = IndexMap::new();
        for m in &self.models {
            for name in &m.column_names {
                counts.entry(name.clone()).or_insert(0);
            }
            for t in &m.trees {
                t.for_each_split(&mut |f| *counts.get_mut(&m.column_names[f]).unwrap() += 1);
            }
        }
        let total: usize = counts.values().sum();
        counts
            .into_iter()
            .map(|(k, c)| (k, if total == 0 { 0.0 } else { c as f64 / total as f64 }))
            .collect()
    }
}

/// The five largest predictions in descending order, ties by ascending
/// branch id.
pub fn select_top5(predictions: &[f64]) -> Result<Task1Prediction> {
    if predictions.len() < MIN_BRANCHES {
        return Err(Error::argument(format!(
            "need at least {MIN_BRANCHES} branch predictions, got {}",
            predictions.len()
        )));
    }
    if predictions.iter().any(|p| p.is_nan()) {
        return Err(Error::numeric("NaN branch prediction"));
    }
    let mut order: Vec<usize> = (0..predictions.len()).collect();
    order.sort_by(|&a, &b| predictions[b].total_cmp(&predictions[a]).then(a.cmp(&b)));
    Task1Prediction::new(
        order[..TOP_K]
            .iter()
            .map(|&b| (b as BranchId, predictions[b].max(0.0)))
            .collect(),
    )
}

/// Top-5 selections for every row of a count matrix.
pub fn select_all(ids: &[CustomerId], counts: &[Vec<f64>]) -> Result<BTreeMap<CustomerId, Task1Prediction>> {
    if ids.len() != counts.len() {
        return Err(Error::argument(format!("{} ids for {} prediction rows", ids.len(), counts.len())));
    }
    ids.iter()
        .zip(counts)
        .map(|(&id, row)| Ok((id, select_top5(row)?)))
        .collect()
}

/// Total training-fold visits per branch. Submitting these for everyone
/// is the global-popularity baseline.
pub fn popularity_baseline(ds: &Dataset, split: &DataSplit) -> Vec<f64> {
    let mut totals = vec![0.0; ds.n_branches()];
    for &id in &split.train_ids {
        for (t, v) in totals.iter_mut().zip(ds.visit_vector(id)) {
            *t += f64::from(v);
        }
    }
    totals
}

/// Validation report of a fitted model.
pub fn evaluate_task1(model: &Task1Model, data: &Task1Data) -> Result<Task1Report> {
    let counts = model.predict_counts(&data.valid)?;
    task1_score(&data.valid_truth, &select_all(&data.valid.ids, &counts)?)
}
