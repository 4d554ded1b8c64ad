use crate::dataset::{CustomerId, DataSplit, Dataset};
use crate::error::{Error, Result};
use crate::features::{FeatureMatrix, Task2Assembler};
use crate::gbdt::{train, GbdtModel, HyperConfig, Loss};
use crate::metrics::auc;

/// Card-application matrices and labels for both folds.
#[derive(Debug, Clone)]
pub struct Task2Data {
    pub train: FeatureMatrix,
    pub train_labels: Vec<bool>,
    pub valid: FeatureMatrix,
    pub valid_labels: Vec<bool>,
}

pub fn labels_of(ds: &Dataset, ids: &[CustomerId]) -> Result<Vec<bool>> {
    ids.iter()
        .map(|&id| {
            ds.applied(id)
                .ok_or_else(|| Error::argument(format!("customer {id} has no application label")))
        })
        .collect()
}

impl Task2Data {
    pub fn new(ds: &Dataset, split: &DataSplit) -> Result<Self> {
        let asm = Task2Assembler::new(ds);
        Ok(Self {
            train: asm.assemble(&split.train_ids)?,
            train_labels: labels_of(ds, &split.train_ids)?,
            valid: asm.assemble(&split.valid_ids)?,
            valid_labels: labels_of(ds, &split.valid_ids)?,
        })
    }
}

/// `(negatives / positives) * multiplier`.
pub fn task2_pos_weight(labels: &[bool], multiplier: f64) -> Result<f64> {
    let pos = labels.iter().filter(|&&l| l).count();
    let neg = labels.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(Error::argument(format!(
            "training labels need both classes ({pos} positive, {neg} negative)"
        )));
    }
    Ok(neg as f64 / pos as f64 * multiplier)
}

pub fn fit_task2(matrix: &FeatureMatrix, labels: &[bool], config: &HyperConfig) -> Result<GbdtModel> {
    let loss = Loss::weighted_logistic(task2_pos_weight(labels, config.pos_weight_multiplier)?)?;
    let y: Vec<f64> = labels.iter().map(|&l| if l { 1.0 } else { 0.0 }).collect();
    train(matrix, &y, loss, config)
}

/// Weighted-logistic model on the training fold.
pub fn train_task2(ds: &Dataset, split: &DataSplit, config: &HyperConfig) -> Result<GbdtModel> {
    let asm = Task2Assembler::new(ds);
    fit_task2(
        &asm.assemble(&split.train_ids)?,
        &labels_of(ds, &split.train_ids)?,
        config,
    )
}

/// Validation AUC of a fitted model.
pub fn evaluate_task2(model: &GbdtModel, data: &Task2Data) -> Result<f64> {
    auc(&data.valid_labels, &model.predict(&data.valid)?)
}
