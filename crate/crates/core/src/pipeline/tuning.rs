use crate::error::Result;
use crate::gbdt::HyperConfig;
use crate::smbo::SearchSpace;

use super::task1::{evaluate_task1, fit_task1, Task1Data};
use super::task2::{evaluate_task2, fit_task2, Task2Data};

/// Negative validation task-1 score of the configuration `values`.
pub fn task1_objective<'a>(
    data: &'a Task1Data,
    space: &'a SearchSpace,
    base: &'a HyperConfig,
) -> impl Fn(&[f64]) -> Result<f64> + Sync + 'a {
    move |values: &[f64]| {
        let config = space.to_hyper_config(values, base)?;
        let model = fit_task1(&data.train, &data.train_targets, &config, &[])?;
        Ok(-evaluate_task1(&model, data)?.score)
    }
}

/// Negative validation AUC of the configuration `values`.
pub fn task2_objective<'a>(
    data: &'a Task2Data,
    space: &'a SearchSpace,
    base: &'a HyperConfig,
) -> impl Fn(&[f64]) -> Result<f64> + Sync + 'a {
    move |values: &[f64]| {
        let config = space.to_hyper_config(values, base)?;
        let model = fit_task2(&data.train, &data.train_labels, &config)?;
        Ok(-evaluate_task2(&model, data)?)
    }
}
