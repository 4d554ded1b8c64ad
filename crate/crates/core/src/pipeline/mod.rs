//! End-to-end orchestration of both prediction tasks.
//!
//! Branch visits are modelled with one Poisson booster per branch over
//! shared features; the five branches with the largest predicted counts
//! are submitted. Card applications use a single class-weighted logistic
//! booster. Seed ensembles, the feature-group ablation harness, tuning
//! objectives and the prediction file formats live here too.

mod ablation;
mod ensemble;
mod output;
mod task1;
mod task2;
mod tuning;

pub use ablation::{ablation, single_group_variants, write_ablation_csv, AblationRow, AblationVariant};
pub use ensemble::{average, ensemble_predict, EnsembleSpec};
pub use output::{
    read_task1_predictions, read_task2_predictions, write_importance_csv, write_task1_predictions,
    write_task2_predictions,
};
pub use task1::{
    branch_seed, evaluate_task1, fit_task1, popularity_baseline, select_all, select_top5, train_task1, visit_truth,
    BranchMatrices, Task1Data, Task1Model,
};
pub use task2::{evaluate_task2, fit_task2, labels_of, task2_pos_weight, train_task2, Task2Data};
pub use tuning::{task1_objective, task2_objective};
