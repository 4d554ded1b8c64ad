//! Per-task matrix assembly.
//!
//! Activity-derived features only see months `1..=FEATURE_MONTHS`, for
//! training and held-out customers alike.

use rayon::prelude::*;

use super::geo::neighbor_means;
use super::{
    activity_distance_stats, one_hot, residence_branch_distance, trajectory_category, FeatureMatrix,
    KnnIndex, TrajectoryCategory, KNN_KS,
};
use crate::dataset::{
    restrict_activities, BranchId, Customer, CustomerId, DataSplit, Dataset, Gender, Point, FEATURE_MONTHS,
};
use crate::error::{Error, Result};

fn demographic_columns() -> Vec<String> {
    let mut names = Vec::new();
    names.extend((1..=3).map(|i| format!("age_{i}")));
    names.extend((1..=3).map(|i| format!("income_{i}")));
    names.extend(["gender_F".to_string(), "gender_M".to_string()]);
    names
}

fn trajectory_columns(prefix: &str) -> Vec<String> {
    TrajectoryCategory::ALL
        .iter()
        .map(|c| format!("{prefix}_traj_{c}"))
        .collect()
}

fn push_demographics(c: &Customer, out: &mut Vec<f64>) {
    out.extend(one_hot(&c.age_cat, &[1, 2, 3]).expect("validated age"));
    out.extend(one_hot(&c.income_cat, &[1, 2, 3]).expect("validated income"));
    out.extend(one_hot(&c.gender, &[Gender::F, Gender::M]).expect("gender domain"));
}

fn push_trajectory(flags: &[bool], out: &mut Vec<f64>) {
    let cat = trajectory_category(flags).expect("12 flags");
    out.extend(one_hot(&cat.value(), &TrajectoryCategory::ALL).expect("category domain"));
}

/// Per-customer activity summaries over the feature months.
struct ActivityTable {
    channel_names: Vec<String>,
    counts: Vec<Vec<f64>>,
    positions: Vec<Vec<Point>>,
}

impl ActivityTable {
    fn new(ds: &Dataset) -> Self {
        let channel_names: Vec<String> = ds.channels().iter().map(|c| c.name.clone()).collect();
        let n = ds.customers().len();
        let mut counts = vec![vec![0.0; channel_names.len()]; n];
        let mut positions = vec![Vec::new(); n];
        for a in restrict_activities(ds.activities(), FEATURE_MONTHS) {
            let row = ds.customer_position(a.customer_id).expect("validated activity");
            let ch = channel_names
                .binary_search(&a.channel)
                .expect("channel list covers every activity");
            counts[row][ch] += 1.0;
            if let Some(p) = a.geo {
                positions[row].push(p);
            }
        }
        Self {
            channel_names,
            counts,
            positions,
        }
    }

    fn columns(&self) -> Vec<String> {
        self.channel_names.iter().map(|c| format!("chan_{c}")).collect()
    }
}

fn positions_of(ds: &Dataset, ids: &[CustomerId]) -> Result<Vec<usize>> {
    ids.iter()
        .map(|&id| {
            ds.customer_position(id)
                .ok_or_else(|| Error::argument(format!("unknown customer_id {id}")))
        })
        .collect()
}

/// Builds branch-visit matrices for any branch, sharing the neighbour
/// search and activity summaries across branches.
pub struct Task1Assembler<'a> {
    ds: &'a Dataset,
    activity: ActivityTable,
    /// Per customer position, up to 1024 nearest training customers as
    /// positions in `train_index`.
    neighbors: Vec<Vec<u32>>,
    train_index: KnnIndex,
}

impl<'a> Task1Assembler<'a> {
    pub fn new(ds: &'a Dataset, split: &DataSplit) -> Result<Self> {
        let train: Vec<&Customer> = split
            .train_ids
            .iter()
            .map(|&id| {
                ds.customer(id)
                    .ok_or_else(|| Error::argument(format!("unknown training customer_id {id}")))
            })
            .collect::<Result<_>>()?;
        if train.is_empty() {
            return Err(Error::argument("training fold is empty"));
        }
        let train_index = KnnIndex::new(train);
        let limit = KNN_KS[KNN_KS.len() - 1];
        let neighbors = ds
            .customers()
            .par_iter()
            .map(|c| train_index.neighbors(c, limit))
            .collect();
        Ok(Self {
            ds,
            activity: ActivityTable::new(ds),
            neighbors,
            train_index,
        })
    }

    pub fn column_names(&self) -> Vec<String> {
        let mut names = demographic_columns();
        names.extend(trajectory_columns("wealth"));
        names.extend(self.activity.columns());
        names.push("dist_residence".into());
        names.extend(["max", "min", "mean", "median"].iter().map(|s| format!("dist_act_{s}")));
        names.extend(KNN_KS.iter().map(|k| format!("knn_{k}")));
        names
    }

    /// Rows follow the order of `ids`.
    pub fn assemble(&self, branch: BranchId, ids: &[CustomerId]) -> Result<FeatureMatrix> {
        let branch = self
            .ds
            .branches()
            .get(branch as usize)
            .ok_or_else(|| Error::argument(format!("unknown branch_id {branch}")))?;
        let rows = positions_of(self.ds, ids)?;
        let train_counts: Vec<u32> = self
            .train_index
            .ids()
            .iter()
            .map(|&id| self.ds.visits(id, branch.id))
            .collect();
        let names = self.column_names();
        let mut values = Vec::with_capacity(names.len() * rows.len());
        for &row in &rows {
            let c = &self.ds.customers()[row];
            push_demographics(c, &mut values);
            push_trajectory(&c.wealth_flags, &mut values);
            values.extend(&self.activity.counts[row]);
            values.push(residence_branch_distance(c, branch));
            let s = activity_distance_stats(&self.activity.positions[row], c, branch);
            values.extend([s.max, s.min, s.mean, s.median]);
            values.extend(neighbor_means(&self.neighbors[row], &train_counts, &KNN_KS));
        }
        FeatureMatrix::new(names, ids.to_vec(), values)
    }
}

/// Branch-visit features for `branch`; the kNN features use the training
/// fold of `split` as the neighbour pool.
pub fn assemble_task1(ds: &Dataset, split: &DataSplit, branch: BranchId, ids: &[CustomerId]) -> Result<FeatureMatrix> {
    Task1Assembler::new(ds, split)?.assemble(branch, ids)
}

/// Builds card-application matrices. No location information is used.
pub struct Task2Assembler<'a> {
    ds: &'a Dataset,
    activity: ActivityTable,
}

impl<'a> Task2Assembler<'a> {
    pub fn new(ds: &'a Dataset) -> Self {
        Self {
            ds,
            activity: ActivityTable::new(ds),
        }
    }

    pub fn column_names(&self) -> Vec<String> {
        let mut names = demographic_columns();
        names.extend(trajectory_columns("wealth"));
        names.extend(trajectory_columns("card"));
        names.extend(self.activity.columns());
        names
    }

    pub fn assemble(&self, ids: &[CustomerId]) -> Result<FeatureMatrix> {
        let rows = positions_of(self.ds, ids)?;
        let names = self.column_names();
        let mut values = Vec::with_capacity(names.len() * rows.len());
        for &row in &rows {
            let c = &self.ds.customers()[row];
            push_demographics(c, &mut values);
            push_trajectory(&c.wealth_flags, &mut values);
            push_trajectory(&c.card_flags, &mut values);
            values.extend(&self.activity.counts[row]);
        }
        FeatureMatrix::new(names, ids.to_vec(), values)
    }
}

pub fn assemble_task2(ds: &Dataset, ids: &[CustomerId]) -> Result<FeatureMatrix> {
    Task2Assembler::new(ds).assemble(ids)
}
