//! Feature extraction: categorical encodings, activity counts, location
//! features and per-task matrix assembly.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::dataset::{Activity, CustomerId, MONTHS};
use crate::error::{Error, Result};

mod assemble;
mod geo;

pub use assemble::{assemble_task1, assemble_task2, Task1Assembler, Task2Assembler};
pub use geo::{
    activity_distance_stats, knn_visit_features, residence_branch_distance, DistanceStats,
    KnnIndex, KNN_KS,
};

/// Dense row-major feature matrix with named columns.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    column_names: Vec<String>,
    row_ids: Vec<CustomerId>,
    values: Vec<f64>,
}

impl FeatureMatrix {
    /// `values` is row-major with `row_ids.len()` rows.
    pub fn new(column_names: Vec<String>, row_ids: Vec<CustomerId>, values: Vec<f64>) -> Result<Self> {
        if values.len() != column_names.len() * row_ids.len() {
            return Err(Error::argument(format!(
                "{} values do not fill {} rows x {} columns",
                values.len(),
                row_ids.len(),
                column_names.len()
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            let d = column_names.len();
            return Err(Error::numeric(format!(
                "non-finite value in row {}, column {}",
                pos / d,
                column_names[pos % d]
            )));
        }
        let mut sorted = row_ids.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::argument("row ids must be unique"));
        }
        Ok(Self {
            column_names,
            row_ids,
            values,
        })
    }

    /// Matrix without row identities, mostly for tests and tooling.
    pub fn from_rows(column_names: Vec<String>, rows: &[Vec<f64>]) -> Result<Self> {
        let d = column_names.len();
        if let Some(r) = rows.iter().position(|r| r.len() != d) {
            return Err(Error::argument(format!("row {r} has {} values, expected {d}", rows[r].len())));
        }
        let values = rows.iter().flatten().copied().collect();
        Self::new(column_names, (0..rows.len() as u32).collect(), values)
    }

    pub fn n_rows(&self) -> usize {
        self.row_ids.len()
    }

    pub fn n_cols(&self) -> usize {
        self.column_names.len()
    }

    pub fn column_names(&self) -> &[String] {
        &self.column_names
    }

    pub fn row_ids(&self) -> &[CustomerId] {
        &self.row_ids
    }

    pub fn row(&self, r: usize) -> &[f64] {
        let d = self.n_cols();
        &self.values[r * d..(r + 1) * d]
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.values[r * self.n_cols() + c]
    }

    pub fn column(&self, c: usize) -> Vec<f64> {
        (0..self.n_rows()).map(|r| self.get(r, c)).collect()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.column_names.iter().position(|n| n == name)
    }

    /// Keeps the listed columns, in the given order.
    pub fn select_columns(&self, columns: &[usize]) -> Result<Self> {
        if let Some(&c) = columns.iter().find(|&&c| c >= self.n_cols()) {
            return Err(Error::argument(format!("column {c} out of range")));
        }
        let names = columns.iter().map(|&c| self.column_names[c].clone()).collect();
        let mut values = Vec::with_capacity(columns.len() * self.n_rows());
        for r in 0..self.n_rows() {
            let row = self.row(r);
            values.extend(columns.iter().map(|&c| row[c]));
        }
        Self::new(names, self.row_ids.clone(), values)
    }

    /// Drops every column belonging to one of `groups`.
    pub fn without_groups(&self, groups: &[FeatureGroup]) -> Result<Self> {
        let keep: Vec<usize> = self
            .column_names
            .iter()
            .enumerate()
            .filter(|(_, name)| FeatureGroup::of_column(name).is_none_or(|g| !groups.contains(&g)))
            .map(|(i, _)| i)
            .collect();
        self.select_columns(&keep)
    }

    /// Multiplies one column by `factor`.
    pub fn scale_column(&mut self, c: usize, factor: f64) {
        let d = self.n_cols();
        for r in 0..self.n_rows() {
            self.values[r * d + c] *= factor;
        }
    }

    /// CSV with a `customer_id` column followed by the feature columns.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        let mut header = vec!["customer_id".to_string()];
        header.extend(self.column_names.iter().cloned());
        w.write_record(&header)?;
        for r in 0..self.n_rows() {
            let mut rec = vec![self.row_ids[r].to_string()];
            rec.extend(self.row(r).iter().map(|v| v.to_string()));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Named column families, the unit of feature ablation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FeatureGroup {
    Demographics,
    Wealth,
    Card,
    Channel,
    Distance,
    DistanceStats,
    Knn,
}

impl FeatureGroup {
    /// Groups present in the branch-visit matrix, in column order.
    pub const TASK1: [FeatureGroup; 6] = [
        FeatureGroup::Demographics,
        FeatureGroup::Wealth,
        FeatureGroup::Channel,
        FeatureGroup::Distance,
        FeatureGroup::DistanceStats,
        FeatureGroup::Knn,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FeatureGroup::Demographics => "demographics",
            FeatureGroup::Wealth => "wealth",
            FeatureGroup::Card => "card",
            FeatureGroup::Channel => "channel",
            FeatureGroup::Distance => "distance",
            FeatureGroup::DistanceStats => "distance-stats",
            FeatureGroup::Knn => "knn",
        }
    }

    pub fn of_column(name: &str) -> Option<FeatureGroup> {
        let group = if name.starts_with("age_") || name.starts_with("income_") || name.starts_with("gender_") {
            FeatureGroup::Demographics
        } else if name.starts_with("wealth_") {
            FeatureGroup::Wealth
        } else if name.starts_with("card_") {
            FeatureGroup::Card
        } else if name.starts_with("chan_") {
            FeatureGroup::Channel
        } else if name == "dist_residence" {
            FeatureGroup::Distance
        } else if name.starts_with("dist_act_") {
            FeatureGroup::DistanceStats
        } else if name.starts_with("knn_") {
            FeatureGroup::Knn
        } else {
            return None;
        };
        Some(group)
    }
}

impl fmt::Display for FeatureGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FeatureGroup {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [
            FeatureGroup::Demographics,
            FeatureGroup::Wealth,
            FeatureGroup::Card,
            FeatureGroup::Channel,
            FeatureGroup::Distance,
            FeatureGroup::DistanceStats,
            FeatureGroup::Knn,
        ]
        .into_iter()
        .find(|g| g.name() == s)
        .ok_or_else(|| Error::argument(format!("unknown feature group `{s}`")))
    }
}

/// Shape of a monthly flag series:
///
/// 1. set in every month
/// 2. never set
/// 3. set, then cleared once
/// 4. cleared, then set once
/// 5. more than one change
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TrajectoryCategory(u8);

impl TrajectoryCategory {
    pub const ALL: [u8; 5] = [1, 2, 3, 4, 5];

    pub fn value(self) -> u8 {
        self.0
    }
}

pub fn trajectory_category(flags: &[bool]) -> Result<TrajectoryCategory> {
    if flags.len() != MONTHS {
        return Err(Error::argument(format!(
            "flag series must have {MONTHS} entries, got {}",
            flags.len()
        )));
    }
    let changes = flags.windows(2).filter(|w| w[0] != w[1]).count();
    let category = match (changes, flags[0]) {
        (0, true) => 1,
        (0, false) => 2,
        (1, true) => 3,
        (1, false) => 4,
        _ => 5,
    };
    Ok(TrajectoryCategory(category))
}

/// Indicator vector over the sorted `domain`.
pub fn one_hot<T: Ord + fmt::Debug>(value: &T, domain: &[T]) -> Result<Vec<f64>> {
    let mut sorted: Vec<&T> = domain.iter().collect();
    sorted.sort();
    sorted.dedup();
    match sorted.iter().position(|d| *d == value) {
        Some(pos) => {
            let mut out = vec![0.0; sorted.len()];
            out[pos] = 1.0;
            Ok(out)
        }
        None => Err(Error::argument(format!("{value:?} not in domain {sorted:?}"))),
    }
}

/// Activities of `customer_id` per channel, in sorted channel order.
pub fn channel_counts(activities: &[Activity], customer_id: CustomerId, channels: &[String]) -> Vec<f64> {
    let mut sorted: Vec<&String> = channels.iter().collect();
    sorted.sort();
    let mut counts = vec![0.0; sorted.len()];
    for a in activities.iter().filter(|a| a.customer_id == customer_id) {
        if let Ok(pos) = sorted.binary_search(&&a.channel) {
            counts[pos] += 1.0;
        }
    }
    counts
}
