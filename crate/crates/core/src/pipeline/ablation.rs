use std::path::Path;

use crate::error::{Error, Result};
use crate::features::FeatureGroup;
use crate::gbdt::HyperConfig;

use super::task1::{evaluate_task1, fit_task1, Task1Data};

/// A set of feature groups to leave out; empty means the full feature set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AblationVariant {
    pub removed: Vec<FeatureGroup>,
}

impl AblationVariant {
    pub fn full() -> Self {
        Self { removed: Vec::new() }
    }

    /// Parses `+`-joined group names, e.g. `distance+distance-stats+knn`.
    /// `full` and the empty string mean nothing removed.
    pub fn parse(text: &str) -> Result<Self> {
        let text = text.trim();
        if text.is_empty() || text == "full" {
            return Ok(Self::full());
        }
        let mut removed = Vec::new();
        for part in text.split('+') {
            let g: FeatureGroup = part.trim().parse()?;
            if !removed.contains(&g) {
                removed.push(g);
            }
        }
        Ok(Self { removed })
    }

    pub fn name(&self) -> String {
        if self.removed.is_empty() {
            "full".to_string()
        } else {
            self.removed.iter().map(|g| g.name()).collect::<Vec<_>>().join("+")
        }
    }
}

/// The full set followed by each group of `groups` removed on its own.
pub fn single_group_variants(groups: &[FeatureGroup]) -> Vec<AblationVariant> {
    std::iter::once(AblationVariant::full())
        .chain(groups.iter().map(|&g| AblationVariant { removed: vec![g] }))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct AblationRow {
    pub variant: String,
    pub score: f64,
    /// Score change relative to the full feature set.
    pub delta: f64,
}

/// Trains and scores every variant on the same split. The full set is
/// always evaluated, exactly once, and listed first.
pub fn ablation(data: &Task1Data, config: &HyperConfig, variants: &[AblationVariant]) -> Result<Vec<AblationRow>> {
    let mut all = vec![AblationVariant::full()];
    for v in variants {
        if v.removed.len() >= FeatureGroup::TASK1.len()
            && FeatureGroup::TASK1.iter().all(|g| v.removed.contains(g))
        {
            return Err(Error::argument("an ablation variant cannot remove every feature group"));
        }
        if !all.contains(v) {
            all.push(v.clone());
        }
    }
    let mut scored = Vec::with_capacity(all.len());
    for v in &all {
        let model = fit_task1(&data.train, &data.train_targets, config, &v.removed)?;
        scored.push((v.name(), evaluate_task1(&model, data)?.score));
    }
    let full = scored[0].1;
    Ok(scored
        .into_iter()
        .map(|(variant, score)| AblationRow {
            variant,
            score,
            delta: score - full,
        })
        .collect())
}

pub fn write_ablation_csv(path: &Path, rows: &[AblationRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["variant", "task1_score", "delta"])?;
    for r in rows {
        w.write_record([r.variant.clone(), r.score.to_string(), r.delta.to_string()])?;
    }
    w.flush()?;
    Ok(())
}
