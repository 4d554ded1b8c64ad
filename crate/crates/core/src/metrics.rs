//! Evaluation measures: cosine@k over submitted branch lists, the averaged
//! cosine@1/cosine@5 score, ROC AUC and two monitoring losses.

use std::collections::BTreeMap;

use crate::dataset::{BranchId, CustomerId};
use crate::error::{Error, Result};
use crate::kv::KeyValues;

/// Number of branches submitted per customer.
pub const TOP_K: usize = 5;

/// Five distinct branches with positive predicted values, ordered by
/// descending value (ties by ascending branch id).
#[derive(Debug, Clone, PartialEq)]
pub struct Task1Prediction {
    selections: Vec<(BranchId, f64)>,
}

impl Task1Prediction {
    pub fn new(mut selections: Vec<(BranchId, f64)>) -> Result<Self> {
        if selections.len() != TOP_K {
            return Err(Error::argument(format!(
                "expected {TOP_K} selected branches, got {}",
                selections.len()
            )));
        }
        if selections.iter().any(|(_, v)| !(*v >= 0.0 && v.is_finite())) {
            return Err(Error::argument("predicted values must be finite and non-negative"));
        }
        check_distinct(&selections)?;
        selections.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        Ok(Self { selections })
    }

    pub fn selections(&self) -> &[(BranchId, f64)] {
        &self.selections
    }

    pub fn branches(&self) -> Vec<BranchId> {
        self.selections.iter().map(|s| s.0).collect()
    }
}

fn check_distinct(selected: &[(BranchId, f64)]) -> Result<()> {
    let mut ids: Vec<BranchId> = selected.iter().map(|s| s.0).collect();
    ids.sort_unstable();
    match ids.windows(2).find(|w| w[0] == w[1]) {
        Some(w) => Err(Error::argument(format!("branch {} selected twice", w[0]))),
        None => Ok(()),
    }
}

/// Cosine between the full visit vector `true_counts` and the first `k`
/// submitted `(branch, value)` pairs. Zero if either norm is zero.
pub fn cosine_at_k(true_counts: &[f64], selected: &[(BranchId, f64)], k: usize) -> Result<f64> {
    if k > selected.len() {
        return Err(Error::argument(format!("k = {k} exceeds {} selections", selected.len())));
    }
    let top = &selected[..k];
    check_distinct(top)?;
    if true_counts.iter().chain(top.iter().map(|s| &s.1)).any(|v| !(*v >= 0.0)) {
        return Err(Error::argument("counts and predicted values must be non-negative"));
    }
    let mut dot = 0.0;
    let mut pred_sq = 0.0;
    for &(b, v) in top {
        let y = *true_counts
            .get(b as usize)
            .ok_or_else(|| Error::argument(format!("branch {b} outside the visit vector")))?;
        dot += y * v;
        pred_sq += v * v;
    }
    let true_norm = true_counts.iter().map(|y| y * y).sum::<f64>().sqrt();
    let pred_norm = pred_sq.sqrt();
    if true_norm == 0.0 || pred_norm == 0.0 {
        return Ok(0.0);
    }
    Ok((dot / (true_norm * pred_norm)).clamp(0.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CustomerScore {
    pub customer_id: CustomerId,
    pub cosine1: f64,
    pub cosine5: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Task1Report {
    /// Customers with at least one visit, ascending id.
    pub per_customer: Vec<CustomerScore>,
    /// Customers without visits, left out of every mean.
    pub n_excluded: usize,
    pub cosine1: f64,
    pub cosine5: f64,
    /// Mean over customers of `(cosine@1 + cosine@5) / 2`.
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum MetricReport {
    Task1(Task1Report),
    Task2 { auc: f64, n_pos: usize, n_neg: usize },
}

impl MetricReport {
    pub fn to_key_values(&self) -> KeyValues {
        let mut kv = KeyValues::new();
        match self {
            MetricReport::Task1(r) => {
                kv.insert("task", 1);
                kv.insert("n_scored", r.per_customer.len());
                kv.insert("n_excluded", r.n_excluded);
                kv.insert("cosine1", r.cosine1);
                kv.insert("cosine5", r.cosine5);
                kv.insert("score", r.score);
            }
            MetricReport::Task2 { auc, n_pos, n_neg } => {
                kv.insert("task", 2);
                kv.insert("n_pos", n_pos);
                kv.insert("n_neg", n_neg);
                kv.insert("auc", auc);
            }
        }
        kv
    }
}

/// Scores every customer in `truth` (full visit vectors). Customers whose
/// visit vector is all zero are excluded from the aggregate.
pub fn task1_score(
    truth: &BTreeMap<CustomerId, Vec<f64>>,
    predictions: &BTreeMap<CustomerId, Task1Prediction>,
) -> Result<Task1Report> {
    let mut per_customer = Vec::new();
    let mut n_excluded = 0;
    for (&id, y) in truth {
        let pred = predictions
            .get(&id)
            .ok_or_else(|| Error::argument(format!("no prediction for customer {id}")))?;
        if y.iter().all(|&v| v == 0.0) {
            n_excluded += 1;
            continue;
        }
        per_customer.push(CustomerScore {
            customer_id: id,
            cosine1: cosine_at_k(y, pred.selections(), 1)?,
            cosine5: cosine_at_k(y, pred.selections(), TOP_K)?,
        });
    }
    if per_customer.is_empty() {
        return Err(Error::UndefinedMetric("no customer has any visits".into()));
    }
    let n = per_customer.len() as f64;
    let cosine1 = per_customer.iter().map(|c| c.cosine1).sum::<f64>() / n;
    let cosine5 = per_customer.iter().map(|c| c.cosine5).sum::<f64>() / n;
    let score = per_customer
        .iter()
        .map(|c| 0.5 * (c.cosine1 + c.cosine5))
        .sum::<f64>()
        / n;
    Ok(Task1Report {
        per_customer,
        n_excluded,
        cosine1,
        cosine5,
        score,
    })
}

/// ROC AUC via the rank-sum statistic with average ranks for tied scores.
pub fn auc(labels: &[bool], scores: &[f64]) -> Result<f64> {
    if labels.len() != scores.len() {
        return Err(Error::argument(format!(
            "{} labels but {} scores",
            labels.len(),
            scores.len()
        )));
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::numeric("NaN score"));
    }
    let n_pos = labels.iter().filter(|&&l| l).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::UndefinedMetric("AUC needs both classes".into()));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let mut pos_rank_sum = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && scores[order[j]] == scores[order[i]] {
            j += 1;
        }
        // ranks i+1 ..= j share their mean
        let rank = (i + 1 + j) as f64 / 2.0;
        let pos_in_group = order[i..j].iter().filter(|&&r| labels[r]).count();
        pos_rank_sum += rank * pos_in_group as f64;
        i = j;
    }
    let u = pos_rank_sum - (n_pos * (n_pos + 1)) as f64 / 2.0;
    Ok(u / (n_pos as f64 * n_neg as f64))
}

/// Mean Poisson deviance `2 * mean(y log(y/mu) - (y - mu))`.
pub fn poisson_deviance(y: &[f64], mu: &[f64]) -> Result<f64> {
    if y.len() != mu.len() || y.is_empty() {
        return Err(Error::argument("y and mu must be non-empty and equally long"));
    }
    let mut total = 0.0;
    for (&yi, &mi) in y.iter().zip(mu) {
        if !(mi > 0.0) || !(yi >= 0.0) {
            return Err(Error::numeric(format!("deviance undefined at y = {yi}, mu = {mi}")));
        }
        let log_term = if yi == 0.0 { 0.0 } else { yi * (yi / mi).ln() };
        total += log_term - (yi - mi);
    }
    Ok(2.0 * total / y.len() as f64)
}

/// Mean class-weighted logistic loss; positives weigh `pos_weight`.
pub fn log_loss(y: &[bool], p: &[f64], pos_weight: f64) -> Result<f64> {
    if y.len() != p.len() || y.is_empty() {
        return Err(Error::argument("y and p must be non-empty and equally long"));
    }
    if !(pos_weight > 0.0) {
        return Err(Error::argument("pos_weight must be positive"));
    }
    let mut total = 0.0;
    for (&yi, &pi) in y.iter().zip(p) {
        if !(pi > 0.0 && pi < 1.0) {
            return Err(Error::numeric(format!("probability {pi} outside (0, 1)")));
        }
        total += if yi { -pos_weight * pi.ln() } else { -(1.0 - pi).ln() };
    }
    Ok(total / y.len() as f64)
}
