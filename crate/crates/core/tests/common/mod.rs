//! Brute-force reference implementations shared by the integration tests.
#![allow(dead_code)]

use bankcard::dataset::{BranchId, Customer, CustomerId};

/// Cosine between `y` and the dense vector holding the first `k` submitted
/// values at their branch positions.
pub fn cosine_oracle(y: &[f64], selected: &[(BranchId, f64)], k: usize) -> f64 {
    let mut dense = vec![0.0; y.len()];
    for &(b, v) in &selected[..k] {
        dense[b as usize] = v;
    }
    let mut dot = 0.0;
    let mut yy = 0.0;
    let mut pp = 0.0;
    for i in 0..y.len() {
        dot += y[i] * dense[i];
        yy += y[i] * y[i];
        pp += dense[i] * dense[i];
    }
    if yy == 0.0 || pp == 0.0 {
        0.0
    } else {
        dot / (yy.sqrt() * pp.sqrt())
    }
}

/// Share of (positive, negative) pairs ordered correctly, ties counting half.
pub fn auc_oracle(labels: &[bool], scores: &[f64]) -> f64 {
    let mut wins = 0.0;
    let mut pairs = 0.0;
    for i in 0..labels.len() {
        for j in 0..labels.len() {
            if labels[i] && !labels[j] {
                pairs += 1.0;
                if scores[i] > scores[j] {
                    wins += 1.0;
                } else if scores[i] == scores[j] {
                    wins += 0.5;
                }
            }
        }
    }
    wins / pairs
}

/// Mean count of the `k` nearest training customers for every `k`,
/// computed from a full sort. The query never counts as its own neighbour.
pub fn knn_oracle(train: &[(Customer, u32)], query: &Customer, ks: &[usize]) -> Vec<f64> {
    let mut all: Vec<(f64, CustomerId, u32)> = train
        .iter()
        .filter(|(c, _)| c.id != query.id)
        .map(|(c, n)| {
            let dx = c.residence.x - query.residence.x;
            let dy = c.residence.y - query.residence.y;
            ((dx * dx + dy * dy).sqrt(), c.id, *n)
        })
        .collect();
    all.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
    ks.iter()
        .map(|&k| {
            let k = k.min(all.len());
            if k == 0 {
                0.0
            } else {
                all[..k].iter().map(|e| e.2 as f64).sum::<f64>() / k as f64
            }
        })
        .collect()
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}
