//! The evaluation measures on small hand-made inputs.
//!
//! ```text
//! cargo run --example metrics_walkthrough
//! ```

use std::collections::BTreeMap;

use bankcard::metrics::{auc, cosine_at_k, task1_score, Task1Prediction};
use bankcard::pipeline::select_top5;

fn main() -> bankcard::Result<()> {
    // visits of one customer to branches 0..7
    let truth = vec![2.0, 0.0, 1.0, 0.0, 3.0, 0.0, 1.0];
    let predicted = [1.2, 0.1, 0.9, 0.05, 2.6, 0.4, 0.2];
    let top5 = select_top5(&predicted)?;
    println!("submitted (branch, value): {:?}", top5.selections());
    println!("cosine@1 = {:.4}", cosine_at_k(&truth, top5.selections(), 1)?);
    println!("cosine@5 = {:.4}", cosine_at_k(&truth, top5.selections(), 5)?);

    let mut y = BTreeMap::new();
    let mut p = BTreeMap::new();
    y.insert(1, truth);
    p.insert(1, top5);
    // a customer without visits is left out of the average
    y.insert(2, vec![0.0; 7]);
    p.insert(2, Task1Prediction::new((0..5).map(|b| (b, 1.0)).collect())?);
    let report = task1_score(&y, &p)?;
    println!("task score {:.4}, {} customer(s) excluded", report.score, report.n_excluded);

    let labels = [true, false, true, false, false, true];
    let scores = [0.9, 0.3, 0.4, 0.4, 0.1, 0.8];
    println!("AUC with a tied pair = {:.4}", auc(&labels, &scores)?);
    Ok(())
}
