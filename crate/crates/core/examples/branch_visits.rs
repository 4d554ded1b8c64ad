//! Branch-visit prediction: one Poisson booster per branch, top-5
//! submission per customer, cosine-based validation score.
//!
//! ```text
//! cargo run --release --example branch_visits -- [n_customers] [members]
//! ```

use bankcard::dataset::{generate, split_customers, GenConfig};
use bankcard::gbdt::HyperConfig;
use bankcard::metrics::task1_score;
use bankcard::pipeline::{
    ensemble_predict, evaluate_task1, fit_task1, popularity_baseline, select_all, EnsembleSpec, Task1Data,
};

fn main() -> bankcard::Result<()> {
    let args: Vec<String> = std::env::args().collect();
    let n: usize = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(3000);
    let members: usize = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(3);

    let ds = generate(
        &GenConfig {
            n_customers: n,
            ..GenConfig::default()
        },
        1,
    )?;
    let split = split_customers(&ds.customer_ids(), 0.8, 1)?;
    let data = Task1Data::new(&ds, &split)?;
    let config = HyperConfig {
        n_trees: 150,
        eta: 0.05,
        max_depth: 4,
        subsample: 0.8,
        ..HyperConfig::default()
    };

    let model = fit_task1(&data.train, &data.train_targets, &config, &[])?;
    let report = evaluate_task1(&model, &data)?;
    println!(
        "single model: cosine@1 {:.4}  cosine@5 {:.4}  score {:.4}  ({} customers without visits skipped)",
        report.cosine1, report.cosine5, report.score, report.n_excluded
    );

    let counts = model.predict_counts(&data.valid)?;
    let first = &data.valid.ids[0];
    let picks = select_all(&data.valid.ids[..1], &counts[..1])?;
    println!("customer {first}: submitted {:?}", picks[first].selections());
    println!("customer {first}: true visits {:?}", data.valid_truth[first]);

    let popular = vec![popularity_baseline(&ds, &split); data.valid.ids.len()];
    let base = task1_score(&data.valid_truth, &select_all(&data.valid.ids, &popular)?)?;
    println!("popularity baseline score {:.4}", base.score);

    let b = ds.n_branches();
    let spec = EnsembleSpec::new(members, 0)?;
    let flat = ensemble_predict(&spec, &config, |c| {
        Ok(fit_task1(&data.train, &data.train_targets, c, &[])?.predict_counts(&data.valid)?.concat())
    })?;
    let mean: Vec<Vec<f64>> = flat.chunks(b).map(<[f64]>::to_vec).collect();
    let ens = task1_score(&data.valid_truth, &select_all(&data.valid.ids, &mean)?)?;
    println!("{members}-member seed ensemble score {:.4}", ens.score);
    Ok(())
}
