//! Card-application model: class-weighted logistic boosting, validation
//! AUC of single models across seeds, and a seed-averaged ensemble.
//!
//! ```text
//! cargo run --release --example card_applications -- [n_customers] [members]
//! ```

use bankcard::dataset::{generate, split_customers, GenConfig};
use bankcard::gbdt::HyperConfig;
use bankcard::metrics::auc;
use bankcard::pipeline::{ensemble_predict, evaluate_task2, fit_task2, task2_pos_weight, EnsembleSpec, Task2Data};

fn main() -> bankcard::Result<()> {
    let args: Vec<String> = std::env::args().collect();
    let n: usize = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(5000);
    let members: usize = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(10);

    let ds = generate(
        &GenConfig {
            n_customers: n,
            ..GenConfig::default()
        },
        7,
    )?;
    let split = split_customers(&ds.customer_ids(), 0.8, 7)?;
    let data = Task2Data::new(&ds, &split)?;
    println!(
        "{} training customers, positive weight {:.2}",
        split.train_ids.len(),
        task2_pos_weight(&data.train_labels, 1.0)?
    );

    // shallow, row- and column-subsampled trees so that seeds matter
    let config = HyperConfig {
        n_trees: 200,
        eta: 0.05,
        max_depth: 3,
        subsample: 0.7,
        colsample: 0.7,
        min_child_weight: 5.0,
        ..HyperConfig::default()
    };
    for seed in 0..5 {
        let model = fit_task2(&data.train, &data.train_labels, &config.with_seed(seed))?;
        println!("seed {seed}: validation AUC {:.4}", evaluate_task2(&model, &data)?);
    }

    let spec = EnsembleSpec::new(members, 0)?;
    let mean = ensemble_predict(&spec, &config, |c| fit_task2(&data.train, &data.train_labels, c)?.predict(&data.valid))?;
    println!("{members}-member ensemble: validation AUC {:.4}", auc(&data.valid_labels, &mean)?);
    Ok(())
}
