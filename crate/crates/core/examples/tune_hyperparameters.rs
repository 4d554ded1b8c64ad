//! Gaussian-process search over boosting hyperparameters for the card
//! application model, with parallel constant-liar batches and a trial log
//! that a second run resumes from.
//!
//! ```text
//! cargo run --release --example tune_hyperparameters -- [budget] [parallel]
//! ```

use bankcard::dataset::{generate, split_customers, GenConfig};
use bankcard::gbdt::HyperConfig;
use bankcard::pipeline::{task2_objective, Task2Data};
use bankcard::smbo::{tune, SearchSpace, TuneOptions};

fn main() -> bankcard::Result<()> {
    let args: Vec<String> = std::env::args().collect();
    let budget: usize = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(24);
    let parallel: usize = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(2);

    let ds = generate(
        &GenConfig {
            n_customers: 3000,
            ..GenConfig::default()
        },
        3,
    )?;
    let split = split_customers(&ds.customer_ids(), 0.8, 3)?;
    let data = Task2Data::new(&ds, &split)?;
    let space = SearchSpace::gbdt(true);
    let base = HyperConfig::default();

    let dir = std::env::temp_dir().join("bankcard-tune-example");
    std::fs::create_dir_all(&dir)?;
    let log = dir.join("trials.csv");
    let mut opts = TuneOptions {
        budget: budget / 2,
        parallel,
        seed: 11,
        log_path: Some(log.clone()),
        ..TuneOptions::default()
    };
    let objective = task2_objective(&data, &space, &base);
    let first = tune(&objective, &space, &opts)?;
    println!("after {} trials: best AUC {:.4}", first.trials.len(), -first.best.loss);

    opts.budget = budget;
    opts.resume = true;
    let result = tune(&objective, &space, &opts)?;
    for (t, best) in result.trials.iter().zip(result.best_so_far()) {
        println!("trial {:>3}  AUC {:.4}  best {:.4}  {:.1}s", t.trial_id, -t.loss, -best, t.wall_seconds);
    }
    let config = space.to_hyper_config(&result.best.values, &base)?;
    println!("\nbest configuration (log in {}):\n{}", log.display(), config.to_key_values().to_text());
    Ok(())
}
