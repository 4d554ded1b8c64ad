//! Retrains the branch-visit models with feature groups left out and
//! compares validation scores against the full feature set and against
//! submitting the globally most visited branches to everyone.
//!
//! ```text
//! cargo run --release --example feature_ablation -- [n_customers] [seed]
//! ```

use bankcard::dataset::{generate, split_customers, GenConfig};
use bankcard::features::FeatureGroup;
use bankcard::gbdt::HyperConfig;
use bankcard::metrics::task1_score;
use bankcard::pipeline::{ablation, popularity_baseline, select_all, single_group_variants, AblationVariant, Task1Data};

fn main() -> bankcard::Result<()> {
    let args: Vec<String> = std::env::args().collect();
    let n: usize = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(5000);
    let seed: u64 = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(0);

    let config = GenConfig {
        n_customers: n,
        n_branches: 10,
        ..GenConfig::default()
    };
    let ds = generate(&config, seed)?;
    let split = split_customers(&ds.customer_ids(), 0.8, seed)?;
    let data = Task1Data::new(&ds, &split)?;

    let popular = popularity_baseline(&ds, &split);
    let rows = vec![popular; split.valid_ids.len()];
    let baseline = task1_score(&data.valid_truth, &select_all(&split.valid_ids, &rows)?)?;
    println!("{:<40} {:.4}", "popularity baseline", baseline.score);

    let mut variants = single_group_variants(&FeatureGroup::TASK1);
    variants.push(AblationVariant::parse("distance+distance-stats+knn")?);
    let hyper = HyperConfig::default();
    for row in ablation(&data, &hyper, &variants)? {
        println!("{:<40} {:.4} ({:+.4})", row.variant, row.score, row.delta);
    }
    Ok(())
}
