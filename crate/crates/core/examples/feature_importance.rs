//! Which features the branch-visit models split on most often.
//!
//! ```text
//! cargo run --release --example feature_importance
//! ```

use bankcard::dataset::{generate, split_customers, GenConfig};
use bankcard::features::FeatureGroup;
use bankcard::gbdt::HyperConfig;
use bankcard::pipeline::{fit_task1, fit_task2, Task1Data, Task2Data};

fn main() -> bankcard::Result<()> {
    let ds = generate(
        &GenConfig {
            n_customers: 2000,
            ..GenConfig::default()
        },
        5,
    )?;
    let split = split_customers(&ds.customer_ids(), 0.8, 5)?;
    let config = HyperConfig {
        n_trees: 80,
        max_depth: 4,
        ..HyperConfig::default()
    };

    let data = Task1Data::new(&ds, &split)?;
    let model = fit_task1(&data.train, &data.train_targets, &config, &[])?;
    let mut ranked: Vec<(String, f64)> = model.feature_importance().into_iter().collect();
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1));
    println!("branch visits, top 12 features:");
    for (name, share) in ranked.iter().take(12) {
        println!("  {name:<18} {share:.3}");
    }
    let mut by_group: Vec<(FeatureGroup, f64)> = Vec::new();
    for (name, share) in &ranked {
        let g = FeatureGroup::of_column(name).expect("known column");
        match by_group.iter_mut().find(|e| e.0 == g) {
            Some(e) => e.1 += share,
            None => by_group.push((g, *share)),
        }
    }
    println!("by group:");
    for (g, share) in by_group {
        println!("  {:<18} {share:.3}", g.name());
    }

    let card = Task2Data::new(&ds, &split)?;
    let model = fit_task2(&card.train, &card.train_labels, &config)?;
    let mut ranked: Vec<(String, f64)> = model.feature_importance().into_iter().collect();
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1));
    println!("\ncard applications, top 8 features:");
    for (name, share) in ranked.iter().take(8) {
        println!("  {name:<18} {share:.3}");
    }
    Ok(())
}
