//! Generates a synthetic bank dataset, writes it as CSV files and reads it
//! back.
//!
//! ```text
//! cargo run --release --example generate_dataset -- <out_dir> [seed]
//! ```

use std::path::PathBuf;

use bankcard::dataset::{generate_to_dir, load_dataset, GenConfig};
use bankcard::features::trajectory_category;

fn main() -> bankcard::Result<()> {
    let mut args = std::env::args().skip(1);
    let out = PathBuf::from(args.next().unwrap_or_else(|| "generated".into()));
    let seed: u64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(0);

    let config = GenConfig::default();
    print!("{}", config.to_key_values().to_text());
    generate_to_dir(&config, seed, &out)?;

    let ds = load_dataset(&out)?;
    let total_visits: u64 = ds.labels().visits.values().map(|&v| u64::from(v)).sum();
    let applied = ds.labels().applied.values().filter(|&&a| a).count();
    println!("\n{} customers, {} branches", ds.customers().len(), ds.n_branches());
    println!("{} activities over channels {:?}", ds.activities().len(), ds.channels().iter().map(|c| &c.name).collect::<Vec<_>>());
    println!("{total_visits} branch visits, {applied} card applications");

    let mut per_category = [0usize; 5];
    for c in ds.customers() {
        per_category[trajectory_category(&c.wealth_flags)?.value() as usize - 1] += 1;
    }
    println!("wealth trajectory categories 1..5: {per_category:?}");
    Ok(())
}
