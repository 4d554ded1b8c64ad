//! Gradient boosting on a plain feature matrix: Poisson counts, the
//! per-round training loss, and saving and reloading a model.
//!
//! ```text
//! cargo run --release --example boosting_basics
//! ```

use bankcard::features::FeatureMatrix;
use bankcard::gbdt::{train_with_trace, GbdtModel, HyperConfig, Loss};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};

fn main() -> bankcard::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let n = 2000;
    let mut rows = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    for _ in 0..n {
        let x0: f64 = rng.random_range(0.0..4.0);
        let x1: f64 = rng.random_range(-1.0..1.0);
        let rate = (0.5 * x0 - x1 * x1).exp();
        y.push(Poisson::new(rate).unwrap().sample(&mut rng));
        rows.push(vec![x0, x1, rng.random::<f64>()]);
    }
    let matrix = FeatureMatrix::from_rows(vec!["x0".into(), "x1".into(), "noise".into()], &rows)?;

    let config = HyperConfig {
        n_trees: 60,
        max_depth: 3,
        ..HyperConfig::default()
    };
    let (model, trace) = train_with_trace(&matrix, &y, Loss::Poisson, &config)?;
    for (round, loss) in trace.loss.iter().enumerate().step_by(10) {
        println!("round {round:>3}: mean loss (up to the log y! constant) {:.5}", loss / n as f64);
    }
    println!("importance: {:?}", model.feature_importance());

    let path = std::env::temp_dir().join("bankcard-boosting-example.json");
    model.save(&path)?;
    let back = GbdtModel::load(&path)?;
    let same = back.predict(&matrix)? == model.predict(&matrix)?;
    println!("reloaded model from {} predicts identically: {same}", path.display());
    Ok(())
}
