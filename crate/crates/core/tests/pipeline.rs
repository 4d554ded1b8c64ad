mod common;

use bankcard::dataset::{generate, split_customers, DataSplit, Dataset, GenConfig};
use bankcard::features::{FeatureGroup, FeatureMatrix};
use bankcard::gbdt::HyperConfig;
use bankcard::metrics::task1_score;
use bankcard::pipeline::{
    ablation, ensemble_predict, evaluate_task1, evaluate_task2, fit_task1, fit_task2, select_all, select_top5,
    single_group_variants, task2_pos_weight, train_task1, train_task2, write_ablation_csv, AblationVariant,
    BranchMatrices, EnsembleSpec, Task1Data, Task2Data,
};
use proptest::prelude::*;

fn dataset(n: usize, b: usize, seed: u64) -> (Dataset, DataSplit) {
    let ds = generate(
        &GenConfig {
            n_customers: n,
            n_branches: b,
            ..GenConfig::default()
        },
        seed,
    )
    .unwrap();
    let split = split_customers(&ds.customer_ids(), 0.8, seed).unwrap();
    (ds, split)
}

fn quick() -> HyperConfig {
    HyperConfig {
        n_trees: 40,
        max_depth: 4,
        ..HyperConfig::default()
    }
}

#[test]
fn one_model_per_branch() {
    let tmp = tempfile::tempdir().unwrap();
    let (ds, split) = dataset(300, 6, 1);
    let model = train_task1(&ds, &split, &quick()).unwrap();
    assert_eq!(model.n_branches(), 6);
    model.save(tmp.path()).unwrap();
    assert_eq!(std::fs::read_dir(tmp.path()).unwrap().count(), 6);
}

#[test]
fn branch_nobody_visits_predicts_a_constant() {
    let (ds, split) = dataset(300, 6, 2);
    let mut labels = ds.labels().clone();
    labels.visits.retain(|&(_, b), _| b != 4);
    let ds = Dataset::new(
        ds.customers().to_vec(),
        ds.branches().to_vec(),
        ds.activities().to_vec(),
        labels,
    )
    .unwrap();
    let data = Task1Data::new(&ds, &split).unwrap();
    let model = fit_task1(&data.train, &data.train_targets, &quick(), &[]).unwrap();
    let counts = model.predict_counts(&data.valid).unwrap();
    let first = counts[0][4];
    assert!(first < 1e-6);
    assert!(counts.iter().all(|row| row[4] == first));
}

#[test]
fn trained_models_beat_the_constant_mean() {
    let (ds, split) = dataset(1500, 8, 3);
    let data = Task1Data::new(&ds, &split).unwrap();
    let model = fit_task1(&data.train, &data.train_targets, &quick(), &[]).unwrap();
    let score = evaluate_task1(&model, &data).unwrap().score;
    let means: Vec<f64> = data
        .train_targets
        .iter()
        .map(|y| y.iter().sum::<f64>() / y.len() as f64)
        .collect();
    let constant = vec![means; data.valid.ids.len()];
    let baseline = task1_score(&data.valid_truth, &select_all(&data.valid.ids, &constant).unwrap()).unwrap();
    assert!(score > baseline.score + 0.1, "{score} vs {}", baseline.score);
}

proptest! {
    #[test]
    fn top5_is_invariant_under_monotone_maps(
        preds in proptest::collection::vec(0u32..6, 5..10),
        scale in 0.1f64..10.0,
    ) {
        let p: Vec<f64> = preds.iter().map(|&v| f64::from(v)).collect();
        let mapped: Vec<f64> = p.iter().map(|v| (scale * v).exp() + v * v).collect();
        prop_assert_eq!(select_top5(&p).unwrap().branches(), select_top5(&mapped).unwrap().branches());
    }

    #[test]
    fn top5_has_the_largest_sum(preds in proptest::collection::vec(0.0f64..4.0, 5..=10)) {
        let chosen: f64 = select_top5(&preds).unwrap().selections().iter().map(|s| s.1).sum();
        let n = preds.len();
        let best = (0u32..1 << n)
            .filter(|m| m.count_ones() == 5)
            .map(|m| (0..n).filter(|i| m >> i & 1 == 1).map(|i| preds[i]).sum::<f64>())
            .fold(f64::NEG_INFINITY, f64::max);
        prop_assert!((chosen - best).abs() < 1e-12);
    }
}

#[test]
fn card_model_ranks_better_than_chance() {
    let (ds, split) = dataset(2000, 5, 4);
    let data = Task2Data::new(&ds, &split).unwrap();
    let w = task2_pos_weight(&data.train_labels, 1.0).unwrap();
    assert!((w - 9.0).abs() < 2.0, "{w}");
    let model = train_task2(&ds, &split, &quick()).unwrap();
    assert!(evaluate_task2(&model, &data).unwrap() > 0.6);
}

#[test]
fn single_class_training_fold_fails() {
    let (ds, split) = dataset(200, 5, 5);
    let mut labels = ds.labels().clone();
    for v in labels.applied.values_mut() {
        *v = false;
    }
    let ds = Dataset::new(ds.customers().to_vec(), ds.branches().to_vec(), ds.activities().to_vec(), labels).unwrap();
    assert!(train_task2(&ds, &split, &quick()).is_err());
}

fn card_member(data: &Task2Data) -> impl Fn(&HyperConfig) -> bankcard::Result<Vec<f64>> + Sync + '_ {
    move |c| fit_task2(&data.train, &data.train_labels, c)?.predict(&data.valid)
}

fn jittery() -> HyperConfig {
    HyperConfig {
        subsample: 0.6,
        colsample: 0.6,
        ..quick()
    }
}

#[test]
fn one_member_ensemble_is_the_single_model() {
    let (ds, split) = dataset(600, 5, 6);
    let data = Task2Data::new(&ds, &split).unwrap();
    let config = jittery().with_seed(12);
    let single = card_member(&data)(&config).unwrap();
    let ens = ensemble_predict(&EnsembleSpec::new(1, 12).unwrap(), &config, card_member(&data)).unwrap();
    assert_eq!(single, ens);
}

#[test]
fn ensemble_does_not_depend_on_thread_count() {
    let (ds, split) = dataset(600, 5, 7);
    let data = Task2Data::new(&ds, &split).unwrap();
    let spec = EnsembleSpec::new(6, 3).unwrap();
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| ensemble_predict(&spec, &jittery(), card_member(&data)).unwrap())
    };
    assert_eq!(run(1), run(4));
}

#[test]
fn identical_members_average_to_a_member() {
    let (ds, split) = dataset(600, 5, 8);
    let data = Task2Data::new(&ds, &split).unwrap();
    let fixed = |_: &HyperConfig| card_member(&data)(&jittery().with_seed(0));
    let ens = ensemble_predict(&EnsembleSpec::new(5, 100).unwrap(), &jittery(), fixed).unwrap();
    let one = card_member(&data)(&jittery().with_seed(0)).unwrap();
    for (a, b) in ens.iter().zip(&one) {
        assert!((a - b).abs() <= 1e-15 * b.abs().max(1.0));
    }
}

#[test]
fn averaging_reduces_seed_variance() {
    let (ds, split) = dataset(1000, 5, 9);
    let data = Task2Data::new(&ds, &split).unwrap();
    let n = data.valid.n_rows();
    let variance = |runs: &[Vec<f64>]| -> f64 {
        (0..n)
            .map(|i| {
                let col: Vec<f64> = runs.iter().map(|r| r[i]).collect();
                let m = col.iter().sum::<f64>() / col.len() as f64;
                col.iter().map(|v| (v - m).powi(2)).sum::<f64>() / col.len() as f64
            })
            .sum::<f64>()
            / n as f64
    };
    let singles: Vec<Vec<f64>> = (0..10).map(|s| card_member(&data)(&jittery().with_seed(s)).unwrap()).collect();
    let ensembles: Vec<Vec<f64>> = (0..10)
        .map(|b| ensemble_predict(&EnsembleSpec::new(10, 1000 + 10 * b).unwrap(), &jittery(), card_member(&data)).unwrap())
        .collect();
    let (vs, ve) = (variance(&singles), variance(&ensembles));
    assert!(ve < vs, "ensemble variance {ve} vs single {vs}");
}

#[test]
fn constant_columns_do_not_change_the_score() {
    let (ds, split) = dataset(800, 6, 10);
    let data = Task1Data::new(&ds, &split).unwrap();
    let pad = |m: &BranchMatrices| -> BranchMatrices {
        let per_branch = m
            .per_branch
            .iter()
            .map(|x| {
                let mut names = x.column_names().to_vec();
                names.extend(["const_a".to_string(), "const_b".to_string()]);
                let mut values = Vec::new();
                for r in 0..x.n_rows() {
                    values.extend_from_slice(x.row(r));
                    values.extend([1.0, -3.5]);
                }
                FeatureMatrix::new(names, x.row_ids().to_vec(), values).unwrap()
            })
            .collect();
        BranchMatrices {
            ids: m.ids.clone(),
            per_branch,
        }
    };
    let padded = Task1Data {
        train: pad(&data.train),
        valid: pad(&data.valid),
        ..data.clone()
    };
    let a = evaluate_task1(&fit_task1(&data.train, &data.train_targets, &quick(), &[]).unwrap(), &data).unwrap();
    let b = evaluate_task1(&fit_task1(&padded.train, &padded.train_targets, &quick(), &[]).unwrap(), &padded).unwrap();
    assert!((a.score - b.score).abs() < 0.005);
}

#[test]
fn ablation_table_lists_full_once() {
    let tmp = tempfile::tempdir().unwrap();
    let (ds, split) = dataset(400, 5, 11);
    let data = Task1Data::new(&ds, &split).unwrap();
    let mut variants = single_group_variants(&FeatureGroup::TASK1);
    variants.push(AblationVariant::full());
    let rows = ablation(&data, &quick(), &variants).unwrap();
    assert_eq!(rows.len(), 7);
    assert_eq!(rows.iter().filter(|r| r.variant == "full").count(), 1);
    assert_eq!(rows[0].delta, 0.0);
    let path = tmp.path().join("ablation.csv");
    write_ablation_csv(&path, &rows).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("variant,task1_score,delta\nfull,"));
    assert_eq!(text.lines().count(), 8);

    let everything = AblationVariant {
        removed: FeatureGroup::TASK1.to_vec(),
    };
    assert!(ablation(&data, &quick(), &[everything]).is_err());
    assert!(AblationVariant::parse("knn+location").is_err());
}
