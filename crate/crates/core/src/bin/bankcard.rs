//! Command-line front end over the `bankcard` library.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use bankcard::dataset::{generate_to_dir, load_dataset, read_split, split_customers, write_split, GenConfig};
use bankcard::features::{FeatureGroup, Task1Assembler, Task2Assembler};
use bankcard::gbdt::{GbdtModel, HyperConfig};
use bankcard::kv::KeyValues;
use bankcard::metrics::{auc, task1_score, MetricReport};
use bankcard::pipeline::{
    ablation, ensemble_predict, fit_task1, fit_task2, labels_of, read_task1_predictions,
    read_task2_predictions, select_all, single_group_variants, task1_objective, task2_objective, visit_truth,
    write_ablation_csv, write_importance_csv, write_task1_predictions, write_task2_predictions, AblationVariant,
    EnsembleSpec, Task1Data, Task1Model, Task2Data,
};
use bankcard::smbo::{tune, SearchSpace, TuneOptions};
use bankcard::{Error, Result};

#[derive(Parser)]
#[command(name = "bankcard", version, about = "Branch-visit and card-application modelling")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Task {
    #[value(name = "1")]
    Visits,
    #[value(name = "2")]
    Card,
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic dataset (customers, branches, activities, visits,
    /// labels) into a directory.
    ///
    /// Generator keys for --config: n_customers (1000), n_branches (10),
    /// n_channels (4), extent (100), activity_rate (30), geo_jitter (5),
    /// visit_amplitude (4), visit_scale (15), positive_rate (0.1),
    /// label_signal (1.2), label_noise (0.7).
    Gen {
        #[arg(long)]
        out: PathBuf,
        /// key = value generator settings
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        n_customers: Option<usize>,
        #[arg(long)]
        n_branches: Option<usize>,
    },
    /// Split customers into training and validation folds.
    Split {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0.8)]
        fraction: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Train on the training fold and predict the validation fold.
    Train {
        #[arg(long, value_enum)]
        task: Task,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        split: PathBuf,
        /// key = value boosting hyperparameters
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// Seed-ensemble size
        #[arg(long, default_value_t = 1)]
        members: usize,
        /// Directory for model files
        #[arg(long)]
        models: Option<PathBuf>,
        #[arg(long)]
        predictions: PathBuf,
    },
    /// Hyperparameter search on the validation fold.
    Tune {
        #[arg(long, value_enum)]
        task: Task,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        split: PathBuf,
        #[arg(long, default_value_t = 50)]
        budget: usize,
        #[arg(long, default_value_t = 1)]
        parallel: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Search space file; defaults to the standard boosting ranges
        #[arg(long)]
        space: Option<PathBuf>,
        /// Base hyperparameters for dimensions not searched
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value = "trials.csv")]
        log: PathBuf,
        #[arg(long)]
        resume: bool,
        /// Write the best configuration here
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Score a predictions file against the dataset's labels.
    Eval {
        #[arg(long, value_enum)]
        task: Task,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        predictions: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Split-frequency feature importance of a model file or directory.
    Importance {
        /// A model JSON file, or a directory of per-branch models
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Retrain the branch-visit models with feature groups removed.
    Ablate {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        split: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Groups to remove, `+`-joined (repeatable). Defaults to each
        /// group on its own.
        #[arg(long = "variant")]
        variants: Vec<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Dump an assembled feature matrix as CSV.
    Features {
        #[arg(long, value_enum)]
        task: Task,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        split: PathBuf,
        /// Branch for branch-visit features
        #[arg(long, default_value_t = 0)]
        branch: u32,
        #[arg(long)]
        out: PathBuf,
    },
}

fn hyper_config(path: Option<&Path>, seed: Option<u64>) -> Result<HyperConfig> {
    let mut c = match path {
        Some(p) => HyperConfig::from_key_values(&KeyValues::read(p)?)?,
        None => HyperConfig::default(),
    };
    if let Some(s) = seed {
        c.seed = s;
    }
    c.validate()?;
    Ok(c)
}

fn emit(kv: &KeyValues, out: Option<&Path>) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, kv.to_text())?,
        None => print!("{}", kv.to_text()),
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Gen {
            out,
            config,
            seed,
            n_customers,
            n_branches,
        } => {
            let mut c = match config {
                Some(p) => GenConfig::from_key_values(&KeyValues::read(&p)?)?,
                None => GenConfig::default(),
            };
            c.n_customers = n_customers.unwrap_or(c.n_customers);
            c.n_branches = n_branches.unwrap_or(c.n_branches);
            let ds = generate_to_dir(&c, seed, &out)?;
            eprintln!(
                "wrote {} customers, {} branches to {}",
                ds.customers().len(),
                ds.n_branches(),
                out.display()
            );
        }
        Command::Split {
            data,
            out,
            fraction,
            seed,
        } => {
            let ds = load_dataset(&data)?;
            let split = split_customers(&ds.customer_ids(), fraction, seed)?;
            write_split(&out, &split)?;
        }
        Command::Train {
            task,
            data,
            split,
            config,
            seed,
            members,
            models,
            predictions,
        } => {
            let ds = load_dataset(&data)?;
            let split = read_split(&split)?;
            let config = hyper_config(config.as_deref(), seed)?;
            let spec = EnsembleSpec::new(members, config.seed)?;
            let model_dir = |s: u64| models.as_ref().map(|d| if members == 1 { d.clone() } else { d.join(format!("seed_{s}")) });
            match task {
                Task::Visits => {
                    let data = Task1Data::new(&ds, &split)?;
                    let b = ds.n_branches();
                    let flat = ensemble_predict(&spec, &config, |c| {
                        let model = fit_task1(&data.train, &data.train_targets, c, &[])?;
                        if let Some(dir) = model_dir(c.seed) {
                            model.save(&dir)?;
                        }
                        Ok(model.predict_counts(&data.valid)?.concat())
                    })?;
                    let counts: Vec<Vec<f64>> = flat.chunks(b).map(<[f64]>::to_vec).collect();
                    let preds = select_all(&data.valid.ids, &counts)?;
                    write_task1_predictions(&predictions, &preds)?;
                    let report = task1_score(&data.valid_truth, &preds)?;
                    eprintln!("validation task1_score = {}", report.score);
                }
                Task::Card => {
                    let data = Task2Data::new(&ds, &split)?;
                    let scores = ensemble_predict(&spec, &config, |c| {
                        let model = fit_task2(&data.train, &data.train_labels, c)?;
                        if let Some(dir) = model_dir(c.seed) {
                            std::fs::create_dir_all(&dir)?;
                            model.save(&dir.join("model.json"))?;
                        }
                        model.predict(&data.valid)
                    })?;
                    write_task2_predictions(&predictions, &split.valid_ids, &scores)?;
                    eprintln!("validation auc = {}", auc(&data.valid_labels, &scores)?);
                }
            }
        }
        Command::Tune {
            task,
            data,
            split,
            budget,
            parallel,
            seed,
            space,
            config,
            log,
            resume,
            out,
        } => {
            let ds = load_dataset(&data)?;
            let split = read_split(&split)?;
            let base = hyper_config(config.as_deref(), None)?;
            let space = match space {
                Some(p) => SearchSpace::read(&p)?,
                None => SearchSpace::gbdt(task == Task::Card),
            };
            let opts = TuneOptions {
                budget,
                parallel,
                seed,
                log_path: Some(log),
                resume,
                ..TuneOptions::default()
            };
            let result = match task {
                Task::Visits => {
                    let data = Task1Data::new(&ds, &split)?;
                    tune(task1_objective(&data, &space, &base), &space, &opts)?
                }
                Task::Card => {
                    let data = Task2Data::new(&ds, &split)?;
                    tune(task2_objective(&data, &space, &base), &space, &opts)?
                }
            };
            let best = space.to_hyper_config(&result.best.values, &base)?;
            eprintln!("best trial {} loss = {}", result.best.trial_id, result.best.loss);
            emit(&best.to_key_values(), out.as_deref())?;
        }
        Command::Eval {
            task,
            data,
            predictions,
            out,
        } => {
            let ds = load_dataset(&data)?;
            let report = match task {
                Task::Visits => {
                    let preds = read_task1_predictions(&predictions)?;
                    let ids: Vec<u32> = preds.keys().copied().collect();
                    check_known(&ds, &ids)?;
                    MetricReport::Task1(task1_score(&visit_truth(&ds, &ids), &preds)?)
                }
                Task::Card => {
                    let preds = read_task2_predictions(&predictions)?;
                    let ids: Vec<u32> = preds.keys().copied().collect();
                    check_known(&ds, &ids)?;
                    let labels = labels_of(&ds, &ids)?;
                    let scores: Vec<f64> = preds.values().copied().collect();
                    let n_pos = labels.iter().filter(|&&l| l).count();
                    MetricReport::Task2 {
                        auc: auc(&labels, &scores)?,
                        n_pos,
                        n_neg: labels.len() - n_pos,
                    }
                }
            };
            emit(&report.to_key_values(), out.as_deref())?;
        }
        Command::Importance { model, out } => {
            let importance = if model.is_dir() {
                let n = std::fs::read_dir(&model)?
                    .filter_map(|e| e.ok())
                    .filter(|e| e.file_name().to_string_lossy().starts_with("branch_"))
                    .count();
                if n == 0 {
                    GbdtModel::load(&model.join("model.json"))?.feature_importance()
                } else {
                    Task1Model::load(&model, n)?.feature_importance()
                }
            } else {
                GbdtModel::load(&model)?.feature_importance()
            };
            match out {
                Some(p) => write_importance_csv(&p, &importance)?,
                None => {
                    println!("feature,importance");
                    for (k, v) in &importance {
                        println!("{k},{v}");
                    }
                }
            }
        }
        Command::Ablate {
            data,
            split,
            config,
            variants,
            out,
        } => {
            let ds = load_dataset(&data)?;
            let split = read_split(&split)?;
            let config = hyper_config(config.as_deref(), None)?;
            let variants = if variants.is_empty() {
                single_group_variants(&FeatureGroup::TASK1)
            } else {
                variants
                    .iter()
                    .map(|v| AblationVariant::parse(v))
                    .collect::<Result<Vec<_>>>()?
            };
            let data = Task1Data::new(&ds, &split)?;
            let rows = ablation(&data, &config, &variants)?;
            write_ablation_csv(&out, &rows)?;
            for r in &rows {
                eprintln!("{:<40} {:.4} ({:+.4})", r.variant, r.score, r.delta);
            }
        }
        Command::Features {
            task,
            data,
            split,
            branch,
            out,
        } => {
            let ds = load_dataset(&data)?;
            let split = read_split(&split)?;
            let ids = ds.customer_ids();
            let matrix = match task {
                Task::Visits => Task1Assembler::new(&ds, &split)?.assemble(branch, &ids)?,
                Task::Card => Task2Assembler::new(&ds).assemble(&ids)?,
            };
            matrix.write_csv(&out)?;
        }
    }
    Ok(())
}

fn check_known(ds: &bankcard::dataset::Dataset, ids: &[u32]) -> Result<()> {
    match ids.iter().find(|&&id| ds.customer(id).is_none()) {
        Some(id) => Err(Error::Argument(format!("predictions name unknown customer {id}"))),
        None => Ok(()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
