use std::fmt;
use std::fs::OpenOptions;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::gp::GpSurrogate;
use super::space::SearchSpace;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrialStatus {
    Pending,
    Done,
    Failed,
}

impl fmt::Display for TrialStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TrialStatus::Pending => "pending",
            TrialStatus::Done => "done",
            TrialStatus::Failed => "failed",
        })
    }
}

impl FromStr for TrialStatus {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pending" => Ok(TrialStatus::Pending),
            "done" => Ok(TrialStatus::Done),
            "failed" => Ok(TrialStatus::Failed),
            other => Err(Error::argument(format!("unknown trial status `{other}`"))),
        }
    }
}

/// One objective evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub trial_id: usize,
    /// Normalised coordinates of `values`.
    pub point: Vec<f64>,
    /// Hyperparameters on their natural scale.
    pub values: Vec<f64>,
    /// `+inf` for failed trials.
    pub loss: f64,
    pub status: TrialStatus,
    pub wall_seconds: f64,
}

#[derive(Debug, Clone)]
pub struct ProposalOptions {
    /// Random proposals until this many trials are done.
    pub n_initial: usize,
    /// Random candidates scored by expected improvement per proposal.
    pub n_candidates: usize,
    /// Candidates closer than this to an observed or pending point are
    /// skipped.
    pub min_separation: f64,
}

impl Default for ProposalOptions {
    fn default() -> Self {
        Self {
            n_initial: 10,
            n_candidates: 1000,
            min_separation: 1e-6,
        }
    }
}

fn too_close(p: &[f64], others: &[Vec<f64>], eps: f64) -> bool {
    others
        .iter()
        .any(|o| o.iter().zip(p).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt() < eps)
}

/// Proposes `batch_size` points of `[0, 1]^dim`.
///
/// With fewer than `n_initial` done observations the batch is uniform
/// random. Otherwise each slot refits the surrogate on the done points plus
/// every pending and already-proposed point, the latter carrying the current
/// best loss (constant liar), and takes the expected-improvement argmax over
/// fresh random candidates. `stream` selects an independent random stream so
/// each batch is reproducible from the trial count.
pub fn propose_batch(
    done: &[(Vec<f64>, f64)],
    pending: &[Vec<f64>],
    dim: usize,
    batch_size: usize,
    seed: u64,
    stream: u64,
    opts: &ProposalOptions,
) -> Result<Vec<Vec<f64>>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let random_point = |rng: &mut ChaCha8Rng| -> Vec<f64> { (0..dim).map(|_| rng.random::<f64>()).collect() };

    let mut occupied: Vec<Vec<f64>> = done.iter().map(|d| d.0.clone()).chain(pending.iter().cloned()).collect();
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(batch_size);
    if done.len() < opts.n_initial.max(2) {
        while out.len() < batch_size {
            let p = random_point(&mut rng);
            if !too_close(&p, &occupied, opts.min_separation) {
                occupied.push(p.clone());
                out.push(p);
            }
        }
        return Ok(out);
    }

    let best = done.iter().map(|d| d.1).fold(f64::INFINITY, f64::min);
    let mut points: Vec<Vec<f64>> = done.iter().map(|d| d.0.clone()).collect();
    let mut losses: Vec<f64> = done.iter().map(|d| d.1).collect();
    for p in pending {
        points.push(p.clone());
        losses.push(best);
    }
    for _ in 0..batch_size {
        let gp = GpSurrogate::fit(&points, &losses)?;
        let mut chosen: Option<(f64, Vec<f64>)> = None;
        for _ in 0..opts.n_candidates {
            let cand = random_point(&mut rng);
            if too_close(&cand, &occupied, opts.min_separation) {
                continue;
            }
            let ei = gp.expected_improvement(&cand, best);
            if chosen.as_ref().is_none_or(|c| ei > c.0) {
                chosen = Some((ei, cand));
            }
        }
        let p = match chosen {
            Some((_, p)) => p,
            None => random_point(&mut rng),
        };
        points.push(p.clone());
        losses.push(best);
        occupied.push(p.clone());
        out.push(p);
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct TuneOptions {
    /// Total number of trials, including any resumed from the log.
    pub budget: usize,
    /// Objective evaluations run concurrently.
    pub parallel: usize,
    pub seed: u64,
    /// Append-only CSV trial log.
    pub log_path: Option<PathBuf>,
    /// Continue from the trials already in `log_path`.
    pub resume: bool,
    pub proposal: ProposalOptions,
}

impl Default for TuneOptions {
    fn default() -> Self {
        Self {
            budget: 50,
            parallel: 1,
            seed: 0,
            log_path: None,
            resume: false,
            proposal: ProposalOptions::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct TuneResult {
    pub best: TrialRecord,
    /// All trials in id order.
    pub trials: Vec<TrialRecord>,
}

impl TuneResult {
    /// Running minimum of the loss in trial order.
    pub fn best_so_far(&self) -> Vec<f64> {
        let mut best = f64::INFINITY;
        self.trials
            .iter()
            .map(|t| {
                best = best.min(t.loss);
                best
            })
            .collect()
    }
}

fn log_header(space: &SearchSpace) -> Vec<String> {
    let mut h = vec!["trial_id".to_string()];
    h.extend(space.names().into_iter().map(String::from));
    h.extend(["loss", "status", "wall_seconds"].map(String::from));
    h
}

fn append_log(path: &Path, space: &SearchSpace, trials: &[TrialRecord]) -> Result<()> {
    let fresh = std::fs::metadata(path).map(|m| m.len() == 0).unwrap_or(true);
    let file = OpenOptions::new().create(true).append(true).open(path)?;
    let mut w = csv::Writer::from_writer(file);
    if fresh {
        w.write_record(log_header(space))?;
    }
    for t in trials {
        let mut rec = vec![t.trial_id.to_string()];
        rec.extend(t.values.iter().map(|v| v.to_string()));
        rec.extend([t.loss.to_string(), t.status.to_string(), t.wall_seconds.to_string()]);
        w.write_record(&rec)?;
    }
    w.into_inner().map_err(|e| Error::Io(e.into_error()))?.flush()?;
    Ok(())
}

/// Reads a trial log written by [`tune`].
pub fn read_trial_log(path: &Path, space: &SearchSpace) -> Result<Vec<TrialRecord>> {
    let file = std::fs::File::open(path).map_err(|source| Error::Load {
        path: path.to_path_buf(),
        source,
    })?;
    let name = path.display().to_string();
    let mut reader = csv::Reader::from_reader(file);
    let header: Vec<String> = reader.headers()?.iter().map(String::from).collect();
    if header != log_header(space) {
        return Err(Error::validation(&name, 1, "trial log columns do not match the search space"));
    }
    let d = space.len();
    let mut trials = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let row = i + 2;
        let rec = rec.map_err(|e| Error::validation(&name, row, e.to_string()))?;
        let num = |c: usize| -> Result<f64> {
            rec[c]
                .parse::<f64>()
                .map_err(|_| Error::validation(&name, row, format!("bad number `{}`", &rec[c])))
        };
        let trial_id = rec[0]
            .parse::<usize>()
            .map_err(|_| Error::validation(&name, row, "bad trial_id"))?;
        if trial_id != trials.len() {
            return Err(Error::validation(&name, row, format!("expected trial_id {}", trials.len())));
        }
        let values: Vec<f64> = (1..=d).map(num).collect::<Result<_>>()?;
        let point = space
            .normalize(&values)
            .map_err(|e| Error::validation(&name, row, e.to_string()))?;
        let status: TrialStatus = rec[d + 2].parse()?;
        trials.push(TrialRecord {
            trial_id,
            point,
            values,
            loss: num(d + 1)?,
            status,
            wall_seconds: num(d + 3)?,
        });
    }
    Ok(trials)
}

fn best_trial(trials: &[TrialRecord]) -> Option<&TrialRecord> {
    trials
        .iter()
        .filter(|t| t.status == TrialStatus::Done)
        .fold(None, |best: Option<&TrialRecord>, t| match best {
            Some(b) if b.loss <= t.loss => Some(b),
            _ => Some(t),
        })
}

/// Minimises `objective` over `space`.
///
/// Trials run in synchronous batches of up to `parallel` concurrent
/// evaluations; each batch is proposed with the trial history fixed, so the
/// trial sequence depends only on `seed` and `parallel`. An objective error
/// or non-finite loss marks the trial failed with loss `+inf`; failed
/// trials are not shown to the surrogate.
pub fn tune<F>(objective: F, space: &SearchSpace, opts: &TuneOptions) -> Result<TuneResult>
where
    F: Fn(&[f64]) -> Result<f64> + Sync,
{
    if opts.budget == 0 {
        return Err(Error::argument("budget must be at least 1"));
    }
    let parallel = opts.parallel.max(1);
    let mut trials = match (&opts.log_path, opts.resume) {
        (Some(path), true) if path.exists() => read_trial_log(path, space)?,
        _ => Vec::new(),
    };
    if let (Some(path), false) = (&opts.log_path, opts.resume) {
        std::fs::write(path, "")?;
    }

    while trials.len() < opts.budget {
        let batch = parallel.min(opts.budget - trials.len());
        let done: Vec<(Vec<f64>, f64)> = trials
            .iter()
            .filter(|t| t.status == TrialStatus::Done)
            .map(|t| (t.point.clone(), t.loss))
            .collect();
        let proposals = propose_batch(
            &done,
            &[],
            space.len(),
            batch,
            opts.seed,
            trials.len() as u64,
            &opts.proposal,
        )?;
        let mut candidates = Vec::with_capacity(batch);
        for p in &proposals {
            let values = space.denormalize(p)?;
            let point = space.normalize(&values)?;
            candidates.push((values, point));
        }

        let outcomes: Vec<(Result<f64>, f64)> = std::thread::scope(|scope| {
            let handles: Vec<_> = candidates
                .iter()
                .map(|(values, _)| {
                    let objective = &objective;
                    scope.spawn(move || {
                        let start = Instant::now();
                        let loss = objective(values);
                        (loss, start.elapsed().as_secs_f64())
                    })
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().unwrap_or_else(|_| (Err(Error::numeric("objective panicked")), 0.0)))
                .collect()
        });

        let first_new = trials.len();
        for ((values, point), (loss, wall_seconds)) in candidates.into_iter().zip(outcomes) {
            let (loss, status) = match loss {
                Ok(l) if l.is_finite() => (l, TrialStatus::Done),
                _ => (f64::INFINITY, TrialStatus::Failed),
            };
            trials.push(TrialRecord {
                trial_id: trials.len(),
                point,
                values,
                loss,
                status,
                wall_seconds,
            });
        }
        if let Some(path) = &opts.log_path {
            append_log(path, space, &trials[first_new..])?;
        }
    }

    let best = best_trial(&trials)
        .cloned()
        .ok_or_else(|| Error::numeric("every trial failed"))?;
    Ok(TuneResult { best, trials })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sphere(x: &[f64]) -> Result<f64> {
        Ok(x.iter().map(|v| (v - 0.3) * (v - 0.3)).sum())
    }

    #[test]
    fn initial_design_is_random_and_distinct() {
        let pts = propose_batch(&[], &[], 3, 5, 1, 0, &ProposalOptions::default()).unwrap();
        assert_eq!(pts.len(), 5);
        for i in 0..5 {
            assert!(pts[i].iter().all(|u| (0.0..1.0).contains(u)));
            for j in 0..i {
                assert_ne!(pts[i], pts[j]);
            }
        }
    }

    #[test]
    fn single_proposal_is_ei_argmax() {
        let done: Vec<(Vec<f64>, f64)> = (0..12)
            .map(|i| {
                let p = vec![i as f64 / 11.0, (i * 7 % 12) as f64 / 11.0];
                let l = sphere(&p).unwrap();
                (p, l)
            })
            .collect();
        let opts = ProposalOptions::default();
        let got = propose_batch(&done, &[], 2, 1, 9, 12, &opts).unwrap();

        let pts: Vec<Vec<f64>> = done.iter().map(|d| d.0.clone()).collect();
        let ls: Vec<f64> = done.iter().map(|d| d.1).collect();
        let gp = GpSurrogate::fit(&pts, &ls).unwrap();
        let best = ls.iter().copied().fold(f64::INFINITY, f64::min);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        rng.set_stream(12);
        let mut arg = (f64::NEG_INFINITY, vec![]);
        for _ in 0..opts.n_candidates {
            let c: Vec<f64> = (0..2).map(|_| rng.random::<f64>()).collect();
            let ei = gp.expected_improvement(&c, best);
            if ei > arg.0 {
                arg = (ei, c);
            }
        }
        assert_eq!(got[0], arg.1);
    }

    #[test]
    fn batches_have_no_duplicates() {
        for seed in 0..20 {
            let done: Vec<(Vec<f64>, f64)> = propose_batch(&[], &[], 3, 12, seed, 0, &ProposalOptions::default())
                .unwrap()
                .into_iter()
                .map(|p| {
                    let l = sphere(&p).unwrap();
                    (p, l)
                })
                .collect();
            let batch = propose_batch(&done, &[], 3, 4, seed, 12, &ProposalOptions::default()).unwrap();
            for i in 0..batch.len() {
                for j in 0..i {
                    assert_ne!(batch[i], batch[j], "seed {seed}");
                }
                assert!(!done.iter().any(|d| d.0 == batch[i]));
            }
        }
    }

    #[test]
    fn budget_one_returns_the_single_trial() {
        let space = SearchSpace::unit_cube(2);
        let opts = TuneOptions {
            budget: 1,
            ..TuneOptions::default()
        };
        let r = tune(sphere, &space, &opts).unwrap();
        assert_eq!(r.trials.len(), 1);
        assert_eq!(r.best, r.trials[0]);
    }

    #[test]
    fn failures_are_recorded_and_skipped() {
        let space = SearchSpace::unit_cube(2);
        let opts = TuneOptions {
            budget: 16,
            parallel: 3,
            ..TuneOptions::default()
        };
        let flaky = |x: &[f64]| if x[0] < 0.3 { Err(Error::numeric("boom")) } else { sphere(x) };
        let r = tune(flaky, &space, &opts).unwrap();
        assert_eq!(r.trials.len(), 16);
        assert!(r.trials.iter().any(|t| t.status == TrialStatus::Failed));
        assert!(r
            .trials
            .iter()
            .filter(|t| t.status == TrialStatus::Failed)
            .all(|t| t.loss == f64::INFINITY));
        assert_eq!(r.best.status, TrialStatus::Done);
        assert!(r.best_so_far().windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn sequential_runs_are_deterministic() {
        let space = SearchSpace::unit_cube(3);
        let opts = TuneOptions {
            budget: 14,
            seed: 3,
            ..TuneOptions::default()
        };
        let a = tune(sphere, &space, &opts).unwrap();
        let b = tune(sphere, &space, &opts).unwrap();
        let strip = |r: &TuneResult| r.trials.iter().map(|t| (t.values.clone(), t.loss)).collect::<Vec<_>>();
        assert_eq!(strip(&a), strip(&b));
    }

    #[test]
    fn resume_continues_the_same_sequence() {
        let tmp = tempfile::tempdir().unwrap();
        let space = SearchSpace::gbdt(false);
        let objective = |v: &[f64]| Ok(space.normalize(v)?.iter().map(|u| (u - 0.4).powi(2)).sum());
        let path = tmp.path().join("trials.csv");
        let full = TuneOptions {
            budget: 16,
            seed: 5,
            log_path: Some(tmp.path().join("full.csv")),
            ..TuneOptions::default()
        };
        let reference = tune(objective, &space, &full).unwrap();

        let partial = TuneOptions {
            budget: 12,
            log_path: Some(path.clone()),
            ..full.clone()
        };
        tune(objective, &space, &partial).unwrap();
        let resumed = TuneOptions {
            resume: true,
            log_path: Some(path.clone()),
            ..full.clone()
        };
        let r = tune(objective, &space, &resumed).unwrap();
        assert_eq!(r.trials.len(), 16);
        assert_eq!(r.best.values, reference.best.values);
        assert_eq!(r.best.loss, reference.best.loss);
        assert_eq!(read_trial_log(&path, &space).unwrap().len(), 16);
    }

    #[test]
    fn never_leaves_unit_cube() {
        let space = SearchSpace::unit_cube(2);
        let opts = TuneOptions {
            budget: 40,
            parallel: 4,
            proposal: ProposalOptions {
                n_candidates: 200,
                ..ProposalOptions::default()
            },
            ..TuneOptions::default()
        };
        let guarded = |x: &[f64]| {
            assert!(x.iter().all(|v| (0.0..=1.0).contains(v)));
            sphere(x)
        };
        let r = tune(guarded, &space, &opts).unwrap();
        assert!(r.trials.iter().all(|t| t.point.iter().all(|u| (0.0..=1.0).contains(u))));
    }
}
