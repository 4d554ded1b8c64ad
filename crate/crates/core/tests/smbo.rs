use bankcard::smbo::{propose_batch, read_trial_log, tune, ProposalOptions, SearchSpace, TrialStatus, TuneOptions};

fn sphere(x: &[f64]) -> bankcard::Result<f64> {
    Ok(x.iter().map(|v| (v - 0.3) * (v - 0.3)).sum())
}

#[test]
fn parallel_batches_solve_the_sphere() {
    let space = SearchSpace::unit_cube(4);
    let opts = TuneOptions {
        budget: 60,
        parallel: 4,
        seed: 1,
        ..TuneOptions::default()
    };
    let r = tune(sphere, &space, &opts).unwrap();
    assert_eq!(r.trials.len(), 60);
    assert!(r.best.loss < 0.01, "{}", r.best.loss);
    assert!(r.best_so_far().windows(2).all(|w| w[1] <= w[0]));
    let ids: Vec<usize> = r.trials.iter().map(|t| t.trial_id).collect();
    assert_eq!(ids, (0..60).collect::<Vec<_>>());
}

#[test]
fn parallel_runs_are_reproducible() {
    let space = SearchSpace::unit_cube(3);
    let opts = TuneOptions {
        budget: 24,
        parallel: 3,
        seed: 8,
        ..TuneOptions::default()
    };
    let a = tune(sphere, &space, &opts).unwrap();
    let b = tune(sphere, &space, &opts).unwrap();
    let v = |r: &bankcard::smbo::TuneResult| r.trials.iter().map(|t| t.values.clone()).collect::<Vec<_>>();
    assert_eq!(v(&a), v(&b));
}

#[test]
fn a_thousand_proposals_stay_in_the_unit_cube() {
    let opts = ProposalOptions {
        n_candidates: 300,
        ..ProposalOptions::default()
    };
    let mut done: Vec<(Vec<f64>, f64)> = Vec::new();
    let mut n = 0;
    let mut stream = 0;
    while n < 1000 {
        let batch = propose_batch(&done, &[], 5, 25, 17, stream, &opts).unwrap();
        stream += 1;
        for p in batch {
            assert!(p.iter().all(|u| (0.0..=1.0).contains(u)), "{p:?}");
            n += 1;
            // keep the surrogate small: only the 40 most recent evaluations
            let l = sphere(&p).unwrap();
            done.push((p, l));
            if done.len() > 40 {
                done.remove(0);
            }
        }
    }
}

#[test]
fn log_has_one_row_per_trial_and_resume_matches() {
    let tmp = tempfile::tempdir().unwrap();
    let space = SearchSpace::gbdt(true);
    let objective = |v: &[f64]| -> bankcard::Result<f64> {
        let u = space.normalize(v)?;
        if u[0] > 0.9 {
            return Err(bankcard::Error::Numeric("diverged".into()));
        }
        Ok(u.iter().map(|x| (x - 0.6).powi(2)).sum())
    };
    let full_log = tmp.path().join("full.csv");
    let full = tune(
        objective,
        &space,
        &TuneOptions {
            budget: 20,
            parallel: 2,
            seed: 4,
            log_path: Some(full_log.clone()),
            ..TuneOptions::default()
        },
    )
    .unwrap();
    let text = std::fs::read_to_string(&full_log).unwrap();
    let header = text.lines().next().unwrap();
    assert_eq!(
        header,
        "trial_id,n_trees,eta,max_depth,min_child_weight,lambda_l2,subsample,colsample,pos_weight_multiplier,loss,status,wall_seconds"
    );
    assert_eq!(text.lines().count(), 21);
    let logged = read_trial_log(&full_log, &space).unwrap();
    assert_eq!(logged.len(), 20);
    for (a, b) in logged.iter().zip(&full.trials) {
        assert_eq!(a.values, b.values);
        assert_eq!(a.loss, b.loss);
        assert_eq!(a.status, b.status);
    }
    assert!(full.trials.iter().all(|t| t.status != TrialStatus::Failed || t.loss == f64::INFINITY));

    let log = tmp.path().join("part.csv");
    let mut opts = TuneOptions {
        budget: 10,
        parallel: 2,
        seed: 4,
        log_path: Some(log.clone()),
        ..TuneOptions::default()
    };
    tune(objective, &space, &opts).unwrap();
    opts.budget = 20;
    opts.resume = true;
    let resumed = tune(objective, &space, &opts).unwrap();
    assert_eq!(resumed.best.values, full.best.values);
    assert_eq!(std::fs::read_to_string(&log).unwrap().lines().count(), 21);
}

#[test]
fn zero_budget_is_an_argument_error() {
    let opts = TuneOptions {
        budget: 0,
        ..TuneOptions::default()
    };
    let err = tune(sphere, &SearchSpace::unit_cube(2), &opts).unwrap_err();
    assert_eq!(err.exit_code(), 2);
}
