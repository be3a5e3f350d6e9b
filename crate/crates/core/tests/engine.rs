use std::collections::BTreeMap;
use std::fs;
use std::sync::Arc;

use simstudy::config::StudyConfig;
use simstudy::dgm::Dataset;
use simstudy::engine::{self, KeepDatasets, RunOptions};
use simstudy::estimators::{fit_cox_ph, fit_exponential_ph, fit_weibull_ph, ErrorCode, FitError};
use simstudy::perf;
use simstudy::presets;
use simstudy::records::EstimatesRecord;
use simstudy::store::{self, StoredRun};
use simstudy::Error;

fn small_survival(n_sim: u64) -> StudyConfig {
    let mut cfg = presets::survival();
    cfg.n_sim = n_sim;
    cfg.dgm.base.set_factor("n_obs", 150.0).unwrap();
    cfg
}

fn digest_opts() -> RunOptions {
    RunOptions {
        keep_datasets: KeepDatasets::Digest,
        ..RunOptions::default()
    }
}

fn without(rows: &[EstimatesRecord], method: &str) -> Vec<EstimatesRecord> {
    rows.iter().filter(|r| r.method_id != method).cloned().collect()
}

#[test]
fn injected_failures_are_counted_exactly() {
    let cfg = small_survival(60);
    let clean = engine::run_study(&cfg, &RunOptions::default()).unwrap();
    let hook: engine::FaultHook = Arc::new(|dgm: &str, rep: u64, method: &str| match method {
        "weibull" if rep % 5 == 0 => Some(FitError::new(ErrorCode::Nonconvergence, "injected")),
        "cox" if rep % 7 == 1 && dgm == "gamma=1.5" => Some(FitError::new(ErrorCode::Numeric, "injected")),
        _ => None,
    });
    let opts = RunOptions {
        fault: Some(hook),
        ..RunOptions::default()
    };
    let faulty = engine::run_study(&cfg, &opts).unwrap();

    let report = perf::missingness_report(&faulty.estimates);
    let count = |dgm: &str, method: &str, code: ErrorCode| {
        report
            .iter()
            .find(|r| r.dgm_id == dgm && r.method_id == method)
            .and_then(|r| r.counts.iter().find(|c| c.0 == code))
            .map_or(0, |c| c.1)
    };
    for dgm in ["gamma=1", "gamma=1.5"] {
        assert_eq!(count(dgm, "weibull", ErrorCode::Nonconvergence), 12);
        assert_eq!(count(dgm, "exponential", ErrorCode::None), 60);
    }
    assert_eq!(count("gamma=1.5", "cox", ErrorCode::Numeric), 9);
    assert_eq!(count("gamma=1", "cox", ErrorCode::Numeric), 0);

    // Failures never shift the random stream.
    let keep = |rows: &[EstimatesRecord]| -> Vec<EstimatesRecord> {
        rows.iter().filter(|r| r.error_code == ErrorCode::None).cloned().collect()
    };
    let faulted: Vec<EstimatesRecord> = keep(&faulty.estimates);
    let matching: Vec<EstimatesRecord> = clean
        .estimates
        .iter()
        .filter(|r| {
            faulted
                .iter()
                .any(|f| f.dgm_id == r.dgm_id && f.repetition == r.repetition && f.method_id == r.method_id)
        })
        .cloned()
        .collect();
    assert_eq!(faulted, matching);
    assert_eq!(faulty.states, clean.states);
}

#[test]
fn rerun_reproduces_every_dataset_digest() {
    let cfg = small_survival(25);
    let out = engine::run_study(&cfg, &digest_opts()).unwrap();
    assert_eq!(out.datasets.len(), 50);
    for d in &out.datasets {
        let (data, rows) =
            engine::rerun_repetition(&cfg, &out.states, &d.dgm_id, d.repetition, &RunOptions::default()).unwrap();
        assert_eq!(engine::dataset_digest(&data), d.digest);
        let stored: Vec<&EstimatesRecord> = out
            .estimates
            .iter()
            .filter(|r| r.dgm_id == d.dgm_id && r.repetition == d.repetition)
            .collect();
        assert_eq!(rows.iter().collect::<Vec<_>>(), stored);
    }
}

#[test]
fn continuation_equals_longer_run() {
    let long = engine::run_study(&small_survival(40), &digest_opts()).unwrap();
    let first = engine::run_study(&small_survival(28), &digest_opts()).unwrap();
    let more = engine::continue_study(&small_survival(28), &first.states, 12, &digest_opts()).unwrap();
    let order = |r: &EstimatesRecord| (r.dgm_id.clone(), r.repetition);
    let mut joined = first.estimates.clone();
    joined.extend(more.estimates);
    joined.sort_by_key(order);
    let mut expected = long.estimates.clone();
    expected.sort_by_key(order);
    assert_eq!(joined, expected);

    let mut digests: Vec<_> = first.datasets.iter().chain(&more.datasets).map(|d| d.digest.clone()).collect();
    let mut want: Vec<_> = long.datasets.iter().map(|d| d.digest.clone()).collect();
    digests.sort();
    want.sort();
    assert_eq!(digests, want);
}

#[test]
fn continue_by_zero_leaves_directory_untouched() {
    let tmp = tempfile::tempdir().unwrap();
    store::run_to_dir(tmp.path(), &small_survival(10), &RunOptions::default()).unwrap();
    let snapshot = |dir: &std::path::Path| -> BTreeMap<String, Vec<u8>> {
        fs::read_dir(dir)
            .unwrap()
            .map(|e| e.unwrap().path())
            .filter(|p| p.is_file())
            .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
            .collect()
    };
    let before = snapshot(tmp.path());
    let summary = StoredRun::load(tmp.path())
        .unwrap()
        .continue_in_place(0, &RunOptions::default())
        .unwrap();
    assert!(summary.is_none());
    assert_eq!(snapshot(tmp.path()), before);
}

#[test]
fn tolerance_change_touches_only_that_method() {
    let base = small_survival(20);
    let mut loose = base.clone();
    loose.methods.iter_mut().find(|m| m.id == "cox").unwrap().tolerance = Some(1e-2);
    let a = engine::run_study(&base, &RunOptions::default()).unwrap();
    let b = engine::run_study(&loose, &RunOptions::default()).unwrap();
    assert_eq!(without(&a.estimates, "cox"), without(&b.estimates, "cox"));
    assert_eq!(a.states, b.states);
}

#[test]
fn repetitions_do_not_depend_on_n_sim() {
    let short = engine::run_study(&small_survival(5), &RunOptions::default()).unwrap();
    let long = engine::run_study(&small_survival(30), &RunOptions::default()).unwrap();
    let head: Vec<EstimatesRecord> = long.estimates.iter().filter(|r| r.repetition <= 5).cloned().collect();
    assert_eq!(short.estimates, head);
}

#[test]
fn every_method_sees_the_same_dataset() {
    let cfg = small_survival(6);
    let out = engine::run_study(&cfg, &RunOptions::default()).unwrap();
    for rep in 1..=6 {
        let (data, _) = engine::rerun_repetition(&cfg, &out.states, "gamma=1.5", rep, &RunOptions::default()).unwrap();
        let Dataset::Survival(data) = data else { panic!("survival data expected") };
        for id in ["exponential", "weibull", "cox"] {
            let settings = cfg.method(id).unwrap().settings(&cfg.targets);
            let fit = match id {
                "exponential" => fit_exponential_ph(&data, &settings),
                "weibull" => fit_weibull_ph(&data, &settings),
                _ => fit_cox_ph(&data, &settings),
            };
            let direct = EstimatesRecord::from_fit("gamma=1.5", rep, id, "theta", &fit);
            let stored = out
                .estimates
                .iter()
                .find(|r| r.dgm_id == "gamma=1.5" && r.repetition == rep && r.method_id == id)
                .unwrap();
            assert_eq!(&direct, stored);
        }
    }
}

#[test]
fn large_sample_truth_estimate() {
    let cfg = presets::survival();
    let stream = engine::truth_stream_id(&cfg, 2, 0, 0);
    let v = engine::estimate_true_theta(&cfg, "gamma=1", 1_000_000, stream, Some("exponential")).unwrap();
    // SE at 10^6 subjects with ~30% events is about 0.0047.
    assert!((v + 0.5).abs() < 3.0 * 0.0047, "{v}");
    assert!(matches!(
        engine::estimate_true_theta(&cfg, "gamma=1", 0, stream, None),
        Err(Error::InvalidParameter(_))
    ));
}

#[test]
fn thread_count_does_not_change_results() {
    let mut cfg = small_survival(24);
    cfg.streams = "per_chunk:4".parse().unwrap();
    let run = |threads| {
        let opts = RunOptions {
            threads: Some(threads),
            keep_datasets: KeepDatasets::Digest,
            ..RunOptions::default()
        };
        engine::run_study(&cfg, &opts).unwrap()
    };
    let (one, three) = (run(1), run(3));
    assert_eq!(one.estimates, three.estimates);
    assert_eq!(one.states, three.states);
    assert_eq!(one.datasets, three.datasets);
}
