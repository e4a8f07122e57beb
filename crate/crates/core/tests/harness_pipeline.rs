mod common;

use common::brute_threshold_points;
use nuindex_core::datagen::{main_scenario, confounding_scenario, Correlation, Signal, ZxAssociation};
use nuindex_core::harness::format::sig6;
use nuindex_core::harness::*;
use nuindex_core::metrics::cv_threshold_curve;
use nuindex_core::pipeline::{fit_index, resolve_weights, PipelineConfig, Weighting};
use nuindex_core::{CvOptions, Error};

fn small_cv() -> CvOptions {
    CvOptions { n_lambda: 15, folds: 5, ..CvOptions::default() }
}

fn small_study(workers: usize) -> StudyConfig {
    StudyConfig {
        scenarios: vec!["medium_group_sparse".into(), "confound_overlap_negative".into()],
        replicates: 3,
        n: Some(800),
        master_seed: 77,
        workers,
        cv: small_cv(),
        ..StudyConfig::default()
    }
}

fn study_files(config: &StudyConfig) -> Vec<(String, Vec<u8>)> {
    let dir = tempfile::tempdir().unwrap();
    let result = run_study(config).unwrap();
    let mut out: Vec<(String, Vec<u8>)> = write_study(&result, dir.path())
        .unwrap()
        .into_iter()
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()))
        .collect();
    out.sort();
    out
}

#[test]
fn study_output_does_not_depend_on_worker_count() {
    let one = study_files(&small_study(1));
    assert_eq!(one.len(), 4);
    assert_eq!(one, study_files(&small_study(3)));
    assert_eq!(one, study_files(&small_study(1)));
}

#[test]
fn records_are_sorted_and_complete() {
    let result = run_study(&small_study(2)).unwrap();
    // One arm for the unconfounded scenario, two for the confounded one.
    assert_eq!(result.records.len(), 3 + 2 * 3);
    let keys: Vec<(String, Arm, usize)> = result.records.iter().map(|r| (r.scenario.clone(), r.arm, r.replicate)).collect();
    assert_eq!(keys[0], ("medium_group_sparse".into(), Arm::Unadjusted, 0));
    assert_eq!(keys[3].0, "confound_overlap_negative");
    let mut confounded: Vec<_> = keys[3..].to_vec();
    let before = confounded.clone();
    confounded.sort();
    assert_eq!(before, confounded);
}

fn quantile7(v: &[f64], p: f64) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let h = (s.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    s[lo] + (h - lo as f64) * (s[hi] - s[lo])
}

fn mean_sd(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, var.sqrt())
}

#[test]
fn summaries_agree_with_records() {
    let result = run_study(&small_study(1)).unwrap();
    let table = emit_table(&result, TableStyle::Main);
    let mut lines = table.lines();
    lines.next();
    for (line, summary) in lines.zip(&result.summaries) {
        let fields: Vec<&str> = line.split(',').collect();
        let ok: Vec<_> = result
            .records_for(&summary.scenario, summary.arm)
            .filter_map(|r| r.outcome.as_ref().ok())
            .collect();
        let sel: Vec<f64> = ok.iter().map(|m| m.selection.n_selected as f64).collect();
        let tpr: Vec<f64> = ok.iter().filter_map(|m| m.selection.tpr).collect();
        let tnr: Vec<f64> = ok.iter().filter_map(|m| m.selection.tnr).collect();
        let tau: Vec<f64> = ok.iter().filter_map(|m| m.selection.kendall_tau).collect();
        let (tpr_m, tpr_s) = mean_sd(&tpr);
        let (tnr_m, tnr_s) = mean_sd(&tnr);
        let (tau_m, tau_s) = if tau.is_empty() { (f64::NAN, f64::NAN) } else { mean_sd(&tau) };
        let expected = [
            quantile7(&sel, 0.5),
            quantile7(&sel, 0.25),
            quantile7(&sel, 0.75),
            tpr_m,
            tpr_s,
            tnr_m,
            tnr_s,
            tau_m,
            tau_s,
        ];
        assert_eq!(fields[0], summary.scenario);
        for (got, want) in fields[2..].iter().zip(expected) {
            assert_eq!(*got, sig6(want), "{line}");
        }
    }
}

#[test]
fn failing_replicates_are_isolated() {
    let mut spec = main_scenario(Signal::High, Correlation::Uncorrelated);
    spec.name = "tiny".into();
    spec.n = 60;
    let config = StudyConfig {
        inline: vec![spec.clone()],
        replicates: 12,
        master_seed: 5,
        workers: 2,
        cv: CvOptions { n_lambda: 8, folds: 10, ..CvOptions::default() },
        ..StudyConfig::default()
    };
    let result = run_study(&config).unwrap();
    assert_eq!(result.records.len(), 12);
    let failed = result.records.iter().filter(|r| r.outcome.is_err()).count();
    assert!(failed > 0 && failed < 12, "{failed} of 12 failed");
    for r in &result.records {
        let direct = replicate_cohort(&spec, 5, r.replicate)
            .and_then(|c| evaluate_arm(&spec, &c, Arm::Unadjusted, &config.cv));
        match (&r.outcome, direct) {
            (Ok(m), Ok(d)) => assert_eq!(*m, d),
            (Err(e), Err(d)) => assert_eq!(*e, d.to_string()),
            _ => panic!("replicate {} differs from a direct evaluation", r.replicate),
        }
    }
    let records = emit_records(&result.records);
    assert_eq!(records.lines().filter(|l| l.contains(",failed,")).count(), failed);
    assert_eq!(result.summaries[0].failed, failed);
}

#[test]
fn cells_without_successes_fail_the_study() {
    let mut spec = main_scenario(Signal::High, Correlation::Uncorrelated);
    spec.name = "too_small".into();
    spec.n = 12;
    let config = StudyConfig { inline: vec![spec], replicates: 2, ..StudyConfig::default() };
    assert!(matches!(run_study(&config), Err(Error::CellFailed { .. })));
}

#[test]
fn forced_weighting_needs_strata() {
    let mut spec = main_scenario(Signal::Medium, Correlation::Uncorrelated);
    spec.n = 300;
    let cohort = replicate_cohort(&spec, 1, 0).unwrap();
    assert!(matches!(resolve_weights(&cohort, Weighting::On), Err(Error::Config(_))));
    let (_, weighted) = resolve_weights(&cohort, Weighting::Auto).unwrap();
    assert!(!weighted);
    let mut spec = confounding_scenario(ZxAssociation::None, true);
    spec.n = 300;
    let cohort = replicate_cohort(&spec, 1, 0).unwrap();
    assert!(resolve_weights(&cohort, Weighting::Auto).unwrap().1);
    assert!(!resolve_weights(&cohort, Weighting::Off).unwrap().1);
}

#[test]
fn pipeline_artifacts_round_trip() {
    let mut spec = confounding_scenario(ZxAssociation::NonOverlapping, true);
    spec.n = 1500;
    let cohort = replicate_cohort(&spec, 9, 0).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("cohort.csv");
    cohort.write_csv(&input).unwrap();
    let config = PipelineConfig { cv: small_cv(), curve_folds: 4, ..PipelineConfig::default() };
    let artifacts = run_pipeline(&input, &config, dir.path()).unwrap();

    let fitted = fit_index(&cohort, &config).unwrap();
    assert!(fitted.weighted);
    let (names, model) = read_coefficients(&artifacts.coefficients).unwrap();
    assert_eq!(names, cohort.feature_names);
    assert_eq!(model.weights, fitted.model.weights);

    let scores = ScoreTable::read(&artifacts.scores).unwrap();
    assert_eq!(scores.ids, cohort.ids);
    assert_eq!(scores.index, nuindex_core::index::score(&fitted.model, &cohort.features).unwrap());
    assert_eq!(scores.symptom_count, nuindex_core::index::symptom_count(&cohort.features));
    assert_eq!(scores.latent.as_ref(), cohort.latent.as_ref());

    let manifest: toml::Table = std::fs::read_to_string(&artifacts.manifest).unwrap().parse().unwrap();
    assert_eq!(manifest["individuals"].as_integer(), Some(1500));
    assert!(manifest["decisions"].as_table().unwrap().contains_key("negative_weights"));
    assert_eq!(
        manifest["fit"]["n_selected"].as_integer(),
        Some(fitted.model.weights.len() as i64 - fitted.fit.as_ref().unwrap().final_coefficients.iter().filter(|c| **c == 0.0).count() as i64)
    );
}

#[test]
fn fully_penalized_curve_is_flat_and_count_curve_matches_counting() {
    let mut spec = main_scenario(Signal::High, Correlation::Uncorrelated);
    spec.n = 1000;
    let cohort = replicate_cohort(&spec, 4, 0).unwrap();
    // A penalty this large zeroes every coefficient, so every held-out index is 0.
    let config = PipelineConfig { fixed_lambda: Some(1e3), ..PipelineConfig::default() };
    let curves = cv_threshold_curve(&cohort, 5, &config).unwrap();
    assert!(curves.held_out.index.iter().all(|&s| s == 0));
    // an uninformative score traces the diagonal
    for (r, u) in curves.index.grid.iter().zip(&curves.index.average_uninfected) {
        assert!((r - u).abs() < 1e-12);
    }

    let count = nuindex_core::index::symptom_count(&cohort.features);
    for (f, curve) in curves.symptom_count.folds.iter().enumerate() {
        let rows: Vec<usize> = (0..cohort.len()).filter(|&i| curves.held_out.fold[i] == f).collect();
        let s: Vec<f64> = rows.iter().map(|&i| count[i] as f64).collect();
        let l: Vec<bool> = rows.iter().map(|&i| cohort.infected[i]).collect();
        let brute = brute_threshold_points(&s, &l);
        let inner = &curve.points[1..curve.points.len() - 1];
        assert_eq!(inner.len(), brute.len());
        for (p, (t, r1, r0)) in inner.iter().zip(brute) {
            assert_eq!((p.threshold, p.rate_infected, p.rate_uninfected), (t, r1, r0));
        }
    }
    for (k, &r) in curves.symptom_count.grid.iter().enumerate() {
        let avg = curves.symptom_count.folds.iter().map(|c| c.uninfected_rate_at(r)).sum::<f64>() / 5.0;
        assert!((avg - curves.symptom_count.average_uninfected[k]).abs() < 1e-12);
    }
}

#[test]
fn study_config_files() {
    let text = r#"
scenarios = ["low_uncorrelated"]
replicates = 4
n = 500
master_seed = 3
workers = 2
arms = "unadjusted"

[cv]
folds = 5
rule = "min"
"#;
    let config = StudyConfig::from_toml(text).unwrap();
    assert_eq!(config.replicates, 4);
    assert_eq!(config.cv.folds, 5);
    assert_eq!(StudyConfig::from_toml(&config.to_toml()).unwrap(), config);
    assert!(StudyConfig::from_toml("replicates = 3\nbogus = 1\nscenarios = [\"low_uncorrelated\"]").is_err());
    assert!(StudyConfig::from_toml("scenarios = [\"nope\"]").is_err());
    assert!(StudyConfig::from_toml("scenarios = [\"low_uncorrelated\"]\nreplicates = 0").is_err());
}

#[test]
fn out_dir_falls_back_to_environment() {
    // Only this test touches the variable.
    std::env::set_var(OUT_DIR_ENV, "/tmp/nuindex-env-check");
    assert_eq!(default_out_dir(), std::path::PathBuf::from("/tmp/nuindex-env-check"));
    std::env::remove_var(OUT_DIR_ENV);
    assert_eq!(default_out_dir(), std::path::PathBuf::from("nuindex-out"));
}
