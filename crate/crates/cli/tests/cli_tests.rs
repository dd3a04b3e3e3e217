//! Integration tests for the command-line crate: configuration parsing
//! and validation, the optimization runner's bookkeeping and artifact
//! determinism, failure reporting, trace summarizing, posterior
//! diagnosis, and the inference timing harness.

use std::process::Command;

use mmdbo_cli::bench::{
    batch_under_budget, bench_csv, bench_inference, bench_one, query_bytes, reference_entries,
    BenchEntry, BenchRow, BenchSettings,
};
use mmdbo_cli::config::{build_model, AcquisitionSettings, EstimatorSettings, PrecomputeSettings};
use mmdbo_cli::diagnose::{diagnose_posterior, diagnosis_csv, DiagnosisRow, DESIGN_POINTS};
use mmdbo_cli::runner::{csv_escape, errors_path, write_file};
use mmdbo_cli::summary::{quantile_sorted, summarize, summary_csv};
use mmdbo_cli::{execute, prepare_problem, Algorithm, ExperimentConfig};
use mmdbo_core::udist::{Family, InputDistribution};
use tempfile::tempdir;

fn minimal_json(tail: &str) -> String {
    format!(
        r#"{{"problem":"rkhs_1d","algorithm":"gp_ucb","budget":5,"init_points":4,"base_seed":7,"output":"/tmp/trace.csv"{tail}}}"#
    )
}

fn small_cfg(tmp_path: &std::path::Path) -> ExperimentConfig {
    ExperimentConfig {
        problem: "rkhs_1d".into(),
        input_law: None,
        observation_noise_sd: None,
        algorithm: "gp_ucb".into(),
        estimator: EstimatorSettings::default(),
        acquisition: AcquisitionSettings::default(),
        budget: 1,
        init_points: 4,
        repeats: 1,
        base_seed: 11,
        n_mc_regret: 1000,
        output: tmp_path.join("trace.csv"),
        record_timing: false,
        precompute: PrecomputeSettings {
            grid_density: 101,
            n_mc: 2000,
            seed: 2024,
        },
    }
}

fn chi2_law() -> InputDistribution {
    InputDistribution::new(
        Family::Chi2Step {
            dof_low: 0.5,
            dof_high: 7.0,
            threshold: 0.6,
            scale: 0.05,
        },
        1,
    )
    .unwrap()
}

// ---------------------------------------------------------------- config

#[test]
fn config_parses_minimal_json_with_defaults() {
    let cfg = ExperimentConfig::from_json_str(&minimal_json("")).unwrap();
    assert_eq!(cfg.estimator.m, 64);
    assert_eq!(cfg.estimator.h, None);
    assert_eq!(cfg.acquisition.beta, 2.0);
    assert_eq!(cfg.acquisition.restarts, 4);
    assert_eq!(cfg.acquisition.prescan_grid, 64);
    assert_eq!(cfg.acquisition.max_local_steps, 30);
    assert_eq!(cfg.repeats, 1);
    assert_eq!(cfg.n_mc_regret, 2000);
    assert!(!cfg.record_timing);
    assert_eq!(cfg.precompute.grid_density, 801);
    assert_eq!(cfg.precompute.n_mc, 20_000);
    assert_eq!(cfg.precompute.seed, 2024);
    assert_eq!(cfg.algorithm().unwrap(), Algorithm::GpUcb);
}

#[test]
fn config_rejects_unknown_keys_at_every_level() {
    let cases = [
        minimal_json(r#","budgett":3"#),
        minimal_json(r#","estimator":{"mm":8}"#),
        minimal_json(r#","acquisition":{"betta":1.0}"#),
        minimal_json(r#","precompute":{"grid":5}"#),
    ];
    for text in cases {
        let err = ExperimentConfig::from_json_str(&text).unwrap_err();
        assert!(
            err.to_string().contains("unknown field"),
            "{text} -> {err}"
        );
    }
}

#[test]
fn config_rejects_invalid_values() {
    let cases: [(String, &str); 10] = [
        (
            minimal_json("").replace(r#""budget":5"#, r#""budget":0"#),
            "budget",
        ),
        (
            minimal_json("").replace(r#""init_points":4"#, r#""init_points":1"#),
            "init_points",
        ),
        (minimal_json(r#","repeats":0"#), "repeats"),
        (
            minimal_json("").replace("gp_ucb", "sgd"),
            "unknown algorithm",
        ),
        (
            minimal_json("").replace("rkhs_1d", "rosenbrock"),
            "rosenbrock",
        ),
        (
            minimal_json("").replace("gp_ucb", "mmdgp_nystrom"),
            "requires estimator.h",
        ),
        (
            minimal_json(r#","estimator":{"m":64,"h":10}"#),
            "only applies to mmdgp_nystrom",
        ),
        (minimal_json(r#","n_mc_regret":500"#), "n_mc_regret"),
        (minimal_json(r#","estimator":{"m":1}"#), "estimator.m"),
        (
            minimal_json(r#","observation_noise_sd":-0.5"#),
            "observation_noise_sd",
        ),
    ];
    for (text, needle) in cases {
        let err = ExperimentConfig::from_json_str(&text).unwrap_err();
        assert!(
            err.to_string().contains(needle),
            "expected {needle:?} in error for {text}: {err}"
        );
    }
}

#[test]
fn config_accepts_input_law_round_trip() {
    let law = chi2_law();
    let law_json = serde_json::to_string(&law).unwrap();
    let text = minimal_json(&format!(r#","input_law":{law_json}"#));
    let cfg = ExperimentConfig::from_json_str(&text).unwrap();
    assert_eq!(cfg.input_law, Some(law));

    let round = serde_json::to_string(&cfg).unwrap();
    let reparsed = ExperimentConfig::from_json_str(&round).unwrap();
    assert_eq!(reparsed, cfg);
}

#[test]
fn algorithm_ids_round_trip() {
    for algo in Algorithm::ALL {
        assert_eq!(Algorithm::parse(algo.id()).unwrap(), algo);
    }
    let err = Algorithm::parse("newton").unwrap_err().to_string();
    for algo in Algorithm::ALL {
        assert!(err.contains(algo.id()), "{err} lacks {}", algo.id());
    }
}

#[test]
fn build_model_maps_every_algorithm() {
    let law = InputDistribution::gaussian_iso(0.05, 1).unwrap();
    for algo in Algorithm::ALL {
        let est = EstimatorSettings {
            m: 8,
            h: (algo == Algorithm::MmdgpNystrom).then_some(4),
        };
        let model = build_model(algo, est, law.clone(), 1.0, 3).unwrap();
        let expected = match algo {
            Algorithm::MmdgpEmpirical | Algorithm::MmdgpNystrom => "mmdgp",
            Algorithm::GpUcb => "vanilla_gp",
            Algorithm::SklUcb => "skl",
            Algorithm::ErbfUcb => "erbf",
            Algorithm::UgpUcb => "ugp",
        };
        assert_eq!(model.kind().name(), expected);
    }
}

// ---------------------------------------------------------------- runner

#[test]
fn prepare_problem_precomputes_after_law_override() {
    let tmp = tempdir().unwrap();
    let mut cfg = small_cfg(tmp.path());
    cfg.input_law = Some(InputDistribution::dirac(1).unwrap());
    let problem = prepare_problem(&cfg).unwrap();
    let robust = problem.robust_optimum().expect("precomputed optimum");
    assert_eq!(robust.provenance.grid_density, cfg.precompute.grid_density);
    assert_eq!(robust.provenance.n_mc, cfg.precompute.n_mc);
    assert_eq!(robust.provenance.seed, cfg.precompute.seed);
    assert!(robust.basins.is_empty(), "override must drop stale basins");
}

#[test]
fn budget_one_run_bookkeeping() {
    let tmp = tempdir().unwrap();
    let mut cfg = small_cfg(tmp.path());
    cfg.input_law = Some(InputDistribution::dirac(1).unwrap());
    cfg.observation_noise_sd = Some(0.0);

    let report = execute(&cfg).unwrap();
    assert!(report.all_complete());
    assert_eq!(report.outcomes.len(), 1);
    let outcome = &report.outcomes[0];
    assert_eq!(outcome.n_observations, cfg.init_points + cfg.budget);
    let records = outcome.trace.records();
    assert_eq!(records.len(), 1);
    assert_eq!(records[0].iter, 0);
    assert!((0.0..=1.0).contains(&records[0].x_query[0]));
    assert!(records[0].robust_regret >= -1e-6);
    assert_eq!(outcome.trace.run_id, "gp_ucb-r0");

    let text = std::fs::read_to_string(&cfg.output).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[0], "run_id,algo,problem,seed,iter,x0,y,xout0,regret");
    assert!(lines[1].starts_with("gp_ucb-r0,gp_ucb,rkhs_1d,11,0,"));
    assert!(!errors_path(&cfg.output).exists());
}

#[test]
fn reruns_reproduce_the_artifact_byte_for_byte() {
    let tmp = tempdir().unwrap();
    let mut cfg = small_cfg(tmp.path());
    cfg.algorithm = "mmdgp_empirical".into();
    cfg.estimator.m = 8;
    cfg.budget = 2;
    cfg.repeats = 2;

    cfg.output = tmp.path().join("first.csv");
    execute(&cfg).unwrap();
    let first = std::fs::read(&cfg.output).unwrap();

    cfg.output = tmp.path().join("second.csv");
    execute(&cfg).unwrap();
    let second = std::fs::read(&cfg.output).unwrap();

    assert_eq!(first, second);
    let text = String::from_utf8(first).unwrap();
    assert_eq!(text.lines().count(), 1 + cfg.repeats * cfg.budget);
    assert!(text.lines().nth(1).unwrap().starts_with("mmdgp_empirical-r0"));
    assert!(text.lines().nth(3).unwrap().starts_with("mmdgp_empirical-r1"));
}

#[test]
fn timing_columns_appear_only_on_request() {
    let tmp = tempdir().unwrap();
    let mut cfg = small_cfg(tmp.path());
    cfg.record_timing = true;
    cfg.input_law = Some(InputDistribution::dirac(1).unwrap());
    execute(&cfg).unwrap();
    let text = std::fs::read_to_string(&cfg.output).unwrap();
    assert_eq!(
        text.lines().next().unwrap(),
        "run_id,algo,problem,seed,iter,x0,y,xout0,regret,inference_ms,acquisition_ms"
    );
}

#[test]
fn failed_repeats_land_in_the_error_csv() {
    let tmp = tempdir().unwrap();
    let mut cfg = small_cfg(tmp.path());
    cfg.algorithm = "mmdgp_nystrom".into();
    cfg.estimator = EstimatorSettings {
        m: 8,
        h: Some(16),
    };
    cfg.repeats = 2;

    let report = execute(&cfg).unwrap();
    assert!(!report.all_complete());
    assert!(report.outcomes.is_empty());
    assert_eq!(report.failures.len(), 2);
    for (i, failure) in report.failures.iter().enumerate() {
        assert_eq!(failure.repeat, i);
        assert_eq!(failure.seed, cfg.base_seed + i as u64);
        assert_eq!(failure.stage, "prepare");
        assert!(!failure.message.is_empty());
    }

    let trace = std::fs::read_to_string(&cfg.output).unwrap();
    assert_eq!(trace.lines().count(), 1, "header-only trace expected");

    let errors = std::fs::read_to_string(errors_path(&cfg.output)).unwrap();
    let lines: Vec<&str> = errors.lines().collect();
    assert_eq!(lines[0], "repeat,seed,stage,error");
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("0,11,prepare,"));
    assert!(lines[2].starts_with("1,12,prepare,"));
}

#[test]
fn error_csv_is_removed_after_a_clean_rerun() {
    let tmp = tempdir().unwrap();
    let mut cfg = small_cfg(tmp.path());
    cfg.input_law = Some(InputDistribution::dirac(1).unwrap());
    let stale = errors_path(&cfg.output);
    write_file(&stale, "repeat,seed,stage,error\n9,9,init,stale\n").unwrap();
    execute(&cfg).unwrap();
    assert!(!stale.exists());
}

#[test]
fn csv_escape_quotes_only_when_needed() {
    assert_eq!(csv_escape("plain"), "plain");
    assert_eq!(csv_escape("a,b"), "\"a,b\"");
    assert_eq!(csv_escape("say \"hi\""), "\"say \"\"hi\"\"\"");
    assert_eq!(csv_escape("two\nlines"), "\"two\nlines\"");
}

#[test]
fn run_verb_exit_codes_follow_completion() {
    let tmp = tempdir().unwrap();
    let mut cfg = small_cfg(tmp.path());
    cfg.input_law = Some(InputDistribution::dirac(1).unwrap());
    let good = tmp.path().join("good.json");
    write_file(&good, &serde_json::to_string(&cfg).unwrap()).unwrap();
    let status = Command::new(env!("CARGO_BIN_EXE_mmdbo"))
        .args(["run", good.to_str().unwrap()])
        .status()
        .unwrap();
    assert!(status.success());
    assert!(cfg.output.exists());

    cfg.algorithm = "mmdgp_nystrom".into();
    cfg.estimator = EstimatorSettings {
        m: 8,
        h: Some(16),
    };
    cfg.output = tmp.path().join("bad-trace.csv");
    let bad = tmp.path().join("bad.json");
    write_file(&bad, &serde_json::to_string(&cfg).unwrap()).unwrap();
    let status = Command::new(env!("CARGO_BIN_EXE_mmdbo"))
        .args(["run", bad.to_str().unwrap()])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(1));
    assert!(errors_path(&cfg.output).exists());
}

// --------------------------------------------------------------- summary

fn write_trace(path: &std::path::Path, algo: &str, regrets: &[(usize, f64)]) {
    let mut text = String::from("run_id,algo,problem,seed,iter,x0,y,xout0,regret\n");
    for (iter, regret) in regrets {
        text.push_str(&format!("{algo}-r0,{algo},rkhs_1d,1,{iter},0.5,1.0,0.5,{regret}\n"));
    }
    write_file(path, &text).unwrap();
}

#[test]
fn summarize_single_trace_reproduces_the_values() {
    let tmp = tempdir().unwrap();
    let path = tmp.path().join("a.csv");
    write_trace(&path, "gp_ucb", &[(0, 3.0), (1, 2.0), (2, 0.5)]);
    let rows = summarize(&[&path]).unwrap();
    assert_eq!(rows.len(), 3);
    for (row, (iter, regret)) in rows.iter().zip([(0usize, 3.0), (1, 2.0), (2, 0.5)]) {
        assert_eq!(row.problem, "rkhs_1d");
        assert_eq!(row.algo, "gp_ucb");
        assert_eq!(row.iter, iter);
        assert_eq!(row.n, 1);
        assert_eq!(row.regret_mean, regret);
        assert_eq!(row.regret_sd, 0.0);
        assert_eq!(row.regret_median, regret);
        assert_eq!(row.regret_q1, regret);
        assert_eq!(row.regret_q3, regret);
    }
}

#[test]
fn summarize_two_repeats_with_offset_regrets() {
    let tmp = tempdir().unwrap();
    let a = tmp.path().join("a.csv");
    let b = tmp.path().join("b.csv");
    let (r, c) = (1.25, 0.5);
    write_trace(&a, "gp_ucb", &[(0, r), (1, r)]);
    write_trace(&b, "gp_ucb", &[(0, r + 2.0 * c), (1, r + 2.0 * c)]);
    let rows = summarize(&[&a, &b]).unwrap();
    assert_eq!(rows.len(), 2);
    for row in rows {
        assert_eq!(row.n, 2);
        assert!((row.regret_median - (r + c)).abs() < 1e-12);
        assert!((row.regret_mean - (r + c)).abs() < 1e-12);
        assert!((row.regret_sd - c * 2.0f64.sqrt()).abs() < 1e-12);
        assert!((row.regret_q1 - (r + 0.5 * c)).abs() < 1e-12);
        assert!((row.regret_q3 - (r + 1.5 * c)).abs() < 1e-12);
    }
}

#[test]
fn summarize_orders_cells_and_mixes_timing_schemas() {
    let tmp = tempdir().unwrap();
    let plain = tmp.path().join("plain.csv");
    write_trace(&plain, "skl_ucb", &[(0, 1.0), (1, 0.5)]);
    let timed = tmp.path().join("timed.csv");
    write_file(
        &timed,
        "run_id,algo,problem,seed,iter,x0,y,xout0,regret,inference_ms,acquisition_ms\n\
         gp_ucb-r0,gp_ucb,rkhs_1d,2,0,0.1,0.2,0.1,2.0,12.5,3.5\n\
         gp_ucb-r0,gp_ucb,rkhs_1d,2,1,0.1,0.2,0.1,1.5,11.0,3.0\n",
    )
    .unwrap();
    let rows = summarize(&[&plain, &timed]).unwrap();
    let keys: Vec<(String, usize)> = rows.iter().map(|r| (r.algo.clone(), r.iter)).collect();
    assert_eq!(
        keys,
        [
            ("gp_ucb".to_string(), 0),
            ("gp_ucb".to_string(), 1),
            ("skl_ucb".to_string(), 0),
            ("skl_ucb".to_string(), 1),
        ]
    );
    let text = summary_csv(&rows);
    assert!(text.starts_with(
        "problem,algo,iter,n,regret_mean,regret_sd,regret_median,regret_q1,regret_q3\n"
    ));
    assert_eq!(text.lines().count(), 5);
}

#[test]
fn summarize_rejects_mixed_problems_and_empty_input() {
    let tmp = tempdir().unwrap();
    let a = tmp.path().join("a.csv");
    write_trace(&a, "gp_ucb", &[(0, 1.0)]);
    let b = tmp.path().join("b.csv");
    write_file(
        &b,
        "run_id,algo,problem,seed,iter,x0,y,xout0,regret\nq-r0,gp_ucb,double_peak_1d,1,0,0.5,1.0,0.5,0.7\n",
    )
    .unwrap();
    let err = summarize(&[&a, &b]).unwrap_err();
    assert!(err.to_string().contains("mixed problems"));

    let none: [&std::path::Path; 0] = [];
    assert!(summarize(&none).is_err());
}

#[test]
fn quantiles_interpolate_linearly() {
    let vals = [1.0, 2.0, 3.0, 4.0];
    assert_eq!(quantile_sorted(&vals, 0.0), 1.0);
    assert_eq!(quantile_sorted(&vals, 0.5), 2.5);
    assert_eq!(quantile_sorted(&vals, 0.25), 1.75);
    assert_eq!(quantile_sorted(&vals, 1.0), 4.0);
    assert_eq!(quantile_sorted(&[5.0], 0.75), 5.0);
}

// -------------------------------------------------------------- diagnose

#[test]
fn diagnosis_gp_on_exact_data_interpolates_within_fitted_noise() {
    let tmp = tempdir().unwrap();
    let mut cfg = small_cfg(tmp.path());
    cfg.input_law = Some(InputDistribution::dirac(1).unwrap());
    cfg.observation_noise_sd = Some(0.0);
    cfg.base_seed = 1;

    let diag = diagnose_posterior(&cfg, &[Algorithm::GpUcb], 1001).unwrap();
    assert_eq!(diag.design.len(), DESIGN_POINTS);
    assert_eq!(diag.observations.len(), DESIGN_POINTS);
    assert_eq!(diag.fitted_noise.len(), 1);
    assert_eq!(diag.rows.len(), 1001);

    let noise_sd = diag.fitted_noise[0].sqrt();
    assert!(noise_sd > 0.0);
    for (x, y) in diag.design.iter().zip(&diag.observations) {
        let nearest = diag
            .rows
            .iter()
            .min_by(|a, b| (a.x - x).abs().total_cmp(&(b.x - x).abs()))
            .unwrap();
        assert!((nearest.x - x).abs() <= 5.1e-4);
        assert!(
            (nearest.mean - y).abs() <= 3.0 * noise_sd,
            "residual {} at x={x} exceeds 3 fitted-noise sd ({noise_sd})",
            (nearest.mean - y).abs()
        );
    }
}

fn field_jump(rows: &[(f64, f64)], threshold: f64) -> (f64, f64) {
    let below = rows
        .iter()
        .filter(|(x, _)| *x < threshold)
        .max_by(|a, b| a.0.total_cmp(&b.0))
        .unwrap();
    let above = rows
        .iter()
        .filter(|(x, _)| *x >= threshold)
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .unwrap();
    let jump = (above.1 - below.1).abs();
    let mut diffs: Vec<f64> = rows
        .windows(2)
        .filter(|w| {
            w[0].0 >= 0.45 && w[1].0 <= 0.75 && !(w[0].0 < threshold && w[1].0 >= threshold)
        })
        .map(|w| (w[1].1 - w[0].1).abs())
        .collect();
    diffs.sort_by(|a, b| a.total_cmp(b));
    (jump, diffs[diffs.len() / 2])
}

fn model_field(rows: &[DiagnosisRow], model: &str, var: bool) -> Vec<(f64, f64)> {
    rows.iter()
        .filter(|r| r.model == model)
        .map(|r| (r.x, if var { r.var } else { r.mean }))
        .collect()
}

#[test]
fn diagnosis_contrasts_surrogates_across_a_shape_break() {
    let tmp = tempdir().unwrap();
    let mut cfg = small_cfg(tmp.path());
    cfg.input_law = Some(chi2_law());
    cfg.base_seed = 2;

    let diag =
        diagnose_posterior(&cfg, &[Algorithm::SklUcb, Algorithm::MmdgpEmpirical], 201).unwrap();

    let (skl_var_jump, skl_var_noise) = field_jump(&model_field(&diag.rows, "skl_ucb", true), 0.6);
    let (skl_mean_jump, skl_mean_noise) =
        field_jump(&model_field(&diag.rows, "skl_ucb", false), 0.6);
    let (mmd_var_jump, mmd_var_noise) =
        field_jump(&model_field(&diag.rows, "mmdgp_empirical", true), 0.6);
    let (mmd_mean_jump, mmd_mean_noise) =
        field_jump(&model_field(&diag.rows, "mmdgp_empirical", false), 0.6);

    let skl_var_ratio = skl_var_jump / skl_var_noise;
    let skl_mean_ratio = skl_mean_jump / skl_mean_noise;
    let mmd_var_ratio = mmd_var_jump / mmd_var_noise;
    let mmd_mean_ratio = mmd_mean_jump / mmd_mean_noise;

    assert!(
        skl_var_ratio <= 3.0,
        "moment-matched posterior variance should cross 0.6 smoothly, ratio {skl_var_ratio}"
    );
    assert!(
        skl_mean_ratio <= 3.0,
        "moment-matched posterior mean should cross 0.6 smoothly, ratio {skl_mean_ratio}"
    );
    assert!(
        mmd_mean_ratio >= 5.0,
        "sample-based kernel should see the shape break, ratio {mmd_mean_ratio}"
    );
    assert!(
        mmd_mean_ratio > 3.0 * skl_mean_ratio,
        "contrast too weak: {mmd_mean_ratio} vs {skl_mean_ratio}"
    );
    assert!(
        mmd_var_ratio > skl_var_ratio,
        "variance contrast too weak: {mmd_var_ratio} vs {skl_var_ratio}"
    );
}

#[test]
fn diagnosis_rejects_bad_requests() {
    let tmp = tempdir().unwrap();
    let mut cfg = small_cfg(tmp.path());
    assert!(diagnose_posterior(&cfg, &[], 201).is_err());
    assert!(diagnose_posterior(&cfg, &[Algorithm::GpUcb], 1).is_err());
    cfg.problem = "bumped_bowl_10d".into();
    let err = diagnose_posterior(&cfg, &[Algorithm::GpUcb], 201).unwrap_err();
    assert!(err.to_string().contains("one-dimensional"));
}

#[test]
fn diagnosis_csv_layout() {
    let rows = vec![
        DiagnosisRow {
            model: "gp_ucb",
            x: 0.0,
            mean: 1.5,
            var: 0.25,
        },
        DiagnosisRow {
            model: "gp_ucb",
            x: 0.5,
            mean: -0.5,
            var: 0.5,
        },
    ];
    let text = diagnosis_csv(&rows);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "model,x,mean,var");
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("gp_ucb,0,1.5,0.25"));
}

// ----------------------------------------------------------------- bench

#[test]
fn reference_timing_entries_cover_both_estimators() {
    let entries = reference_entries();
    assert_eq!(entries.len(), 5);
    assert_eq!(
        entries,
        vec![
            BenchEntry { m: 20, h: None },
            BenchEntry { m: 100, h: None },
            BenchEntry { m: 1000, h: None },
            BenchEntry {
                m: 100,
                h: Some(10)
            },
            BenchEntry {
                m: 1000,
                h: Some(100)
            },
        ]
    );
}

#[test]
fn matching_landmark_count_costs_at_least_the_empirical_estimator() {
    let settings = BenchSettings {
        n_train: 1,
        n_test: 8,
        reps: 2,
        warmup: 1,
        ..BenchSettings::default()
    };
    let empirical = bench_one(&BenchEntry { m: 400, h: None }, &settings).unwrap();
    let landmark = bench_one(
        &BenchEntry {
            m: 400,
            h: Some(400),
        },
        &settings,
    )
    .unwrap();
    assert!(empirical.seconds_mean > 0.0);
    assert!(
        landmark.seconds_mean >= empirical.seconds_mean,
        "full landmark set adds factorization work: {} vs {}",
        landmark.seconds_mean,
        empirical.seconds_mean
    );
}

#[test]
fn memory_budget_caps_the_query_batch() {
    let entry = BenchEntry {
        m: 100,
        h: None,
    };
    let settings = BenchSettings::default();
    assert_eq!(batch_under_budget(&entry, &settings, 1), 512);

    let bytes = query_bytes(&entry, settings.n_train, 1);
    assert_eq!(bytes, 8 * (100 + 100 * 100 + 8));

    let squeezed = BenchSettings {
        memory_budget_bytes: 4 * bytes,
        ..BenchSettings::default()
    };
    assert_eq!(batch_under_budget(&entry, &squeezed, 1), 4);
}

#[test]
fn over_budget_rows_are_reported_not_fatal() {
    let settings = BenchSettings {
        memory_budget_bytes: 1024,
        reps: 1,
        warmup: 0,
        ..BenchSettings::default()
    };
    let row = bench_one(
        &BenchEntry {
            m: 1000,
            h: Some(100),
        },
        &settings,
    )
    .unwrap();
    assert_eq!(row.batch, 0);
    assert!(row.seconds_mean.is_nan());
    assert!(row.seconds_sd.is_nan());
}

#[test]
fn bench_requires_both_estimator_families() {
    let settings = BenchSettings {
        n_test: 4,
        reps: 1,
        ..BenchSettings::default()
    };
    let only_empirical = [BenchEntry { m: 8, h: None }];
    assert!(bench_inference(&only_empirical, &settings).is_err());
    let only_landmark = [BenchEntry { m: 8, h: Some(4) }];
    assert!(bench_inference(&only_landmark, &settings).is_err());
}

#[test]
fn bench_csv_prints_zero_landmarks_for_empirical_rows() {
    let rows = vec![
        BenchRow {
            method: "empirical".into(),
            m: 20,
            h: 0,
            seconds_mean: 0.5,
            seconds_sd: 0.01,
            batch: 512,
        },
        BenchRow {
            method: "nystrom".into(),
            m: 100,
            h: 10,
            seconds_mean: 0.25,
            seconds_sd: 0.005,
            batch: 512,
        },
    ];
    let text = bench_csv(&rows);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "method,m,h,seconds_mean,seconds_sd,batch");
    assert_eq!(lines[1], "empirical,20,0,0.5,0.01,512");
    assert_eq!(lines[2], "nystrom,100,10,0.25,0.005,512");
}
