//! Acceptance gate. Runs without the libtest harness so that every criterion
//! prints its `PASS`/`FAIL` line; the process fails if any criterion does.

mod common;

use std::fs;
use std::panic;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use common::props;
use fesl::ensemble::{eta_combine, EnsembleState};
use fesl::harness::metrics::{check_bounds, check_selection_expectation, theorem1_bound, theorem2_bound};
use fesl::harness::presets::step_scale_for;
use fesl::harness::{run_grid, run_methods, synthetic_stream, MethodKind, RunConfig, RunRecord};
use fesl::recovery::MapEstimator;
use fesl::streams::{GeneratedProfile, SYNTHETIC_PROFILES};
use fesl::types::FeatureVector;
use nalgebra::{DMatrix, DVector};
use proptest::test_runner::{Config, TestRunner};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

const SEEDS: u64 = 10;

fn verdict(id: u32, title: &str, pass: bool, detail: &str, elapsed: Duration, limit_s: f64) {
    let in_time = elapsed.as_secs_f64() < limit_s;
    let ok = pass && in_time;
    println!(
        "criterion {id} {} {title}: {detail} ({:.2} s, limit {limit_s} s)",
        if ok { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64()
    );
    assert!(pass, "criterion {id} failed: {detail}");
    assert!(in_time, "criterion {id} over its time limit: {:.2} s", elapsed.as_secs_f64());
}

/// Every method on every generated stream, one stream per seed, with the
/// per-dataset step-size preset.
fn desk_scale_runs(methods: &[MethodKind]) -> Vec<(&'static GeneratedProfile, Vec<Vec<RunRecord>>)> {
    SYNTHETIC_PROFILES
        .par_iter()
        .map(|p| {
            let per_seed = (0..SEEDS)
                .into_par_iter()
                .map(|seed| {
                    let stream = synthetic_stream(p, seed).unwrap();
                    let config = RunConfig {
                        step_scale: step_scale_for(p.name),
                        ..RunConfig::default().with_seed(seed)
                    };
                    run_methods(&stream, methods, &config).unwrap()
                })
                .collect();
            (p, per_seed)
        })
        .collect()
}

fn criterion_1_hedge_matches_closed_form() {
    let start = Instant::now();
    let t2 = 500;
    let eta = eta_combine(t2).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut state = EnsembleState::combine(t2, true).unwrap();
    let (mut c1, mut c2) = (0.0, 0.0);
    let mut worst: f64 = 0.0;
    for _ in 0..t2 {
        let (a, b): (f64, f64) = (rng.random(), rng.random());
        state.update_combine(a, b).unwrap();
        c1 += a;
        c2 += b;
        let want = common::hedge_weights(eta, c1, c2);
        let got = state.alpha();
        worst = worst.max((got[0] - want[0]).abs()).max((got[1] - want[1]).abs());
    }
    verdict(
        1,
        "exponential weights equal the closed form",
        worst <= 1e-10,
        &format!("max deviation {worst:.2e} over {t2} rounds (tolerance 1e-10)"),
        start.elapsed(),
        1.0,
    );
}

fn criterion_2_combination_bound_never_violated() {
    let start = Instant::now();
    let runs = desk_scale_runs(&[MethodKind::FeslC]);
    let mut total = 0;
    let mut violations = Vec::new();
    let mut tightest = f64::INFINITY;
    for (p, per_seed) in &runs {
        for rec in per_seed.iter().flatten() {
            let rep = check_bounds(rec).unwrap();
            total += 1;
            tightest = tightest.min(-rep.excess);
            if rep.pass != Some(true) {
                violations.push(format!("{} seed {}", p.name, rec.seed));
            }
        }
    }
    verdict(
        2,
        "FESL-c within min(L1, L2) + sqrt(t2 ln2 / 2)",
        violations.is_empty() && total == 90,
        &format!(
            "{} violations in {total} runs, smallest margin {tightest:.3} {:?}",
            violations.len(),
            violations
        ),
        start.elapsed(),
        30.0,
    );
}

fn criterion_3_selection_bound_in_expectation() {
    let start = Instant::now();
    let base = *GeneratedProfile::by_name("credit-g").unwrap();
    let profile = GeneratedProfile { n: 600, ..base };
    let stream = synthetic_stream(&profile, 0).unwrap();
    assert_eq!(stream.schedule.t2, 300);
    let seeds: Vec<u64> = (0..100).collect();
    let records = run_grid(&stream, &[MethodKind::FeslS], &seeds, &RunConfig::default()).unwrap();
    let reports: Vec<_> = records.iter().map(|r| check_bounds(r).unwrap()).collect();
    let exp = check_selection_expectation(&reports).unwrap();
    verdict(
        3,
        "FESL-s mean loss within min_s L^s + bound + 0.05 t2",
        exp.pass && exp.runs == 100,
        &format!(
            "mean excess {:+.3} over {} seeds, bound {:.3}, slack {:.1}",
            exp.mean_excess,
            exp.runs,
            theorem2_bound(300).unwrap(),
            exp.slack
        ),
        start.elapsed(),
        30.0,
    );
}

fn gaussian_rows(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Vec<Vec<f64>> {
    (0..rows)
        .map(|_| (0..cols).map(|_| rng.sample(StandardNormal)).collect())
        .collect()
}

fn criterion_4_map_recovery() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let d = 32;
    let truth = DMatrix::from_fn(d, d, |_, _| rng.sample::<f64, _>(StandardNormal));
    let mut est = MapEstimator::new(d, d, 1e-10).unwrap();
    for row in gaussian_rows(&mut rng, 48, d) {
        let x_new = DVector::from_vec(row);
        let x_old = truth.tr_mul(&x_new);
        est.accumulate(
            &FeatureVector::from_dvector(x_new).unwrap(),
            &FeatureVector::from_dvector(x_old).unwrap(),
        )
        .unwrap();
    }
    est.solve().unwrap();
    let rel = (est.m_star().unwrap() - &truth).norm() / truth.norm();

    let mut worst_oracle: f64 = 0.0;
    for _ in 0..50 {
        let d1 = rng.random_range(1..=8);
        let d2 = rng.random_range(1..=8);
        let b = rng.random_range(1..=20);
        let news = gaussian_rows(&mut rng, b, d2);
        let olds = gaussian_rows(&mut rng, b, d1);
        let mut est = MapEstimator::new(d1, d2, 1e-3).unwrap();
        for (n, o) in news.iter().zip(&olds) {
            est.accumulate(
                &FeatureVector::new(n.clone()).unwrap(),
                &FeatureVector::new(o.clone()).unwrap(),
            )
            .unwrap();
        }
        est.solve().unwrap();
        let got = est.m_star().unwrap();
        let want = common::normal_equations_map(&news, &olds, 1e-3);
        let scale = want.iter().flatten().fold(1.0f64, |m, v| m.max(v.abs()));
        for i in 0..d2 {
            for j in 0..d1 {
                worst_oracle = worst_oracle.max((got[(i, j)] - want[i][j]).abs() / scale);
            }
        }
    }
    verdict(
        4,
        "least-squares map recovery",
        rel <= 1e-6 && worst_oracle <= 1e-8,
        &format!(
            "32x32 noiseless relative error {rel:.2e} (<= 1e-6); 50 small instances vs normal equations {worst_oracle:.2e} (<= 1e-8)"
        ),
        start.elapsed(),
        5.0,
    );
}

fn criterion_5_ensembles_track_the_best_baseline() {
    let start = Instant::now();
    let runs = desk_scale_runs(&MethodKind::ALL);
    let mut all_pass = true;
    for (p, per_seed) in &runs {
        let t2 = per_seed[0][0].t2;
        let tol = theorem1_bound(t2) / t2 as f64;
        let mut loss_failures = Vec::new();
        let mut acc = [0.0; 5];
        for recs in per_seed {
            let final_of = |m: MethodKind| {
                recs.iter().find(|r| r.method == m).unwrap().final_avg_loss_clipped()
            };
            let best = MethodKind::BASELINES
                .iter()
                .map(|m| final_of(*m))
                .fold(f64::INFINITY, f64::min);
            for m in [MethodKind::FeslC, MethodKind::FeslS] {
                if final_of(m) > best + tol {
                    loss_failures.push(format!("{} seed {}", m.display_name(), recs[0].seed));
                }
            }
            for r in recs {
                let k = MethodKind::ALL.iter().position(|m| *m == r.method).unwrap();
                acc[k] += r.summary.accuracy.unwrap() / SEEDS as f64;
            }
        }
        let best_baseline = acc[..3].iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let acc_ok = acc[4] >= best_baseline - 0.02;
        let ok = loss_failures.is_empty() && acc_ok;
        all_pass &= ok;
        println!(
            "  {:<10} {} loss: {} of 20 over min baseline + {tol:.4}{}; accuracy FESL-s {:.3} vs best baseline {:.3} (FESL-c {:.3})",
            p.name,
            if ok { "ok  " } else { "FAIL" },
            loss_failures.len(),
            if loss_failures.is_empty() { String::new() } else { format!(" {loss_failures:?}") },
            acc[4],
            best_baseline,
            acc[3],
        );
    }
    verdict(
        5,
        "ensembles match the best baseline on 9 generated streams x 10 seeds",
        all_pass,
        "final clipped average loss per seed and mean accuracy, see lines above",
        start.elapsed(),
        60.0,
    );
}

fn criterion_6_property_suites() {
    let start = Instant::now();
    let mut failures = Vec::new();
    let runner = || {
        TestRunner::new(Config {
            failure_persistence: None,
            ..Config::with_cases(256)
        })
    };
    let results = [
        ("fixed-share floor", runner().run(&props::share_input(), props::fixed_share_floor).map_err(|e| e.to_string())),
        ("weight normalization", runner().run(&props::share_input(), props::weights_stay_normalized).map_err(|e| e.to_string())),
        ("projection idempotence", runner().run(&props::projection_input(), props::projection_is_idempotent).map_err(|e| e.to_string())),
        ("gradient vs finite differences", runner().run(&props::gradient_input(), props::gradient_matches_finite_differences).map_err(|e| e.to_string())),
        ("switch loss vs exhaustive search", runner().run(&props::switch_input(), props::switch_loss_is_exhaustive_minimum).map_err(|e| e.to_string())),
        ("phase partition counts", runner().run(&props::cycle_input(), props::cycle_phases_partition).map_err(|e| e.to_string())),
    ];
    for (name, result) in &results {
        if let Err(e) = result {
            failures.push(format!("{name}: {e}"));
        }
    }
    verdict(
        6,
        "property suites",
        failures.is_empty(),
        &format!("{} of {} properties held over 256 cases each {:?}", results.len() - failures.len(), results.len(), failures),
        start.elapsed(),
        10.0,
    );
}

fn record_bytes(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap())
        })
        .collect();
    files.sort();
    files
}

fn criterion_7_runs_are_byte_identical() {
    let start = Instant::now();
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    let fesl = |args: &[&str]| {
        let status = Command::new(env!("CARGO_BIN_EXE_fesl"))
            .args(args)
            .current_dir(dir)
            .output()
            .unwrap()
            .status;
        assert!(status.success(), "fesl {args:?} failed");
    };
    fesl(&["generate", "--profile", "svmguide3", "--seed", "7", "--out", "s.txt"]);
    let run = ["run", "--stream", "s.txt", "--seeds", "3", "--seed", "7", "--clip", "on"];
    fesl(&[&run[..], &["--out", "first"]].concat());
    fesl(&[&run[..], &["--out", "second"]].concat());
    let a = record_bytes(&dir.join("first"));
    let b = record_bytes(&dir.join("second"));
    verdict(
        7,
        "repeated runs write byte-identical records",
        a.len() == 15 && a == b,
        &format!("{} record files compared", a.len()),
        start.elapsed(),
        30.0,
    );
}

fn main() {
    let criteria: [fn(); 7] = [
        criterion_1_hedge_matches_closed_form,
        criterion_2_combination_bound_never_violated,
        criterion_3_selection_bound_in_expectation,
        criterion_4_map_recovery,
        criterion_5_ensembles_track_the_best_baseline,
        criterion_6_property_suites,
        criterion_7_runs_are_byte_identical,
    ];
    let failed = criteria
        .iter()
        .filter(|c| panic::catch_unwind(**c).is_err())
        .count();
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
