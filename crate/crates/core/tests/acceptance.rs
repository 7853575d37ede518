//! Acceptance gate. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.

mod common;

use std::sync::Mutex;
use std::time::{Duration, Instant};

use anovaboost::anova::f_scores;
use anovaboost::dataset::FeatureTable;
use anovaboost::eval::{binary_metrics, per_class_metrics, ConfusionMatrix};
use anovaboost::gbt::{grad_hess, train, train_regression, GbtModel, Objective, TrainParams};
use anovaboost::pipeline::{run_cv_on, CvReport, RunConfig, RunObserver, Selection};
use anovaboost::report::to_json;
use anovaboost::synthetic::{generate, SyntheticSpec};
use anovaboost::Matrix;
use common::{anova_oracle, oracle_top_k, rel_err, rng, separable_set};
use rand::Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome, Option<Duration>);

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn anova_oracle_equivalence() -> Outcome {
    let mut r = rng(101);
    let mut worst = 0.0f64;
    for case in 0..200 {
        let k = r.random_range(2..=3);
        let n = r.random_range(k + 1..=50);
        let d = r.random_range(1..=20);
        let table = common::random_table(&mut r, n, d, k);
        let s = f_scores(&table).map_err(|e| e.to_string())?;
        for j in 0..d {
            let col: Vec<f64> = table.values().column(j).collect();
            let o = anova_oracle(&col, table.labels(), k);
            for (name, got, want) in [("msb", s.msb[j], o.msb), ("msw", s.msw[j], o.msw), ("F", s.f[j], o.f)] {
                let e = rel_err(got, want);
                worst = worst.max(e);
                check(e <= 1e-9, || format!("case {case} feature {j}: {name} {got} vs {want}"))?;
            }
        }
    }
    Ok(format!("max rel err {worst:.1e}"))
}

fn anova_affine_invariance() -> Outcome {
    let mut r = rng(202);
    let mut worst = 0.0f64;
    for case in 0..100 {
        let k = r.random_range(2..=3);
        let n = r.random_range(k + 1..=50);
        let d = r.random_range(1..=10);
        let table = common::random_table(&mut r, n, d, k);
        let a = r.random_range(0.1..10.0) * if r.random_bool(0.5) { -1.0 } else { 1.0 };
        let b = r.random_range(-100.0..100.0);
        let moved: Vec<f64> = table.values().as_slice().iter().map(|x| a * x + b).collect();
        let moved = FeatureTable::new(
            Matrix::new(n, d, moved).unwrap(),
            table.labels().to_vec(),
            k,
            table.feature_names().to_vec(),
        )
        .unwrap();
        let f0 = f_scores(&table).unwrap().f;
        let f1 = f_scores(&moved).unwrap().f;
        for j in 0..d {
            let e = rel_err(f1[j], f0[j]);
            worst = worst.max(e);
            check(e <= 1e-9, || format!("case {case} feature {j}: {} vs {} (a={a}, b={b})", f1[j], f0[j]))?;
        }
    }
    Ok(format!("max rel err {worst:.1e}"))
}

fn gradient_finite_differences() -> Outcome {
    const STEP: f64 = 1e-5;
    let mut r = rng(303);
    let mut worst = 0.0f64;
    for point in 0..1000 {
        let (objective, width) = if point % 2 == 0 {
            (Objective::BinaryLogistic, 1)
        } else {
            (Objective::softmax(3).unwrap(), 3)
        };
        let bound = if width == 1 { 4.0 } else { 3.0 };
        let target = r.random_range(0..width.max(2)) as f64;
        let raw: Vec<f64> = (0..width).map(|_| r.random_range(-bound..bound)).collect();
        let gh = grad_hess(&objective, &[target], &raw).unwrap();
        for c in 0..width {
            let at = |delta: f64| {
                let mut s = raw.clone();
                s[c] += delta;
                s
            };
            let fd_g = (objective.loss(target, &at(STEP)).unwrap()
                - objective.loss(target, &at(-STEP)).unwrap())
                / (2.0 * STEP);
            let g_plus = grad_hess(&objective, &[target], &at(STEP)).unwrap().grad[c];
            let g_minus = grad_hess(&objective, &[target], &at(-STEP)).unwrap().grad[c];
            let fd_h = (g_plus - g_minus) / (2.0 * STEP);
            let eg = rel_err(fd_g, gh.grad[c]);
            let eh = rel_err(fd_h, gh.hess[c]);
            worst = worst.max(eg).max(eh);
            check(eg <= 1e-6 && eh <= 1e-6, || {
                format!(
                    "{} at {raw:?} (y={target}) class {c}: g {} vs fd {fd_g}, h {} vs fd {fd_h}",
                    objective.name(),
                    gh.grad[c],
                    gh.hess[c]
                )
            })?;
        }
    }
    Ok(format!("max rel err {worst:.1e}"))
}

/// `Σ loss + Ω` of the first `rounds` rounds of a squared-error model.
fn regularized_objective(model: &GbtModel, x: &Matrix, y: &[f64], rounds: usize, lambda: f64) -> f64 {
    let m = model.truncated(rounds);
    let pred = m.predict_raw(x).unwrap();
    let loss: f64 = pred
        .as_slice()
        .iter()
        .zip(y)
        .map(|(p, t)| 0.5 * (t - p) * (t - p))
        .sum();
    loss + m.regularization(lambda, 0.0)
}

fn objective_monotonicity() -> Outcome {
    let mut r = rng(404);
    let mut checked = 0;
    for dataset in 0..20 {
        let n = r.random_range(20..=80);
        let d = r.random_range(1..=5);
        let x = Matrix::new(n, d, (0..n * d).map(|_| r.random_range(-3.0..3.0)).collect()).unwrap();
        let y: Vec<f64> = (0..n).map(|_| r.random_range(-10.0..10.0)).collect();
        for eta in [0.1, 0.5, 1.0] {
            let params = TrainParams {
                eta,
                rounds: 30,
                max_depth: 3,
                lambda: 1.0,
                gamma: 0.0,
                ..TrainParams::default()
            };
            let model = train_regression(&x, &y, &params).unwrap();
            let mut prev = regularized_objective(&model, &x, &y, 0, params.lambda);
            for t in 1..=30 {
                let cur = regularized_objective(&model, &x, &y, t, params.lambda);
                check(cur <= prev, || {
                    format!("dataset {dataset} eta {eta} round {t}: {cur} > {prev}")
                })?;
                prev = cur;
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} rounds, no increase"))
}

fn separable_fit() -> Outcome {
    let table = separable_set();
    let params = TrainParams {
        eta: 0.3,
        rounds: 50,
        max_depth: 3,
        lambda: 1.0,
        ..TrainParams::default()
    };
    let model = train(&table, Objective::BinaryLogistic, &params).map_err(|e| e.to_string())?;
    let first_perfect = (1..=50).find(|&t| {
        let p = model.truncated(t).predict_class(table.values()).unwrap();
        p == table.labels()
    });
    match first_perfect {
        Some(t) => Ok(format!("100% training accuracy from round {t}")),
        None => {
            let p = model.predict_class(table.values()).unwrap();
            let wrong = p.iter().zip(table.labels()).filter(|(a, b)| a != b).count();
            Err(format!("{wrong} of 100 rows still misclassified after 50 rounds"))
        }
    }
}

fn benchmark_config(selection: Selection) -> RunConfig {
    RunConfig {
        folds: 5,
        seed: 42,
        n_features: Some(5),
        selection,
        ..RunConfig::default()
    }
}

fn determinism_and_serialization() -> Outcome {
    let data = generate(&SyntheticSpec::default()).unwrap();
    let config = benchmark_config(Selection::Anova);
    let run = || -> Result<CvReport, String> {
        run_cv_on(&data.table, &data.encoding, &config, &anovaboost::pipeline::NoObserver)
            .map_err(|e| e.to_string())
    };
    let a = to_json(&run()?.without_timings());
    let b = to_json(&run()?.without_timings());
    check(a == b, || "run_cv reports differ between runs".into())?;

    let model = train(&data.table, Objective::BinaryLogistic, &config.train_params()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("model.json");
    anovaboost::gbt::save_model(&model, &path).unwrap();
    let loaded = anovaboost::gbt::load_model(&path).map_err(|e| e.to_string())?;
    let mut r = rng(606);
    let probe = Matrix::new(
        1000,
        data.table.n_features(),
        (0..1000 * data.table.n_features()).map(|_| r.random_range(-4.0..4.0)).collect(),
    )
    .unwrap();
    let p0 = model.predict_raw(&probe).unwrap();
    let p1 = loaded.predict_raw(&probe).unwrap();
    let same = p0.as_slice().iter().zip(p1.as_slice()).all(|(a, b)| a.to_bits() == b.to_bits());
    check(same, || "reloaded model predicts differently".into())?;
    Ok(format!("{} byte report identical; 1000 reloaded predictions bit-identical", a.len()))
}

fn translation_equivariance() -> Outcome {
    // Values on a 1/256 grid and integer shifts keep every midpoint and
    // comparison exact, so shifted training must reproduce the model.
    let mut r = rng(707);
    let grid = |r: &mut rand_chacha::ChaCha8Rng| r.random_range(-512i32..=512) as f64 / 256.0;
    for dataset in 0..20 {
        let n = r.random_range(30..=100);
        let d = r.random_range(1..=6);
        let values: Vec<f64> = (0..n * d).map(|_| grid(&mut r)).collect();
        let labels: Vec<usize> = (0..n)
            .map(|i| usize::from(values[i * d] + 0.3 * values[i * d + d - 1] + r.random_range(-0.5..0.5) > 0.0))
            .collect();
        if labels.iter().all(|&l| l == labels[0]) {
            continue;
        }
        let shifts: Vec<f64> = (0..d).map(|_| r.random_range(-64i32..=64) as f64).collect();
        let shift = |v: &[f64], rows: usize| -> Matrix {
            let s = v.iter().enumerate().map(|(i, x)| x + shifts[i % d]).collect();
            Matrix::new(rows, d, s).unwrap()
        };
        let base = FeatureTable::from_parts(Matrix::new(n, d, values.clone()).unwrap(), labels.clone()).unwrap();
        let moved = FeatureTable::from_parts(shift(&values, n), labels).unwrap();
        let params = TrainParams {
            rounds: 20,
            max_depth: 4,
            ..TrainParams::default()
        };
        let m0 = train(&base, Objective::BinaryLogistic, &params).unwrap();
        let m1 = train(&moved, Objective::BinaryLogistic, &params).unwrap();
        let probe: Vec<f64> = (0..200 * d).map(|_| grid(&mut r)).collect();
        let p0 = m0.predict_raw(&Matrix::new(200, d, probe.clone()).unwrap()).unwrap();
        let p1 = m1.predict_raw(&shift(&probe, 200)).unwrap();
        let same = p0.as_slice().iter().zip(p1.as_slice()).all(|(a, b)| a.to_bits() == b.to_bits());
        check(same, || format!("dataset {dataset}: shifted model predicts differently"))?;
    }
    Ok("20 datasets bit-identical".into())
}

fn metric_identities() -> Outcome {
    let mut r = rng(808);
    for case in 0..500 {
        let k = r.random_range(2..=5);
        let counts: Vec<Vec<u64>> = (0..k)
            .map(|_| (0..k).map(|_| r.random_range(0..=50)).collect())
            .collect();
        let cm = ConfusionMatrix::from_counts(counts).unwrap();
        let total = cm.total() as f64;
        if let Some(acc) = cm.accuracy() {
            check((acc - cm.trace() as f64 / total).abs() <= 1e-12, || format!("case {case}: accuracy"))?;
        }
        for m in per_class_metrics(&cm).unwrap() {
            if let (Some(p), Some(rc), Some(f1)) = (m.precision, m.recall, m.f1) {
                let expected = if p + rc > 0.0 { 2.0 * p * rc / (p + rc) } else { 0.0 };
                check((f1 - expected).abs() <= 1e-12, || format!("case {case}: f1 {f1} vs {expected}"))?;
            }
        }
        if k == 2 {
            let pos0 = binary_metrics(&cm, 0).unwrap();
            let pos1 = binary_metrics(&cm, 1).unwrap();
            check(pos0.recall == pos1.specificity && pos0.specificity == pos1.recall, || {
                format!("case {case}: recall/specificity duality")
            })?;
            if let (Some(a), Some(b)) = (pos0.accuracy, cm.accuracy()) {
                check((a - b).abs() <= 1e-12, || format!("case {case}: binary accuracy"))?;
            }
        }
    }
    Ok("500 matrices".into())
}

/// Records the training rows each fold scored features on.
#[derive(Default)]
struct ScoreRows(Mutex<Vec<(usize, Vec<usize>)>>);

impl RunObserver for ScoreRows {
    fn scores_computed(&self, fold: Option<usize>, rows: &[usize]) {
        if let Some(f) = fold {
            self.0.lock().unwrap().push((f, rows.to_vec()));
        }
    }
}

fn synthetic_recovery() -> Outcome {
    let started = Instant::now();
    let data = generate(&SyntheticSpec::default()).unwrap();
    let rows = ScoreRows::default();
    let anova = run_cv_on(&data.table, &data.encoding, &benchmark_config(Selection::Anova), &rows)
        .map_err(|e| e.to_string())?;

    // Brute-force oracle on the same training rows must pick the same features.
    let seen = rows.0.into_inner().unwrap();
    for fold in &anova.folds {
        let (_, train_rows) = seen
            .iter()
            .find(|(f, _)| *f == fold.fold)
            .ok_or_else(|| format!("fold {} never scored features", fold.fold))?;
        let oracle = oracle_top_k(&data.table.subset_rows(train_rows).unwrap(), 5);
        check(oracle == fold.selected, || {
            format!("fold {}: selected {:?}, oracle {:?}", fold.fold, fold.selected, oracle)
        })?;
        let hits = fold.selected.iter().filter(|j| data.informative.contains(j)).count();
        check(hits >= 4, || format!("fold {}: only {hits} informative features selected", fold.fold))?;
    }

    let random = run_cv_on(
        &data.table,
        &data.encoding,
        &benchmark_config(Selection::Random),
        &anovaboost::pipeline::NoObserver,
    )
    .map_err(|e| e.to_string())?;
    let acc_anova = anova.average.accuracy.unwrap();
    let acc_random = random.average.accuracy.unwrap();
    check(acc_anova - acc_random >= 0.10, || {
        format!("accuracy {acc_anova:.4} vs random {acc_random:.4}")
    })?;
    let elapsed = started.elapsed();
    check(elapsed < Duration::from_secs(30), || format!("took {elapsed:?}"))?;
    Ok(format!(
        "accuracy {:.2}% vs random {:.2}%, {:.1?}",
        100.0 * acc_anova,
        100.0 * acc_random,
        elapsed
    ))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("ANOVA oracle equivalence", anova_oracle_equivalence, Some(Duration::from_secs(5))),
        ("ANOVA affine invariance", anova_affine_invariance, Some(Duration::from_secs(5))),
        ("Gradient/hessian finite differences", gradient_finite_differences, Some(Duration::from_secs(5))),
        ("Objective monotonicity", objective_monotonicity, None),
        ("Separable-data fit", separable_fit, None),
        ("Determinism & serialization", determinism_and_serialization, None),
        ("Translation equivariance", translation_equivariance, None),
        ("Metric identities", metric_identities, None),
        ("Synthetic end-to-end recovery", synthetic_recovery, None),
    ];
    let mut failures = 0;
    for (name, run, budget) in criteria {
        let started = Instant::now();
        let mut outcome = run();
        let elapsed = started.elapsed();
        if let (Ok(_), Some(limit)) = (&outcome, budget) {
            if elapsed > limit {
                outcome = Err(format!("took {elapsed:?}, limit {limit:?}"));
            }
        }
        match outcome {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(why) => {
                failures += 1;
                println!("FAIL  {name}: {why}");
            }
        }
    }
    println!("{} of 9 criteria passed", 9 - failures);
    if failures > 0 {
        std::process::exit(1);
    }
}
