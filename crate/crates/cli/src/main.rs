mod args;

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;
use std::process::ExitCode;

use anovaboost::pipeline::{
    self, run_cv, run_predict, run_select, run_sweep, run_train, Evaluation, SweepResult,
    MODEL_FILE, SELECTION_FILE,
};
use anovaboost::report::{emit_report, load_report, render, ReportFormat};
use anovaboost::{Error, ErrorCategory, MetricsReport};
use args::{Cli, Command, Common, FormatArg, PredictArgs, ReportArgs};
use clap::Parser;

fn exit_code(category: ErrorCategory) -> u8 {
    match category {
        ErrorCategory::Usage => 1,
        ErrorCategory::Data => 2,
        ErrorCategory::Internal => 3,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli.command) {
        Ok(text) => {
            let mut out = std::io::stdout().lock();
            let _ = out.write_all(text.as_bytes());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(e.category()))
        }
    }
}

fn run(command: Command) -> anovaboost::Result<String> {
    match command {
        Command::Select(c) => select(&c),
        Command::Train(c) => train(&c),
        Command::Predict(a) => predict(&a, false),
        Command::Evaluate(a) => predict(&a, true),
        Command::Cv(c) => cv(&c),
        Command::Sweep(c) => sweep(&c),
        Command::Report(a) => report(&a),
    }
}

fn json<T: serde::Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

fn select(c: &Common) -> anovaboost::Result<String> {
    let config = c.resolve()?;
    let out = run_select(&config)?;
    let s = &out.scores;
    if let FormatArg::Json = c.format {
        return Ok(json(s));
    }
    let mut text = format!("scores written to {}\n", out.scores_path.display());
    let _ = writeln!(text, "{:>5}  {:<24} {:>14}", "rank", "feature", "F");
    for (pos, &j) in s.ranking.iter().take(20).enumerate() {
        let _ = writeln!(text, "{:>5}  {:<24} {:>14.6}", pos + 1, out.feature_names[j], s.f[j]);
    }
    if s.ranking.len() > 20 {
        let _ = writeln!(text, "  ... {} more", s.ranking.len() - 20);
    }
    Ok(text)
}

fn sweep_text(s: &SweepResult) -> String {
    let mut text = format!("best k: {}\n{:>6}  {:>8}\n", s.best_k, "k", "accuracy");
    for p in &s.curve {
        let _ = writeln!(text, "{:>6}  {:>8.4}", p.k, p.accuracy);
    }
    text
}

fn train(c: &Common) -> anovaboost::Result<String> {
    let config = c.resolve()?;
    let out = run_train(&config)?;
    if let FormatArg::Json = c.format {
        return Ok(json(&serde_json::json!({
            "model": out.model_path,
            "selection": out.selection_path,
            "selected_features": out.selection.feature_names,
            "sweep": out.sweep,
        })));
    }
    let mut text = String::new();
    if let Some(s) = &out.sweep {
        text.push_str(&sweep_text(s));
    }
    let _ = writeln!(
        text,
        "trained {} trees on {} features\nmodel: {}\nselection: {}",
        out.model.trees().len(),
        out.selection.feature_names.len(),
        out.model_path.display(),
        out.selection_path.display()
    );
    Ok(text)
}

fn metrics_text(title: &str, m: &MetricsReport) -> String {
    let pct = |v: Option<f64>| v.map_or_else(|| "n/a".to_owned(), |v| format!("{:.2}", 100.0 * v));
    format!(
        "{title}\n  Recall       {:>7}\n  Specificity  {:>7}\n  Precision    {:>7}\n  F1-Score     {:>7}\n  Accuracy     {:>7}\n",
        pct(m.recall),
        pct(m.specificity),
        pct(m.precision),
        pct(m.f1),
        pct(m.accuracy)
    )
}

fn evaluation_text(e: &Evaluation) -> String {
    let mut text = metrics_text(&format!("Class {}", e.classes[e.positive_class]), &e.metrics);
    if let Some(m) = &e.macro_average {
        text.push_str(&metrics_text("Macro average", m));
    }
    let _ = writeln!(text, "Confusion matrix (rows: true, columns: predicted)");
    for (name, row) in e.classes.iter().zip(e.confusion.counts()) {
        let cells: Vec<String> = row.iter().map(u64::to_string).collect();
        let _ = writeln!(text, "  {name}: {}", cells.join(" "));
    }
    text
}

fn predict(a: &PredictArgs, score: bool) -> anovaboost::Result<String> {
    let config = a.common.resolve()?;
    let model = a.model.clone().unwrap_or_else(|| config.out_dir.join(MODEL_FILE));
    let selection = a
        .selection_file
        .clone()
        .unwrap_or_else(|| config.out_dir.join(SELECTION_FILE));
    let preds = run_predict(&model, &selection, &config.input)?;
    let output = a
        .output
        .clone()
        .unwrap_or_else(|| config.out_dir.join("predictions.csv"));
    create_parent(&output)?;
    preds.write_csv(&output)?;
    if !score {
        return Ok(format!(
            "{} predictions written to {}\n",
            preds.predicted.len(),
            output.display()
        ));
    }
    let evaluation = pipeline::evaluate(&preds, &config)?;
    Ok(match a.common.format {
        FormatArg::Json => json(&evaluation),
        FormatArg::Text => evaluation_text(&evaluation),
    })
}

fn create_parent(path: &Path) -> anovaboost::Result<()> {
    match path.parent() {
        Some(dir) if !dir.as_os_str().is_empty() => {
            std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
        }
        _ => Ok(()),
    }
}

fn cv(c: &Common) -> anovaboost::Result<String> {
    let config = c.resolve()?;
    let report = run_cv(&config)?;
    std::fs::create_dir_all(&config.out_dir).map_err(|e| Error::io(&config.out_dir, e))?;
    emit_report(&report, ReportFormat::Json, config.out_dir.join("cv_report.json"))?;
    emit_report(&report, ReportFormat::Text, config.out_dir.join("cv_report.txt"))?;
    Ok(render(&report, c.format.into()))
}

fn sweep(c: &Common) -> anovaboost::Result<String> {
    let config = c.resolve()?;
    let result = run_sweep(&config)?;
    Ok(match c.format {
        FormatArg::Json => json(&result),
        FormatArg::Text => sweep_text(&result),
    })
}

fn report(a: &ReportArgs) -> anovaboost::Result<String> {
    let report = load_report(&a.report)?;
    match &a.output {
        Some(path) => {
            create_parent(path)?;
            emit_report(&report, a.format.into(), path)?;
            Ok(String::new())
        }
        None => Ok(render(&report, a.format.into())),
    }
}
