use std::path::PathBuf;

use anovaboost::pipeline::{Protocol, RunConfig, Selection, Task};
use anovaboost::report::ReportFormat;
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "anovaboost", version, about = "ANOVA feature selection and gradient-boosted trees")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Score every feature and write scores.csv
    Select(Common),
    /// Train on the whole input; writes model.json and selection.json
    Train(Common),
    /// Predict with a trained model
    Predict(PredictArgs),
    /// Predict and score against the input's labels
    Evaluate(PredictArgs),
    /// Cross-validate (or hold out) the full pipeline
    Cv(Common),
    /// Sweep the number of selected features on a validation split
    Sweep(Common),
    /// Render a saved cross-validation report
    Report(ReportArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FormatArg {
    Json,
    Text,
}

impl From<FormatArg> for ReportFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Json => ReportFormat::Json,
            FormatArg::Text => ReportFormat::Text,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum TaskArg {
    Binary,
    Multiclass,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ProtocolArg {
    Cv,
    Holdout,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SelectionArg {
    Anova,
    Random,
}

/// Flags shared by every subcommand that reads a run configuration.
#[derive(Debug, Args)]
pub struct Common {
    /// TOML file with run parameters; flags override it
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub task: Option<TaskArg>,
    #[arg(long, value_enum)]
    pub protocol: Option<ProtocolArg>,
    #[arg(long)]
    pub folds: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub n_features: Option<usize>,
    #[arg(long)]
    pub k_min: Option<usize>,
    #[arg(long)]
    pub k_max: Option<usize>,
    #[arg(long)]
    pub k_step: Option<usize>,
    #[arg(long)]
    pub val_fraction: Option<f64>,
    #[arg(long)]
    pub holdout_fraction: Option<f64>,
    #[arg(long)]
    pub eta: Option<f64>,
    #[arg(long)]
    pub rounds: Option<usize>,
    #[arg(long)]
    pub max_depth: Option<usize>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub min_child_weight: Option<f64>,
    #[arg(long)]
    pub positive_class: Option<String>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// Run the sweep once on all rows instead of inside each fold
    #[arg(long)]
    pub global_sweep: bool,
    #[arg(long, value_enum)]
    pub selection: Option<SelectionArg>,
    #[arg(long, value_enum, default_value = "text")]
    pub format: FormatArg,
}

impl Common {
    /// Defaults, then the config file, then explicit flags.
    pub fn resolve(&self) -> anovaboost::Result<RunConfig> {
        let mut c = match &self.config {
            Some(path) => RunConfig::from_file(path)?,
            None => RunConfig::default(),
        };
        macro_rules! set {
            ($($field:ident),*) => {$(
                if let Some(v) = self.$field.clone() {
                    c.$field = v;
                }
            )*};
        }
        set!(input, folds, seed, k_min, k_max, k_step, val_fraction, holdout_fraction);
        set!(eta, rounds, max_depth, lambda, gamma, min_child_weight, out_dir);
        if self.n_features.is_some() {
            c.n_features = self.n_features;
        }
        if self.positive_class.is_some() {
            c.positive_class = self.positive_class.clone();
        }
        if self.global_sweep {
            c.global_sweep = true;
        }
        if let Some(t) = self.task {
            c.task = match t {
                TaskArg::Binary => Task::Binary,
                TaskArg::Multiclass => Task::Multiclass,
            };
        }
        if let Some(p) = self.protocol {
            c.protocol = match p {
                ProtocolArg::Cv => Protocol::Cv,
                ProtocolArg::Holdout => Protocol::Holdout,
            };
        }
        if let Some(s) = self.selection {
            c.selection = match s {
                SelectionArg::Anova => Selection::Anova,
                SelectionArg::Random => Selection::Random,
            };
        }
        c.validate()?;
        Ok(c)
    }
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[command(flatten)]
    pub common: Common,
    /// Defaults to <out-dir>/model.json
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Defaults to <out-dir>/selection.json
    #[arg(long)]
    pub selection_file: Option<PathBuf>,
    /// Where to write predictions; defaults to <out-dir>/predictions.csv
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// A JSON report written by `cv`
    #[arg(long)]
    pub report: PathBuf,
    #[arg(long, value_enum, default_value = "text")]
    pub format: FormatArg,
    /// Write here instead of standard output
    #[arg(long)]
    pub output: Option<PathBuf>,
}
