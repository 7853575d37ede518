//! End-to-end experiments: cross-validation, the feature-count sweep,
//! training and prediction artifacts.

mod artifacts;
mod config;
mod cv;

pub use artifacts::{
    evaluate, predict_with, run_predict, run_select, run_train, run_train_on, Evaluation,
    Predictions, SelectOutcome, SelectionFile, TrainOutcome, MODEL_FILE, SCORES_FILE,
    SELECTION_FILE, SELECTION_SCHEMA_VERSION,
};
pub use config::{Protocol, RunConfig, Selection, Task};
pub use cv::{
    run_cv, run_cv_on, run_sweep, run_sweep_on, CvReport, FoldResult, NoObserver, RunObserver,
    SweepPoint, SweepResult, Timings, REPORT_SCHEMA_VERSION,
};
