//! Experiment configuration, run directories and result export.
//!
//! A run directory holds `metrics.csv`, `frontier.json`, `selection.jsonl`,
//! `config.resolved.toml` and one checkpoint per frontier entry under
//! `checkpoints/`. Only the directory name carries a timestamp.

mod config;
mod report;
mod run;

pub use config::{apply_override, EvaluationConfig, ExperimentConfig, MetricsConfig};
pub use report::{
    cli_eval, cli_report, frontier_export, mean_std, ExportSummary, MethodSummary, Report, RunData,
};
pub use run::{
    cli_train, experiment_id, format_metrics, parse_metrics, read_metrics, train_seed, MetricsRow,
    RunSummary, CHECKPOINT_DIR, CONFIG_FILE, FRONTIER_FILE, METRICS_FILE, METRICS_HEADER,
    SELECTION_FILE,
};
