//! Experiment configuration and the sweep / comparison runners.

mod config;
mod runner;

pub use config::{
    parse_config, BenignSource, ConfigError, DetectorKind, ExperimentConfig, LabelConfig, MetricKind, RunConfig,
    ScenarioConfig, SybilBeliefConfig, SybilSource,
};
pub use runner::{
    auc_table, build_benign, comparison_csv, label_plan, mean_aucs, ranking_cell, run_comparison, run_experiment, score,
    size_grid, sweep_csv, sweep_results, sybil_spec, sybilbelief_beliefs, with_jobs, BenignRegion, RankingCell,
};
