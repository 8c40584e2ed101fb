//! Semi-supervised Sybil detection on social graphs.
//!
//! SybilBelief models the graph as a pairwise Markov random field whose
//! hidden states are benign/Sybil, conditions on a few labeled nodes, and
//! infers marginals with loopy belief propagation. The crate also ships the
//! random-walk baselines (SybilRank, CIA, a random ranking), synthetic
//! scenario generators, label samplers, evaluation metrics and an
//! experiment runner driven by a small text configuration.
//!
//! ```
//! use sybilbelief::{build_mrf, classify, run_lbp, Graph, LabelSet, LbpOptions, MrfParams, Region};
//!
//! let g = Graph::new(4, [(0, 1), (1, 2), (2, 3)]).unwrap();
//! let labels = LabelSet::from_pairs([(0, Region::Benign), (3, Region::Sybil)]);
//! let model = build_mrf(&g, &labels, MrfParams::default()).unwrap();
//! let beliefs = run_lbp(&model, &LbpOptions::default());
//! assert_eq!(classify(&beliefs), [Region::Benign, Region::Benign, Region::Sybil, Region::Sybil]);
//! ```

pub mod baselines;
pub mod eval;
pub mod experiment;
pub mod graph;
pub mod io;
pub mod labels;
pub mod scenario;
pub mod seed;
pub mod sybilbelief;
pub mod synth;

pub use baselines::{cia, random_rank, sybilrank, BaselineError, CiaOptions, LogBase, Provenance, ScoreVector};
pub use eval::{auc, confusion, sweep_accepted_sybils, Confusion, LabelPlan, SweepResult};
pub use experiment::{parse_config, ConfigError, DetectorKind, ExperimentConfig};
pub use graph::{load_edge_list, write_edge_list, Graph, GraphError, NodeId};
pub use labels::{inject_noise, sample_labels, LabelError, LabelSet, SitePolicy};
pub use scenario::{Region, ScenarioGraph};
pub use sybilbelief::{
    boost, build_mrf, classify, detect_noisy_labels, lbp_step, lbp_step_with, rank, run_lbp, Beliefs, BoostOptions,
    LbpOptions, MessageTable, ModelError, MrfModel, MrfParams, Normalization, StepStats,
};
pub use synth::{compose_regions, duplicate_region_scenario, GeneratorKind, GeneratorSpec, SynthError};

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Synth(#[from] SynthError),
    #[error(transparent)]
    Label(#[from] LabelError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Baseline(#[from] BaselineError),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    ThreadPool(#[from] rayon::ThreadPoolBuildError),
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },
    #[error("expected {expected} predictions, got {got}")]
    PredictionCount { expected: usize, got: usize },
    #[error("score of node {0} is NaN")]
    NanScore(NodeId),
    #[error("AUC needs at least one benign and one Sybil node outside the excluded set")]
    EmptyClass,
    #[error("empty Sybil size grid")]
    EmptyGrid,
    #[error("at least one trial is required")]
    NoTrials,
    #[error("cell {cell}: {source}")]
    Cell { cell: String, source: Box<Error> },
}

impl Error {
    /// Tags the error with the experiment cell it came from.
    pub fn in_cell(self, cell: String) -> Error {
        match self {
            e @ Error::Cell { .. } => e,
            e => Error::Cell {
                cell,
                source: Box::new(e),
            },
        }
    }
}
