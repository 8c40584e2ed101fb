use rand::seq::index;
use rayon::prelude::*;

use crate::graph::{Graph, NodeId};
use crate::labels::LabelSet;
use crate::scenario::Region;
use crate::seed::{self, Stage};

use super::lbp::{run_lbp, Beliefs, LbpOptions};
use super::model::{build_mrf, state, MrfParams};
use super::ModelError;

#[derive(Debug, Clone, PartialEq)]
pub struct BoostOptions {
    /// Number of independent pseudo-label trials `K`.
    pub trials: usize,
    /// Pseudo-labels of the missing class drawn per trial. Capped by the
    /// number of observed labels.
    pub samples_per_trial: usize,
    /// Allow already-labeled nodes to be drawn as pseudo-labels (the drawn
    /// label then replaces the observed one for that trial).
    pub include_labeled: bool,
    pub lbp: LbpOptions,
}

impl Default for BoostOptions {
    fn default() -> Self {
        BoostOptions {
            trials: 10,
            samples_per_trial: 10,
            include_labeled: false,
            lbp: LbpOptions::default(),
        }
    }
}

/// Runs SybilBelief when only one class of labels is observed.
///
/// Each trial draws `samples_per_trial` nodes uniformly at random, labels them
/// with the missing class and runs LBP. The trials are merged per node by
/// taking the largest posterior of the missing class; the other state gets the
/// complement. Trials are independent and run in parallel; the result does not
/// depend on the worker count.
pub fn boost(
    graph: &Graph,
    labels: &LabelSet,
    params: &MrfParams,
    opts: &BoostOptions,
    seed: u64,
) -> Result<Beliefs, ModelError> {
    let observed = match (labels.count(Region::Benign), labels.count(Region::Sybil)) {
        (0, 0) => return Err(ModelError::EmptyBoostLabels),
        (_, 0) => Region::Benign,
        (0, _) => Region::Sybil,
        _ => return Err(ModelError::MixedBoostLabels),
    };
    let missing = observed.opposite();
    if opts.samples_per_trial > labels.len() {
        return Err(ModelError::SampleCap {
            requested: opts.samples_per_trial,
            cap: labels.len(),
        });
    }
    let pool: Vec<NodeId> = (0..graph.node_count())
        .filter(|&v| opts.include_labeled || labels.get(v).is_none())
        .collect();
    if opts.samples_per_trial > pool.len() {
        return Err(ModelError::NotEnoughNodes {
            requested: opts.samples_per_trial,
            available: pool.len(),
        });
    }
    params.validate()?;

    let runs: Vec<Beliefs> = (0..opts.trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = seed::rng(seed::derive(seed, Stage::Detector, &[trial as u64]));
            let mut trial_labels = labels.clone();
            for i in index::sample(&mut rng, pool.len(), opts.samples_per_trial) {
                trial_labels.insert(pool[i], missing, false);
            }
            let model = build_mrf(graph, &trial_labels, params.clone())?;
            Ok(run_lbp(&model, &opts.lbp))
        })
        .collect::<Result<_, ModelError>>()?;

    Ok(aggregate(&runs, missing, graph.node_count()))
}

/// Per-node max over trials of `P(missing)`; the other state is `1 - max`.
pub(crate) fn aggregate(runs: &[Beliefs], missing: Region, node_count: usize) -> Beliefs {
    let m = state(missing);
    let posterior = (0..node_count)
        .map(|v| {
            let top = runs
                .iter()
                .map(|b| b.posterior[v][m])
                .fold(0.0f64, f64::max);
            let mut p = [0.0; 2];
            p[m] = top;
            p[1 - m] = 1.0 - top;
            p
        })
        .collect();
    Beliefs {
        posterior,
        iterations_run: runs.iter().map(|b| b.iterations_run).max().unwrap_or(0),
        converged: runs.iter().all(|b| b.converged),
        final_delta: runs.iter().map(|b| b.final_delta).fold(0.0, f64::max),
        messages: None,
    }
}
