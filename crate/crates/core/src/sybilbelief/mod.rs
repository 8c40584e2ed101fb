//! Pairwise Markov random field over the social graph, inferred with loopy
//! belief propagation.
//!
//! Every node carries a binary state, Sybil or benign. Node potentials hold a
//! prior `theta` of being benign; edge potentials put weight `w` on agreeing
//! endpoints and `1 - w` on disagreeing ones, so `w > 0.5` encodes homophily.
//! Observed labels clamp their node's state. Synchronous sum-product message
//! passing then approximates each node's posterior, which drives
//! classification (argmax) and ranking (by `P(benign)`).

mod boost;
mod lbp;
mod model;

use std::collections::BTreeSet;

use thiserror::Error;

use crate::graph::NodeId;
use crate::scenario::Region;

pub use boost::{boost, BoostOptions};
pub use lbp::{lbp_step, lbp_step_with, run_lbp, Beliefs, LbpOptions, MessageTable, Normalization, StepStats};
pub use model::{build_mrf, logit, MrfModel, MrfParams};

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("parameter {name} = {value} must lie strictly inside (0, 1)")]
    ParameterRange { name: &'static str, value: f64 },
    #[error("label on node {node} but the graph has {node_count} nodes")]
    UnknownNode { node: NodeId, node_count: usize },
    #[error("coupling override on ({0}, {1}), which is not an edge")]
    UnknownEdge(NodeId, NodeId),
    #[error("boosting needs labels of a single class")]
    MixedBoostLabels,
    #[error("boosting needs at least one label")]
    EmptyBoostLabels,
    #[error("boosting samples {requested} pseudo-labels per trial, more than the {cap} observed labels")]
    SampleCap { requested: usize, cap: usize },
    #[error("only {available} nodes are eligible for {requested} pseudo-labels")]
    NotEnoughNodes { requested: usize, available: usize },
    #[error("beliefs carry no message table")]
    MissingMessages,
}

/// Argmax class per node. An exact tie is classified as Sybil.
pub fn classify(beliefs: &Beliefs) -> Vec<Region> {
    beliefs
        .posterior
        .iter()
        .map(|p| {
            if p[1] > p[0] {
                Region::Benign
            } else {
                Region::Sybil
            }
        })
        .collect()
}

/// Nodes by descending `P(benign)`, ties by ascending id. With `restrict_to`
/// only those nodes are ranked.
pub fn rank(beliefs: &Beliefs, restrict_to: Option<&BTreeSet<NodeId>>) -> Vec<NodeId> {
    let mut order: Vec<NodeId> = match restrict_to {
        Some(set) => set.iter().copied().filter(|&v| v < beliefs.node_count()).collect(),
        None => (0..beliefs.node_count()).collect(),
    };
    order.sort_by(|&a, &b| {
        beliefs
            .p_benign(b)
            .total_cmp(&beliefs.p_benign(a))
            .then(a.cmp(&b))
    });
    order
}

/// Labeled nodes whose neighborhood disagrees with their label.
///
/// For each labeled `v` the belief `phi_v(x) prod_k m_kv(x)` is formed from
/// the final messages, ignoring the clamp on `v`. `v` is flagged when that
/// belief strictly prefers the other state. Ties never flag.
pub fn detect_noisy_labels(model: &MrfModel<'_>, beliefs: &Beliefs) -> Result<BTreeSet<NodeId>, ModelError> {
    let messages = beliefs.messages.as_ref().ok_or(ModelError::MissingMessages)?;
    let mut flagged = BTreeSet::new();
    for (v, tag) in model.evidence().iter() {
        let b = lbp::unclamped_belief(model, messages, v);
        let preferred = if b[1] > b[0] {
            Some(Region::Benign)
        } else if b[0] > b[1] {
            Some(Region::Sybil)
        } else {
            None
        };
        if preferred.is_some_and(|p| p != tag) {
            flagged.insert(v);
        }
    }
    Ok(flagged)
}
