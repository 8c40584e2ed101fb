use rayon::prelude::*;

use crate::graph::NodeId;

use super::model::{state, MrfModel};

const PAR_MIN_LEN: usize = 4096;

/// One `[to sybil, to benign]` message per directed slot of the graph.
#[derive(Debug, Clone, PartialEq)]
pub struct MessageTable {
    values: Vec<[f64; 2]>,
}

impl MessageTable {
    /// All messages set to `(0.5, 0.5)`.
    pub fn uniform(slot_count: usize) -> Self {
        MessageTable {
            values: vec![[0.5, 0.5]; slot_count],
        }
    }

    /// The message carried by directed slot `slot`.
    pub fn get(&self, slot: usize) -> [f64; 2] {
        self.values[slot]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Total L1 distance between two tables over the same slots.
    pub fn l1_distance(&self, other: &MessageTable) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a[0] - b[0]).abs() + (a[1] - b[1]).abs())
            .sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Normalization {
    /// Scale every message to sum 1 after each update.
    #[default]
    PerMessage,
    /// Keep raw sum-product values (small graphs only; may under/overflow).
    None,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LbpOptions {
    pub max_iters: usize,
    /// Stop once the summed L1 change over all messages drops below this.
    pub tol: f64,
    pub normalization: Normalization,
}

impl Default for LbpOptions {
    fn default() -> Self {
        LbpOptions {
            max_iters: 10,
            tol: 1e-3,
            normalization: Normalization::PerMessage,
        }
    }
}

/// Work counters for one synchronous update.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StepStats {
    /// Outgoing messages computed.
    pub messages_computed: usize,
    /// Incoming messages read while forming per-node products.
    pub messages_read: usize,
}

/// Sum of log incoming messages at every node.
fn incoming_log_sums(model: &MrfModel<'_>, messages: &MessageTable) -> (Vec<[f64; 2]>, usize) {
    let graph = model.graph;
    let sums: Vec<([f64; 2], usize)> = (0..graph.node_count())
        .into_par_iter()
        .with_min_len(PAR_MIN_LEN)
        .map(|u| {
            let mut acc = [0.0; 2];
            let slots = graph.slots(u);
            let read = slots.len();
            for slot in slots {
                let m = messages.values[graph.reverse_slot(slot)];
                acc[0] += m[0].ln();
                acc[1] += m[1].ln();
            }
            (acc, read)
        })
        .collect();
    let read = sums.iter().map(|&(_, r)| r).sum();
    (sums.into_iter().map(|(s, _)| s).collect(), read)
}

/// One synchronous sum-product update.
///
/// Every outgoing message is computed from `messages` only:
/// `m_uv(x_v) = sum_{x_u} phi_u^L(x_u) psi_uv(x_u, x_v) prod_{k in N(u)\v} m_ku(x_u)`.
pub fn lbp_step(model: &MrfModel<'_>, messages: &MessageTable) -> MessageTable {
    lbp_step_with(model, messages, Normalization::PerMessage).0
}

pub fn lbp_step_with(
    model: &MrfModel<'_>,
    messages: &MessageTable,
    normalization: Normalization,
) -> (MessageTable, StepStats) {
    let graph = model.graph;
    assert_eq!(messages.len(), graph.slot_count(), "message table does not match graph");
    let (log_in, messages_read) = incoming_log_sums(model, messages);
    let normalize = normalization == Normalization::PerMessage;
    let values: Vec<[f64; 2]> = (0..graph.slot_count())
        .into_par_iter()
        .with_min_len(PAR_MIN_LEN)
        .map(|slot| {
            let u = model.sources[slot];
            let back = messages.values[graph.reverse_slot(slot)];
            // Product over all neighbors except the receiver.
            let cavity = [log_in[u][0] - back[0].ln(), log_in[u][1] - back[1].ln()];
            let mut out = [0.0; 2];
            match model.clamp[u] {
                Some(tag) => {
                    let x = state(tag);
                    let scale = if normalize {
                        1.0
                    } else {
                        model.node_potential(u)[x] * cavity[x].exp()
                    };
                    for (y, o) in out.iter_mut().enumerate() {
                        *o = scale * model.edge_potential(slot, x, y);
                    }
                }
                None => {
                    let phi = model.node_potential(u);
                    let mut a = [phi[0].ln() + cavity[0], phi[1].ln() + cavity[1]];
                    if normalize {
                        let top = a[0].max(a[1]);
                        a[0] -= top;
                        a[1] -= top;
                    }
                    let e = [a[0].exp(), a[1].exp()];
                    for (y, o) in out.iter_mut().enumerate() {
                        *o = e[0] * model.edge_potential(slot, 0, y)
                            + e[1] * model.edge_potential(slot, 1, y);
                    }
                }
            }
            if normalize {
                let z = out[0] + out[1];
                out[0] /= z;
                out[1] /= z;
            }
            out
        })
        .collect();
    let stats = StepStats {
        messages_computed: values.len(),
        messages_read,
    };
    (MessageTable { values }, stats)
}

/// Posterior marginals after message passing.
#[derive(Debug, Clone, PartialEq)]
pub struct Beliefs {
    /// `[P(sybil), P(benign)]` per node.
    pub posterior: Vec<[f64; 2]>,
    pub iterations_run: usize,
    pub converged: bool,
    /// L1 change of the last update (summed over all messages).
    pub final_delta: f64,
    /// Final message table; absent for aggregated (boosted) beliefs.
    pub messages: Option<MessageTable>,
}

impl Beliefs {
    pub fn p_benign(&self, v: NodeId) -> f64 {
        self.posterior[v][1]
    }

    pub fn p_sybil(&self, v: NodeId) -> f64 {
        self.posterior[v][0]
    }

    pub fn node_count(&self) -> usize {
        self.posterior.len()
    }
}

/// Runs synchronous LBP from uniform messages until the summed L1 change
/// falls below `opts.tol` or `opts.max_iters` updates have been made.
pub fn run_lbp(model: &MrfModel<'_>, opts: &LbpOptions) -> Beliefs {
    let mut messages = MessageTable::uniform(model.graph.slot_count());
    let mut iterations_run = 0;
    let mut converged = false;
    let mut final_delta = 0.0;
    while iterations_run < opts.max_iters {
        let (next, _) = lbp_step_with(model, &messages, opts.normalization);
        final_delta = next.l1_distance(&messages);
        messages = next;
        iterations_run += 1;
        if final_delta < opts.tol {
            converged = true;
            break;
        }
    }
    let posterior = marginals(model, &messages);
    Beliefs {
        posterior,
        iterations_run,
        converged,
        final_delta,
        messages: Some(messages),
    }
}

/// Two-state softmax of log weights, written symmetrically so swapping the
/// inputs swaps the outputs bit for bit.
fn softmax2(a: [f64; 2]) -> [f64; 2] {
    [1.0 / (1.0 + (a[1] - a[0]).exp()), 1.0 / (1.0 + (a[0] - a[1]).exp())]
}

fn marginals(model: &MrfModel<'_>, messages: &MessageTable) -> Vec<[f64; 2]> {
    let (log_in, _) = incoming_log_sums(model, messages);
    (0..model.graph.node_count())
        .map(|v| match model.clamp[v] {
            Some(tag) => {
                let mut p = [0.0; 2];
                p[state(tag)] = 1.0;
                p
            }
            None => {
                let phi = model.node_potential(v);
                softmax2([phi[0].ln() + log_in[v][0], phi[1].ln() + log_in[v][1]])
            }
        })
        .collect()
}

/// Neighborhood belief of `v` ignoring its own clamp:
/// `phi_v(x) prod_k m_kv(x)`, normalized.
pub(crate) fn unclamped_belief(model: &MrfModel<'_>, messages: &MessageTable, v: NodeId) -> [f64; 2] {
    let graph = model.graph;
    let mut a = model.node_potential(v).map(f64::ln);
    for slot in graph.slots(v) {
        let m = messages.values[graph.reverse_slot(slot)];
        a[0] += m[0].ln();
        a[1] += m[1].ln();
    }
    softmax2(a)
}
