//! Random-walk ranking baselines: SybilRank, CIA, and a random scorer.

use std::fmt;
use std::str::FromStr;

use rand::Rng as _;
use rayon::prelude::*;
use thiserror::Error;

use crate::graph::{Graph, NodeId};
use crate::labels::LabelSet;
use crate::scenario::Region;
use crate::seed;
use crate::sybilbelief::Beliefs;

const PAR_MIN_LEN: usize = 4096;

#[derive(Debug, Error, PartialEq)]
pub enum BaselineError {
    #[error("{detector} needs at least one {needed:?} label")]
    NoLabels { detector: Provenance, needed: Region },
    #[error("{detector} only accepts {accepted:?} labels, node {node} is tagged {tag:?}")]
    WrongTag {
        detector: Provenance,
        accepted: Region,
        node: NodeId,
        tag: Region,
    },
    #[error("label on node {node} but the graph has {node_count} nodes")]
    UnknownNode { node: NodeId, node_count: usize },
}

/// Which algorithm produced a score vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Provenance {
    SybilBelief,
    SybilRank,
    Cia,
    Random,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Provenance::SybilBelief => "SybilBelief",
            Provenance::SybilRank => "SybilRank",
            Provenance::Cia => "CIA",
            Provenance::Random => "Random",
        })
    }
}

impl FromStr for Provenance {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "SybilBelief" => Ok(Provenance::SybilBelief),
            "SybilRank" => Ok(Provenance::SybilRank),
            "CIA" => Ok(Provenance::Cia),
            "Random" => Ok(Provenance::Random),
            other => Err(format!("unknown score provenance {other:?}")),
        }
    }
}

/// Per-node reputation; higher means more likely benign.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreVector {
    pub scores: Vec<f64>,
    pub provenance: Provenance,
}

impl ScoreVector {
    /// SybilBelief reputation: the posterior probability of being benign.
    pub fn from_beliefs(beliefs: &Beliefs) -> Self {
        ScoreVector {
            scores: beliefs.posterior.iter().map(|p| p[1]).collect(),
            provenance: Provenance::SybilBelief,
        }
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }
}

fn seed_vector(
    graph: &Graph,
    labels: &LabelSet,
    detector: Provenance,
    accepted: Region,
) -> Result<Vec<f64>, BaselineError> {
    let n = graph.node_count();
    for (node, tag) in labels.iter() {
        if tag != accepted {
            return Err(BaselineError::WrongTag {
                detector,
                accepted,
                node,
                tag,
            });
        }
        if node >= n {
            return Err(BaselineError::UnknownNode { node, node_count: n });
        }
    }
    if labels.is_empty() {
        return Err(BaselineError::NoLabels {
            detector,
            needed: accepted,
        });
    }
    let mut r = vec![0.0; n];
    let share = 1.0 / labels.len() as f64;
    for (v, _) in labels.iter() {
        r[v] = share;
    }
    Ok(r)
}

/// One step of the simple random walk: every node spreads its mass evenly
/// over its neighbors. Mass on isolated nodes stays put.
fn walk_step(graph: &Graph, p: &[f64]) -> Vec<f64> {
    (0..graph.node_count())
        .into_par_iter()
        .with_min_len(PAR_MIN_LEN)
        .map(|v| {
            let nbrs = graph.neighbors(v);
            if nbrs.is_empty() {
                return p[v];
            }
            nbrs.iter()
                .map(|&u| p[u] / graph.neighbors(u).len() as f64)
                .sum()
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LogBase {
    #[default]
    Two,
    Natural,
}

impl LogBase {
    /// `ceil(log(n))` in this base; 0 for `n <= 1`.
    pub fn iterations(self, n: usize) -> usize {
        if n <= 1 {
            return 0;
        }
        let x = n as f64;
        let l = match self {
            LogBase::Two => x.log2(),
            LogBase::Natural => x.ln(),
        };
        l.ceil() as usize
    }
}

impl fmt::Display for LogBase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LogBase::Two => "2",
            LogBase::Natural => "e",
        })
    }
}

impl FromStr for LogBase {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "2" => Ok(LogBase::Two),
            "e" => Ok(LogBase::Natural),
            other => Err(format!("unknown log base {other:?} (expected 2 or e)")),
        }
    }
}

/// Raw SybilRank walk: mass after `iterations` steps from the uniform
/// distribution over the labeled benign nodes.
pub fn sybilrank_mass(graph: &Graph, benign_labels: &LabelSet, iterations: usize) -> Result<Vec<f64>, BaselineError> {
    let mut p = seed_vector(graph, benign_labels, Provenance::SybilRank, Region::Benign)?;
    for _ in 0..iterations {
        p = walk_step(graph, &p);
    }
    Ok(p)
}

/// SybilRank: an early-terminated walk from the benign seeds, run for
/// `ceil(log n)` steps, with the final mass divided by degree. Isolated nodes
/// score 0.
pub fn sybilrank(graph: &Graph, benign_labels: &LabelSet, base: LogBase) -> Result<ScoreVector, BaselineError> {
    let p = sybilrank_mass(graph, benign_labels, base.iterations(graph.node_count()))?;
    let scores = p
        .iter()
        .enumerate()
        .map(|(v, &mass)| {
            let d = graph.neighbors(v).len();
            if d == 0 {
                0.0
            } else {
                mass / d as f64
            }
        })
        .collect();
    Ok(ScoreVector {
        scores,
        provenance: Provenance::SybilRank,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CiaOptions {
    /// Probability of following an edge; `1 - alpha` restarts at the seeds.
    pub alpha: f64,
    pub tol: f64,
    pub max_iters: usize,
}

impl Default for CiaOptions {
    fn default() -> Self {
        CiaOptions {
            alpha: 0.85,
            tol: 1e-6,
            max_iters: 1000,
        }
    }
}

/// Convergence report of an iterated walk.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WalkReport {
    pub iterations: usize,
    pub converged: bool,
    pub final_delta: f64,
}

/// Stationary distribution of the walk restarting at the Sybil seeds:
/// `p = (1 - alpha) r + alpha W^T p`, iterated from `p = r`.
pub fn cia_stationary(graph: &Graph, sybil_labels: &LabelSet, opts: &CiaOptions) -> Result<(Vec<f64>, WalkReport), BaselineError> {
    let r = seed_vector(graph, sybil_labels, Provenance::Cia, Region::Sybil)?;
    let mut p = r.clone();
    let mut report = WalkReport {
        iterations: 0,
        converged: false,
        final_delta: 0.0,
    };
    while report.iterations < opts.max_iters {
        let walked = walk_step(graph, &p);
        let next: Vec<f64> = walked
            .iter()
            .zip(&r)
            .map(|(&w, &rv)| (1.0 - opts.alpha) * rv + opts.alpha * w)
            .collect();
        report.final_delta = next.iter().zip(&p).map(|(a, b)| (a - b).abs()).sum();
        p = next;
        report.iterations += 1;
        if report.final_delta < opts.tol {
            report.converged = true;
            break;
        }
    }
    Ok((p, report))
}

/// CIA reputation `1 - p_v`, where `p` is the restart walk's stationary
/// distribution seeded at the labeled Sybils.
pub fn cia(graph: &Graph, sybil_labels: &LabelSet, opts: &CiaOptions) -> Result<(ScoreVector, WalkReport), BaselineError> {
    let (p, report) = cia_stationary(graph, sybil_labels, opts)?;
    Ok((
        ScoreVector {
            scores: p.iter().map(|x| 1.0 - x).collect(),
            provenance: Provenance::Cia,
        },
        report,
    ))
}

/// Independent uniform scores in `[0, 1)`.
pub fn random_rank(node_count: usize, seed: u64) -> ScoreVector {
    let mut rng = seed::rng(seed);
    ScoreVector {
        scores: (0..node_count).map(|_| rng.gen::<f64>()).collect(),
        provenance: Provenance::Random,
    }
}
