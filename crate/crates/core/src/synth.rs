//! Synthetic region generators and scenario composition.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use rand::seq::index;
use rand::Rng as _;
use thiserror::Error;

use crate::graph::{Graph, NodeId};
use crate::scenario::{Region, ScenarioGraph};
use crate::seed::{self, Rng, Stage};

#[derive(Debug, Error, PartialEq)]
pub enum SynthError {
    #[error("Erdos-Renyi edge probability {p} is outside (0, 1] (n={node_count}, avg degree {avg_degree})")]
    EdgeProbability {
        p: f64,
        node_count: usize,
        avg_degree: f64,
    },
    #[error("preferential attachment needs an attachment count >= 1 (avg degree {0})")]
    AttachmentCount(f64),
    #[error("preferential attachment with {attach} edges per node needs more than {attach} nodes, got {node_count}")]
    TooFewNodes { node_count: usize, attach: usize },
    #[error("cannot place {requested} distinct cross edges between {left} and {right} nodes")]
    InfeasibleCrossEdges {
        requested: usize,
        left: usize,
        right: usize,
    },
    #[error("at least one community is required")]
    NoCommunities,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GeneratorKind {
    Er,
    Pa,
}

impl fmt::Display for GeneratorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GeneratorKind::Er => "er",
            GeneratorKind::Pa => "pa",
        })
    }
}

impl FromStr for GeneratorKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "er" => Ok(GeneratorKind::Er),
            "pa" => Ok(GeneratorKind::Pa),
            other => Err(format!("unknown generator {other:?} (expected er or pa)")),
        }
    }
}

/// Parameters for one synthetic region.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneratorSpec {
    pub kind: GeneratorKind,
    pub node_count: usize,
    pub avg_degree: f64,
    pub seed: u64,
}

impl GeneratorSpec {
    pub fn new(kind: GeneratorKind, node_count: usize, avg_degree: f64, seed: u64) -> Self {
        GeneratorSpec {
            kind,
            node_count,
            avg_degree,
            seed,
        }
    }

    pub fn with_nodes(self, node_count: usize) -> Self {
        GeneratorSpec { node_count, ..self }
    }

    pub fn with_seed(self, seed: u64) -> Self {
        GeneratorSpec { seed, ..self }
    }

    /// Edge probability for ER: `avg_degree / (n - 1)`.
    pub fn edge_probability(&self) -> f64 {
        self.avg_degree / (self.node_count as f64 - 1.0)
    }

    /// Edges added per node for PA: `round(avg_degree / 2)`.
    pub fn attachment_count(&self) -> usize {
        (self.avg_degree / 2.0).round().max(0.0) as usize
    }

    pub fn generate(&self) -> Result<Graph, SynthError> {
        match self.kind {
            GeneratorKind::Er => gen_er(self),
            GeneratorKind::Pa => gen_pa(self),
        }
    }
}

/// Erdos-Renyi graph: every unordered pair is an edge independently with
/// probability `avg_degree / (n - 1)`.
pub fn gen_er(spec: &GeneratorSpec) -> Result<Graph, SynthError> {
    let n = spec.node_count;
    let p = spec.edge_probability();
    if !(p > 0.0 && p <= 1.0) {
        return Err(SynthError::EdgeProbability {
            p,
            node_count: n,
            avg_degree: spec.avg_degree,
        });
    }
    let mut rng = seed::rng(spec.seed);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen::<f64>() < p {
                edges.push((u, v));
            }
        }
    }
    Ok(Graph::new(n, edges).expect("generated pairs are valid"))
}

/// Preferential attachment (Barabasi-Albert) graph.
///
/// Starts from a clique on `c + 1` nodes, then each new node links to `c`
/// distinct existing nodes picked with probability proportional to degree.
pub fn gen_pa(spec: &GeneratorSpec) -> Result<Graph, SynthError> {
    let c = spec.attachment_count();
    if c < 1 {
        return Err(SynthError::AttachmentCount(spec.avg_degree));
    }
    let n = spec.node_count;
    if n <= c {
        return Err(SynthError::TooFewNodes {
            node_count: n,
            attach: c,
        });
    }
    let mut rng = seed::rng(spec.seed);
    let expected = c * (c + 1) / 2 + (n - c - 1) * c;
    let mut edges = Vec::with_capacity(expected);
    // Each node appears once per incident edge, so a uniform pick is degree-proportional.
    let mut endpoints: Vec<NodeId> = Vec::with_capacity(2 * expected);
    for u in 0..=c {
        for v in u + 1..=c {
            edges.push((u, v));
            endpoints.push(u);
            endpoints.push(v);
        }
    }
    let mut targets: Vec<NodeId> = Vec::with_capacity(c);
    for new in c + 1..n {
        targets.clear();
        while targets.len() < c {
            let t = endpoints[rng.gen_range(0..endpoints.len())];
            if !targets.contains(&t) {
                targets.push(t);
            }
        }
        for &t in &targets {
            edges.push((t, new));
            endpoints.push(t);
            endpoints.push(new);
        }
    }
    Ok(Graph::new(n, edges).expect("generated pairs are valid"))
}

/// Samples `count` distinct pairs `(a, b)` with `a < left`, `b < right`,
/// uniformly without replacement, in draw order.
///
/// Rejection sampling is tried first; after `100 * count` draws the remaining
/// pairs are picked from an explicit enumeration of the unused ones.
pub(crate) fn sample_cross_pairs(
    left: usize,
    right: usize,
    count: usize,
    rng: &mut Rng,
) -> Result<Vec<(usize, usize)>, SynthError> {
    let total = left.saturating_mul(right);
    if count > total {
        return Err(SynthError::InfeasibleCrossEdges {
            requested: count,
            left,
            right,
        });
    }
    let mut chosen = Vec::with_capacity(count);
    let mut seen = HashSet::with_capacity(count);
    let cap = count.saturating_mul(100);
    let mut attempts = 0;
    while chosen.len() < count && attempts < cap {
        attempts += 1;
        let pair = (rng.gen_range(0..left), rng.gen_range(0..right));
        if seen.insert(pair) {
            chosen.push(pair);
        }
    }
    if chosen.len() < count {
        let remaining: Vec<(usize, usize)> = (0..left)
            .flat_map(|a| (0..right).map(move |b| (a, b)))
            .filter(|p| !seen.contains(p))
            .collect();
        let need = count - chosen.len();
        chosen.extend(
            index::sample(rng, remaining.len(), need)
                .into_iter()
                .map(|i| remaining[i]),
        );
    }
    Ok(chosen)
}

/// Disjoint union of a benign and a Sybil region plus `attack_edge_count`
/// uniformly random attack edges. Sybil ids are offset by the benign size.
pub fn compose_regions(
    benign: &Graph,
    sybil: &Graph,
    attack_edge_count: usize,
    seed: u64,
) -> Result<ScenarioGraph, SynthError> {
    let nb = benign.node_count();
    let ns = sybil.node_count();
    let mut rng = seed::rng(seed);
    let attack = sample_cross_pairs(nb, ns, attack_edge_count, &mut rng)?;
    let edges = benign
        .edges()
        .iter()
        .copied()
        .chain(sybil.edges().iter().map(|&(u, v)| (u + nb, v + nb)))
        .chain(attack.into_iter().map(|(b, s)| (b, s + nb)));
    let graph = Graph::new(nb + ns, edges).expect("composed pairs are valid");
    let mut region = vec![Region::Benign; nb];
    region.resize(nb + ns, Region::Sybil);
    Ok(ScenarioGraph::new(graph, region))
}

/// Scenario whose Sybil region is an exact copy of `base`.
pub fn duplicate_region_scenario(
    base: &Graph,
    attack_edge_count: usize,
    seed: u64,
) -> Result<ScenarioGraph, SynthError> {
    compose_regions(base, base, attack_edge_count, seed)
}

/// A benign region made of several PA communities.
#[derive(Debug, Clone)]
pub struct Communities {
    pub graph: Graph,
    /// Community `i` holds ids `bounds[i]..bounds[i + 1]`.
    pub bounds: Vec<usize>,
}

impl Communities {
    pub fn count(&self) -> usize {
        self.bounds.len() - 1
    }

    pub fn members(&self, i: usize) -> std::ops::Range<NodeId> {
        self.bounds[i]..self.bounds[i + 1]
    }
}

/// Builds `k` independent communities from `community_spec`; community `i`
/// (for `i >= 1`) is joined to the union of communities `0..i` by
/// `inter_edges` distinct random edges.
pub fn gen_community_benign(
    k: usize,
    community_spec: &GeneratorSpec,
    inter_edges: usize,
    seed: u64,
) -> Result<Communities, SynthError> {
    if k == 0 {
        return Err(SynthError::NoCommunities);
    }
    let mut bounds = vec![0];
    let mut edges = Vec::new();
    let mut rng = seed::rng(seed::derive(seed, Stage::AttackEdges, &[]));
    for i in 0..k {
        let spec = community_spec.with_seed(seed::derive(seed, Stage::Community, &[i as u64]));
        let g = spec.generate()?;
        let start = *bounds.last().unwrap();
        edges.extend(g.edges().iter().map(|&(u, v)| (u + start, v + start)));
        if i > 0 {
            let links = sample_cross_pairs(g.node_count(), start, inter_edges, &mut rng)?;
            edges.extend(links.into_iter().map(|(a, b)| (a + start, b)));
        }
        bounds.push(start + g.node_count());
    }
    let n = *bounds.last().unwrap();
    let graph = Graph::new(n, edges).expect("community pairs are valid");
    Ok(Communities { graph, bounds })
}
