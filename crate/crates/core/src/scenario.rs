//! A social graph with its ground-truth benign/Sybil split.

use std::fmt;
use std::str::FromStr;

use crate::graph::{Graph, NodeId};

/// Ground-truth side of the benign/Sybil partition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Region {
    Benign,
    Sybil,
}

impl Region {
    pub fn tag(self) -> char {
        match self {
            Region::Benign => 'B',
            Region::Sybil => 'S',
        }
    }

    pub fn opposite(self) -> Region {
        match self {
            Region::Benign => Region::Sybil,
            Region::Sybil => Region::Benign,
        }
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.tag())
    }
}

impl FromStr for Region {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "B" => Ok(Region::Benign),
            "S" => Ok(Region::Sybil),
            other => Err(format!("unknown region tag {other:?} (expected B or S)")),
        }
    }
}

/// A graph with a region for every node. Attack edges are derived from the
/// partition, so they always equal the set of region-crossing edges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScenarioGraph {
    graph: Graph,
    region: Vec<Region>,
    attack_edges: Vec<(NodeId, NodeId)>,
}

impl ScenarioGraph {
    /// Panics if `region` does not cover every node.
    pub fn new(graph: Graph, region: Vec<Region>) -> Self {
        assert_eq!(
            graph.node_count(),
            region.len(),
            "region map must cover every node"
        );
        let attack_edges = graph
            .edges()
            .iter()
            .copied()
            .filter(|&(u, v)| region[u] != region[v])
            .collect();
        ScenarioGraph {
            graph,
            region,
            attack_edges,
        }
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn node_count(&self) -> usize {
        self.graph.node_count()
    }

    pub fn region(&self, v: NodeId) -> Region {
        self.region[v]
    }

    pub fn regions(&self) -> &[Region] {
        &self.region
    }

    /// Region-crossing edges as `(min, max)` pairs in lexicographic order.
    pub fn attack_edges(&self) -> &[(NodeId, NodeId)] {
        &self.attack_edges
    }

    pub fn nodes_in(&self, region: Region) -> impl Iterator<Item = NodeId> + '_ {
        self.region
            .iter()
            .enumerate()
            .filter(move |&(_, &r)| r == region)
            .map(|(v, _)| v)
    }

    pub fn region_size(&self, region: Region) -> usize {
        self.region.iter().filter(|&&r| r == region).count()
    }

    /// Per-node flag: true when the node is an endpoint of some attack edge.
    pub fn attack_endpoints(&self) -> Vec<bool> {
        let mut flags = vec![false; self.node_count()];
        for &(u, v) in &self.attack_edges {
            flags[u] = true;
            flags[v] = true;
        }
        flags
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn attack_edges_are_the_crossing_edges() {
        let g = Graph::new(4, [(0, 1), (1, 2), (2, 3), (0, 3)]).unwrap();
        let s = ScenarioGraph::new(
            g,
            vec![Region::Benign, Region::Benign, Region::Sybil, Region::Sybil],
        );
        assert_eq!(s.attack_edges(), &[(0, 3), (1, 2)]);
        assert_eq!(s.region_size(Region::Sybil), 2);
        assert_eq!(s.attack_endpoints(), vec![true; 4]);
        assert_eq!(s.nodes_in(Region::Benign).collect::<Vec<_>>(), vec![0, 1]);
    }

    #[test]
    fn region_tags_parse() {
        assert_eq!("S".parse::<Region>().unwrap(), Region::Sybil);
        assert!("x".parse::<Region>().is_err());
        assert_eq!(Region::Benign.to_string(), "B");
    }
}
