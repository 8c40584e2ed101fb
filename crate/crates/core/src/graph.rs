//! Undirected simple graphs in compressed adjacency form, plus edge-list I/O.

use std::collections::VecDeque;
use std::io::{BufRead, Write};

use thiserror::Error;

/// Dense 0-based node identifier.
pub type NodeId = usize;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("edge endpoint {node} out of range for a graph with {node_count} nodes")]
    NodeOutOfRange { node: NodeId, node_count: usize },
    #[error("self-loop on node {0}")]
    SelfLoop(NodeId),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("graph has no nodes")]
    Empty,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Immutable undirected simple graph.
///
/// Adjacency is stored in CSR layout. Every undirected edge `{u, v}` owns two
/// directed slots, `u -> v` in the row of `u` and `v -> u` in the row of `v`;
/// `reverse` links each slot to its twin. Neighbor rows are sorted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    node_count: usize,
    edges: Vec<(NodeId, NodeId)>,
    offsets: Vec<usize>,
    neighbors: Vec<NodeId>,
    reverse: Vec<usize>,
}

impl Graph {
    /// Builds a simple graph from an arbitrary list of node pairs.
    ///
    /// Pairs may come in either orientation and may repeat; duplicates collapse.
    /// Self-loops and out-of-range endpoints are rejected.
    pub fn new<I>(node_count: usize, pairs: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = (NodeId, NodeId)>,
    {
        let mut edges = Vec::new();
        for (u, v) in pairs {
            for node in [u, v] {
                if node >= node_count {
                    return Err(GraphError::NodeOutOfRange { node, node_count });
                }
            }
            if u == v {
                return Err(GraphError::SelfLoop(u));
            }
            edges.push((u.min(v), u.max(v)));
        }
        edges.sort_unstable();
        edges.dedup();
        Ok(Self::from_sorted_edges(node_count, edges))
    }

    fn from_sorted_edges(node_count: usize, edges: Vec<(NodeId, NodeId)>) -> Self {
        let mut offsets = vec![0usize; node_count + 1];
        for &(u, v) in &edges {
            offsets[u + 1] += 1;
            offsets[v + 1] += 1;
        }
        for i in 0..node_count {
            offsets[i + 1] += offsets[i];
        }
        // Edges are sorted by (min, max), so appending in order leaves each row sorted.
        let mut cursor = offsets.clone();
        let mut neighbors = vec![0; 2 * edges.len()];
        for &(u, v) in &edges {
            neighbors[cursor[u]] = v;
            cursor[u] += 1;
            neighbors[cursor[v]] = u;
            cursor[v] += 1;
        }
        let mut reverse = vec![0; neighbors.len()];
        for u in 0..node_count {
            for slot in offsets[u]..offsets[u + 1] {
                let v = neighbors[slot];
                let row = &neighbors[offsets[v]..offsets[v + 1]];
                let pos = row
                    .binary_search(&u)
                    .expect("adjacency is symmetric by construction");
                reverse[slot] = offsets[v] + pos;
            }
        }
        Graph {
            node_count,
            edges,
            offsets,
            neighbors,
            reverse,
        }
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Undirected edges as `(min, max)` pairs in lexicographic order.
    pub fn edges(&self) -> &[(NodeId, NodeId)] {
        &self.edges
    }

    pub fn degree(&self, v: NodeId) -> Result<usize, GraphError> {
        self.check(v)?;
        Ok(self.offsets[v + 1] - self.offsets[v])
    }

    /// Sorted neighbors of `v`. Panics if `v` is out of range.
    pub fn neighbors(&self, v: NodeId) -> &[NodeId] {
        &self.neighbors[self.offsets[v]..self.offsets[v + 1]]
    }

    pub fn has_edge(&self, u: NodeId, v: NodeId) -> bool {
        u < self.node_count && v < self.node_count && self.neighbors(u).binary_search(&v).is_ok()
    }

    /// Number of directed slots, always `2 * edge_count()`.
    pub fn slot_count(&self) -> usize {
        self.neighbors.len()
    }

    /// Slot range owned by `v`; slot `s` in the range is the directed edge
    /// `v -> slot_target(s)`.
    pub fn slots(&self, v: NodeId) -> std::ops::Range<usize> {
        self.offsets[v]..self.offsets[v + 1]
    }

    pub fn slot_target(&self, slot: usize) -> NodeId {
        self.neighbors[slot]
    }

    /// The slot of the opposite direction of `slot`.
    pub fn reverse_slot(&self, slot: usize) -> usize {
        self.reverse[slot]
    }

    /// Source node of every slot, in slot order.
    pub fn slot_sources(&self) -> Vec<NodeId> {
        let mut sources = Vec::with_capacity(self.slot_count());
        for v in 0..self.node_count {
            sources.extend(std::iter::repeat_n(v, self.offsets[v + 1] - self.offsets[v]));
        }
        sources
    }

    fn check(&self, v: NodeId) -> Result<(), GraphError> {
        if v >= self.node_count {
            Err(GraphError::NodeOutOfRange {
                node: v,
                node_count: self.node_count,
            })
        } else {
            Ok(())
        }
    }

    /// Connected-component id for every node; components are numbered in
    /// order of their smallest member.
    pub fn components(&self) -> (Vec<usize>, usize) {
        let mut comp = vec![usize::MAX; self.node_count];
        let mut count = 0;
        let mut queue = VecDeque::new();
        for start in 0..self.node_count {
            if comp[start] != usize::MAX {
                continue;
            }
            comp[start] = count;
            queue.push_back(start);
            while let Some(u) = queue.pop_front() {
                for &v in self.neighbors(u) {
                    if comp[v] == usize::MAX {
                        comp[v] = count;
                        queue.push_back(v);
                    }
                }
            }
            count += 1;
        }
        (comp, count)
    }

    pub fn is_connected(&self) -> bool {
        self.node_count > 0 && self.components().1 == 1
    }

    /// Induced subgraph on the largest connected component.
    ///
    /// Returns the subgraph and the table mapping each new id to its original
    /// id. Ties between equally large components go to the one holding the
    /// smallest original id.
    pub fn largest_connected_component(&self) -> Result<(Graph, Vec<NodeId>), GraphError> {
        if self.node_count == 0 {
            return Err(GraphError::Empty);
        }
        let (comp, count) = self.components();
        let mut sizes = vec![0usize; count];
        for &c in &comp {
            sizes[c] += 1;
        }
        let mut best = 0;
        for (c, &size) in sizes.iter().enumerate() {
            if size > sizes[best] {
                best = c;
            }
        }
        let original: Vec<NodeId> = (0..self.node_count).filter(|&v| comp[v] == best).collect();
        let mut remap = vec![usize::MAX; self.node_count];
        for (new, &old) in original.iter().enumerate() {
            remap[old] = new;
        }
        let edges = self
            .edges
            .iter()
            .filter(|&&(u, _)| comp[u] == best)
            .map(|&(u, v)| (remap[u], remap[v]))
            .collect();
        // Remapping is monotone, so the filtered list is still sorted.
        Ok((Graph::from_sorted_edges(original.len(), edges), original))
    }
}

/// Reads a whitespace-separated edge list.
///
/// Blank lines and lines starting with `#` are skipped. Tokens after the
/// first two on a line are ignored. The node count is `max id + 1`.
pub fn load_edge_list<R: BufRead>(reader: R) -> Result<Graph, GraphError> {
    let mut pairs = Vec::new();
    let mut node_count = 0;
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut tokens = trimmed.split_whitespace();
        let mut endpoint = || -> Result<NodeId, GraphError> {
            let tok = tokens.next().ok_or_else(|| GraphError::Parse {
                line: lineno,
                message: "expected two node ids".into(),
            })?;
            tok.parse::<NodeId>().map_err(|_| GraphError::Parse {
                line: lineno,
                message: format!("invalid node id {tok:?}"),
            })
        };
        let u = endpoint()?;
        let v = endpoint()?;
        if u == v {
            return Err(GraphError::Parse {
                line: lineno,
                message: format!("self-loop on node {u}"),
            });
        }
        node_count = node_count.max(u + 1).max(v + 1);
        pairs.push((u, v));
    }
    Graph::new(node_count, pairs)
}

/// Writes one `u v` line per undirected edge.
pub fn write_edge_list<W: Write>(graph: &Graph, mut out: W) -> std::io::Result<()> {
    for &(u, v) in graph.edges() {
        writeln!(out, "{u} {v}")?;
    }
    Ok(())
}
