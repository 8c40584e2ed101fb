#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sybilbelief::{Graph, LabelSet, Region};

/// Exact marginals `[P(Sybil), P(benign)]` by summing the unnormalized joint
/// over all `2^n` assignments. Bit `v` of an assignment is 1 when node `v` is
/// benign.
pub fn exact_marginals(graph: &Graph, labels: &LabelSet, theta: f64, w: f64) -> Vec<[f64; 2]> {
    let n = graph.node_count();
    assert!(n <= 20, "enumeration is exponential");
    let mut marg = vec![[0.0f64; 2]; n];
    let mut total = 0.0;
    'states: for s in 0u32..(1 << n) {
        let bit = |v: usize| ((s >> v) & 1) as usize;
        let mut p = 1.0;
        for v in 0..n {
            match labels.get(v) {
                Some(Region::Benign) if bit(v) == 0 => continue 'states,
                Some(Region::Sybil) if bit(v) == 1 => continue 'states,
                _ => {}
            }
            p *= if bit(v) == 1 { theta } else { 1.0 - theta };
        }
        for &(u, v) in graph.edges() {
            p *= if bit(u) == bit(v) { w } else { 1.0 - w };
        }
        total += p;
        for (v, m) in marg.iter_mut().enumerate() {
            m[bit(v)] += p;
        }
    }
    for m in &mut marg {
        m[0] /= total;
        m[1] /= total;
    }
    marg
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform random recursive tree: node `i` attaches to a random earlier node.
pub fn random_tree(rng: &mut ChaCha8Rng, n: usize) -> Graph {
    let edges: Vec<_> = (1..n).map(|i| (rng.gen_range(0..i), i)).collect();
    Graph::new(n, edges).unwrap()
}

/// Random tree plus `extra` random non-tree edges; always connected.
pub fn random_connected(rng: &mut ChaCha8Rng, n: usize, extra: usize) -> Graph {
    let mut edges: Vec<_> = (1..n).map(|i| (rng.gen_range(0..i), i)).collect();
    for _ in 0..extra {
        let u = rng.gen_range(0..n);
        let v = rng.gen_range(0..n);
        if u != v {
            edges.push((u, v));
        }
    }
    Graph::new(n, edges).unwrap()
}

/// Between `1` and `max` random labels with random tags.
pub fn random_labels(rng: &mut ChaCha8Rng, n: usize, max: usize) -> LabelSet {
    let k = rng.gen_range(1..=max.min(n));
    let mut nodes: Vec<usize> = (0..n).collect();
    nodes.shuffle(rng);
    LabelSet::from_pairs(nodes[..k].iter().map(|&v| {
        let tag = if rng.gen_bool(0.5) { Region::Benign } else { Region::Sybil };
        (v, tag)
    }))
}
