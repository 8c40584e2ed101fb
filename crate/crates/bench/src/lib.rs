//! Fixtures shared by the benchmarks.

use sybilbelief::{GeneratorKind, GeneratorSpec, Graph, LabelSet, Region};

/// PA graph of `n` nodes and average degree 10, with one label of each kind.
pub fn pa_fixture(n: usize, seed: u64) -> (Graph, LabelSet) {
    let g = GeneratorSpec::new(GeneratorKind::Pa, n, 10.0, seed).generate().expect("valid generator spec");
    let labels = LabelSet::from_pairs([(0, Region::Benign), (n - 1, Region::Sybil)]);
    (g, labels)
}
