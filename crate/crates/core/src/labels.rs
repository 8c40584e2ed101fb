//! Observed label sets: sampling under site policies and noise injection.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use rand::seq::index;
use thiserror::Error;

use crate::graph::NodeId;
use crate::scenario::{Region, ScenarioGraph};
use crate::seed;

#[derive(Debug, Error, PartialEq)]
pub enum LabelError {
    #[error("{region:?} region has {available} nodes eligible under {policy} labels, {requested} requested")]
    Insufficient {
        region: Region,
        policy: SitePolicy,
        requested: usize,
        available: usize,
    },
    #[error("cannot flip {requested} {tag:?} labels, only {available} present")]
    TooManyFlips {
        tag: Region,
        requested: usize,
        available: usize,
    },
}

/// Which nodes of a region may be picked as labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SitePolicy {
    /// Any node of the region.
    Uniform,
    /// Nodes not incident to an attack edge ("SI").
    AwayFromAttack,
    /// Endpoints of attack edges ("SII").
    OnAttackEdge,
}

impl fmt::Display for SitePolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SitePolicy::Uniform => "uniform",
            SitePolicy::AwayFromAttack => "si",
            SitePolicy::OnAttackEdge => "sii",
        })
    }
}

impl FromStr for SitePolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "uniform" => Ok(SitePolicy::Uniform),
            "si" => Ok(SitePolicy::AwayFromAttack),
            "sii" => Ok(SitePolicy::OnAttackEdge),
            other => Err(format!(
                "unknown label site policy {other:?} (expected uniform, si or sii)"
            )),
        }
    }
}

/// Observed labels, keyed by node, with a flag on deliberately flipped ones.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LabelSet {
    entries: BTreeMap<NodeId, Region>,
    noisy: BTreeSet<NodeId>,
}

impl LabelSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs<I: IntoIterator<Item = (NodeId, Region)>>(pairs: I) -> Self {
        LabelSet {
            entries: pairs.into_iter().collect(),
            noisy: BTreeSet::new(),
        }
    }

    /// Sets the label of `v`, replacing any previous one.
    pub fn insert(&mut self, v: NodeId, tag: Region, noisy: bool) {
        self.entries.insert(v, tag);
        if noisy {
            self.noisy.insert(v);
        } else {
            self.noisy.remove(&v);
        }
    }

    pub fn get(&self, v: NodeId) -> Option<Region> {
        self.entries.get(&v).copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Entries in ascending node order.
    pub fn iter(&self) -> impl Iterator<Item = (NodeId, Region)> + '_ {
        self.entries.iter().map(|(&v, &r)| (v, r))
    }

    pub fn nodes(&self) -> BTreeSet<NodeId> {
        self.entries.keys().copied().collect()
    }

    pub fn is_noisy(&self, v: NodeId) -> bool {
        self.noisy.contains(&v)
    }

    pub fn noisy_nodes(&self) -> &BTreeSet<NodeId> {
        &self.noisy
    }

    pub fn count(&self, tag: Region) -> usize {
        self.entries.values().filter(|&&r| r == tag).count()
    }

    /// Sub-set holding only entries carrying `tag`; noise flags are kept.
    pub fn with_tag(&self, tag: Region) -> LabelSet {
        let entries: BTreeMap<_, _> = self
            .entries
            .iter()
            .filter(|&(_, &r)| r == tag)
            .map(|(&v, &r)| (v, r))
            .collect();
        let noisy = self
            .noisy
            .iter()
            .copied()
            .filter(|v| entries.contains_key(v))
            .collect();
        LabelSet { entries, noisy }
    }

    /// The same nodes with every tag swapped.
    pub fn swapped(&self) -> LabelSet {
        LabelSet {
            entries: self.entries.iter().map(|(&v, &r)| (v, r.opposite())).collect(),
            noisy: self.noisy.clone(),
        }
    }
}

fn eligible(scenario: &ScenarioGraph, region: Region, policy: SitePolicy) -> Vec<NodeId> {
    let on_attack = scenario.attack_endpoints();
    scenario
        .nodes_in(region)
        .filter(|&v| match policy {
            SitePolicy::Uniform => true,
            SitePolicy::AwayFromAttack => !on_attack[v],
            SitePolicy::OnAttackEdge => on_attack[v],
        })
        .collect()
}

fn pick(
    pool: &[NodeId],
    count: usize,
    region: Region,
    policy: SitePolicy,
    rng: &mut seed::Rng,
) -> Result<Vec<NodeId>, LabelError> {
    if count > pool.len() {
        return Err(LabelError::Insufficient {
            region,
            policy,
            requested: count,
            available: pool.len(),
        });
    }
    Ok(index::sample(rng, pool.len(), count)
        .into_iter()
        .map(|i| pool[i])
        .collect())
}

/// Draws `n_benign` labels from the benign region and `n_sybil` from the
/// Sybil region, uniformly among the nodes each region's policy allows.
pub fn sample_labels(
    scenario: &ScenarioGraph,
    n_benign: usize,
    n_sybil: usize,
    benign_site: SitePolicy,
    sybil_site: SitePolicy,
    seed: u64,
) -> Result<LabelSet, LabelError> {
    let mut rng = seed::rng(seed);
    let mut labels = LabelSet::new();
    for (region, count, policy) in [
        (Region::Benign, n_benign, benign_site),
        (Region::Sybil, n_sybil, sybil_site),
    ] {
        let pool = eligible(scenario, region, policy);
        for v in pick(&pool, count, region, policy, &mut rng)? {
            labels.insert(v, region, false);
        }
    }
    Ok(labels)
}

/// Draws `n_benign` benign labels so that every group (a block of node ids,
/// e.g. a community) holds at least one, plus `n_sybil` uniform Sybil labels.
///
/// One label is drawn uniformly inside each group; the rest are drawn
/// uniformly from the remaining benign nodes.
pub fn sample_labels_covering(
    scenario: &ScenarioGraph,
    groups: &[Range<NodeId>],
    n_benign: usize,
    n_sybil: usize,
    seed: u64,
) -> Result<LabelSet, LabelError> {
    if n_benign < groups.len() {
        return Err(LabelError::Insufficient {
            region: Region::Benign,
            policy: SitePolicy::Uniform,
            requested: groups.len(),
            available: n_benign,
        });
    }
    let mut rng = seed::rng(seed);
    let mut labels = LabelSet::new();
    for group in groups {
        let pool: Vec<NodeId> = group
            .clone()
            .filter(|&v| scenario.region(v) == Region::Benign)
            .collect();
        for v in pick(&pool, 1, Region::Benign, SitePolicy::Uniform, &mut rng)? {
            labels.insert(v, Region::Benign, false);
        }
    }
    let rest: Vec<NodeId> = scenario
        .nodes_in(Region::Benign)
        .filter(|v| labels.get(*v).is_none())
        .collect();
    let extra = n_benign - groups.len();
    for v in pick(&rest, extra, Region::Benign, SitePolicy::Uniform, &mut rng)? {
        labels.insert(v, Region::Benign, false);
    }
    let sybils: Vec<NodeId> = scenario.nodes_in(Region::Sybil).collect();
    for v in pick(&sybils, n_sybil, Region::Sybil, SitePolicy::Uniform, &mut rng)? {
        labels.insert(v, Region::Sybil, false);
    }
    Ok(labels)
}

/// Flips `n_benign_flips` benign-tagged and `n_sybil_flips` Sybil-tagged
/// entries to the opposite tag and marks them noisy.
pub fn inject_noise(
    labels: &LabelSet,
    n_benign_flips: usize,
    n_sybil_flips: usize,
    seed: u64,
) -> Result<LabelSet, LabelError> {
    let mut rng = seed::rng(seed);
    let mut out = labels.clone();
    for (tag, count) in [(Region::Benign, n_benign_flips), (Region::Sybil, n_sybil_flips)] {
        let pool: Vec<NodeId> = labels.iter().filter(|&(_, r)| r == tag).map(|(v, _)| v).collect();
        if count > pool.len() {
            return Err(LabelError::TooManyFlips {
                tag,
                requested: count,
                available: pool.len(),
            });
        }
        for i in index::sample(&mut rng, pool.len(), count) {
            out.insert(pool[i], tag.opposite(), true);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;
    use crate::synth::{compose_regions, gen_pa, GeneratorKind, GeneratorSpec};

    fn basic(seed: u64) -> ScenarioGraph {
        let b = gen_pa(&GeneratorSpec::new(GeneratorKind::Pa, 1000, 10.0, seed)).unwrap();
        let s = gen_pa(&GeneratorSpec::new(GeneratorKind::Pa, 500, 10.0, seed + 1)).unwrap();
        compose_regions(&b, &s, 500, seed + 2).unwrap()
    }

    fn single_cross() -> ScenarioGraph {
        // benign path 0-1-2, sybil path 3-4-5, one attack edge 2-3
        let g = Graph::new(6, [(0, 1), (1, 2), (3, 4), (4, 5), (2, 3)]).unwrap();
        let mut region = vec![Region::Benign; 3];
        region.resize(6, Region::Sybil);
        ScenarioGraph::new(g, region)
    }

    #[test]
    fn empty_request() {
        let l = sample_labels(&basic(0), 0, 0, SitePolicy::Uniform, SitePolicy::Uniform, 1).unwrap();
        assert!(l.is_empty());
    }

    #[test]
    fn forced_attack_endpoints() {
        let s = single_cross();
        for seed in 0..5 {
            let l = sample_labels(&s, 1, 1, SitePolicy::OnAttackEdge, SitePolicy::OnAttackEdge, seed)
                .unwrap();
            assert_eq!(l.iter().collect::<Vec<_>>(), vec![(2, Region::Benign), (3, Region::Sybil)]);
        }
    }

    #[test]
    fn sii_shortfall_errors() {
        let s = single_cross();
        let err = sample_labels(&s, 2, 0, SitePolicy::OnAttackEdge, SitePolicy::Uniform, 0).unwrap_err();
        assert_eq!(
            err,
            LabelError::Insufficient {
                region: Region::Benign,
                policy: SitePolicy::OnAttackEdge,
                requested: 2,
                available: 1
            }
        );
    }

    #[test]
    fn one_plus_one_uniform() {
        let s = basic(3);
        let l = sample_labels(&s, 1, 1, SitePolicy::Uniform, SitePolicy::Uniform, 9).unwrap();
        assert_eq!(l.count(Region::Benign), 1);
        assert_eq!(l.count(Region::Sybil), 1);
        for (v, tag) in l.iter() {
            assert_eq!(s.region(v), tag);
        }
    }

    #[test]
    fn site_predicates_hold() {
        let s = basic(5);
        let on = s.attack_endpoints();
        let si = sample_labels(&s, 50, 50, SitePolicy::AwayFromAttack, SitePolicy::AwayFromAttack, 1)
            .unwrap();
        assert!(si.iter().all(|(v, _)| !on[v]));
        let sii = sample_labels(&s, 50, 50, SitePolicy::OnAttackEdge, SitePolicy::OnAttackEdge, 1)
            .unwrap();
        assert!(sii.iter().all(|(v, _)| on[v]));
    }

    #[test]
    fn covering_hits_every_group() {
        let s = basic(1);
        let groups: Vec<_> = (0..8).map(|i| i * 125..(i + 1) * 125).collect();
        let l = sample_labels_covering(&s, &groups, 10, 1, 4).unwrap();
        assert_eq!(l.count(Region::Benign), 10);
        assert_eq!(l.count(Region::Sybil), 1);
        for g in &groups {
            assert!(l.iter().any(|(v, t)| t == Region::Benign && g.contains(&v)));
        }
    }

    #[test]
    fn noise_flips_ten_benign() {
        let s = basic(2);
        let l = sample_labels(&s, 100, 0, SitePolicy::Uniform, SitePolicy::Uniform, 2).unwrap();
        let n = inject_noise(&l, 10, 0, 7).unwrap();
        assert_eq!(n.len(), 100);
        assert_eq!(n.count(Region::Sybil), 10);
        assert_eq!(n.noisy_nodes().len(), 10);
        for &v in n.noisy_nodes() {
            assert_eq!(n.get(v), Some(Region::Sybil));
            assert_eq!(l.get(v), Some(Region::Benign));
        }
    }

    #[test]
    fn zero_flips_is_identity() {
        let s = basic(2);
        let l = sample_labels(&s, 20, 20, SitePolicy::Uniform, SitePolicy::Uniform, 2).unwrap();
        assert_eq!(inject_noise(&l, 0, 0, 1).unwrap(), l);
    }

    #[test]
    fn forty_nine_percent() {
        let s = basic(4);
        let l = sample_labels(&s, 100, 100, SitePolicy::Uniform, SitePolicy::Uniform, 2).unwrap();
        let n = inject_noise(&l, 49, 49, 3).unwrap();
        assert_eq!(n.len(), 200);
        assert_eq!(n.noisy_nodes().len(), 98);
        assert_eq!(n.count(Region::Benign), 100);
        assert!(matches!(
            inject_noise(&l, 101, 0, 3),
            Err(LabelError::TooManyFlips { requested: 101, .. })
        ));
    }

    #[test]
    fn sampling_is_deterministic() {
        let s = basic(6);
        let a = sample_labels(&s, 30, 30, SitePolicy::Uniform, SitePolicy::OnAttackEdge, 5).unwrap();
        let b = sample_labels(&s, 30, 30, SitePolicy::Uniform, SitePolicy::OnAttackEdge, 5).unwrap();
        assert_eq!(a, b);
    }
}
