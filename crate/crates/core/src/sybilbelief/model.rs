use std::collections::BTreeMap;

use crate::graph::{Graph, NodeId};
use crate::labels::LabelSet;
use crate::scenario::Region;

use super::ModelError;

/// Index of a binary state in the `[sybil, benign]` pairs used throughout.
pub(crate) fn state(region: Region) -> usize {
    match region {
        Region::Sybil => 0,
        Region::Benign => 1,
    }
}

/// Pairwise MRF parameters. All values are probabilities in (0, 1).
///
/// `theta_*` is the prior probability of being benign, `w_*` the probability
/// mass an edge potential puts on agreeing endpoints. The logit forms are
/// `h = ln(theta / (1 - theta))` and `J = ln(w / (1 - w))`.
#[derive(Debug, Clone, PartialEq)]
pub struct MrfParams {
    pub theta_default: f64,
    /// Prior of labeled nodes. The clamp makes it irrelevant to every
    /// posterior; it is only read by [`super::detect_noisy_labels`].
    pub theta_labeled: f64,
    pub w_default: f64,
    /// Per-edge coupling overrides keyed by `(min, max)` endpoints.
    pub per_edge_w: BTreeMap<(NodeId, NodeId), f64>,
}

impl Default for MrfParams {
    fn default() -> Self {
        MrfParams {
            theta_default: 0.5,
            theta_labeled: 0.5,
            w_default: 0.9,
            per_edge_w: BTreeMap::new(),
        }
    }
}

impl MrfParams {
    pub fn with_w(w: f64) -> Self {
        MrfParams {
            w_default: w,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let open = |name: &'static str, value: f64| {
            if value > 0.0 && value < 1.0 {
                Ok(())
            } else {
                Err(ModelError::ParameterRange { name, value })
            }
        };
        open("theta_default", self.theta_default)?;
        open("theta_labeled", self.theta_labeled)?;
        open("w_default", self.w_default)?;
        for &w in self.per_edge_w.values() {
            open("per_edge_w", w)?;
        }
        Ok(())
    }

    /// True when every coupling favours agreeing endpoints (w > 0.5).
    pub fn is_homophilous(&self) -> bool {
        self.w_default > 0.5 && self.per_edge_w.values().all(|&w| w > 0.5)
    }

    pub fn prior_logit(&self) -> f64 {
        logit(self.theta_default)
    }

    pub fn coupling_logit(&self) -> f64 {
        logit(self.w_default)
    }
}

pub fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

/// Pairwise MRF over a graph with label evidence installed.
#[derive(Debug, Clone)]
pub struct MrfModel<'g> {
    pub(crate) graph: &'g Graph,
    pub(crate) params: MrfParams,
    pub(crate) evidence: LabelSet,
    pub(crate) clamp: Vec<Option<Region>>,
    pub(crate) sources: Vec<NodeId>,
    slot_w: Option<Vec<f64>>,
}

impl<'g> MrfModel<'g> {
    pub fn graph(&self) -> &'g Graph {
        self.graph
    }

    pub fn params(&self) -> &MrfParams {
        &self.params
    }

    pub fn evidence(&self) -> &LabelSet {
        &self.evidence
    }

    pub fn clamp(&self, v: NodeId) -> Option<Region> {
        self.clamp[v]
    }

    /// Node potential `[phi(sybil), phi(benign)]` without evidence.
    pub fn node_potential(&self, v: NodeId) -> [f64; 2] {
        let theta = if self.clamp[v].is_some() {
            self.params.theta_labeled
        } else {
            self.params.theta_default
        };
        [1.0 - theta, theta]
    }

    /// Evidence potential: the node potential with the clamp applied.
    pub fn evidence_potential(&self, v: NodeId) -> [f64; 2] {
        let mut phi = self.node_potential(v);
        if let Some(tag) = self.clamp[v] {
            phi[1 - state(tag)] = 0.0;
        }
        phi
    }

    /// Coupling `w` of the edge behind directed slot `slot`.
    pub fn slot_coupling(&self, slot: usize) -> f64 {
        match &self.slot_w {
            Some(w) => w[slot],
            None => self.params.w_default,
        }
    }

    /// Edge potential between states `a` and `b` of the edge behind `slot`.
    pub fn edge_potential(&self, slot: usize, a: usize, b: usize) -> f64 {
        let w = self.slot_coupling(slot);
        if a == b {
            w
        } else {
            1.0 - w
        }
    }
}

/// Installs `labels` as evidence clamps over `graph`.
pub fn build_mrf<'g>(
    graph: &'g Graph,
    labels: &LabelSet,
    params: MrfParams,
) -> Result<MrfModel<'g>, ModelError> {
    params.validate()?;
    let n = graph.node_count();
    let mut clamp = vec![None; n];
    for (v, tag) in labels.iter() {
        if v >= n {
            return Err(ModelError::UnknownNode { node: v, node_count: n });
        }
        clamp[v] = Some(tag);
    }
    let slot_w = if params.per_edge_w.is_empty() {
        None
    } else {
        for &(u, v) in params.per_edge_w.keys() {
            if !graph.has_edge(u, v) {
                return Err(ModelError::UnknownEdge(u, v));
            }
        }
        let mut w = vec![params.w_default; graph.slot_count()];
        for u in 0..n {
            for slot in graph.slots(u) {
                let v = graph.slot_target(slot);
                if let Some(&ew) = params.per_edge_w.get(&(u.min(v), u.max(v))) {
                    w[slot] = ew;
                }
            }
        }
        Some(w)
    };
    Ok(MrfModel {
        graph,
        params,
        evidence: labels.clone(),
        clamp,
        sources: graph.slot_sources(),
        slot_w,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_labels_no_clamps() {
        let g = Graph::new(3, [(0, 1), (1, 2)]).unwrap();
        let m = build_mrf(&g, &LabelSet::new(), MrfParams::default()).unwrap();
        assert!((0..3).all(|v| m.clamp(v).is_none()));
        assert_eq!(m.evidence_potential(1), [0.5, 0.5]);
    }

    #[test]
    fn benign_label_zeroes_sybil_state() {
        let g = Graph::new(2, [(0, 1)]).unwrap();
        let labels = LabelSet::from_pairs([(0, Region::Benign)]);
        let m = build_mrf(&g, &labels, MrfParams::default()).unwrap();
        assert_eq!(m.evidence_potential(0), [0.0, 0.5]);
        assert_eq!(m.evidence_potential(1), [0.5, 0.5]);
    }

    #[test]
    fn basic_setup_params() {
        let p = MrfParams::with_w(0.9);
        assert_eq!(p.theta_default, 0.5);
        assert!(p.is_homophilous());
        assert!((p.prior_logit()).abs() < 1e-15);
        // J = ln 9 for w = 0.9
        assert!((p.coupling_logit() - 9f64.ln()).abs() < 1e-12);
        assert!(!MrfParams::with_w(0.5).is_homophilous());
    }

    #[test]
    fn rejects_bad_inputs() {
        let g = Graph::new(2, [(0, 1)]).unwrap();
        let labels = LabelSet::from_pairs([(5, Region::Sybil)]);
        assert!(matches!(
            build_mrf(&g, &labels, MrfParams::default()),
            Err(ModelError::UnknownNode { node: 5, .. })
        ));
        assert!(matches!(
            build_mrf(&g, &LabelSet::new(), MrfParams::with_w(1.0)),
            Err(ModelError::ParameterRange { name: "w_default", .. })
        ));
        let mut p = MrfParams::default();
        p.per_edge_w.insert((0, 2), 0.7);
        assert!(matches!(
            build_mrf(&g, &LabelSet::new(), p),
            Err(ModelError::UnknownEdge(0, 2))
        ));
    }

    #[test]
    fn per_edge_override_reaches_both_slots() {
        let g = Graph::new(3, [(0, 1), (1, 2)]).unwrap();
        let mut p = MrfParams::default();
        p.per_edge_w.insert((1, 2), 0.6);
        let m = build_mrf(&g, &LabelSet::new(), p).unwrap();
        for u in 0..3 {
            for s in g.slots(u) {
                let v = g.slot_target(s);
                let expect = if u.min(v) == 1 && u.max(v) == 2 { 0.6 } else { 0.9 };
                assert_eq!(m.slot_coupling(s), expect);
            }
        }
    }
}
