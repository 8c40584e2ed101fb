//! Detection metrics: confusion counts, AUC, and the accepted-Sybil sweep.

use std::collections::BTreeSet;
use std::ops::Range;

use rayon::prelude::*;

use crate::baselines::ScoreVector;
use crate::graph::{Graph, NodeId};
use crate::labels::{inject_noise, sample_labels, sample_labels_covering, LabelSet, SitePolicy};
use crate::scenario::{Region, ScenarioGraph};
use crate::seed::{self, Stage};
use crate::synth::{compose_regions, GeneratorSpec};
use crate::Error;

/// Misclassification counts over the non-excluded nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Confusion {
    /// Sybil-region nodes predicted benign.
    pub false_negatives: usize,
    /// Benign-region nodes predicted Sybil.
    pub false_positives: usize,
}

pub fn confusion(
    predicted: &[Region],
    scenario: &ScenarioGraph,
    exclude: &BTreeSet<NodeId>,
) -> Result<Confusion, Error> {
    let n = scenario.node_count();
    if predicted.len() != n {
        return Err(Error::PredictionCount {
            expected: n,
            got: predicted.len(),
        });
    }
    let mut c = Confusion::default();
    for (v, &guess) in predicted.iter().enumerate() {
        if exclude.contains(&v) {
            continue;
        }
        match (scenario.region(v), guess) {
            (Region::Sybil, Region::Benign) => c.false_negatives += 1,
            (Region::Benign, Region::Sybil) => c.false_positives += 1,
            _ => {}
        }
    }
    Ok(c)
}

/// Probability that a random benign node outscores a random Sybil node, ties
/// counting one half (the Mann-Whitney statistic), over non-excluded nodes.
///
/// Computed from mid-ranks after one sort, so `O(N log N)`.
pub fn auc(scores: &ScoreVector, scenario: &ScenarioGraph, exclude: &BTreeSet<NodeId>) -> Result<f64, Error> {
    let n = scenario.node_count();
    if scores.len() != n {
        return Err(Error::PredictionCount {
            expected: n,
            got: scores.len(),
        });
    }
    let mut items: Vec<(f64, Region)> = Vec::with_capacity(n);
    for v in (0..n).filter(|v| !exclude.contains(v)) {
        let s = scores.scores[v];
        if s.is_nan() {
            return Err(Error::NanScore(v));
        }
        items.push((s, scenario.region(v)));
    }
    let nb = items.iter().filter(|&&(_, r)| r == Region::Benign).count();
    let ns = items.len() - nb;
    if nb == 0 || ns == 0 {
        return Err(Error::EmptyClass);
    }
    items.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut benign_rank_sum = 0.0;
    let mut i = 0;
    while i < items.len() {
        let mut j = i + 1;
        while j < items.len() && items[j].0 == items[i].0 {
            j += 1;
        }
        // ranks i+1 ..= j share their mean
        let mid = (i + 1 + j) as f64 / 2.0;
        let benign_in_group = items[i..j].iter().filter(|&&(_, r)| r == Region::Benign).count();
        benign_rank_sum += mid * benign_in_group as f64;
        i = j;
    }
    let nbf = nb as f64;
    let u = benign_rank_sum - nbf * (nbf + 1.0) / 2.0;
    Ok(u / (nbf * ns as f64))
}

/// How labels are drawn for each sweep cell.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelPlan {
    pub n_benign: usize,
    pub n_sybil: usize,
    pub benign_site: SitePolicy,
    pub sybil_site: SitePolicy,
    pub benign_flips: usize,
    pub sybil_flips: usize,
    /// When set, benign labels are spread so each block gets at least one.
    pub cover: Option<Vec<Range<NodeId>>>,
}

impl LabelPlan {
    pub fn uniform(n_benign: usize, n_sybil: usize) -> Self {
        LabelPlan {
            n_benign,
            n_sybil,
            benign_site: SitePolicy::Uniform,
            sybil_site: SitePolicy::Uniform,
            benign_flips: 0,
            sybil_flips: 0,
            cover: None,
        }
    }

    pub fn with_flips(self, benign_flips: usize, sybil_flips: usize) -> Self {
        LabelPlan {
            benign_flips,
            sybil_flips,
            ..self
        }
    }

    pub fn has_noise(&self) -> bool {
        self.benign_flips + self.sybil_flips > 0
    }

    /// Clean labels for a scenario.
    pub fn sample(&self, scenario: &ScenarioGraph, seed: u64) -> Result<LabelSet, Error> {
        Ok(match &self.cover {
            Some(groups) => sample_labels_covering(scenario, groups, self.n_benign, self.n_sybil, seed)?,
            None => sample_labels(
                scenario,
                self.n_benign,
                self.n_sybil,
                self.benign_site,
                self.sybil_site,
                seed,
            )?,
        })
    }

    pub fn corrupt(&self, clean: &LabelSet, seed: u64) -> Result<LabelSet, Error> {
        Ok(inject_noise(clean, self.benign_flips, self.sybil_flips, seed)?)
    }
}

/// Seeds of every random stage of one experiment cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CellSeeds {
    pub sybil_region: u64,
    pub attack_edges: u64,
    pub labels: u64,
    pub noise: u64,
    pub detector: u64,
}

impl CellSeeds {
    /// Seeds for the cell at `(attack_edges, sybil_size, trial)` under `master`.
    pub fn derive(master: u64, attack_edges: usize, sybil_size: usize, trial: usize) -> Self {
        let c = [attack_edges as u64, sybil_size as u64, trial as u64];
        CellSeeds {
            sybil_region: seed::derive(master, Stage::SybilRegion, &c),
            attack_edges: seed::derive(master, Stage::AttackEdges, &c),
            labels: seed::derive(master, Stage::Labels, &c),
            noise: seed::derive(master, Stage::Noise, &c),
            detector: seed::derive(master, Stage::Detector, &c),
        }
    }
}

/// One scenario instance with its clean and (possibly) corrupted labels.
#[derive(Debug, Clone)]
pub struct Cell {
    pub attack_edges: usize,
    pub sybil_size: usize,
    pub trial: usize,
    pub scenario: ScenarioGraph,
    pub clean: LabelSet,
    pub labels: LabelSet,
    pub seeds: CellSeeds,
}

/// Builds the sweep cell `(attack_edges, sybil_size, trial)`: a fresh Sybil
/// region, uniformly random attack edges, and labels drawn by `plan`.
pub fn build_cell(
    benign: &Graph,
    attack_edges: usize,
    sybil_spec: &GeneratorSpec,
    sybil_size: usize,
    plan: &LabelPlan,
    trial: usize,
    master: u64,
) -> Result<Cell, Error> {
    let seeds = CellSeeds::derive(master, attack_edges, sybil_size, trial);
    let sybil = sybil_spec
        .with_nodes(sybil_size)
        .with_seed(seeds.sybil_region)
        .generate()?;
    let scenario = compose_regions(benign, &sybil, attack_edges, seeds.attack_edges)?;
    let clean = plan.sample(&scenario, seeds.labels)?;
    let labels = plan.corrupt(&clean, seeds.noise)?;
    Ok(Cell {
        attack_edges,
        sybil_size,
        trial,
        scenario,
        clean,
        labels,
        seeds,
    })
}

/// `ceil(f * n_b)` for `f` in 0.1, 0.2, 0.4, 0.8, 1.6, 3.2.
pub fn default_size_grid(benign_size: usize) -> Vec<usize> {
    [1, 2, 4, 8, 16, 32]
        .iter()
        .map(|&tenths| (tenths * benign_size).div_ceil(10))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SizeResult {
    pub sybil_size: usize,
    /// Per-trial counts, in trial order.
    pub trials: Vec<Confusion>,
    pub mean_false_negatives: f64,
    pub mean_false_positives: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub sizes: Vec<SizeResult>,
    /// Largest per-size mean of false negatives.
    pub accepted_sybils: f64,
    /// Largest per-size mean of false positives.
    pub rejected_benign: f64,
}

impl SweepResult {
    fn from_sizes(sizes: Vec<SizeResult>) -> Self {
        let accepted_sybils = sizes.iter().map(|s| s.mean_false_negatives).fold(0.0, f64::max);
        let rejected_benign = sizes.iter().map(|s| s.mean_false_positives).fold(0.0, f64::max);
        SweepResult {
            sizes,
            accepted_sybils,
            rejected_benign,
        }
    }

    /// False negatives of trial `t` across the grid.
    pub fn trial_curve(&self, t: usize) -> Vec<usize> {
        self.sizes.iter().map(|s| s.trials[t].false_negatives).collect()
    }
}

/// A classification procedure run on one cell. It sees the scenario graph,
/// `cell.labels` (the observed, possibly corrupted labels) and
/// `cell.seeds.detector`; ground truth is for scoring only.
pub trait Detector: Sync {
    fn classify(&self, cell: &Cell) -> Result<Vec<Region>, Error>;
}

impl<F> Detector for F
where
    F: Fn(&Cell) -> Result<Vec<Region>, Error> + Sync,
{
    fn classify(&self, cell: &Cell) -> Result<Vec<Region>, Error> {
        self(cell)
    }
}

/// Grows the Sybil region across `size_grid` and records, per size, the mean
/// false negatives/positives over `trials` fresh scenarios. Labeled nodes are
/// left out of the counts.
#[allow(clippy::too_many_arguments)]
pub fn sweep_accepted_sybils<D: Detector + ?Sized>(
    benign: &Graph,
    attack_edge_count: usize,
    sybil_spec: &GeneratorSpec,
    size_grid: &[usize],
    detector: &D,
    plan: &LabelPlan,
    trials: usize,
    seed: u64,
) -> Result<SweepResult, Error> {
    if size_grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    if trials == 0 {
        return Err(Error::NoTrials);
    }
    let cells: Vec<(usize, usize)> = size_grid
        .iter()
        .flat_map(|&s| (0..trials).map(move |t| (s, t)))
        .collect();
    let outcomes: Vec<Confusion> = cells
        .par_iter()
        .map(|&(size, trial)| {
            let run = || {
                let cell = build_cell(benign, attack_edge_count, sybil_spec, size, plan, trial, seed)?;
                let predicted = detector.classify(&cell)?;
                confusion(&predicted, &cell.scenario, &cell.labels.nodes())
            };
            run().map_err(|e| e.in_cell(format!("attack_edges={attack_edge_count} sybil_size={size} trial={trial}")))
        })
        .collect::<Result<_, Error>>()?;
    let sizes = size_grid
        .iter()
        .zip(outcomes.chunks(trials))
        .map(|(&sybil_size, chunk)| {
            let denom = chunk.len() as f64;
            SizeResult {
                sybil_size,
                trials: chunk.to_vec(),
                mean_false_negatives: chunk.iter().map(|c| c.false_negatives as f64).sum::<f64>() / denom,
                mean_false_positives: chunk.iter().map(|c| c.false_positives as f64).sum::<f64>() / denom,
            }
        })
        .collect();
    Ok(SweepResult::from_sizes(sizes))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::baselines::Provenance;

    fn tiny() -> ScenarioGraph {
        let g = Graph::new(5, [(0, 1), (1, 2), (2, 3), (3, 4)]).unwrap();
        ScenarioGraph::new(
            g,
            vec![Region::Benign, Region::Benign, Region::Sybil, Region::Sybil, Region::Sybil],
        )
    }

    fn sv(scores: Vec<f64>) -> ScoreVector {
        ScoreVector {
            scores,
            provenance: Provenance::Random,
        }
    }

    #[test]
    fn confusion_cases() {
        let s = tiny();
        let none = BTreeSet::new();
        assert_eq!(confusion(s.regions(), &s, &none).unwrap(), Confusion::default());
        let all_benign = vec![Region::Benign; 5];
        assert_eq!(confusion(&all_benign, &s, &none).unwrap().false_negatives, 3);
        let all_sybil = vec![Region::Sybil; 5];
        assert_eq!(confusion(&all_sybil, &s, &none).unwrap().false_positives, 2);
        let ex = BTreeSet::from([2]);
        assert_eq!(confusion(&all_benign, &s, &ex).unwrap().false_negatives, 2);
        assert!(matches!(
            confusion(&all_sybil[..3], &s, &none),
            Err(Error::PredictionCount { .. })
        ));
    }

    #[test]
    fn auc_cases() {
        let s = tiny();
        let none = BTreeSet::new();
        assert_eq!(auc(&sv(vec![0.9, 0.8, 0.1, 0.2, 0.3]), &s, &none).unwrap(), 1.0);
        assert_eq!(auc(&sv(vec![0.4; 5]), &s, &none).unwrap(), 0.5);
        // benign {0.9, 0.4}, sybil {0.6}: pairs (0.9>0.6) and (0.4<0.6) -> 1/2
        let ex = BTreeSet::from([3, 4]);
        assert_eq!(auc(&sv(vec![0.9, 0.4, 0.6, 0.0, 0.0]), &s, &ex).unwrap(), 0.5);
        let only_benign = BTreeSet::from([2, 3, 4]);
        assert!(matches!(auc(&sv(vec![0.0; 5]), &s, &only_benign), Err(Error::EmptyClass)));
    }

    #[test]
    fn grid_default() {
        assert_eq!(default_size_grid(1000), vec![100, 200, 400, 800, 1600, 3200]);
        assert_eq!(default_size_grid(15), vec![2, 3, 6, 12, 24, 48]);
    }
}
