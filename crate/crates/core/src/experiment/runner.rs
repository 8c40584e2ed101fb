use std::collections::BTreeMap;
use std::ops::Range;
use std::path::Path;

use rayon::prelude::*;

use crate::baselines::{cia, random_rank, sybilrank, ScoreVector};
use crate::eval::{auc, default_size_grid, sweep_accepted_sybils, CellSeeds, LabelPlan, SweepResult};
use crate::graph::{load_edge_list, Graph};
use crate::io;
use crate::labels::LabelSet;
use crate::scenario::{Region, ScenarioGraph};
use crate::seed::{self, Stage};
use crate::sybilbelief::{boost, build_mrf, classify, run_lbp, Beliefs};
use crate::synth::{compose_regions, duplicate_region_scenario, gen_community_benign, GeneratorKind, GeneratorSpec};
use crate::Error;

use super::config::{BenignSource, DetectorKind, ExperimentConfig, MetricKind, SybilSource};

/// The benign region of an experiment, shared by every cell.
#[derive(Debug, Clone)]
pub struct BenignRegion {
    pub graph: Graph,
    /// Community blocks that the benign labels must cover.
    pub cover: Option<Vec<Range<usize>>>,
}

pub fn build_benign(config: &ExperimentConfig) -> Result<BenignRegion, Error> {
    let sc = &config.scenario;
    let seed = seed::derive(config.run.seed, Stage::BenignRegion, &[]);
    Ok(match &sc.benign {
        BenignSource::Generated { kind } => BenignRegion {
            graph: GeneratorSpec::new(*kind, sc.benign_nodes, sc.benign_avg_degree, seed).generate()?,
            cover: None,
        },
        BenignSource::Communities { count, inter_edges } => {
            let spec = GeneratorSpec::new(
                GeneratorKind::Pa,
                sc.benign_nodes.div_ceil(*count),
                sc.benign_avg_degree,
                seed,
            );
            let c = gen_community_benign(*count, &spec, *inter_edges, seed)?;
            let cover = (0..c.count()).map(|i| c.members(i)).collect();
            BenignRegion {
                graph: c.graph,
                cover: Some(cover),
            }
        }
        BenignSource::Dataset(path) => {
            let g = load_edge_list(io::open(path)?)?;
            BenignRegion {
                graph: g.largest_connected_component()?.0,
                cover: None,
            }
        }
    })
}

/// Template for generated Sybil regions; the size is set per cell.
pub fn sybil_spec(config: &ExperimentConfig) -> GeneratorSpec {
    let kind = match config.scenario.sybil {
        SybilSource::Generated(k) => k,
        SybilSource::Duplicate => GeneratorKind::Pa,
    };
    GeneratorSpec::new(kind, 0, config.scenario.sybil_avg_degree, 0)
}

/// Label plan of `kind`: noisy detectors get the configured flips.
pub fn label_plan(config: &ExperimentConfig, benign: &BenignRegion, kind: DetectorKind) -> LabelPlan {
    let l = &config.labels;
    let (bf, sf) = if kind.is_noisy() { l.flips() } else { (0, 0) };
    LabelPlan {
        n_benign: l.benign,
        n_sybil: l.sybil,
        benign_site: l.benign_site,
        sybil_site: l.sybil_site,
        benign_flips: bf,
        sybil_flips: sf,
        cover: benign.cover.clone(),
    }
}

/// SybilBelief beliefs for one of the SB detectors on the observed labels.
pub fn sybilbelief_beliefs(
    config: &ExperimentConfig,
    kind: DetectorKind,
    graph: &Graph,
    labels: &LabelSet,
    detector_seed: u64,
) -> Result<Beliefs, Error> {
    let sb = &config.sybilbelief;
    match kind {
        DetectorKind::SbBoost => Ok(boost(
            graph,
            &labels.with_tag(Region::Benign),
            &sb.params(),
            &sb.boost(),
            detector_seed,
        )?),
        _ => {
            let model = build_mrf(graph, labels, sb.params())?;
            Ok(run_lbp(&model, &sb.lbp()))
        }
    }
}

/// Ranking of `kind` on the observed labels.
pub fn score(
    config: &ExperimentConfig,
    kind: DetectorKind,
    graph: &Graph,
    labels: &LabelSet,
    detector_seed: u64,
) -> Result<ScoreVector, Error> {
    Ok(match kind {
        DetectorKind::Sb | DetectorKind::SbNoisy | DetectorKind::SbBoost => {
            ScoreVector::from_beliefs(&sybilbelief_beliefs(config, kind, graph, labels, detector_seed)?)
        }
        DetectorKind::SybilRank | DetectorKind::SybilRankNoisy => {
            sybilrank(graph, &labels.with_tag(Region::Benign), config.sybilrank_log_base)?
        }
        DetectorKind::Cia | DetectorKind::CiaNoisy => cia(graph, &labels.with_tag(Region::Sybil), &config.cia)?.0,
        DetectorKind::Random => random_rank(graph.node_count(), detector_seed),
    })
}

/// Runs the configured experiment and returns the CSV table.
pub fn run_experiment(config: &ExperimentConfig) -> Result<String, Error> {
    match config.metric {
        MetricKind::Classification => run_sweep(config),
        MetricKind::Auc => run_comparison(config, &[config.detector]),
    }
}

/// Runs `f` on a dedicated pool of `jobs` workers.
pub fn with_jobs<T: Send>(jobs: usize, f: impl FnOnce() -> Result<T, Error> + Send) -> Result<T, Error> {
    rayon::ThreadPoolBuilder::new().num_threads(jobs).build()?.install(f)
}

/// Sybil sizes of the classification sweep.
pub fn size_grid(config: &ExperimentConfig, benign: &BenignRegion) -> Vec<usize> {
    config
        .scenario
        .sybil_sizes
        .clone()
        .unwrap_or_else(|| default_size_grid(benign.graph.node_count()))
}

/// Accepted-Sybil sweep for the configured SybilBelief detector, one sweep per
/// attack-edge count.
pub fn sweep_results(config: &ExperimentConfig) -> Result<Vec<(usize, SweepResult)>, Error> {
    config.validate()?;
    let kind = config.detector;
    with_jobs(config.run.jobs, || {
        let benign = build_benign(config)?;
        let plan = label_plan(config, &benign, kind);
        let grid = size_grid(config, &benign);
        let spec = sybil_spec(config);
        let dump = config.run.out.as_deref().filter(|_| config.run.dump);
        let detector = |cell: &crate::eval::Cell| -> Result<Vec<Region>, Error> {
            let beliefs =
                sybilbelief_beliefs(config, kind, cell.scenario.graph(), &cell.labels, cell.seeds.detector)?;
            if let Some(dir) = dump {
                let name = format!(
                    "beliefs_{}_a{}_s{}_t{}.txt",
                    kind, cell.attack_edges, cell.sybil_size, cell.trial
                );
                io::write_file(&dir.join(name), |w| io::write_beliefs(&beliefs, w))?;
            }
            Ok(classify(&beliefs))
        };
        config
            .scenario
            .attack_edges
            .iter()
            .map(|&ae| {
                let r = sweep_accepted_sybils(
                    &benign.graph,
                    ae,
                    &spec,
                    &grid,
                    &detector,
                    &plan,
                    config.run.trials,
                    config.run.seed,
                )?;
                Ok((ae, r))
            })
            .collect()
    })
}

fn run_sweep(config: &ExperimentConfig) -> Result<String, Error> {
    sweep_csv(config.detector, &sweep_results(config)?)
}

/// CSV form of [`sweep_results`]: per-trial rows, a mean row per Sybil size
/// and a max row per attack-edge count.
pub fn sweep_csv(detector: DetectorKind, results: &[(usize, SweepResult)]) -> Result<String, Error> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "detector",
        "attack_edges",
        "row",
        "sybil_size",
        "trial",
        "false_negatives",
        "false_positives",
        "accepted_sybils",
        "rejected_benign",
    ])?;
    let det = detector.to_string();
    for (ae, r) in results {
        let ae = ae.to_string();
        for size in &r.sizes {
            let s = size.sybil_size.to_string();
            for (t, c) in size.trials.iter().enumerate() {
                w.write_record([
                    det.as_str(),
                    &ae,
                    "trial",
                    &s,
                    &t.to_string(),
                    &c.false_negatives.to_string(),
                    &c.false_positives.to_string(),
                    "",
                    "",
                ])?;
            }
            w.write_record([
                det.as_str(),
                &ae,
                "mean",
                &s,
                "",
                &fmt_num(size.mean_false_negatives),
                &fmt_num(size.mean_false_positives),
                "",
                "",
            ])?;
        }
        w.write_record([
            det.as_str(),
            &ae,
            "max",
            "",
            "",
            "",
            "",
            &fmt_num(r.accepted_sybils),
            &fmt_num(r.rejected_benign),
        ])?;
    }
    finish(w)
}

/// Scenario and labels of one ranking cell.
#[derive(Debug, Clone)]
pub struct RankingCell {
    pub attack_edges: usize,
    pub trial: usize,
    pub scenario: ScenarioGraph,
    pub clean: LabelSet,
    /// `clean` with the configured flips applied.
    pub noisy: LabelSet,
    pub seeds: CellSeeds,
}

/// Builds the ranking cell for `(attack_edges, trial)`. The Sybil region is a
/// copy of the benign region, or a generated region of the first configured
/// Sybil size (the benign size when none is set).
pub fn ranking_cell(
    config: &ExperimentConfig,
    benign: &BenignRegion,
    attack_edges: usize,
    trial: usize,
) -> Result<RankingCell, Error> {
    let nb = benign.graph.node_count();
    let sybil_size = match config.scenario.sybil {
        SybilSource::Duplicate => nb,
        SybilSource::Generated(_) => config
            .scenario
            .sybil_sizes
            .as_ref()
            .and_then(|s| s.first().copied())
            .unwrap_or(nb),
    };
    let seeds = CellSeeds::derive(config.run.seed, attack_edges, sybil_size, trial);
    let scenario = match config.scenario.sybil {
        SybilSource::Duplicate => duplicate_region_scenario(&benign.graph, attack_edges, seeds.attack_edges)?,
        SybilSource::Generated(_) => {
            let sybil = sybil_spec(config)
                .with_nodes(sybil_size)
                .with_seed(seeds.sybil_region)
                .generate()?;
            compose_regions(&benign.graph, &sybil, attack_edges, seeds.attack_edges)?
        }
    };
    let plan = label_plan(config, benign, DetectorKind::SbNoisy);
    let clean = plan.sample(&scenario, seeds.labels)?;
    let noisy = plan.corrupt(&clean, seeds.noise)?;
    Ok(RankingCell {
        attack_edges,
        trial,
        scenario,
        clean,
        noisy,
        seeds,
    })
}

/// AUC of every detector in `kinds` per `(attack_edges, trial)`.
///
/// Returns `(attack_edges, trial, aucs)` in sorted order, `aucs` aligned with
/// `kinds`. Labeled nodes are excluded from the AUC.
pub fn auc_table(config: &ExperimentConfig, kinds: &[DetectorKind]) -> Result<Vec<(usize, usize, Vec<f64>)>, Error> {
    config.validate()?;
    for &k in kinds {
        config.validate_detector(k)?;
    }
    with_jobs(config.run.jobs, || {
        let benign = build_benign(config)?;
        let cells: Vec<(usize, usize)> = config
            .scenario
            .attack_edges
            .iter()
            .flat_map(|&ae| (0..config.run.trials).map(move |t| (ae, t)))
            .collect();
        let dump = config.run.out.as_deref().filter(|_| config.run.dump);
        cells
            .par_iter()
            .map(|&(ae, t)| {
                let run = || -> Result<Vec<f64>, Error> {
                    let cell = ranking_cell(config, &benign, ae, t)?;
                    let exclude = cell.clean.nodes();
                    kinds
                        .iter()
                        .map(|&k| {
                            let labels = if k.is_noisy() { &cell.noisy } else { &cell.clean };
                            let s = score(config, k, cell.scenario.graph(), labels, cell.seeds.detector)?;
                            if let Some(dir) = dump {
                                dump_scores(dir, k, ae, t, &s)?;
                            }
                            auc(&s, &cell.scenario, &exclude)
                        })
                        .collect()
                };
                let aucs = run().map_err(|e| e.in_cell(format!("attack_edges={ae} trial={t}")))?;
                Ok((ae, t, aucs))
            })
            .collect()
    })
}

fn dump_scores(dir: &Path, kind: DetectorKind, ae: usize, trial: usize, s: &ScoreVector) -> Result<(), Error> {
    let name = format!("scores_{kind}_a{ae}_t{trial}.txt");
    io::write_file(&dir.join(name), |w| io::write_scores(s, w))
}

/// AUC study over the attack-edge counts: one row per `(attack_edges, trial)`
/// and a mean row per attack-edge count, one `auc_<detector>` column each.
pub fn run_comparison(config: &ExperimentConfig, kinds: &[DetectorKind]) -> Result<String, Error> {
    comparison_csv(kinds, &auc_table(config, kinds)?)
}

/// CSV form of [`auc_table`].
pub fn comparison_csv(kinds: &[DetectorKind], table: &[(usize, usize, Vec<f64>)]) -> Result<String, Error> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["attack_edges".to_string(), "row".into(), "trial".into()];
    header.extend(kinds.iter().map(|k| format!("auc_{k}")));
    w.write_record(&header)?;
    let means = mean_aucs(table, kinds.len());
    for (i, (ae, t, aucs)) in table.iter().enumerate() {
        let mut rec = vec![ae.to_string(), "trial".into(), t.to_string()];
        rec.extend(aucs.iter().map(|&a| fmt_num(a)));
        w.write_record(&rec)?;
        if table.get(i + 1).is_none_or(|next| next.0 != *ae) {
            let mut rec = vec![ae.to_string(), "mean".into(), String::new()];
            rec.extend(means[ae].iter().map(|&a| fmt_num(a)));
            w.write_record(&rec)?;
        }
    }
    finish(w)
}

/// Mean AUC per attack-edge count, aligned with `kinds`.
pub fn mean_aucs(table: &[(usize, usize, Vec<f64>)], kinds: usize) -> BTreeMap<usize, Vec<f64>> {
    let mut sums: BTreeMap<usize, (Vec<f64>, usize)> = BTreeMap::new();
    for (ae, _, aucs) in table {
        let e = sums.entry(*ae).or_insert_with(|| (vec![0.0; kinds], 0));
        for (s, a) in e.0.iter_mut().zip(aucs) {
            *s += a;
        }
        e.1 += 1;
    }
    sums.into_iter()
        .map(|(ae, (s, n))| (ae, s.into_iter().map(|x| x / n as f64).collect()))
        .collect()
}

fn fmt_num(x: f64) -> String {
    format!("{x:.6}")
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<String, Error> {
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}
