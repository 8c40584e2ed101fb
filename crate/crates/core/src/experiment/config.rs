//! Line-oriented experiment configuration.
//!
//! One `section.key = value` per line; `#` starts a comment. Lists are
//! comma-separated. Every key has a default except `scenario.attack_edges`,
//! `labels.benign` and `labels.sybil`.
//!
//! | key | default |
//! |-----|---------|
//! | `scenario.benign` | `pa` (`pa`, `er`, `communities`, `file`) |
//! | `scenario.benign_nodes` | `1000` (split evenly across communities) |
//! | `scenario.benign_avg_degree` | `10` |
//! | `scenario.communities` | `1` |
//! | `scenario.inter_edges` | `10` |
//! | `scenario.dataset` | required when `scenario.benign = file` |
//! | `scenario.sybil` | `pa` (`pa`, `er`, `duplicate`) |
//! | `scenario.sybil_avg_degree` | `10` |
//! | `scenario.sybil_sizes` | geometric grid around the benign size |
//! | `scenario.attack_edges` | required, list |
//! | `labels.benign`, `labels.sybil` | required |
//! | `labels.benign_site`, `labels.sybil_site` | `uniform` (`si`, `sii`) |
//! | `labels.benign_flips`, `labels.sybil_flips` | 10% of the label count, used by `-N` detectors only |
//! | `detector.kind` | `SB` |
//! | `sybilbelief.w` / `.theta` / `.theta_labeled` | `0.9` / `0.5` / `0.5` |
//! | `sybilbelief.max_iters` / `.tol` | `10` / `1e-3` |
//! | `sybilbelief.boost_trials` / `.boost_samples` | `10` / `10` |
//! | `sybilbelief.boost_include_labeled` | `false` |
//! | `sybilrank.log_base` | `2` (`2` or `e`) |
//! | `cia.alpha` / `.tol` / `.max_iters` | `0.85` / `1e-6` / `1000` |
//! | `metric.kind` | `classification` (`auc`) |
//! | `run.trials` / `.seed` / `.jobs` | `10` / `0` / `1` |
//! | `run.out` | unset |
//! | `run.dump` | `false` |

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::path::PathBuf;
use std::str::FromStr;

use thiserror::Error;

use crate::baselines::{CiaOptions, LogBase};
use crate::labels::SitePolicy;
use crate::sybilbelief::{BoostOptions, LbpOptions, MrfParams, Normalization};
use crate::synth::GeneratorKind;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: unknown key {key:?}")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: key {key:?} given twice")]
    Duplicate { line: usize, key: String },
    #[error("line {line}: {key} = {value:?}: {message}")]
    Value {
        line: usize,
        key: String,
        value: String,
        message: String,
    },
    #[error("missing required key {0}")]
    Missing(&'static str),
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

/// The algorithm roster.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DetectorKind {
    /// SybilBelief with benign and Sybil labels.
    Sb,
    /// SybilBelief with corrupted labels.
    SbNoisy,
    /// SybilBelief boosted from benign labels only.
    SbBoost,
    SybilRank,
    SybilRankNoisy,
    Cia,
    CiaNoisy,
    Random,
}

impl DetectorKind {
    pub const ALL: [DetectorKind; 8] = [
        DetectorKind::Sb,
        DetectorKind::SbNoisy,
        DetectorKind::SbBoost,
        DetectorKind::SybilRank,
        DetectorKind::SybilRankNoisy,
        DetectorKind::Cia,
        DetectorKind::CiaNoisy,
        DetectorKind::Random,
    ];

    pub fn name(self) -> &'static str {
        match self {
            DetectorKind::Sb => "SB",
            DetectorKind::SbNoisy => "SB-N",
            DetectorKind::SbBoost => "SB-B",
            DetectorKind::SybilRank => "SR",
            DetectorKind::SybilRankNoisy => "SR-N",
            DetectorKind::Cia => "CIA",
            DetectorKind::CiaNoisy => "CIA-N",
            DetectorKind::Random => "Random",
        }
    }

    /// Runs on corrupted labels.
    pub fn is_noisy(self) -> bool {
        matches!(
            self,
            DetectorKind::SbNoisy | DetectorKind::SybilRankNoisy | DetectorKind::CiaNoisy
        )
    }

    /// Produces a benign/Sybil classification, not only a ranking.
    pub fn classifies(self) -> bool {
        matches!(self, DetectorKind::Sb | DetectorKind::SbNoisy | DetectorKind::SbBoost)
    }
}

impl fmt::Display for DetectorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DetectorKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        DetectorKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown detector {s:?}"))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum BenignSource {
    Generated { kind: GeneratorKind },
    Communities { count: usize, inter_edges: usize },
    /// Edge list file; its largest connected component is used.
    Dataset(PathBuf),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SybilSource {
    Generated(GeneratorKind),
    /// The Sybil region is a copy of the benign region.
    Duplicate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub benign: BenignSource,
    pub benign_nodes: usize,
    pub benign_avg_degree: f64,
    pub sybil: SybilSource,
    pub sybil_avg_degree: f64,
    pub sybil_sizes: Option<Vec<usize>>,
    pub attack_edges: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabelConfig {
    pub benign: usize,
    pub sybil: usize,
    pub benign_site: SitePolicy,
    pub sybil_site: SitePolicy,
    pub benign_flips: Option<usize>,
    pub sybil_flips: Option<usize>,
}

impl LabelConfig {
    /// Flips applied for noisy detectors: the configured counts, or 10% of
    /// each label count.
    pub fn flips(&self) -> (usize, usize) {
        (
            self.benign_flips.unwrap_or(self.benign / 10),
            self.sybil_flips.unwrap_or(self.sybil / 10),
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SybilBeliefConfig {
    pub w: f64,
    pub theta: f64,
    pub theta_labeled: f64,
    pub max_iters: usize,
    pub tol: f64,
    pub boost_trials: usize,
    pub boost_samples: usize,
    pub boost_include_labeled: bool,
}

impl SybilBeliefConfig {
    pub fn params(&self) -> MrfParams {
        MrfParams {
            theta_default: self.theta,
            theta_labeled: self.theta_labeled,
            w_default: self.w,
            per_edge_w: BTreeMap::new(),
        }
    }

    pub fn lbp(&self) -> LbpOptions {
        LbpOptions {
            max_iters: self.max_iters,
            tol: self.tol,
            normalization: Normalization::PerMessage,
        }
    }

    pub fn boost(&self) -> BoostOptions {
        BoostOptions {
            trials: self.boost_trials,
            samples_per_trial: self.boost_samples,
            include_labeled: self.boost_include_labeled,
            lbp: self.lbp(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MetricKind {
    /// Accepted Sybils / rejected benign over a Sybil-size sweep.
    Classification,
    /// Area under the ROC curve of the ranking.
    Auc,
}

impl fmt::Display for MetricKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MetricKind::Classification => "classification",
            MetricKind::Auc => "auc",
        })
    }
}

impl FromStr for MetricKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "classification" => Ok(MetricKind::Classification),
            "auc" => Ok(MetricKind::Auc),
            other => Err(format!("unknown metric {other:?} (expected classification or auc)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub trials: usize,
    pub seed: u64,
    pub jobs: usize,
    pub out: Option<PathBuf>,
    pub dump: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub scenario: ScenarioConfig,
    pub labels: LabelConfig,
    pub detector: DetectorKind,
    pub sybilbelief: SybilBeliefConfig,
    pub sybilrank_log_base: LogBase,
    pub cia: CiaOptions,
    pub metric: MetricKind,
    pub run: RunConfig,
}

const KEYS: &[&str] = &[
    "scenario.benign",
    "scenario.benign_nodes",
    "scenario.benign_avg_degree",
    "scenario.communities",
    "scenario.inter_edges",
    "scenario.dataset",
    "scenario.sybil",
    "scenario.sybil_avg_degree",
    "scenario.sybil_sizes",
    "scenario.attack_edges",
    "labels.benign",
    "labels.sybil",
    "labels.benign_site",
    "labels.sybil_site",
    "labels.benign_flips",
    "labels.sybil_flips",
    "detector.kind",
    "sybilbelief.w",
    "sybilbelief.theta",
    "sybilbelief.theta_labeled",
    "sybilbelief.max_iters",
    "sybilbelief.tol",
    "sybilbelief.boost_trials",
    "sybilbelief.boost_samples",
    "sybilbelief.boost_include_labeled",
    "sybilrank.log_base",
    "cia.alpha",
    "cia.tol",
    "cia.max_iters",
    "metric.kind",
    "run.trials",
    "run.seed",
    "run.jobs",
    "run.out",
    "run.dump",
];

/// Raw key/value pairs with their line numbers.
struct Entries(BTreeMap<String, (usize, String)>);

impl Entries {
    fn take<T: FromStr>(&mut self, key: &'static str) -> Result<Option<T>, ConfigError>
    where
        T::Err: fmt::Display,
    {
        match self.0.remove(key) {
            None => Ok(None),
            Some((line, value)) => value.parse().map(Some).map_err(|e: T::Err| ConfigError::Value {
                line,
                key: key.into(),
                message: e.to_string(),
                value,
            }),
        }
    }

    fn or<T: FromStr>(&mut self, key: &'static str, default: T) -> Result<T, ConfigError>
    where
        T::Err: fmt::Display,
    {
        Ok(self.take(key)?.unwrap_or(default))
    }

    fn required<T: FromStr>(&mut self, key: &'static str) -> Result<T, ConfigError>
    where
        T::Err: fmt::Display,
    {
        self.take(key)?.ok_or(ConfigError::Missing(key))
    }

    fn list(&mut self, key: &'static str) -> Result<Option<Vec<usize>>, ConfigError> {
        match self.0.remove(key) {
            None => Ok(None),
            Some((line, value)) => value
                .split(',')
                .map(|t| t.trim().parse::<usize>())
                .collect::<Result<Vec<_>, _>>()
                .map(Some)
                .map_err(|e| ConfigError::Value {
                    line,
                    key: key.into(),
                    message: e.to_string(),
                    value,
                }),
        }
    }
}

/// Parses and validates a configuration.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let mut raw = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let lineno = i + 1;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let (key, value) = t.split_once('=').ok_or_else(|| ConfigError::Syntax {
            line: lineno,
            message: "expected `section.key = value`".into(),
        })?;
        let key = key.trim();
        let value = value.trim();
        if !KEYS.contains(&key) {
            return Err(ConfigError::UnknownKey {
                line: lineno,
                key: key.into(),
            });
        }
        if raw.insert(key.to_string(), (lineno, value.to_string())).is_some() {
            return Err(ConfigError::Duplicate {
                line: lineno,
                key: key.into(),
            });
        }
    }
    let mut e = Entries(raw);

    let benign_kind: String = e.or("scenario.benign", "pa".to_string())?;
    let communities: usize = e.or("scenario.communities", 1)?;
    let inter_edges: usize = e.or("scenario.inter_edges", 10)?;
    let dataset: Option<PathBuf> = e.take("scenario.dataset")?;
    let benign = match benign_kind.as_str() {
        "communities" => BenignSource::Communities {
            count: communities,
            inter_edges,
        },
        "file" => BenignSource::Dataset(dataset.clone().ok_or(ConfigError::Missing("scenario.dataset"))?),
        other => BenignSource::Generated {
            kind: other.parse().map_err(ConfigError::Invalid)?,
        },
    };
    let sybil_kind: String = e.or("scenario.sybil", "pa".to_string())?;
    let sybil = match sybil_kind.as_str() {
        "duplicate" => SybilSource::Duplicate,
        other => SybilSource::Generated(other.parse().map_err(ConfigError::Invalid)?),
    };
    let scenario = ScenarioConfig {
        benign,
        benign_nodes: e.or("scenario.benign_nodes", 1000)?,
        benign_avg_degree: e.or("scenario.benign_avg_degree", 10.0)?,
        sybil,
        sybil_avg_degree: e.or("scenario.sybil_avg_degree", 10.0)?,
        sybil_sizes: e.list("scenario.sybil_sizes")?,
        attack_edges: e.list("scenario.attack_edges")?.ok_or(ConfigError::Missing("scenario.attack_edges"))?,
    };
    let labels = LabelConfig {
        benign: e.required("labels.benign")?,
        sybil: e.required("labels.sybil")?,
        benign_site: e.or("labels.benign_site", SitePolicy::Uniform)?,
        sybil_site: e.or("labels.sybil_site", SitePolicy::Uniform)?,
        benign_flips: e.take("labels.benign_flips")?,
        sybil_flips: e.take("labels.sybil_flips")?,
    };
    let detector = e.or("detector.kind", DetectorKind::Sb)?;
    let sybilbelief = SybilBeliefConfig {
        w: e.or("sybilbelief.w", 0.9)?,
        theta: e.or("sybilbelief.theta", 0.5)?,
        theta_labeled: e.or("sybilbelief.theta_labeled", 0.5)?,
        max_iters: e.or("sybilbelief.max_iters", 10)?,
        tol: e.or("sybilbelief.tol", 1e-3)?,
        boost_trials: e.or("sybilbelief.boost_trials", 10)?,
        boost_samples: e.or("sybilbelief.boost_samples", 10)?,
        boost_include_labeled: e.or("sybilbelief.boost_include_labeled", false)?,
    };
    let sybilrank_log_base = e.or("sybilrank.log_base", LogBase::Two)?;
    let cia = CiaOptions {
        alpha: e.or("cia.alpha", 0.85)?,
        tol: e.or("cia.tol", 1e-6)?,
        max_iters: e.or("cia.max_iters", 1000)?,
    };
    let metric = e.or("metric.kind", MetricKind::Classification)?;
    let run = RunConfig {
        trials: e.or("run.trials", 10)?,
        seed: e.or("run.seed", 0)?,
        jobs: e.or("run.jobs", 1)?,
        out: e.take("run.out")?,
        dump: e.or("run.dump", false)?,
    };
    debug_assert!(e.0.is_empty(), "unconsumed keys {:?}", e.0.keys());

    let config = ExperimentConfig {
        scenario,
        labels,
        detector,
        sybilbelief,
        sybilrank_log_base,
        cia,
        metric,
        run,
    };
    config.validate()?;
    Ok(config)
}

impl ExperimentConfig {
    /// Checks cross-key constraints.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: String| Err(ConfigError::Invalid(m));
        self.validate_detector(self.detector)?;
        if self.metric == MetricKind::Classification {
            if !self.detector.classifies() {
                return bad(format!(
                    "the classification metric needs a SybilBelief detector, got {}",
                    self.detector
                ));
            }
            if self.scenario.sybil == SybilSource::Duplicate {
                return bad("the classification metric sweeps a generated Sybil region; use metric.kind = auc with duplicate".into());
            }
        }
        if self.scenario.attack_edges.is_empty() {
            return bad("scenario.attack_edges is empty".into());
        }
        if matches!(self.scenario.sybil_sizes.as_deref(), Some([])) {
            return bad("scenario.sybil_sizes is empty".into());
        }
        if self.run.trials == 0 {
            return bad("run.trials must be at least 1".into());
        }
        if self.run.jobs == 0 {
            return bad("run.jobs must be at least 1".into());
        }
        let (bf, sf) = self.labels.flips();
        if bf > self.labels.benign || sf > self.labels.sybil {
            return bad(format!(
                "cannot flip {bf}+{sf} labels out of {}+{}",
                self.labels.benign, self.labels.sybil
            ));
        }
        if let BenignSource::Dataset(path) = &self.scenario.benign {
            if !path.exists() {
                return bad(format!("dataset {} does not exist", path.display()));
            }
        }
        if let BenignSource::Communities { count, .. } = self.scenario.benign {
            if count == 0 {
                return bad("scenario.communities must be at least 1".into());
            }
            if self.labels.benign < count {
                return bad(format!(
                    "{} benign labels cannot cover {count} communities",
                    self.labels.benign
                ));
            }
        }
        self.sybilbelief
            .params()
            .validate()
            .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        if !(self.cia.alpha >= 0.0 && self.cia.alpha < 1.0) {
            return bad(format!("cia.alpha = {} must lie in [0, 1)", self.cia.alpha));
        }
        Ok(())
    }

    /// Label requirements of one detector.
    pub fn validate_detector(&self, kind: DetectorKind) -> Result<(), ConfigError> {
        let l = &self.labels;
        let msg = match kind {
            DetectorKind::SybilRank | DetectorKind::SybilRankNoisy if l.benign == 0 => {
                Some(format!("{kind} needs benign labels (labels.benign >= 1)"))
            }
            DetectorKind::Cia | DetectorKind::CiaNoisy if l.sybil == 0 => {
                Some(format!("{kind} needs Sybil labels (labels.sybil >= 1)"))
            }
            DetectorKind::SbBoost if l.benign == 0 => Some(format!("{kind} needs benign labels (labels.benign >= 1)")),
            DetectorKind::SbBoost if self.sybilbelief.boost_samples > l.benign => Some(format!(
                "sybilbelief.boost_samples = {} exceeds the {} benign labels",
                self.sybilbelief.boost_samples, l.benign
            )),
            _ => None,
        };
        msg.map_or(Ok(()), |m| Err(ConfigError::Invalid(m)))
    }

    /// Canonical text form; parsing it yields an equal configuration.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let mut put = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        let list = |xs: &[usize]| xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
        let sc = &self.scenario;
        match &sc.benign {
            BenignSource::Generated { kind } => put("scenario.benign", kind.to_string()),
            BenignSource::Communities { count, inter_edges } => {
                put("scenario.benign", "communities".into());
                put("scenario.communities", count.to_string());
                put("scenario.inter_edges", inter_edges.to_string());
            }
            BenignSource::Dataset(p) => {
                put("scenario.benign", "file".into());
                put("scenario.dataset", p.display().to_string());
            }
        }
        put("scenario.benign_nodes", sc.benign_nodes.to_string());
        put("scenario.benign_avg_degree", fmt_f64(sc.benign_avg_degree));
        put(
            "scenario.sybil",
            match sc.sybil {
                SybilSource::Generated(k) => k.to_string(),
                SybilSource::Duplicate => "duplicate".into(),
            },
        );
        put("scenario.sybil_avg_degree", fmt_f64(sc.sybil_avg_degree));
        if let Some(sizes) = &sc.sybil_sizes {
            put("scenario.sybil_sizes", list(sizes));
        }
        put("scenario.attack_edges", list(&sc.attack_edges));
        let l = &self.labels;
        put("labels.benign", l.benign.to_string());
        put("labels.sybil", l.sybil.to_string());
        put("labels.benign_site", l.benign_site.to_string());
        put("labels.sybil_site", l.sybil_site.to_string());
        if let Some(f) = l.benign_flips {
            put("labels.benign_flips", f.to_string());
        }
        if let Some(f) = l.sybil_flips {
            put("labels.sybil_flips", f.to_string());
        }
        put("detector.kind", self.detector.to_string());
        let sb = &self.sybilbelief;
        put("sybilbelief.w", fmt_f64(sb.w));
        put("sybilbelief.theta", fmt_f64(sb.theta));
        put("sybilbelief.theta_labeled", fmt_f64(sb.theta_labeled));
        put("sybilbelief.max_iters", sb.max_iters.to_string());
        put("sybilbelief.tol", fmt_f64(sb.tol));
        put("sybilbelief.boost_trials", sb.boost_trials.to_string());
        put("sybilbelief.boost_samples", sb.boost_samples.to_string());
        put("sybilbelief.boost_include_labeled", sb.boost_include_labeled.to_string());
        put("sybilrank.log_base", self.sybilrank_log_base.to_string());
        put("cia.alpha", fmt_f64(self.cia.alpha));
        put("cia.tol", fmt_f64(self.cia.tol));
        put("cia.max_iters", self.cia.max_iters.to_string());
        put("metric.kind", self.metric.to_string());
        put("run.trials", self.run.trials.to_string());
        put("run.seed", self.run.seed.to_string());
        put("run.jobs", self.run.jobs.to_string());
        if let Some(out) = &self.run.out {
            put("run.out", out.display().to_string());
        }
        put("run.dump", self.run.dump.to_string());
        s
    }
}

/// Shortest representation that parses back to the same value.
fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}
