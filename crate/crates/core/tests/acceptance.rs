//! Acceptance suite: one line per criterion, nonzero exit if any fails.
//!
//! Criterion 11 reruns criteria 1-10 on a different worker count and
//! compares their CSV output byte for byte.

mod common;

use std::fmt::Write as _;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::Rng;
use sybilbelief::eval::{build_cell, LabelPlan, SweepResult};
use sybilbelief::experiment::{
    auc_table, build_benign, comparison_csv, mean_aucs, sweep_csv, sweep_results, sybil_spec, with_jobs,
};
use sybilbelief::{
    build_mrf, detect_noisy_labels, lbp_step_with, parse_config, run_lbp, DetectorKind, Error, ExperimentConfig,
    GeneratorKind, GeneratorSpec, LabelSet, LbpOptions, MessageTable, MrfParams, Normalization, Region,
};

use common::{exact_marginals, random_connected, random_labels, random_tree, rng};

struct Outcome {
    pass: bool,
    detail: String,
    csv: String,
}

type Check = fn(usize) -> Result<Outcome, Error>;

const BASIC: &str = "\
scenario.benign = pa
scenario.benign_nodes = 1000
scenario.benign_avg_degree = 10
scenario.sybil = pa
scenario.sybil_avg_degree = 10
scenario.attack_edges = 500
labels.benign = 1
labels.sybil = 1
sybilbelief.w = 0.9
sybilbelief.max_iters = 10
run.trials = 10
run.seed = 20130521
";

/// The basic setup with `extra` lines appended; later keys replace earlier ones.
fn config(extra: &str, jobs: usize) -> ExperimentConfig {
    let mut lines: Vec<String> = BASIC.lines().map(str::to_owned).collect();
    for line in extra.lines().filter(|l| !l.trim().is_empty()) {
        let key = line.split('=').next().unwrap().trim();
        lines.retain(|l| l.split('=').next().unwrap().trim() != key);
        lines.push(line.to_owned());
    }
    lines.push(format!("run.jobs = {jobs}"));
    parse_config(&lines.join("\n")).expect("acceptance configs are valid")
}

fn sweep(extra: &str, jobs: usize) -> Result<(SweepResult, String), Error> {
    let c = config(extra, jobs);
    let mut r = sweep_results(&c)?;
    let csv = sweep_csv(c.detector, &r)?;
    Ok((r.remove(0).1, csv))
}

/// `max(a, b) <= f * min(a, b)`, treating two zeros as equal.
fn within_factor(a: f64, b: f64, f: f64) -> bool {
    a.max(b) <= f * a.min(b) || (a == 0.0 && b == 0.0)
}

fn means(r: &SweepResult) -> String {
    r.sizes
        .iter()
        .map(|s| format!("{}:{:.1}/{:.1}", s.sybil_size, s.mean_false_negatives, s.mean_false_positives))
        .collect::<Vec<_>>()
        .join(" ")
}

fn c1_tree_oracle(_: usize) -> Result<Outcome, Error> {
    let mut r = rng(1);
    let mut worst = 0.0f64;
    let mut csv = String::from("case,nodes,max_abs_error\n");
    let opts = LbpOptions {
        max_iters: 40,
        tol: 1e-12,
        ..LbpOptions::default()
    };
    for case in 0..200 {
        let n = r.gen_range(1..=15);
        let g = random_tree(&mut r, n);
        let labels = random_labels(&mut r, n, 4);
        let w = r.gen_range(0.05..0.95);
        let model = build_mrf(&g, &labels, MrfParams::with_w(w))?;
        let b = run_lbp(&model, &opts);
        let exact = exact_marginals(&g, &labels, 0.5, w);
        let err = (0..n)
            .map(|v| (b.posterior[v][1] - exact[v][1]).abs())
            .fold(0.0, f64::max);
        worst = worst.max(err);
        let _ = writeln!(csv, "{case},{n},{err:.3e}");
    }
    Ok(Outcome {
        pass: worst <= 1e-6,
        detail: format!("max |LBP - exact| over 200 trees = {worst:.2e} (tol 1e-6)"),
        csv,
    })
}

fn c2_loopy_agreement(_: usize) -> Result<Outcome, Error> {
    let mut r = rng(2);
    let (mut agree, mut total, mut ties) = (0usize, 0usize, 0usize);
    let mut csv = String::from("case,nodes,edges,agree,compared\n");
    for case in 0..200 {
        let n = r.gen_range(2..=12);
        let extra = r.gen_range(1..=n);
        let g = random_connected(&mut r, n, extra);
        let labels = random_labels(&mut r, n, 3);
        let w = r.gen_range(0.6..0.95);
        let b = run_lbp(&build_mrf(&g, &labels, MrfParams::with_w(w))?, &LbpOptions::default());
        let exact = exact_marginals(&g, &labels, 0.5, w);
        let (mut a, mut t) = (0, 0);
        for v in (0..n).filter(|&v| labels.get(v).is_none()) {
            if (exact[v][1] - 0.5).abs() < 1e-9 {
                // exact tie: no argmax to agree with
                ties += 1;
                continue;
            }
            t += 1;
            if (b.posterior[v][1] > 0.5) == (exact[v][1] > 0.5) {
                a += 1;
            }
        }
        agree += a;
        total += t;
        let _ = writeln!(csv, "{case},{n},{},{a},{t}", g.edge_count());
    }
    let rate = agree as f64 / total as f64;
    Ok(Outcome {
        pass: rate >= 0.95,
        detail: format!("argmax agreement {agree}/{total} = {:.2}% ({ties} exact ties skipped)", 100.0 * rate),
        csv,
    })
}

fn c3_basic_false_positives(jobs: usize) -> Result<Outcome, Error> {
    let (r, csv) = sweep("", jobs)?;
    Ok(Outcome {
        pass: r.rejected_benign < 5.0,
        detail: format!(
            "rejected_benign = {:.1} (< 5), accepted_sybils = {:.1}; size:FN/FP {}",
            r.rejected_benign,
            r.accepted_sybils,
            means(&r)
        ),
        csv,
    })
}

fn c4_rise_then_fall(jobs: usize) -> Result<Outcome, Error> {
    let (r, csv) = sweep("", jobs)?;
    let last = r.sizes.len() - 1;
    let peaks: Vec<usize> = (0..10)
        .map(|t| {
            let curve = r.trial_curve(t);
            let top = *curve.iter().max().unwrap();
            curve.iter().position(|&x| x == top).unwrap()
        })
        .collect();
    let interior = peaks.iter().filter(|&&i| i > 0 && i < last).count();
    let mean_curve: Vec<f64> = r.sizes.iter().map(|s| s.mean_false_negatives).collect();
    let mean_peak = (0..mean_curve.len())
        .fold(0, |best, i| if mean_curve[i] > mean_curve[best] { i } else { best });
    Ok(Outcome {
        pass: interior >= 8,
        detail: format!(
            "interior FN peak in {interior}/10 trials (need 8); per-trial peak index {peaks:?}; mean-curve peak index {mean_peak} of 0..={last}"
        ),
        csv,
    })
}

fn c5_phase_transition(jobs: usize) -> Result<Outcome, Error> {
    let ws = [0.55, 0.60, 0.65, 0.70, 0.80, 0.90, 0.95];
    let mut acc = Vec::new();
    let mut csv = String::new();
    for w in ws {
        let (r, c) = sweep(&format!("sybilbelief.w = {w}"), jobs)?;
        acc.push(r.accepted_sybils);
        csv.push_str(&c);
    }
    let at = |w: f64| acc[ws.iter().position(|&x| x == w).unwrap()];
    let base = at(0.90);
    let stable = ws
        .iter()
        .filter(|&&w| w >= 0.70)
        .all(|&w| within_factor(at(w), base, 2.0));
    let low = at(0.55) >= 3.0 * base;
    let table = ws
        .iter()
        .zip(&acc)
        .map(|(w, a)| format!("w={w}:{a:.1}"))
        .collect::<Vec<_>>()
        .join(" ");
    Ok(Outcome {
        pass: stable && low,
        detail: format!("accepted_sybils {table}; w>=0.70 within 2x of w=0.90: {stable}; w=0.55 >= 3x: {low}"),
        csv,
    })
}

fn c6_label_noise(jobs: usize) -> Result<Outcome, Error> {
    let (clean, mut csv) = sweep("labels.benign = 100\nlabels.sybil = 100", jobs)?;
    let (noisy, c) = sweep(
        "labels.benign = 100\nlabels.sybil = 100\nlabels.benign_flips = 49\nlabels.sybil_flips = 49\ndetector.kind = SB-N",
        jobs,
    )?;
    csv.push_str(&c);

    // noisy-label detection at a fixed Sybil size of 1000
    let cfg = config("labels.benign = 100\nlabels.sybil = 100", jobs);
    let plan = LabelPlan::uniform(100, 100).with_flips(49, 49);
    let exact = with_jobs(jobs, || {
        let benign = build_benign(&cfg)?;
        let mut hits = 0;
        for trial in 0..10 {
            let cell = build_cell(&benign.graph, 500, &sybil_spec(&cfg), 1000, &plan, trial, cfg.run.seed)?;
            let model = build_mrf(cell.scenario.graph(), &cell.labels, MrfParams::default())?;
            let flagged = detect_noisy_labels(&model, &run_lbp(&model, &LbpOptions::default()))?;
            let truth = cell.labels.noisy_nodes();
            let missed = truth.difference(&flagged).count();
            let wrong = flagged.difference(truth).count();
            csv.push_str(&format!("detect,{trial},{},{},{missed},{wrong}\n", truth.len(), flagged.len()));
            if missed == 0 && wrong == 0 {
                hits += 1;
            }
        }
        Ok(hits)
    })?;

    let acc_ok = noisy.accepted_sybils <= 4.0 * clean.accepted_sybils;
    let rej_ok = noisy.rejected_benign <= 3.0;
    Ok(Outcome {
        pass: acc_ok && rej_ok && exact >= 9,
        detail: format!(
            "accepted {:.1} vs noiseless {:.1} (<= 4x: {acc_ok}); rejected {:.1} (<= 3: {rej_ok}); flipped set recovered exactly in {exact}/10 trials (need 9)",
            noisy.accepted_sybils, clean.accepted_sybils, noisy.rejected_benign
        ),
        csv,
    })
}

fn c7_communities(jobs: usize) -> Result<Outcome, Error> {
    let mut acc = Vec::new();
    let mut rej = Vec::new();
    let mut csv = String::new();
    for k in [1, 2, 4, 8] {
        let (r, c) = sweep(
            &format!(
                "scenario.benign = communities\nscenario.communities = {k}\nscenario.inter_edges = 10\nlabels.benign = 10\nlabels.sybil = 1"
            ),
            jobs,
        )?;
        acc.push(r.accepted_sybils);
        rej.push(r.rejected_benign);
        csv.push_str(&c);
    }
    let hi = acc.iter().copied().fold(f64::MIN, f64::max);
    let lo = acc.iter().copied().fold(f64::MAX, f64::min);
    let spread = hi < 2.0 * lo || hi == 0.0;
    let rej_ok = rej.iter().all(|&r| r <= 5.0);
    Ok(Outcome {
        pass: spread && rej_ok,
        detail: format!(
            "k=1,2,4,8 accepted {acc:.1?} (max < 2x min: {spread}); rejected {rej:.1?} (<= 5: {rej_ok})"
        ),
        csv,
    })
}

fn c8_boosting(jobs: usize) -> Result<Outcome, Error> {
    let (sb, mut csv) = sweep("labels.benign = 100\nlabels.sybil = 10", jobs)?;
    let (sbb, c) = sweep(
        "labels.benign = 100\nlabels.sybil = 0\ndetector.kind = SB-B\nsybilbelief.boost_trials = 10\nsybilbelief.boost_samples = 10",
        jobs,
    )?;
    csv.push_str(&c);
    Ok(Outcome {
        pass: within_factor(sbb.accepted_sybils, sb.accepted_sybils, 2.0),
        detail: format!(
            "accepted SB-B {:.1} vs SB {:.1} (within 2x); rejected SB-B {:.1}, SB {:.1}",
            sbb.accepted_sybils, sb.accepted_sybils, sbb.rejected_benign, sb.rejected_benign
        ),
        csv,
    })
}

fn c9_ranking(jobs: usize) -> Result<Outcome, Error> {
    use DetectorKind::*;
    let cfg = config(
        "scenario.benign_nodes = 5000\nscenario.sybil = duplicate\nscenario.attack_edges = 500,2000,8000\n\
         labels.benign = 100\nlabels.sybil = 100\nlabels.benign_flips = 10\nlabels.sybil_flips = 10\nmetric.kind = auc",
        jobs,
    );
    let kinds = [Sb, SbNoisy, SybilRank, SybilRankNoisy, Cia, CiaNoisy, Random];
    let table = auc_table(&cfg, &kinds)?;
    let csv = comparison_csv(&kinds, &table)?;
    let means = mean_aucs(&table, kinds.len());
    let col = |m: &Vec<f64>, k: DetectorKind| m[kinds.iter().position(|&x| x == k).unwrap()];
    let top = &means[&8000];
    let order = col(top, Sb) >= col(top, Cia) && col(top, Cia) >= col(top, SybilRank);
    let mut random_ok = true;
    let mut noise_ok = true;
    let mut detail = String::new();
    for (ae, m) in &means {
        random_ok &= (col(m, Random) - 0.5).abs() <= 0.02;
        noise_ok &= (col(m, SbNoisy) - col(m, Sb)).abs() <= 0.02
            && col(m, SybilRank) - col(m, SybilRankNoisy) >= 0.05
            && col(m, Cia) - col(m, CiaNoisy) >= 0.05;
        let _ = write!(detail, "[ae={ae}");
        for k in kinds {
            let _ = write!(detail, " {k}={:.3}", col(m, k));
        }
        detail.push_str("] ");
    }
    Ok(Outcome {
        pass: order && random_ok && noise_ok,
        detail: format!("{detail}SB>=CIA>=SR at 8000: {order}; Random 0.5+-0.02: {random_ok}; noise effects: {noise_ok}"),
        csv,
    })
}

fn c10_scale(_: usize) -> Result<Outcome, Error> {
    // C(6,2) + (n - 6) * 5 = 10^6 edges
    let n = 200_003;
    let g = GeneratorSpec::new(GeneratorKind::Pa, n, 10.0, 10).generate()?;
    let m = g.edge_count();
    let labels = LabelSet::from_pairs([(0, Region::Benign), (n - 1, Region::Sybil)]);
    let model = build_mrf(&g, &labels, MrfParams::default())?;
    let opts = LbpOptions {
        max_iters: 10,
        tol: 0.0,
        ..LbpOptions::default()
    };
    let (beliefs, elapsed, stats) = with_jobs(1, || {
        let start = Instant::now();
        let b = run_lbp(&model, &opts);
        let elapsed = start.elapsed();
        let (_, stats) = lbp_step_with(&model, &MessageTable::uniform(g.slot_count()), Normalization::PerMessage);
        Ok((b, elapsed, stats))
    })?;
    let checksum: f64 = beliefs.posterior.iter().map(|p| p[1]).sum();
    let pass = m == 1_000_000
        && beliefs.iterations_run == 10
        && stats.messages_computed == 2 * m
        && elapsed < Duration::from_secs(30);
    Ok(Outcome {
        pass,
        detail: format!(
            "m = {m}; 10 iterations in {:.2} s single-worker (< 30 s); touches per iteration {} (2m = {})",
            elapsed.as_secs_f64(),
            stats.messages_computed,
            2 * m
        ),
        csv: format!(
            "edges,iterations,touches,sum_p_benign\n{m},{},{},{checksum:.9}\n",
            beliefs.iterations_run, stats.messages_computed
        ),
    })
}

const CRITERIA: [(&str, Check, Duration); 10] = [
    ("tree oracle equivalence", c1_tree_oracle, Duration::from_secs(10)),
    ("loopy argmax agreement", c2_loopy_agreement, Duration::from_secs(60)),
    ("basic-setup false positives", c3_basic_false_positives, Duration::from_secs(120)),
    ("rise-then-fall", c4_rise_then_fall, Duration::from_secs(120)),
    ("phase transition in w", c5_phase_transition, Duration::MAX),
    ("label-noise tolerance", c6_label_noise, Duration::MAX),
    ("community robustness", c7_communities, Duration::MAX),
    ("boosting parity", c8_boosting, Duration::MAX),
    ("ranking comparison", c9_ranking, Duration::from_secs(300)),
    ("complexity and scale", c10_scale, Duration::MAX),
];

fn main() -> ExitCode {
    let filter: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let selected = |i: usize| filter.is_empty() || filter.contains(&i);
    let mut failed = 0;
    let mut outputs = Vec::new();
    for (i, (name, check, limit)) in CRITERIA.iter().enumerate() {
        let id = i + 1;
        if !selected(id) {
            continue;
        }
        let start = Instant::now();
        let result = check(1);
        let elapsed = start.elapsed();
        let (pass, detail) = match &result {
            Ok(o) => (o.pass && elapsed < *limit, o.detail.clone()),
            Err(e) => (false, format!("error: {e}")),
        };
        let budget = if *limit == Duration::MAX {
            String::new()
        } else {
            format!(", limit {} s", limit.as_secs())
        };
        println!(
            "criterion {id:>2} {:<30} {}  {detail} [{:.1} s{budget}]",
            name,
            if pass { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64()
        );
        if !pass {
            failed += 1;
        }
        outputs.push((id, result.ok().map(|o| o.csv)));
    }

    if selected(11) {
        let mut differing = Vec::new();
        for (id, first) in &outputs {
            let again = CRITERIA[id - 1].1(3).ok().map(|o| o.csv);
            if first.is_none() || again != *first {
                differing.push(*id);
            }
        }
        let pass = differing.is_empty();
        println!(
            "criterion 11 {:<30} {}  reran {} criteria with 3 workers; differing CSV: {differing:?}",
            "determinism",
            if pass { "PASS" } else { "FAIL" },
            outputs.len()
        );
        if !pass {
            failed += 1;
        }
    }

    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
