//! Plain-text formats for scenarios, label sets, beliefs and score vectors.
//!
//! * scenario: `<prefix>.edges` (edge list), `<prefix>.regions` (`node B|S`)
//!   and `<prefix>.attack` (edge list of the crossing edges)
//! * labels: `node B|S noise_flag`
//! * beliefs: `node p_sybil p_benign`, 9 decimals, after a `#` metadata line
//! * scores: `node score` in 9-digit scientific notation, after a
//!   `# provenance=...` line

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::baselines::ScoreVector;
use crate::graph::{load_edge_list, write_edge_list, Graph, NodeId};
use crate::labels::LabelSet;
use crate::scenario::{Region, ScenarioGraph};
use crate::sybilbelief::Beliefs;
use crate::Error;

fn format_err(line: usize, message: impl Into<String>) -> Error {
    Error::Format {
        line,
        message: message.into(),
    }
}

/// Non-comment, non-blank lines with their 1-based numbers, split on whitespace.
fn records<R: BufRead>(reader: R) -> impl Iterator<Item = Result<(usize, Vec<String>), Error>> {
    reader.lines().enumerate().filter_map(|(i, line)| match line {
        Err(e) => Some(Err(Error::Io(e))),
        Ok(line) => {
            let t = line.trim();
            if t.is_empty() || t.starts_with('#') {
                None
            } else {
                Some(Ok((i + 1, t.split_whitespace().map(str::to_owned).collect())))
            }
        }
    })
}

fn parse_field<T: std::str::FromStr>(line: usize, tok: &str, what: &str) -> Result<T, Error> {
    tok.parse()
        .map_err(|_| format_err(line, format!("invalid {what} {tok:?}")))
}

fn expect_fields(line: usize, fields: &[String], n: usize) -> Result<(), Error> {
    if fields.len() != n {
        Err(format_err(line, format!("expected {n} fields, found {}", fields.len())))
    } else {
        Ok(())
    }
}

pub fn write_regions<W: Write>(scenario: &ScenarioGraph, out: W) -> std::io::Result<()> {
    write_predictions(scenario.regions(), out)
}

/// One `node B|S` line per node; the format shared by region files and
/// classifier output.
pub fn write_predictions<W: Write>(regions: &[Region], mut out: W) -> std::io::Result<()> {
    for (v, r) in regions.iter().enumerate() {
        writeln!(out, "{v} {r}")?;
    }
    Ok(())
}

/// Region map; node ids must be exactly `0..n` in any order.
pub fn read_regions<R: BufRead>(reader: R) -> Result<Vec<Region>, Error> {
    let mut pairs = Vec::new();
    for rec in records(reader) {
        let (line, f) = rec?;
        expect_fields(line, &f, 2)?;
        let v: NodeId = parse_field(line, &f[0], "node id")?;
        let r: Region = f[1].parse().map_err(|e: String| format_err(line, e))?;
        pairs.push((line, v, r));
    }
    let mut region = vec![None; pairs.len()];
    for (line, v, r) in pairs {
        match region.get_mut(v) {
            Some(slot @ None) => *slot = Some(r),
            Some(Some(_)) => return Err(format_err(line, format!("node {v} listed twice"))),
            None => return Err(format_err(line, format!("node {v} outside 0..{}", region.len()))),
        }
    }
    Ok(region.into_iter().map(|r| r.expect("every slot filled")).collect())
}

pub fn scenario_paths(prefix: &Path) -> [PathBuf; 3] {
    let with = |ext: &str| {
        let mut p = prefix.as_os_str().to_owned();
        p.push(ext);
        PathBuf::from(p)
    };
    [with(".edges"), with(".regions"), with(".attack")]
}

pub fn save_scenario(scenario: &ScenarioGraph, prefix: &Path) -> Result<(), Error> {
    let [edges, regions, attack] = scenario_paths(prefix);
    let mut w = BufWriter::new(File::create(edges)?);
    write_edge_list(scenario.graph(), &mut w)?;
    w.flush()?;
    let mut w = BufWriter::new(File::create(regions)?);
    write_regions(scenario, &mut w)?;
    w.flush()?;
    let mut w = BufWriter::new(File::create(attack)?);
    for &(u, v) in scenario.attack_edges() {
        writeln!(w, "{u} {v}")?;
    }
    w.flush()?;
    Ok(())
}

/// Loads the three scenario files and checks that the attack-edge file
/// matches the region-crossing edges.
pub fn load_scenario(prefix: &Path) -> Result<ScenarioGraph, Error> {
    let [edges, regions, attack] = scenario_paths(prefix);
    let region = read_regions(BufReader::new(File::open(regions)?))?;
    let loaded = load_edge_list(BufReader::new(File::open(edges)?))?;
    let graph = Graph::new(region.len(), loaded.edges().iter().copied())?;
    let scenario = ScenarioGraph::new(graph, region);
    let listed = load_edge_list(BufReader::new(File::open(attack)?))?;
    if listed.edges() != scenario.attack_edges() {
        return Err(format_err(
            0,
            format!(
                "attack-edge file lists {} edges but {} edges cross the region map",
                listed.edge_count(),
                scenario.attack_edges().len()
            ),
        ));
    }
    Ok(scenario)
}

pub fn write_labels<W: Write>(labels: &LabelSet, mut out: W) -> std::io::Result<()> {
    for (v, tag) in labels.iter() {
        writeln!(out, "{v} {tag} {}", u8::from(labels.is_noisy(v)))?;
    }
    Ok(())
}

pub fn read_labels<R: BufRead>(reader: R) -> Result<LabelSet, Error> {
    let mut labels = LabelSet::new();
    for rec in records(reader) {
        let (line, f) = rec?;
        expect_fields(line, &f, 3)?;
        let v: NodeId = parse_field(line, &f[0], "node id")?;
        let tag: Region = f[1].parse().map_err(|e: String| format_err(line, e))?;
        let noisy = match f[2].as_str() {
            "0" => false,
            "1" => true,
            other => return Err(format_err(line, format!("invalid noise flag {other:?}"))),
        };
        if labels.get(v).is_some() {
            return Err(format_err(line, format!("node {v} labeled twice")));
        }
        labels.insert(v, tag, noisy);
    }
    Ok(labels)
}

pub fn write_beliefs<W: Write>(beliefs: &Beliefs, mut out: W) -> std::io::Result<()> {
    writeln!(
        out,
        "# iterations={} converged={} final_delta={:.9e}",
        beliefs.iterations_run, beliefs.converged, beliefs.final_delta
    )?;
    for (v, p) in beliefs.posterior.iter().enumerate() {
        writeln!(out, "{v} {:.9} {:.9}", p[0], p[1])?;
    }
    Ok(())
}

/// Reads a beliefs dump; node ids must run `0..n` in order.
pub fn read_beliefs<R: BufRead>(reader: R) -> Result<Beliefs, Error> {
    let mut beliefs = Beliefs {
        posterior: Vec::new(),
        iterations_run: 0,
        converged: false,
        final_delta: 0.0,
        messages: None,
    };
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = i + 1;
        let t = line.trim();
        if let Some(meta) = t.strip_prefix('#') {
            for kv in meta.split_whitespace() {
                match kv.split_once('=') {
                    Some(("iterations", x)) => beliefs.iterations_run = parse_field(lineno, x, "iterations")?,
                    Some(("converged", x)) => beliefs.converged = parse_field(lineno, x, "converged flag")?,
                    Some(("final_delta", x)) => beliefs.final_delta = parse_field(lineno, x, "delta")?,
                    _ => {}
                }
            }
            continue;
        }
        if t.is_empty() {
            continue;
        }
        let f: Vec<&str> = t.split_whitespace().collect();
        if f.len() != 3 {
            return Err(format_err(lineno, format!("expected 3 fields, found {}", f.len())));
        }
        let v: NodeId = parse_field(lineno, f[0], "node id")?;
        if v != beliefs.posterior.len() {
            return Err(format_err(lineno, format!("expected node {}, found {v}", beliefs.posterior.len())));
        }
        let ps: f64 = parse_field(lineno, f[1], "probability")?;
        let pb: f64 = parse_field(lineno, f[2], "probability")?;
        beliefs.posterior.push([ps, pb]);
    }
    Ok(beliefs)
}

pub fn write_scores<W: Write>(scores: &ScoreVector, mut out: W) -> std::io::Result<()> {
    writeln!(out, "# provenance={}", scores.provenance)?;
    for (v, s) in scores.scores.iter().enumerate() {
        writeln!(out, "{v} {s:.9e}")?;
    }
    Ok(())
}

pub fn read_scores<R: BufRead>(reader: R) -> Result<ScoreVector, Error> {
    let mut provenance = None;
    let mut scores = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = i + 1;
        let t = line.trim();
        if let Some(meta) = t.strip_prefix('#') {
            if let Some(p) = meta.trim().strip_prefix("provenance=") {
                provenance = Some(p.parse().map_err(|e: String| format_err(lineno, e))?);
            }
            continue;
        }
        if t.is_empty() {
            continue;
        }
        let f: Vec<&str> = t.split_whitespace().collect();
        if f.len() != 2 {
            return Err(format_err(lineno, format!("expected 2 fields, found {}", f.len())));
        }
        let v: NodeId = parse_field(lineno, f[0], "node id")?;
        if v != scores.len() {
            return Err(format_err(lineno, format!("expected node {}, found {v}", scores.len())));
        }
        scores.push(parse_field(lineno, f[1], "score")?);
    }
    Ok(ScoreVector {
        scores,
        provenance: provenance.ok_or_else(|| format_err(1, "missing provenance header"))?,
    })
}

/// Opens `path` for buffered reading.
pub fn open(path: &Path) -> Result<BufReader<File>, Error> {
    Ok(BufReader::new(File::open(path)?))
}

/// Writes a file through `f` with a buffered writer.
pub fn write_file<F>(path: &Path, f: F) -> Result<(), Error>
where
    F: FnOnce(&mut BufWriter<File>) -> std::io::Result<()>,
{
    let mut w = BufWriter::new(File::create(path)?);
    f(&mut w)?;
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{compose_regions, gen_pa, GeneratorKind, GeneratorSpec};
    use crate::baselines::Provenance;

    #[test]
    fn scenario_round_trip() {
        let b = gen_pa(&GeneratorSpec::new(GeneratorKind::Pa, 50, 4.0, 1)).unwrap();
        let s = Graph::new(3, []).unwrap();
        let sc = compose_regions(&b, &s, 2, 1).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let prefix = dir.path().join("sc");
        save_scenario(&sc, &prefix).unwrap();
        assert_eq!(load_scenario(&prefix).unwrap(), sc);
        // tamper with the attack list
        std::fs::write(scenario_paths(&prefix)[2].clone(), "0 1\n").unwrap();
        assert!(load_scenario(&prefix).is_err());
    }

    #[test]
    fn labels_round_trip() {
        let mut l = LabelSet::from_pairs([(3, Region::Benign), (0, Region::Sybil)]);
        l.insert(7, Region::Sybil, true);
        let mut buf = Vec::new();
        write_labels(&l, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf.clone()).unwrap(), "0 S 0\n3 B 0\n7 S 1\n");
        assert_eq!(read_labels(&buf[..]).unwrap(), l);
        assert!(read_labels("1 B 2\n".as_bytes()).is_err());
        assert!(read_labels("1 B 0\n1 S 0\n".as_bytes()).is_err());
    }

    #[test]
    fn beliefs_format() {
        let b = Beliefs {
            posterior: vec![[0.25, 0.75], [1.0, 0.0]],
            iterations_run: 4,
            converged: true,
            final_delta: 1.5e-4,
            messages: None,
        };
        let mut buf = Vec::new();
        write_beliefs(&b, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(
            text,
            "# iterations=4 converged=true final_delta=1.500000000e-4\n0 0.250000000 0.750000000\n1 1.000000000 0.000000000\n"
        );
        assert_eq!(read_beliefs(&buf[..]).unwrap(), b);
    }

    #[test]
    fn scores_format() {
        let s = ScoreVector {
            scores: vec![0.5, 1.25e-7],
            provenance: Provenance::SybilRank,
        };
        let mut buf = Vec::new();
        write_scores(&s, &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf.clone()).unwrap(),
            "# provenance=SybilRank\n0 5.000000000e-1\n1 1.250000000e-7\n"
        );
        assert_eq!(read_scores(&buf[..]).unwrap(), s);
        assert!(read_scores("0 1.0\n".as_bytes()).is_err());
    }
}
