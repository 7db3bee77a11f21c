//! File formats: sample tables (CSV or JSON lines), count files, and run
//! manifests.
//!
//! Sample tables carry one row per kept point with the angle coordinates,
//! the derived outcome probabilities, the auxiliary q (when present), the
//! importance weight (when present), and the chain id. All floats are
//! written with 17 significant digits so a read-back is bit-faithful.

use crate::engine::{RunMetadata, SampleSet};
use crate::leapfrog::TrajectoryConfig;
use serde::{Deserialize, Serialize};
use std::io::{BufRead, BufWriter, Write};
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("i/o failure: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed input: {0}")]
    Malformed(String),
    #[error("json failure: {0}")]
    Json(#[from] serde_json::Error),
}

/// Output format for sample tables.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SampleFormat {
    Csv,
    JsonLines,
}

impl std::str::FromStr for SampleFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(Self::Csv),
            "jsonl" => Ok(Self::JsonLines),
            other => Err(format!("unknown format '{other}' (expected csv or jsonl)")),
        }
    }
}

fn fmt(v: f64) -> String {
    format!("{:.16e}", v)
}

/// A parsed sample table; chains are concatenated with their ids alongside.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SampleTable {
    pub points: Vec<Vec<f64>>,
    pub probs: Vec<Vec<f64>>,
    pub q: Option<Vec<f64>>,
    pub weights: Option<Vec<f64>>,
    pub chain_ids: Vec<u64>,
}

impl SampleTable {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.weights.as_ref().map_or(1.0, |w| w[i])
    }

    /// Converts parsed rows back to a sample set (metadata is nominal;
    /// the manifest is the authoritative record of the run).
    pub fn to_sample_set(&self) -> SampleSet {
        SampleSet {
            points: self.points.clone(),
            probs: self.probs.clone(),
            aux: self.q.clone(),
            weights: self.weights.clone(),
            metadata: RunMetadata {
                seed: 0,
                chain_id: self.chain_ids.first().copied().unwrap_or(0),
                rng_algorithm: crate::engine::RNG_ALGORITHM.into(),
                tau: 0.0,
                steps: 0,
                acceptance_rate: f64::NAN,
                target_label: "parsed".into(),
                degenerate_count: 0,
            },
        }
    }
}

fn header_columns(dim: usize, n_probs: usize, has_q: bool, has_weights: bool) -> Vec<String> {
    let mut cols = vec!["chain".to_string()];
    cols.extend((1..=dim).map(|s| format!("theta_{s}")));
    cols.extend((1..=n_probs).map(|k| format!("p_{k}")));
    if has_q {
        cols.push("q".into());
    }
    if has_weights {
        cols.push("weight".into());
    }
    cols
}

/// Writes one or more chains of the same run as a single table.
pub fn write_samples(
    path: &Path,
    sets: &[SampleSet],
    format: SampleFormat,
) -> Result<(), IoError> {
    let first = sets
        .first()
        .ok_or_else(|| IoError::Malformed("no chains to write".into()))?;
    let dim = first.points.first().map_or(0, |p| p.len());
    let n_probs = first.probs.first().map_or(0, |p| p.len());
    let has_q = first.aux.is_some();
    let has_weights = first.weights.is_some();
    let mut out = BufWriter::new(std::fs::File::create(path)?);
    match format {
        SampleFormat::Csv => {
            writeln!(
                out,
                "{}",
                header_columns(dim, n_probs, has_q, has_weights).join(",")
            )?;
            for set in sets {
                for i in 0..set.len() {
                    let mut row = vec![set.metadata.chain_id.to_string()];
                    row.extend(set.points[i].iter().map(|&v| fmt(v)));
                    row.extend(set.probs[i].iter().map(|&v| fmt(v)));
                    if let Some(q) = &set.aux {
                        row.push(fmt(q[i]));
                    }
                    if let Some(w) = &set.weights {
                        row.push(fmt(w[i]));
                    }
                    writeln!(out, "{}", row.join(","))?;
                }
            }
        }
        SampleFormat::JsonLines => {
            for set in sets {
                for i in 0..set.len() {
                    let rec = JsonRow {
                        chain: set.metadata.chain_id,
                        theta: set.points[i].clone(),
                        p: set.probs[i].clone(),
                        q: set.aux.as_ref().map(|q| q[i]),
                        weight: set.weights.as_ref().map(|w| w[i]),
                    };
                    writeln!(out, "{}", serde_json::to_string(&rec)?)?;
                }
            }
        }
    }
    out.flush()?;
    Ok(())
}

#[derive(Serialize, Deserialize)]
struct JsonRow {
    chain: u64,
    theta: Vec<f64>,
    p: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    q: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    weight: Option<f64>,
}

/// Reads a sample table, inferring the schema from the CSV header or the
/// JSON keys and validating it row by row.
pub fn read_samples(path: &Path, format: SampleFormat) -> Result<SampleTable, IoError> {
    let file = std::fs::File::open(path)?;
    let reader = std::io::BufReader::new(file);
    match format {
        SampleFormat::Csv => read_csv(reader),
        SampleFormat::JsonLines => read_jsonl(reader),
    }
}

fn read_csv(reader: impl BufRead) -> Result<SampleTable, IoError> {
    let mut lines = reader.lines();
    let header = lines
        .next()
        .ok_or_else(|| IoError::Malformed("empty file".into()))??;
    let cols: Vec<&str> = header.trim().split(',').collect();
    if cols.first() != Some(&"chain") {
        return Err(IoError::Malformed(
            "first column must be 'chain'".into(),
        ));
    }
    let dim = cols.iter().filter(|c| c.starts_with("theta_")).count();
    let n_probs = cols.iter().filter(|c| c.starts_with("p_")).count();
    let has_q = cols.contains(&"q");
    let has_weights = cols.contains(&"weight");
    let expected = header_columns(dim, n_probs, has_q, has_weights);
    if cols != expected.iter().map(String::as_str).collect::<Vec<_>>() {
        return Err(IoError::Malformed(format!(
            "unexpected column layout: {header}"
        )));
    }

    let mut table = SampleTable {
        q: has_q.then(Vec::new),
        weights: has_weights.then(Vec::new),
        ..Default::default()
    };
    for (lineno, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.trim().split(',').collect();
        if fields.len() != cols.len() {
            return Err(IoError::Malformed(format!(
                "row {} has {} fields, expected {}",
                lineno + 2,
                fields.len(),
                cols.len()
            )));
        }
        let bad = |what: &str| IoError::Malformed(format!("row {}: bad {what}", lineno + 2));
        let chain: u64 = fields[0].parse().map_err(|_| bad("chain id"))?;
        let parse = |s: &str| s.parse::<f64>().map_err(|_| bad("float"));
        let mut it = fields[1..].iter();
        let theta: Vec<f64> = it
            .by_ref()
            .take(dim)
            .map(|s| parse(s))
            .collect::<Result<_, _>>()?;
        let p: Vec<f64> = it
            .by_ref()
            .take(n_probs)
            .map(|s| parse(s))
            .collect::<Result<_, _>>()?;
        table.chain_ids.push(chain);
        table.points.push(theta);
        table.probs.push(p);
        if has_q {
            table.q.as_mut().unwrap().push(parse(it.next().unwrap())?);
        }
        if has_weights {
            table
                .weights
                .as_mut()
                .unwrap()
                .push(parse(it.next().unwrap())?);
        }
    }
    Ok(table)
}

fn read_jsonl(reader: impl BufRead) -> Result<SampleTable, IoError> {
    let mut table = SampleTable::default();
    let mut schema: Option<(usize, usize, bool, bool)> = None;
    for line in reader.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let row: JsonRow = serde_json::from_str(&line)?;
        let sig = (
            row.theta.len(),
            row.p.len(),
            row.q.is_some(),
            row.weight.is_some(),
        );
        match &schema {
            None => {
                schema = Some(sig);
                table.q = row.q.is_some().then(Vec::new);
                table.weights = row.weight.is_some().then(Vec::new);
            }
            Some(s) if *s != sig => {
                return Err(IoError::Malformed("inconsistent row schema".into()))
            }
            _ => {}
        }
        table.chain_ids.push(row.chain);
        table.points.push(row.theta);
        table.probs.push(row.p);
        if let Some(q) = row.q {
            table.q.as_mut().unwrap().push(q);
        }
        if let Some(w) = row.weight {
            table.weights.as_mut().unwrap().push(w);
        }
    }
    Ok(table)
}

// ---------------------------------------------------------------------------
// Count files
// ---------------------------------------------------------------------------

/// Writes counts as CSV with columns outcome,count.
pub fn write_counts(path: &Path, counts: &[f64]) -> Result<(), IoError> {
    let mut out = BufWriter::new(std::fs::File::create(path)?);
    writeln!(out, "outcome,count")?;
    for (k, n) in counts.iter().enumerate() {
        if n.fract() == 0.0 {
            writeln!(out, "{},{}", k + 1, *n as i64)?;
        } else {
            writeln!(out, "{},{}", k + 1, n)?;
        }
    }
    out.flush()?;
    Ok(())
}

/// Reads a count file; outcomes must be 1..K in order.
pub fn read_counts(path: &Path) -> Result<Vec<f64>, IoError> {
    let file = std::fs::File::open(path)?;
    let reader = std::io::BufReader::new(file);
    let mut lines = reader.lines();
    let header = lines
        .next()
        .ok_or_else(|| IoError::Malformed("empty count file".into()))??;
    if header.trim() != "outcome,count" {
        return Err(IoError::Malformed(format!(
            "count file header must be 'outcome,count', got '{header}'"
        )));
    }
    let mut counts = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let (outcome, count) = line
            .trim()
            .split_once(',')
            .ok_or_else(|| IoError::Malformed(format!("row {}: expected two fields", i + 2)))?;
        let outcome: usize = outcome
            .parse()
            .map_err(|_| IoError::Malformed(format!("row {}: bad outcome id", i + 2)))?;
        if outcome != counts.len() + 1 {
            return Err(IoError::Malformed(format!(
                "row {}: outcomes must be consecutive from 1",
                i + 2
            )));
        }
        let count: f64 = count
            .parse()
            .map_err(|_| IoError::Malformed(format!("row {}: bad count", i + 2)))?;
        counts.push(count);
    }
    if counts.is_empty() {
        return Err(IoError::Malformed("count file has no rows".into()));
    }
    Ok(counts)
}

// ---------------------------------------------------------------------------
// Run manifests
// ---------------------------------------------------------------------------

/// Everything needed to reproduce a sampling run bit for bit, plus summary
/// figures of the run that produced it.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct RunManifest {
    pub tool_version: String,
    pub target: String,
    pub pom: String,
    pub space: Option<String>,
    pub prior: String,
    pub counts: Vec<f64>,
    pub chain_length: usize,
    pub burn_in: usize,
    pub thinning: usize,
    pub chains: u64,
    pub seed: u64,
    pub rng_algorithm: String,
    pub trajectory: TrajectoryConfig,
    pub reweighted: bool,
    pub format: SampleFormat,
    pub acceptance_rates: Vec<f64>,
    pub degenerate_count: usize,
    pub wall_time_seconds: f64,
}

pub fn write_manifest(path: &Path, manifest: &RunManifest) -> Result<(), IoError> {
    let mut out = BufWriter::new(std::fs::File::create(path)?);
    serde_json::to_writer_pretty(&mut out, manifest)?;
    out.flush()?;
    Ok(())
}

pub fn read_manifest(path: &Path) -> Result<RunManifest, IoError> {
    let file = std::fs::File::open(path)?;
    Ok(serde_json::from_reader(std::io::BufReader::new(file))?)
}
