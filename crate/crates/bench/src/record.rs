//! One CSV row per timed repetition, plus median/mean summaries.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

/// A single timed repetition. Field order is the CSV column order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRecord {
    pub experiment: String,
    pub dataset: String,
    pub n: usize,
    pub policy: String,
    pub s: usize,
    pub alpha: f64,
    pub beta: f64,
    pub threads: usize,
    pub schedule: String,
    pub rep: usize,
    pub build_time_s: f64,
    pub find_time_s: f64,
    pub max_depth: u32,
    pub total_nodes: u64,
    pub mean_neighbors: f64,
    /// Halving rounds summed over every internal node.
    pub redistribution_rounds: u64,
    /// Mean final branching factor over internal nodes; 0 for a single leaf.
    pub mean_branching: f64,
    /// `passed` or `skipped` (set too large for the sampled oracle check).
    pub validation: String,
}

pub const COLUMNS: [&str; 18] = [
    "experiment",
    "dataset",
    "n",
    "policy",
    "s",
    "alpha",
    "beta",
    "threads",
    "schedule",
    "rep",
    "build_time_s",
    "find_time_s",
    "max_depth",
    "total_nodes",
    "mean_neighbors",
    "redistribution_rounds",
    "mean_branching",
    "validation",
];

pub fn write_records<W: Write>(records: &[BenchRecord], out: W) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    if records.is_empty() {
        w.write_record(COLUMNS)?;
    }
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_records<R: Read>(input: R) -> anyhow::Result<Vec<BenchRecord>> {
    let mut r = csv::Reader::from_reader(input);
    let header: Vec<String> = r.headers()?.iter().map(str::to_owned).collect();
    anyhow::ensure!(header == COLUMNS, "unexpected CSV header: {header:?}");
    Ok(r.deserialize().collect::<Result<_, _>>()?)
}

/// The configuration part of a record; repetitions of the same key are
/// summarized together.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigKey {
    pub experiment: String,
    pub dataset: String,
    pub policy: String,
    pub s: usize,
    pub alpha: f64,
    pub beta: f64,
    pub threads: usize,
    pub schedule: String,
}

impl ConfigKey {
    pub fn of(r: &BenchRecord) -> Self {
        Self {
            experiment: r.experiment.clone(),
            dataset: r.dataset.clone(),
            policy: r.policy.clone(),
            s: r.s,
            alpha: r.alpha,
            beta: r.beta,
            threads: r.threads,
            schedule: r.schedule.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub key: ConfigKey,
    pub reps: usize,
    pub build_median: f64,
    pub build_mean: f64,
    pub find_median: f64,
    pub find_mean: f64,
    pub rounds_median: f64,
    pub mean_branching: f64,
    pub max_depth: u32,
}

pub fn median(values: &[f64]) -> f64 {
    assert!(!values.is_empty(), "median of nothing");
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Groups records by configuration, in first-appearance order.
pub fn summarize(records: &[BenchRecord]) -> Vec<Summary> {
    let mut groups: Vec<(ConfigKey, Vec<&BenchRecord>)> = Vec::new();
    for r in records {
        let key = ConfigKey::of(r);
        match groups.iter_mut().find(|(k, _)| *k == key) {
            Some((_, g)) => g.push(r),
            None => groups.push((key, vec![r])),
        }
    }
    groups
        .into_iter()
        .map(|(key, g)| {
            let col = |f: fn(&BenchRecord) -> f64| g.iter().map(|r| f(r)).collect::<Vec<_>>();
            let build = col(|r| r.build_time_s);
            let find = col(|r| r.find_time_s);
            Summary {
                reps: g.len(),
                build_median: median(&build),
                build_mean: mean(&build),
                find_median: median(&find),
                find_mean: mean(&find),
                rounds_median: median(&col(|r| r.redistribution_rounds as f64)),
                mean_branching: mean(&col(|r| r.mean_branching)),
                max_depth: g.iter().map(|r| r.max_depth).max().unwrap_or(0),
                key,
            }
        })
        .collect()
}

pub fn write_summary<W: Write>(summaries: &[Summary], mut out: W) -> std::io::Result<()> {
    writeln!(
        out,
        "{:<13} {:<12} {:<8} {:>4} {:>5} {:>5} {:>3} {:<8} {:>4} {:>11} {:>11} {:>11} {:>11} {:>6} {:>7}",
        "experiment", "dataset", "policy", "s", "alpha", "beta", "thr", "schedule", "reps",
        "build_med", "build_mean", "find_med", "find_mean", "rounds", "depth"
    )?;
    for s in summaries {
        let k = &s.key;
        writeln!(
            out,
            "{:<13} {:<12} {:<8} {:>4} {:>5} {:>5} {:>3} {:<8} {:>4} {:>11.6} {:>11.6} {:>11.6} {:>11.6} {:>6} {:>7}",
            k.experiment, k.dataset, k.policy, k.s, k.alpha, k.beta, k.threads, k.schedule, s.reps,
            s.build_median, s.build_mean, s.find_median, s.find_mean, s.rounds_median, s.max_depth
        )?;
    }
    Ok(())
}
