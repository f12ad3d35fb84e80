//! CSV files written by a run.
//!
//! Run files (`<agent>_seed<seed>.csv`):
//! `episode,return,policy_value,regret,cumulative_regret,violation,cumulative_violation,novel_successor,wall_ms`.
//!
//! Checkpoint files (`<agent>_seed<seed>_checkpoints.csv`, reward-free agents):
//! `episodes,optimality_gap,expected_violation`.
//!
//! `summary.csv` has one row per episode index with the number of runs that
//! reached it and, for each of `return`, `policy_value`, `cumulative_regret`
//! and `cumulative_violation`, the mean and a 95% normal band
//! `mean ± 1.96 sd / sqrt(n)` (sample standard deviation; zero width when
//! `n = 1`). `checkpoint_summary.csv` does the same for the checkpoint
//! metrics, keyed by checkpoint episode, plus one `final` row over the last
//! checkpoint of every run.
//!
//! Floats use 17 significant digits.

use std::fs::File;
use std::path::Path;

use safe_rl_core::{EpisodeRecord, RfeCheckpoint};

use crate::error::{HarnessError, Result};

pub const RUN_COLUMNS: [&str; 9] = [
    "episode",
    "return",
    "policy_value",
    "regret",
    "cumulative_regret",
    "violation",
    "cumulative_violation",
    "novel_successor",
    "wall_ms",
];

pub const CHECKPOINT_COLUMNS: [&str; 3] = ["episodes", "optimality_gap", "expected_violation"];

/// Columns summarised across seeds.
pub const SUMMARY_METRICS: [&str; 4] = ["return", "policy_value", "cumulative_regret", "cumulative_violation"];
pub const CHECKPOINT_METRICS: [&str; 2] = ["optimality_gap", "expected_violation"];

const Z95: f64 = 1.959963984540054;

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn parse_f64(field: &str, path: &Path) -> Result<f64> {
    field.parse().map_err(|_| HarnessError::config(format!("{}: bad number `{field}`", path.display())))
}

fn parse_usize(field: &str, path: &Path) -> Result<usize> {
    field.parse().map_err(|_| HarnessError::config(format!("{}: bad integer `{field}`", path.display())))
}

fn writer(path: &Path) -> Result<csv::Writer<File>> {
    let file = File::create(path).map_err(|e| HarnessError::output(path, e))?;
    Ok(csv::Writer::from_writer(file))
}

fn reader(path: &Path, expected: &[&str]) -> Result<csv::Reader<File>> {
    let file = File::open(path).map_err(|e| HarnessError::input(path, e))?;
    let mut rdr = csv::Reader::from_reader(file);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
    if header != expected {
        return Err(HarnessError::config(format!("{}: unexpected columns {header:?}", path.display())));
    }
    Ok(rdr)
}

pub fn write_run(path: &Path, rows: &[EpisodeRecord]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(RUN_COLUMNS)?;
    for r in rows {
        w.write_record([
            r.episode.to_string(),
            fmt_f64(r.episode_return),
            fmt_f64(r.policy_value),
            fmt_f64(r.regret),
            fmt_f64(r.cumulative_regret),
            fmt_f64(r.violation),
            fmt_f64(r.cumulative_violation),
            u8::from(r.novel_successor).to_string(),
            fmt_f64(r.wall_ms),
        ])?;
    }
    w.flush().map_err(|e| HarnessError::output(path, e))
}

pub fn read_run(path: &Path) -> Result<Vec<EpisodeRecord>> {
    let mut rows = Vec::new();
    for rec in reader(path, &RUN_COLUMNS)?.records() {
        let rec = rec?;
        let f = |i: usize| parse_f64(&rec[i], path);
        rows.push(EpisodeRecord {
            episode: parse_usize(&rec[0], path)?,
            episode_return: f(1)?,
            policy_value: f(2)?,
            regret: f(3)?,
            cumulative_regret: f(4)?,
            violation: f(5)?,
            cumulative_violation: f(6)?,
            novel_successor: &rec[7] == "1",
            wall_ms: f(8)?,
        });
    }
    Ok(rows)
}

pub fn write_checkpoints(path: &Path, rows: &[RfeCheckpoint]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(CHECKPOINT_COLUMNS)?;
    for c in rows {
        w.write_record([c.episode.to_string(), fmt_f64(c.optimality_gap), fmt_f64(c.expected_violation)])?;
    }
    w.flush().map_err(|e| HarnessError::output(path, e))
}

pub fn read_checkpoints(path: &Path) -> Result<Vec<RfeCheckpoint>> {
    let mut rows = Vec::new();
    for rec in reader(path, &CHECKPOINT_COLUMNS)?.records() {
        let rec = rec?;
        rows.push(RfeCheckpoint {
            episode: parse_usize(&rec[0], path)?,
            optimality_gap: parse_f64(&rec[1], path)?,
            expected_violation: parse_f64(&rec[2], path)?,
        });
    }
    Ok(rows)
}

/// Mean and 95% band of a sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Band {
    pub mean: f64,
    pub lo: f64,
    pub hi: f64,
}

impl Band {
    pub fn of(xs: &[f64]) -> Self {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        if xs.len() < 2 {
            return Self { mean, lo: mean, hi: mean };
        }
        let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
        let half = Z95 * (var / n).sqrt();
        Self { mean, lo: mean - half, hi: mean + half }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub key: String,
    pub n: usize,
    pub bands: Vec<Band>,
}

fn header(key: &str, metrics: &[&str]) -> Vec<String> {
    let mut cols = vec!["agent".to_owned(), key.to_owned(), "n".to_owned()];
    for m in metrics {
        cols.extend(["mean", "lo", "hi"].iter().map(|s| format!("{m}_{s}")));
    }
    cols
}

/// Per-episode summary across runs of possibly different lengths.
pub fn summarize_runs(runs: &[Vec<EpisodeRecord>]) -> Vec<SummaryRow> {
    let longest = runs.iter().map(Vec::len).max().unwrap_or(0);
    (0..longest)
        .map(|k| {
            let reached: Vec<&EpisodeRecord> = runs.iter().filter_map(|r| r.get(k)).collect();
            let band = |f: fn(&EpisodeRecord) -> f64| Band::of(&reached.iter().map(|r| f(r)).collect::<Vec<_>>());
            SummaryRow {
                key: (k + 1).to_string(),
                n: reached.len(),
                bands: vec![
                    band(|r| r.episode_return),
                    band(|r| r.policy_value),
                    band(|r| r.cumulative_regret),
                    band(|r| r.cumulative_violation),
                ],
            }
        })
        .collect()
}

/// Checkpoint summary keyed by episode count, followed by the `final` row.
pub fn summarize_checkpoints(runs: &[Vec<RfeCheckpoint>]) -> Vec<SummaryRow> {
    let row = |key: String, points: Vec<&RfeCheckpoint>| SummaryRow {
        key,
        n: points.len(),
        bands: vec![
            Band::of(&points.iter().map(|c| c.optimality_gap).collect::<Vec<_>>()),
            Band::of(&points.iter().map(|c| c.expected_violation).collect::<Vec<_>>()),
        ],
    };
    let mut episodes: Vec<usize> = runs.iter().flatten().map(|c| c.episode).collect();
    episodes.sort_unstable();
    episodes.dedup();
    let mut rows: Vec<SummaryRow> = episodes
        .into_iter()
        .map(|e| row(e.to_string(), runs.iter().flatten().filter(|c| c.episode == e).collect()))
        .collect();
    rows.push(row("final".into(), runs.iter().filter_map(|r| r.last()).collect()));
    rows
}

fn write_summary(path: &Path, agent: &str, key: &str, metrics: &[&str], rows: &[SummaryRow]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(header(key, metrics))?;
    for row in rows {
        let mut rec = vec![agent.to_owned(), row.key.clone(), row.n.to_string()];
        for b in &row.bands {
            rec.extend([fmt_f64(b.mean), fmt_f64(b.lo), fmt_f64(b.hi)]);
        }
        w.write_record(rec)?;
    }
    w.flush().map_err(|e| HarnessError::output(path, e))
}

pub fn write_run_summary(path: &Path, agent: &str, rows: &[SummaryRow]) -> Result<()> {
    write_summary(path, agent, "episode", &SUMMARY_METRICS, rows)
}

pub fn write_checkpoint_summary(path: &Path, agent: &str, rows: &[SummaryRow]) -> Result<()> {
    write_summary(path, agent, "point", &CHECKPOINT_METRICS, rows)
}
