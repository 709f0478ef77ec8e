use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::runner::{ModeOutcome, ScenarioRun};
use super::stats::{percentile_sorted, sig4};
use super::ExperimentError;
use crate::model::{ScenarioStats, Summary};

pub const HISTOGRAM_BINS: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    /// Table and histogram CSVs plus the JSON report.
    Csv,
    /// JSON report only.
    Json,
}

impl FromStr for ReportFormat {
    type Err = ExperimentError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            other => Err(ExperimentError::InvalidFormat(other.to_string())),
        }
    }
}

/// Equal-width bins over the central 99% of a sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    /// `bins + 1` bin edges.
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
    /// Values below the first or above the last edge.
    pub below: usize,
    pub above: usize,
}

/// Bins `values` into `bins` equal bins spanning the 0.5–99.5 percentiles.
pub fn histogram(values: &[f64], bins: usize) -> Result<Histogram, ExperimentError> {
    if values.is_empty() || bins == 0 {
        return Err(ExperimentError::EmptyInput);
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let lo = percentile_sorted(&sorted, 0.005);
    let hi = percentile_sorted(&sorted, 0.995);
    let width = (hi - lo) / bins as f64;
    let edges: Vec<f64> = (0..=bins).map(|i| lo + i as f64 * width).collect();
    let mut h = Histogram {
        edges,
        counts: vec![0; bins],
        below: 0,
        above: 0,
    };
    for &v in &sorted {
        if v < lo {
            h.below += 1;
        } else if v > hi {
            h.above += 1;
        } else if width > 0.0 {
            let i = (((v - lo) / width) as usize).min(bins - 1);
            h.counts[i] += 1;
        } else {
            h.counts[0] += 1;
        }
    }
    Ok(h)
}

/// Everything a simulation run reports, in machine-readable form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub scenario: String,
    pub seed: u64,
    pub replications: usize,
    pub fixed: ScenarioStats,
    pub amsod: ScenarioStats,
    pub delta_tc_histogram: Histogram,
}

impl Report {
    pub fn new(run: &ScenarioRun) -> Result<Self, ExperimentError> {
        Ok(Self {
            scenario: run.scenario.clone(),
            seed: run.seed,
            replications: run.delta_tc.len(),
            fixed: run.fixed.clone(),
            amsod: run.amsod.clone(),
            delta_tc_histogram: histogram(&run.delta_tc, HISTOGRAM_BINS)?,
        })
    }
}

fn cell(s: &Summary, scale: f64) -> String {
    format!(
        "{} ({} – {})",
        sig4(s.median * scale),
        sig4(s.lower * scale),
        sig4(s.upper * scale)
    )
}

/// Label, column accessor and unit scale of one table row.
type RowSpec = (&'static str, fn(&ScenarioStats) -> &Summary, f64);

/// Rows of the comparison table: `(metric, fixed, amsod)`, times in minutes.
pub fn table_rows(fixed: &ScenarioStats, amsod: &ScenarioStats) -> Vec<[String; 3]> {
    let rows: [RowSpec; 8] = [
        ("Number of passengers included", |s| &s.passengers, 1.0),
        ("Avg. waiting time (min)", |s| &s.wait, 60.0),
        ("Avg. in-vehicle travel time (min)", |s| &s.ivtt, 60.0),
        ("Access cost ($)", |s| &s.c_a, 1.0),
        ("Waiting cost ($)", |s| &s.c_w, 1.0),
        ("Riding cost ($)", |s| &s.c_r, 1.0),
        ("Operator cost ($)", |s| &s.c_o, 1.0),
        ("Total generalized cost ($)", |s| &s.tc, 1.0),
    ];
    let mut out: Vec<[String; 3]> = rows
        .iter()
        .map(|(label, f, scale)| [label.to_string(), cell(f(fixed), *scale), cell(f(amsod), *scale)])
        .collect();
    out.push([
        "Difference in generalized cost ($)".to_string(),
        String::new(),
        cell(&amsod.delta_tc, 1.0),
    ]);
    out
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> ExperimentError + '_ {
    move |source| ExperimentError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn write_csv(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<(), ExperimentError> {
    let file = fs::File::create(path).map_err(io_err(path))?;
    let mut w = csv::Writer::from_writer(file);
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    w.flush().map_err(io_err(path))?;
    Ok(())
}

fn replication_rows<'a>(
    outcomes: impl Iterator<Item = &'a ModeOutcome> + 'a,
    delta: &'a [f64],
) -> impl Iterator<Item = Vec<String>> + 'a {
    outcomes.zip(delta).enumerate().map(|(j, (o, d))| {
        vec![
            j.to_string(),
            o.passengers.to_string(),
            (o.wait * 60.0).to_string(),
            (o.ivtt * 60.0).to_string(),
            o.c_a.to_string(),
            o.c_w.to_string(),
            o.c_r.to_string(),
            o.c_o.to_string(),
            o.total().to_string(),
            d.to_string(),
        ]
    })
}

/// Writes the report files for `run` into `dir` and returns their paths.
///
/// Files are named `<scenario>_<mode>_<metric>.{csv,json}`, with mode `both`
/// for side-by-side outputs.
pub fn emit_report(run: &ScenarioRun, format: ReportFormat, dir: &Path) -> Result<Vec<PathBuf>, ExperimentError> {
    let report = Report::new(run)?;
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let name = |mode: &str, metric: &str, ext: &str| dir.join(format!("{}_{mode}_{metric}.{ext}", run.scenario));
    let mut written = Vec::new();

    let json_path = name("both", "report", "json");
    let json = serde_json::to_string_pretty(&report)?;
    fs::write(&json_path, json + "\n").map_err(io_err(&json_path))?;
    written.push(json_path);
    if format == ReportFormat::Json {
        return Ok(written);
    }

    let table = name("both", "table4", "csv");
    write_csv(
        &table,
        &["metric", "fixed", "amsod"],
        table_rows(&run.fixed, &run.amsod).into_iter().map(Vec::from),
    )?;
    written.push(table);

    let hist = name("amsod", "delta_tc_histogram", "csv");
    let h = &report.delta_tc_histogram;
    write_csv(
        &hist,
        &["bin_lo", "bin_hi", "count"],
        h.counts
            .iter()
            .enumerate()
            .map(|(i, c)| vec![h.edges[i].to_string(), h.edges[i + 1].to_string(), c.to_string()]),
    )?;
    written.push(hist);

    let header = [
        "replication",
        "passengers",
        "wait_min",
        "ivtt_min",
        "c_a",
        "c_w",
        "c_r",
        "c_o",
        "tc",
        "delta_tc",
    ];
    for (mode, pick) in [
        ("fixed", (|p| &p.baseline) as fn(&super::runner::ReplicationPair) -> &ModeOutcome),
        ("amsod", |p| &p.candidate),
    ] {
        let path = name(mode, "replications", "csv");
        write_csv(&path, &header, replication_rows(run.pairs.iter().map(pick), &run.delta_tc))?;
        written.push(path);
    }
    Ok(written)
}
