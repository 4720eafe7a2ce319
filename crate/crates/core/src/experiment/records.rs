//! CSV files written by the runner: one row per run, and per-cell
//! convergence traces with median and quartile columns per algorithm.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::engine::TracePoint;

use super::ExperimentError;

pub const RESULTS_FILE: &str = "results.csv";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub algorithm: String,
    pub problem: String,
    #[serde(rename = "D")]
    pub dimension: usize,
    pub seed: u64,
    pub nfe_used: usize,
    pub best_f: f64,
    pub fev: f64,
}

fn csv_writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(w)
}

pub fn write_results<W: Write>(rows: &[ResultRow], w: W) -> Result<(), ExperimentError> {
    let mut writer = csv_writer(w);
    for row in rows {
        writer.serialize(row)?;
    }
    writer.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn read_results<R: Read>(r: R) -> Result<Vec<ResultRow>, ExperimentError> {
    let mut reader = csv::Reader::from_reader(r);
    let rows = reader.deserialize().collect::<Result<Vec<ResultRow>, _>>()?;
    Ok(rows)
}

pub fn load_results(path: impl AsRef<Path>) -> Result<Vec<ResultRow>, ExperimentError> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| ExperimentError::Io {
        path: path.to_owned(),
        source: e,
    })?;
    read_results(std::io::BufReader::new(file))
}

/// Median and quartiles of one algorithm at one checkpoint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Spread {
    pub median: f64,
    pub q1: f64,
    pub q3: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub nfe: usize,
    /// One entry per algorithm, in [`TraceTable::algorithms`] order.
    pub spreads: Vec<Spread>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceTable {
    pub algorithms: Vec<String>,
    pub rows: Vec<TraceRow>,
}

/// Linear-interpolation quantile of sorted data.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of empty sample");
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn spread(values: &[f64]) -> Spread {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    Spread {
        median: quantile(&v, 0.5),
        q1: quantile(&v, 0.25),
        q3: quantile(&v, 0.75),
    }
}

/// Best FEV known after `nfe` evaluations: the last trace point at or
/// before `nfe`, else the first point.
pub fn fev_at(trace: &[TracePoint], nfe: usize) -> f64 {
    let idx = trace.partition_point(|p| p.nfe <= nfe);
    trace[idx.saturating_sub(1)].best_fev
}

/// Checkpoint evaluation counts `round(fraction * budget)`, deduplicated.
pub fn checkpoint_nfes(fractions: &[f64], budget: usize) -> Vec<usize> {
    let mut out: Vec<usize> = fractions
        .iter()
        .map(|f| ((f * budget as f64).round() as usize).max(1))
        .collect();
    out.dedup();
    out
}

impl TraceTable {
    /// `traces[a]` holds the traces of every run of algorithm `a`.
    pub fn from_traces(algorithms: Vec<String>, traces: &[Vec<&[TracePoint]>], checkpoints: &[usize]) -> Self {
        let rows = checkpoints
            .iter()
            .map(|&nfe| TraceRow {
                nfe,
                spreads: traces
                    .iter()
                    .map(|runs| {
                        let values: Vec<f64> = runs.iter().map(|t| fev_at(t, nfe)).collect();
                        spread(&values)
                    })
                    .collect(),
            })
            .collect();
        Self { algorithms, rows }
    }

    pub fn header(&self) -> Vec<String> {
        let mut header = vec!["nfe".to_owned()];
        for a in &self.algorithms {
            header.push(format!("{a}_median"));
            header.push(format!("{a}_q1"));
            header.push(format!("{a}_q3"));
        }
        header
    }

    pub fn write<W: Write>(&self, w: W) -> Result<(), ExperimentError> {
        let mut writer = csv_writer(w);
        writer.write_record(self.header())?;
        for row in &self.rows {
            let mut record = vec![row.nfe.to_string()];
            for s in &row.spreads {
                for v in [s.median, s.q1, s.q3] {
                    record.push(format!("{v:?}"));
                }
            }
            writer.write_record(&record)?;
        }
        writer.flush().map_err(csv::Error::from)?;
        Ok(())
    }

    pub fn read<R: Read>(r: R) -> Result<Self, ExperimentError> {
        let mut reader = csv::Reader::from_reader(r);
        let header = reader.headers()?.clone();
        let bad = |msg: String| ExperimentError::Format(msg);
        if header.get(0) != Some("nfe") || (header.len() - 1) % 3 != 0 {
            return Err(bad("trace header must be nfe followed by median/q1/q3 triples".into()));
        }
        let mut algorithms = Vec::new();
        for chunk in header.iter().skip(1).collect::<Vec<_>>().chunks(3) {
            let name = chunk[0]
                .strip_suffix("_median")
                .ok_or_else(|| bad(format!("expected a _median column, found {:?}", chunk[0])))?;
            if chunk[1] != format!("{name}_q1") || chunk[2] != format!("{name}_q3") {
                return Err(bad(format!("quartile columns for {name:?} are missing")));
            }
            algorithms.push(name.to_owned());
        }
        let mut rows = Vec::new();
        for record in reader.records() {
            let record = record?;
            let nfe = record[0]
                .parse()
                .map_err(|_| bad(format!("invalid nfe {:?}", &record[0])))?;
            let values = record
                .iter()
                .skip(1)
                .map(|t| t.parse::<f64>().map_err(|_| bad(format!("invalid number {t:?}"))))
                .collect::<Result<Vec<f64>, _>>()?;
            let spreads = values
                .chunks(3)
                .map(|c| Spread {
                    median: c[0],
                    q1: c[1],
                    q3: c[2],
                })
                .collect();
            rows.push(TraceRow { nfe, spreads });
        }
        Ok(Self { algorithms, rows })
    }
}

/// File name of the trace for one cell.
pub fn trace_file_name(problem: &str, dimension: usize) -> String {
    let safe: String = problem
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '.' { c } else { '_' })
        .collect();
    format!("trace_{safe}_D{dimension}.csv")
}
