use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::error::ExperimentError;
use crate::sim::CycleMetrics;

/// One metric of one configuration.
///
/// Resource metrics are mean RB·symbol units per cycle per cell; page
/// counts are totals over the measured window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub experiment_id: String,
    pub scheme: String,
    pub b_tx: usize,
    pub ue_density: f64,
    pub lambda_p: f64,
    pub n_a: u32,
    /// Monitoring cycles as `stationary/low/high`; empty unless MFEP-MD.
    pub n_m: String,
    /// Empty on rows aggregated over replications.
    pub seed: Option<u64>,
    pub metric: String,
    pub value: f64,
    pub std_error: Option<f64>,
}

impl ResultRow {
    /// Identifies the configuration a row belongs to, scheme excluded.
    pub fn config_key(&self) -> (String, usize, u64, u64, u32, Option<u64>) {
        (
            self.experiment_id.clone(),
            self.b_tx,
            self.ue_density.to_bits(),
            self.lambda_p.to_bits(),
            self.n_a,
            self.seed,
        )
    }

    pub fn describe_config(&self) -> String {
        format!(
            "experiment {} b_tx={} ue_density={} lambda_p={} n_a={}{}",
            self.experiment_id,
            self.b_tx,
            self.ue_density,
            self.lambda_p,
            self.n_a,
            self.seed.map(|s| format!(" seed={s}")).unwrap_or_default()
        )
    }
}

pub const HEADER_PREFIX: &str = "# generated_unix=";

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> ExperimentError + '_ {
    move |source| ExperimentError::Io {
        path: path.display().to_string(),
        source,
    }
}

fn csv_err(path: &Path) -> impl FnOnce(csv::Error) -> ExperimentError + '_ {
    move |source| ExperimentError::Csv {
        path: path.display().to_string(),
        source,
    }
}

/// CSV file with a timestamp comment line followed by header and rows.
/// Each row is flushed as it is written.
pub struct CsvSink {
    path: PathBuf,
    writer: csv::Writer<BufWriter<File>>,
}

impl CsvSink {
    pub fn create(path: &Path) -> Result<Self, ExperimentError> {
        let file = File::create(path).map_err(io_err(path))?;
        let mut out = BufWriter::new(file);
        let now = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        writeln!(out, "{HEADER_PREFIX}{now}").map_err(io_err(path))?;
        Ok(Self {
            path: path.to_path_buf(),
            writer: csv::Writer::from_writer(out),
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn write_all<S: Serialize>(&mut self, rows: &[S]) -> Result<(), ExperimentError> {
        for r in rows {
            self.writer.serialize(r).map_err(csv_err(&self.path))?;
        }
        self.writer.flush().map_err(io_err(&self.path))
    }
}

pub fn write_rows<S: Serialize>(path: &Path, rows: &[S]) -> Result<(), ExperimentError> {
    CsvSink::create(path)?.write_all(rows)
}

pub fn read_rows(path: &Path) -> Result<Vec<ResultRow>, ExperimentError> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(csv_err(path))?;
    reader
        .deserialize()
        .collect::<Result<Vec<ResultRow>, _>>()
        .map_err(csv_err(path))
}

#[derive(Debug, Serialize)]
struct TraceRow {
    cycle: u64,
    cell: usize,
    dl_dci_rb_units: f64,
    dl_pdsch_rb_units: f64,
    dl_dli_rb_units: f64,
    ul_par_used_rb_units: f64,
    ul_par_reserved_rb_units: f64,
    par_count: u32,
    active_beams: u32,
    awake_ues: u32,
    pages_delivered: u32,
    latency_sum_cycles: u64,
}

pub fn write_trace(path: &Path, trace: &[CycleMetrics]) -> Result<(), ExperimentError> {
    let rows: Vec<TraceRow> = trace
        .iter()
        .map(|m| TraceRow {
            cycle: m.cycle,
            cell: m.cell,
            dl_dci_rb_units: m.dl_dci.rb_units(),
            dl_pdsch_rb_units: m.dl_pdsch.rb_units(),
            dl_dli_rb_units: m.dl_dli.rb_units(),
            ul_par_used_rb_units: m.ul_par_used.rb_units(),
            ul_par_reserved_rb_units: m.ul_par_reserved.rb_units(),
            par_count: m.par_count,
            active_beams: m.active_beams,
            awake_ues: m.awake_ues,
            pages_delivered: m.pages_delivered,
            latency_sum_cycles: m.latency_samples.iter().sum(),
        })
        .collect();
    write_rows(path, &rows)
}

/// Drops the timestamp line so outputs of reruns compare equal.
pub fn strip_timestamp(contents: &str) -> &str {
    match contents.strip_prefix(HEADER_PREFIX) {
        Some(rest) => rest.split_once('\n').map_or("", |(_, tail)| tail),
        None => contents,
    }
}
