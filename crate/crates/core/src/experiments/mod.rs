//! Experiment runner: config files, sweeps over simulation and model
//! parameters, CSV output and baseline comparisons.
//!
//! Output files in the output directory (each starts with a
//! `# generated_unix=` line):
//!
//! * `runs.csv`: every metric of every simulation run, flushed per run
//! * `results.csv`: metrics averaged over replications, with standard errors
//! * `analytic.csv`, `verify.csv`: model grids
//! * `comparison.csv`: reductions against Legacy (resources) and MADP (PARs)
//! * `traces/*.csv`: per-cycle, per-cell metrics when `simulation.trace` is set

mod compare;
mod output;

pub use compare::{compare_to_baseline, reduction_pct, standard_comparisons};
pub use output::{read_rows, strip_timestamp, write_rows, write_trace, CsvSink, ResultRow, HEADER_PREFIX};

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::mpsc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::{
    expected_par_count, expected_unique_active_beams, gain_factor, independent_cycles_closed_form,
    monte_carlo_unique_beams, ActivationModelParams, GainParams,
};
use crate::error::{ConfigError, ExperimentError, ModelError};
use crate::protocol::SchemeKind;
use crate::sim::{run_simulation, MetricsSummary, SimConfig, SimOutput};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Analytic,
    Verify,
    Simulate,
    Sweep,
}

/// Run length presets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Profile {
    /// 10,000 cycles, 3 replications.
    Desk,
    /// 100,000 cycles, 3 replications.
    Paper,
}

impl Profile {
    pub fn total_cycles(self) -> u64 {
        match self {
            Profile::Desk => 10_000,
            Profile::Paper => 100_000,
        }
    }

    pub fn replications(self) -> u32 {
        3
    }
}

impl std::str::FromStr for Profile {
    type Err = ConfigError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "desk" => Ok(Profile::Desk),
            "paper" => Ok(Profile::Paper),
            _ => Err(ConfigError::new("profile", format!("unknown profile `{s}` (desk, paper)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    UeDensity,
    TotalBeams,
    PagingArrivalRate,
    ActivationCycles,
}

impl SweepParameter {
    fn name(self) -> &'static str {
        match self {
            SweepParameter::UeDensity => "ue_density",
            SweepParameter::TotalBeams => "total_beams",
            SweepParameter::PagingArrivalRate => "paging_arrival_rate",
            SweepParameter::ActivationCycles => "activation_cycles",
        }
    }

    fn apply(self, config: &mut SimConfig, v: f64) -> Result<(), ConfigError> {
        let whole = || {
            if v.fract() == 0.0 && v >= 0.0 && v.is_finite() {
                Ok(v as u64)
            } else {
                Err(ConfigError::new("sweep.values", format!("{} needs whole numbers, got {v}", self.name())))
            }
        };
        match self {
            SweepParameter::UeDensity => config.ue_density = whole()? as usize,
            SweepParameter::TotalBeams => config.total_beams = whole()? as usize,
            SweepParameter::PagingArrivalRate => config.paging_arrival_rate = v,
            SweepParameter::ActivationCycles => {
                config.activation_cycles =
                    u32::try_from(whole()?).map_err(|_| ConfigError::new("sweep.values", "activation_cycles too large"))?
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepAxis {
    pub parameter: SweepParameter,
    pub values: Vec<f64>,
}

impl SweepAxis {
    pub fn density() -> Self {
        Self {
            parameter: SweepParameter::UeDensity,
            values: vec![100.0, 200.0, 300.0, 400.0, 500.0],
        }
    }

    pub fn beams() -> Self {
        Self {
            parameter: SweepParameter::TotalBeams,
            values: vec![16.0, 32.0, 64.0, 128.0, 256.0],
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Precision {
    F32,
    #[default]
    F64,
}

/// Parameter grid of the `analytic` and `verify` modes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalyticGrid {
    pub ue_density: Vec<f64>,
    pub total_beams: Vec<usize>,
    pub activation_cycles: Vec<usize>,
    pub epsilon: f64,
    pub trials: u64,
    pub seed: u64,
    pub precision: Precision,
}

impl Default for AnalyticGrid {
    fn default() -> Self {
        Self {
            ue_density: vec![1.0, 8.0, 32.0, 128.0],
            total_beams: vec![4, 16, 64],
            activation_cycles: vec![1, 2, 3],
            epsilon: crate::combinatorics::DEFAULT_EPSILON,
            trials: 10_000,
            seed: 1,
            precision: Precision::F64,
        }
    }
}

impl AnalyticGrid {
    pub fn points(&self) -> Vec<(f64, usize, usize)> {
        let mut out = Vec::new();
        for &b in &self.total_beams {
            for &n_a in &self.activation_cycles {
                for &l in &self.ue_density {
                    out.push((l, b, n_a));
                }
            }
        }
        out
    }

    fn validate(&self) -> Result<(), ConfigError> {
        if self.ue_density.is_empty() || self.total_beams.is_empty() || self.activation_cycles.is_empty() {
            return Err(ConfigError::new("analytic", "grid axes must be non-empty"));
        }
        if self.trials == 0 {
            return Err(ConfigError::new("analytic.trials", "must be at least 1"));
        }
        for (l, b, n_a) in self.points() {
            let mut p = ActivationModelParams::new(l, b, n_a);
            p.epsilon = self.epsilon;
            p.validate().map_err(|e| match e {
                ModelError::InvalidParameter { field, reason } => ConfigError::new(format!("analytic.{field}"), reason),
                other => ConfigError::new("analytic", other.to_string()),
            })?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentSection {
    pub id: String,
    pub replications: u32,
    pub profile: Option<Profile>,
    pub schemes: Option<Vec<SchemeKind>>,
}

impl Default for ExperimentSection {
    fn default() -> Self {
        Self {
            id: "experiment".into(),
            replications: 3,
            profile: None,
            schemes: None,
        }
    }
}

/// Layout of an experiment config file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentFile {
    pub experiment: ExperimentSection,
    pub simulation: SimConfig,
    pub sweep: Option<SweepAxis>,
    pub analytic: AnalyticGrid,
}

/// A fully resolved experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub id: String,
    pub mode: Mode,
    pub replications: u32,
    pub base: SimConfig,
    pub schemes: Vec<SchemeKind>,
    pub sweep: Option<SweepAxis>,
    pub analytic: AnalyticGrid,
    /// Worker threads; 0 lets the pool decide.
    pub jobs: usize,
}

/// Command-line adjustments applied on top of a config file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub profile: Option<Profile>,
    pub scheme: Option<SchemeKind>,
    pub jobs: Option<usize>,
}

impl ExperimentSpec {
    pub fn from_file(file: ExperimentFile, mode: Mode) -> Self {
        let schemes = match (&file.experiment.schemes, mode) {
            (Some(s), _) => s.clone(),
            (None, Mode::Sweep) => SchemeKind::evaluation_set(),
            (None, _) => vec![file.simulation.scheme],
        };
        let sweep = match (file.sweep, mode) {
            (None, Mode::Sweep) => Some(SweepAxis::density()),
            (s, _) => s,
        };
        let mut spec = Self {
            id: file.experiment.id,
            mode,
            replications: file.experiment.replications,
            base: file.simulation,
            schemes,
            sweep,
            analytic: file.analytic,
            jobs: 0,
        };
        if let Some(p) = file.experiment.profile {
            spec.apply_profile(p);
        }
        spec
    }

    pub fn parse(text: &str, mode: Mode) -> Result<Self, ConfigError> {
        let file: ExperimentFile = toml::from_str(text).map_err(|e| {
            let msg = e.message().to_string();
            let field = msg
                .split('`')
                .nth(1)
                .filter(|_| msg.starts_with("unknown field"))
                .unwrap_or("config")
                .to_string();
            ConfigError::new(field, e.to_string().trim().to_string())
        })?;
        Ok(Self::from_file(file, mode))
    }

    pub fn load(path: &Path, mode: Mode) -> Result<Self, ExperimentError> {
        let text = std::fs::read_to_string(path).map_err(|source| ExperimentError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Ok(Self::parse(&text, mode)?)
    }

    pub fn apply_profile(&mut self, profile: Profile) {
        self.base.total_cycles = profile.total_cycles();
        self.replications = profile.replications();
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(p) = o.profile {
            self.apply_profile(p);
        }
        if let Some(seed) = o.seed {
            self.base.seed = seed;
            self.analytic.seed = seed;
        }
        if let Some(s) = o.scheme {
            self.base.scheme = s;
            self.schemes = vec![s];
        }
        if let Some(j) = o.jobs {
            self.jobs = j;
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.id.is_empty() || self.id.contains(['/', '\\', ',']) {
            return Err(ConfigError::new("experiment.id", "must be non-empty without `/`, `\\` or `,`"));
        }
        match self.mode {
            Mode::Analytic | Mode::Verify => self.analytic.validate(),
            Mode::Simulate | Mode::Sweep => {
                if self.replications == 0 {
                    return Err(ConfigError::new("experiment.replications", "must be at least 1"));
                }
                if self.schemes.is_empty() {
                    return Err(ConfigError::new("experiment.schemes", "must not be empty"));
                }
                if self.mode == Mode::Sweep {
                    match &self.sweep {
                        Some(axis) if !axis.values.is_empty() => {}
                        _ => return Err(ConfigError::new("sweep.values", "must not be empty")),
                    }
                }
                for run in self.runs()? {
                    run.config.validate()?;
                }
                Ok(())
            }
        }
    }

    /// Simulation runs in output order: grid point, then scheme, then replication.
    pub fn runs(&self) -> Result<Vec<RunSpec>, ConfigError> {
        let points: Vec<Option<f64>> = match (&self.sweep, self.mode) {
            (Some(axis), Mode::Sweep) => axis.values.iter().map(|&v| Some(v)).collect(),
            _ => vec![None],
        };
        let mut runs = Vec::new();
        for (p, value) in points.iter().enumerate() {
            for &scheme in &self.schemes {
                for r in 0..self.replications {
                    let mut config = self.base.clone();
                    if let (Some(v), Some(axis)) = (value, &self.sweep) {
                        axis.parameter.apply(&mut config, *v)?;
                    }
                    config.scheme = scheme;
                    config.seed = self.base.seed.wrapping_add(u64::from(r));
                    runs.push(RunSpec {
                        index: runs.len(),
                        point: p,
                        replication: r,
                        config,
                    });
                }
            }
        }
        Ok(runs)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSpec {
    pub index: usize,
    pub point: usize,
    pub replication: u32,
    pub config: SimConfig,
}

impl RunSpec {
    fn trace_name(&self, id: &str) -> String {
        let slug: String = self
            .config
            .scheme
            .to_string()
            .chars()
            .map(|c| if c.is_ascii_alphanumeric() { c.to_ascii_lowercase() } else { '_' })
            .collect();
        format!(
            "{id}_{:04}_{}_b{}_d{}_s{}.csv",
            self.index,
            slug.trim_matches('_'),
            self.config.total_beams,
            self.config.ue_density,
            self.config.seed
        )
    }
}

/// What an experiment produced.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub rows: Vec<ResultRow>,
    pub files: Vec<PathBuf>,
    pub summary: String,
}

fn row_for(id: &str, c: &SimConfig, seed: Option<u64>, metric: &str, value: f64, se: Option<f64>) -> ResultRow {
    ResultRow {
        experiment_id: id.to_string(),
        scheme: c.scheme.to_string(),
        b_tx: c.total_beams,
        ue_density: c.ue_density as f64,
        lambda_p: c.paging_arrival_rate,
        n_a: c.activation_cycles,
        n_m: c.scheme.monitoring().map(|m| m.to_string()).unwrap_or_default(),
        seed,
        metric: metric.to_string(),
        value,
        std_error: se,
    }
}

pub fn run_rows(id: &str, config: &SimConfig, summary: &MetricsSummary) -> Vec<ResultRow> {
    summary
        .metrics()
        .map(|(name, v)| row_for(id, config, Some(config.seed), name, v, None))
        .collect()
}

/// Mean and standard error of the mean; no error for a single sample.
pub fn mean_and_se(xs: &[f64]) -> (f64, Option<f64>) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, None);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, Some((var / n).sqrt()))
}

fn pool(jobs: usize) -> Result<rayon::ThreadPool, ExperimentError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| ExperimentError::Compare(format!("cannot start worker pool: {e}")))
}

/// Runs `tasks` on the pool and hands results to `sink` in index order as
/// soon as they are contiguous.
fn run_ordered<I, T, F, S>(jobs: usize, tasks: &[I], work: F, mut sink: S) -> Result<(), ExperimentError>
where
    I: Sync,
    T: Send,
    F: Fn(&I) -> T + Sync,
    S: FnMut(usize, T) -> Result<(), ExperimentError>,
{
    let pool = pool(jobs)?;
    let (tx, rx) = mpsc::channel();
    std::thread::scope(|scope| {
        let work = &work;
        scope.spawn(move || {
            pool.install(|| {
                tasks.par_iter().enumerate().for_each_with(tx, |tx, (i, t)| {
                    // receiver gone means the sink failed; nothing left to do
                    let _ = tx.send((i, work(t)));
                })
            })
        });
        let mut parked = BTreeMap::new();
        let mut next = 0;
        for (i, result) in rx.iter() {
            parked.insert(i, result);
            while let Some(r) = parked.remove(&next) {
                sink(next, r)?;
                next += 1;
            }
        }
        Ok(())
    })
}

fn create_dir(path: &Path) -> Result<(), ExperimentError> {
    std::fs::create_dir_all(path).map_err(|source| ExperimentError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn run_experiment(spec: &ExperimentSpec, out_dir: &Path) -> Result<ExperimentReport, ExperimentError> {
    spec.validate()?;
    create_dir(out_dir)?;
    match spec.mode {
        Mode::Analytic => run_analytic(spec, out_dir),
        Mode::Verify => run_verify(spec, out_dir),
        Mode::Simulate | Mode::Sweep => run_simulations(spec, out_dir),
    }
}

fn run_simulations(spec: &ExperimentSpec, out_dir: &Path) -> Result<ExperimentReport, ExperimentError> {
    let runs = spec.runs()?;
    let runs_path = out_dir.join("runs.csv");
    let mut runs_csv = CsvSink::create(&runs_path)?;
    let mut files = vec![runs_path.clone()];
    let trace_dir = out_dir.join("traces");
    if spec.base.trace {
        create_dir(&trace_dir)?;
    }

    let mut summaries: Vec<Option<MetricsSummary>> = vec![None; runs.len()];
    run_ordered(
        spec.jobs,
        &runs,
        |run| run_simulation(&run.config),
        |i, result: Result<SimOutput, ConfigError>| {
            let out = result?;
            let run = &runs[i];
            runs_csv.write_all(&run_rows(&spec.id, &run.config, &out.summary))?;
            if run.config.trace {
                let path = trace_dir.join(run.trace_name(&spec.id));
                write_trace(&path, &out.trace)?;
                files.push(path);
            }
            summaries[i] = Some(out.summary);
            Ok(())
        },
    )?;

    let mut rows = Vec::new();
    let reps = spec.replications as usize;
    for group in runs.chunks(reps) {
        let config = &group[0].config;
        let sums: Vec<&MetricsSummary> = group
            .iter()
            .map(|r| summaries[r.index].as_ref().expect("every run reported"))
            .collect();
        let mut base = config.clone();
        base.seed = spec.base.seed;
        for name in crate::sim::METRIC_NAMES {
            let xs: Vec<f64> = sums.iter().map(|s| s.metric(name).expect("registry metric")).collect();
            let (mean, se) = mean_and_se(&xs);
            rows.push(row_for(&spec.id, &base, None, name, mean, se));
        }
    }
    let results_path = out_dir.join("results.csv");
    write_rows(&results_path, &rows)?;
    files.push(results_path);

    let has = |s: &str| rows.iter().any(|r| r.scheme == s);
    if has("Legacy") && has("MADP") {
        let cmp = standard_comparisons(&rows)?;
        let path = out_dir.join("comparison.csv");
        write_rows(&path, &cmp)?;
        files.push(path);
    }
    let summary = render_simulation_summary(&rows);
    Ok(ExperimentReport { rows, files, summary })
}

fn analytic_row(id: &str, scheme: &str, (l, b, n_a): (f64, usize, usize), seed: Option<u64>, metric: String, value: f64, se: Option<f64>) -> ResultRow {
    ResultRow {
        experiment_id: id.to_string(),
        scheme: scheme.to_string(),
        b_tx: b,
        ue_density: l,
        lambda_p: 0.0,
        n_a: n_a as u32,
        n_m: String::new(),
        seed,
        metric,
        value,
        std_error: se,
    }
}

struct AnalyticPoint {
    per_cycle: Vec<f64>,
    n_bar: f64,
    closed_form: f64,
}

fn evaluate_point(grid: &AnalyticGrid, l: f64, b: usize, n_a: usize) -> Result<AnalyticPoint, ModelError> {
    match grid.precision {
        Precision::F64 => {
            let mut p = ActivationModelParams::new(l, b, n_a);
            p.epsilon = grid.epsilon;
            let est = expected_unique_active_beams(&p)?;
            Ok(AnalyticPoint {
                per_cycle: est.per_cycle,
                n_bar: est.total,
                closed_form: independent_cycles_closed_form(&p),
            })
        }
        Precision::F32 => {
            let mut p = ActivationModelParams::new(l as f32, b, n_a);
            p.epsilon = grid.epsilon as f32;
            let est = expected_unique_active_beams(&p)?;
            Ok(AnalyticPoint {
                per_cycle: est.per_cycle.iter().map(|&x| f64::from(x)).collect(),
                n_bar: f64::from(est.total),
                closed_form: f64::from(independent_cycles_closed_form(&p)),
            })
        }
    }
}

fn run_analytic(spec: &ExperimentSpec, out_dir: &Path) -> Result<ExperimentReport, ExperimentError> {
    let grid = &spec.analytic;
    let points = grid.points();
    let cost = &spec.base.cost;
    let mut rows = Vec::new();
    run_ordered(
        spec.jobs,
        &points,
        |&(l, b, n_a)| evaluate_point(grid, l, b, n_a),
        |i, result| {
            let pt = result?;
            let (l, b, n_a) = points[i];
            let gp = GainParams {
                dl_resources_per_beam: cost.paging_dci_cost(1).rb_units() * n_a as f64,
                ul_resources_per_par: cost.par_cost(1).rb_units(),
                total_beams: b,
                activation_cycles: n_a,
            };
            let row = |metric: String, v: f64| analytic_row(&spec.id, "analytic", (l, b, n_a), None, metric, v, None);
            rows.push(row("n_bar".into(), pt.n_bar));
            rows.push(row("n_bar_closed_form".into(), pt.closed_form));
            for (k, v) in pt.per_cycle.iter().enumerate() {
                rows.push(row(format!("n_bar_cycle_{}", k + 1), *v));
            }
            rows.push(row("gain_factor".into(), gain_factor(&gp, pt.n_bar.min(b as f64))?));
            rows.push(row("k_bar".into(), expected_par_count::<f64>(b, n_a)));
            Ok(())
        },
    )?;
    let path = out_dir.join("analytic.csv");
    write_rows(&path, &rows)?;
    let summary = render_analytic_summary(&rows);
    Ok(ExperimentReport {
        rows,
        files: vec![path],
        summary,
    })
}

fn run_verify(spec: &ExperimentSpec, out_dir: &Path) -> Result<ExperimentReport, ExperimentError> {
    let grid = &spec.analytic;
    let points = grid.points();
    let mut rows = Vec::new();
    run_ordered(
        spec.jobs,
        &points,
        |&(l, b, n_a)| -> Result<_, ModelError> {
            let pt = evaluate_point(grid, l, b, n_a)?;
            let mc = monte_carlo_unique_beams(&ActivationModelParams::new(l, b, n_a), grid.trials, grid.seed)?;
            Ok((pt, mc))
        },
        |i, result| {
            let (pt, mc) = result?;
            let (l, b, n_a) = points[i];
            let seed = Some(grid.seed);
            let row = |scheme: &str, metric: &str, v: f64, se| analytic_row(&spec.id, scheme, (l, b, n_a), seed, metric.into(), v, se);
            rows.push(row("analytic", "n_bar_analytic", pt.n_bar, None));
            rows.push(row("monte_carlo", "n_bar_monte_carlo", mc.mean, Some(mc.std_error)));
            rows.push(row("monte_carlo", "z_score", mc.z_score(pt.n_bar), None));
            Ok(())
        },
    )?;
    let path = out_dir.join("verify.csv");
    write_rows(&path, &rows)?;
    let summary = render_verify_summary(&rows);
    Ok(ExperimentReport {
        rows,
        files: vec![path],
        summary,
    })
}

fn lookup(rows: &[ResultRow], pred: impl Fn(&ResultRow) -> bool, metric: &str) -> f64 {
    rows.iter()
        .find(|r| r.metric == metric && pred(r))
        .map_or(f64::NAN, |r| r.value)
}

fn render_simulation_summary(rows: &[ResultRow]) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:>5} {:>7} {:<16} {:>10} {:>9} {:>8} {:>9}",
        "b_tx", "density", "scheme", "rb_units", "pars", "beams", "lat_cyc"
    );
    let mut seen = Vec::new();
    for r in rows {
        let key = (r.b_tx, r.ue_density.to_bits(), r.lambda_p.to_bits(), r.n_a, r.scheme.clone());
        if seen.contains(&key) {
            continue;
        }
        seen.push(key);
        let same = |x: &ResultRow| x.scheme == r.scheme && x.config_key() == r.config_key();
        let _ = writeln!(
            s,
            "{:>5} {:>7} {:<16} {:>10.2} {:>9.3} {:>8.2} {:>9.4}",
            r.b_tx,
            r.ue_density,
            r.scheme,
            lookup(rows, same, "total_rb_units"),
            lookup(rows, same, "par_count"),
            lookup(rows, same, "active_beams"),
            lookup(rows, same, "latency_mean_cycles"),
        );
    }
    s
}

fn render_analytic_summary(rows: &[ResultRow]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{:>8} {:>5} {:>4} {:>10} {:>10} {:>8} {:>8}", "lambda", "b_tx", "n_a", "n_bar", "closed", "gain", "k_bar");
    for r in rows.iter().filter(|r| r.metric == "n_bar") {
        let same = |x: &ResultRow| x.config_key() == r.config_key();
        let _ = writeln!(
            s,
            "{:>8} {:>5} {:>4} {:>10.4} {:>10.4} {:>8.4} {:>8.4}",
            r.ue_density,
            r.b_tx,
            r.n_a,
            r.value,
            lookup(rows, same, "n_bar_closed_form"),
            lookup(rows, same, "gain_factor"),
            lookup(rows, same, "k_bar"),
        );
    }
    s
}

fn render_verify_summary(rows: &[ResultRow]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{:>8} {:>5} {:>4} {:>10} {:>10} {:>8} {:>7}", "lambda", "b_tx", "n_a", "analytic", "mc", "mc_se", "z");
    for r in rows.iter().filter(|r| r.metric == "n_bar_analytic") {
        let same = |x: &ResultRow| x.config_key() == r.config_key();
        let mc = rows.iter().find(|x| x.metric == "n_bar_monte_carlo" && same(x));
        let _ = writeln!(
            s,
            "{:>8} {:>5} {:>4} {:>10.4} {:>10.4} {:>8.4} {:>7.3}",
            r.ue_density,
            r.b_tx,
            r.n_a,
            r.value,
            mc.map_or(f64::NAN, |m| m.value),
            mc.and_then(|m| m.std_error).unwrap_or(f64::NAN),
            lookup(rows, same, "z_score"),
        );
    }
    s
}

/// Reads a results CSV and writes the standard reductions next to `out_dir`.
pub fn compare_file(results: &Path, out_dir: &Path) -> Result<ExperimentReport, ExperimentError> {
    let rows: Vec<ResultRow> = read_rows(results)?.into_iter().filter(|r| r.seed.is_none()).collect();
    let cmp = standard_comparisons(&rows)?;
    create_dir(out_dir)?;
    let path = out_dir.join("comparison.csv");
    write_rows(&path, &cmp)?;
    let mut summary = String::new();
    for r in &cmp {
        let _ = writeln!(summary, "{:<44} {:>5} {:>7} {:<16} {:>8.2}%", r.metric, r.b_tx, r.ue_density, r.scheme, r.value);
    }
    Ok(ExperimentReport {
        rows: cmp,
        files: vec![path],
        summary,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_sections_and_defaults() {
        let spec = ExperimentSpec::parse(
            r#"
            [experiment]
            id = "fig4"
            replications = 2

            [simulation]
            total_beams = 32
            total_cycles = 200
            warmup_cycles = 20

            [simulation.cost]
            pdsch_symbols = 2

            [sweep]
            parameter = "ue_density"
            values = [10, 20]
            "#,
            Mode::Sweep,
        )
        .unwrap();
        assert_eq!(spec.id, "fig4");
        assert_eq!(spec.base.total_beams, 32);
        assert_eq!(spec.base.cost.pdsch_symbols, 2);
        assert_eq!(spec.schemes.len(), 6);
        let runs = spec.runs().unwrap();
        assert_eq!(runs.len(), 2 * 6 * 2);
        assert_eq!(runs[0].config.ue_density, 10);
        assert_eq!(runs[1].config.seed, spec.base.seed + 1);
        assert!(spec.validate().is_ok());
    }

    #[test]
    fn unknown_key_names_field() {
        let err = ExperimentSpec::parse("[simulation]\ntotal_beam = 64\n", Mode::Simulate).unwrap_err();
        assert_eq!(err.field, "total_beam");
    }

    #[test]
    fn invalid_values_name_field() {
        let spec = ExperimentSpec::parse("[simulation]\ntotal_beams = 60\n", Mode::Simulate).unwrap();
        assert_eq!(spec.validate().unwrap_err().field, "total_beams");
        let spec = ExperimentSpec::parse("[sweep]\nparameter = \"total_beams\"\nvalues = [16.5]\n", Mode::Sweep).unwrap();
        assert_eq!(spec.validate().unwrap_err().field, "sweep.values");
        let spec = ExperimentSpec::parse("[analytic]\ntotal_beams = [0]\n", Mode::Analytic).unwrap();
        assert_eq!(spec.validate().unwrap_err().field, "analytic.total_beams");
    }

    #[test]
    fn scheme_strings_in_config() {
        let spec = ExperimentSpec::parse(
            "[experiment]\nschemes = [\"legacy\", \"mfep_md:6/3/0\"]\n[simulation]\nscheme = \"MFEP-DLI\"\n",
            Mode::Simulate,
        )
        .unwrap();
        assert_eq!(spec.base.scheme, SchemeKind::MfepDli);
        assert_eq!(spec.schemes[1].to_string(), "MFEP-MD(6/3/0)");
    }

    #[test]
    fn overrides() {
        let mut spec = ExperimentSpec::from_file(ExperimentFile::default(), Mode::Sweep);
        spec.replications = 1;
        spec.apply(&Overrides {
            seed: Some(9),
            profile: Some(Profile::Paper),
            scheme: Some(SchemeKind::Madp),
            jobs: Some(2),
        });
        assert_eq!(spec.base.seed, 9);
        assert_eq!(spec.base.total_cycles, 100_000);
        assert_eq!(spec.replications, 3);
        assert_eq!(spec.schemes, vec![SchemeKind::Madp]);
        assert_eq!(spec.jobs, 2);
    }

    #[test]
    fn se_of_mean() {
        assert_eq!(mean_and_se(&[2.0]), (2.0, None));
        let (m, se) = mean_and_se(&[1.0, 2.0, 3.0]);
        assert_eq!(m, 2.0);
        assert!((se.unwrap() - (1.0f64 / 3.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn ordered_sink_sees_index_order() {
        let tasks: Vec<u64> = (0..50).collect();
        let mut seen = Vec::new();
        run_ordered(3, &tasks, |&t| t * 2, |i, v| {
            seen.push((i, v));
            Ok(())
        })
        .unwrap();
        assert_eq!(seen, (0..50).map(|i| (i as usize, i * 2)).collect::<Vec<_>>());
    }

    #[test]
    fn small_sweep_writes_outputs() {
        let dir = tempfile::tempdir().unwrap();
        let mut spec = ExperimentSpec::from_file(ExperimentFile::default(), Mode::Sweep);
        spec.base.total_cycles = 120;
        spec.base.warmup_cycles = 20;
        spec.base.trace = true;
        spec.replications = 2;
        spec.sweep = Some(SweepAxis {
            parameter: SweepParameter::UeDensity,
            values: vec![20.0],
        });
        let report = run_experiment(&spec, dir.path()).unwrap();
        assert_eq!(report.rows.len(), 6 * crate::sim::METRIC_NAMES.len());
        for f in ["runs.csv", "results.csv", "comparison.csv"] {
            assert!(dir.path().join(f).exists(), "{f}");
        }
        assert_eq!(std::fs::read_dir(dir.path().join("traces")).unwrap().count(), 12);
        assert!(report.summary.contains("MFEP-MD(6/3/0)"));
    }
}
