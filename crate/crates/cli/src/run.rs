use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use levp_core::engine::{stepsize_bound, Method};
use levp_core::harness::{
    reference_eigenpair, run_seeds, summarize, trace_file_name, write_summary, write_trace, ExperimentConfig, Outcome,
    ReferenceSolution, RunStats, SeedRun,
};
use serde::{Deserialize, Serialize};

use crate::error::{usage, Error, Result};
use crate::method::{needs_stepsize, parse_method, MethodOptions};
use crate::source::{load_problem, MatrixSource, Problem, StartSpec};

fn default_k() -> usize {
    1
}

fn default_true() -> bool {
    true
}

/// One row of a bench suite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MethodEntry {
    pub method: String,
    #[serde(default)]
    pub t: Option<f64>,
    #[serde(default = "default_k")]
    pub k: usize,
    #[serde(default)]
    pub gamma: Option<f64>,
    #[serde(default = "default_true")]
    pub replacement: bool,
    #[serde(default)]
    pub averaged: bool,
    /// Allow greedy `k > 1` without averaging.
    #[serde(default)]
    pub naive: bool,
}

impl MethodEntry {
    pub fn new(method: &str) -> Self {
        Self {
            method: method.to_string(),
            t: None,
            k: 1,
            gamma: None,
            replacement: true,
            averaged: false,
            naive: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MatrixConfig {
    File(PathBuf),
    Synthetic(String),
    Hubbard(String),
}

impl MatrixConfig {
    pub fn source(&self) -> Result<MatrixSource> {
        Ok(match self {
            MatrixConfig::File(p) => MatrixSource::File(p.clone()),
            MatrixConfig::Synthetic(s) => MatrixSource::Synthetic(s.parse()?),
            MatrixConfig::Hubbard(s) => MatrixSource::Hubbard(s.parse()?),
        })
    }
}

fn default_tol() -> f64 {
    1e-6
}

fn default_budget() -> u64 {
    1_000_000_000
}

fn default_seeds() -> u64 {
    20
}

/// A suite of methods on one matrix, as read from JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchConfig {
    pub matrix: MatrixConfig,
    #[serde(default)]
    pub scale: Option<f64>,
    #[serde(default)]
    pub shift: Option<f64>,
    #[serde(default)]
    pub x0: Option<String>,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_budget")]
    pub max_col_access: u64,
    #[serde(default = "default_seeds")]
    pub seeds: u64,
    #[serde(default)]
    pub out: Option<PathBuf>,
    /// Trace spacing in column accesses; defaults to the dimension.
    #[serde(default)]
    pub trace_every: Option<u64>,
    pub methods: Vec<MethodEntry>,
}

impl BenchConfig {
    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        serde_json::from_str(&text).map_err(|source| Error::Json {
            path: path.to_path_buf(),
            source,
        })
    }
}

/// Loaded problem and its reference solution.
pub struct Session {
    pub problem: Problem,
    pub reference: ReferenceSolution,
    pub source: MatrixSource,
}

impl Session {
    pub fn open(source: MatrixSource, scale: Option<f64>, shift: Option<f64>) -> Result<Self> {
        let problem = load_problem(&source, scale, shift)?;
        let reference = reference_eigenpair(problem.oracle.as_ref())?;
        Ok(Self {
            problem,
            reference,
            source,
        })
    }
}

/// Shared run settings.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSettings {
    pub x0: Option<StartSpec>,
    pub tol: f64,
    pub max_col_access: u64,
    pub seeds: u64,
    pub trace_every: Option<u64>,
}

pub struct MethodReport {
    pub method: Method,
    pub stats: Result<RunStats>,
    pub runs: Vec<SeedRun>,
}

impl MethodReport {
    pub fn converged(&self) -> bool {
        self.stats.is_ok()
    }
}

pub fn resolve_method(session: &Session, entry: &MethodEntry) -> Result<Method> {
    let gamma = match entry.gamma {
        Some(g) => Some(g),
        None if needs_stepsize(&entry.method) => Some(stepsize_bound(session.problem.oracle.as_ref())),
        None => None,
    };
    let opts = MethodOptions {
        t: entry.t,
        k: entry.k,
        gamma,
        with_replacement: entry.replacement,
        averaged: entry.averaged,
        allow_naive_batch: entry.naive,
    };
    parse_method(&entry.method, &opts)
}

pub fn run_method(session: &Session, entry: &MethodEntry, settings: &RunSettings) -> Result<MethodReport> {
    if settings.seeds == 0 {
        return usage("need at least one seed");
    }
    if settings.tol.is_nan() || settings.tol <= 0.0 {
        return usage("tolerance must be positive");
    }
    let method = resolve_method(session, entry)?;
    let start = settings.x0.clone().unwrap_or_else(|| session.source.default_x0());
    let (x0, x_ref) = start.resolve(&session.problem)?;
    let mut cfg = ExperimentConfig::new(
        method,
        x0,
        settings.tol,
        settings.max_col_access,
        (0..settings.seeds).collect(),
    );
    cfg.x_ref = Some(x_ref);
    cfg.trace_every = settings.trace_every.or(Some(session.problem.dim() as u64));
    let oracle = session.problem.oracle.as_ref();
    let runs = run_seeds(oracle, &session.reference, &cfg)?;
    let stats = summarize(&method, oracle.dim(), &runs).map_err(Error::from);
    Ok(MethodReport { method, stats, runs })
}

/// Writes one trace per seed into `dir`.
pub fn write_traces(dir: &Path, report: &MethodReport, n: usize) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|source| Error::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let name = report.method.to_string();
    let k = report.method.batch(n);
    for run in &report.runs {
        write_trace(&dir.join(trace_file_name(&name, k, run.seed)), &run.trace)?;
    }
    Ok(())
}

pub fn write_bench_summary(dir: &Path, reports: &[MethodReport]) -> Result<PathBuf> {
    std::fs::create_dir_all(dir).map_err(|source| Error::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let rows: Vec<RunStats> = reports.iter().filter_map(|r| r.stats.as_ref().ok().cloned()).collect();
    Ok(write_summary(&dir.join("summary.csv"), &rows)?)
}

fn outcome_label(o: &Outcome) -> String {
    match o {
        Outcome::Converged => "converged".into(),
        Outcome::BudgetExhausted => "budget exhausted".into(),
        Outcome::Stationary => "stationary".into(),
        Outcome::Diverged(why) => format!("diverged ({why})"),
    }
}

/// Human-readable report; eigenvalues are also given on the source scale
/// when a shift or scale was applied.
pub fn format_report(session: &Session, report: &MethodReport) -> String {
    let mut s = String::new();
    let p = &session.problem;
    let transformed = p.scale != 1.0 || p.shift != 0.0;
    let _ = writeln!(s, "method {}  k {}", report.method, report.method.batch(p.dim()));
    let _ = write!(s, "reference lambda1 {:.10}", session.reference.lambda1);
    if transformed {
        let _ = write!(s, "  (source {:.10})", p.unshift(session.reference.lambda1));
    }
    let _ = writeln!(s);
    match &report.stats {
        Ok(st) => {
            let _ = writeln!(
                s,
                "iterations min {} med {} max {}  total col access {}  seeds {} diverged {} unconverged {}",
                st.min_iters,
                st.med_iters,
                st.max_iters,
                st.total_col_access,
                st.seeds_used,
                st.diverged_count,
                st.unconverged_count
            );
        }
        Err(e) => {
            let _ = writeln!(s, "do not converge: {e}");
        }
    }
    for run in &report.runs {
        let last = run.trace.last();
        let _ = write!(
            s,
            "seed {:>3}  {}  iter {}  col access {}  eps_obj {:.3e}  lambda {:.10}",
            run.seed,
            outcome_label(&run.outcome),
            run.iterations,
            run.column_accesses,
            run.eps_obj,
            run.lambda_estimate
        );
        if transformed {
            let _ = write!(s, "  source {:.10}", p.unshift(run.lambda_estimate));
        }
        if let Some(r) = last {
            let _ = write!(s, "  eps_energy {:.3e}  eps_tan {:.3e}", r.eps_energy, r.eps_tan);
        }
        let _ = writeln!(s);
    }
    s
}
