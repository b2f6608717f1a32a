//! Command dispatch. Each command reads the run configuration, writes its
//! artifacts into the output directory and returns a JSON summary.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::analysis::{
    check_caccioppoli, check_parabolic_sobolev, classify_propagation, energy_iteration, estimate_sobolev_constant,
    front_report, make_iteration_params, waiting_time, AnalysisError, Classification, ClassifyRule, InequalityReport,
    Tent,
};
use crate::config::{ConfigError, LambdaChoice, RunConfig};
use crate::io::{self, fmt_f64, IoError};
use crate::laws::{builtin_laws, parse_law_spec, DiffusionLaw, LawError};
use crate::solver::{run, SimConfig, SnapshotSeries, SolverError};
use crate::structure::{choose_lambda, validate, GridSpec, StructureError, StructureSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Laws,
    Structure,
    Check,
    Simulate,
    Front,
    Iterate,
    Audit,
    Paradox,
}

impl Command {
    pub const ALL: [Command; 8] = [
        Self::Laws,
        Self::Structure,
        Self::Check,
        Self::Simulate,
        Self::Front,
        Self::Iterate,
        Self::Audit,
        Self::Paradox,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Laws => "laws",
            Self::Structure => "structure",
            Self::Check => "check",
            Self::Simulate => "simulate",
            Self::Front => "front",
            Self::Iterate => "iterate",
            Self::Audit => "audit",
            Self::Paradox => "paradox",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Command {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Self::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| format!("unknown command '{s}'"))
    }
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("configuration error: {message}")]
    Config { message: String, errors: Vec<ConfigError> },
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error("precondition rejected: {0}")]
    Precondition(String),
}

impl PipelineError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config { .. } => 2,
            Self::Numeric(_) => 3,
            Self::Precondition(_) => 4,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Self::Config { .. } => "config",
            Self::Numeric(_) => "numeric",
            Self::Precondition(_) => "precondition",
        }
    }

    /// One-line machine-readable form for stderr.
    pub fn to_json(&self) -> String {
        let details = match self {
            Self::Config { errors, .. } => serde_json::to_value(errors).unwrap_or(Value::Null),
            _ => Value::Array(Vec::new()),
        };
        json!({
            "error": {
                "kind": self.kind(),
                "exit_code": self.exit_code(),
                "message": self.to_string(),
                "details": details,
            }
        })
        .to_string()
    }

    pub fn config(message: impl Into<String>) -> Self {
        Self::Config {
            message: message.into(),
            errors: Vec::new(),
        }
    }
}

impl From<crate::config::ConfigErrors> for PipelineError {
    fn from(e: crate::config::ConfigErrors) -> Self {
        Self::Config {
            message: e.to_string(),
            errors: e.0,
        }
    }
}

impl From<StructureError> for PipelineError {
    fn from(e: StructureError) -> Self {
        match e {
            StructureError::Quadrature { .. } => Self::Numeric(e.to_string()),
            _ => Self::Precondition(e.to_string()),
        }
    }
}

impl From<SolverError> for PipelineError {
    fn from(e: SolverError) -> Self {
        match e {
            SolverError::Stability { .. } | SolverError::BudgetExceeded { .. } => Self::Numeric(e.to_string()),
            _ => Self::config(e.to_string()),
        }
    }
}

impl From<AnalysisError> for PipelineError {
    fn from(e: AnalysisError) -> Self {
        match e {
            AnalysisError::Structure(s) => s.into(),
            AnalysisError::Precondition(m) => Self::Precondition(m),
            AnalysisError::Domain(_) => Self::Precondition(e.to_string()),
            _ => Self::Numeric(e.to_string()),
        }
    }
}

impl From<IoError> for PipelineError {
    fn from(e: IoError) -> Self {
        Self::Precondition(e.to_string())
    }
}

impl From<LawError> for PipelineError {
    fn from(e: LawError) -> Self {
        Self::Precondition(e.to_string())
    }
}

/// Files written and the summary printed on stdout.
#[derive(Debug, Clone, Serialize)]
pub struct Outcome {
    pub command: String,
    pub files: Vec<PathBuf>,
    pub summary: Value,
}

pub fn dispatch(command: Command, cfg: &RunConfig) -> Result<Outcome, PipelineError> {
    let dir = cfg.output_dir.as_path();
    std::fs::create_dir_all(dir).map_err(|e| PipelineError::Precondition(format!("{}: {e}", dir.display())))?;
    let hash = cfg.hash();
    let (files, summary) = match command {
        Command::Laws => laws(dir, &hash)?,
        Command::Structure => structure(cfg, dir, &hash)?,
        Command::Check => check(cfg, dir, &hash)?,
        Command::Simulate => simulate(cfg, dir, &hash)?,
        Command::Front => front(cfg, dir, &hash)?,
        Command::Iterate => iterate(cfg, dir, &hash)?,
        Command::Audit => audit(cfg, dir, &hash)?,
        Command::Paradox => paradox(cfg, dir, &hash)?,
    };
    Ok(Outcome {
        command: command.to_string(),
        files,
        summary,
    })
}

type Step = Result<(Vec<PathBuf>, Value), PipelineError>;

fn lambda_for(cfg: &RunConfig, law: &DiffusionLaw) -> Result<f64, PipelineError> {
    Ok(match cfg.lambda {
        LambdaChoice::Value(v) => v,
        LambdaChoice::Auto => choose_lambda(law)?,
    })
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("report types serialise")
}

fn laws(dir: &Path, hash: &str) -> Step {
    let rows: Vec<Value> = builtin_laws()
        .iter()
        .map(|law| {
            let lambda = choose_lambda(law).ok();
            json!({ "info": law.info(), "lambda_cap": lambda })
        })
        .collect();
    let path = dir.join("laws.json");
    io::write_json(&path, "laws", hash, &rows)?;
    Ok((vec![path], Value::Array(rows)))
}

/// Structure set covering `[1e-8, max(default, u_max)]`.
fn structure_for(law: &DiffusionLaw, lambda: f64, u_max: f64) -> Result<StructureSet, PipelineError> {
    let spec = GridSpec::default();
    let mut hi = spec.resolve_hi(law).max(u_max);
    if law.s_max().is_finite() {
        hi = hi.min(0.999 * law.s_max());
    }
    Ok(StructureSet::build(law, lambda, GridSpec { s_hi: Some(hi), ..spec })?)
}

fn structure(cfg: &RunConfig, dir: &Path, hash: &str) -> Step {
    let law = cfg.law();
    let lambda = lambda_for(cfg, &law)?;
    let set = StructureSet::build(&law, lambda, GridSpec::default())?;
    let header: Vec<String> = ["s", "a", "I", "H", "h", "F", "G", "F_prime", "G_prime", "sF_pow_check"]
        .map(String::from)
        .to_vec();
    let rows: Vec<Vec<String>> = set
        .rows()?
        .iter()
        .map(|p| {
            [p.s, p.a, p.i, p.h_cap, p.h, p.f, p.g, p.f_prime, p.g_prime, p.sf_pow_check]
                .map(fmt_f64)
                .to_vec()
        })
        .collect();
    let path = dir.join("structure.csv");
    io::write_csv(&path, hash, &header, &rows)?;
    let summary = json!({
        "law": law.spec(),
        "lambda_cap": lambda,
        "lambda_small": set.lambda_small(),
        "points": rows.len(),
        "s_range": [set.s_lo(), set.s_hi()],
        "c_A1": set.a1_constant()?,
    });
    Ok((vec![path], summary))
}

fn check(cfg: &RunConfig, dir: &Path, hash: &str) -> Step {
    let law = cfg.law();
    let lambda = match cfg.lambda {
        LambdaChoice::Value(v) => Some(v),
        LambdaChoice::Auto => None,
    };
    let report = validate(&law, lambda)?;
    let path = dir.join("check.json");
    io::write_json(&path, "check", hash, &report)?;
    Ok((vec![path], to_value(&report)))
}

fn sim_config(cfg: &RunConfig, law: DiffusionLaw) -> SimConfig {
    SimConfig {
        law,
        grid: cfg.grid(),
        cfl: cfg.cfl,
        t_end: cfg.t_end,
        snapshot_every: cfg.snapshot_every,
        boundary: cfg.boundary,
        initial: cfg.initial.clone(),
        max_steps: cfg.max_steps,
    }
}

fn series_summary(series: &SnapshotSeries, snapshot_hash: &str) -> Value {
    json!({
        "law": series.law_spec,
        "steps": series.steps,
        "dt_min": series.dt_min,
        "dt_max": series.dt_max,
        "snapshots": series.snapshots.len(),
        "t_final": series.snapshots.last().map(|s| s.t),
        "boundary_activation": series.boundary_activation,
        "snapshot_hash": snapshot_hash,
    })
}

/// Runs one law and stores the series in `dir`; a budget overrun still
/// stores the partial series before failing.
fn simulate_into(cfg: &RunConfig, law: DiffusionLaw, dir: &Path, hash: &str) -> Result<(SnapshotSeries, String), PipelineError> {
    let text = cfg.emit();
    match run(&sim_config(cfg, law)) {
        Ok(series) => {
            let h = io::save_series(dir, &series, &text, hash, true)?;
            Ok((series, h))
        }
        Err(SolverError::BudgetExceeded { max_steps, t, partial }) => {
            io::save_series(dir, &partial, &text, hash, false)?;
            Err(SolverError::BudgetExceeded { max_steps, t, partial }.into())
        }
        Err(e) => Err(e.into()),
    }
}

fn series_files(dir: &Path) -> Vec<PathBuf> {
    vec![dir.join(io::SNAPSHOT_FILE), dir.join(io::RUN_FILE)]
}

fn simulate(cfg: &RunConfig, dir: &Path, hash: &str) -> Step {
    let (series, h) = simulate_into(cfg, cfg.law(), dir, hash)?;
    Ok((series_files(dir), series_summary(&series, &h)))
}

fn front(cfg: &RunConfig, dir: &Path, hash: &str) -> Step {
    let (series, snapshot_hash, run_hash) = io::load_series(dir)?;
    let a = &cfg.analysis;
    let report = front_report(&series, a.x0, &a.eps, ClassifyRule::default())?;
    let header: Vec<String> = std::iter::once("t".to_string())
        .chain(report.thresholds.iter().map(|e| format!("r_{}", fmt_f64(*e))))
        .collect();
    let rows: Vec<Vec<String>> = report
        .times
        .iter()
        .zip(&report.radii)
        .map(|(t, r)| std::iter::once(*t).chain(r.iter().copied()).map(fmt_f64).collect())
        .collect();
    let csv = dir.join("front.csv");
    io::write_csv(&csv, hash, &header, &rows)?;
    let data = json!({
        "snapshot_hash": snapshot_hash,
        "run_config_hash": run_hash,
        "law": series.law_spec,
        "report": report,
    });
    let path = dir.join("front.json");
    io::write_json(&path, "front", hash, &data)?;
    Ok((vec![csv, path], data))
}

fn max_value(series: &SnapshotSeries) -> f64 {
    series
        .snapshots
        .iter()
        .flat_map(|s| s.values.iter().copied())
        .fold(0.0, f64::max)
}

/// Law, Λ, Caccioppoli constant and structure set for a stored series.
fn series_structure(cfg: &RunConfig, series: &SnapshotSeries) -> Result<(DiffusionLaw, f64, f64, StructureSet), PipelineError> {
    let law = parse_law_spec(&series.law_spec)?;
    let lambda = lambda_for(cfg, &law)?;
    let report = validate(&law, Some(lambda))?;
    let c = report.c_cacc.ok_or_else(|| {
        PipelineError::Precondition(format!("no Caccioppoli constant for {}: {}", law.spec(), report.notes.join("; ")))
    })?;
    let set = structure_for(&law, lambda, max_value(series))?;
    Ok((law, lambda, c, set))
}

fn iterate(cfg: &RunConfig, dir: &Path, hash: &str) -> Step {
    let (series, snapshot_hash, _) = io::load_series(dir)?;
    let dim = series.grid.dim();
    if !series.grid.is_radial() || dim < 3 {
        return Err(PipelineError::Precondition("iterate needs a radial run with N ≥ 3".into()));
    }
    let (_, lambda, c, set) = series_structure(cfg, &series)?;
    let a = &cfg.analysis;
    let sobolev = estimate_sobolev_constant(dim)?;
    let params = make_iteration_params(dim, lambda, a.eps_target, c, sobolev.s, a.ball)?;
    let trace = energy_iteration(&series, &set, &params, a.s, a.n_max)?;
    let data = json!({
        "snapshot_hash": snapshot_hash,
        "law": series.law_spec,
        "sobolev": sobolev,
        "trace": trace,
    });
    let path = dir.join("iterate.json");
    io::write_json(&path, "iterate", hash, &data)?;
    Ok((vec![path], data))
}

fn audit(cfg: &RunConfig, dir: &Path, hash: &str) -> Step {
    let (series, snapshot_hash, _) = io::load_series(dir)?;
    let (_, lambda, c, set) = series_structure(cfg, &series)?;
    let a = &cfg.analysis;
    let tent = Tent::new(a.tent_inner, a.tent_outer)?;
    let times: Vec<f64> = if a.audit_times.is_empty() {
        series.times()
    } else {
        a.audit_times.clone()
    };
    let mut cacc = Vec::new();
    for &t in &times {
        let snap = series
            .snapshots
            .iter()
            .find(|s| (s.t - t).abs() <= 1e-9 * t.abs().max(1e-300))
            .ok_or_else(|| PipelineError::Precondition(format!("t = {t} is not a snapshot time")))?;
        let mut r = check_caccioppoli(&series.grid, &snap.values, &set, &tent, c)?;
        r.t = Some(snap.t);
        cacc.push(r);
    }
    let dim = series.grid.dim();
    let mut sobolev_reports: Vec<InequalityReport> = Vec::new();
    let mut sobolev = None;
    if series.grid.is_radial() && dim >= 3 {
        let est = estimate_sobolev_constant(dim)?;
        let params = make_iteration_params(dim, lambda, a.eps_target, c, est.s, a.ball)?;
        for &t in times.iter().filter(|&&t| t > 0.0) {
            sobolev_reports.push(check_parabolic_sobolev(&series, &set, &params, &tent, a.k_radius, t)?);
        }
        sobolev = Some(est);
    }
    let passed = cacc.iter().chain(&sobolev_reports).all(|r| r.passed);
    let data = json!({
        "snapshot_hash": snapshot_hash,
        "law": series.law_spec,
        "C_cacc": c,
        "sobolev": sobolev,
        "caccioppoli": cacc,
        "parabolic_sobolev": sobolev_reports,
        "passed": passed,
    });
    let path = dir.join("audit.json");
    io::write_json(&path, "audit", hash, &data)?;
    Ok((vec![path], data))
}

#[derive(Debug, Clone, Serialize)]
struct ParadoxSide {
    law: String,
    waiting_times: Vec<Option<f64>>,
    classification: Classification,
    snapshot_hash: String,
}

fn paradox_side(
    cfg: &RunConfig,
    law: DiffusionLaw,
    dir: &Path,
    hash: &str,
) -> Result<ParadoxSide, PipelineError> {
    let a = &cfg.analysis;
    let (series, snapshot_hash) = simulate_into(cfg, law, dir, hash)?;
    let waiting_times = a
        .eps
        .iter()
        .map(|&e| waiting_time(&series, a.x0, e))
        .collect::<Result<_, _>>()?;
    let classification = classify_propagation(&series, a.x0, &a.eps, ClassifyRule::default())?;
    Ok(ParadoxSide {
        law: series.law_spec.clone(),
        waiting_times,
        classification,
        snapshot_hash,
    })
}

/// Runs the configured law and the control law side by side and tabulates
/// their waiting times at `x0`. A threshold that is never reached counts
/// as later than `t_end`.
fn paradox(cfg: &RunConfig, dir: &Path, hash: &str) -> Step {
    let (pdir, cdir) = (dir.join("primary"), dir.join("control"));
    let (primary, control) = rayon::join(
        || paradox_side(cfg, cfg.law(), &pdir, hash),
        || paradox_side(cfg, cfg.control_law(), &cdir, hash),
    );
    let (primary, control) = (primary?, control?);
    let never = |t: Option<f64>| t.map_or("never".to_string(), fmt_f64);
    let mut rows = Vec::new();
    let mut table = Vec::new();
    for (i, &eps) in cfg.analysis.eps.iter().enumerate() {
        let (tp, tc) = (primary.waiting_times[i], control.waiting_times[i]);
        // Lower bound on the primary time when it is never reached.
        let tp_bound = tp.unwrap_or(cfg.t_end);
        let contrast = match tc {
            Some(c) => c < 0.1 * tp_bound,
            None => false,
        };
        rows.push(vec![fmt_f64(eps), never(tp), never(tc), contrast.to_string()]);
        table.push(json!({ "eps": eps, "t_primary": tp, "t_control": tc, "control_below_tenth": contrast }));
    }
    let last = table.last().and_then(|r| r["control_below_tenth"].as_bool()).unwrap_or(false);
    let header: Vec<String> = ["eps", "t_primary", "t_control", "control_below_tenth"].map(String::from).to_vec();
    let csv = dir.join("paradox.csv");
    io::write_csv(&csv, hash, &header, &rows)?;
    let data = json!({
        "x0": cfg.analysis.x0,
        "t_end": cfg.t_end,
        "primary": primary,
        "control": control,
        "table": table,
        "contrast_holds": last,
    });
    let path = dir.join("paradox.json");
    io::write_json(&path, "paradox", hash, &data)?;
    let mut files = vec![csv, path];
    files.extend(series_files(&pdir));
    files.extend(series_files(&cdir));
    Ok((files, data))
}
