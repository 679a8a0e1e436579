use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::Serialize;

use super::config::{ExperimentConfig, OracleChoice};
use crate::convex::ProblemSpec;
use crate::engine::{run_with_weights, RunSummary, RunTrace};
use crate::error::{Error, Result};
use crate::graph::LeftEigenvector;
use crate::oracle::{solve_centralized, solve_closed_form, solve_grid, OracleSolution};
use crate::schedule::ScheduleClass;
use crate::validation::{check_run_config, ValidationReport, Waivers};

/// Environment variable holding the default output root.
pub const OUT_DIR_ENV: &str = "DSUBGRAD_OUT_DIR";
const DEFAULT_OUT_ROOT: &str = "runs";

/// Command-line overrides applied on top of the config file.
#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    /// Output root; artifacts land in `<root>/<name>/`.
    pub out_root: Option<PathBuf>,
    pub seed: Option<u64>,
    pub rounds: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Success,
    /// A negative control missed its thresholds, as it should.
    ExpectedFailureConfirmed,
    ThresholdFailure,
}

impl std::fmt::Display for RunStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            RunStatus::Success => "success",
            RunStatus::ExpectedFailureConfirmed => "expected-failure confirmed",
            RunStatus::ThresholdFailure => "threshold failure",
        })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ThresholdCheck {
    pub metric: &'static str,
    pub value: Option<f64>,
    pub bound: f64,
    pub met: bool,
}

#[derive(Clone, Debug)]
pub struct Outcome {
    pub status: RunStatus,
    pub dir: PathBuf,
    pub thresholds: Vec<ThresholdCheck>,
    pub oracle: Option<OracleSolution>,
    pub validation: ValidationReport,
    pub trace: RunTrace,
}

/// Runs every assumption check; problems that cannot even be assembled show
/// up as a single failed `config` check.
pub fn validate_config(cfg: &ExperimentConfig) -> ValidationReport {
    match cfg.run_config() {
        Ok(rc) => check_run_config(&rc, &cfg.waivers()),
        Err(Error::NonDegeneracy(detail)) => {
            let mut report = ValidationReport::default();
            report.push("non_degeneracy", Some(3), false, detail, &Waivers::default());
            report
        }
        Err(e) => {
            let mut report = ValidationReport::default();
            report.push("config", None, false, e.to_string(), &cfg.waivers());
            report
        }
    }
}

pub fn validate(path: impl AsRef<Path>) -> Result<ValidationReport> {
    let text = fs::read_to_string(path)?;
    Ok(validate_config(&ExperimentConfig::from_toml(&text)?))
}

pub fn solve_oracle(cfg: &ExperimentConfig, spec: &ProblemSpec, q: &LeftEigenvector) -> Result<Option<OracleSolution>> {
    let o = &cfg.oracle;
    let solution = match o.method {
        OracleChoice::None => return Ok(None),
        OracleChoice::Grid => solve_grid(spec, q, o.resolution)?,
        OracleChoice::CentralizedSubgradient => solve_centralized(spec, q, o.budget)?,
        OracleChoice::ClosedForm => solve_closed_form(spec, q)?,
        OracleChoice::Auto if spec.m() <= 2 && spec.search_box().is_some() => solve_grid(spec, q, o.resolution)?,
        OracleChoice::Auto => solve_centralized(spec, q, o.budget)?,
    };
    Ok(Some(solution))
}

/// `<root>/<name>`, where the root is the first of: the override, the
/// config's `output.dir`, `$DSUBGRAD_OUT_DIR`, `./runs`.
pub fn output_dir(cfg: &ExperimentConfig, root: Option<&Path>) -> PathBuf {
    let root = root
        .map(Path::to_path_buf)
        .or_else(|| cfg.output.dir.as_ref().map(PathBuf::from))
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_ROOT));
    root.join(&cfg.name)
}

fn csv_float(out: &mut String, x: f64) {
    use std::fmt::Write as _;
    // 17 significant digits round-trip every f64
    let _ = write!(out, ",{x:.16e}");
}

fn csv_opt(out: &mut String, x: Option<f64>) {
    match x {
        Some(v) => csv_float(out, v),
        None => out.push(','),
    }
}

/// One row per recorded round; absent metrics are empty fields.
pub fn write_trace_csv(trace: &RunTrace, w: impl Write) -> Result<()> {
    let mut w = BufWriter::new(w);
    let m = trace.records.first().map_or(0, |r| r.y.len());
    let mut header = String::from("k,alpha,consensus_diameter,objective_at_y,weighted_objective_gap,dist_to_opt,max_infeasibility");
    for d in 0..m {
        header.push_str(&format!(",y_{d}"));
    }
    writeln!(w, "{header}")?;
    let mut line = String::new();
    for r in &trace.records {
        line.clear();
        line.push_str(&r.k.to_string());
        csv_float(&mut line, r.alpha);
        csv_float(&mut line, r.metrics.consensus_diameter);
        csv_float(&mut line, r.metrics.objective_at_y);
        csv_opt(&mut line, r.metrics.weighted_objective_gap);
        csv_opt(&mut line, r.metrics.dist_to_opt);
        csv_float(&mut line, r.metrics.max_infeasibility);
        for &y in &r.y {
            csv_float(&mut line, y);
        }
        writeln!(w, "{line}")?;
    }
    w.flush()?;
    Ok(())
}

fn check_thresholds(cfg: &ExperimentConfig, summary: &RunSummary) -> Vec<ThresholdCheck> {
    let mut checks = Vec::new();
    if let Some(bound) = cfg.expect.max_objective_gap {
        let value = summary.projected_objective_gap;
        checks.push(ThresholdCheck {
            metric: "objective_gap",
            value,
            bound,
            met: value.is_some_and(|v| v < bound),
        });
    }
    if let Some(bound) = cfg.expect.max_consensus_diameter {
        let value = summary.final_consensus_diameter;
        checks.push(ThresholdCheck {
            metric: "consensus_diameter",
            value: Some(value),
            bound,
            met: value < bound,
        });
    }
    checks
}

#[derive(Serialize)]
struct SummaryFile<'a> {
    name: &'a str,
    description: &'a str,
    status: RunStatus,
    schedule_class: Option<ScheduleClass>,
    q: &'a [f64],
    certified_g: Option<f64>,
    oracle: Option<&'a OracleSolution>,
    summary: &'a RunSummary,
    thresholds: &'a [ThresholdCheck],
    validation: &'a ValidationReport,
    config: &'a ExperimentConfig,
}

#[derive(Serialize)]
struct Metadata<'a> {
    name: &'a str,
    version: &'a str,
    started_unix: f64,
    finished_unix: f64,
    elapsed_seconds: f64,
}

fn unix_now() -> f64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0.0, |d| d.as_secs_f64())
}

fn render_report(cfg: &ExperimentConfig, outcome: &Outcome) -> String {
    let s = &outcome.trace.summary;
    let mut out = String::new();
    out.push_str(&format!("experiment: {}\n", cfg.name));
    if !cfg.description.is_empty() {
        out.push_str(&format!("{}\n", cfg.description));
    }
    out.push_str(&format!("status: {}\n\n", outcome.status));
    out.push_str(&format!("rounds: {}\n", s.rounds));
    out.push_str(&format!("schedule class: {}\n", s.schedule_class));
    out.push_str(&format!("q: {:?}\n", outcome.trace.q.as_slice()));
    if let Some(o) = &outcome.oracle {
        out.push_str(&format!(
            "oracle: {:?}, f* = {:.12e}, x* = {:?} (certified gap {:.3e})\n",
            o.method, o.f_star, o.x_star, o.certified_gap
        ));
    }
    out.push_str(&format!("final y: {:?}\n", s.final_y));
    out.push_str(&format!("final consensus diameter: {:.6e}\n", s.final_consensus_diameter));
    out.push_str(&format!("final f(y): {:.12e}\n", s.final_objective_at_y));
    if let Some(g) = s.projected_objective_gap {
        out.push_str(&format!("f(P_X(y)) - f*: {g:.6e}\n"));
    }
    out.push_str(&format!("max dist(x_i, X_i) over all rounds: {:.3e}\n", s.max_local_infeasibility));
    out.push_str(&format!("final max dist(x_i, X): {:.3e}\n", s.final_max_infeasibility));
    if !outcome.thresholds.is_empty() {
        out.push_str("\nthresholds");
        if cfg.expect.expect_failure {
            out.push_str(" (negative control: expected to be missed)");
        }
        out.push('\n');
        for t in &outcome.thresholds {
            let value = t.value.map_or("n/a".to_string(), |v| format!("{v:.6e}"));
            let verdict = if t.met { "met" } else { "missed" };
            out.push_str(&format!("  {}: {value} < {:e}  {verdict}\n", t.metric, t.bound));
        }
    }
    let waived: Vec<_> = outcome
        .validation
        .checks
        .iter()
        .filter(|c| c.status != crate::validation::Status::Pass)
        .collect();
    if !waived.is_empty() {
        out.push_str("\nvalidation notes\n");
        for c in waived {
            out.push_str(&format!("  [{:?}] {}: {}\n", c.status, c.name, c.detail));
        }
    }
    out
}

/// Validates, solves the oracle, runs the engine and writes the artifacts.
///
/// Validation failures come back as [`Error::Validation`]; engine and oracle
/// failures as their own variants. Missed thresholds are not errors, they are
/// reported through [`Outcome::status`].
pub fn run_experiment(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<Outcome> {
    let started = unix_now();
    let clock = Instant::now();
    let mut cfg = cfg.clone();
    if let Some(seed) = opts.seed {
        cfg.run.seed = seed;
    }
    if let Some(rounds) = opts.rounds {
        cfg.run.rounds = rounds;
    }

    let validation = validate_config(&cfg);
    if !validation.passed() {
        return Err(Error::Validation(validation.violations()));
    }
    let rc = cfg.run_config()?;
    let q = validation
        .left_eigenvector
        .clone()
        .ok_or_else(|| Error::Run("validation produced no left eigenvector".into()))?;
    let oracle = solve_oracle(&cfg, &rc.problem, &q)?;
    let trace = run_with_weights(&rc, &q, oracle.as_ref())?;

    let thresholds = check_thresholds(&cfg, &trace.summary);
    let all_met = thresholds.iter().all(|t| t.met);
    let status = match (cfg.expect.expect_failure, all_met) {
        (false, true) => RunStatus::Success,
        (true, false) => RunStatus::ExpectedFailureConfirmed,
        _ => RunStatus::ThresholdFailure,
    };

    let dir = output_dir(&cfg, opts.out_root.as_deref());
    fs::create_dir_all(&dir)?;
    let outcome = Outcome {
        status,
        dir: dir.clone(),
        thresholds,
        oracle,
        validation,
        trace,
    };

    write_trace_csv(&outcome.trace, fs::File::create(dir.join("trace.csv"))?)?;
    let summary = SummaryFile {
        name: &cfg.name,
        description: &cfg.description,
        status,
        schedule_class: outcome.validation.schedule_class,
        q: outcome.trace.q.as_slice(),
        certified_g: outcome.validation.certified_g,
        oracle: outcome.oracle.as_ref(),
        summary: &outcome.trace.summary,
        thresholds: &outcome.thresholds,
        validation: &outcome.validation,
        config: &cfg,
    };
    fs::write(dir.join("summary.json"), serde_json::to_string_pretty(&summary)? + "\n")?;
    fs::write(dir.join("report.txt"), render_report(&cfg, &outcome))?;
    let meta = Metadata {
        name: &cfg.name,
        version: env!("CARGO_PKG_VERSION"),
        started_unix: started,
        finished_unix: unix_now(),
        elapsed_seconds: clock.elapsed().as_secs_f64(),
    };
    fs::write(dir.join("metadata.json"), serde_json::to_string_pretty(&meta)? + "\n")?;
    Ok(outcome)
}
