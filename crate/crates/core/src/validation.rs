//! Machine checks for the standing assumptions of the convergence results.
//!
//! | # | Check |
//! |---|-------|
//! | 1 | union graph over every window `[pB, (p+1)B)` is strongly connected |
//! | 2 | all `A(k)` share a positive left eigenvector `q` |
//! | 3 | positive weights are at least `eta` |
//! | 4 | the optimal set is nonempty and bounded |
//! | 5 | local objectives are convex |
//! | 6 | constraint sets are bounded, closed and convex (or the full space) |
//! | 7 | step sizes are positive, vanishing and non-summable |
//! | 8 | subgradients are uniformly bounded by `G` |

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::convex::{certify_feasible, certify_subgradient_bound, Mode, G_CERT_SAMPLES};
use crate::engine::{Init, RunConfig, LOCAL_FEASIBILITY_TOL};
use crate::graph::{
    check_joint_strong_connectivity, compute_left_eigenvector, LeftEigenvector, EIGEN_SEQUENCE_TOL,
};
use crate::schedule::{validate_assumption7, ScheduleClass};

/// Number of connectivity windows inspected from round 0.
pub const CONNECTIVITY_WINDOWS: usize = 10;
/// Rounds sampled for the common-eigenvector residual.
pub const EIGEN_SAMPLE_ROUNDS: usize = 100;

/// Assumption numbers whose failure is tolerated (negative controls).
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Waivers(pub BTreeSet<u8>);

impl<const N: usize> From<[u8; N]> for Waivers {
    fn from(a: [u8; N]) -> Self {
        Waivers(a.into_iter().collect())
    }
}

impl Waivers {
    pub fn contains(&self, assumption: u8) -> bool {
        self.0.contains(&assumption)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    Waived,
    Warn,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub assumption: Option<u8>,
    pub status: Status,
    pub detail: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
    #[serde(skip)]
    pub left_eigenvector: Option<LeftEigenvector>,
    pub schedule_class: Option<ScheduleClass>,
    pub certified_g: Option<f64>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.status != Status::Fail)
    }

    /// Human-readable failures, naming the assumption where one applies.
    pub fn violations(&self) -> Vec<String> {
        self.checks
            .iter()
            .filter(|c| c.status == Status::Fail)
            .map(|c| match c.assumption {
                Some(a) => format!("Assumption {a} violated: {}", c.detail),
                None => format!("{}: {}", c.name, c.detail),
            })
            .collect()
    }

    pub fn push(&mut self, name: &str, assumption: Option<u8>, ok: bool, detail: impl Into<String>, waivers: &Waivers) {
        let status = match (ok, assumption) {
            (true, _) => Status::Pass,
            (false, Some(a)) if waivers.contains(a) => Status::Waived,
            (false, _) => Status::Fail,
        };
        self.checks.push(Check {
            name: name.into(),
            assumption,
            status,
            detail: detail.into(),
        });
    }

    pub fn warn(&mut self, name: &str, detail: impl Into<String>) {
        self.checks.push(Check {
            name: name.into(),
            assumption: None,
            status: Status::Warn,
            detail: detail.into(),
        });
    }
}

/// Runs every graph, problem, schedule and run-shape check.
pub fn check_run_config(cfg: &RunConfig, waivers: &Waivers) -> ValidationReport {
    let mut report = ValidationReport::default();
    let spec = &cfg.problem;
    let graph = &cfg.graph;
    let n = spec.n();

    report.push(
        "agent_count",
        None,
        graph.n() == n,
        format!("graph has {} agents, problem has {n}", graph.n()),
        waivers,
    );
    if graph.n() != n {
        return report;
    }

    // Assumption 1
    let b = graph.window();
    let failed_window = (0..CONNECTIVITY_WINDOWS).find(|p| !check_joint_strong_connectivity(graph, p * b, b));
    report.push(
        "joint_strong_connectivity",
        Some(1),
        failed_window.is_none(),
        match failed_window {
            None => format!("union graph strongly connected on the first {CONNECTIVITY_WINDOWS} windows of B = {b}"),
            Some(p) => format!(
                "union graph over rounds [{}, {}) is not strongly connected (B = {b})",
                p * b,
                (p + 1) * b
            ),
        },
        waivers,
    );

    // Assumption 3, plus the self-loop convention
    let horizon = CONNECTIVITY_WINDOWS * b;
    let eta = graph.eta();
    let mut eta_issue = None;
    let mut missing_loop = None;
    for k in 0..horizon {
        let a = graph.matrix(k);
        if eta_issue.is_none() {
            if let Some((i, j, w)) = a.eta_violation(eta) {
                eta_issue = Some(format!("entry a_{}{}({k})={w} < eta={eta}", i + 1, j + 1));
            }
        }
        if missing_loop.is_none() && !a.has_self_loops() {
            missing_loop = Some(k);
        }
    }
    report.push(
        "non_degeneracy",
        Some(3),
        eta_issue.is_none(),
        eta_issue.unwrap_or_else(|| format!("all positive weights >= eta = {eta} over {horizon} rounds")),
        waivers,
    );
    if let Some(k) = missing_loop {
        report.warn(
            "self_loops",
            format!("A({k}) has a zero diagonal entry; agents normally keep weight on their own estimate"),
        );
    }

    // Assumption 2
    match compute_left_eigenvector(graph) {
        Ok(q) => {
            let worst = (0..EIGEN_SAMPLE_ROUNDS)
                .map(|k| q.residual(&graph.matrix(k)))
                .fold(0.0, f64::max);
            report.push(
                "common_left_eigenvector",
                Some(2),
                worst < EIGEN_SEQUENCE_TOL,
                format!("q = {:?}, max residual {worst:e}", q.as_slice()),
                waivers,
            );
            report.left_eigenvector = Some(q);
        }
        Err(e) => report.push("common_left_eigenvector", Some(2), false, e.to_string(), waivers),
    }

    // Assumptions 4-6: convexity and set shape are enforced at construction
    report.push(
        "convex_objectives",
        Some(5),
        true,
        "objectives validated convex at load",
        waivers,
    );
    report.push(
        "constraint_sets",
        Some(6),
        true,
        match spec.mode() {
            Mode::Constrained => "bounded closed convex sets by construction",
            Mode::Unconstrained => "unconstrained: X_i = R^m for every agent",
        },
        waivers,
    );
    match spec.mode() {
        Mode::Constrained => match certify_feasible(spec) {
            Ok(x) => report.push(
                "optimal_set",
                Some(4),
                true,
                format!("intersection nonempty (contains {x:?}) and bounded, so X* is nonempty and bounded"),
                waivers,
            ),
            Err(e) => report.push("optimal_set", Some(4), false, e.to_string(), waivers),
        },
        Mode::Unconstrained => report.warn(
            "optimal_set",
            "unconstrained: a bounded nonempty optimal set is assumed, not certified",
        ),
    }

    // Assumption 8
    match certify_subgradient_bound(spec, G_CERT_SAMPLES, cfg.seed) {
        Ok(g) => {
            report.certified_g = Some(g);
            match spec.g_bound {
                Some(declared) => report.push(
                    "subgradient_bound",
                    Some(8),
                    declared + 1e-12 >= g,
                    format!("declared G = {declared}, certified sup ||g|| = {g}"),
                    waivers,
                ),
                None => report.push(
                    "subgradient_bound",
                    Some(8),
                    true,
                    format!("G = {g} (certified)"),
                    waivers,
                ),
            }
        }
        Err(e) => report.push("subgradient_bound", Some(8), false, e.to_string(), waivers),
    }

    // Assumption 7
    let sched = validate_assumption7(&cfg.schedule);
    report.schedule_class = Some(sched.class);
    let detail = if sched.passed {
        format!("schedule class: {}", sched.class)
    } else {
        sched
            .violations
            .iter()
            .map(|v| v.trim_start_matches("Assumption 7 violated: ").to_string())
            .collect::<Vec<_>>()
            .join("; ")
    };
    report.push("step_sizes", Some(7), sched.passed, detail, waivers);
    if let Some(len) = cfg.schedule.perturbation_len() {
        report.push(
            "perturbation_length",
            None,
            len == n,
            format!("{len} perturbations for {n} agents"),
            waivers,
        );
    }

    // run shape
    if let Init::Explicit { points } = &cfg.init {
        let shape_ok = points.len() == n && points.iter().all(|p| p.len() == spec.m());
        let feasible = shape_ok
            && points
                .iter()
                .zip(spec.constraints())
                .all(|(p, set)| set.contains(p, LOCAL_FEASIBILITY_TOL).unwrap_or(false));
        report.push(
            "initial_points",
            None,
            feasible,
            if !shape_ok {
                format!("expected {n} points of dimension {}", spec.m())
            } else if !feasible {
                "explicit initial points must lie in their constraint sets".to_string()
            } else {
                "explicit initial points feasible".to_string()
            },
            waivers,
        );
    }
    report.push(
        "record_stride",
        None,
        cfg.record_every >= 1,
        format!("record_every = {}", cfg.record_every),
        waivers,
    );
    report
}
