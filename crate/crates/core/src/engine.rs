//! Synchronous round-based executor of the distributed projected subgradient
//! update
//!
//! ```text
//! v_i(k)   = sum_j a_ij(k) x_j(k)
//! g_i(k)   in ∂f_i(v_i(k))
//! x_i(k+1) = P_{X_i}(v_i(k) - alpha_i(k) g_i(k))
//! ```
//!
//! Each round reads only the frozen previous-round states, so agent updates
//! are independent; metric reductions run in agent-index order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::convex::{BoxBounds, Intersection, Mode, ProblemSpec};
use crate::error::{Error, Result};
use crate::graph::{GraphSequence, LeftEigenvector, WeightMatrix};
use crate::linalg::{all_finite, dist, norm_inf, weighted_sum};
use crate::oracle::OracleSolution;
use crate::schedule::{validate_assumption7, ScheduleClass, StepSchedule};
use crate::validation::{check_run_config, Waivers};

/// Slack allowed on `x_i ∈ X_i` after a round.
pub const LOCAL_FEASIBILITY_TOL: f64 = 1e-9;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Init {
    Zeros,
    /// Uniform in `X_i` (constrained) or in `[-1, 1]^m` (unconstrained).
    #[default]
    SeededUniform,
    Explicit { points: Vec<Vec<f64>> },
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub problem: ProblemSpec,
    pub graph: GraphSequence,
    pub schedule: StepSchedule,
    pub rounds: usize,
    pub init: Init,
    pub record_every: usize,
    pub seed: u64,
    /// Lets a schedule outside the positive/vanishing/non-summable envelope
    /// run, for negative controls.
    pub allow_invalid_schedule: bool,
}

impl RunConfig {
    pub fn new(problem: ProblemSpec, graph: GraphSequence, schedule: StepSchedule) -> Self {
        Self {
            problem,
            graph,
            schedule,
            rounds: 1000,
            init: Init::default(),
            record_every: 1,
            seed: 0,
            allow_invalid_schedule: false,
        }
    }

    pub fn rounds(mut self, rounds: usize) -> Self {
        self.rounds = rounds;
        self
    }

    pub fn init(mut self, init: Init) -> Self {
        self.init = init;
        self
    }

    pub fn record_every(mut self, stride: usize) -> Self {
        self.record_every = stride;
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn allow_invalid_schedule(mut self, allow: bool) -> Self {
        self.allow_invalid_schedule = allow;
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    /// `max_{i,j} ||x_i - x_j||`
    pub consensus_diameter: f64,
    /// `f(y) = sum_i q_i f_i(y)`
    pub objective_at_y: f64,
    /// `f(y) - f*`, present when an oracle solution is supplied.
    pub weighted_objective_gap: Option<f64>,
    /// `||y - x*||`, present for problems declared to have a unique minimizer.
    pub dist_to_opt: Option<f64>,
    /// `max_i dist(x_i, ∩_j X_j)`
    pub max_infeasibility: f64,
    /// `max_i dist(x_i, X_i)`
    pub max_local_infeasibility: f64,
}

/// Snapshot of round `k`: the estimates `x(k)` and the quantities used to
/// move from `x(k)` to `x(k+1)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub k: usize,
    /// Common step `alpha(k)`.
    pub alpha: f64,
    pub x: Vec<Vec<f64>>,
    pub v: Vec<Vec<f64>>,
    /// `y(k) = sum_i q_i x_i(k)`
    pub y: Vec<f64>,
    pub g: Vec<Vec<f64>>,
    pub alpha_used: Vec<f64>,
    pub metrics: Metrics,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub rounds: usize,
    pub schedule_class: ScheduleClass,
    pub final_consensus_diameter: f64,
    pub final_objective_at_y: f64,
    pub final_objective_gap: Option<f64>,
    /// Smallest gap over the recorded rounds.
    pub best_objective_gap: Option<f64>,
    pub final_dist_to_opt: Option<f64>,
    pub final_y: Vec<f64>,
    /// `P_X(y(K))` with `X = ∩ X_i`.
    pub projected_final_y: Vec<f64>,
    /// `f(P_X(y(K))) - f*`
    pub projected_objective_gap: Option<f64>,
    pub final_max_infeasibility: f64,
    /// Largest `dist(x_i, X_i)` over every executed round, recorded or not.
    pub max_local_infeasibility: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunTrace {
    pub mode: Mode,
    pub q: LeftEigenvector,
    pub records: Vec<RoundRecord>,
    pub summary: RunSummary,
}

/// Result of one synchronous round.
#[derive(Clone, Debug, PartialEq)]
pub struct StepOutput {
    pub next: Vec<Vec<f64>>,
    pub v: Vec<Vec<f64>>,
    pub g: Vec<Vec<f64>>,
}

/// Per-agent projection operators, built once per run.
struct Stepper<'a> {
    spec: &'a ProblemSpec,
    local: Vec<Intersection>,
    global: Intersection,
}

impl<'a> Stepper<'a> {
    fn new(spec: &'a ProblemSpec) -> Self {
        Self {
            spec,
            local: spec
                .constraints()
                .iter()
                .map(|c| Intersection::of(std::iter::once(c)))
                .collect(),
            global: spec.intersection(),
        }
    }

    fn mix(&self, states: &[Vec<f64>], a: &WeightMatrix) -> Vec<Vec<f64>> {
        let m = self.spec.m();
        (0..states.len())
            .map(|i| {
                let row: Vec<f64> = (0..states.len()).map(|j| a.get(i, j)).collect();
                weighted_sum(&row, states, m)
            })
            .collect()
    }

    fn subgradients(&self, v: &[Vec<f64>]) -> Vec<Vec<f64>> {
        self.spec
            .objectives()
            .iter()
            .zip(v)
            .map(|(f, vi)| f.subgradient(vi))
            .collect()
    }

    fn advance(&self, v: &[Vec<f64>], g: &[Vec<f64>], alphas: &[f64]) -> Result<Vec<Vec<f64>>> {
        v.iter()
            .zip(g)
            .zip(alphas)
            .zip(&self.local)
            .map(|(((vi, gi), a), set)| {
                let pre: Vec<f64> = vi.iter().zip(gi).map(|(x, s)| x - a * s).collect();
                set.project(&pre)
            })
            .collect()
    }

    fn step(&self, states: &[Vec<f64>], a: &WeightMatrix, alphas: &[f64]) -> Result<StepOutput> {
        let v = self.mix(states, a);
        let g = self.subgradients(&v);
        let next = self.advance(&v, &g, alphas)?;
        Ok(StepOutput { next, v, g })
    }

    fn local_infeasibility(&self, states: &[Vec<f64>]) -> Result<f64> {
        let mut worst = 0.0_f64;
        for (x, set) in states.iter().zip(&self.local) {
            worst = worst.max(set.distance(x)?);
        }
        Ok(worst)
    }

    fn global_infeasibility(&self, states: &[Vec<f64>]) -> Result<f64> {
        if self.global.is_full_space() {
            return Ok(0.0);
        }
        let mut worst = 0.0_f64;
        for x in states {
            worst = worst.max(self.global.distance(x)?);
        }
        Ok(worst)
    }
}

/// One synchronous round of the update for all agents.
pub fn step(
    states: &[Vec<f64>],
    a: &WeightMatrix,
    alphas: &[f64],
    spec: &ProblemSpec,
) -> Result<StepOutput> {
    let n = spec.n();
    if states.len() != n || a.n() != n || alphas.len() != n {
        return Err(Error::Run(format!(
            "expected {n} agents, got {} states, {}x{} matrix, {} steps",
            states.len(),
            a.n(),
            a.n(),
            alphas.len()
        )));
    }
    if states.iter().any(|x| x.len() != spec.m()) {
        return Err(Error::Run(format!("states must have dimension {}", spec.m())));
    }
    Stepper::new(spec).step(states, a, alphas)
}

/// Largest pairwise distance between estimates.
pub fn consensus_diameter(x: &[Vec<f64>]) -> f64 {
    let mut worst = 0.0_f64;
    for i in 0..x.len() {
        for j in i + 1..x.len() {
            worst = worst.max(dist(&x[i], &x[j]));
        }
    }
    worst
}

pub fn consensus_error(record: &RoundRecord) -> f64 {
    consensus_diameter(&record.x)
}

fn initial_states(cfg: &RunConfig) -> Result<Vec<Vec<f64>>> {
    let spec = &cfg.problem;
    let (n, m) = (spec.n(), spec.m());
    match &cfg.init {
        Init::Zeros => Ok(vec![vec![0.0; m]; n]),
        Init::SeededUniform => {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            let cube = BoxBounds::cube(m, -1.0, 1.0);
            Ok(spec
                .constraints()
                .iter()
                .map(|set| set.sample(&mut rng).unwrap_or_else(|| cube.sample(&mut rng)))
                .collect())
        }
        Init::Explicit { points } => Ok(points.clone()),
    }
}

/// Executes `cfg.rounds` rounds. Metrics against `x*` and `f*` are filled in
/// only when `oracle` is given.
pub fn run(cfg: &RunConfig, oracle: Option<&OracleSolution>) -> Result<RunTrace> {
    let waivers = if cfg.allow_invalid_schedule {
        Waivers::from([7])
    } else {
        Waivers::default()
    };
    let report = check_run_config(cfg, &waivers);
    if !report.passed() {
        return Err(Error::Run(report.violations().join("; ")));
    }
    let q = report
        .left_eigenvector
        .clone()
        .ok_or_else(|| Error::Run("no left eigenvector".into()))?;
    run_with_weights(cfg, &q, oracle)
}

/// Like [`run`] but with a caller-supplied `q` and no assumption checks beyond
/// shape consistency.
pub fn run_with_weights(
    cfg: &RunConfig,
    q: &LeftEigenvector,
    oracle: Option<&OracleSolution>,
) -> Result<RunTrace> {
    let spec = &cfg.problem;
    let (n, m) = (spec.n(), spec.m());
    if cfg.graph.n() != n || q.as_slice().len() != n {
        return Err(Error::Run(format!(
            "graph has {} agents and q has {}, problem has {n}",
            cfg.graph.n(),
            q.as_slice().len()
        )));
    }
    if cfg.record_every == 0 {
        return Err(Error::Run("record_every must be at least 1".into()));
    }
    let stepper = Stepper::new(spec);
    let qs = q.as_slice();
    let schedule_class = validate_assumption7(&cfg.schedule).class;

    let mut x = initial_states(cfg)?;
    if x.len() != n || x.iter().any(|xi| xi.len() != m) {
        return Err(Error::Run(format!("initial states must be {n} vectors of length {m}")));
    }
    let mut records = Vec::new();
    let mut max_local = stepper.local_infeasibility(&x)?;
    let mut best_gap: Option<f64> = None;

    for k in 0..=cfg.rounds {
        for (i, xi) in x.iter().enumerate() {
            if !all_finite(xi) {
                return Err(Error::NonFinite { agent: i, round: k });
            }
        }
        let a = cfg.graph.matrix(k);
        let alphas: Vec<f64> = (0..n).map(|i| cfg.schedule.agent_alpha(i, k)).collect();
        let out = stepper.step(&x, &a, &alphas)?;

        let record_now = k % cfg.record_every == 0 || k == cfg.rounds;
        if record_now {
            let y = weighted_sum(qs, &x, m);
            let objective_at_y = spec.weighted_value(qs, &y);
            let gap = oracle.map(|o| objective_at_y - o.f_star);
            if let Some(gv) = gap {
                best_gap = Some(best_gap.map_or(gv, |b| b.min(gv)));
            }
            let metrics = Metrics {
                consensus_diameter: consensus_diameter(&x),
                objective_at_y,
                weighted_objective_gap: gap,
                dist_to_opt: oracle
                    .filter(|_| spec.unique_minimizer)
                    .map(|o| dist(&y, &o.x_star)),
                max_infeasibility: stepper.global_infeasibility(&x)?,
                max_local_infeasibility: stepper.local_infeasibility(&x)?,
            };
            records.push(RoundRecord {
                k,
                alpha: cfg.schedule.alpha(k),
                x: x.clone(),
                v: out.v,
                y,
                g: out.g,
                alpha_used: alphas,
                metrics,
            });
        }
        if k == cfg.rounds {
            break;
        }
        x = out.next;
        max_local = max_local.max(stepper.local_infeasibility(&x)?);
    }

    let last = records.last().expect("final round is always recorded");
    let projected = stepper.global.project(&last.y)?;
    let projected_value = spec.weighted_value(qs, &projected);
    let summary = RunSummary {
        rounds: cfg.rounds,
        schedule_class,
        final_consensus_diameter: last.metrics.consensus_diameter,
        final_objective_at_y: last.metrics.objective_at_y,
        final_objective_gap: last.metrics.weighted_objective_gap,
        best_objective_gap: best_gap,
        final_dist_to_opt: last.metrics.dist_to_opt,
        final_y: last.y.clone(),
        projected_final_y: projected,
        projected_objective_gap: oracle.map(|o| projected_value - o.f_star),
        final_max_infeasibility: last.metrics.max_infeasibility,
        max_local_infeasibility: max_local,
    };
    Ok(RunTrace {
        mode: spec.mode(),
        q: q.clone(),
        records,
        summary,
    })
}

/// `max_k ||y(k+1) - (y(k) - sum_i q_i alpha_i(k) g_i(k))||_inf` over a trace
/// recorded every round. Without projections this is an exact identity, so
/// the residual only reflects rounding.
pub fn weighted_average_recursion_check(trace: &RunTrace, q: &LeftEigenvector) -> Result<f64> {
    if trace.mode != Mode::Unconstrained {
        return Err(Error::Run(
            "the weighted-average recursion only holds without projections".into(),
        ));
    }
    let qs = q.as_slice();
    let mut worst = 0.0_f64;
    for pair in trace.records.windows(2) {
        let (cur, next) = (&pair[0], &pair[1]);
        if next.k != cur.k + 1 {
            return Err(Error::Run(format!(
                "trace must be recorded every round (rounds {} and {} are adjacent)",
                cur.k, next.k
            )));
        }
        let mut predicted = cur.y.clone();
        for ((qi, gi), ai) in qs.iter().zip(&cur.g).zip(&cur.alpha_used) {
            for (p, s) in predicted.iter_mut().zip(gi) {
                *p -= qi * ai * s;
            }
        }
        let diff: Vec<f64> = next.y.iter().zip(&predicted).map(|(a, b)| a - b).collect();
        worst = worst.max(norm_inf(&diff));
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convex::{ConstraintSet, Objective};
    use crate::graph::GraphSequence;

    fn sq(center: f64) -> Objective {
        // (x - center)^2
        Objective::Quadratic {
            p: vec![vec![2.0]],
            c: vec![-2.0 * center],
            b: center * center,
        }
    }

    fn two_agent_spec() -> ProblemSpec {
        ProblemSpec::unconstrained(1, vec![sq(1.0), sq(-1.0)])
            .unwrap()
            .with_sampling_box(BoxBounds::cube(1, -2.0, 2.0))
            .unwrap()
    }

    fn half() -> WeightMatrix {
        WeightMatrix::from_rows(&[vec![0.5, 0.5], vec![0.5, 0.5]]).unwrap()
    }

    #[test]
    fn step_hand_evaluated() {
        let out = step(&[vec![0.0], vec![0.0]], &half(), &[0.1, 0.1], &two_agent_spec()).unwrap();
        assert_eq!(out.v, vec![vec![0.0], vec![0.0]]);
        assert_eq!(out.g, vec![vec![-2.0], vec![2.0]]);
        assert!((out.next[0][0] - 0.2).abs() < 1e-15);
        assert!((out.next[1][0] + 0.2).abs() < 1e-15);
    }

    #[test]
    fn zero_step_identity_matrix_is_fixed_point() {
        let spec = two_agent_spec();
        let x = vec![vec![0.3], vec![-1.7]];
        let out = step(&x, &WeightMatrix::identity(2), &[0.0, 0.0], &spec).unwrap();
        assert_eq!(out.next, x);

        let boxed = ProblemSpec::new(
            1,
            vec![sq(0.0), sq(0.0)],
            vec![
                ConstraintSet::Box { lo: vec![0.0], hi: vec![1.0] },
                ConstraintSet::Box { lo: vec![-1.0], hi: vec![0.5] },
            ],
        )
        .unwrap();
        let out = step(&[vec![2.0], vec![-3.0]], &WeightMatrix::identity(2), &[0.0, 0.0], &boxed)
            .unwrap();
        assert_eq!(out.next, vec![vec![1.0], vec![-1.0]]);
    }

    #[test]
    fn step_clamps_at_boundary() {
        let spec = ProblemSpec::new(
            1,
            vec![Objective::Affine { c: vec![1.0], b: 0.0 }],
            vec![ConstraintSet::Box { lo: vec![0.0], hi: vec![1.0] }],
        )
        .unwrap();
        let out = step(&[vec![0.05]], &WeightMatrix::identity(1), &[0.1], &spec).unwrap();
        assert_eq!(out.v, vec![vec![0.05]]);
        assert_eq!(out.g, vec![vec![1.0]]);
        assert_eq!(out.next, vec![vec![0.0]]);
    }

    #[test]
    fn step_rejects_shape_mismatch() {
        assert!(step(&[vec![0.0]], &half(), &[0.1, 0.1], &two_agent_spec()).is_err());
    }

    #[test]
    fn consensus_examples() {
        assert_eq!(consensus_diameter(&[vec![1.0, 2.0], vec![1.0, 2.0]]), 0.0);
        assert_eq!(consensus_diameter(&[vec![0.0], vec![1.0]]), 1.0);
        assert_eq!(consensus_diameter(&[vec![0.0, 0.0], vec![3.0, 4.0]]), 5.0);
    }

    #[test]
    fn zero_rounds_records_only_initial_state() {
        let graph = GraphSequence::fixed(half(), 0.1).unwrap();
        let cfg = RunConfig::new(two_agent_spec(), graph, StepSchedule::inverse_sqrt())
            .rounds(0)
            .init(Init::Explicit { points: vec![vec![0.5], vec![-0.25]] });
        let trace = run(&cfg, None).unwrap();
        assert_eq!(trace.records.len(), 1);
        assert_eq!(trace.records[0].k, 0);
        assert!((trace.records[0].metrics.consensus_diameter - 0.75).abs() < 1e-15);
        assert_eq!(trace.records[0].y, vec![0.125]);
    }

    #[test]
    fn invalid_schedule_needs_waiver() {
        let graph = GraphSequence::fixed(half(), 0.1).unwrap();
        let cfg = RunConfig::new(two_agent_spec(), graph, StepSchedule::Constant { a: 0.1 }).rounds(5);
        assert!(run(&cfg, None).is_err());
        assert!(run(&cfg.clone().allow_invalid_schedule(true), None).is_ok());
    }

    #[test]
    fn recursion_check_rejects_constrained_and_strided_traces() {
        let spec = ProblemSpec::new(
            1,
            vec![sq(1.0), sq(-1.0)],
            vec![
                ConstraintSet::Box { lo: vec![-1.0], hi: vec![1.0] },
                ConstraintSet::Box { lo: vec![-0.5], hi: vec![2.0] },
            ],
        )
        .unwrap();
        let graph = GraphSequence::fixed(half(), 0.1).unwrap();
        let cfg = RunConfig::new(spec, graph.clone(), StepSchedule::inverse_sqrt()).rounds(20);
        let trace = run(&cfg, None).unwrap();
        assert!(weighted_average_recursion_check(&trace, &trace.q).is_err());

        let cfg = RunConfig::new(two_agent_spec(), graph, StepSchedule::inverse_sqrt())
            .rounds(20)
            .record_every(3);
        let trace = run(&cfg, None).unwrap();
        assert!(weighted_average_recursion_check(&trace, &trace.q).is_err());
    }

    #[test]
    fn record_stride_keeps_first_and_last() {
        let graph = GraphSequence::fixed(half(), 0.1).unwrap();
        let cfg = RunConfig::new(two_agent_spec(), graph, StepSchedule::inverse_sqrt())
            .rounds(10)
            .record_every(4);
        let ks: Vec<usize> = run(&cfg, None).unwrap().records.iter().map(|r| r.k).collect();
        assert_eq!(ks, vec![0, 4, 8, 10]);
    }

    #[test]
    fn divergence_aborts() {
        // huge constant steps on a quadratic blow up
        let graph = GraphSequence::fixed(half(), 0.1).unwrap();
        let cfg = RunConfig::new(two_agent_spec(), graph, StepSchedule::Constant { a: 1e200 })
            .allow_invalid_schedule(true)
            .rounds(50);
        assert!(matches!(run(&cfg, None), Err(Error::NonFinite { .. })));
    }
}
