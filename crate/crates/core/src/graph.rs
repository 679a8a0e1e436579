//! Communication topologies as sequences of row-stochastic weight matrices.
//!
//! Entry `a_ij(k)` is the weight agent `i` puts on the estimate received from
//! agent `j` at round `k`; a positive entry means the directed edge `j -> i`
//! is active. Three sequence kinds are supported: a fixed matrix, a periodic
//! cycle of matrices and seeded random switching over an edge pool.

use std::borrow::Cow;
use std::collections::VecDeque;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on row and column sums.
pub const STOCHASTIC_TOL: f64 = 1e-12;
/// Non-degeneracy bound used when a config leaves `eta` unset.
pub const DEFAULT_ETA: f64 = 0.1;
/// Residual bound on `q^T A - q^T` for a freshly computed eigenvector.
pub const EIGEN_SOLVE_TOL: f64 = 1e-10;
/// Residual bound on `q^T A(k) - q^T` for any matrix of a sequence.
pub const EIGEN_SEQUENCE_TOL: f64 = 1e-9;

/// Per-row diagnostics for the row-stochastic check.
#[derive(Clone, Debug, PartialEq)]
pub struct RowStochasticReport {
    /// `|sum_j a_ij - 1|` for every row.
    pub row_deviation: Vec<f64>,
    /// `(i, j)` positions holding negative entries.
    pub negative_entries: Vec<(usize, usize)>,
    pub passed: bool,
}

/// Checks that `a` is a nonnegative matrix whose rows sum to one.
pub fn validate_row_stochastic(a: &DMatrix<f64>) -> Result<RowStochasticReport> {
    if a.nrows() != a.ncols() {
        return Err(Error::Matrix(format!(
            "matrix is {}x{}, expected square",
            a.nrows(),
            a.ncols()
        )));
    }
    if a.iter().any(|x| !x.is_finite()) {
        return Err(Error::Matrix("matrix has non-finite entries".into()));
    }
    let n = a.nrows();
    let mut row_deviation = Vec::with_capacity(n);
    let mut negative_entries = Vec::new();
    for i in 0..n {
        let mut sum = 0.0;
        for j in 0..n {
            let x = a[(i, j)];
            if x < 0.0 {
                negative_entries.push((i, j));
            }
            sum += x;
        }
        row_deviation.push((sum - 1.0).abs());
    }
    let passed =
        negative_entries.is_empty() && row_deviation.iter().all(|d| *d < STOCHASTIC_TOL);
    Ok(RowStochasticReport {
        row_deviation,
        negative_entries,
        passed,
    })
}

/// Builds a dense matrix from row literals, rejecting ragged input.
pub fn dense_from_rows(rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let n = rows.len();
    let ncols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != ncols) {
        return Err(Error::Matrix("rows have differing lengths".into()));
    }
    Ok(DMatrix::from_fn(n, ncols, |i, j| rows[i][j]))
}

/// A validated row-stochastic weight matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightMatrix {
    a: DMatrix<f64>,
}

impl WeightMatrix {
    pub fn new(a: DMatrix<f64>) -> Result<Self> {
        if a.nrows() == 0 {
            return Err(Error::Matrix("matrix is empty".into()));
        }
        let report = validate_row_stochastic(&a)?;
        if !report.passed {
            if let Some(&(i, j)) = report.negative_entries.first() {
                return Err(Error::Matrix(format!("negative entry a_{}{} = {}", i + 1, j + 1, a[(i, j)])));
            }
            let (row, dev) = report
                .row_deviation
                .iter()
                .enumerate()
                .fold((0, 0.0), |acc, (i, d)| if *d > acc.1 { (i, *d) } else { acc });
            return Err(Error::Matrix(format!(
                "row {row} deviates from 1 by {dev:e}"
            )));
        }
        Ok(Self { a })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        Self::new(dense_from_rows(rows)?)
    }

    pub fn identity(n: usize) -> Self {
        Self {
            a: DMatrix::identity(n, n),
        }
    }

    pub fn n(&self) -> usize {
        self.a.nrows()
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.a[(i, j)]
    }

    pub fn as_dmatrix(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.n())
            .map(|i| (0..self.n()).map(|j| self.a[(i, j)]).collect())
            .collect()
    }

    pub fn has_self_loops(&self) -> bool {
        (0..self.n()).all(|i| self.a[(i, i)] > 0.0)
    }

    /// Smallest positive entry (1.0 for an all-zero matrix, which cannot occur).
    pub fn min_positive_entry(&self) -> f64 {
        self.a
            .iter()
            .copied()
            .filter(|x| *x > 0.0)
            .fold(1.0_f64, f64::min)
    }

    /// First `(i, j)` with `0 < a_ij < eta`, if any.
    pub fn eta_violation(&self, eta: f64) -> Option<(usize, usize, f64)> {
        for i in 0..self.n() {
            for j in 0..self.n() {
                let x = self.a[(i, j)];
                if x > 0.0 && x < eta {
                    return Some((i, j, x));
                }
            }
        }
        None
    }

    /// Active directed edges as `(from, to)` pairs, i.e. `(j, i)` with `a_ij > 0`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let n = self.n();
        (0..n).flat_map(move |i| {
            (0..n).filter_map(move |j| (self.a[(i, j)] > 0.0).then_some((j, i)))
        })
    }
}

/// True iff every column also sums to one.
pub fn check_balanced(a: &WeightMatrix) -> bool {
    let n = a.n();
    (0..n).all(|j| {
        let col: f64 = (0..n).map(|i| a.get(i, j)).sum();
        (col - 1.0).abs() < STOCHASTIC_TOL
    })
}

/// Strong connectivity of a directed graph given as `adj[from][to]`: every
/// vertex reaches vertex 0 and is reached from it.
pub fn is_strongly_connected(adj: &[Vec<bool>]) -> bool {
    let n = adj.len();
    if n <= 1 {
        return true;
    }
    let reach = |forward: bool| {
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        while let Some(u) = queue.pop_front() {
            for v in 0..n {
                let edge = if forward { adj[u][v] } else { adj[v][u] };
                if edge && !seen[v] {
                    seen[v] = true;
                    queue.push_back(v);
                }
            }
        }
        seen.into_iter().all(|s| s)
    };
    reach(true) && reach(false)
}

/// How neighbor weights are assigned by the topology builders.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightScheme {
    /// `a_ij = 1 / (1 + in-degree of i)` over in-neighbors and self.
    #[default]
    Uniform,
    /// `a_ij = 1 / (1 + max(d_i, d_j))`, self weight takes the remainder.
    /// Symmetric, hence doubly stochastic; undirected edges only.
    Metropolis,
}

/// Builds a weight matrix from an edge list. With `directed`, `[j, i]` is the
/// edge `j -> i`; otherwise each pair is added in both directions. Self-loops
/// are always present.
pub fn weights_from_edges(
    n: usize,
    edges: &[[usize; 2]],
    directed: bool,
    scheme: WeightScheme,
) -> Result<WeightMatrix> {
    let mut adj = vec![vec![false; n]; n];
    for &[j, i] in edges {
        if i >= n || j >= n {
            return Err(Error::Graph(format!("edge [{j}, {i}] out of range for n = {n}")));
        }
        if i == j {
            continue;
        }
        adj[i][j] = true;
        if !directed {
            adj[j][i] = true;
        }
    }
    // adj[i][j]: i receives from j
    let in_degree: Vec<usize> = adj.iter().map(|r| r.iter().filter(|b| **b).count()).collect();
    let mut a = DMatrix::<f64>::zeros(n, n);
    match scheme {
        WeightScheme::Uniform => {
            for i in 0..n {
                let w = 1.0 / (1 + in_degree[i]) as f64;
                a[(i, i)] = w;
                for j in 0..n {
                    if adj[i][j] {
                        a[(i, j)] = w;
                    }
                }
            }
        }
        WeightScheme::Metropolis => {
            if directed {
                return Err(Error::Graph(
                    "Metropolis weights require undirected edges".into(),
                ));
            }
            for i in 0..n {
                let mut off = 0.0;
                for j in 0..n {
                    if adj[i][j] {
                        let w = 1.0 / (1 + in_degree[i].max(in_degree[j])) as f64;
                        a[(i, j)] = w;
                        off += w;
                    }
                }
                a[(i, i)] = 1.0 - off;
            }
        }
    }
    WeightMatrix::new(a)
}

/// Topology section of the experiment config.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Topology {
    /// Literal matrix, rows as written.
    Fixed { matrix: Vec<Vec<f64>> },
    Ring {
        n: usize,
        #[serde(default)]
        weights: WeightScheme,
    },
    Complete {
        n: usize,
        #[serde(default)]
        weights: WeightScheme,
    },
    /// Agent 0 is the hub.
    Star {
        n: usize,
        #[serde(default)]
        weights: WeightScheme,
    },
    /// One edge list per round, cycled with period `rounds.len()`.
    Periodic {
        n: usize,
        rounds: Vec<Vec<[usize; 2]>>,
        #[serde(default)]
        directed: bool,
        #[serde(default)]
        weights: WeightScheme,
    },
    /// Each undirected pool edge is active with `edge_probability`; the ring
    /// `0-1-...-(n-1)-0` is spread over every window so that the union of any
    /// window `[pB, (p+1)B)` is connected.
    RandomSwitching {
        n: usize,
        edge_pool: Vec<[usize; 2]>,
        edge_probability: f64,
        seed: u64,
        #[serde(default)]
        weights: WeightScheme,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphConfig {
    #[serde(flatten)]
    pub topology: Topology,
    /// Non-degeneracy bound; defaults to [`DEFAULT_ETA`].
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    /// Joint-connectivity window `B`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<usize>,
    /// Balance claim; when set to true the builder must produce doubly
    /// stochastic matrices.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub balanced: Option<bool>,
}

impl GraphConfig {
    pub fn new(topology: Topology) -> Self {
        Self {
            topology,
            eta: None,
            window: None,
            balanced: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RandomSwitching {
    n: usize,
    pool: Vec<[usize; 2]>,
    cycle: Vec<[usize; 2]>,
    probability: f64,
    seed: u64,
    window: usize,
    scheme: WeightScheme,
}

impl RandomSwitching {
    fn matrix(&self, k: usize) -> WeightMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(k as u64);
        let mut edges: Vec<[usize; 2]> = self
            .pool
            .iter()
            .copied()
            .filter(|_| rng.gen_bool(self.probability))
            .collect();
        let phase = k % self.window;
        edges.extend(
            self.cycle
                .iter()
                .enumerate()
                .filter(|(c, _)| c % self.window == phase)
                .map(|(_, e)| *e),
        );
        // edges were range-checked at construction
        weights_from_edges(self.n, &edges, false, self.scheme)
            .expect("random switching edges validated at construction")
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum SequenceKind {
    Fixed(WeightMatrix),
    PeriodicSwitching(Vec<WeightMatrix>),
    SeededRandomSwitching(RandomSwitching),
}

/// Deterministic sequence of weight matrices `A(0), A(1), ...`.
#[derive(Clone, Debug, PartialEq)]
pub struct GraphSequence {
    kind: SequenceKind,
    n: usize,
    eta: f64,
    window: usize,
    balanced: bool,
}

impl GraphSequence {
    pub fn fixed(a: WeightMatrix, eta: f64) -> Result<Self> {
        let balanced = check_balanced(&a);
        Self::finalize(SequenceKind::Fixed(a), eta, 1, balanced)
    }

    pub fn periodic(matrices: Vec<WeightMatrix>, eta: f64, window: usize) -> Result<Self> {
        let balanced = matrices.iter().all(check_balanced);
        Self::finalize(SequenceKind::PeriodicSwitching(matrices), eta, window, balanced)
    }

    fn finalize(kind: SequenceKind, eta: f64, window: usize, balanced: bool) -> Result<Self> {
        if !(eta > 0.0 && eta <= 1.0) {
            return Err(Error::Graph(format!("eta must lie in (0, 1], got {eta}")));
        }
        if window == 0 {
            return Err(Error::Graph("window B must be at least 1".into()));
        }
        let literal = |k: usize, a: &WeightMatrix| match a.eta_violation(eta) {
            Some((i, j, w)) => Err(Error::NonDegeneracy(format!(
                "entry a_{}{}({k})={w} < eta={eta}",
                i + 1,
                j + 1
            ))),
            None => Ok(()),
        };
        let (n, min_weight) = match &kind {
            SequenceKind::Fixed(a) => {
                literal(0, a)?;
                (a.n(), a.min_positive_entry())
            }
            SequenceKind::PeriodicSwitching(ms) => {
                let n = ms
                    .first()
                    .ok_or_else(|| Error::Graph("periodic sequence has no matrices".into()))?
                    .n();
                if ms.iter().any(|m| m.n() != n) {
                    return Err(Error::Graph("periodic matrices differ in size".into()));
                }
                for (k, a) in ms.iter().enumerate() {
                    literal(k, a)?;
                }
                (n, ms.iter().map(WeightMatrix::min_positive_entry).fold(1.0, f64::min))
            }
            SequenceKind::SeededRandomSwitching(rs) => {
                let mut degree = vec![0usize; rs.n];
                let mut seen = std::collections::BTreeSet::new();
                for &[u, v] in rs.pool.iter().chain(&rs.cycle) {
                    if u != v && seen.insert((u.min(v), u.max(v))) {
                        degree[u] += 1;
                        degree[v] += 1;
                    }
                }
                let dmax = degree.into_iter().max().unwrap_or(0);
                (rs.n, 1.0 / (1 + dmax) as f64)
            }
        };
        if eta > min_weight + 1e-15 {
            return Err(Error::NonDegeneracy(format!(
                "declared eta = {eta} exceeds the smallest constructible positive weight {min_weight}"
            )));
        }
        Ok(Self {
            kind,
            n,
            eta,
            window,
            balanced,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn window(&self) -> usize {
        self.window
    }

    pub fn is_balanced(&self) -> bool {
        self.balanced
    }

    pub fn is_time_varying(&self) -> bool {
        !matches!(self.kind, SequenceKind::Fixed(_))
    }

    pub fn kind(&self) -> &SequenceKind {
        &self.kind
    }

    /// `A(k)`; a pure function of the construction parameters and `k`.
    pub fn matrix(&self, k: usize) -> Cow<'_, WeightMatrix> {
        match &self.kind {
            SequenceKind::Fixed(a) => Cow::Borrowed(a),
            SequenceKind::PeriodicSwitching(ms) => Cow::Borrowed(&ms[k % ms.len()]),
            SequenceKind::SeededRandomSwitching(rs) => Cow::Owned(rs.matrix(k)),
        }
    }
}

/// Builds a sequence from its config section.
pub fn make_graph_sequence(config: &GraphConfig) -> Result<GraphSequence> {
    let eta = config.eta.unwrap_or(DEFAULT_ETA);
    let seq = match &config.topology {
        Topology::Fixed { matrix } => {
            GraphSequence::fixed(WeightMatrix::from_rows(matrix)?, eta)?
        }
        Topology::Ring { n, weights } => {
            require_agents(*n)?;
            let edges: Vec<[usize; 2]> = ring_edges(*n);
            GraphSequence::fixed(weights_from_edges(*n, &edges, false, *weights)?, eta)?
        }
        Topology::Complete { n, weights } => {
            require_agents(*n)?;
            let edges: Vec<[usize; 2]> = (0..*n)
                .flat_map(|i| (i + 1..*n).map(move |j| [i, j]))
                .collect();
            GraphSequence::fixed(weights_from_edges(*n, &edges, false, *weights)?, eta)?
        }
        Topology::Star { n, weights } => {
            require_agents(*n)?;
            let edges: Vec<[usize; 2]> = (1..*n).map(|j| [0, j]).collect();
            GraphSequence::fixed(weights_from_edges(*n, &edges, false, *weights)?, eta)?
        }
        Topology::Periodic {
            n,
            rounds,
            directed,
            weights,
        } => {
            require_agents(*n)?;
            if rounds.is_empty() {
                return Err(Error::Graph("periodic schedule needs at least one round".into()));
            }
            let matrices = rounds
                .iter()
                .map(|edges| weights_from_edges(*n, edges, *directed, *weights))
                .collect::<Result<Vec<_>>>()?;
            let window = config.window.unwrap_or(rounds.len());
            GraphSequence::periodic(matrices, eta, window)?
        }
        Topology::RandomSwitching {
            n,
            edge_pool,
            edge_probability,
            seed,
            weights,
        } => {
            require_agents(*n)?;
            if !(0.0..=1.0).contains(edge_probability) {
                return Err(Error::Graph(format!(
                    "edge_probability must lie in [0, 1], got {edge_probability}"
                )));
            }
            if let Some(e) = edge_pool.iter().find(|e| e[0] >= *n || e[1] >= *n) {
                return Err(Error::Graph(format!("edge {e:?} out of range for n = {n}")));
            }
            let window = config
                .window
                .ok_or_else(|| Error::Graph("random switching requires a window B".into()))?;
            let rs = RandomSwitching {
                n: *n,
                pool: edge_pool.clone(),
                cycle: ring_edges(*n),
                probability: *edge_probability,
                seed: *seed,
                window,
                scheme: *weights,
            };
            let balanced = *weights == WeightScheme::Metropolis || *n == 1;
            GraphSequence::finalize(SequenceKind::SeededRandomSwitching(rs), eta, window, balanced)?
        }
    };
    let seq = match config.window {
        Some(0) => return Err(Error::Graph("window B must be at least 1".into())),
        Some(b) => GraphSequence { window: b, ..seq },
        None => seq,
    };
    if config.balanced == Some(true) && !seq.balanced {
        return Err(Error::Graph(
            "config claims a balanced graph but the built matrices are not doubly stochastic"
                .into(),
        ));
    }
    Ok(seq)
}

fn require_agents(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::Graph("agent count must be positive".into()));
    }
    Ok(())
}

fn ring_edges(n: usize) -> Vec<[usize; 2]> {
    match n {
        0 | 1 => vec![],
        2 => vec![[0, 1]],
        _ => (0..n).map(|i| [i, (i + 1) % n]).collect(),
    }
}

/// Adjacency (`adj[from][to]`) of the union of `A(k)` for `k` in
/// `[k_start, k_start + window)`.
pub fn union_adjacency(seq: &GraphSequence, k_start: usize, window: usize) -> Vec<Vec<bool>> {
    let n = seq.n();
    let mut adj = vec![vec![false; n]; n];
    for k in k_start..k_start + window {
        for (from, to) in seq.matrix(k).edges() {
            adj[from][to] = true;
        }
    }
    adj
}

/// Whether the union graph over `[k_start, k_start + window)` is strongly connected.
pub fn check_joint_strong_connectivity(seq: &GraphSequence, k_start: usize, window: usize) -> bool {
    is_strongly_connected(&union_adjacency(seq, k_start, window.max(1)))
}

/// Common positive left eigenvector `q` with `q^T A(k) = q^T` and `sum q = 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LeftEigenvector {
    q: Vec<f64>,
}

impl LeftEigenvector {
    pub fn uniform(n: usize) -> Self {
        Self {
            q: vec![1.0 / n as f64; n],
        }
    }

    /// Wraps an explicit weight vector after checking positivity and unit sum.
    pub fn from_weights(q: Vec<f64>) -> Result<Self> {
        if q.is_empty() || q.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
            return Err(Error::LeftEigenvector("weights must be positive".into()));
        }
        let s: f64 = q.iter().sum();
        if (s - 1.0).abs() >= STOCHASTIC_TOL {
            return Err(Error::LeftEigenvector(format!("weights sum to {s}, not 1")));
        }
        Ok(Self { q })
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.q
    }

    /// `||q^T A - q^T||_inf`
    pub fn residual(&self, a: &WeightMatrix) -> f64 {
        let n = a.n();
        (0..n)
            .map(|j| {
                let s: f64 = (0..n).map(|i| self.q[i] * a.get(i, j)).sum();
                (s - self.q[j]).abs()
            })
            .fold(0.0, f64::max)
    }
}

/// Balanced sequences give `q = 1/n`; a fixed strongly connected matrix gives
/// the unique positive solution of `q^T A = q^T`, `sum q = 1`.
pub fn compute_left_eigenvector(seq: &GraphSequence) -> Result<LeftEigenvector> {
    if seq.is_balanced() {
        return Ok(LeftEigenvector::uniform(seq.n()));
    }
    let a = match seq.kind() {
        SequenceKind::Fixed(a) => a,
        _ => {
            return Err(Error::LeftEigenvector(
                "time-varying sequence is not balanced, so no common left eigenvector is guaranteed"
                    .into(),
            ))
        }
    };
    let n = a.n();
    let adj = union_adjacency(seq, 0, 1);
    if !is_strongly_connected(&adj) {
        return Err(Error::LeftEigenvector(
            "fixed graph is not strongly connected".into(),
        ));
    }
    // (A^T - I) q = 0 with the last equation replaced by sum q = 1.
    let mut m = a.as_dmatrix().transpose() - DMatrix::<f64>::identity(n, n);
    let mut rhs = DVector::<f64>::zeros(n);
    for j in 0..n {
        m[(n - 1, j)] = 1.0;
    }
    rhs[n - 1] = 1.0;
    let q = m
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::LeftEigenvector("singular eigenvector system".into()))?;
    let sum: f64 = q.iter().sum();
    let q: Vec<f64> = q.iter().map(|x| x / sum).collect();
    if q.iter().any(|x| x.is_nan() || *x <= 0.0) {
        return Err(Error::LeftEigenvector(format!("eigenvector {q:?} is not positive")));
    }
    let out = LeftEigenvector { q };
    let res = out.residual(a);
    if res >= EIGEN_SOLVE_TOL {
        return Err(Error::LeftEigenvector(format!("residual {res:e} too large")));
    }
    Ok(out)
}
