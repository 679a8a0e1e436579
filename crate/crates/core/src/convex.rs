//! Convex local objectives with subgradient oracles, closed convex constraint
//! sets with Euclidean projections, and the problem container tying `n` of
//! each together.

use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{dist, dot, norm};

/// Stop Dykstra once a full sweep moves the iterate less than this.
pub const DYKSTRA_TOL: f64 = 1e-12;
pub const DYKSTRA_MAX_SWEEPS: usize = 100_000;
/// Membership slack required of a projection result.
pub const PROJECTION_MEMBERSHIP_TOL: f64 = 1e-10;
/// Feasibility slack when certifying a common point of all constraint sets.
pub const FEASIBILITY_TOL: f64 = 1e-9;
/// Sample count used for empirical subgradient-bound certification.
pub const G_CERT_SAMPLES: usize = 10_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AffinePiece {
    pub c: Vec<f64>,
    pub b: f64,
}

/// A convex local objective `f_i`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Objective {
    /// `c^T x + b`
    Affine { c: Vec<f64>, b: f64 },
    /// `1/2 x^T P x + c^T x + b`, `P` symmetric positive semidefinite.
    Quadratic {
        p: Vec<Vec<f64>>,
        c: Vec<f64>,
        #[serde(default)]
        b: f64,
    },
    /// `sum_j w_j |x_j - center_j|`, `w >= 0`.
    L1Shift { w: Vec<f64>, center: Vec<f64> },
    /// `max_r (c_r^T x + b_r)`
    MaxAffine { pieces: Vec<AffinePiece> },
    SumOf { terms: Vec<Objective> },
}

impl Objective {
    /// `1/2 ||x - center||^2`
    pub fn half_squared_distance(center: &[f64]) -> Self {
        let m = center.len();
        Objective::Quadratic {
            p: (0..m)
                .map(|i| (0..m).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
                .collect(),
            c: center.iter().map(|x| -x).collect(),
            b: 0.5 * dot(center, center),
        }
    }

    /// Checks dimensions against `m` and convexity of the parameters.
    pub fn validate(&self, m: usize) -> Result<()> {
        let dim = |v: &[f64], what: &str| -> Result<()> {
            if v.len() != m {
                return Err(Error::Objective(format!(
                    "{what} has length {}, expected {m}",
                    v.len()
                )));
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(Error::Objective(format!("{what} has non-finite entries")));
            }
            Ok(())
        };
        match self {
            Objective::Affine { c, b } => {
                dim(c, "affine c")?;
                finite(*b, "affine b")
            }
            Objective::Quadratic { p, c, b } => {
                dim(c, "quadratic c")?;
                finite(*b, "quadratic b")?;
                if p.len() != m || p.iter().any(|r| r.len() != m) {
                    return Err(Error::Objective(format!("quadratic P must be {m}x{m}")));
                }
                let pm = DMatrix::from_fn(m, m, |i, j| p[i][j]);
                if pm.iter().any(|x| !x.is_finite()) {
                    return Err(Error::Objective("quadratic P has non-finite entries".into()));
                }
                let scale = pm.amax().max(1.0);
                if (&pm - pm.transpose()).amax() > 1e-12 * scale {
                    return Err(Error::Objective("quadratic P is not symmetric".into()));
                }
                let min_eig = pm.symmetric_eigenvalues().min();
                if min_eig < -1e-10 * scale {
                    return Err(Error::Objective(format!(
                        "quadratic P is not positive semidefinite (eigenvalue {min_eig:e}); Assumption 5 requires convex f_i"
                    )));
                }
                Ok(())
            }
            Objective::L1Shift { w, center } => {
                dim(w, "l1 weights")?;
                dim(center, "l1 center")?;
                if w.iter().any(|x| *x < 0.0) {
                    return Err(Error::Objective(
                        "l1 weights must be nonnegative for convexity".into(),
                    ));
                }
                Ok(())
            }
            Objective::MaxAffine { pieces } => {
                if pieces.is_empty() {
                    return Err(Error::Objective("max-affine needs at least one piece".into()));
                }
                for piece in pieces {
                    dim(&piece.c, "max-affine c")?;
                    finite(piece.b, "max-affine b")?;
                }
                Ok(())
            }
            Objective::SumOf { terms } => {
                if terms.is_empty() {
                    return Err(Error::Objective("sum needs at least one term".into()));
                }
                terms.iter().try_for_each(|t| t.validate(m))
            }
        }
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        match self {
            Objective::Affine { c, b } => dot(c, x) + b,
            Objective::Quadratic { p, c, b } => {
                let quad: f64 = p.iter().zip(x).map(|(row, xi)| xi * dot(row, x)).sum();
                0.5 * quad + dot(c, x) + b
            }
            Objective::L1Shift { w, center } => w
                .iter()
                .zip(x.iter().zip(center))
                .map(|(wj, (xj, cj))| wj * (xj - cj).abs())
                .sum(),
            Objective::MaxAffine { pieces } => pieces
                .iter()
                .map(|pc| dot(&pc.c, x) + pc.b)
                .fold(f64::NEG_INFINITY, f64::max),
            Objective::SumOf { terms } => terms.iter().map(|t| t.value(x)).sum(),
        }
    }

    /// One element of the subdifferential at `x`. At kinks, L1 coordinates with
    /// `x_j == center_j` contribute zero and max-affine takes the lowest-index
    /// maximizing piece.
    pub fn subgradient(&self, x: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; x.len()];
        self.add_subgradient(x, &mut g);
        g
    }

    fn add_subgradient(&self, x: &[f64], g: &mut [f64]) {
        match self {
            Objective::Affine { c, .. } => {
                for (gi, ci) in g.iter_mut().zip(c) {
                    *gi += ci;
                }
            }
            Objective::Quadratic { p, c, .. } => {
                for ((gi, row), ci) in g.iter_mut().zip(p).zip(c) {
                    *gi += dot(row, x) + ci;
                }
            }
            Objective::L1Shift { w, center } => {
                for (j, gi) in g.iter_mut().enumerate() {
                    let d = x[j] - center[j];
                    if d > 0.0 {
                        *gi += w[j];
                    } else if d < 0.0 {
                        *gi -= w[j];
                    }
                }
            }
            Objective::MaxAffine { pieces } => {
                let mut best = 0;
                let mut best_val = f64::NEG_INFINITY;
                for (r, pc) in pieces.iter().enumerate() {
                    let v = dot(&pc.c, x) + pc.b;
                    if v > best_val {
                        best = r;
                        best_val = v;
                    }
                }
                for (gi, ci) in g.iter_mut().zip(&pieces[best].c) {
                    *gi += ci;
                }
            }
            Objective::SumOf { terms } => {
                for t in terms {
                    t.add_subgradient(x, g);
                }
            }
        }
    }

    /// Closed-form uniform bound on subgradient norms, when one exists
    /// independent of the domain. Exact for affine, max-affine and L1 kinds.
    pub fn closed_form_gradient_bound(&self) -> Option<f64> {
        match self {
            Objective::Affine { c, .. } => Some(norm(c)),
            Objective::Quadratic { p, c, .. } => {
                p.iter().flatten().all(|x| *x == 0.0).then(|| norm(c))
            }
            Objective::L1Shift { w, .. } => Some(norm(w)),
            Objective::MaxAffine { pieces } => {
                Some(pieces.iter().map(|pc| norm(&pc.c)).fold(0.0, f64::max))
            }
            Objective::SumOf { terms } => terms
                .iter()
                .map(Objective::closed_form_gradient_bound)
                .sum::<Option<f64>>(),
        }
    }

    fn dim(&self) -> Option<usize> {
        match self {
            Objective::Affine { c, .. }
            | Objective::Quadratic { c, .. }
            | Objective::L1Shift { w: c, .. } => Some(c.len()),
            Objective::MaxAffine { pieces } => pieces.first().map(|p| p.c.len()),
            Objective::SumOf { terms } => terms.first().and_then(Objective::dim),
        }
    }
}

fn finite(x: f64, what: &str) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(Error::Objective(format!("{what} is not finite")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoxBounds {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl BoxBounds {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Self {
        Self { lo, hi }
    }

    pub fn cube(m: usize, lo: f64, hi: f64) -> Self {
        Self {
            lo: vec![lo; m],
            hi: vec![hi; m],
        }
    }

    fn validate(&self, m: usize) -> Result<()> {
        if self.lo.len() != m || self.hi.len() != m {
            return Err(Error::Constraint(format!("box bounds must have length {m}")));
        }
        if self.lo.iter().chain(&self.hi).any(|x| !x.is_finite()) {
            return Err(Error::Constraint(
                "box bounds must be finite (Assumption 6: bounded sets)".into(),
            ));
        }
        if let Some(j) = (0..m).find(|&j| self.lo[j] > self.hi[j]) {
            return Err(Error::Constraint(format!(
                "box is empty in coordinate {j}: lo = {} > hi = {}",
                self.lo[j], self.hi[j]
            )));
        }
        Ok(())
    }

    fn clamp(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .map(|(xi, (l, h))| xi.max(*l).min(*h))
            .collect()
    }

    pub fn midpoint(&self) -> Vec<f64> {
        self.lo.iter().zip(&self.hi).map(|(l, h)| 0.5 * (l + h)).collect()
    }

    /// Coordinatewise intersection; `None` when empty.
    pub fn intersect(&self, other: &BoxBounds) -> Option<BoxBounds> {
        let lo: Vec<f64> = self.lo.iter().zip(&other.lo).map(|(a, b)| a.max(*b)).collect();
        let hi: Vec<f64> = self.hi.iter().zip(&other.hi).map(|(a, b)| a.min(*b)).collect();
        lo.iter().zip(&hi).all(|(l, h)| l <= h).then_some(BoxBounds { lo, hi })
    }

    pub fn sample(&self, rng: &mut impl Rng) -> Vec<f64> {
        self.lo
            .iter()
            .zip(&self.hi)
            .map(|(l, h)| if l < h { rng.gen_range(*l..=*h) } else { *l })
            .collect()
    }

    /// All `2^m` vertices (m is desk-scale).
    pub fn corners(&self) -> Vec<Vec<f64>> {
        let m = self.lo.len();
        (0..1usize << m)
            .map(|mask| {
                (0..m)
                    .map(|j| if mask >> j & 1 == 1 { self.hi[j] } else { self.lo[j] })
                    .collect()
            })
            .collect()
    }
}

/// A closed convex constraint set `X_i`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ConstraintSet {
    FullSpace,
    Box {
        lo: Vec<f64>,
        hi: Vec<f64>,
    },
    Ball {
        center: Vec<f64>,
        radius: f64,
    },
    /// `{lo <= x <= hi} ∩ {a^T x <= beta}`
    HalfspaceBox {
        lo: Vec<f64>,
        hi: Vec<f64>,
        a: Vec<f64>,
        beta: f64,
    },
    IntersectionOfBoxes {
        boxes: Vec<BoxBounds>,
    },
}

/// Sets with an exact closed-form projection; compound sets are handled as
/// intersections of these.
#[derive(Clone, Debug, PartialEq)]
pub enum Primitive {
    Box(BoxBounds),
    Ball { center: Vec<f64>, radius: f64 },
    Halfspace { a: Vec<f64>, beta: f64 },
}

impl Primitive {
    pub fn project(&self, x: &[f64]) -> Vec<f64> {
        match self {
            Primitive::Box(b) => b.clamp(x),
            Primitive::Ball { center, radius } => {
                let d = dist(x, center);
                if d <= *radius {
                    x.to_vec()
                } else {
                    let s = radius / d;
                    center
                        .iter()
                        .zip(x)
                        .map(|(c, xi)| c + s * (xi - c))
                        .collect()
                }
            }
            Primitive::Halfspace { a, beta } => {
                let excess = dot(a, x) - beta;
                if excess <= 0.0 {
                    x.to_vec()
                } else {
                    let s = excess / dot(a, a);
                    x.iter().zip(a).map(|(xi, ai)| xi - s * ai).collect()
                }
            }
        }
    }

    pub fn distance(&self, x: &[f64]) -> f64 {
        dist(x, &self.project(x))
    }

    /// Allocation-free membership test with slack `tol`.
    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        match self {
            Primitive::Box(b) => x
                .iter()
                .zip(b.lo.iter().zip(&b.hi))
                .all(|(xi, (l, h))| *xi >= l - tol && *xi <= h + tol),
            Primitive::Ball { center, radius } => dist(x, center) <= radius + tol,
            Primitive::Halfspace { a, beta } => dot(a, x) <= beta + tol * norm(a),
        }
    }
}

/// Dykstra's alternating projection onto the intersection of `sets`.
///
/// Iterates full sweeps until neither the iterate nor the increments move more
/// than `tol` in a sweep and the iterate sits within [`PROJECTION_MEMBERSHIP_TOL`] of every set.
pub fn dykstra(sets: &[Primitive], x0: &[f64], tol: f64, max_sweeps: usize) -> Result<Vec<f64>> {
    match sets {
        [] => return Ok(x0.to_vec()),
        [only] => return Ok(only.project(x0)),
        _ => {}
    }
    let m = x0.len();
    let mut x = x0.to_vec();
    let mut increments = vec![vec![0.0; m]; sets.len()];
    let mut change = f64::INFINITY;
    for _ in 0..max_sweeps {
        let prev = x.clone();
        // the iterate can stall for a sweep while the increments still move
        let mut increment_change = 0.0;
        for (set, p) in sets.iter().zip(increments.iter_mut()) {
            let y: Vec<f64> = x.iter().zip(p.iter()).map(|(a, b)| a + b).collect();
            let proj = set.project(&y);
            for j in 0..m {
                let next = y[j] - proj[j];
                increment_change += (next - p[j]).powi(2);
                p[j] = next;
            }
            x = proj;
        }
        change = dist(&x, &prev).max(increment_change.sqrt());
        if !change.is_finite() {
            break;
        }
        if change < tol && sets.iter().all(|s| s.distance(&x) <= PROJECTION_MEMBERSHIP_TOL) {
            return Ok(x);
        }
    }
    Err(Error::ProjectionDiverged {
        sweeps: max_sweeps,
        change,
    })
}

/// The intersection of a family of constraint sets, reduced to primitives.
#[derive(Clone, Debug, PartialEq)]
pub struct Intersection {
    primitives: Vec<Primitive>,
}

impl Intersection {
    pub fn of<'a>(sets: impl IntoIterator<Item = &'a ConstraintSet>) -> Self {
        let mut primitives: Vec<Primitive> = sets.into_iter().flat_map(|s| s.primitives()).collect();
        // boxes collapse to one exact clamp when they intersect
        let boxes: Vec<&BoxBounds> = primitives
            .iter()
            .filter_map(|p| match p {
                Primitive::Box(b) => Some(b),
                _ => None,
            })
            .collect();
        if boxes.len() > 1 {
            if let Some(merged) = boxes[1..]
                .iter()
                .try_fold(boxes[0].clone(), |acc, b| acc.intersect(b))
            {
                primitives.retain(|p| !matches!(p, Primitive::Box(_)));
                primitives.insert(0, Primitive::Box(merged));
            }
        }
        Self { primitives }
    }

    pub fn is_full_space(&self) -> bool {
        self.primitives.is_empty()
    }

    pub fn primitives(&self) -> &[Primitive] {
        &self.primitives
    }

    pub fn project(&self, x: &[f64]) -> Result<Vec<f64>> {
        dykstra(&self.primitives, x, DYKSTRA_TOL, DYKSTRA_MAX_SWEEPS)
    }

    pub fn distance(&self, x: &[f64]) -> Result<f64> {
        Ok(dist(x, &self.project(x)?))
    }

    /// Membership in every primitive with slack `tol` each.
    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        self.primitives.iter().all(|p| p.contains(x, tol))
    }
}

impl ConstraintSet {
    pub fn validate(&self, m: usize) -> Result<()> {
        match self {
            ConstraintSet::FullSpace => Ok(()),
            ConstraintSet::Box { lo, hi } => BoxBounds::new(lo.clone(), hi.clone()).validate(m),
            ConstraintSet::Ball { center, radius } => {
                if center.len() != m || center.iter().any(|x| !x.is_finite()) {
                    return Err(Error::Constraint(format!(
                        "ball center must be a finite vector of length {m}"
                    )));
                }
                if !(radius.is_finite() && *radius >= 0.0) {
                    return Err(Error::Constraint(format!(
                        "ball radius must be finite and nonnegative, got {radius}"
                    )));
                }
                Ok(())
            }
            ConstraintSet::HalfspaceBox { lo, hi, a, beta } => {
                let bx = BoxBounds::new(lo.clone(), hi.clone());
                bx.validate(m)?;
                if a.len() != m || a.iter().any(|x| !x.is_finite()) || !beta.is_finite() {
                    return Err(Error::Constraint(format!(
                        "halfspace normal must be a finite vector of length {m}"
                    )));
                }
                if norm(a) == 0.0 {
                    return Err(Error::Constraint("halfspace normal is zero".into()));
                }
                // smallest a^T x over the box sits at a vertex
                let min_val: f64 = (0..m).map(|j| a[j] * if a[j] > 0.0 { lo[j] } else { hi[j] }).sum();
                if min_val > *beta {
                    return Err(Error::Constraint(format!(
                        "halfspace-box is empty: min a^T x over the box is {min_val} > beta = {beta}"
                    )));
                }
                Ok(())
            }
            ConstraintSet::IntersectionOfBoxes { boxes } => {
                let first = boxes
                    .first()
                    .ok_or_else(|| Error::Constraint("intersection needs at least one box".into()))?;
                boxes.iter().try_for_each(|b| b.validate(m))?;
                boxes[1..]
                    .iter()
                    .try_fold(first.clone(), |acc, b| acc.intersect(b))
                    .map(|_| ())
                    .ok_or_else(|| Error::Constraint("intersection of boxes is empty".into()))
            }
        }
    }

    pub fn is_full_space(&self) -> bool {
        matches!(self, ConstraintSet::FullSpace)
    }

    pub fn primitives(&self) -> Vec<Primitive> {
        match self {
            ConstraintSet::FullSpace => vec![],
            ConstraintSet::Box { lo, hi } => {
                vec![Primitive::Box(BoxBounds::new(lo.clone(), hi.clone()))]
            }
            ConstraintSet::Ball { center, radius } => vec![Primitive::Ball {
                center: center.clone(),
                radius: *radius,
            }],
            ConstraintSet::HalfspaceBox { lo, hi, a, beta } => vec![
                Primitive::Box(BoxBounds::new(lo.clone(), hi.clone())),
                Primitive::Halfspace {
                    a: a.clone(),
                    beta: *beta,
                },
            ],
            ConstraintSet::IntersectionOfBoxes { boxes } => {
                let merged = boxes[1..]
                    .iter()
                    .try_fold(boxes[0].clone(), |acc, b| acc.intersect(b))
                    .unwrap_or_else(|| boxes[0].clone());
                vec![Primitive::Box(merged)]
            }
        }
    }

    /// Euclidean projection `argmin_{p in X} ||x - p||`.
    pub fn project(&self, x: &[f64]) -> Result<Vec<f64>> {
        dykstra(&self.primitives(), x, DYKSTRA_TOL, DYKSTRA_MAX_SWEEPS)
    }

    pub fn distance(&self, x: &[f64]) -> Result<f64> {
        Ok(dist(x, &self.project(x)?))
    }

    /// Whether `x` lies within Euclidean distance `tol` of the set.
    pub fn contains(&self, x: &[f64], tol: f64) -> Result<bool> {
        Ok(self.distance(x)? <= tol)
    }

    /// Axis-aligned box containing the set; `None` for the full space.
    pub fn bounding_box(&self) -> Option<BoxBounds> {
        match self {
            ConstraintSet::FullSpace => None,
            ConstraintSet::Box { lo, hi } | ConstraintSet::HalfspaceBox { lo, hi, .. } => {
                Some(BoxBounds::new(lo.clone(), hi.clone()))
            }
            ConstraintSet::Ball { center, radius } => Some(BoxBounds::new(
                center.iter().map(|c| c - radius).collect(),
                center.iter().map(|c| c + radius).collect(),
            )),
            ConstraintSet::IntersectionOfBoxes { .. } => match &self.primitives()[0] {
                Primitive::Box(b) => Some(b.clone()),
                _ => unreachable!(),
            },
        }
    }

    /// Representative interior-ish point used to seed feasibility searches.
    pub fn center(&self) -> Option<Vec<f64>> {
        match self {
            ConstraintSet::Ball { center, .. } => Some(center.clone()),
            _ => self.bounding_box().map(|b| b.midpoint()),
        }
    }

    /// Uniform sample from the set (rejection from the bounding box for the
    /// halfspace-box, with projection as a fallback).
    pub fn sample(&self, rng: &mut impl Rng) -> Option<Vec<f64>> {
        match self {
            ConstraintSet::FullSpace => None,
            ConstraintSet::Ball { center, radius } => {
                let m = center.len();
                let dir: Vec<f64> = (0..m).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
                let len = norm(&dir);
                let r = radius * rng.gen::<f64>().powf(1.0 / m as f64);
                Some(if len == 0.0 {
                    center.clone()
                } else {
                    center.iter().zip(&dir).map(|(c, d)| c + r * d / len).collect()
                })
            }
            ConstraintSet::HalfspaceBox { a, beta, .. } => {
                let bx = self.bounding_box()?;
                for _ in 0..1000 {
                    let x = bx.sample(rng);
                    if dot(a, &x) <= *beta {
                        return Some(x);
                    }
                }
                self.project(&bx.sample(rng)).ok()
            }
            _ => self.bounding_box().map(|b| b.sample(rng)),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Unconstrained,
    Constrained,
}

/// `n` local objectives and constraint sets over `R^m`.
#[derive(Clone, Debug, PartialEq)]
pub struct ProblemSpec {
    m: usize,
    objectives: Vec<Objective>,
    constraints: Vec<ConstraintSet>,
    mode: Mode,
    /// Declared uniform subgradient bound `G`; certified lazily when absent.
    pub g_bound: Option<f64>,
    /// Region used for subgradient certification, initialization and grid
    /// search when the problem is unconstrained.
    pub sampling_box: Option<BoxBounds>,
    /// Whether the weighted problem is known to have a single minimizer, which
    /// makes `||y - x*||` meaningful.
    pub unique_minimizer: bool,
}

impl ProblemSpec {
    pub fn new(m: usize, objectives: Vec<Objective>, constraints: Vec<ConstraintSet>) -> Result<Self> {
        if m == 0 {
            return Err(Error::Problem("dimension must be positive".into()));
        }
        if objectives.is_empty() {
            return Err(Error::Problem("at least one agent is required".into()));
        }
        if objectives.len() != constraints.len() {
            return Err(Error::Problem(format!(
                "{} objectives but {} constraint sets",
                objectives.len(),
                constraints.len()
            )));
        }
        for (i, f) in objectives.iter().enumerate() {
            f.validate(m)
                .map_err(|e| Error::Problem(format!("agent {i}: {e}")))?;
        }
        for (i, x) in constraints.iter().enumerate() {
            x.validate(m)
                .map_err(|e| Error::Problem(format!("agent {i}: {e}")))?;
        }
        let full = constraints.iter().filter(|c| c.is_full_space()).count();
        let mode = if full == constraints.len() {
            Mode::Unconstrained
        } else if full == 0 {
            Mode::Constrained
        } else {
            return Err(Error::Problem(
                "mixing full-space and bounded constraint sets is not supported".into(),
            ));
        };
        debug_assert!(objectives.iter().all(|f| f.dim().is_none_or(|d| d == m)));
        Ok(Self {
            m,
            objectives,
            constraints,
            mode,
            g_bound: None,
            sampling_box: None,
            unique_minimizer: false,
        })
    }

    pub fn unconstrained(m: usize, objectives: Vec<Objective>) -> Result<Self> {
        let n = objectives.len();
        Self::new(m, objectives, vec![ConstraintSet::FullSpace; n])
    }

    pub fn with_g_bound(mut self, g: f64) -> Self {
        self.g_bound = Some(g);
        self
    }

    pub fn with_sampling_box(mut self, b: BoxBounds) -> Result<Self> {
        b.validate(self.m)?;
        self.sampling_box = Some(b);
        Ok(self)
    }

    pub fn with_unique_minimizer(mut self, unique: bool) -> Self {
        self.unique_minimizer = unique;
        self
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.objectives.len()
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn objectives(&self) -> &[Objective] {
        &self.objectives
    }

    pub fn constraints(&self) -> &[ConstraintSet] {
        &self.constraints
    }

    pub fn intersection(&self) -> Intersection {
        Intersection::of(&self.constraints)
    }

    /// `sum_i q_i f_i(x)`
    pub fn weighted_value(&self, q: &[f64], x: &[f64]) -> f64 {
        q.iter()
            .zip(&self.objectives)
            .map(|(qi, f)| qi * f.value(x))
            .sum()
    }

    /// `sum_i q_i g_i(x)`
    pub fn weighted_subgradient(&self, q: &[f64], x: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; self.m];
        for (qi, f) in q.iter().zip(&self.objectives) {
            for (gj, sj) in g.iter_mut().zip(f.subgradient(x)) {
                *gj += qi * sj;
            }
        }
        g
    }

    /// Region searched by grid oracles: the bounding box of `∩ X_i` in
    /// constrained mode, otherwise the sampling box.
    pub fn search_box(&self) -> Option<BoxBounds> {
        match self.mode {
            Mode::Unconstrained => self.sampling_box.clone(),
            Mode::Constrained => self
                .constraints
                .iter()
                .filter_map(ConstraintSet::bounding_box)
                .try_fold(None::<BoxBounds>, |acc, b| match acc {
                    None => Some(Some(b)),
                    Some(a) => a.intersect(&b).map(Some),
                })
                .flatten(),
        }
    }

    /// Declared `G` if present, otherwise the certified bound.
    pub fn resolved_g(&self) -> Result<f64> {
        match self.g_bound {
            Some(g) => Ok(g),
            None => certify_subgradient_bound(self, G_CERT_SAMPLES, 0),
        }
    }
}

/// Finds a point of `∩ X_i` by Dykstra from the centroid of the set centers.
pub fn certify_feasible(spec: &ProblemSpec) -> Result<Vec<f64>> {
    if spec.mode() == Mode::Unconstrained {
        return Ok(vec![0.0; spec.m()]);
    }
    let centers: Vec<Vec<f64>> = spec.constraints().iter().filter_map(ConstraintSet::center).collect();
    let mut start = vec![0.0; spec.m()];
    for c in &centers {
        crate::linalg::axpy(1.0 / centers.len() as f64, c, &mut start);
    }
    let x = spec
        .intersection()
        .project(&start)
        .map_err(|e| Error::Problem(format!("intersection of constraint sets appears empty: {e}")))?;
    for (i, set) in spec.constraints().iter().enumerate() {
        let d = set.distance(&x)?;
        if d > FEASIBILITY_TOL {
            return Err(Error::Problem(format!(
                "intersection of constraint sets appears empty: candidate is {d:e} from X_{i}"
            )));
        }
    }
    Ok(x)
}

/// Upper estimate of `sup ||g||` over each `X_i`, maximized over agents.
///
/// Affine, max-affine and L1 kinds use their exact closed form. Other kinds
/// are sampled: `samples` uniform points per set plus, for box-shaped sets,
/// every vertex (the gradient norm of a quadratic is convex, so its maximum
/// over a box is attained at a vertex).
pub fn certify_subgradient_bound(spec: &ProblemSpec, samples: usize, seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut bound = 0.0_f64;
    for (i, (f, set)) in spec.objectives().iter().zip(spec.constraints()).enumerate() {
        if let Some(b) = f.closed_form_gradient_bound() {
            bound = bound.max(b);
            continue;
        }
        let mut best = 0.0_f64;
        let mut probe = |x: &[f64]| best = best.max(norm(&f.subgradient(x)));
        match set {
            ConstraintSet::FullSpace => {
                let bx = spec.sampling_box.as_ref().ok_or_else(|| {
                    Error::Problem(format!(
                        "agent {i}: subgradients are unbounded on R^m; Assumption 8 needs a sampling box"
                    ))
                })?;
                bx.corners().iter().for_each(|x| probe(x));
                (0..samples).for_each(|_| probe(&bx.sample(&mut rng)));
            }
            ConstraintSet::Box { .. } | ConstraintSet::IntersectionOfBoxes { .. } => {
                let bx = set.bounding_box().expect("bounded set");
                bx.corners().iter().for_each(|x| probe(x));
                (0..samples).for_each(|_| probe(&bx.sample(&mut rng)));
            }
            _ => {
                let bx = set.bounding_box().expect("bounded set");
                for x in bx.corners() {
                    if set.contains(&x, 0.0)? {
                        probe(&x);
                    }
                }
                for _ in 0..samples {
                    if let Some(x) = set.sample(&mut rng) {
                        probe(&x);
                    }
                }
            }
        }
        bound = bound.max(best);
    }
    Ok(bound)
}
