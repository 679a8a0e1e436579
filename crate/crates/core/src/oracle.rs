//! Centralized reference solutions for `min sum_i q_i f_i(x)` over `∩ X_i`.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::convex::{certify_feasible, BoxBounds, Intersection, Mode, Objective, ProblemSpec};
use crate::error::{Error, Result};
use crate::graph::LeftEigenvector;
use crate::linalg::all_finite;

/// Centralized subgradient budget used when none is given.
pub const DEFAULT_BUDGET: usize = 1_000_000;
/// Grid points per axis for the cross-check behind a centralized solve.
const CROSS_CHECK_POINTS: usize = 2001;
/// Slack for grid-point membership in constrained mode.
const GRID_MEMBERSHIP_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleMethod {
    Grid,
    CentralizedSubgradient,
    ClosedForm,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleSolution {
    pub x_star: Vec<f64>,
    pub f_star: f64,
    pub method: OracleMethod,
    /// Upper bound on `f(x_star) - min f` (an estimate when no grid
    /// cross-check is possible).
    pub certified_gap: f64,
}

fn check_weights(spec: &ProblemSpec, q: &LeftEigenvector) -> Result<()> {
    if q.as_slice().len() != spec.n() {
        return Err(Error::Oracle(format!(
            "{} weights for {} agents",
            q.as_slice().len(),
            spec.n()
        )));
    }
    Ok(())
}

/// Exhaustive search over a regular grid with spacing at most `resolution`.
///
/// The grid covers [`ProblemSpec::search_box`]; in constrained mode only
/// points inside every `X_i` are evaluated. Ties go to the lowest grid index.
pub fn solve_grid(spec: &ProblemSpec, q: &LeftEigenvector, resolution: f64) -> Result<OracleSolution> {
    check_weights(spec, q)?;
    let m = spec.m();
    if m > 2 {
        return Err(Error::Oracle(format!("grid oracle supports m <= 2, got m = {m}")));
    }
    if !(resolution.is_finite() && resolution > 0.0) {
        return Err(Error::Oracle(format!("resolution must be positive, got {resolution}")));
    }
    let bx = spec.search_box().ok_or_else(|| match spec.mode() {
        Mode::Unconstrained => Error::Oracle("unconstrained grid search needs a sampling box".into()),
        Mode::Constrained => Error::Oracle("feasible region is empty (bounding boxes do not intersect)".into()),
    })?;
    let axes: Vec<Axis> = (0..m).map(|j| Axis::new(bx.lo[j], bx.hi[j], resolution)).collect();
    let spacing = axes.iter().map(|a| a.step).fold(0.0, f64::max);
    let inter = spec.intersection();
    let constrained = spec.mode() == Mode::Constrained;
    let qs = q.as_slice();

    let outer = axes[0].count;
    let inner = axes.get(1).map_or(1, |a| a.count);
    let best = (0..outer)
        .into_par_iter()
        .filter_map(|i| {
            let mut point = vec![0.0; m];
            point[0] = axes[0].at(i);
            let mut row_best: Option<(f64, usize)> = None;
            for j in 0..inner {
                if m == 2 {
                    point[1] = axes[1].at(j);
                }
                if constrained && !inter.contains(&point, GRID_MEMBERSHIP_TOL) {
                    continue;
                }
                let v = spec.weighted_value(qs, &point);
                if row_best.is_none_or(|(bv, _)| v < bv) {
                    row_best = Some((v, i * inner + j));
                }
            }
            row_best
        })
        .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let (f_star, index) = best.ok_or_else(|| Error::Oracle("feasible region is empty on the grid".into()))?;
    let (i, j) = (index / inner, index % inner);
    let mut x_star = vec![axes[0].at(i)];
    if m == 2 {
        x_star.push(axes[1].at(j));
    }
    if !constrained {
        let on_edge = i == 0 || i + 1 == outer || (m == 2 && (j == 0 || j + 1 == inner));
        if on_edge {
            return Err(Error::Oracle(format!(
                "grid minimum {x_star:?} lies on the sampling-box boundary; enlarge the box"
            )));
        }
    }
    let g = spec.resolved_g()?;
    Ok(OracleSolution {
        x_star,
        f_star,
        method: OracleMethod::Grid,
        certified_gap: g * spacing * (m as f64).sqrt(),
    })
}

struct Axis {
    lo: f64,
    step: f64,
    count: usize,
}

impl Axis {
    fn new(lo: f64, hi: f64, resolution: f64) -> Self {
        let extent = hi - lo;
        if extent <= 0.0 {
            return Self { lo, step: 0.0, count: 1 };
        }
        let intervals = (extent / resolution).ceil().max(1.0) as usize;
        Self {
            lo,
            step: extent / intervals as f64,
            count: intervals + 1,
        }
    }

    #[inline]
    fn at(&self, i: usize) -> f64 {
        self.lo + self.step * i as f64
    }
}

/// `P_X(z - alpha sum_i q_i g_i(z))`
pub fn centralized_step(spec: &ProblemSpec, inter: &Intersection, q: &[f64], z: &[f64], alpha: f64) -> Result<Vec<f64>> {
    let g = spec.weighted_subgradient(q, z);
    let pre: Vec<f64> = z.iter().zip(&g).map(|(a, b)| a - alpha * b).collect();
    inter.project(&pre)
}

/// Iterates `z(0) = z0, ..., z(rounds)` of [`centralized_step`] with step `alpha(k)`.
pub fn centralized_path(
    spec: &ProblemSpec,
    q: &LeftEigenvector,
    z0: Vec<f64>,
    alpha: impl Fn(usize) -> f64,
    rounds: usize,
) -> Result<Vec<Vec<f64>>> {
    check_weights(spec, q)?;
    let inter = spec.intersection();
    let mut path = Vec::with_capacity(rounds + 1);
    path.push(z0);
    for k in 0..rounds {
        let next = centralized_step(spec, &inter, q.as_slice(), &path[k], alpha(k))?;
        path.push(next);
    }
    Ok(path)
}

/// Projected subgradient descent on the weighted objective,
/// `z(k+1) = P_X(z(k) - alpha(k) sum_i q_i g_i(z(k)))` with
/// `alpha(k) = D / (G (k + 1))`, `D` the diameter of the search box (1 when
/// there is none). Returns the best point visited.
pub fn solve_centralized(spec: &ProblemSpec, q: &LeftEigenvector, budget: usize) -> Result<OracleSolution> {
    check_weights(spec, q)?;
    let qs = q.as_slice();
    let inter = spec.intersection();
    let bx = spec.search_box();
    let g_bound = spec.resolved_g()?;
    let diameter = bx
        .as_ref()
        .map(|b| crate::linalg::dist(&b.lo, &b.hi))
        .filter(|d| *d > 0.0)
        .unwrap_or(1.0);
    let scale = diameter / g_bound.max(f64::MIN_POSITIVE);

    let mut z = match spec.mode() {
        Mode::Constrained => certify_feasible(spec)?,
        Mode::Unconstrained => bx.as_ref().map_or_else(|| vec![0.0; spec.m()], BoxBounds::midpoint),
    };
    let mut best = (spec.weighted_value(qs, &z), z.clone());
    let tail_start = budget - budget / 10;
    let (mut tail_lo, mut tail_hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for k in 0..budget {
        z = centralized_step(spec, &inter, qs, &z, scale / (k as f64 + 1.0))?;
        if !all_finite(&z) {
            return Err(Error::Oracle(format!("centralized iterate diverged at round {k}")));
        }
        let v = spec.weighted_value(qs, &z);
        if v < best.0 {
            best = (v, z.clone());
        }
        if k >= tail_start {
            tail_lo = tail_lo.min(v);
            tail_hi = tail_hi.max(v);
        }
    }
    let (f_star, x_star) = best;
    let certified_gap = if spec.m() <= 2 && bx.is_some() {
        let extent = bx
            .as_ref()
            .map(|b| b.lo.iter().zip(&b.hi).map(|(l, h)| h - l).fold(0.0, f64::max))
            .unwrap_or(1.0);
        let grid = solve_grid(spec, q, (extent / (CROSS_CHECK_POINTS - 1) as f64).max(1e-12))?;
        (f_star - grid.f_star).max(0.0) + grid.certified_gap
    } else if budget > 0 {
        (tail_hi - tail_lo).max(0.0)
    } else {
        f64::INFINITY
    };
    Ok(OracleSolution {
        x_star,
        f_star,
        method: OracleMethod::CentralizedSubgradient,
        certified_gap,
    })
}

/// Stationary point of an unconstrained weighted sum of quadratics:
/// `(sum q_i P_i) x = -sum q_i c_i`.
pub fn solve_closed_form(spec: &ProblemSpec, q: &LeftEigenvector) -> Result<OracleSolution> {
    check_weights(spec, q)?;
    if spec.mode() != Mode::Unconstrained {
        return Err(Error::Oracle("closed form applies to unconstrained problems only".into()));
    }
    let m = spec.m();
    let mut h = DMatrix::<f64>::zeros(m, m);
    let mut r = DVector::<f64>::zeros(m);
    for (qi, f) in q.as_slice().iter().zip(spec.objectives()) {
        match f {
            Objective::Quadratic { p, c, .. } => {
                for a in 0..m {
                    r[a] += qi * c[a];
                    for b in 0..m {
                        h[(a, b)] += qi * p[a][b];
                    }
                }
            }
            Objective::Affine { c, .. } => {
                for a in 0..m {
                    r[a] += qi * c[a];
                }
            }
            _ => {
                return Err(Error::Oracle(
                    "closed form needs quadratic or affine objectives".into(),
                ))
            }
        }
    }
    let x = h
        .cholesky()
        .ok_or_else(|| Error::Oracle("weighted Hessian is not positive definite".into()))?
        .solve(&(-r));
    let x_star: Vec<f64> = x.iter().copied().collect();
    let f_star = spec.weighted_value(q.as_slice(), &x_star);
    Ok(OracleSolution {
        x_star,
        f_star,
        method: OracleMethod::ClosedForm,
        certified_gap: 0.0,
    })
}
