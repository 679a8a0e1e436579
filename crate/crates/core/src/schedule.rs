//! Step-size sequences `alpha(k)` and their analytic classification.
//!
//! Summability is decided symbolically from the parameters; no finite
//! computation can certify divergence of a series.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StepSchedule {
    /// `a / (k + k0)^p`
    Polynomial { a: f64, k0: f64, p: f64 },
    /// `a / ((k + k0) ln(k + k0 + 1))`
    LogPolynomial { a: f64, k0: f64 },
    /// Constant step; constructible for negative controls, rejected by the validator.
    Constant { a: f64 },
    /// `alpha_i(k) = alpha(k) (1 + d_i / (k + 1)^r)`
    PerAgentPerturbed {
        base: Box<StepSchedule>,
        d: Vec<f64>,
        r: f64,
    },
}

/// Analytic properties of a schedule.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Classification {
    pub positive: bool,
    pub vanishing: bool,
    pub non_summable: bool,
    pub square_summable: bool,
}

/// Label echoed into run metadata.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScheduleClass {
    /// Positive, vanishing, non-summable and not square-summable.
    General,
    /// Additionally square-summable.
    Classical,
    /// Fails the positive/vanishing/non-summable envelope.
    Invalid,
}

impl std::fmt::Display for ScheduleClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ScheduleClass::General => "general",
            ScheduleClass::Classical => "classical",
            ScheduleClass::Invalid => "invalid",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScheduleReport {
    pub passed: bool,
    pub classification: Classification,
    pub class: ScheduleClass,
    pub violations: Vec<String>,
}

impl StepSchedule {
    pub fn polynomial(a: f64, k0: f64, p: f64) -> Self {
        StepSchedule::Polynomial { a, k0, p }
    }

    /// `1 / sqrt(k + 1)`
    pub fn inverse_sqrt() -> Self {
        Self::polynomial(1.0, 1.0, 0.5)
    }

    /// `1 / (k + 1)`
    pub fn harmonic() -> Self {
        Self::polynomial(1.0, 1.0, 1.0)
    }

    /// Parameter checks that make `alpha(k)` well defined and positive.
    pub fn check_parameters(&self) -> Result<()> {
        let positive = |a: f64| {
            if a.is_finite() && a > 0.0 {
                Ok(())
            } else {
                Err(Error::Schedule(format!("scale a must be positive, got {a}")))
            }
        };
        let offset = |k0: f64| {
            if k0.is_finite() && k0 >= 1.0 {
                Ok(())
            } else {
                Err(Error::Schedule(format!("offset k0 must be at least 1, got {k0}")))
            }
        };
        match self {
            StepSchedule::Polynomial { a, k0, p } => {
                positive(*a)?;
                offset(*k0)?;
                if !(p.is_finite() && *p > 0.0) {
                    return Err(Error::Schedule(format!("exponent p must be positive, got {p}")));
                }
                Ok(())
            }
            StepSchedule::LogPolynomial { a, k0 } => {
                positive(*a)?;
                offset(*k0)
            }
            StepSchedule::Constant { a } => positive(*a),
            StepSchedule::PerAgentPerturbed { base, d, r } => {
                if matches!(**base, StepSchedule::PerAgentPerturbed { .. }) {
                    return Err(Error::Schedule("perturbations cannot be nested".into()));
                }
                base.check_parameters()?;
                if let Some((i, di)) = d.iter().enumerate().find(|(_, di)| di.is_nan() || **di <= -1.0) {
                    return Err(Error::Schedule(format!(
                        "perturbation d_{i} = {di} must exceed -1 to keep steps positive"
                    )));
                }
                if d.iter().any(|x| !x.is_finite()) {
                    return Err(Error::Schedule("perturbations must be finite".into()));
                }
                if !(r.is_finite() && *r > 0.0) {
                    return Err(Error::Schedule(format!(
                        "perturbation decay r must be positive, got {r}"
                    )));
                }
                Ok(())
            }
        }
    }

    /// Common step `alpha(k)`; for a perturbed schedule this is the base step.
    pub fn alpha(&self, k: usize) -> f64 {
        let k = k as f64;
        match self {
            StepSchedule::Polynomial { a, k0, p } => a / (k + k0).powf(*p),
            StepSchedule::LogPolynomial { a, k0 } => a / ((k + k0) * (k + k0 + 1.0).ln()),
            StepSchedule::Constant { a } => *a,
            StepSchedule::PerAgentPerturbed { base, .. } => base.alpha(k as usize),
        }
    }

    /// Step of agent `i` at round `k`; equals `alpha(k)` for unperturbed schedules.
    pub fn agent_alpha(&self, i: usize, k: usize) -> f64 {
        match self {
            StepSchedule::PerAgentPerturbed { base, d, r } => {
                base.alpha(k) * (1.0 + d[i] / (k as f64 + 1.0).powf(*r))
            }
            _ => self.alpha(k),
        }
    }

    /// Number of agents a perturbation is declared for.
    pub fn perturbation_len(&self) -> Option<usize> {
        match self {
            StepSchedule::PerAgentPerturbed { d, .. } => Some(d.len()),
            _ => None,
        }
    }

    pub fn classification(&self) -> Classification {
        match self {
            StepSchedule::Polynomial { p, .. } => Classification {
                positive: true,
                vanishing: *p > 0.0,
                non_summable: *p <= 1.0,
                square_summable: *p > 0.5,
            },
            // sum 1/(k ln k) diverges, sum 1/(k ln k)^2 converges
            StepSchedule::LogPolynomial { .. } => Classification {
                positive: true,
                vanishing: true,
                non_summable: true,
                square_summable: true,
            },
            StepSchedule::Constant { .. } => Classification {
                positive: true,
                vanishing: false,
                non_summable: true,
                square_summable: false,
            },
            // (1 + delta_i(k)) -> 1, so every property carries over from the base
            StepSchedule::PerAgentPerturbed { base, .. } => base.classification(),
        }
    }
}

/// Checks the positive / vanishing / non-summable envelope and labels the
/// schedule `general` or `classical`.
pub fn validate_assumption7(s: &StepSchedule) -> ScheduleReport {
    let mut violations = Vec::new();
    if let Err(e) = s.check_parameters() {
        violations.push(format!("Assumption 7 violated: {e}"));
    }
    let c = s.classification();
    if !c.positive {
        violations.push("Assumption 7 violated: step size not positive".into());
    }
    if !c.vanishing {
        violations.push("Assumption 7 violated: step size not vanishing".into());
    }
    if !c.non_summable {
        violations.push("Assumption 7 violated: step sizes are summable".into());
    }
    let passed = violations.is_empty();
    let class = match (passed, c.square_summable) {
        (false, _) => ScheduleClass::Invalid,
        (true, true) => ScheduleClass::Classical,
        (true, false) => ScheduleClass::General,
    };
    ScheduleReport {
        passed,
        classification: c,
        class,
        violations,
    }
}

/// `alpha_i(k)` of a perturbed schedule.
pub fn per_agent_alpha(s: &StepSchedule, i: usize, k: usize) -> Result<f64> {
    match s {
        StepSchedule::PerAgentPerturbed { d, .. } => {
            s.check_parameters()?;
            if i >= d.len() {
                return Err(Error::Schedule(format!(
                    "agent {i} has no perturbation (only {} declared)",
                    d.len()
                )));
            }
            Ok(s.agent_alpha(i, k))
        }
        _ => Err(Error::Schedule("schedule is not per-agent perturbed".into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alpha_examples() {
        let s = StepSchedule::inverse_sqrt();
        assert_eq!(s.alpha(0), 1.0);
        assert_eq!(s.alpha(3), 0.5);
        assert!((StepSchedule::harmonic().alpha(9) - 0.1).abs() < 1e-16);
        assert_eq!(StepSchedule::Constant { a: 0.1 }.alpha(1_000_000), 0.1);
    }

    #[test]
    fn log_polynomial_value() {
        let s = StepSchedule::LogPolynomial { a: 1.0, k0: 1.0 };
        assert!((s.alpha(0) - 1.0 / 2f64.ln()).abs() < 1e-15);
        assert!(validate_assumption7(&s).passed);
        assert_eq!(validate_assumption7(&s).class, ScheduleClass::Classical);
    }

    #[test]
    fn validator_examples() {
        let r = validate_assumption7(&StepSchedule::inverse_sqrt());
        assert!(r.passed);
        assert!(!r.classification.square_summable);
        assert_eq!(r.class, ScheduleClass::General);

        let r = validate_assumption7(&StepSchedule::harmonic());
        assert!(r.passed);
        assert_eq!(r.class, ScheduleClass::Classical);

        let r = validate_assumption7(&StepSchedule::Constant { a: 0.1 });
        assert!(!r.passed);
        assert!(r.violations.iter().any(|v| v.contains("not vanishing")));

        let r = validate_assumption7(&StepSchedule::polynomial(1.0, 1.0, 2.0));
        assert!(!r.passed);
        assert!(r.violations.iter().any(|v| v.contains("summable")));

        let r = validate_assumption7(&StepSchedule::polynomial(1.0, 0.0, 0.5));
        assert!(!r.passed);
    }

    #[test]
    fn per_agent_examples() {
        let s = StepSchedule::PerAgentPerturbed {
            base: Box::new(StepSchedule::inverse_sqrt()),
            d: vec![0.0],
            r: 1.0,
        };
        for k in [0, 1, 10, 1000] {
            assert_eq!(per_agent_alpha(&s, 0, k).unwrap(), s.alpha(k));
        }
        let s = StepSchedule::PerAgentPerturbed {
            base: Box::new(StepSchedule::harmonic()),
            d: vec![1.0],
            r: 1.0,
        };
        assert_eq!(per_agent_alpha(&s, 0, 0).unwrap(), 2.0);
        let s = StepSchedule::PerAgentPerturbed {
            base: Box::new(StepSchedule::harmonic()),
            d: vec![0.5],
            r: 1.0,
        };
        let ratio = per_agent_alpha(&s, 0, 1_000_000).unwrap() / s.alpha(1_000_000);
        assert!((ratio - 1.0).abs() < 1e-6);
    }

    #[test]
    fn per_agent_rejects_nonpositive_factor() {
        let s = StepSchedule::PerAgentPerturbed {
            base: Box::new(StepSchedule::inverse_sqrt()),
            d: vec![0.2, -1.0],
            r: 1.0,
        };
        assert!(per_agent_alpha(&s, 0, 0).is_err());
        assert!(!validate_assumption7(&s).passed);
        assert!(per_agent_alpha(&StepSchedule::inverse_sqrt(), 0, 0).is_err());
    }
}
