use serde::{Deserialize, Serialize};

use crate::convex::{BoxBounds, ConstraintSet, Objective, ProblemSpec};
use crate::engine::{Init, RunConfig};
use crate::error::{Error, Result};
use crate::graph::{make_graph_sequence, GraphConfig};
use crate::schedule::StepSchedule;
use crate::validation::Waivers;

/// One experiment, as written in a TOML file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    #[serde(default)]
    pub description: String,
    pub problem: ProblemSection,
    pub graph: GraphConfig,
    pub schedule: StepSchedule,
    pub run: RunSection,
    #[serde(default)]
    pub oracle: OracleSection,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default)]
    pub expect: ExpectSection,
    #[serde(default)]
    pub waivers: WaiverSection,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSection {
    pub dimension: usize,
    /// `"auto"` or a number.
    #[serde(default)]
    pub g_bound: GPolicy,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sampling_box: Option<BoxBounds>,
    #[serde(default)]
    pub unique_minimizer: bool,
    pub agents: Vec<AgentSection>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GPolicyRepr", into = "GPolicyRepr")]
pub enum GPolicy {
    Declared(f64),
    /// Certify `G` by sampling each `X_i` (or the sampling box).
    #[default]
    Auto,
}

#[derive(Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum GPolicyRepr {
    Number(f64),
    Text(String),
}

impl TryFrom<GPolicyRepr> for GPolicy {
    type Error = String;

    fn try_from(r: GPolicyRepr) -> std::result::Result<Self, String> {
        match r {
            GPolicyRepr::Number(g) => Ok(GPolicy::Declared(g)),
            GPolicyRepr::Text(s) if s == "auto" => Ok(GPolicy::Auto),
            GPolicyRepr::Text(s) => Err(format!("expected a number or \"auto\", got {s:?}")),
        }
    }
}

impl From<GPolicy> for GPolicyRepr {
    fn from(g: GPolicy) -> Self {
        match g {
            GPolicy::Declared(x) => GPolicyRepr::Number(x),
            GPolicy::Auto => GPolicyRepr::Text("auto".into()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentSection {
    pub objective: Objective,
    #[serde(default = "full_space")]
    pub constraint: ConstraintSet,
}

fn full_space() -> ConstraintSet {
    ConstraintSet::FullSpace
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub rounds: usize,
    #[serde(default)]
    pub init: Init,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "one")]
    pub record_every: usize,
}

fn one() -> usize {
    1
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleChoice {
    /// Grid for `m <= 2`, centralized subgradient otherwise.
    #[default]
    Auto,
    Grid,
    CentralizedSubgradient,
    ClosedForm,
    None,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleSection {
    #[serde(default)]
    pub method: OracleChoice,
    #[serde(default = "default_resolution")]
    pub resolution: f64,
    #[serde(default = "default_budget")]
    pub budget: usize,
}

fn default_resolution() -> f64 {
    1e-3
}

fn default_budget() -> usize {
    crate::oracle::DEFAULT_BUDGET
}

impl Default for OracleSection {
    fn default() -> Self {
        Self {
            method: OracleChoice::Auto,
            resolution: default_resolution(),
            budget: default_budget(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    /// Overrides the default output root; artifacts go to `<dir>/<name>/`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<String>,
}

/// Thresholds checked against the final metrics.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpectSection {
    /// Bound on `f(P_X(y(K))) - f*`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_objective_gap: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_consensus_diameter: Option<f64>,
    /// The run is a negative control: success means the thresholds are missed.
    #[serde(default)]
    pub expect_failure: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WaiverSection {
    #[serde(default)]
    pub assumptions: Vec<u8>,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn waivers(&self) -> Waivers {
        Waivers(self.waivers.assumptions.iter().copied().collect())
    }

    pub fn problem_spec(&self) -> Result<ProblemSpec> {
        let p = &self.problem;
        let (objectives, constraints) = p
            .agents
            .iter()
            .map(|a| (a.objective.clone(), a.constraint.clone()))
            .unzip();
        let mut spec = ProblemSpec::new(p.dimension, objectives, constraints)?
            .with_unique_minimizer(p.unique_minimizer);
        if let Some(b) = &p.sampling_box {
            spec = spec.with_sampling_box(b.clone())?;
        }
        if let GPolicy::Declared(g) = p.g_bound {
            if !(g.is_finite() && g > 0.0) {
                return Err(Error::Config(format!("g_bound must be positive, got {g}")));
            }
            spec = spec.with_g_bound(g);
        }
        Ok(spec)
    }

    /// Builds the engine configuration; assumption checks happen separately.
    pub fn run_config(&self) -> Result<RunConfig> {
        let spec = self.problem_spec()?;
        let graph = make_graph_sequence(&self.graph)?;
        Ok(RunConfig::new(spec, graph, self.schedule.clone())
            .rounds(self.run.rounds)
            .init(self.run.init.clone())
            .record_every(self.run.record_every)
            .seed(self.run.seed)
            .allow_invalid_schedule(self.waivers().contains(7)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
name = "minimal"

[problem]
dimension = 1
g_bound = "auto"
sampling_box = { lo = [-2], hi = [2] }

[[problem.agents]]
objective = { kind = "quadratic", p = [[2.0]], c = [-2.0], b = 1.0 }

[[problem.agents]]
objective = { kind = "quadratic", p = [[2.0]], c = [2.0], b = 1.0 }

[graph]
kind = "fixed"
matrix = [[0.5, 0.5], [1.0, 0.0]]

[schedule]
kind = "polynomial"
a = 1.0
k0 = 1
p = 0.5

[run]
rounds = 10
"#;

    #[test]
    fn parses_minimal_config() {
        let cfg = ExperimentConfig::from_toml(MINIMAL).unwrap();
        assert_eq!(cfg.problem.g_bound, GPolicy::Auto);
        assert_eq!(cfg.run.record_every, 1);
        assert_eq!(cfg.oracle.method, OracleChoice::Auto);
        let rc = cfg.run_config().unwrap();
        assert_eq!(rc.problem.n(), 2);
        assert_eq!(rc.rounds, 10);
    }

    #[test]
    fn numeric_g_bound_and_round_trip() {
        let text = MINIMAL.replace("g_bound = \"auto\"", "g_bound = 6");
        let cfg = ExperimentConfig::from_toml(&text).unwrap();
        assert_eq!(cfg.problem.g_bound, GPolicy::Declared(6.0));
        let again = ExperimentConfig::from_toml(&cfg.to_toml().unwrap()).unwrap();
        assert_eq!(cfg, again);
    }

    #[test]
    fn parse_errors_carry_location() {
        let text = MINIMAL.replace("rounds = 10", "rounds = \"ten\"");
        let err = ExperimentConfig::from_toml(&text).unwrap_err().to_string();
        assert!(err.contains("line"), "{err}");
        let text = MINIMAL.replace("g_bound = \"auto\"", "g_bound = \"big\"");
        assert!(ExperimentConfig::from_toml(&text).is_err());
    }
}
