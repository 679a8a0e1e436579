//! Parses an experiment from TOML and prints every assumption check.

use dsubgrad::experiment::{validate_config, ExperimentConfig};
use dsubgrad::Result;

const CONFIG: &str = r#"
name = "three_agents"

[problem]
dimension = 1
g_bound = "auto"

[[problem.agents]]
objective = { kind = "l1_shift", w = [1.0], center = [0.5] }
constraint = { kind = "box", lo = [-1.0], hi = [1.0] }

[[problem.agents]]
objective = { kind = "affine", c = [1.0], b = 0.0 }
constraint = { kind = "box", lo = [0.0], hi = [2.0] }

[[problem.agents]]
objective = { kind = "quadratic", p = [[2.0]], c = [0.0], b = 0.0 }
constraint = { kind = "ball", center = [0.5], radius = 1.0 }

[graph]
kind = "complete"
n = 3

[schedule]
kind = "constant"
a = 0.05

[run]
rounds = 1000
"#;

fn main() -> Result<()> {
    let cfg = ExperimentConfig::from_toml(CONFIG)?;
    let report = validate_config(&cfg);
    for c in &report.checks {
        println!("{:?} {} {}", c.status, c.name, c.detail);
    }
    println!("passed: {}", report.passed());
    Ok(())
}
