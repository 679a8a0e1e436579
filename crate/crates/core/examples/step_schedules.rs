//! Step-size families and how the validator classifies them.

use dsubgrad::schedule::{per_agent_alpha, validate_assumption7, StepSchedule};
use dsubgrad::Result;

fn main() -> Result<()> {
    let schedules = [
        ("1/sqrt(k+1)", StepSchedule::inverse_sqrt()),
        ("1/(k+1)", StepSchedule::harmonic()),
        ("0.5/(k+2)^0.75", StepSchedule::polynomial(0.5, 2.0, 0.75)),
        ("log(k+2)/(k+2)", StepSchedule::LogPolynomial { a: 1.0, k0: 2.0 }),
        ("constant 0.1", StepSchedule::Constant { a: 0.1 }),
    ];
    for (label, s) in &schedules {
        let report = validate_assumption7(s);
        println!(
            "{label:>16}: alpha(10^4) = {:.3e}, class {:?}, violations {:?}",
            s.alpha(10_000),
            report.class,
            report.violations
        );
    }

    let per_agent = StepSchedule::PerAgentPerturbed {
        base: Box::new(StepSchedule::inverse_sqrt()),
        d: vec![-0.5, 0.0, 0.5],
        r: 1.0,
    };
    for k in [0, 10, 1000, 100_000] {
        let ratios: Vec<f64> = (0..3).map(|i| per_agent_alpha(&per_agent, i, k).map(|a| a / per_agent.alpha(k))).collect::<Result<_>>()?;
        println!("k = {k:>6}: alpha_i / alpha = {ratios:.4?}");
    }
    Ok(())
}
