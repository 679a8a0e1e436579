//! Runs a bundled preset end to end and writes its artifacts.
//!
//! `cargo run --release --example run_preset -- thm2_boxes_sqrt`

use dsubgrad::experiment::{list_presets, preset, run_experiment, RunOptions};
use dsubgrad::Result;

fn main() -> Result<()> {
    let Some(name) = std::env::args().nth(1) else {
        for p in list_presets() {
            println!("{:<28} {}", p.name, p.description());
        }
        return Ok(());
    };
    let cfg = preset(&name)?;
    let opts = RunOptions { out_root: Some(std::env::temp_dir().join("dsubgrad-example")), ..Default::default() };
    let outcome = run_experiment(&cfg, &opts)?;
    println!("{}: {} -> {}", name, outcome.status, outcome.dir.display());
    for t in &outcome.thresholds {
        let value = t.value.map_or("missing".to_string(), |v| format!("{v:.3e}"));
        println!("  {} = {value} (bound {:.1e}) {}", t.metric, t.bound, if t.met { "ok" } else { "MISSED" });
    }
    Ok(())
}
