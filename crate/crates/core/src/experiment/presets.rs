use super::config::ExperimentConfig;
use crate::error::{Error, Result};

/// A bundled experiment.
#[derive(Clone, Copy, Debug)]
pub struct Preset {
    pub name: &'static str,
    pub source: &'static str,
}

macro_rules! presets {
    ($($name:literal),* $(,)?) => {
        &[$(Preset { name: $name, source: include_str!(concat!("../../presets/", $name, ".toml")) }),*]
    };
}

const PRESETS: &[Preset] = presets![
    "thm1_balanced_sqrt",
    "thm1_fixed_unbalanced",
    "thm2_boxes_sqrt",
    "thm2_timevarying_balanced",
    "classical_p1",
    "negative_constant_step",
    "nonuniform_steps",
];

impl Preset {
    pub fn config(&self) -> Result<ExperimentConfig> {
        ExperimentConfig::from_toml(self.source)
    }

    /// The `description` line of the preset file.
    pub fn description(&self) -> String {
        self.config().map(|c| c.description).unwrap_or_default()
    }
}

pub fn list_presets() -> &'static [Preset] {
    PRESETS
}

pub fn preset(name: &str) -> Result<ExperimentConfig> {
    PRESETS
        .iter()
        .find(|p| p.name == name)
        .ok_or_else(|| Error::UnknownPreset(name.to_string()))?
        .config()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_parses() {
        assert!(list_presets().len() >= 7);
        for p in list_presets() {
            let cfg = p.config().unwrap_or_else(|e| panic!("{}: {e}", p.name));
            assert_eq!(cfg.name, p.name);
            assert!(!cfg.description.is_empty(), "{}", p.name);
            cfg.run_config().unwrap();
        }
    }

    #[test]
    fn unknown_name() {
        assert!(matches!(preset("nope"), Err(Error::UnknownPreset(_))));
    }
}
