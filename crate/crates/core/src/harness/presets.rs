//! Built-in experiment configurations.

use crate::error::{Error, Result};

use super::ExperimentConfig;

const PRESETS: &[(&str, &str)] = &[
    ("spi-vs-sgi", include_str!("../../presets/spi-vs-sgi.toml")),
    ("spi-vs-sgi-hadamard", include_str!("../../presets/spi-vs-sgi-hadamard.toml")),
    ("hadamard-complete", include_str!("../../presets/hadamard-complete.toml")),
    ("ogi-vs-spi", include_str!("../../presets/ogi-vs-spi.toml")),
    ("tomography-noiseless", include_str!("../../presets/tomography-noiseless.toml")),
    ("noise-sweep", include_str!("../../presets/noise-sweep.toml")),
    ("alpha-beta-sweep", include_str!("../../presets/alpha-beta-sweep.toml")),
    ("osgqt-fixed-point", include_str!("../../presets/osgqt-fixed-point.toml")),
];

pub fn names() -> impl Iterator<Item = &'static str> {
    PRESETS.iter().map(|(name, _)| *name)
}

/// The TOML source of a preset.
pub fn source(name: &str) -> Result<&'static str> {
    PRESETS
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, text)| *text)
        .ok_or_else(|| Error::UnknownPreset(name.to_string()))
}

pub fn load(name: &str) -> Result<ExperimentConfig> {
    ExperimentConfig::from_toml_str(source(name)?)
}

/// First comment line of a preset.
pub fn description(name: &str) -> Result<&'static str> {
    Ok(source(name)?
        .lines()
        .next()
        .and_then(|l| l.strip_prefix("# "))
        .unwrap_or(""))
}
