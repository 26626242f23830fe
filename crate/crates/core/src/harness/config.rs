//! Experiment configuration files (TOML).
//!
//! ```toml
//! preset = "tomography-noiseless"
//! variants = ["sgqt", "osgqt"]
//! runs = 100
//! iterations = 350
//! seed = 2024
//! dimension = 5
//!
//! [schedule]
//! kind = "constant"
//! alpha = 0.05
//! beta = 0.2
//!
//! [[noise]]
//! kind = "none"
//!
//! [[assert]]
//! check = "final-mean-below"
//! arm = "osgqt"
//! value = 0.025
//! ```
//!
//! Imaging experiments use `width`, `height`, `image`, `masks` and
//! `ogi_normalized` instead of the quantum keys. Unknown keys are rejected.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::generators::{ImagePreset, MaskSource, StateEnsemble};
use crate::measurement::{Convention, NoiseModel};
use crate::tomography::{InitialEstimate, QuantumVariant, Schedule};

/// Every algorithm the harness can run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    Spi,
    Ogi,
    Ghost,
    Sgi,
    Sgqt,
    Osgqt,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Spi => "spi",
            Algorithm::Ogi => "ogi",
            Algorithm::Ghost => "ghost",
            Algorithm::Sgi => "sgi",
            Algorithm::Sgqt => "sgqt",
            Algorithm::Osgqt => "osgqt",
        }
    }

    pub fn is_quantum(self) -> bool {
        matches!(self, Algorithm::Sgqt | Algorithm::Osgqt)
    }

    pub fn quantum_variant(self) -> Option<QuantumVariant> {
        match self {
            Algorithm::Sgqt => Some(QuantumVariant::Sgqt),
            Algorithm::Osgqt => Some(QuantumVariant::Osgqt),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Imaging,
    Tomography,
}

/// A check evaluated against the aggregated results. Arms are named by
/// their label (see [`ExperimentConfig::arm_label`]).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "check", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Check {
    /// Largest `|metric_a - metric_b|` over all runs and iterations.
    MaxAbsDifference { a: String, b: String, below: f64 },
    /// Largest metric over all runs and iterations.
    MaxMetricBelow { arm: String, value: f64 },
    FinalMeanBelow { arm: String, value: f64 },
    FinalMeanWithin { arm: String, min: f64, max: f64 },
    /// `final_mean(lower) < final_mean(higher)`, or `<=` when not strict.
    FinalMeanOrder {
        lower: String,
        higher: String,
        #[serde(default = "default_true")]
        strict: bool,
    },
    /// `mean(lower) < mean(higher)` at every `k >= from_k`.
    MeanOrder {
        lower: String,
        higher: String,
        #[serde(default)]
        from_k: usize,
    },
    /// `first` crosses below `threshold` at a strictly smaller `k` than
    /// `second` (which may never cross).
    CrossingOrder { first: String, second: String, threshold: f64 },
    /// Sweep only: the best cell of `lower` is no worse than that of `higher`.
    BestOrder { lower: String, higher: String },
}

fn default_true() -> bool {
    true
}

impl Check {
    pub fn name(&self) -> &'static str {
        match self {
            Check::MaxAbsDifference { .. } => "max-abs-difference",
            Check::MaxMetricBelow { .. } => "max-metric-below",
            Check::FinalMeanBelow { .. } => "final-mean-below",
            Check::FinalMeanWithin { .. } => "final-mean-within",
            Check::FinalMeanOrder { .. } => "final-mean-order",
            Check::MeanOrder { .. } => "mean-order",
            Check::CrossingOrder { .. } => "crossing-order",
            Check::BestOrder { .. } => "best-order",
        }
    }

    pub fn is_sweep_check(&self) -> bool {
        matches!(self, Check::BestOrder { .. })
    }

    pub(crate) fn arms(&self) -> Vec<&str> {
        match self {
            Check::MaxAbsDifference { a, b, .. } => vec![a, b],
            Check::MaxMetricBelow { arm, .. } | Check::FinalMeanBelow { arm, .. } | Check::FinalMeanWithin { arm, .. } => {
                vec![arm]
            }
            Check::FinalMeanOrder { lower, higher, .. }
            | Check::MeanOrder { lower, higher, .. }
            | Check::BestOrder { lower, higher } => vec![lower, higher],
            Check::CrossingOrder { first, second, .. } => vec![first, second],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepGrid {
    pub alphas: Vec<f64>,
    pub betas: Vec<f64>,
}

fn default_runs() -> usize {
    100
}

fn default_dimension() -> usize {
    5
}

fn default_side() -> usize {
    64
}

fn default_image() -> String {
    "disk".into()
}

fn default_schedule() -> Schedule {
    Schedule::constant(0.05, 0.2)
}

fn default_noise() -> Vec<NoiseModel> {
    vec![NoiseModel::None]
}

fn default_thresholds() -> Vec<f64> {
    vec![0.1]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub preset: String,
    pub variants: Vec<Algorithm>,
    #[serde(default = "default_runs")]
    pub runs: usize,
    pub iterations: usize,
    #[serde(default)]
    pub seed: u64,

    #[serde(default = "default_dimension")]
    pub dimension: usize,
    #[serde(default)]
    pub ensemble: StateEnsemble,
    #[serde(default)]
    pub convention: Convention,
    #[serde(default)]
    pub initial: InitialEstimate,

    #[serde(default = "default_side")]
    pub width: usize,
    #[serde(default = "default_side")]
    pub height: usize,
    /// `checker`, `disk`, `gradient` or `file:<path.pgm>`.
    #[serde(default = "default_image")]
    pub image: String,
    #[serde(default = "default_mask_source")]
    pub masks: MaskSource,
    #[serde(default = "default_true")]
    pub ogi_normalized: bool,

    #[serde(default = "default_schedule")]
    pub schedule: Schedule,
    /// One arm per (variant, noise level).
    #[serde(default = "default_noise")]
    pub noise: Vec<NoiseModel>,
    /// Infidelity / error levels whose first crossing is reported.
    #[serde(default = "default_thresholds")]
    pub thresholds: Vec<f64>,
    #[serde(default, rename = "assert")]
    pub assertions: Vec<Check>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepGrid>,
    /// Default output directory; the CLI `--out` flag overrides it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

fn default_mask_source() -> MaskSource {
    MaskSource::Random
}

fn config_error(e: impl std::fmt::Display) -> Error {
    Error::Config(e.to_string())
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let config: Self = toml::from_str(text).map_err(config_error)?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(config_error)
    }

    pub fn kind(&self) -> ExperimentKind {
        if self.variants.iter().any(|v| v.is_quantum()) {
            ExperimentKind::Tomography
        } else {
            ExperimentKind::Imaging
        }
    }

    pub fn image_preset(&self) -> Result<ImagePreset> {
        self.image.parse()
    }

    /// `variant` alone when there is a single noise level, otherwise
    /// `variant@<noise label>`.
    pub fn arm_label(&self, variant: Algorithm, noise: &NoiseModel) -> String {
        if self.noise.len() == 1 {
            variant.name().to_string()
        } else {
            format!("{}@{}", variant.name(), noise.label())
        }
    }

    /// All `(label, variant, noise)` arms, variants outermost.
    pub fn arms(&self) -> Vec<(String, Algorithm, NoiseModel)> {
        self.variants
            .iter()
            .flat_map(|&v| self.noise.iter().map(move |n| (v, *n)))
            .map(|(v, n)| (self.arm_label(v, &n), v, n))
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.preset.trim().is_empty() {
            return bad("preset name must not be empty".into());
        }
        if self.variants.is_empty() {
            return bad("at least one variant is required".into());
        }
        let mut seen = Vec::new();
        for v in &self.variants {
            if seen.contains(v) {
                return bad(format!("variant `{}` listed twice", v.name()));
            }
            seen.push(*v);
        }
        if self.variants.iter().any(|v| v.is_quantum()) && self.variants.iter().any(|v| !v.is_quantum()) {
            return bad("imaging and tomography variants cannot be mixed in one experiment".into());
        }
        if self.runs == 0 {
            return bad("runs must be >= 1".into());
        }
        if self.iterations == 0 {
            return bad("iterations must be >= 1".into());
        }
        if self.noise.is_empty() {
            return bad("at least one noise level is required (use kind = \"none\")".into());
        }
        let mut labels: Vec<String> = self.noise.iter().map(|n| n.label()).collect();
        labels.sort();
        labels.dedup();
        if labels.len() != self.noise.len() {
            return bad("noise levels must be distinct".into());
        }
        self.schedule.validate().map_err(config_error)?;
        for n in &self.noise {
            n.validate().map_err(config_error)?;
        }
        match self.kind() {
            ExperimentKind::Tomography => {
                if self.dimension < 2 {
                    return bad(format!("dimension must be >= 2, got {}", self.dimension));
                }
                if self.noise.iter().any(|n| matches!(n, NoiseModel::Gaussian { .. })) {
                    return bad("tomography runs support `none` or `poisson` noise".into());
                }
            }
            ExperimentKind::Imaging => {
                if self.width == 0 || self.height == 0 {
                    return bad("width and height must be positive".into());
                }
                self.image_preset()?;
                if self.noise.iter().any(|n| matches!(n, NoiseModel::Poisson { .. })) {
                    return bad("imaging runs support `none` or `gaussian` noise".into());
                }
                if self.masks != MaskSource::Random && self.iterations > self.width * self.height {
                    return bad(format!(
                        "a Hadamard mask set has {} masks, fewer than {} iterations",
                        self.width * self.height,
                        self.iterations
                    ));
                }
                if self.variants.contains(&Algorithm::Ghost) && self.iterations < 2 {
                    return bad("ghost imaging needs at least 2 iterations".into());
                }
            }
        }
        if self.thresholds.iter().any(|t| !t.is_finite()) {
            return bad("thresholds must be finite".into());
        }
        let labels: Vec<String> = self.arms().into_iter().map(|(l, _, _)| l).collect();
        for check in &self.assertions {
            for arm in check.arms() {
                if !labels.iter().any(|l| l == arm) {
                    return bad(format!(
                        "assertion `{}` refers to unknown arm `{arm}` (arms: {})",
                        check.name(),
                        labels.join(", ")
                    ));
                }
            }
        }
        if let Some(grid) = &self.sweep {
            if grid.alphas.is_empty() || grid.betas.is_empty() {
                return bad("sweep grids must not be empty".into());
            }
            if grid.alphas.iter().chain(&grid.betas).any(|&v| !(v > 0.0 && v.is_finite())) {
                return bad("sweep values must be positive".into());
            }
        }
        Ok(())
    }

    /// SHA-256 over the canonical JSON form of everything that affects
    /// results, as 16 hex digits. The output directory is excluded.
    pub fn hash(&self) -> String {
        let mut canonical = self.clone();
        canonical.output = None;
        let json = serde_json::to_string(&canonical).expect("config serializes");
        let digest = Sha256::new()
            .chain_update(env!("CARGO_PKG_VERSION").as_bytes())
            .chain_update([0u8])
            .chain_update(json.as_bytes())
            .finalize();
        digest[..8].iter().map(|b| format!("{b:02x}")).collect()
    }
}
