//! Seeded construction of masks, perturbation directions, random states and
//! test images.
//!
//! Every generator is a pure function of its parameters and the generator
//! state passed in, so replaying a seed reproduces the output bit for bit.

pub mod pgm;

use std::f64::consts::TAU;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{check_dims, Error, Result};
use crate::linalg::{ComplexState, ImageVector, Normalize, Pixels};
use crate::rng::{self, Stream, StreamRng};

/// Symbol set a perturbation direction is drawn from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Alphabet {
    /// `{1, -1, i, -i}`
    Quantum,
    /// `{+1, -1}`
    Real,
}

impl Alphabet {
    pub fn symbols(self) -> &'static [Complex64] {
        const QUANTUM: [Complex64; 4] = [
            Complex64::new(1.0, 0.0),
            Complex64::new(-1.0, 0.0),
            Complex64::new(0.0, 1.0),
            Complex64::new(0.0, -1.0),
        ];
        match self {
            Alphabet::Quantum => &QUANTUM,
            Alphabet::Real => &QUANTUM[..2],
        }
    }
}

/// A random SPSA probe direction. Every entry has modulus one.
#[derive(Clone, Debug, PartialEq)]
pub struct PerturbationDirection {
    entries: Vec<Complex64>,
    alphabet: Alphabet,
}

impl PerturbationDirection {
    pub fn new(entries: Vec<Complex64>, alphabet: Alphabet) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::invalid("perturbation dimension must be at least 1"));
        }
        if let Some(bad) = entries.iter().find(|e| !alphabet.symbols().contains(e)) {
            return Err(Error::invalid(format!("{bad} is not in the {alphabet:?} alphabet")));
        }
        Ok(Self { entries, alphabet })
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }
}

/// Draw a direction with entries uniform over `{1, -1, i, -i}`.
pub fn random_perturbation<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Result<PerturbationDirection> {
    random_perturbation_with(d, Alphabet::Quantum, rng)
}

pub fn random_perturbation_with<R: Rng + ?Sized>(
    d: usize,
    alphabet: Alphabet,
    rng: &mut R,
) -> Result<PerturbationDirection> {
    if d == 0 {
        return Err(Error::invalid("perturbation dimension must be at least 1"));
    }
    let symbols = alphabet.symbols();
    let entries = (0..d).map(|_| symbols[rng.gen_range(0..symbols.len())]).collect();
    Ok(PerturbationDirection { entries, alphabet })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum MaskKind {
    Random,
    Hadamard { row: usize },
}

/// A binary `+1/-1` illumination or detection pattern.
#[derive(Clone, Debug, PartialEq)]
pub struct Mask {
    entries: Vec<f64>,
    kind: MaskKind,
    width: usize,
    height: usize,
}

impl Mask {
    pub fn kind(&self) -> MaskKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// Same entries viewed as a `width x height` image.
    pub fn reshape(mut self, width: usize, height: usize) -> Result<Self> {
        check_dims(self.entries.len(), width * height)?;
        self.width = width;
        self.height = height;
        Ok(self)
    }

    pub fn to_image(&self) -> ImageVector {
        ImageVector::new(self.entries.clone(), self.width, self.height)
            .expect("mask shape is validated on construction")
    }
}

impl Pixels for Mask {
    fn pixels(&self) -> &[f64] {
        &self.entries
    }
}

pub fn random_sign_mask<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Mask> {
    if n == 0 {
        return Err(Error::invalid("mask must have at least one pixel"));
    }
    let entries = (0..n).map(|_| if rng.gen::<bool>() { 1.0 } else { -1.0 }).collect();
    Ok(Mask { entries, kind: MaskKind::Random, width: n, height: 1 })
}

/// Row `row` of the Sylvester Hadamard matrix of order `order`.
///
/// Entry `j` is `(-1)^popcount(row & j)`, which is the closed form of the
/// recursion `H_2n = [[H_n, H_n], [H_n, -H_n]]`.
pub fn hadamard_mask(order: usize, row: usize) -> Result<Mask> {
    if !order.is_power_of_two() {
        return Err(Error::invalid(format!("Hadamard order {order} is not a power of two")));
    }
    if row >= order {
        return Err(Error::invalid(format!("Hadamard row {row} out of range for order {order}")));
    }
    let entries = (0..order)
        .map(|j| if (row & j).count_ones().is_multiple_of(2) { 1.0 } else { -1.0 })
        .collect();
    Ok(Mask { entries, kind: MaskKind::Hadamard { row }, width: order, height: 1 })
}

/// How masks are drawn for an imaging run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MaskSource {
    Random,
    /// Sylvester rows in order `0, 1, ..., n-1`.
    Hadamard,
    /// Sylvester rows in a seeded random order.
    HadamardPermuted,
}

impl fmt::Display for MaskSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MaskSource::Random => "random",
            MaskSource::Hadamard => "hadamard",
            MaskSource::HadamardPermuted => "hadamard-permuted",
        })
    }
}

enum SequenceState {
    Random(Box<StreamRng>),
    Hadamard { rows: Option<Vec<usize>> },
}

/// Deterministic stream of masks shaped `width x height`.
///
/// Random sequences never end; Hadamard sequences yield each of the `n` rows
/// once.
pub struct MaskSequence {
    state: SequenceState,
    width: usize,
    height: usize,
    next: usize,
}

impl MaskSequence {
    pub fn new(source: MaskSource, width: usize, height: usize, seed: u64) -> Result<Self> {
        let n = width * height;
        if n == 0 {
            return Err(Error::invalid("mask must have at least one pixel"));
        }
        let state = match source {
            MaskSource::Random => SequenceState::Random(Box::new(rng::stream(seed, Stream::Directions))),
            MaskSource::Hadamard | MaskSource::HadamardPermuted => {
                if !n.is_power_of_two() {
                    return Err(Error::invalid(format!(
                        "Hadamard masks need a power-of-two pixel count, got {width}x{height}"
                    )));
                }
                let rows = (source == MaskSource::HadamardPermuted).then(|| {
                    let mut rows: Vec<usize> = (0..n).collect();
                    rows.shuffle(&mut rng::stream(seed, Stream::Permutation));
                    rows
                });
                SequenceState::Hadamard { rows }
            }
        };
        Ok(Self { state, width, height, next: 0 })
    }

    pub fn random(width: usize, height: usize, seed: u64) -> Result<Self> {
        Self::new(MaskSource::Random, width, height, seed)
    }

    pub fn hadamard(width: usize, height: usize) -> Result<Self> {
        Self::new(MaskSource::Hadamard, width, height, 0)
    }
}

impl Iterator for MaskSequence {
    type Item = Mask;

    fn next(&mut self) -> Option<Mask> {
        let n = self.width * self.height;
        let mask = match &mut self.state {
            SequenceState::Random(rng) => random_sign_mask(n, rng.as_mut()).ok()?,
            SequenceState::Hadamard { rows } => {
                if self.next >= n {
                    return None;
                }
                let row = rows.as_ref().map_or(self.next, |r| r[self.next]);
                hadamard_mask(n, row).ok()?
            }
        };
        self.next += 1;
        mask.reshape(self.width, self.height).ok()
    }
}

/// Ensemble for random pure states.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StateEnsemble {
    /// Equal magnitudes `1/sqrt(d)`, independent uniform phases.
    #[default]
    PhaseOnly,
    /// Normalized complex Gaussian amplitudes (unitarily invariant).
    Haar,
}

pub fn random_oam_state<R: Rng + ?Sized>(
    d: usize,
    rng: &mut R,
    ensemble: StateEnsemble,
) -> Result<ComplexState> {
    if d == 0 {
        return Err(Error::invalid("state dimension must be at least 1"));
    }
    match ensemble {
        StateEnsemble::PhaseOnly => {
            let magnitude = 1.0 / (d as f64).sqrt();
            let amplitudes = (0..d)
                .map(|_| Complex64::from_polar(magnitude, rng.gen_range(0.0..TAU)))
                .collect();
            ComplexState::new(amplitudes)
        }
        StateEnsemble::Haar => {
            let amplitudes = (0..d)
                .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
                .collect();
            ComplexState::new(amplitudes)?.normalize()
        }
    }
}

/// Built-in ground-truth images.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ImagePreset {
    /// Alternating blocks; the top-left block is on.
    Checker,
    /// Filled disk of radius `min(w, h) / 3` centred in the frame.
    Disk,
    /// Linear ramp `x + y + 1`.
    Gradient,
    /// Greyscale PGM file.
    File(PathBuf),
}

impl FromStr for ImagePreset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "checker" => Ok(Self::Checker),
            "disk" => Ok(Self::Disk),
            "gradient" => Ok(Self::Gradient),
            _ => match s.strip_prefix("file:") {
                Some(path) if !path.is_empty() => Ok(Self::File(PathBuf::from(path))),
                _ => Err(Error::Config(format!(
                    "unknown image preset `{s}` (expected checker, disk, gradient or file:<path>)"
                ))),
            },
        }
    }
}

impl fmt::Display for ImagePreset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Checker => f.write_str("checker"),
            Self::Disk => f.write_str("disk"),
            Self::Gradient => f.write_str("gradient"),
            Self::File(p) => write!(f, "file:{}", p.display()),
        }
    }
}

/// Render a preset as a nonnegative image with `<O|O> = 1`.
pub fn test_image(preset: &ImagePreset, width: usize, height: usize) -> Result<ImageVector> {
    if width == 0 || height == 0 {
        return Err(Error::invalid("image width and height must be positive"));
    }
    let pixel = |f: &dyn Fn(usize, usize) -> f64| -> Vec<f64> {
        (0..height).flat_map(|y| (0..width).map(move |x| (x, y))).map(|(x, y)| f(x, y)).collect()
    };
    let pixels = match preset {
        ImagePreset::Checker => {
            let cell = (width.min(height) / 8).max(1);
            pixel(&|x, y| if (x / cell + y / cell).is_multiple_of(2) { 1.0 } else { 0.0 })
        }
        ImagePreset::Disk => {
            let (cx, cy) = ((width as f64 - 1.0) / 2.0, (height as f64 - 1.0) / 2.0);
            let r = width.min(height) as f64 / 3.0;
            pixel(&|x, y| {
                let (dx, dy) = (x as f64 - cx, y as f64 - cy);
                if dx * dx + dy * dy <= r * r { 1.0 } else { 0.0 }
            })
        }
        ImagePreset::Gradient => pixel(&|x, y| (x + y + 1) as f64),
        ImagePreset::File(path) => {
            let pgm = pgm::read_pgm(path)?;
            if (pgm.width, pgm.height) != (width, height) {
                return Err(Error::Image(format!(
                    "{} is {}x{}, expected {width}x{height}",
                    path.display(),
                    pgm.width,
                    pgm.height
                )));
            }
            pgm.samples.iter().map(|&s| s as f64 / pgm.max_value as f64).collect()
        }
    };
    ImageVector::new(pixels, width, height)?
        .normalize()
        .map_err(|_| Error::Image(format!("{preset} image is entirely black")))
}
