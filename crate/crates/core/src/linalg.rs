//! Vector types and the handful of overlap primitives every algorithm shares.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{check_dims, Error, Result};

/// Default absolute tolerance for scalar comparisons.
pub const DEFAULT_TOL: f64 = 1e-12;

/// A pure state of a `d`-level system, stored as complex amplitudes in the
/// OAM basis `|l>`.
///
/// The amplitudes are not required to be normalized; the self-guided updates
/// produce unnormalized vectors and [`fidelity`] divides by both norms.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexState {
    amplitudes: Vec<Complex64>,
}

impl ComplexState {
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::invalid("state dimension must be at least 1"));
        }
        Ok(Self { amplitudes })
    }

    /// Computational basis state `|index>` of dimension `dim`.
    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        if index >= dim {
            return Err(Error::invalid(format!("basis index {index} out of range for dimension {dim}")));
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); dim];
        amplitudes[index] = Complex64::new(1.0, 0.0);
        Self::new(amplitudes)
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }

    /// OAM indices of the basis modes, centred on zero: `-(d-1)/2 ..= (d-1)/2`
    /// for odd `d`. For even `d` the extra mode sits on the negative side.
    pub fn basis_labels(&self) -> Vec<i64> {
        let d = self.dim() as i64;
        let lowest = -(d / 2);
        (0..d).map(|i| lowest + i).collect()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self { amplitudes: self.amplitudes.iter().map(|c| c * factor).collect() }
    }

    /// `self + factor * direction`.
    pub fn add_scaled(&self, factor: Complex64, direction: &[Complex64]) -> Result<Self> {
        check_dims(self.dim(), direction.len())?;
        let amplitudes = self
            .amplitudes
            .iter()
            .zip(direction)
            .map(|(s, d)| s + factor * d)
            .collect();
        Ok(Self { amplitudes })
    }
}

/// A real-valued image stored row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ImageVector {
    pixels: Vec<f64>,
    width: usize,
    height: usize,
}

impl ImageVector {
    pub fn new(pixels: Vec<f64>, width: usize, height: usize) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::invalid("image width and height must be positive"));
        }
        check_dims(width * height, pixels.len())?;
        Ok(Self { pixels, width, height })
    }

    pub fn zeros(width: usize, height: usize) -> Result<Self> {
        Self::new(vec![0.0; width * height], width, height)
    }

    /// A `n x 1` image, for callers that do not care about the 2-D shape.
    pub fn from_vec(pixels: Vec<f64>) -> Result<Self> {
        let n = pixels.len();
        Self::new(pixels, n, 1)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn len(&self) -> usize {
        self.pixels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }

    pub fn pixels_mut(&mut self) -> &mut [f64] {
        &mut self.pixels
    }

    pub fn into_pixels(self) -> Vec<f64> {
        self.pixels
    }

    pub fn norm(&self) -> f64 {
        dot(&self.pixels, &self.pixels).sqrt()
    }

    pub fn is_zero(&self) -> bool {
        self.pixels.iter().all(|&p| p == 0.0)
    }

    /// `self + factor * direction`.
    pub fn add_scaled<P: Pixels + ?Sized>(&self, factor: f64, direction: &P) -> Result<Self> {
        let direction = direction.pixels();
        check_dims(self.len(), direction.len())?;
        let pixels = self.pixels.iter().zip(direction).map(|(s, d)| s + factor * d).collect();
        Ok(Self { pixels, width: self.width, height: self.height })
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self {
            pixels: self.pixels.iter().map(|p| p * factor).collect(),
            width: self.width,
            height: self.height,
        }
    }
}

/// Anything that exposes a flat slice of real pixel values.
pub trait Pixels {
    fn pixels(&self) -> &[f64];
}

impl Pixels for ImageVector {
    fn pixels(&self) -> &[f64] {
        &self.pixels
    }
}

impl Pixels for [f64] {
    fn pixels(&self) -> &[f64] {
        self
    }
}

impl Pixels for Vec<f64> {
    fn pixels(&self) -> &[f64] {
        self
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn cdot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// `<a|b> = sum_i conj(a_i) b_i`.
pub fn inner_product(a: &ComplexState, b: &ComplexState) -> Result<Complex64> {
    check_dims(a.dim(), b.dim())?;
    Ok(cdot(&a.amplitudes, &b.amplitudes))
}

/// Unnormalized projection strength `|<a|b>|^2`.
///
/// For a unit-norm `a` this is the expected coincidence rate, relative to the
/// rate at `b = a`, when projecting onto the (possibly unnormalized) mode `b`.
pub fn overlap_intensity(a: &ComplexState, b: &ComplexState) -> Result<f64> {
    Ok(inner_product(a, b)?.norm_sqr())
}

/// Pure-state fidelity `|<a|b>|^2 / (<a|a><b|b>)`, always in `[0, 1]`.
pub fn fidelity(a: &ComplexState, b: &ComplexState) -> Result<f64> {
    check_dims(a.dim(), b.dim())?;
    let na = a.norm_sqr();
    let nb = b.norm_sqr();
    if na == 0.0 || nb == 0.0 {
        return Err(Error::ZeroNorm);
    }
    let f = cdot(&a.amplitudes, &b.amplitudes).norm_sqr() / (na * nb);
    Ok(f.clamp(0.0, 1.0))
}

/// Real overlap `<o|m> = sum_i o_i m_i`.
pub fn linear_overlap<A, B>(o: &A, m: &B) -> Result<f64>
where
    A: Pixels + ?Sized,
    B: Pixels + ?Sized,
{
    let (o, m) = (o.pixels(), m.pixels());
    check_dims(o.len(), m.len())?;
    Ok(dot(o, m))
}

/// Rescale to unit Euclidean norm.
pub trait Normalize: Sized {
    fn normalize(&self) -> Result<Self>;
}

impl Normalize for ComplexState {
    fn normalize(&self) -> Result<Self> {
        let norm = self.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::ZeroNorm);
        }
        Ok(Self { amplitudes: self.amplitudes.iter().map(|c| c / norm).collect() })
    }
}

impl Normalize for ImageVector {
    fn normalize(&self) -> Result<Self> {
        let norm = self.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::ZeroNorm);
        }
        Ok(self.scale(1.0 / norm))
    }
}

pub fn normalize<T: Normalize>(v: &T) -> Result<T> {
    v.normalize()
}
