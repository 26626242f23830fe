//! Linear-measurement image reconstruction: ghost imaging, iterative SPI and
//! the Kaczmarz-corrected OGI update.

use serde::{Deserialize, Serialize};

use crate::error::{check_dims, Error, Result};
use crate::generators::Mask;
use crate::linalg::{dot, ImageVector, Pixels};
use crate::measurement::ImagingOracle;
use crate::metrics::{image_error, RunTrace, TraceRow};

/// One bucket-detector reading `y_k` for mask `Δ_k`.
#[derive(Clone, Debug, PartialEq)]
pub struct ImagingMeasurement {
    pub mask: Mask,
    pub value: f64,
    pub index: usize,
}

/// Covariance (ghost-imaging) estimate `(1/N) Σ (y_k - ȳ)(Δ_k - Δ̄)`.
pub fn ghost_estimate(measurements: &[ImagingMeasurement]) -> Result<ImageVector> {
    let first = measurements
        .first()
        .ok_or_else(|| Error::invalid("ghost imaging needs at least two measurements"))?;
    for m in measurements {
        if !m.value.is_finite() {
            return Err(Error::invalid(format!("measurement {} is not finite", m.index)));
        }
    }
    let masks: Vec<&Mask> = measurements.iter().map(|m| &m.mask).collect();
    let values: Vec<f64> = measurements.iter().map(|m| m.value).collect();
    ImageVector::new(ghost_covariance(&masks, &values)?, first.mask.width(), first.mask.height())
}

/// [`ghost_estimate`] over arbitrary real patterns.
pub fn ghost_covariance<P: Pixels + ?Sized>(patterns: &[&P], values: &[f64]) -> Result<Vec<f64>> {
    check_dims(patterns.len(), values.len())?;
    if patterns.len() < 2 {
        return Err(Error::invalid("ghost imaging needs at least two measurements"));
    }
    let n_pix = patterns[0].pixels().len();
    let count = patterns.len() as f64;
    let mut mean_pattern = vec![0.0; n_pix];
    for p in patterns {
        check_dims(n_pix, p.pixels().len())?;
        for (acc, v) in mean_pattern.iter_mut().zip(p.pixels()) {
            *acc += v;
        }
    }
    mean_pattern.iter_mut().for_each(|v| *v /= count);
    let mean_y = values.iter().sum::<f64>() / count;

    let mut sigma = vec![0.0; n_pix];
    for (p, y) in patterns.iter().zip(values) {
        let dy = y - mean_y;
        for ((s, v), mu) in sigma.iter_mut().zip(p.pixels()).zip(&mean_pattern) {
            *s += dy * (v - mu);
        }
    }
    sigma.iter_mut().for_each(|v| *v /= count);
    Ok(sigma)
}

/// Running form of [`ghost_estimate`], using `(1/N) Σ y Δ - ȳ Δ̄`.
#[derive(Clone, Debug)]
pub struct GhostAccumulator {
    count: usize,
    sum_y: f64,
    sum_mask: Vec<f64>,
    sum_y_mask: Vec<f64>,
    width: usize,
    height: usize,
}

impl GhostAccumulator {
    pub fn new(width: usize, height: usize) -> Self {
        let n = width * height;
        Self { count: 0, sum_y: 0.0, sum_mask: vec![0.0; n], sum_y_mask: vec![0.0; n], width, height }
    }

    pub fn add(&mut self, y: f64, mask: &Mask) -> Result<()> {
        check_dims(self.sum_mask.len(), mask.len())?;
        self.count += 1;
        self.sum_y += y;
        for ((s, sy), v) in self.sum_mask.iter_mut().zip(&mut self.sum_y_mask).zip(mask.pixels()) {
            *s += v;
            *sy += y * v;
        }
        Ok(())
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn estimate(&self) -> Result<ImageVector> {
        let n = self.count.max(1) as f64;
        let mean_y = self.sum_y / n;
        let pixels = self
            .sum_y_mask
            .iter()
            .zip(&self.sum_mask)
            .map(|(sy, s)| sy / n - mean_y * (s / n))
            .collect();
        ImageVector::new(pixels, self.width, self.height)
    }
}

fn check_value(y: f64) -> Result<()> {
    if y.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("measured overlap must be finite, got {y}")))
    }
}

/// `sigma + y * mask`. The running sum is left unnormalized; divide by the
/// number of measurements (or normalize) only when reporting.
pub fn spi_step<M: Pixels + ?Sized>(sigma: &ImageVector, y: f64, mask: &M) -> Result<ImageVector> {
    check_value(y)?;
    check_dims(sigma.len(), mask.pixels().len())?;
    sigma.add_scaled(y, mask.pixels())
}

/// Kaczmarz-style update that only adds the part of `y` the current estimate
/// does not already explain.
///
/// With `normalized` the residual is divided by `<mask|mask>`, which projects
/// `sigma` exactly onto the hyperplane `<sigma|mask> = y`. Without it the raw
/// residual is used, which overshoots for unnormalized `±1` masks.
pub fn ogi_step<M: Pixels + ?Sized>(
    sigma: &ImageVector,
    y: f64,
    mask: &M,
    normalized: bool,
) -> Result<ImageVector> {
    check_value(y)?;
    check_dims(sigma.len(), mask.pixels().len())?;
    let residual = y - dot(sigma.pixels(), mask.pixels());
    let scale = if normalized {
        let mask_norm = dot(mask.pixels(), mask.pixels());
        if mask_norm == 0.0 {
            return Err(Error::ZeroNorm);
        }
        residual / mask_norm
    } else {
        residual
    };
    sigma.add_scaled(scale, mask.pixels())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpiVariant {
    Spi,
    Ogi { normalized: bool },
    Ghost,
}

/// Run `iterations` linear-measurement updates and trace `image_error` after
/// each one.
///
/// `g_k` records the measured overlap `y_k`; `alpha_k` the factor applied to
/// the residual by OGI.
pub fn run_spi<I>(
    masks: I,
    variant: SpiVariant,
    iterations: usize,
    oracle: &mut ImagingOracle,
) -> Result<RunTrace>
where
    I: IntoIterator<Item = Mask>,
{
    let object = oracle.object().clone();
    let label = match variant {
        SpiVariant::Spi => "spi",
        SpiVariant::Ogi { .. } => "ogi",
        SpiVariant::Ghost => "ghost",
    };
    let mut trace = RunTrace::new(label, 0);
    let mut sigma = ImageVector::zeros(object.width(), object.height())?;
    let mut ghost = GhostAccumulator::new(object.width(), object.height());
    trace.push(TraceRow::initial(image_error(&object, &sigma)?))?;

    let mut masks = masks.into_iter();
    for k in 0..iterations {
        let mask = masks
            .next()
            .ok_or_else(|| Error::invalid(format!("mask sequence exhausted after {k} masks")))?;
        let y = oracle.measure(k, &mask)?;
        let mut row = TraceRow { k: k + 1, g_k: Some(y), ..TraceRow::default() };
        match variant {
            SpiVariant::Spi => {
                sigma = spi_step(&sigma, y, &mask)?;
                row.alpha_k = Some(1.0);
            }
            SpiVariant::Ogi { normalized } => {
                sigma = ogi_step(&sigma, y, &mask, normalized)?;
                row.alpha_k = Some(if normalized { 1.0 / dot(mask.pixels(), mask.pixels()) } else { 1.0 });
            }
            SpiVariant::Ghost => {
                ghost.add(y, &mask)?;
                sigma = ghost.estimate()?;
            }
        }
        row.metric = image_error(&object, &sigma)?;
        trace.push(row)?;
    }
    Ok(trace)
}
