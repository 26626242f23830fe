//! Convergence metrics, per-run traces and cross-run aggregation.

use serde::{Deserialize, Serialize};

use crate::error::{check_dims, Error, Result};
use crate::linalg::{dot, fidelity, ComplexState, ImageVector, Pixels};

/// One iteration of a run.
///
/// Row `k` describes the estimate after `k` updates; the measurement columns
/// hold the values of the update that produced it (empty at `k = 0`).
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub k: usize,
    pub metric: f64,
    pub f_plus: Option<f64>,
    pub f_minus: Option<f64>,
    pub g_k: Option<f64>,
    pub alpha_k: Option<f64>,
    pub beta_k: Option<f64>,
    pub n_plus: Option<u64>,
    pub n_minus: Option<u64>,
}

impl TraceRow {
    pub fn initial(metric: f64) -> Self {
        Self { metric, ..Self::default() }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RunTrace {
    pub run_id: String,
    pub seed: u64,
    pub variant: String,
    /// Hash of the experiment configuration that produced this trace.
    pub config_hash: String,
    /// Iterations whose step was skipped because both probes saw zero counts.
    pub skipped_iterations: usize,
    rows: Vec<TraceRow>,
}

impl RunTrace {
    pub fn new(variant: impl Into<String>, seed: u64) -> Self {
        Self { variant: variant.into(), seed, ..Self::default() }
    }

    /// Append the next row. Rows must arrive in order `k = 0, 1, 2, ...` with
    /// a finite metric.
    pub fn push(&mut self, row: TraceRow) -> Result<()> {
        if row.k != self.rows.len() {
            return Err(Error::invalid(format!(
                "trace rows out of order: expected k = {}, got {}",
                self.rows.len(),
                row.k
            )));
        }
        if !row.metric.is_finite() {
            return Err(Error::invalid(format!("non-finite metric {} at k = {}", row.metric, row.k)));
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn rows(&self) -> &[TraceRow] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn metrics(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.metric).collect()
    }

    pub fn final_metric(&self) -> Option<f64> {
        self.rows.last().map(|r| r.metric)
    }
}

/// `1 - F(truth, estimate)`.
pub fn infidelity(truth: &ComplexState, estimate: &ComplexState) -> Result<f64> {
    Ok(1.0 - fidelity(truth, estimate)?)
}

/// `1 - <O|sigma/|sigma|>`, the overlap error of a reconstructed image.
///
/// An all-zero estimate carries no information and scores 1.
pub fn image_error(object: &ImageVector, estimate: &ImageVector) -> Result<f64> {
    check_dims(object.len(), estimate.len())?;
    let norm = estimate.norm();
    if norm == 0.0 {
        return Ok(1.0);
    }
    Ok(1.0 - dot(object.pixels(), estimate.pixels()) / norm)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub k: usize,
    pub mean: f64,
    /// Sample standard deviation (`n - 1` denominator; 0 for a single run).
    pub std: f64,
    /// Standard error of the mean, `std / sqrt(n)`.
    pub se: f64,
    pub n: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AggregatedCurve {
    pub variant: String,
    pub config_hash: String,
    pub points: Vec<CurvePoint>,
}

impl AggregatedCurve {
    pub fn means(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.mean).collect()
    }

    pub fn final_point(&self) -> Option<&CurvePoint> {
        self.points.last()
    }
}

/// Per-iteration mean, standard deviation and standard error across runs.
pub fn aggregate(traces: &[RunTrace]) -> Result<AggregatedCurve> {
    let first = traces.first().ok_or_else(|| Error::invalid("cannot aggregate an empty set of traces"))?;
    for t in traces {
        if t.len() != first.len() {
            return Err(Error::invalid(format!(
                "ragged traces: {} has {} rows, {} has {}",
                first.run_id,
                first.len(),
                t.run_id,
                t.len()
            )));
        }
        if t.variant != first.variant {
            return Err(Error::invalid(format!(
                "cannot aggregate variants `{}` and `{}` together",
                first.variant, t.variant
            )));
        }
        if t.config_hash != first.config_hash {
            return Err(Error::invalid(format!(
                "traces come from different configurations ({} vs {})",
                first.config_hash, t.config_hash
            )));
        }
    }
    let n = traces.len();
    let points = (0..first.len())
        .map(|k| {
            let mean = traces.iter().map(|t| t.rows[k].metric).sum::<f64>() / n as f64;
            let std = if n > 1 {
                let ss: f64 = traces.iter().map(|t| (t.rows[k].metric - mean).powi(2)).sum();
                (ss / (n - 1) as f64).sqrt()
            } else {
                0.0
            };
            CurvePoint { k, mean, std, se: std / (n as f64).sqrt(), n }
        })
        .collect();
    Ok(AggregatedCurve { variant: first.variant.clone(), config_hash: first.config_hash.clone(), points })
}

/// First iteration whose mean metric is strictly below `threshold`.
pub fn threshold_crossing(curve: &AggregatedCurve, threshold: f64) -> Option<usize> {
    curve.points.iter().find(|p| p.mean < threshold).map(|p| p.k)
}
