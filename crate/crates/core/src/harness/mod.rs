//! Seeded Monte-Carlo experiments.
//!
//! An experiment runs every arm (variant × noise level) for `runs`
//! independent runs. Run `r` uses the seed `derive_seed(config.seed, r)` for
//! all arms, so arms see the same truth, initial estimate, directions and
//! noise draws and can be compared run by run. Runs execute on a rayon pool;
//! each owns its generators, and results are collected in run order, so the
//! thread count never changes the output.

mod config;
mod output;
pub mod presets;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generators::{random_oam_state, test_image, MaskSequence};
use crate::linalg::ImageVector;
use crate::measurement::{ImagingOracle, NoiseModel};
use crate::metrics::{aggregate, threshold_crossing, AggregatedCurve, RunTrace};
use crate::reconstruction::{run_spi, SpiVariant};
use crate::rng::{self, derive_seed, Stream};
use crate::tomography::{run_sgi, run_tomography, Schedule, TomographyConfig};

pub use config::{Algorithm, Check, ExperimentConfig, ExperimentKind, SweepGrid};
pub use output::{write_experiment, write_sweep, CSV_HEADER};

/// Everything produced by one arm.
#[derive(Clone, Debug)]
pub struct ArmResult {
    pub label: String,
    pub variant: Algorithm,
    pub noise: NoiseModel,
    /// One trace per run, in run order.
    pub traces: Vec<RunTrace>,
    pub curve: AggregatedCurve,
}

impl ArmResult {
    pub fn final_mean(&self) -> f64 {
        self.curve.final_point().map_or(f64::NAN, |p| p.mean)
    }

    pub fn skipped_iterations(&self) -> usize {
        self.traces.iter().map(|t| t.skipped_iterations).sum()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub check: String,
    pub description: String,
    /// The quantity compared against the bound, when there is one.
    pub value: Option<f64>,
    pub passed: bool,
}

#[derive(Clone, Debug)]
pub struct ExperimentResult {
    pub config: ExperimentConfig,
    pub config_hash: String,
    pub seeds: Vec<u64>,
    pub arms: Vec<ArmResult>,
    pub checks: Vec<CheckOutcome>,
}

impl ExperimentResult {
    pub fn arm(&self, label: &str) -> Option<&ArmResult> {
        self.arms.iter().find(|a| a.label == label)
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Build a worker pool; `jobs = 0` lets rayon pick the thread count.
pub fn thread_pool(jobs: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::invalid(format!("cannot start worker pool: {e}")))
}

/// Run every arm of `config` in memory on `jobs` worker threads.
pub fn run_experiment(config: &ExperimentConfig, jobs: usize) -> Result<ExperimentResult> {
    run_in_pool(config, &thread_pool(jobs)?)
}

fn run_in_pool(config: &ExperimentConfig, pool: &rayon::ThreadPool) -> Result<ExperimentResult> {
    config.validate()?;
    let hash = config.hash();
    let arms = config.arms();
    let seeds: Vec<u64> = (0..config.runs as u64).map(|r| derive_seed(config.seed, r)).collect();
    let object = match config.kind() {
        ExperimentKind::Imaging => Some(test_image(&config.image_preset()?, config.width, config.height)?),
        ExperimentKind::Tomography => None,
    };

    let per_run: Vec<Vec<RunTrace>> = pool.install(|| {
        seeds
            .par_iter()
            .enumerate()
            .map(|(r, &seed)| run_single(config, &arms, object.as_ref(), r, seed, &hash))
            .collect::<Result<Vec<_>>>()
    })?;

    let mut by_arm: Vec<Vec<RunTrace>> = vec![Vec::with_capacity(config.runs); arms.len()];
    for traces in per_run {
        for (slot, trace) in by_arm.iter_mut().zip(traces) {
            slot.push(trace);
        }
    }
    let arms = arms
        .into_iter()
        .zip(by_arm)
        .map(|((label, variant, noise), traces)| {
            let curve = aggregate(&traces)?;
            Ok(ArmResult { label, variant, noise, traces, curve })
        })
        .collect::<Result<Vec<_>>>()?;

    let checks = config
        .assertions
        .iter()
        .filter(|c| !c.is_sweep_check())
        .map(|c| evaluate(c, &arms))
        .collect();
    Ok(ExperimentResult { config: config.clone(), config_hash: hash, seeds, arms, checks })
}

fn run_single(
    config: &ExperimentConfig,
    arms: &[(String, Algorithm, NoiseModel)],
    object: Option<&ImageVector>,
    r: usize,
    seed: u64,
    hash: &str,
) -> Result<Vec<RunTrace>> {
    let truth = match config.kind() {
        ExperimentKind::Tomography => {
            Some(random_oam_state(config.dimension, &mut rng::stream(seed, Stream::Truth), config.ensemble)?)
        }
        ExperimentKind::Imaging => None,
    };
    arms.iter()
        .map(|(label, variant, noise)| {
            let mut trace = match (variant.quantum_variant(), &truth, object) {
                (Some(quantum), Some(truth), _) => {
                    let tc = TomographyConfig {
                        dimension: config.dimension,
                        iterations: config.iterations,
                        variant: quantum,
                        schedule: config.schedule,
                        noise: *noise,
                        convention: config.convention,
                        ensemble: config.ensemble,
                        initial: config.initial,
                        seed,
                    };
                    run_tomography(&tc, truth)?
                }
                (None, _, Some(object)) => {
                    let masks = MaskSequence::new(config.masks, config.width, config.height, seed)?;
                    let mut oracle = ImagingOracle::new(object.clone(), *noise, seed)?;
                    let spi = match variant {
                        Algorithm::Spi => Some(SpiVariant::Spi),
                        Algorithm::Ogi => Some(SpiVariant::Ogi { normalized: config.ogi_normalized }),
                        Algorithm::Ghost => Some(SpiVariant::Ghost),
                        _ => None,
                    };
                    match spi {
                        Some(spi) => run_spi(masks, spi, config.iterations, &mut oracle)?,
                        None => run_sgi(masks, &config.schedule, config.iterations, &mut oracle)?,
                    }
                }
                _ => unreachable!("validated configs never mix experiment kinds"),
            };
            trace.run_id = format!("{label}-r{r:04}-{hash}");
            trace.seed = seed;
            trace.variant = label.clone();
            trace.config_hash = hash.to_string();
            Ok(trace)
        })
        .collect()
}

fn evaluate(check: &Check, arms: &[ArmResult]) -> CheckOutcome {
    let arm = |label: &str| arms.iter().find(|a| a.label == label).expect("validated arm label");
    let outcome = |description: String, value: Option<f64>, passed: bool| CheckOutcome {
        check: check.name().to_string(),
        description,
        value,
        passed,
    };
    match check {
        Check::MaxAbsDifference { a, b, below } => {
            let worst = arm(a)
                .traces
                .iter()
                .zip(&arm(b).traces)
                .flat_map(|(ta, tb)| ta.rows().iter().zip(tb.rows()).map(|(x, y)| (x.metric - y.metric).abs()))
                .fold(0.0, f64::max);
            outcome(format!("max |{a} - {b}| < {below}"), Some(worst), worst < *below)
        }
        Check::MaxMetricBelow { arm: name, value } => {
            let worst = arm(name).traces.iter().flat_map(|t| t.metrics()).fold(f64::NEG_INFINITY, f64::max);
            outcome(format!("max {name} metric < {value}"), Some(worst), worst < *value)
        }
        Check::FinalMeanBelow { arm: name, value } => {
            let m = arm(name).final_mean();
            outcome(format!("final mean {name} < {value}"), Some(m), m < *value)
        }
        Check::FinalMeanWithin { arm: name, min, max } => {
            let m = arm(name).final_mean();
            outcome(format!("final mean {name} in [{min}, {max}]"), Some(m), *min <= m && m <= *max)
        }
        Check::FinalMeanOrder { lower, higher, strict } => {
            let (l, h) = (arm(lower).final_mean(), arm(higher).final_mean());
            let op = if *strict { "<" } else { "<=" };
            let passed = if *strict { l < h } else { l <= h };
            outcome(format!("final mean {lower} {op} final mean {higher}"), Some(l - h), passed)
        }
        Check::MeanOrder { lower, higher, from_k } => {
            let gap = arm(lower)
                .curve
                .points
                .iter()
                .zip(&arm(higher).curve.points)
                .filter(|(p, _)| p.k >= *from_k)
                .map(|(l, h)| l.mean - h.mean)
                .fold(f64::NEG_INFINITY, f64::max);
            outcome(format!("mean {lower} < mean {higher} for k >= {from_k}"), Some(gap), gap < 0.0)
        }
        Check::CrossingOrder { first, second, threshold } => {
            let a = threshold_crossing(&arm(first).curve, *threshold);
            let b = threshold_crossing(&arm(second).curve, *threshold);
            let passed = match (a, b) {
                (Some(a), Some(b)) => a < b,
                (Some(_), None) => true,
                (None, _) => false,
            };
            outcome(
                format!("{first} crosses {threshold} before {second} ({a:?} vs {b:?})"),
                a.map(|k| k as f64),
                passed,
            )
        }
        Check::BestOrder { lower, higher } => {
            outcome(format!("best {lower} <= best {higher} (sweep only)"), None, true)
        }
    }
}

/// One `(alpha, beta)` cell of a sweep for one arm.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub alpha: f64,
    pub beta: f64,
    pub arm: String,
    pub final_mean: f64,
    pub final_std: f64,
    pub final_se: f64,
    pub n: usize,
}

#[derive(Clone, Debug)]
pub struct SweepResult {
    pub config: ExperimentConfig,
    pub config_hash: String,
    /// Alphas outermost, then betas, then arms.
    pub cells: Vec<SweepCell>,
    /// The cell with the lowest final mean for each arm, in arm order.
    pub best: Vec<SweepCell>,
    pub checks: Vec<CheckOutcome>,
}

impl SweepResult {
    pub fn best_for(&self, arm: &str) -> Option<&SweepCell> {
        self.best.iter().find(|c| c.arm == arm)
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Run `config` with a constant schedule at every `(alpha, beta)` pair.
pub fn grid_sweep(config: &ExperimentConfig, alphas: &[f64], betas: &[f64], jobs: usize) -> Result<SweepResult> {
    if alphas.is_empty() || betas.is_empty() {
        return Err(Error::Config("sweep grids must not be empty".into()));
    }
    let mut base = config.clone();
    base.sweep = Some(SweepGrid { alphas: alphas.to_vec(), betas: betas.to_vec() });
    base.validate()?;
    let pool = thread_pool(jobs)?;

    let mut cells = Vec::new();
    for &alpha in alphas {
        for &beta in betas {
            let mut cell = base.clone();
            cell.schedule = Schedule::constant(alpha, beta);
            cell.sweep = None;
            cell.assertions.clear();
            let result = run_in_pool(&cell, &pool)?;
            for arm in &result.arms {
                let p = arm.curve.final_point().expect("at least one row");
                cells.push(SweepCell {
                    alpha,
                    beta,
                    arm: arm.label.clone(),
                    final_mean: p.mean,
                    final_std: p.std,
                    final_se: p.se,
                    n: p.n,
                });
            }
        }
    }

    let best: Vec<SweepCell> = base
        .arms()
        .into_iter()
        .filter_map(|(label, _, _)| {
            cells
                .iter()
                .filter(|c| c.arm == label)
                .min_by(|a, b| a.final_mean.total_cmp(&b.final_mean))
                .cloned()
        })
        .collect();

    let checks = base
        .assertions
        .iter()
        .filter_map(|c| match c {
            Check::BestOrder { lower, higher } => {
                let find = |l: &str| best.iter().find(|b| b.arm == l).map_or(f64::NAN, |b| b.final_mean);
                let (l, h) = (find(lower), find(higher));
                Some(CheckOutcome {
                    check: c.name().to_string(),
                    description: format!("best {lower} <= best {higher}"),
                    value: Some(l - h),
                    passed: l <= h,
                })
            }
            _ => None,
        })
        .collect();

    Ok(SweepResult { config_hash: base.hash(), config: base, cells, best, checks })
}
