//! Stochastic self-guided reconstruction.
//!
//! This crate implements a family of iterative reconstruction algorithms that
//! share one update shape, `estimate += step * direction`:
//!
//! * single-pixel imaging (SPI) and ghost imaging from linear mask overlaps,
//! * orthogonalised ghost imaging (OGI), the Kaczmarz-corrected SPI update,
//! * self-guided quantum tomography (SGQT), an SPSA gradient walk driven by
//!   measured fidelities,
//! * orthogonalised SGQT (OSGQT), which subtracts the estimate's own response
//!   to the probe states,
//! * self-guided imaging (SGI), SGQT run with a linear distance measure.
//!
//! Measurement oracles simulate noiseless, Gaussian and Poisson (shot-noise)
//! feedback. The [`harness`] module drives seeded Monte-Carlo experiments and
//! writes CSV/JSON results.

pub mod error;
pub mod generators;
pub mod harness;
pub mod linalg;
pub mod measurement;
pub mod metrics;
pub mod reconstruction;
pub mod rng;
pub mod tomography;

pub use error::{Error, Result};
pub use generators::{
    hadamard_mask, random_oam_state, random_perturbation, random_sign_mask, test_image,
    Alphabet, ImagePreset, Mask, MaskKind, MaskSequence, MaskSource, PerturbationDirection, StateEnsemble,
};
pub use linalg::{
    fidelity, inner_product, linear_overlap, normalize, overlap_intensity, ComplexState,
    ImageVector, Normalize, Pixels, DEFAULT_TOL,
};
pub use measurement::{
    fidelity_from_counts, gaussian_overlap_noise, poisson_counts, poisson_quantile, Convention, CountPair,
    ImagingOracle, NoiseModel, PairMeasurement, QuantumOracle, StateOracle,
};
pub use metrics::{
    aggregate, image_error, infidelity, threshold_crossing, AggregatedCurve, CurvePoint, RunTrace,
    TraceRow,
};
pub use reconstruction::{
    ghost_covariance, ghost_estimate, ogi_step, run_spi, spi_step, GhostAccumulator, ImagingMeasurement, SpiVariant,
};
pub use tomography::{
    osgqt_step, probe_states, run_sgi, run_tomography, run_tomography_from, sgi_step, sgqt_step,
    spsa_gradient, InitialEstimate, QuantumVariant, Schedule, StepOutcome, TomographyConfig,
};

pub use num_complex::Complex64;
