//! SPSA-driven self-guided estimation: SGQT, its orthogonalised form OSGQT,
//! and SGI (the same walk with a linear distance measure on images).
//!
//! Each iteration draws a random direction `Δ_k`, measures the two probes
//! `sigma_k ± beta_k Δ_k`, and moves the estimate along `Δ_k` by
//! `alpha_k * g_k`, where `g_k = (f+ - f-) / (2 beta_k)`. OSGQT subtracts from
//! `f+ - f-` the same difference computed numerically against the current
//! estimate itself, which costs no extra measurements.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{check_dims, Error, Result};
use crate::generators::{random_oam_state, random_perturbation, Mask, PerturbationDirection, StateEnsemble};
use crate::linalg::{ComplexState, ImageVector, Normalize};
use crate::measurement::{Convention, CountPair, ImagingOracle, NoiseModel, QuantumOracle, StateOracle};
use crate::metrics::{image_error, infidelity, RunTrace, TraceRow};
use crate::rng::{self, Stream};

fn default_s() -> f64 {
    0.602
}

fn default_t() -> f64 {
    0.101
}

/// Gain sequences `(alpha_k, beta_k)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Schedule {
    Constant {
        alpha: f64,
        beta: f64,
    },
    /// `alpha_k = a / (k + 1 + big_a)^s`, `beta_k = b / (k + 1)^t`.
    PowerLaw {
        a: f64,
        #[serde(default)]
        big_a: f64,
        #[serde(default = "default_s")]
        s: f64,
        b: f64,
        #[serde(default = "default_t")]
        t: f64,
    },
}

impl Schedule {
    pub fn constant(alpha: f64, beta: f64) -> Self {
        Schedule::Constant { alpha, beta }
    }

    pub fn power_law(a: f64, b: f64) -> Self {
        Schedule::PowerLaw { a, big_a: 0.0, s: default_s(), b, t: default_t() }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::invalid(format!("schedule {name} must be > 0, got {v}")))
            }
        };
        match *self {
            Schedule::Constant { alpha, beta } => {
                positive("alpha", alpha)?;
                positive("beta", beta)
            }
            Schedule::PowerLaw { a, big_a, s, b, t } => {
                positive("a", a)?;
                positive("b", b)?;
                positive("s", s)?;
                positive("t", t)?;
                if big_a >= 0.0 && big_a.is_finite() {
                    Ok(())
                } else {
                    Err(Error::invalid(format!("schedule big_a must be >= 0, got {big_a}")))
                }
            }
        }
    }

    /// `(alpha_k, beta_k)` for iteration `k = 0, 1, ...`.
    pub fn gains(&self, k: usize) -> (f64, f64) {
        match *self {
            Schedule::Constant { alpha, beta } => (alpha, beta),
            Schedule::PowerLaw { a, big_a, s, b, t } => {
                let k1 = k as f64 + 1.0;
                (a / (k1 + big_a).powf(s), b / k1.powf(t))
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QuantumVariant {
    Sgqt,
    Osgqt,
}

impl QuantumVariant {
    pub fn name(self) -> &'static str {
        match self {
            QuantumVariant::Sgqt => "sgqt",
            QuantumVariant::Osgqt => "osgqt",
        }
    }
}

/// Where a quantum run starts.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitialEstimate {
    /// A random state from the run's initial-estimate stream.
    #[default]
    Random,
    /// The unknown state itself.
    Truth,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TomographyConfig {
    pub dimension: usize,
    pub iterations: usize,
    pub variant: QuantumVariant,
    pub schedule: Schedule,
    pub noise: NoiseModel,
    pub convention: Convention,
    pub ensemble: StateEnsemble,
    pub initial: InitialEstimate,
    pub seed: u64,
}

impl TomographyConfig {
    /// d = 5, 350 iterations, constant `alpha = 0.05`, `beta = 0.2`, noiseless.
    pub fn new(variant: QuantumVariant, seed: u64) -> Self {
        Self {
            dimension: 5,
            iterations: 350,
            variant,
            schedule: Schedule::constant(0.05, 0.2),
            noise: NoiseModel::None,
            convention: Convention::default(),
            ensemble: StateEnsemble::PhaseOnly,
            initial: InitialEstimate::Random,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dimension < 2 {
            return Err(Error::invalid(format!("dimension must be >= 2, got {}", self.dimension)));
        }
        self.schedule.validate()?;
        self.noise.validate()
    }
}

/// Result of one self-guided update.
#[derive(Clone, Debug, PartialEq)]
pub struct StepOutcome<T> {
    pub next: T,
    pub f_plus: f64,
    pub f_minus: f64,
    /// The gradient estimate the update was scaled by (corrected for OSGQT).
    pub gradient: f64,
    pub counts: Option<CountPair>,
}

/// `(f+ - f-) / (2 beta)`.
pub fn spsa_gradient(f_plus: f64, f_minus: f64, beta: f64) -> Result<f64> {
    if beta.is_nan() || beta <= 0.0 {
        return Err(Error::invalid(format!("beta must be > 0, got {beta}")));
    }
    Ok((f_plus - f_minus) / (2.0 * beta))
}

/// The unnormalized probes `sigma ± beta Δ`.
pub fn probe_states(
    sigma: &ComplexState,
    delta: &PerturbationDirection,
    beta: f64,
) -> Result<(ComplexState, ComplexState)> {
    if beta.is_nan() || beta <= 0.0 {
        return Err(Error::invalid(format!("beta must be > 0, got {beta}")));
    }
    check_dims(sigma.dim(), delta.dim())?;
    let plus = sigma.add_scaled(Complex64::new(beta, 0.0), delta.entries())?;
    let minus = sigma.add_scaled(Complex64::new(-beta, 0.0), delta.entries())?;
    Ok((plus, minus))
}

fn advance(
    sigma: &ComplexState,
    delta: &PerturbationDirection,
    step: f64,
    convention: Convention,
) -> Result<ComplexState> {
    let next = sigma.add_scaled(Complex64::new(step, 0.0), delta.entries())?;
    if convention.renormalizes_estimate() {
        next.normalize()
    } else {
        Ok(next)
    }
}

/// One SGQT iteration. Uses exactly two oracle evaluations.
pub fn sgqt_step(
    sigma: &ComplexState,
    delta: &PerturbationDirection,
    alpha: f64,
    beta: f64,
    k: usize,
    oracle: &mut dyn StateOracle,
    convention: Convention,
) -> Result<StepOutcome<ComplexState>> {
    let (plus, minus) = probe_states(sigma, delta, beta)?;
    let m = oracle.measure_pair(k, &plus, &minus)?;
    let gradient = spsa_gradient(m.f_plus, m.f_minus, beta)?;
    Ok(StepOutcome {
        next: advance(sigma, delta, alpha * gradient, convention)?,
        f_plus: m.f_plus,
        f_minus: m.f_minus,
        gradient,
        counts: m.counts,
    })
}

/// One OSGQT iteration.
///
/// The measured difference `f(psi, sigma+) - f(psi, sigma-)` is corrected by
/// `f(sigma, sigma+) - f(sigma, sigma-)`, evaluated numerically with the same
/// estimator the oracle uses, so the truth is an exact fixed point. Uses
/// exactly two oracle evaluations.
pub fn osgqt_step(
    sigma: &ComplexState,
    delta: &PerturbationDirection,
    alpha: f64,
    beta: f64,
    k: usize,
    oracle: &mut dyn StateOracle,
    convention: Convention,
) -> Result<StepOutcome<ComplexState>> {
    let (plus, minus) = probe_states(sigma, delta, beta)?;
    let m = oracle.measure_pair(k, &plus, &minus)?;
    let (c_plus, c_minus) = convention.estimate_pair(sigma, &plus, &minus)?;
    let gradient = spsa_gradient(m.f_plus - m.f_minus, c_plus - c_minus, beta)?;
    Ok(StepOutcome {
        next: advance(sigma, delta, alpha * gradient, convention)?,
        f_plus: m.f_plus,
        f_minus: m.f_minus,
        gradient,
        counts: m.counts,
    })
}

/// One SGI iteration: SGQT with the linear overlap as distance measure.
/// Images are never normalized.
pub fn sgi_step(
    sigma: &ImageVector,
    mask: &Mask,
    alpha: f64,
    beta: f64,
    k: usize,
    oracle: &mut ImagingOracle,
) -> Result<StepOutcome<ImageVector>> {
    let (f_plus, f_minus) = oracle.measure_pair(k, sigma, mask, beta)?;
    let gradient = spsa_gradient(f_plus, f_minus, beta)?;
    Ok(StepOutcome { next: sigma.add_scaled(alpha * gradient, mask)?, f_plus, f_minus, gradient, counts: None })
}

/// Run a quantum self-guided estimation against `truth` with a simulated
/// oracle built from the config.
///
/// The initial estimate, the perturbation directions and the measurement
/// noise each come from their own stream of `config.seed`.
pub fn run_tomography(config: &TomographyConfig, truth: &ComplexState) -> Result<RunTrace> {
    config.validate()?;
    check_dims(config.dimension, truth.dim())?;
    let initial = match config.initial {
        InitialEstimate::Random => {
            random_oam_state(config.dimension, &mut rng::stream(config.seed, Stream::Initial), config.ensemble)?
        }
        InitialEstimate::Truth => truth.clone(),
    };
    let mut oracle = QuantumOracle::new(truth.clone(), config.noise, config.convention, config.seed)?;
    run_tomography_from(config, truth, initial, &mut oracle)
}

/// [`run_tomography`] with an explicit starting estimate and oracle.
///
/// Iterations where the oracle reports [`Error::NoDetections`] leave the
/// estimate unchanged and are counted in `RunTrace::skipped_iterations`.
pub fn run_tomography_from(
    config: &TomographyConfig,
    truth: &ComplexState,
    initial: ComplexState,
    oracle: &mut dyn StateOracle,
) -> Result<RunTrace> {
    config.validate()?;
    check_dims(config.dimension, truth.dim())?;
    check_dims(config.dimension, initial.dim())?;
    let mut trace = RunTrace::new(config.variant.name(), config.seed);
    let mut directions = rng::stream(config.seed, Stream::Directions);
    let mut sigma = initial;
    trace.push(TraceRow::initial(infidelity(truth, &sigma)?))?;

    for k in 0..config.iterations {
        let (alpha, beta) = config.schedule.gains(k);
        let delta = random_perturbation(config.dimension, &mut directions)?;
        let step = match config.variant {
            QuantumVariant::Sgqt => sgqt_step(&sigma, &delta, alpha, beta, k, oracle, config.convention),
            QuantumVariant::Osgqt => osgqt_step(&sigma, &delta, alpha, beta, k, oracle, config.convention),
        };
        let mut row = TraceRow { k: k + 1, alpha_k: Some(alpha), beta_k: Some(beta), ..TraceRow::default() };
        match step {
            Ok(out) => {
                sigma = out.next;
                row.f_plus = Some(out.f_plus);
                row.f_minus = Some(out.f_minus);
                row.g_k = Some(out.gradient);
                row.n_plus = out.counts.map(|c| c.n_plus);
                row.n_minus = out.counts.map(|c| c.n_minus);
            }
            Err(Error::NoDetections) => {
                trace.skipped_iterations += 1;
                row.n_plus = Some(0);
                row.n_minus = Some(0);
            }
            Err(e) => return Err(e),
        }
        row.metric = infidelity(truth, &sigma)?;
        trace.push(row)?;
    }
    Ok(trace)
}

/// Self-guided imaging from a zero initial image, tracing `image_error`.
pub fn run_sgi<I>(masks: I, schedule: &Schedule, iterations: usize, oracle: &mut ImagingOracle) -> Result<RunTrace>
where
    I: IntoIterator<Item = Mask>,
{
    schedule.validate()?;
    let object = oracle.object().clone();
    let mut trace = RunTrace::new("sgi", 0);
    let mut sigma = ImageVector::zeros(object.width(), object.height())?;
    trace.push(TraceRow::initial(image_error(&object, &sigma)?))?;

    let mut masks = masks.into_iter();
    for k in 0..iterations {
        let mask = masks
            .next()
            .ok_or_else(|| Error::invalid(format!("mask sequence exhausted after {k} masks")))?;
        let (alpha, beta) = schedule.gains(k);
        let out = sgi_step(&sigma, &mask, alpha, beta, k, oracle)?;
        sigma = out.next;
        trace.push(TraceRow {
            k: k + 1,
            metric: image_error(&object, &sigma)?,
            f_plus: Some(out.f_plus),
            f_minus: Some(out.f_minus),
            g_k: Some(out.gradient),
            alpha_k: Some(alpha),
            beta_k: Some(beta),
            ..TraceRow::default()
        })?;
    }
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{hadamard_mask, test_image, Alphabet, ImagePreset, MaskSequence};
    use crate::linalg::{linear_overlap, Pixels};
    use crate::measurement::PairMeasurement;
    use crate::reconstruction::spi_step;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// An oracle that always reports the same pair and counts calls.
    struct Fixed(f64, f64, usize);

    impl StateOracle for Fixed {
        fn measure_pair(&mut self, _: usize, _: &ComplexState, _: &ComplexState) -> Result<PairMeasurement> {
            self.2 += 2;
            Ok(PairMeasurement { f_plus: self.0, f_minus: self.1, counts: None })
        }

        fn evaluations(&self) -> usize {
            self.2
        }
    }

    fn random_setup(d: usize, seed: u64) -> (ComplexState, ComplexState, PerturbationDirection) {
        let mut r = rng::stream(seed, Stream::Truth);
        let psi = random_oam_state(d, &mut r, StateEnsemble::PhaseOnly).unwrap();
        let sigma = random_oam_state(d, &mut r, StateEnsemble::PhaseOnly).unwrap();
        let delta = random_perturbation(d, &mut r).unwrap();
        (psi, sigma, delta)
    }

    #[test]
    fn spsa_gradient_examples() {
        assert_eq!(spsa_gradient(0.3, 0.3, 0.2).unwrap(), 0.0);
        assert_abs_diff_eq!(spsa_gradient(0.6, 0.4, 0.2).unwrap(), 0.5, epsilon = 1e-15);
        assert_eq!(spsa_gradient(0.4, 0.6, 0.2).unwrap(), -spsa_gradient(0.6, 0.4, 0.2).unwrap());
        assert!(spsa_gradient(0.6, 0.4, 0.0).is_err());
        assert!(spsa_gradient(0.6, 0.4, -1.0).is_err());
    }

    #[test]
    fn probe_states_examples() {
        let sigma = ComplexState::basis(2, 0).unwrap();
        let delta = PerturbationDirection::new(vec![c(1.0, 0.0), c(1.0, 0.0)], Alphabet::Quantum).unwrap();
        let (plus, minus) = probe_states(&sigma, &delta, 0.2).unwrap();
        assert_eq!(plus.amplitudes(), &[c(1.2, 0.0), c(0.2, 0.0)]);
        assert_eq!(minus.amplitudes(), &[c(0.8, 0.0), c(-0.2, 0.0)]);

        let (p, m) = probe_states(&sigma, &delta, 1e-12).unwrap();
        assert_abs_diff_eq!(crate::linalg::fidelity(&p, &m).unwrap(), 1.0, epsilon = 1e-12);
        assert!(probe_states(&ComplexState::basis(3, 0).unwrap(), &delta, 0.2).is_err());
        assert!(probe_states(&sigma, &delta, 0.0).is_err());
    }

    #[test]
    fn schedules() {
        let constant = Schedule::constant(0.05, 0.2);
        assert_eq!(constant.gains(0), constant.gains(1000));
        let decay = Schedule::power_law(0.1, 0.3);
        let (a0, b0) = decay.gains(0);
        assert_abs_diff_eq!(a0, 0.1, epsilon = 1e-15);
        assert_abs_diff_eq!(b0, 0.3, epsilon = 1e-15);
        let (a9, b9) = decay.gains(9);
        assert_abs_diff_eq!(a9, 0.1 / 10f64.powf(0.602), epsilon = 1e-15);
        assert_abs_diff_eq!(b9, 0.3 / 10f64.powf(0.101), epsilon = 1e-15);
        assert!((0..10_000).all(|k| {
            let (a, b) = decay.gains(k);
            a > 0.0 && b > 0.0
        }));
        assert!(Schedule::constant(0.0, 0.2).validate().is_err());
        assert!(Schedule::PowerLaw { a: 1.0, big_a: -1.0, s: 0.6, b: 1.0, t: 0.1 }.validate().is_err());
    }

    #[test]
    fn equal_measurements_leave_sgqt_estimate_unchanged() {
        let (_, sigma, delta) = random_setup(5, 1);
        for convention in [Convention::CountRatio, Convention::NormalizedFidelity] {
            let mut oracle = Fixed(0.4, 0.4, 0);
            let out = sgqt_step(&sigma, &delta, 0.05, 0.2, 0, &mut oracle, convention).unwrap();
            assert_eq!(out.gradient, 0.0);
            for (a, b) in out.next.amplitudes().iter().zip(sigma.amplitudes()) {
                assert!((a - b).norm() < 1e-15);
            }
            assert_eq!(oracle.evaluations(), 2);
        }
    }

    #[test]
    fn sgqt_jitters_at_the_truth() {
        let (psi, _, _) = random_setup(5, 2);
        let mut r = rng::stream(2, Stream::Directions);
        let mut moved = 0;
        for _ in 0..20 {
            let delta = random_perturbation(5, &mut r).unwrap();
            for convention in [Convention::CountRatio, Convention::NormalizedFidelity] {
                let mut oracle = QuantumOracle::noiseless(psi.clone(), convention);
                let out = sgqt_step(&psi, &delta, 0.05, 0.2, 0, &mut oracle, convention).unwrap();
                if out.gradient.abs() > 1e-6 {
                    moved += 1;
                }
            }
        }
        assert!(moved > 30, "only {moved} of 40 steps moved");
    }

    /// Straight-line evaluation of the SGQT and OSGQT updates.
    fn reference_update(
        psi: &[Complex64],
        sigma: &[Complex64],
        delta: &[Complex64],
        alpha: f64,
        beta: f64,
        orthogonalised: bool,
        convention: Convention,
    ) -> Vec<Complex64> {
        let ip = |a: &[Complex64], b: &[Complex64]| -> Complex64 {
            let mut acc = c(0.0, 0.0);
            for i in 0..a.len() {
                acc += a[i].conj() * b[i];
            }
            acc
        };
        let norm2 = |a: &[Complex64]| ip(a, a).re;
        let plus: Vec<Complex64> = (0..sigma.len()).map(|i| sigma[i] + delta[i] * beta).collect();
        let minus: Vec<Complex64> = (0..sigma.len()).map(|i| sigma[i] - delta[i] * beta).collect();
        let f = |r: &[Complex64]| -> (f64, f64) {
            let p = ip(r, &plus).norm_sqr();
            let m = ip(r, &minus).norm_sqr();
            match convention {
                Convention::CountRatio => (2.0 * p / (p + m), 2.0 * m / (p + m)),
                Convention::NormalizedFidelity => (p / (norm2(r) * norm2(&plus)), m / (norm2(r) * norm2(&minus))),
            }
        };
        let (fp, fm) = f(psi);
        let mut diff = fp - fm;
        if orthogonalised {
            let (cp, cm) = f(sigma);
            diff -= cp - cm;
        }
        let g = alpha * diff / (2.0 * beta);
        let next: Vec<Complex64> = (0..sigma.len()).map(|i| sigma[i] + delta[i] * g).collect();
        match convention {
            Convention::CountRatio => next,
            Convention::NormalizedFidelity => {
                let n = norm2(&next).sqrt();
                next.iter().map(|x| x / n).collect()
            }
        }
    }

    #[test]
    fn sgqt_matches_reference_at_d2() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let psi = ComplexState::new(vec![c(h, 0.0), c(0.0, h)]).unwrap();
        let sigma = ComplexState::new(vec![c(0.8, 0.0), c(0.6, 0.0)]).unwrap();
        let delta = PerturbationDirection::new(vec![c(0.0, 1.0), c(-1.0, 0.0)], Alphabet::Quantum).unwrap();
        for convention in [Convention::CountRatio, Convention::NormalizedFidelity] {
            let mut oracle = QuantumOracle::noiseless(psi.clone(), convention);
            let out = sgqt_step(&sigma, &delta, 0.3, 0.25, 0, &mut oracle, convention).unwrap();
            let expected =
                reference_update(psi.amplitudes(), sigma.amplitudes(), delta.entries(), 0.3, 0.25, false, convention);
            for (a, b) in out.next.amplitudes().iter().zip(&expected) {
                assert!((a - b).norm() < 1e-14, "{a} vs {b}");
            }
        }
    }

    #[test]
    fn osgqt_matches_reference_at_d5() {
        let (psi, sigma, delta) = random_setup(5, 3);
        for convention in [Convention::CountRatio, Convention::NormalizedFidelity] {
            let mut oracle = QuantumOracle::noiseless(psi.clone(), convention);
            let out = osgqt_step(&sigma, &delta, 0.05, 0.2, 0, &mut oracle, convention).unwrap();
            let expected =
                reference_update(psi.amplitudes(), sigma.amplitudes(), delta.entries(), 0.05, 0.2, true, convention);
            for (a, b) in out.next.amplitudes().iter().zip(&expected) {
                assert!((a - b).norm() < 1e-14, "{a} vs {b}");
            }
            assert_eq!(oracle.evaluations(), 2);
        }
    }

    #[test]
    fn osgqt_truth_is_a_fixed_point() {
        let (psi, _, delta) = random_setup(5, 4);
        for convention in [Convention::CountRatio, Convention::NormalizedFidelity] {
            let mut oracle = QuantumOracle::noiseless(psi.clone(), convention);
            let out = osgqt_step(&psi, &delta, 0.05, 0.2, 0, &mut oracle, convention).unwrap();
            assert_eq!(out.gradient, 0.0);
            assert_eq!(out.next, if convention.renormalizes_estimate() { psi.normalize().unwrap() } else { psi.clone() });
        }
    }

    #[test]
    fn osgqt_reduces_to_sgqt_without_correction() {
        // with sigma = (1, 0) and Δ = (i, 1) both probes give |1 ± iβ|^2 = 1 + β^2
        let sigma = ComplexState::basis(2, 0).unwrap();
        let delta = PerturbationDirection::new(vec![c(0.0, 1.0), c(1.0, 0.0)], Alphabet::Quantum).unwrap();
        let psi = ComplexState::new(vec![c(0.6, 0.0), c(0.0, 0.8)]).unwrap();
        for convention in [Convention::CountRatio, Convention::NormalizedFidelity] {
            let (plus, minus) = probe_states(&sigma, &delta, 0.2).unwrap();
            let (cp, cm) = convention.estimate_pair(&sigma, &plus, &minus).unwrap();
            assert_eq!(cp, cm);
            let mut o1 = QuantumOracle::noiseless(psi.clone(), convention);
            let mut o2 = QuantumOracle::noiseless(psi.clone(), convention);
            let a = sgqt_step(&sigma, &delta, 0.1, 0.2, 0, &mut o1, convention).unwrap();
            let b = osgqt_step(&sigma, &delta, 0.1, 0.2, 0, &mut o2, convention).unwrap();
            for (x, y) in a.next.amplitudes().iter().zip(b.next.amplitudes()) {
                assert!((x - y).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn steps_move_only_along_the_direction() {
        let (psi, sigma, delta) = random_setup(5, 5);
        let mut oracle = QuantumOracle::noiseless(psi, Convention::CountRatio);
        let out = osgqt_step(&sigma, &delta, 0.05, 0.2, 0, &mut oracle, Convention::CountRatio).unwrap();
        let diff: Vec<Complex64> = out.next.amplitudes().iter().zip(sigma.amplitudes()).map(|(a, b)| a - b).collect();
        // diff = s * Δ for a real scalar s
        let s = diff[0] / delta.entries()[0];
        assert!(s.im.abs() < 1e-15);
        for (d, e) in diff.iter().zip(delta.entries()) {
            assert!((d - e * s).norm() < 1e-15);
        }
    }

    #[test]
    fn sgi_equals_spi_when_noiseless() {
        let o = test_image(&ImagePreset::Disk, 8, 8).unwrap();
        let mut oracle = ImagingOracle::noiseless(o.clone());
        let mut sigma = ImageVector::zeros(8, 8).unwrap();
        let mut spi = sigma.clone();
        for (k, mask) in MaskSequence::random(8, 8, 1).unwrap().take(20).enumerate() {
            sigma = sgi_step(&sigma, &mask, 1.0, 0.2, k, &mut oracle).unwrap().next;
            spi = spi_step(&spi, linear_overlap(&o, &mask).unwrap(), &mask).unwrap();
        }
        for (a, b) in sigma.pixels().iter().zip(spi.pixels().iter()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn sgi_does_not_depend_on_beta() {
        let o = test_image(&ImagePreset::Gradient, 4, 4).unwrap();
        let sigma = o.scale(0.3);
        let mask = MaskSequence::random(4, 4, 2).unwrap().next().unwrap();
        let mut oracle = ImagingOracle::noiseless(o);
        let small = sgi_step(&sigma, &mask, 0.7, 0.1, 0, &mut oracle).unwrap();
        let large = sgi_step(&sigma, &mask, 0.7, 10.0, 0, &mut oracle).unwrap();
        for (a, b) in small.next.pixels().iter().zip(large.next.pixels().iter()) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn sgi_single_pixel_direction_updates_one_pixel() {
        // Hadamard rows 0 and 1 of order 2 combine to a single-pixel pattern;
        // applying both as SGI steps changes pixel 0 only when the object is
        // concentrated there
        let o = ImageVector::from_vec(vec![1.0, 0.0]).unwrap();
        let mut oracle = ImagingOracle::noiseless(o);
        let zero = ImageVector::zeros(2, 1).unwrap();
        let s1 = sgi_step(&zero, &hadamard_mask(2, 0).unwrap(), 1.0, 0.2, 0, &mut oracle).unwrap().next;
        let s2 = sgi_step(&s1, &hadamard_mask(2, 1).unwrap(), 1.0, 0.2, 1, &mut oracle).unwrap().next;
        assert_abs_diff_eq!(s2.pixels()[0], 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s2.pixels()[1], 0.0, epsilon = 1e-15);
    }

    #[test]
    fn run_with_zero_iterations_has_initial_row_only() {
        let (psi, _, _) = random_setup(5, 6);
        let mut config = TomographyConfig::new(QuantumVariant::Osgqt, 6);
        config.iterations = 0;
        let trace = run_tomography(&config, &psi).unwrap();
        assert_eq!(trace.len(), 1);
        assert!(trace.rows()[0].f_plus.is_none());
    }

    #[test]
    fn osgqt_run_from_truth_stays_at_truth() {
        let (psi, _, _) = random_setup(5, 7);
        let mut config = TomographyConfig::new(QuantumVariant::Osgqt, 7);
        config.initial = InitialEstimate::Truth;
        config.iterations = 100;
        let trace = run_tomography(&config, &psi).unwrap();
        assert!(trace.metrics().iter().all(|&m| m.abs() < 1e-12));
    }

    #[test]
    fn run_rejects_bad_config() {
        let (psi, _, _) = random_setup(5, 8);
        let mut config = TomographyConfig::new(QuantumVariant::Sgqt, 8);
        config.dimension = 4;
        assert!(run_tomography(&config, &psi).is_err());
        config.dimension = 1;
        assert!(config.validate().is_err());
    }

    #[test]
    fn zero_count_iterations_are_skipped() {
        let (psi, sigma, _) = random_setup(5, 9);
        let mut config = TomographyConfig::new(QuantumVariant::Sgqt, 9);
        config.iterations = 50;
        config.noise = NoiseModel::Poisson { rate: 1.0, integration_time: 1e-3 };
        let mut oracle = QuantumOracle::new(psi.clone(), config.noise, config.convention, 9).unwrap();
        let trace = run_tomography_from(&config, &psi, sigma.clone(), &mut oracle).unwrap();
        assert!(trace.skipped_iterations > 40);
        let last = trace.rows().last().unwrap();
        assert_eq!((last.n_plus, last.n_minus), (Some(0), Some(0)));
    }
}
