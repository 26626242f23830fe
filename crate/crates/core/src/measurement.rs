//! Measurement oracles and noise models.
//!
//! Quantum probes are scored either by the normalized fidelity or by the
//! relative coincidence estimate `f = 2N/(N+ + N-)` used with photon counting
//! (see [`Convention`]). Imaging probes are scored by the linear overlap
//! `<O|probe>`, optionally with additive Gaussian noise indexed by iteration.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use statrs::distribution::{Discrete, DiscreteCDF, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{check_dims, Error, Result};
use crate::generators::Mask;
use crate::linalg::{fidelity, linear_overlap, overlap_intensity, ComplexState, ImageVector, Pixels};
use crate::rng::NoiseStream;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum NoiseModel {
    #[default]
    None,
    /// Additive `Normal(0, gamma^2)` noise on each measured overlap.
    Gaussian { gamma: f64 },
    /// Shot noise: counts ~ Poisson(response * rate * integration_time), with
    /// `rate` the coincidence rate in counts/s when the probe equals the truth.
    Poisson { rate: f64, integration_time: f64 },
}

impl NoiseModel {
    pub fn validate(&self) -> Result<()> {
        match *self {
            NoiseModel::None => Ok(()),
            NoiseModel::Gaussian { gamma } if gamma >= 0.0 && gamma.is_finite() => Ok(()),
            NoiseModel::Gaussian { gamma } => Err(Error::invalid(format!("gamma must be >= 0, got {gamma}"))),
            NoiseModel::Poisson { rate, integration_time } => {
                if !(rate > 0.0 && rate.is_finite()) {
                    return Err(Error::invalid(format!("coincidence rate must be > 0, got {rate}")));
                }
                if !(integration_time > 0.0 && integration_time.is_finite()) {
                    return Err(Error::invalid(format!(
                        "integration time must be > 0, got {integration_time}"
                    )));
                }
                Ok(())
            }
        }
    }

    /// Short tag used in arm labels, e.g. `gamma=0.25` or `I=0.1`.
    pub fn label(&self) -> String {
        match self {
            NoiseModel::None => "noiseless".to_owned(),
            NoiseModel::Gaussian { gamma } => format!("gamma={gamma}"),
            NoiseModel::Poisson { integration_time, .. } => format!("I={integration_time}"),
        }
    }
}

/// Detection events recorded for the `sigma+` and `sigma-` probes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountPair {
    pub n_plus: u64,
    pub n_minus: u64,
}

/// `y + n` with `n ~ Normal(0, gamma^2)`. `gamma = 0` returns `y` unchanged.
pub fn gaussian_overlap_noise<R: Rng + ?Sized>(y: f64, gamma: f64, rng: &mut R) -> Result<f64> {
    if !(gamma >= 0.0 && gamma.is_finite()) {
        return Err(Error::invalid(format!("gamma must be >= 0, got {gamma}")));
    }
    if gamma == 0.0 {
        return Ok(y);
    }
    let normal = Normal::new(0.0, gamma).map_err(|e| Error::invalid(e.to_string()))?;
    Ok(y + normal.sample(rng))
}

/// Simulated detection count with mean `response * rate * integration_time`.
///
/// `response` is the probe's relative projection strength: the fidelity for
/// unit-norm probes. Small negative values from rounding are clamped to zero.
///
/// The count is the Poisson quantile of a single uniform draw, so oracles
/// that differ only in rate or integration time and read the same stream
/// position produce monotonically coupled counts.
pub fn poisson_counts<R: Rng + ?Sized>(
    response: f64,
    rate: f64,
    integration_time: f64,
    rng: &mut R,
) -> Result<u64> {
    NoiseModel::Poisson { rate, integration_time }.validate()?;
    if !response.is_finite() {
        return Err(Error::invalid(format!("probe response must be finite, got {response}")));
    }
    let u: f64 = rng.gen();
    poisson_quantile(response.max(0.0) * rate * integration_time, u)
}

/// Smallest `n` with `P(N <= n) >= u` for `N ~ Poisson(mean)`.
///
/// Evaluates the CDF once at `floor(mean)` and walks from there with the
/// pmf recurrence, which takes `O(sqrt(mean))` steps at worst in the bulk.
pub fn poisson_quantile(mean: f64, u: f64) -> Result<u64> {
    if !(mean >= 0.0 && mean.is_finite()) {
        return Err(Error::invalid(format!("poisson mean must be finite and >= 0, got {mean}")));
    }
    if !(0.0..1.0).contains(&u) {
        return Err(Error::invalid(format!("quantile level must lie in [0, 1), got {u}")));
    }
    if mean == 0.0 {
        return Ok(0);
    }
    let poisson = Poisson::new(mean).map_err(|e| Error::invalid(e.to_string()))?;
    let mut n = mean.floor() as u64;
    let mut cdf = poisson.cdf(n);
    let mut pmf = poisson.pmf(n);
    if cdf >= u {
        while n > 0 && cdf - pmf >= u {
            cdf -= pmf;
            pmf *= n as f64 / mean;
            n -= 1;
        }
    } else {
        while cdf < u {
            n += 1;
            pmf *= mean / n as f64;
            cdf += pmf;
            if pmf == 0.0 {
                break;
            }
        }
    }
    Ok(n)
}

/// Relative estimates `(2a/(a+b), 2b/(a+b))`.
///
/// The smaller value is taken as `2 - larger`; the larger lies in `[1, 2]`,
/// so the subtraction is exact and the pair sums to exactly 2.
fn relative_pair(a: f64, b: f64) -> Result<(f64, f64)> {
    let total = a + b;
    if total <= 0.0 {
        return Err(Error::NoDetections);
    }
    if a >= b {
        let f = 2.0 * a / total;
        Ok((f, 2.0 - f))
    } else {
        let f = 2.0 * b / total;
        Ok((2.0 - f, f))
    }
}

/// `f± = 2N± / (N+ + N-)`.
pub fn fidelity_from_counts(counts: CountPair) -> Result<(f64, f64)> {
    relative_pair(counts.n_plus as f64, counts.n_minus as f64)
}

/// How a quantum probe pair is turned into the two distance values `f±`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Convention {
    /// Probes are projected as given (no renormalization), so the expected
    /// count of a probe is `|<psi|sigma±>|^2 * rate * I`, and `f±` is the
    /// relative estimate `2N±/(N+ + N-)`. Without noise the expected counts
    /// are used directly. The estimate is not renormalized between steps.
    #[default]
    CountRatio,
    /// `f± = |<psi|sigma±>|^2 / (<psi|psi><sigma±|sigma±>)`, and the estimate
    /// is renormalized after every step.
    NormalizedFidelity,
}

impl Convention {
    /// Detector response of `probe` against `reference`.
    pub fn response(self, reference: &ComplexState, probe: &ComplexState) -> Result<f64> {
        match self {
            Convention::CountRatio => overlap_intensity(reference, probe),
            Convention::NormalizedFidelity => fidelity(reference, probe),
        }
    }

    /// Noise-free `(f+, f-)` of a probe pair against `reference`.
    pub fn estimate_pair(
        self,
        reference: &ComplexState,
        plus: &ComplexState,
        minus: &ComplexState,
    ) -> Result<(f64, f64)> {
        let r_plus = self.response(reference, plus)?;
        let r_minus = self.response(reference, minus)?;
        match self {
            Convention::CountRatio => relative_pair(r_plus, r_minus),
            Convention::NormalizedFidelity => Ok((r_plus, r_minus)),
        }
    }

    pub fn renormalizes_estimate(self) -> bool {
        matches!(self, Convention::NormalizedFidelity)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PairMeasurement {
    pub f_plus: f64,
    pub f_minus: f64,
    pub counts: Option<CountPair>,
}

/// Experimental feedback for a pair of quantum probes.
pub trait StateOracle {
    /// Measure `f(psi, plus)` and `f(psi, minus)` at iteration `k`.
    fn measure_pair(&mut self, k: usize, plus: &ComplexState, minus: &ComplexState) -> Result<PairMeasurement>;

    /// Number of single-probe evaluations performed so far.
    fn evaluations(&self) -> usize;
}

/// Simulated projective measurements against a hidden pure state.
#[derive(Clone, Debug)]
pub struct QuantumOracle {
    truth: ComplexState,
    noise: NoiseModel,
    convention: Convention,
    stream: NoiseStream,
    evaluations: usize,
}

impl QuantumOracle {
    pub fn new(truth: ComplexState, noise: NoiseModel, convention: Convention, noise_seed: u64) -> Result<Self> {
        noise.validate()?;
        if let NoiseModel::Gaussian { .. } = noise {
            return Err(Error::invalid(
                "gaussian overlap noise applies to imaging runs; use poisson noise for quantum runs",
            ));
        }
        Ok(Self { truth, noise, convention, stream: NoiseStream::new(noise_seed), evaluations: 0 })
    }

    pub fn noiseless(truth: ComplexState, convention: Convention) -> Self {
        Self { truth, noise: NoiseModel::None, convention, stream: NoiseStream::new(0), evaluations: 0 }
    }

    pub fn truth(&self) -> &ComplexState {
        &self.truth
    }
}

impl StateOracle for QuantumOracle {
    fn measure_pair(&mut self, k: usize, plus: &ComplexState, minus: &ComplexState) -> Result<PairMeasurement> {
        check_dims(self.truth.dim(), plus.dim())?;
        check_dims(self.truth.dim(), minus.dim())?;
        self.evaluations += 2;
        match self.noise {
            NoiseModel::Poisson { rate, integration_time } => {
                let mut rng = self.stream.at(k);
                let r_plus = self.convention.response(&self.truth, plus)?;
                let r_minus = self.convention.response(&self.truth, minus)?;
                let counts = CountPair {
                    n_plus: poisson_counts(r_plus, rate, integration_time, &mut rng)?,
                    n_minus: poisson_counts(r_minus, rate, integration_time, &mut rng)?,
                };
                let (f_plus, f_minus) = fidelity_from_counts(counts)?;
                Ok(PairMeasurement { f_plus, f_minus, counts: Some(counts) })
            }
            _ => {
                let (f_plus, f_minus) = self.convention.estimate_pair(&self.truth, plus, minus)?;
                Ok(PairMeasurement { f_plus, f_minus, counts: None })
            }
        }
    }

    fn evaluations(&self) -> usize {
        self.evaluations
    }
}

/// The noise-free distance measure between a truth and a probe.
pub trait Measurable {
    fn noiseless_response(&self, probe: &Self) -> Result<f64>;
}

impl Measurable for ComplexState {
    fn noiseless_response(&self, probe: &Self) -> Result<f64> {
        fidelity(self, probe)
    }
}

impl Measurable for ImageVector {
    fn noiseless_response(&self, probe: &Self) -> Result<f64> {
        linear_overlap(self, probe)
    }
}

/// Fidelity for quantum states, linear overlap for images.
pub fn noiseless_oracle<T: Measurable>(truth: &T, probe: &T) -> Result<f64> {
    truth.noiseless_response(probe)
}

/// Single-pixel detector looking at a hidden object.
///
/// The noise term `n_k` depends only on the noise seed and the iteration, so
/// an SPI pipeline and an SGI pipeline driven by oracles with the same seed
/// see identical noise.
#[derive(Clone, Debug)]
pub struct ImagingOracle {
    object: ImageVector,
    gamma: f64,
    stream: NoiseStream,
    evaluations: usize,
}

impl ImagingOracle {
    pub fn new(object: ImageVector, noise: NoiseModel, noise_seed: u64) -> Result<Self> {
        noise.validate()?;
        let gamma = match noise {
            NoiseModel::None => 0.0,
            NoiseModel::Gaussian { gamma } => gamma,
            NoiseModel::Poisson { .. } => {
                return Err(Error::invalid("poisson noise applies to quantum runs; use gaussian noise for imaging"))
            }
        };
        Ok(Self { object, gamma, stream: NoiseStream::new(noise_seed), evaluations: 0 })
    }

    pub fn noiseless(object: ImageVector) -> Self {
        Self { object, gamma: 0.0, stream: NoiseStream::new(0), evaluations: 0 }
    }

    pub fn object(&self) -> &ImageVector {
        &self.object
    }

    pub fn evaluations(&self) -> usize {
        self.evaluations
    }

    /// The noise sample `n_k` added to the overlap at iteration `k`.
    pub fn noise_at(&self, k: usize) -> Result<f64> {
        gaussian_overlap_noise(0.0, self.gamma, &mut self.stream.at(k))
    }

    /// `y_k = <O|mask> + n_k`.
    pub fn measure(&mut self, k: usize, mask: &Mask) -> Result<f64> {
        let clean = linear_overlap(&self.object, mask)?;
        self.evaluations += 1;
        gaussian_overlap_noise(clean, self.gamma, &mut self.stream.at(k))
    }

    /// Overlaps with the probes `sigma ± beta * mask`.
    ///
    /// The noise enters through the overlap term, `<O|mask> -> <O|mask> + n_k`,
    /// so the probes read `<O|sigma> ± beta (<O|mask> + n_k)`.
    pub fn measure_pair(&mut self, k: usize, sigma: &ImageVector, mask: &Mask, beta: f64) -> Result<(f64, f64)> {
        check_dims(self.object.len(), sigma.len())?;
        check_dims(self.object.len(), mask.pixels().len())?;
        let plus = sigma.add_scaled(beta, mask)?;
        let minus = sigma.add_scaled(-beta, mask)?;
        let n_k = self.noise_at(k)?;
        self.evaluations += 2;
        Ok((
            linear_overlap(&self.object, &plus)? + beta * n_k,
            linear_overlap(&self.object, &minus)? - beta * n_k,
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{random_oam_state, StateEnsemble};
    use crate::rng::{stream, Stream};
    use approx::assert_abs_diff_eq;
    use num_complex::Complex64;
    use proptest::prelude::*;

    #[test]
    fn noiseless_oracle_examples() {
        let psi = random_oam_state(5, &mut stream(1, Stream::Truth), StateEnsemble::PhaseOnly).unwrap();
        assert_abs_diff_eq!(noiseless_oracle(&psi, &psi).unwrap(), 1.0, epsilon = 1e-12);
        let e0 = ComplexState::basis(3, 0).unwrap();
        let e2 = ComplexState::basis(3, 2).unwrap();
        assert_eq!(noiseless_oracle(&e0, &e2).unwrap(), 0.0);

        let o = ImageVector::from_vec(vec![0.6, 0.8, 0.0]).unwrap();
        let sigma = ImageVector::from_vec(vec![1.0, 2.0, 3.0]).unwrap();
        let delta = vec![1.0, -1.0, 1.0];
        let beta = 0.25;
        let probe = sigma.add_scaled(beta, &delta).unwrap();
        let expected = linear_overlap(&o, &sigma).unwrap() + beta * linear_overlap(&o, &delta).unwrap();
        assert_abs_diff_eq!(noiseless_oracle(&o, &probe).unwrap(), expected, epsilon = 1e-15);
    }

    #[test]
    fn gaussian_noise_zero_gamma_is_identity() {
        let mut r = stream(2, Stream::Noise);
        assert_eq!(gaussian_overlap_noise(0.3, 0.0, &mut r).unwrap(), 0.3);
        assert!(gaussian_overlap_noise(0.3, -0.1, &mut r).is_err());
    }

    #[test]
    fn gaussian_noise_statistics() {
        let mut r = stream(3, Stream::Noise);
        let gamma = 0.25;
        let n = 100_000;
        let xs: Vec<f64> = (0..n).map(|_| gaussian_overlap_noise(0.0, gamma, &mut r).unwrap()).collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!(mean.abs() < 4.0 * gamma / (n as f64).sqrt(), "mean {mean}");
        assert!((var.sqrt() - gamma).abs() < 0.02 * gamma, "std {}", var.sqrt());
    }

    #[test]
    fn gaussian_noise_is_reproducible() {
        let a: Vec<f64> = {
            let mut r = stream(4, Stream::Noise);
            (0..5).map(|_| gaussian_overlap_noise(1.0, 0.5, &mut r).unwrap()).collect()
        };
        let b: Vec<f64> = {
            let mut r = stream(4, Stream::Noise);
            (0..5).map(|_| gaussian_overlap_noise(1.0, 0.5, &mut r).unwrap()).collect()
        };
        assert_eq!(a, b);
    }

    #[test]
    fn poisson_zero_response_gives_zero() {
        let mut r = stream(5, Stream::Noise);
        for _ in 0..100 {
            assert_eq!(poisson_counts(0.0, 5e3, 1.0, &mut r).unwrap(), 0);
            assert_eq!(poisson_counts(-1e-17, 5e3, 1.0, &mut r).unwrap(), 0);
        }
        assert!(poisson_counts(0.5, 0.0, 1.0, &mut r).is_err());
        assert!(poisson_counts(0.5, 5e3, -1.0, &mut r).is_err());
    }

    #[test]
    fn poisson_mean_and_variance() {
        let mut r = stream(6, Stream::Noise);
        let n = 10_000;
        let xs: Vec<f64> = (0..n).map(|_| poisson_counts(1.0, 5e3, 1.0, &mut r).unwrap() as f64).collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!((mean - 5000.0).abs() < 4.0 * (5000.0 / n as f64).sqrt(), "mean {mean}");
        assert!((var / mean - 1.0).abs() < 0.05, "var {var} mean {mean}");
    }

    #[test]
    fn poisson_quantile_examples() {
        // P(N = 0) = e^-1 for mean 1
        let p0 = (-1.0f64).exp();
        assert_eq!(poisson_quantile(1.0, p0 - 1e-9).unwrap(), 0);
        assert_eq!(poisson_quantile(1.0, p0 + 1e-9).unwrap(), 1);
        assert_eq!(poisson_quantile(1.0, 0.0).unwrap(), 0);
        assert_eq!(poisson_quantile(0.0, 0.9).unwrap(), 0);
        assert_eq!(poisson_quantile(5000.0, 0.5).unwrap(), 5000);
        assert!(poisson_quantile(1.0, 1.0).is_err());

        // agrees with the bisection quantile away from CDF steps
        let mut r = stream(7, Stream::Noise);
        for &mean in &[0.01, 0.7, 3.0, 42.5, 350.0, 5000.0, 1e5] {
            let exact = Poisson::new(mean).unwrap();
            for _ in 0..200 {
                let u: f64 = rand::Rng::gen(&mut r);
                let n = poisson_quantile(mean, u).unwrap();
                if (exact.cdf(n) - u).abs() > 1e-10 && (n == 0 || (exact.cdf(n - 1) - u).abs() > 1e-10) {
                    assert_eq!(n, exact.inverse_cdf(u), "mean {mean} u {u}");
                }
            }
        }
        assert!(poisson_quantile(-1.0, 0.5).is_err());
    }

    #[test]
    fn poisson_counts_are_coupled_across_integration_times() {
        for k in 0..200 {
            let long = poisson_counts(0.7, 5e3, 1.0, &mut stream(k, Stream::Noise)).unwrap();
            let short = poisson_counts(0.7, 5e3, 0.1, &mut stream(k, Stream::Noise)).unwrap();
            let z = |n: u64, mean: f64| (n as f64 - mean) / mean.sqrt();
            // same quantile level: standardized counts agree to discretization
            assert!((z(long, 3500.0) - z(short, 350.0)).abs() < 0.2, "{long} vs {short}");
        }
    }

    #[test]
    fn count_estimator_examples() {
        let f = |p, m| fidelity_from_counts(CountPair { n_plus: p, n_minus: m }).unwrap();
        assert_eq!(f(100, 100), (1.0, 1.0));
        assert_eq!(f(150, 50), (1.5, 0.5));
        assert_eq!(f(1, 0), (2.0, 0.0));
        assert!(matches!(
            fidelity_from_counts(CountPair { n_plus: 0, n_minus: 0 }),
            Err(Error::NoDetections)
        ));
    }

    #[test]
    fn quantum_oracle_counts_evaluations_and_rejects_gaussian() {
        let psi = ComplexState::basis(2, 0).unwrap();
        let mut oracle = QuantumOracle::noiseless(psi.clone(), Convention::NormalizedFidelity);
        let plus = ComplexState::new(vec![Complex64::new(1.2, 0.0), Complex64::new(0.2, 0.0)]).unwrap();
        let minus = ComplexState::new(vec![Complex64::new(0.8, 0.0), Complex64::new(-0.2, 0.0)]).unwrap();
        let m = oracle.measure_pair(0, &plus, &minus).unwrap();
        assert_abs_diff_eq!(m.f_plus, 1.44 / 1.48, epsilon = 1e-15);
        assert_abs_diff_eq!(m.f_minus, 0.64 / 0.68, epsilon = 1e-15);
        assert_eq!(oracle.evaluations(), 2);

        assert!(QuantumOracle::new(psi, NoiseModel::Gaussian { gamma: 0.1 }, Convention::CountRatio, 1).is_err());
    }

    #[test]
    fn count_ratio_convention_matches_expected_counts() {
        let psi = ComplexState::basis(2, 0).unwrap();
        let plus = ComplexState::new(vec![Complex64::new(1.2, 0.0), Complex64::new(0.2, 0.0)]).unwrap();
        let minus = ComplexState::new(vec![Complex64::new(0.8, 0.0), Complex64::new(-0.2, 0.0)]).unwrap();
        let (fp, fm) = Convention::CountRatio.estimate_pair(&psi, &plus, &minus).unwrap();
        // expected counts proportional to 1.44 and 0.64
        assert_abs_diff_eq!(fp, 2.0 * 1.44 / 2.08, epsilon = 1e-15);
        assert_abs_diff_eq!(fm, 2.0 * 0.64 / 2.08, epsilon = 1e-15);
    }

    #[test]
    fn poisson_oracle_approaches_expected_counts() {
        let mut r = stream(7, Stream::Truth);
        let psi = random_oam_state(5, &mut r, StateEnsemble::PhaseOnly).unwrap();
        let sigma = random_oam_state(5, &mut r, StateEnsemble::PhaseOnly).unwrap();
        let delta = crate::generators::random_perturbation(5, &mut r).unwrap();
        let plus = sigma.add_scaled(Complex64::new(0.2, 0.0), delta.entries()).unwrap();
        let minus = sigma.add_scaled(Complex64::new(-0.2, 0.0), delta.entries()).unwrap();

        let (fp, fm) = Convention::CountRatio.estimate_pair(&psi, &plus, &minus).unwrap();
        let clean = (fp - fm) / 0.4;
        let noise = NoiseModel::Poisson { rate: 5e3, integration_time: 1e6 };
        let mut oracle = QuantumOracle::new(psi, noise, Convention::CountRatio, 8).unwrap();
        let m = oracle.measure_pair(0, &plus, &minus).unwrap();
        let noisy = (m.f_plus - m.f_minus) / 0.4;
        // relative count fluctuation ~ 1/sqrt(5e9)
        assert!((noisy - clean).abs() < 1e-3, "noisy {noisy} clean {clean}");
        assert!(m.counts.unwrap().n_plus > 0);
    }

    #[test]
    fn imaging_oracle_shares_noise_by_iteration() {
        let o = ImageVector::from_vec(vec![0.6, 0.8]).unwrap();
        let mask = crate::generators::hadamard_mask(2, 1).unwrap();
        let noise = NoiseModel::Gaussian { gamma: 0.25 };
        let mut a = ImagingOracle::new(o.clone(), noise, 9).unwrap();
        let mut b = ImagingOracle::new(o.clone(), noise, 9).unwrap();
        let _ = a.measure(0, &mask).unwrap();
        let ya = a.measure(5, &mask).unwrap();
        let yb = b.measure(5, &mask).unwrap();
        assert_eq!(ya, yb);
        assert_abs_diff_eq!(ya - (-0.2), b.noise_at(5).unwrap(), epsilon = 1e-15);

        let zero = ImageVector::zeros(2, 1).unwrap();
        let (fp, fm) = b.measure_pair(5, &zero, &mask, 0.5).unwrap();
        assert_abs_diff_eq!((fp - fm) / 1.0, ya, epsilon = 1e-15);
        assert_eq!(b.evaluations(), 3);

        assert!(ImagingOracle::new(o, NoiseModel::Poisson { rate: 1.0, integration_time: 1.0 }, 0).is_err());
    }

    proptest! {
        #[test]
        fn count_estimates_sum_to_two(n_plus in 0u64..1_000_000, n_minus in 0u64..1_000_000) {
            prop_assume!(n_plus + n_minus > 0);
            let (fp, fm) = fidelity_from_counts(CountPair { n_plus, n_minus }).unwrap();
            prop_assert_eq!(fp + fm, 2.0);
        }
    }
}
