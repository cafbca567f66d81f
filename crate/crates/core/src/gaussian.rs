//! Gaussian densities and the generalized Wiener filter.
//!
//! A prior `φ ~ N(ψ, Φ)` and a linear measurement `d = Rφ + n`,
//! `n ~ N(0, N)` give the posterior `N(m, D)` with
//!
//! ```text
//! D = (Φ⁻¹ + RᵀN⁻¹R)⁻¹
//! m = ψ + W (d − Rψ),   W = D Rᵀ N⁻¹ = Φ Rᵀ (R Φ Rᵀ + N)⁻¹
//! ```

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{IfdError, Result};
use crate::matfun::{log_det_spd, positive_definite_spectrum, sqrtm, SymmetricMatrix};
use crate::scalar::{from_usize, lit, Real};

/// Multivariate normal density with a positive definite covariance.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussianDensity<T: Real> {
    mean: DVector<T>,
    covariance: SymmetricMatrix<T>,
}

impl<T: Real> GaussianDensity<T> {
    pub fn new(mean: DVector<T>, covariance: SymmetricMatrix<T>) -> Result<Self> {
        if mean.len() != covariance.dim() {
            return Err(IfdError::invalid(format!(
                "mean has dim {} but covariance is {}x{}",
                mean.len(),
                covariance.dim(),
                covariance.dim()
            )));
        }
        if mean.iter().any(|x| !x.is_finite()) {
            return Err(IfdError::invalid("mean has non-finite entries"));
        }
        positive_definite_spectrum(&covariance)?;
        Ok(Self { mean, covariance })
    }

    /// Standard normal in `dim` dimensions.
    pub fn standard(dim: usize) -> Self {
        Self {
            mean: DVector::zeros(dim),
            covariance: SymmetricMatrix::identity(dim),
        }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    #[inline]
    pub fn mean(&self) -> &DVector<T> {
        &self.mean
    }

    #[inline]
    pub fn covariance(&self) -> &SymmetricMatrix<T> {
        &self.covariance
    }

    pub fn precision(&self) -> Result<SymmetricMatrix<T>> {
        self.covariance.inverse_spd()
    }

    /// Same covariance, shifted mean.
    pub fn with_mean(&self, mean: DVector<T>) -> Result<Self> {
        Self::new(mean, self.covariance.clone())
    }

    /// Precomputes precision and normalization for repeated evaluation.
    pub fn log_density(&self) -> Result<LogDensity<T>> {
        let precision = self.precision()?;
        let n = from_usize::<T>(self.dim());
        let log_norm = -lit::<T>(0.5) * (n * lit::<T>(2.0 * PI).ln() + log_det_spd(&self.covariance)?);
        Ok(LogDensity {
            mean: self.mean.clone(),
            precision: precision.into_matrix(),
            log_norm,
        })
    }

    pub fn log_pdf(&self, x: &DVector<T>) -> Result<T> {
        self.log_density()?.eval(x)
    }

    /// `½ log det(2πe Σ)`.
    pub fn differential_entropy(&self) -> Result<T> {
        let n = from_usize::<T>(self.dim());
        let two_pi_e = lit::<T>(2.0 * PI * std::f64::consts::E);
        Ok(lit::<T>(0.5) * (n * two_pi_e.ln() + log_det_spd(&self.covariance)?))
    }

    /// Draws `count` samples from a ChaCha8 stream seeded with `seed`.
    pub fn sample(&self, seed: u64, count: usize) -> Result<Vec<DVector<T>>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        self.sample_with(&mut rng, count)
    }

    /// Draws `count` samples `m + Σ^{1/2} z` with `z` standard normal, using
    /// the symmetric spectral square root.
    pub fn sample_with<R: Rng + ?Sized>(&self, rng: &mut R, count: usize) -> Result<Vec<DVector<T>>> {
        if count == 0 {
            return Err(IfdError::invalid("sample count must be positive"));
        }
        let root = sqrtm(&self.covariance)?.into_matrix();
        let n = self.dim();
        Ok((0..count)
            .map(|_| {
                let z = DVector::from_fn(n, |_, _| lit::<T>(rng.sample::<f64, _>(StandardNormal)));
                &self.mean + &root * z
            })
            .collect())
    }
}

/// Log-density evaluator with cached precision and normalization.
#[derive(Clone, Debug)]
pub struct LogDensity<T: Real> {
    mean: DVector<T>,
    precision: DMatrix<T>,
    log_norm: T,
}

impl<T: Real> LogDensity<T> {
    pub fn eval(&self, x: &DVector<T>) -> Result<T> {
        if x.len() != self.mean.len() {
            return Err(IfdError::invalid(format!(
                "point has dim {}, density has dim {}",
                x.len(),
                self.mean.len()
            )));
        }
        let r = x - &self.mean;
        Ok(self.log_norm - lit::<T>(0.5) * r.dot(&(&self.precision * &r)))
    }
}

/// Linear measurement `d = R φ + n` with Gaussian noise covariance `N`.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearMeasurement<T: Real> {
    response: DMatrix<T>,
    noise_cov: SymmetricMatrix<T>,
}

impl<T: Real> LinearMeasurement<T> {
    pub fn new(response: DMatrix<T>, noise_cov: SymmetricMatrix<T>) -> Result<Self> {
        if response.nrows() != noise_cov.dim() {
            return Err(IfdError::invalid(format!(
                "response has {} rows but noise covariance is {}x{}",
                response.nrows(),
                noise_cov.dim(),
                noise_cov.dim()
            )));
        }
        if response.iter().any(|x| !x.is_finite()) {
            return Err(IfdError::invalid("response has non-finite entries"));
        }
        positive_definite_spectrum(&noise_cov)?;
        Ok(Self { response, noise_cov })
    }

    #[inline]
    pub fn response(&self) -> &DMatrix<T> {
        &self.response
    }

    #[inline]
    pub fn noise_cov(&self) -> &SymmetricMatrix<T> {
        &self.noise_cov
    }

    #[inline]
    pub fn data_dim(&self) -> usize {
        self.response.nrows()
    }

    #[inline]
    pub fn signal_dim(&self) -> usize {
        self.response.ncols()
    }

    /// Noise-free prediction `R s`.
    pub fn predict(&self, s: &DVector<T>) -> Result<DVector<T>> {
        if s.len() != self.signal_dim() {
            return Err(IfdError::invalid(format!(
                "signal has dim {}, response expects {}",
                s.len(),
                self.signal_dim()
            )));
        }
        Ok(&self.response * s)
    }
}

/// Which algebraically equivalent form of the Wiener filter to evaluate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Representation {
    /// `(Φ⁻¹ + RᵀN⁻¹R)⁻¹ RᵀN⁻¹`, inverting in signal dimension.
    SignalSpace,
    /// `Φ Rᵀ (RΦRᵀ + N)⁻¹`, inverting in data dimension.
    DataSpace,
}

fn check_compatible<T: Real>(prior: &GaussianDensity<T>, meas: &LinearMeasurement<T>) -> Result<()> {
    if prior.dim() != meas.signal_dim() {
        return Err(IfdError::invalid(format!(
            "prior has dim {} but response has {} columns",
            prior.dim(),
            meas.signal_dim()
        )));
    }
    Ok(())
}

/// Posterior covariance (information propagator) `D = (Φ⁻¹ + RᵀN⁻¹R)⁻¹`.
pub fn posterior_covariance<T: Real>(
    prior: &GaussianDensity<T>,
    meas: &LinearMeasurement<T>,
) -> Result<SymmetricMatrix<T>> {
    check_compatible(prior, meas)?;
    let r = meas.response();
    let n_inv = meas.noise_cov().inverse_spd()?;
    let phi_inv = prior.precision()?;
    let info = phi_inv.matrix() + r.transpose() * n_inv.matrix() * r;
    SymmetricMatrix::new(info)?.inverse_spd()
}

/// Wiener filter `W` (signal dim × data dim).
pub fn wiener_filter<T: Real>(
    prior: &GaussianDensity<T>,
    meas: &LinearMeasurement<T>,
    representation: Representation,
) -> Result<DMatrix<T>> {
    check_compatible(prior, meas)?;
    let r = meas.response();
    match representation {
        Representation::SignalSpace => {
            let d = posterior_covariance(prior, meas)?;
            let n_inv = meas.noise_cov().inverse_spd()?;
            Ok(d.matrix() * r.transpose() * n_inv.matrix())
        }
        Representation::DataSpace => {
            let phi = prior.covariance().matrix();
            let s = SymmetricMatrix::new(r * phi * r.transpose() + meas.noise_cov().matrix())?;
            Ok(phi * r.transpose() * s.inverse_spd()?.matrix())
        }
    }
}

/// Posterior `N(m, D)` for observed data `d`.
pub fn posterior<T: Real>(
    prior: &GaussianDensity<T>,
    meas: &LinearMeasurement<T>,
    d: &DVector<T>,
) -> Result<GaussianDensity<T>> {
    check_compatible(prior, meas)?;
    if d.len() != meas.data_dim() {
        return Err(IfdError::invalid(format!(
            "data has dim {}, measurement produces {}",
            d.len(),
            meas.data_dim()
        )));
    }
    let dcov = posterior_covariance(prior, meas)?;
    let n_inv = meas.noise_cov().inverse_spd()?;
    let w = dcov.matrix() * meas.response().transpose() * n_inv.matrix();
    let residual = d - meas.response() * prior.mean();
    let mean = prior.mean() + w * residual;
    GaussianDensity::new(mean, dcov)
}

/// `KL(p ‖ q) = ½ [Tr((δm δmᵀ + Σ₁) Σ₂⁻¹) − n − log det(Σ₁ Σ₂⁻¹)]`.
pub fn kl_divergence<T: Real>(p: &GaussianDensity<T>, q: &GaussianDensity<T>) -> Result<T> {
    if p.dim() != q.dim() {
        return Err(IfdError::invalid(format!(
            "KL between densities of dim {} and {}",
            p.dim(),
            q.dim()
        )));
    }
    let q_prec = q.precision()?;
    let log_det_q = log_det_spd(q.covariance())?;
    kl_core(p, q.mean(), &q_prec, -log_det_q)
}

/// KL divergence against a density given by mean and precision `Σ₂⁻¹`.
pub fn kl_divergence_to_precision<T: Real>(
    p: &GaussianDensity<T>,
    q_mean: &DVector<T>,
    q_precision: &SymmetricMatrix<T>,
) -> Result<T> {
    if p.dim() != q_mean.len() || p.dim() != q_precision.dim() {
        return Err(IfdError::invalid("KL arguments have mismatched dimensions"));
    }
    let log_det_prec = log_det_spd(q_precision)?;
    kl_core(p, q_mean, q_precision, log_det_prec)
}

fn kl_core<T: Real>(
    p: &GaussianDensity<T>,
    q_mean: &DVector<T>,
    q_prec: &SymmetricMatrix<T>,
    log_det_q_prec: T,
) -> Result<T> {
    let dm = p.mean() - q_mean;
    let prec = q_prec.matrix();
    let trace = (prec * p.covariance().matrix()).trace();
    let quad = dm.dot(&(prec * &dm));
    let log_det_p = log_det_spd(p.covariance())?;
    let n = from_usize::<T>(p.dim());
    let kl = lit::<T>(0.5) * (trace + quad - n - log_det_p - log_det_q_prec);
    Ok(kl.max(T::zero()))
}

/// `log P(d)` for the evidence `d ~ N(Rψ, RΦRᵀ + N)`.
pub fn log_evidence<T: Real>(prior: &GaussianDensity<T>, meas: &LinearMeasurement<T>, d: &DVector<T>) -> Result<T> {
    check_compatible(prior, meas)?;
    let r = meas.response();
    let cov = SymmetricMatrix::new(r * prior.covariance().matrix() * r.transpose() + meas.noise_cov().matrix())?;
    GaussianDensity::new(r * prior.mean(), cov)?.log_pdf(d)
}

/// Information Hamiltonian `H(d, s) = −log P(d | s) − log P(s)`, including
/// both normalization constants, so that `exp(−H)` is the joint density.
pub fn info_hamiltonian<T: Real>(
    prior: &GaussianDensity<T>,
    meas: &LinearMeasurement<T>,
    d: &DVector<T>,
    s: &DVector<T>,
) -> Result<T> {
    check_compatible(prior, meas)?;
    if d.len() != meas.data_dim() {
        return Err(IfdError::invalid("data dimension does not match the measurement"));
    }
    let likelihood = GaussianDensity::new(meas.predict(s)?, meas.noise_cov().clone())?;
    Ok(-likelihood.log_pdf(d)? - prior.log_pdf(s)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{dmatrix, dvector};
    use rand::Rng;

    fn sym(m: DMatrix<f64>) -> SymmetricMatrix<f64> {
        SymmetricMatrix::new(m).unwrap()
    }

    fn scalar_density(mean: f64, var: f64) -> GaussianDensity<f64> {
        GaussianDensity::new(dvector![mean], sym(dmatrix![var])).unwrap()
    }

    fn unit_measurement() -> LinearMeasurement<f64> {
        LinearMeasurement::new(dmatrix![1.0], sym(dmatrix![1.0])).unwrap()
    }

    fn random_spd(rng: &mut ChaCha8Rng, n: usize) -> SymmetricMatrix<f64> {
        let a = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
        sym(&a * a.transpose() + DMatrix::identity(n, n) * 0.3)
    }

    fn random_density(rng: &mut ChaCha8Rng, n: usize) -> GaussianDensity<f64> {
        let mean = DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0));
        GaussianDensity::new(mean, random_spd(rng, n)).unwrap()
    }

    #[test]
    fn rejects_inconsistent_or_indefinite() {
        assert!(matches!(
            GaussianDensity::new(dvector![0.0, 0.0], SymmetricMatrix::identity(3)),
            Err(IfdError::InvalidInput(_))
        ));
        assert!(matches!(
            GaussianDensity::new(dvector![0.0], sym(dmatrix![-1.0])),
            Err(IfdError::NotPositiveDefinite { .. })
        ));
        assert!(LinearMeasurement::new(DMatrix::<f64>::zeros(2, 3), SymmetricMatrix::identity(3)).is_err());
    }

    #[test]
    fn scalar_wiener_filter_is_one_half() {
        let prior = scalar_density(0.0, 1.0);
        for rep in [Representation::SignalSpace, Representation::DataSpace] {
            let w = wiener_filter(&prior, &unit_measurement(), rep).unwrap();
            assert!((w[(0, 0)] - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn wiener_filter_vanishes_for_huge_noise() {
        let prior = scalar_density(0.0, 1.0);
        let meas = LinearMeasurement::new(dmatrix![1.0], sym(dmatrix![1e12])).unwrap();
        let w = wiener_filter(&prior, &meas, Representation::DataSpace).unwrap();
        assert!(w[(0, 0)].abs() < 1e-11);
    }

    #[test]
    fn wiener_representations_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let n = rng.random_range(1..=6);
            let y = rng.random_range(1..=4);
            let prior = random_density(&mut rng, n);
            let r = DMatrix::from_fn(y, n, |_, _| rng.random_range(-1.0..1.0));
            let meas = LinearMeasurement::new(r, random_spd(&mut rng, y)).unwrap();
            let ws = wiener_filter(&prior, &meas, Representation::SignalSpace).unwrap();
            let wd = wiener_filter(&prior, &meas, Representation::DataSpace).unwrap();
            assert!((&ws - &wd).norm() <= 1e-10 * ws.norm().max(1e-300));
        }
    }

    #[test]
    fn scalar_posterior_averages() {
        let post = posterior(&scalar_density(0.0, 1.0), &unit_measurement(), &dvector![2.0]).unwrap();
        assert!((post.mean()[0] - 1.0).abs() < 1e-15);
        assert!((post.covariance().matrix()[(0, 0)] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn data_equal_to_prediction_returns_prior_mean() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let prior = random_density(&mut rng, 3);
        let r = DMatrix::from_fn(2, 3, |_, _| rng.random_range(-1.0..1.0));
        let meas = LinearMeasurement::new(r, random_spd(&mut rng, 2)).unwrap();
        let d = meas.predict(prior.mean()).unwrap();
        let post = posterior(&prior, &meas, &d).unwrap();
        assert!((post.mean() - prior.mean()).norm() < 1e-12);
    }

    #[test]
    fn posterior_mean_matches_source_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let prior = random_density(&mut rng, 4);
        let r = DMatrix::from_fn(3, 4, |_, _| rng.random_range(-1.0..1.0));
        let meas = LinearMeasurement::new(r.clone(), random_spd(&mut rng, 3)).unwrap();
        let d = dvector![0.3, -1.2, 0.7];
        let post = posterior(&prior, &meas, &d).unwrap();
        let n_inv = meas.noise_cov().inverse_spd().unwrap();
        let phi_inv = prior.precision().unwrap();
        let j = r.transpose() * n_inv.matrix() * &d + phi_inv.matrix() * prior.mean();
        let m = post.covariance().matrix() * j;
        assert!((post.mean() - m).norm() < 1e-10);
    }

    #[test]
    fn posterior_covariance_ignores_data() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let prior = random_density(&mut rng, 3);
        let r = DMatrix::from_fn(2, 3, |_, _| rng.random_range(-1.0..1.0));
        let meas = LinearMeasurement::new(r, random_spd(&mut rng, 2)).unwrap();
        let a = posterior(&prior, &meas, &dvector![1.0, 2.0]).unwrap();
        let b = posterior(&prior, &meas, &dvector![-5.0, 0.1]).unwrap();
        assert_eq!(a.covariance(), b.covariance());
        assert!((a.mean() - b.mean()).norm() > 0.1);
    }

    #[test]
    fn kl_examples() {
        let p = scalar_density(0.0, 2.0);
        let q = scalar_density(0.0, 1.0);
        let expected = 0.5 * (2.0 - 1.0 - 2f64.ln());
        assert!((kl_divergence(&p, &q).unwrap() - expected).abs() < 1e-15);
        assert!((expected - 0.15343).abs() < 1e-5);
        assert!(kl_divergence(&p, &p).unwrap() < 1e-12);
        assert!(kl_divergence(&p, &GaussianDensity::standard(2)).is_err());
    }

    #[test]
    fn kl_nonnegative_on_random_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..50 {
            let n = rng.random_range(1..=5);
            let p = random_density(&mut rng, n);
            let q = random_density(&mut rng, n);
            assert!(kl_divergence(&p, &q).unwrap() >= 0.0);
            assert!(kl_divergence(&p, &p).unwrap() < 1e-12);
        }
    }

    #[test]
    fn kl_precision_form_agrees() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let p = random_density(&mut rng, 4);
        let q = random_density(&mut rng, 4);
        let a = kl_divergence(&p, &q).unwrap();
        let b = kl_divergence_to_precision(&p, q.mean(), &q.precision().unwrap()).unwrap();
        assert!((a - b).abs() < 1e-10);
    }

    #[test]
    fn kl_matches_monte_carlo() {
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        let p = random_density(&mut rng, 3);
        let q = random_density(&mut rng, 3);
        let lp = p.log_density().unwrap();
        let lq = q.log_density().unwrap();
        let samples = p.sample(99, 200_000).unwrap();
        let vals: Vec<f64> = samples
            .iter()
            .map(|x| lp.eval(x).unwrap() - lq.eval(x).unwrap())
            .collect();
        let n = vals.len() as f64;
        let mean = vals.iter().sum::<f64>() / n;
        let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
        let se = (var / n).sqrt();
        let kl = kl_divergence(&p, &q).unwrap();
        assert!((kl - mean).abs() <= 3.0 * se, "kl {kl} mc {mean} se {se}");
    }

    #[test]
    fn entropy_examples() {
        let unit = scalar_density(0.0, 1.0 / (2.0 * PI * std::f64::consts::E));
        assert!(unit.differential_entropy().unwrap().abs() < 1e-14);

        let (a, b) = (0.7, 3.2);
        let p = GaussianDensity::new(dvector![0.0, 0.0], sym(dmatrix![a, 0.0; 0.0, b])).unwrap();
        let c = 2.0 * PI * std::f64::consts::E;
        let expected = 0.5 * (c * a).ln() + 0.5 * (c * b).ln();
        assert!((p.differential_entropy().unwrap() - expected).abs() < 1e-14);

        let shifted = p.with_mean(dvector![5.0, -3.0]).unwrap();
        assert_eq!(
            shifted.differential_entropy().unwrap(),
            p.differential_entropy().unwrap()
        );
    }

    #[test]
    fn sampled_entropy_matches_closed_form() {
        let g = GaussianDensity::new(dvector![0.2, -0.4], sym(dmatrix![1.3, 0.4; 0.4, 0.9])).unwrap();
        let lg = g.log_density().unwrap();
        let samples = g.sample(5, 100_000).unwrap();
        let vals: Vec<f64> = samples.iter().map(|x| -lg.eval(x).unwrap()).collect();
        let n = vals.len() as f64;
        let h = vals.iter().sum::<f64>() / n;
        let se = (vals.iter().map(|v| (v - h).powi(2)).sum::<f64>() / (n - 1.0) / n).sqrt();
        assert!((h - g.differential_entropy().unwrap()).abs() <= 3.0 * se);
    }

    #[test]
    fn gaussian_maximizes_entropy_among_matched_mixtures() {
        // q = ½N(−a, s²) + ½N(a, s²) has mean 0 and variance s² + a².
        let (a, s): (f64, f64) = (1.5, 0.6);
        let var = s * s + a * a;
        let gauss = scalar_density(0.0, var);
        let comp = |x: f64, c: f64| (-(x - c).powi(2) / (2.0 * s * s)).exp() / (2.0 * PI * s * s).sqrt();
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let count = 100_000;
        let vals: Vec<f64> = (0..count)
            .map(|_| {
                let z: f64 = rng.sample(StandardNormal);
                let c = if rng.random_bool(0.5) { a } else { -a };
                let x = c + s * z;
                -(0.5 * comp(x, a) + 0.5 * comp(x, -a)).ln()
            })
            .collect();
        let n = count as f64;
        let h = vals.iter().sum::<f64>() / n;
        let se = (vals.iter().map(|v| (v - h).powi(2)).sum::<f64>() / (n - 1.0) / n).sqrt();
        assert!(h <= gauss.differential_entropy().unwrap() + 3.0 * se);
    }

    #[test]
    fn hamiltonian_examples() {
        let prior = scalar_density(0.0, 1.0);
        let meas = unit_measurement();
        let constant = (2.0 * PI).ln();
        let h0 = info_hamiltonian(&prior, &meas, &dvector![0.0], &dvector![0.0]).unwrap();
        assert!((h0 - constant).abs() < 1e-14);
        let h1 = info_hamiltonian(&prior, &meas, &dvector![1.0], &dvector![0.0]).unwrap();
        assert!((h1 - 0.5 - constant).abs() < 1e-14);
    }

    #[test]
    fn hamiltonian_is_negative_log_joint() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let prior = random_density(&mut rng, 3);
        let r = DMatrix::from_fn(2, 3, |_, _| rng.random_range(-1.0..1.0));
        let meas = LinearMeasurement::new(r, random_spd(&mut rng, 2)).unwrap();
        let d = dvector![0.4, -0.9];
        let post = posterior(&prior, &meas, &d).unwrap();
        let ev = log_evidence(&prior, &meas, &d).unwrap();
        for _ in 0..10 {
            let s = DVector::from_fn(3, |_, _| rng.random_range(-2.0..2.0));
            let h = info_hamiltonian(&prior, &meas, &d, &s).unwrap();
            let lp = post.log_pdf(&s).unwrap();
            assert!((-h - (lp + ev)).abs() < 1e-10);
        }
    }

    #[test]
    fn sampling_is_deterministic_and_validated() {
        let p = GaussianDensity::<f64>::standard(3);
        assert_eq!(p.sample(7, 1).unwrap(), p.sample(7, 1).unwrap());
        assert_ne!(p.sample(7, 1).unwrap(), p.sample(8, 1).unwrap());
        assert!(matches!(p.sample(7, 0), Err(IfdError::InvalidInput(_))));
    }

    #[test]
    fn scalar_sample_mean() {
        let p = scalar_density(0.0, 1.0);
        let s = p.sample(3, 100_000).unwrap();
        let mean = s.iter().map(|x| x[0]).sum::<f64>() / s.len() as f64;
        assert!(mean.abs() < 0.02);
    }

    #[test]
    fn sample_covariance_matches() {
        let cov = dmatrix![2.0, 0.6; 0.6, 0.5];
        let p = GaussianDensity::new(dvector![1.0, -1.0], sym(cov.clone())).unwrap();
        let s = p.sample(4, 100_000).unwrap();
        let n = s.len() as f64;
        let mean = s.iter().fold(DVector::zeros(2), |acc, x| acc + x) / n;
        let emp = s.iter().fold(DMatrix::zeros(2, 2), |acc, x| {
            let r = x - &mean;
            acc + &r * r.transpose()
        }) / (n - 1.0);
        assert!((emp - cov).abs().max() < 0.05);
    }

    #[test]
    fn works_in_single_precision() {
        let prior = GaussianDensity::<f32>::standard(2);
        let meas = LinearMeasurement::new(DMatrix::<f32>::identity(2, 2), SymmetricMatrix::identity(2)).unwrap();
        let post = posterior(&prior, &meas, &DVector::from_element(2, 2.0f32)).unwrap();
        assert!((post.mean()[0] - 1.0).abs() < 1e-6);
    }
}
