//! The periodic 1-D Klein-Gordon field `φ̈ = ∂ₓ²φ − μ²φ` on `[0, 2π)`.
//!
//! The signal is the packed real vector of the Fourier modes `|k| < n` of the
//! field `φ` and its time derivative `χ = φ̇` (dimension `4n − 2`). The data
//! are box averages over `Y` equal pixels of `φ` and `χ`, expressed through
//! their discrete Fourier coefficients. This module builds every matrix of
//! that instance: the thermal prior, the sinc response, the generator and its
//! exact flow, and the analytic data-update matrices.

use std::f64::consts::PI;

use nalgebra::{Complex, DMatrix, DVector};

use crate::dynamics::{approx_inv_cov, AffineDynamics};
use crate::error::{IfdError, Result};
use crate::gaussian::{posterior_covariance, GaussianDensity, LinearMeasurement};
use crate::matching::{MatchProblem, MatchResult};
use crate::matfun::{expm_general, spectral_decompose, SymmetricMatrix};
use crate::scalar::{from_usize, lit, to_f64, Real};

/// Which Fourier coefficients of the pixel data are kept.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataLayout {
    /// `k = 0..=(Y+1)/2`, data dimension `2(Y+2)`. The last two modes are a
    /// complex-conjugate pair, so the response has a nontrivial cokernel.
    #[default]
    Overcomplete,
    /// `k = 0..=(Y−1)/2`, data dimension `2Y`. Every real degree of freedom
    /// of the pixel data appears exactly once.
    NonRedundant,
}

impl DataLayout {
    /// Largest retained mode index for `pixels` pixels.
    pub fn kmax(self, pixels: usize) -> usize {
        match self {
            DataLayout::Overcomplete => pixels.div_ceil(2),
            DataLayout::NonRedundant => (pixels - 1) / 2,
        }
    }

    /// Real dimension of one (`φ` or `χ`) block of the data vector.
    pub fn part_dim(self, pixels: usize) -> usize {
        2 * self.kmax(pixels) + 1
    }
}

/// Field component selector.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FieldPart {
    Phi,
    Chi,
}

/// `sin(x)/x` with `sinc(0) = 1`.
pub fn sinc<T: Real>(x: T) -> T {
    if x == T::zero() {
        T::one()
    } else {
        x.sin() / x
    }
}

fn check_pixels(pixels: usize) -> Result<()> {
    if pixels <= 1 || pixels.is_multiple_of(2) {
        return Err(IfdError::UnsupportedPixelCount(pixels));
    }
    Ok(())
}

/// Parameters of the Klein-Gordon instance.
#[derive(Clone, Debug, PartialEq)]
pub struct KgModel<T: Real> {
    n_modes: usize,
    pixels: usize,
    mu: T,
    beta: T,
    sigma_n2: T,
    layout: DataLayout,
}

impl<T: Real> KgModel<T> {
    pub fn new(n_modes: usize, pixels: usize, mu: T, beta: T, sigma_n2: T) -> Result<Self> {
        if n_modes < 2 {
            return Err(IfdError::invalid(format!("n_modes must be at least 2, got {n_modes}")));
        }
        check_pixels(pixels)?;
        if !mu.is_finite() {
            return Err(IfdError::invalid("mu must be finite"));
        }
        if mu == T::zero() {
            return Err(IfdError::DegenerateMass);
        }
        if !(beta > T::zero()) || !beta.is_finite() {
            return Err(IfdError::invalid("beta must be positive"));
        }
        if !(sigma_n2 > T::zero()) || !sigma_n2.is_finite() {
            return Err(IfdError::invalid("sigma_n2 must be positive"));
        }
        Ok(Self {
            n_modes,
            pixels,
            mu,
            beta,
            sigma_n2,
            layout: DataLayout::Overcomplete,
        })
    }

    pub fn with_layout(mut self, layout: DataLayout) -> Self {
        self.layout = layout;
        self
    }

    #[inline]
    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    #[inline]
    pub fn pixels(&self) -> usize {
        self.pixels
    }

    #[inline]
    pub fn mu(&self) -> T {
        self.mu
    }

    #[inline]
    pub fn beta(&self) -> T {
        self.beta
    }

    #[inline]
    pub fn sigma_n2(&self) -> T {
        self.sigma_n2
    }

    #[inline]
    pub fn layout(&self) -> DataLayout {
        self.layout
    }

    /// Pixel width `Δ = 2π/Y`.
    pub fn delta(&self) -> T {
        lit::<T>(2.0 * PI) / from_usize(self.pixels)
    }

    /// `ω_k = √(k² + μ²)`.
    pub fn omega(&self, k: usize) -> T {
        let k = from_usize::<T>(k);
        (k * k + self.mu * self.mu).sqrt()
    }

    /// `2n − 1`.
    #[inline]
    pub fn part_signal_dim(&self) -> usize {
        2 * self.n_modes - 1
    }

    /// `4n − 2`.
    #[inline]
    pub fn signal_dim(&self) -> usize {
        2 * self.part_signal_dim()
    }

    #[inline]
    pub fn kmax(&self) -> usize {
        self.layout.kmax(self.pixels)
    }

    #[inline]
    pub fn part_data_dim(&self) -> usize {
        self.layout.part_dim(self.pixels)
    }

    /// `2(Y+2)` for the overcomplete layout, `2Y` for the non-redundant one.
    #[inline]
    pub fn data_dim(&self) -> usize {
        2 * self.part_data_dim()
    }

    /// `ω²` for every real component of one part: `μ²`, then `ω_k²` twice.
    fn omega_sq_components(&self) -> Vec<T> {
        let mut v = Vec::with_capacity(self.part_signal_dim());
        v.push(self.mu * self.mu);
        for k in 1..self.n_modes {
            let w2 = self.omega(k) * self.omega(k);
            v.push(w2);
            v.push(w2);
        }
        v
    }

    /// Diagonal of the thermal prior covariance for one part.
    pub fn prior_variances(&self, part: FieldPart) -> Vec<T> {
        let pi_beta = lit::<T>(PI) / self.beta;
        let two = lit::<T>(2.0);
        let w2 = self.omega_sq_components();
        (0..self.part_signal_dim())
            .map(|i| {
                let base = if i == 0 { two * pi_beta } else { pi_beta };
                match part {
                    FieldPart::Phi => base / w2[i],
                    FieldPart::Chi => base,
                }
            })
            .collect()
    }

    /// Thermal prior covariance `Φ_r`, block diagonal in (`φ`, `χ`).
    pub fn build_prior_cov(&self) -> Result<SymmetricMatrix<T>> {
        let mut diag = self.prior_variances(FieldPart::Phi);
        diag.extend(self.prior_variances(FieldPart::Chi));
        SymmetricMatrix::from_diagonal_slice(&diag)
    }

    /// Response `R̂_r` of one part: packed Fourier modes to packed data modes.
    pub fn response_part(&self) -> DMatrix<T> {
        let y = self.pixels;
        let half = lit::<T>(0.5);
        let mut r = DMatrix::zeros(self.part_data_dim(), self.part_signal_dim());
        r[(0, 0)] = T::one();
        for k in 1..=self.kmax() {
            for l in 1..self.n_modes {
                let a = from_usize::<T>(l) * self.delta() * half;
                let (s, c) = a.sin_cos();
                let w = sinc(a);
                let mut block = [[T::zero(); 2]; 2];
                if l % y == k {
                    block = [[c, s], [-s, c]];
                }
                if (y - l % y) % y == k {
                    block[0][0] += c;
                    block[0][1] += s;
                    block[1][0] += s;
                    block[1][1] -= c;
                }
                for (i, row) in block.iter().enumerate() {
                    for (j, &v) in row.iter().enumerate() {
                        r[(2 * k - 1 + i, 2 * l - 1 + j)] = w * v;
                    }
                }
            }
        }
        r
    }

    /// Block-diagonal lift `diag(R̂_r, R̂_r)` acting on the full signal.
    pub fn build_response(&self) -> DMatrix<T> {
        lift(&self.response_part())
    }

    pub fn noise_cov(&self) -> SymmetricMatrix<T> {
        SymmetricMatrix::identity(self.data_dim()).scale(self.sigma_n2)
    }

    pub fn prior(&self) -> Result<GaussianDensity<T>> {
        GaussianDensity::new(DVector::zeros(self.signal_dim()), self.build_prior_cov()?)
    }

    pub fn measurement(&self) -> Result<LinearMeasurement<T>> {
        LinearMeasurement::new(self.build_response(), self.noise_cov())
    }

    /// `L_r = [[0, 𝟙], [−Ω², 0]]`.
    pub fn build_generator(&self) -> DMatrix<T> {
        let p = self.part_signal_dim();
        let w2 = self.omega_sq_components();
        let mut l = DMatrix::zeros(2 * p, 2 * p);
        for i in 0..p {
            l[(i, p + i)] = T::one();
            l[(p + i, i)] = -w2[i];
        }
        l
    }

    /// Exact flow `A_r(dt) = exp(dt L_r)`, assembled per mode.
    pub fn exact_step(&self, dt: T) -> DMatrix<T> {
        let p = self.part_signal_dim();
        let w2 = self.omega_sq_components();
        let mut a = DMatrix::zeros(2 * p, 2 * p);
        for i in 0..p {
            let w = w2[i].sqrt();
            let (s, c) = (w * dt).sin_cos();
            a[(i, i)] = c;
            a[(i, p + i)] = s / w;
            a[(p + i, i)] = -w * s;
            a[(p + i, p + i)] = c;
        }
        a
    }

    /// Second-order remainder `B_r = (A_r(dt) − 𝟙 − dt L_r) / dt²`.
    pub fn step_remainder(&self, dt: T) -> Result<DMatrix<T>> {
        if !(dt > T::zero()) {
            return Err(IfdError::invalid("remainder needs a positive step"));
        }
        let n = self.signal_dim();
        let g = DMatrix::identity(n, n) + self.build_generator() * dt;
        Ok((self.exact_step(dt) - g) / (dt * dt))
    }

    /// `(1/4π)(|χ̂₀|² + μ²|φ̂₀|²) + (1/2π) Σ_{k≥1} (|χ̂_k|² + ω_k²|φ̂_k|²)`.
    pub fn field_energy(&self, field: &PackedField<T>) -> Result<T> {
        if field.n_modes() != self.n_modes {
            return Err(IfdError::invalid(format!(
                "field has {} modes, model has {}",
                field.n_modes(),
                self.n_modes
            )));
        }
        let v = field.values();
        let p = self.part_signal_dim();
        let w2 = self.omega_sq_components();
        let mut e = T::zero();
        for i in 0..p {
            let weight = if i == 0 {
                lit::<T>(0.25 / PI)
            } else {
                lit::<T>(0.5 / PI)
            };
            e += weight * (v[p + i] * v[p + i] + w2[i] * v[i] * v[i]);
        }
        Ok(e)
    }

    /// Analytic diagonal of `R̂_r Φ^{(part)} R̂_rᵀ`: entry 0 is the mode-0
    /// value, entry `k` the coefficient `b_k` of the `𝟙₂` block of mode `k`.
    pub fn rphi_rt_diag(&self, part: FieldPart) -> Vec<T> {
        let y = self.pixels;
        let pi_beta = lit::<T>(PI) / self.beta;
        let half = lit::<T>(0.5);
        let mut b = Vec::with_capacity(self.kmax() + 1);
        b.push(match part {
            FieldPart::Phi => lit::<T>(2.0) * pi_beta / (self.mu * self.mu),
            FieldPart::Chi => lit::<T>(2.0) * pi_beta,
        });
        for k in 1..=self.kmax() {
            let mut sum = T::zero();
            for m in 1..self.n_modes {
                let hits = usize::from(m % y == k) + usize::from(m % y == y - k);
                if hits == 0 {
                    continue;
                }
                let s = sinc(from_usize::<T>(m) * self.delta() * half);
                let weight = match part {
                    FieldPart::Phi => T::one() / (self.omega(m) * self.omega(m)),
                    FieldPart::Chi => T::one(),
                };
                sum += weight * s * s * from_usize::<T>(hits);
            }
            b.push(pi_beta * sum);
        }
        b
    }

    /// `b` diagonal expanded over the packed data layout, `φ` block then `χ`.
    fn expanded_rphi_rt_diag(&self) -> Result<Vec<T>> {
        let mut out = Vec::with_capacity(self.data_dim());
        for part in [FieldPart::Phi, FieldPart::Chi] {
            let b = self.rphi_rt_diag(part);
            if let Some(k) = b.iter().position(|&v| !(v > T::zero())) {
                return Err(IfdError::invalid(format!(
                    "data mode {k} receives no signal mode (b_{k} = 0); raise n_modes to at least {}",
                    self.kmax() + 1
                )));
            }
            out.push(b[0]);
            for &v in &b[1..] {
                out.push(v);
                out.push(v);
            }
        }
        Ok(out)
    }

    /// Generator `M′_r` of the data update:
    /// `[𝟙 + σ² (RΦRᵀ)⁻¹] · R L Φ Rᵀ · (RΦRᵀ + σ²𝟙)⁻¹`, with both inverses
    /// taken from the analytic diagonal.
    pub fn update_generator(&self) -> Result<DMatrix<T>> {
        let b = self.expanded_rphi_rt_diag()?;
        let s2 = self.sigma_n2;
        let r = self.build_response();
        let phi = self.build_prior_cov()?;
        let core = &r * self.build_generator() * phi.matrix() * r.transpose();
        let left = DVector::from_iterator(b.len(), b.iter().map(|&v| T::one() + s2 / v));
        let right = DVector::from_iterator(b.len(), b.iter().map(|&v| T::one() / (v + s2)));
        Ok(DMatrix::from_fn(b.len(), b.len(), |i, j| {
            left[i] * core[(i, j)] * right[j]
        }))
    }

    /// Largest step with `dt² < ω_{n−1}⁻²`.
    pub fn max_step(&self) -> T {
        T::one() / self.omega(self.n_modes - 1)
    }

    /// `M_r = 𝟙 + dt M′_r`.
    pub fn build_update_matrix(&self, dt: T) -> Result<DMatrix<T>> {
        if !(dt >= T::zero()) {
            return Err(IfdError::invalid("time step must be non-negative"));
        }
        if dt >= self.max_step() {
            return Err(IfdError::StepTooLarge(format!(
                "dt = {} must be below 1/ω_(n-1) = {}",
                to_f64(dt),
                to_f64(self.max_step())
            )));
        }
        let n = self.data_dim();
        Ok(DMatrix::identity(n, n) + self.update_generator()? * dt)
    }

    /// `exp(T M′_r) d̂(0)`.
    pub fn direct_simulate(&self, d0: &DVector<T>, horizon: T) -> Result<DVector<T>> {
        self.check_data(d0)?;
        Ok(expm_general(&(self.update_generator()? * horizon))? * d0)
    }

    pub fn dft_data(&self, d: &DVector<T>) -> Result<DVector<T>> {
        dft_data(d, self.pixels, self.layout)
    }

    pub fn idft_data(&self, dhat: &DVector<T>) -> Result<DVector<T>> {
        idft_data(dhat, self.pixels, self.layout)
    }

    fn check_data(&self, d: &DVector<T>) -> Result<()> {
        if d.len() != self.data_dim() {
            return Err(IfdError::invalid(format!(
                "data vector has dim {}, model expects {}",
                d.len(),
                self.data_dim()
            )));
        }
        Ok(())
    }
}

fn lift<T: Real>(part: &DMatrix<T>) -> DMatrix<T> {
    let (r, c) = part.shape();
    let mut out = DMatrix::zeros(2 * r, 2 * c);
    out.view_mut((0, 0), (r, c)).copy_from(part);
    out.view_mut((r, c), (r, c)).copy_from(part);
    out
}

/// Packed real signal: `φ` then `χ`, each as mode 0 followed by
/// `(Re, Im)` of modes `1..n`.
#[derive(Clone, Debug, PartialEq)]
pub struct PackedField<T: Real> {
    values: DVector<T>,
    n_modes: usize,
}

impl<T: Real> PackedField<T> {
    pub fn from_vector(values: DVector<T>, n_modes: usize) -> Result<Self> {
        if n_modes < 1 || values.len() != 4 * n_modes - 2 {
            return Err(IfdError::invalid(format!(
                "packed field for {n_modes} modes needs {} values, got {}",
                (4 * n_modes).saturating_sub(2),
                values.len()
            )));
        }
        Ok(Self { values, n_modes })
    }

    /// Packs the non-negative modes `k = 0..n` of `φ̂` and `χ̂`. Negative
    /// modes follow from `f̂(−k) = conj(f̂(k))`, so mode 0 must be real.
    pub fn pack(phi: &[Complex<T>], chi: &[Complex<T>]) -> Result<Self> {
        let n = phi.len();
        if n == 0 || chi.len() != n {
            return Err(IfdError::invalid("phi and chi need the same, nonzero number of modes"));
        }
        if phi[0].im != T::zero() || chi[0].im != T::zero() {
            return Err(IfdError::invalid("mode 0 of a real field must be real"));
        }
        let p = 2 * n - 1;
        let mut values = DVector::zeros(2 * p);
        for (offset, modes) in [(0, phi), (p, chi)] {
            values[offset] = modes[0].re;
            for k in 1..n {
                values[offset + 2 * k - 1] = modes[k].re;
                values[offset + 2 * k] = modes[k].im;
            }
        }
        Ok(Self { values, n_modes: n })
    }

    /// Inverse of [`PackedField::pack`].
    pub fn unpack(&self) -> (Vec<Complex<T>>, Vec<Complex<T>>) {
        let n = self.n_modes;
        let p = 2 * n - 1;
        let part = |offset: usize| {
            let mut modes = vec![Complex::new(self.values[offset], T::zero())];
            for k in 1..n {
                modes.push(Complex::new(
                    self.values[offset + 2 * k - 1],
                    self.values[offset + 2 * k],
                ));
            }
            modes
        };
        (part(0), part(p))
    }

    /// All modes `k = −(n−1)..=(n−1)` of one part, index `k + n − 1`.
    pub fn full_modes(&self, part: FieldPart) -> Vec<Complex<T>> {
        let (phi, chi) = self.unpack();
        let half = match part {
            FieldPart::Phi => phi,
            FieldPart::Chi => chi,
        };
        let n = self.n_modes;
        (0..2 * n - 1)
            .map(|i| {
                if i + 1 >= n {
                    half[i + 1 - n]
                } else {
                    half[n - 1 - i].conj()
                }
            })
            .collect()
    }

    /// Field value `(1/2π) Σ_k e^{−ikx} f̂(k)` at position `x`.
    pub fn evaluate(&self, part: FieldPart, x: T) -> T {
        let n = self.n_modes as i64;
        let modes = self.full_modes(part);
        let mut sum = T::zero();
        for (i, z) in modes.iter().enumerate() {
            let k = lit::<T>((i as i64 - (n - 1)) as f64);
            let (s, c) = (k * x).sin_cos();
            // Re(e^{−ikx} z)
            sum += c * z.re + s * z.im;
        }
        sum / lit::<T>(2.0 * PI)
    }

    #[inline]
    pub fn values(&self) -> &DVector<T> {
        &self.values
    }

    #[inline]
    pub fn n_modes(&self) -> usize {
        self.n_modes
    }
}

/// Forward transform of pixel data `(d^φ_0..d^φ_{Y−1}, d^χ_0..d^χ_{Y−1})`
/// with `d̂_k = Σ_j Δ e^{ikjΔ} d_j`, packed per part as `d̂_0` then
/// `(Re, Im)` of `d̂_1..d̂_kmax`.
pub fn dft_data<T: Real>(d: &DVector<T>, pixels: usize, layout: DataLayout) -> Result<DVector<T>> {
    check_pixels(pixels)?;
    if d.len() != 2 * pixels {
        return Err(IfdError::invalid(format!(
            "pixel data for Y = {pixels} needs {} values, got {}",
            2 * pixels,
            d.len()
        )));
    }
    let delta = lit::<T>(2.0 * PI) / from_usize(pixels);
    let kmax = layout.kmax(pixels);
    let pd = layout.part_dim(pixels);
    let mut out = DVector::zeros(2 * pd);
    for part in 0..2 {
        for k in 0..=kmax {
            let (mut re, mut im) = (T::zero(), T::zero());
            for j in 0..pixels {
                let angle = from_usize::<T>((k * j) % pixels) * delta;
                let (s, c) = angle.sin_cos();
                let v = d[part * pixels + j];
                re += delta * c * v;
                im += delta * s * v;
            }
            if k == 0 {
                out[part * pd] = re;
            } else {
                out[part * pd + 2 * k - 1] = re;
                out[part * pd + 2 * k] = im;
            }
        }
    }
    Ok(out)
}

/// Inverse transform `d_j = (1/2π) Σ_{k<Y} e^{−ikjΔ} d̂_k`, with the modes
/// above `(Y−1)/2` reconstructed from `d̂_{Y−k} = conj(d̂_k)`.
pub fn idft_data<T: Real>(dhat: &DVector<T>, pixels: usize, layout: DataLayout) -> Result<DVector<T>> {
    check_pixels(pixels)?;
    let pd = layout.part_dim(pixels);
    if dhat.len() != 2 * pd {
        return Err(IfdError::invalid(format!(
            "packed data needs {} values, got {}",
            2 * pd,
            dhat.len()
        )));
    }
    let delta = lit::<T>(2.0 * PI) / from_usize(pixels);
    let half = (pixels - 1) / 2;
    let mut out = DVector::zeros(2 * pixels);
    for part in 0..2 {
        let base = part * pd;
        for j in 0..pixels {
            let mut v = dhat[base];
            for k in 1..=half {
                let angle = from_usize::<T>((k * j) % pixels) * delta;
                let (s, c) = angle.sin_cos();
                // e^{−ikjΔ} z + conj(·) = 2 Re(e^{−ikjΔ} z)
                v += lit::<T>(2.0) * (c * dhat[base + 2 * k - 1] + s * dhat[base + 2 * k]);
            }
            out[part * pixels + j] = v / lit::<T>(2.0 * PI);
        }
    }
    Ok(out)
}

/// The Klein-Gordon model with its posterior machinery precomputed.
#[derive(Clone, Debug)]
pub struct KgSystem<T: Real> {
    model: KgModel<T>,
    prior: GaussianDensity<T>,
    meas: LinearMeasurement<T>,
    post_cov: SymmetricMatrix<T>,
    filter: DMatrix<T>,
    generator: DMatrix<T>,
}

impl<T: Real> KgSystem<T> {
    pub fn new(model: KgModel<T>) -> Result<Self> {
        let prior = model.prior()?;
        let meas = model.measurement()?;
        let post_cov = posterior_covariance(&prior, &meas)?;
        let filter = post_cov.matrix() * meas.response().transpose() / model.sigma_n2();
        let generator = model.build_generator();
        Ok(Self {
            model,
            prior,
            meas,
            post_cov,
            filter,
            generator,
        })
    }

    #[inline]
    pub fn model(&self) -> &KgModel<T> {
        &self.model
    }

    #[inline]
    pub fn prior(&self) -> &GaussianDensity<T> {
        &self.prior
    }

    #[inline]
    pub fn measurement(&self) -> &LinearMeasurement<T> {
        &self.meas
    }

    /// Posterior covariance `D` (independent of the data).
    #[inline]
    pub fn posterior_cov(&self) -> &SymmetricMatrix<T> {
        &self.post_cov
    }

    /// Wiener filter `W = D Rᵀ N⁻¹`.
    #[inline]
    pub fn filter(&self) -> &DMatrix<T> {
        &self.filter
    }

    #[inline]
    pub fn generator(&self) -> &DMatrix<T> {
        &self.generator
    }

    /// Posterior for data `u`; the prior mean is zero, so `m = W u`.
    pub fn posterior(&self, u: &DVector<T>) -> Result<GaussianDensity<T>> {
        self.model.check_data(u)?;
        GaussianDensity::new(&self.filter * u, self.post_cov.clone())
    }

    pub fn dynamics(&self, dt: T) -> Result<AffineDynamics<T>> {
        AffineDynamics::linear(self.generator.clone(), dt)
    }

    /// Matching problem for one step from data `u`: evolved mean `G W u`,
    /// first-order evolved precision, unchanged prior and measurement.
    pub fn match_problem(&self, u: &DVector<T>, dt: T) -> Result<MatchProblem<T>> {
        let post = self.posterior(u)?;
        let dynamics = self.dynamics(dt)?;
        let m_star = dynamics.apply(post.mean())?;
        let inv_cov = approx_inv_cov(&self.post_cov, &dynamics)?;
        MatchProblem::new(m_star, inv_cov, self.prior.clone(), self.meas.clone())
    }

    pub fn match_step(&self, u: &DVector<T>, dt: T) -> Result<MatchResult<T>> {
        self.match_problem(u, dt)?.match_data()
    }

    /// Spectral condition number of `R Φ Rᵀ + N`.
    pub fn data_condition_number(&self) -> Result<T> {
        let r = self.meas.response();
        let s = SymmetricMatrix::new(
            r * self.prior.covariance().matrix() * r.transpose() + self.meas.noise_cov().matrix(),
        )?;
        let eig = spectral_decompose(&s)?;
        Ok(eig.max_eigenvalue() / eig.min_eigenvalue())
    }
}
