//! Linearized one-step evolution `x ↦ (𝟙 + δt L) x + δt c` and its action on
//! Gaussian posteriors.

use nalgebra::{DMatrix, DVector};

use crate::error::{IfdError, Result};
use crate::gaussian::GaussianDensity;
use crate::matfun::{neumann_inverse, positive_definite_spectrum, spectral_norm, NeumannInverse, SymmetricMatrix};
use crate::scalar::{to_f64, Real};

/// Affine step with generator `L`, drift `c` and step size `δt`.
///
/// Construction enforces `‖δt L‖ < 1` (spectral norm), which keeps
/// `𝟙 + δt L` invertible.
#[derive(Clone, Debug, PartialEq)]
pub struct AffineDynamics<T: Real> {
    generator: DMatrix<T>,
    drift: DVector<T>,
    dt: T,
}

impl<T: Real> AffineDynamics<T> {
    pub fn new(generator: DMatrix<T>, drift: DVector<T>, dt: T) -> Result<Self> {
        if !generator.is_square() {
            return Err(IfdError::invalid("generator must be square"));
        }
        if drift.len() != generator.nrows() {
            return Err(IfdError::invalid(format!(
                "drift has dim {}, generator is {}x{}",
                drift.len(),
                generator.nrows(),
                generator.ncols()
            )));
        }
        if !dt.is_finite() || dt < T::zero() {
            return Err(IfdError::invalid("time step must be finite and non-negative"));
        }
        let norm = spectral_norm(&generator) * dt;
        if norm >= T::one() {
            return Err(IfdError::StepTooLarge(format!(
                "‖δt·L‖ = {} must be below 1",
                to_f64(norm)
            )));
        }
        Ok(Self { generator, drift, dt })
    }

    /// Homogeneous dynamics (zero drift).
    pub fn linear(generator: DMatrix<T>, dt: T) -> Result<Self> {
        let n = generator.nrows();
        Self::new(generator, DVector::zeros(n), dt)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.drift.len()
    }

    #[inline]
    pub fn generator(&self) -> &DMatrix<T> {
        &self.generator
    }

    #[inline]
    pub fn drift(&self) -> &DVector<T> {
        &self.drift
    }

    #[inline]
    pub fn dt(&self) -> T {
        self.dt
    }

    /// `G = 𝟙 + δt L`.
    pub fn step_matrix(&self) -> DMatrix<T> {
        let n = self.dim();
        DMatrix::identity(n, n) + &self.generator * self.dt
    }

    pub fn apply(&self, x: &DVector<T>) -> Result<DVector<T>> {
        self.check_dim(x.len())?;
        Ok(self.step_matrix() * x + &self.drift * self.dt)
    }

    /// `g⁻¹(y) = G⁻¹ (y − δt c)` by dense LU solve.
    pub fn apply_inverse(&self, y: &DVector<T>) -> Result<DVector<T>> {
        self.check_dim(y.len())?;
        let rhs = y - &self.drift * self.dt;
        self.step_matrix()
            .lu()
            .solve(&rhs)
            .ok_or_else(|| IfdError::StepTooLarge("step matrix is singular".into()))
    }

    /// Truncated Neumann series for `G⁻¹ = (𝟙 + δt L)⁻¹`.
    pub fn neumann_step_inverse(&self, order: usize) -> Result<NeumannInverse<T>> {
        neumann_inverse(&(&self.generator * self.dt), order)
    }

    fn check_dim(&self, n: usize) -> Result<()> {
        if n != self.dim() {
            return Err(IfdError::invalid(format!(
                "vector has dim {}, dynamics acts on dim {}",
                n,
                self.dim()
            )));
        }
        Ok(())
    }
}

/// Pushes `N(m, D)` through the affine step: `N(G m + δt c, G D Gᵀ)`.
pub fn push_forward<T: Real>(post: &GaussianDensity<T>, dynamics: &AffineDynamics<T>) -> Result<GaussianDensity<T>> {
    let mean = dynamics.apply(post.mean())?;
    let g = dynamics.step_matrix();
    let cov = SymmetricMatrix::new(&g * post.covariance().matrix() * g.transpose())?;
    GaussianDensity::new(mean, cov)
}

/// `D + δt (L D + D Lᵀ) + δt² L D Lᵀ`.
pub fn push_forward_covariance_expanded<T: Real>(
    cov: &SymmetricMatrix<T>,
    dynamics: &AffineDynamics<T>,
) -> Result<SymmetricMatrix<T>> {
    dynamics.check_dim(cov.dim())?;
    let l = dynamics.generator();
    let d = cov.matrix();
    let dt = dynamics.dt();
    let ld = l * d;
    let first = &ld + ld.transpose();
    let second = &ld * l.transpose();
    SymmetricMatrix::new(d + first * dt + second * (dt * dt))
}

/// First-order inverse covariance `D⁻¹ − δt (D⁻¹ L + Lᵀ D⁻¹)` of the evolved
/// density.
pub fn approx_inv_cov<T: Real>(cov: &SymmetricMatrix<T>, dynamics: &AffineDynamics<T>) -> Result<SymmetricMatrix<T>> {
    dynamics.check_dim(cov.dim())?;
    let d_inv = cov.inverse_spd()?;
    let dl = d_inv.matrix() * dynamics.generator();
    let approx = SymmetricMatrix::new(d_inv.matrix() - (&dl + dl.transpose()) * dynamics.dt())?;
    match positive_definite_spectrum(&approx) {
        Ok(_) => Ok(approx),
        Err(IfdError::NotPositiveDefinite { min_eigenvalue, .. }) => Err(IfdError::StepTooLarge(format!(
            "approximate inverse covariance lost definiteness (min eigenvalue {min_eigenvalue})"
        ))),
        Err(e) => Err(e),
    }
}

/// Exact `(G D Gᵀ)⁻¹`.
pub fn exact_inv_cov<T: Real>(cov: &SymmetricMatrix<T>, dynamics: &AffineDynamics<T>) -> Result<SymmetricMatrix<T>> {
    dynamics.check_dim(cov.dim())?;
    let g = dynamics.step_matrix();
    SymmetricMatrix::new(&g * cov.matrix() * g.transpose())?.inverse_spd()
}

/// `det(𝟙 + δt L)`, the Jacobian determinant of the forward step.
pub fn jacobian_det<T: Real>(dynamics: &AffineDynamics<T>) -> T {
    dynamics.step_matrix().determinant()
}

/// `det(𝟙 + δt L)⁻¹ = 1 − δt Tr L + O(δt²)`, the Jacobian of the inverse step.
pub fn inverse_jacobian_det<T: Real>(dynamics: &AffineDynamics<T>) -> T {
    T::one() / jacobian_det(dynamics)
}
