//! Entropic matching of data vectors.
//!
//! Given an evolved posterior `N(m*, D*)` and a new prior/measurement pair,
//! the new data vector `u′` is the one whose Wiener posterior
//! `N(c + W′u′, D′)` is closest in relative entropy to the evolved density.
//! Here `c = D′Φ′⁻¹ψ′ = ψ′ − W′R′ψ′`. In `u′` the relative entropy is the
//! convex quadratic `½ u′ᵀ H u′ − gᵀ u′ + const` with
//! `H = W′ᵀD*⁻¹W′` and `g = W′ᵀD*⁻¹(m* − c)`.

use nalgebra::{DMatrix, DVector};

use crate::error::{IfdError, Result};
use crate::gaussian::{kl_divergence_to_precision, posterior_covariance, GaussianDensity, LinearMeasurement};
use crate::matfun::{positive_definite_spectrum, spectral_decompose, SymmetricMatrix};
use crate::scalar::{lit, Real};

/// Relative eigenvalue threshold separating the range of `H` from its
/// nullspace.
pub const NULLSPACE_REL_TOL: f64 = 1e-10;

/// Which closed form produced the matched data vector.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    /// `H` positive definite; unique minimizer.
    Regular,
    /// `H` singular and the linear term vanishes; `u′ = 0`.
    Zero,
    /// `H` singular; minimal-norm minimizer on the range of `H`.
    Projected,
}

impl Branch {
    pub fn as_str(self) -> &'static str {
        match self {
            Branch::Regular => "regular",
            Branch::Zero => "zero",
            Branch::Projected => "projected",
        }
    }
}

impl std::fmt::Display for Branch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MatchResult<T: Real> {
    pub u: DVector<T>,
    pub branch: Branch,
}

/// Rows of `P` span the eigenvectors of `m` with `λ > rel_tol · λ_max`.
///
/// Returns `(P, rank)` with `P` of shape `rank × dim` and `P Pᵀ = 𝟙`.
pub fn nullspace_projector<T: Real>(m: &SymmetricMatrix<T>, rel_tol: T) -> Result<(DMatrix<T>, usize)> {
    let eig = spectral_decompose(m)?;
    let n = m.dim();
    let max = eig.max_eigenvalue();
    if max <= T::zero() {
        return Ok((DMatrix::zeros(0, n), 0));
    }
    let keep: Vec<usize> = (0..n).filter(|&k| eig.eigenvalues[k] > rel_tol * max).collect();
    let mut p = DMatrix::zeros(keep.len(), n);
    for (row, &k) in keep.iter().enumerate() {
        p.set_row(row, &eig.eigenvectors.column(k).transpose());
    }
    Ok((p, keep.len()))
}

/// The matching problem with all `u′`-independent quantities precomputed.
#[derive(Clone, Debug)]
pub struct MatchProblem<T: Real> {
    evolved_mean: DVector<T>,
    evolved_inv_cov: SymmetricMatrix<T>,
    new_prior: GaussianDensity<T>,
    new_meas: LinearMeasurement<T>,
    filter: DMatrix<T>,
    new_cov: SymmetricMatrix<T>,
    offset: DVector<T>,
    hessian: SymmetricMatrix<T>,
    linear: DVector<T>,
    weighted_filter_t: DMatrix<T>,
}

impl<T: Real> MatchProblem<T> {
    pub fn new(
        evolved_mean: DVector<T>,
        evolved_inv_cov: SymmetricMatrix<T>,
        new_prior: GaussianDensity<T>,
        new_meas: LinearMeasurement<T>,
    ) -> Result<Self> {
        let n = evolved_mean.len();
        if evolved_inv_cov.dim() != n || new_prior.dim() != n || new_meas.signal_dim() != n {
            return Err(IfdError::invalid(format!(
                "match problem dimensions disagree: mean {}, inverse covariance {}, prior {}, response columns {}",
                n,
                evolved_inv_cov.dim(),
                new_prior.dim(),
                new_meas.signal_dim()
            )));
        }
        positive_definite_spectrum(&evolved_inv_cov)?;

        let new_cov = posterior_covariance(&new_prior, &new_meas)?;
        let n_inv = new_meas.noise_cov().inverse_spd()?;
        let filter = new_cov.matrix() * new_meas.response().transpose() * n_inv.matrix();
        let offset = new_cov.matrix() * new_prior.precision()?.matrix() * new_prior.mean();
        let weighted_filter_t = filter.transpose() * evolved_inv_cov.matrix();
        let hessian = SymmetricMatrix::new(&weighted_filter_t * &filter)?;
        let linear = &weighted_filter_t * (&evolved_mean - &offset);
        Ok(Self {
            evolved_mean,
            evolved_inv_cov,
            new_prior,
            new_meas,
            filter,
            new_cov,
            offset,
            hessian,
            linear,
            weighted_filter_t,
        })
    }

    #[inline]
    pub fn data_dim(&self) -> usize {
        self.new_meas.data_dim()
    }

    /// `W′`.
    #[inline]
    pub fn filter(&self) -> &DMatrix<T> {
        &self.filter
    }

    /// Structural posterior covariance `D′ = (Φ′⁻¹ + R′ᵀN′⁻¹R′)⁻¹`.
    #[inline]
    pub fn new_covariance(&self) -> &SymmetricMatrix<T> {
        &self.new_cov
    }

    /// `H = W′ᵀD*⁻¹W′`.
    #[inline]
    pub fn hessian(&self) -> &SymmetricMatrix<T> {
        &self.hessian
    }

    /// `g = W′ᵀD*⁻¹(m* − D′Φ′⁻¹ψ′)`.
    #[inline]
    pub fn linear_term(&self) -> &DVector<T> {
        &self.linear
    }

    #[inline]
    pub fn evolved_mean(&self) -> &DVector<T> {
        &self.evolved_mean
    }

    #[inline]
    pub fn evolved_inv_cov(&self) -> &SymmetricMatrix<T> {
        &self.evolved_inv_cov
    }

    fn check_data(&self, u: &DVector<T>) -> Result<()> {
        if u.len() != self.data_dim() {
            return Err(IfdError::invalid(format!(
                "data vector has dim {}, new measurement produces {}",
                u.len(),
                self.data_dim()
            )));
        }
        Ok(())
    }

    /// Posterior mean `m′(u′)` of the new model.
    pub fn new_mean(&self, u: &DVector<T>) -> Result<DVector<T>> {
        self.check_data(u)?;
        Ok(&self.offset + &self.filter * u)
    }

    /// Full relative entropy `KL(N(m′(u′), D′) ‖ N(m*, D*))`.
    pub fn objective(&self, u: &DVector<T>) -> Result<T> {
        let p = GaussianDensity::new(self.new_mean(u)?, self.new_cov.clone())?;
        kl_divergence_to_precision(&p, &self.evolved_mean, &self.evolved_inv_cov)
    }

    /// The `u′`-dependent part `½ u′ᵀHu′ − gᵀu′` of the objective.
    pub fn quadratic(&self, u: &DVector<T>) -> Result<T> {
        self.check_data(u)?;
        Ok(lit::<T>(0.5) * u.dot(&(self.hessian.matrix() * u)) - self.linear.dot(u))
    }

    /// `H u′ − g`.
    pub fn gradient(&self, u: &DVector<T>) -> Result<DVector<T>> {
        self.check_data(u)?;
        Ok(self.hessian.matrix() * u - &self.linear)
    }

    /// Closed-form minimizer of the objective.
    pub fn match_data(&self) -> Result<MatchResult<T>> {
        let (p, rank) = nullspace_projector(&self.hessian, lit(NULLSPACE_REL_TOL))?;
        let dim = self.data_dim();
        if rank == dim {
            let psi = self.new_prior.mean();
            let rhs = &self.weighted_filter_t * (&self.evolved_mean - psi);
            let solved = self
                .hessian
                .matrix()
                .clone()
                .cholesky()
                .map(|c| c.solve(&rhs))
                .ok_or_else(|| IfdError::NotPositiveDefinite {
                    min_eigenvalue: f64::NAN,
                    max_eigenvalue: f64::NAN,
                })?;
            let u = solved + self.new_meas.response() * psi;
            return Ok(MatchResult {
                u,
                branch: Branch::Regular,
            });
        }

        let g_norm = self.linear.norm();
        let scale = self.weighted_filter_t.norm() * (&self.evolved_mean - &self.offset).norm();
        if rank == 0 || g_norm <= lit::<T>(NULLSPACE_REL_TOL) * scale {
            return Ok(MatchResult {
                u: DVector::zeros(dim),
                branch: Branch::Zero,
            });
        }

        let reduced = SymmetricMatrix::new(&p * self.hessian.matrix() * p.transpose())?;
        let coeffs = reduced.inverse_spd()?.matrix() * (&p * &self.linear);
        Ok(MatchResult {
            u: p.transpose() * coeffs,
            branch: Branch::Projected,
        })
    }
}
