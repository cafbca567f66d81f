//! Spectral functional calculus for real symmetric matrices.
//!
//! Every covariance manipulation in the crate (inverse, square root,
//! logarithm, log-determinant) goes through one eigendecomposition path:
//! `f(A) = Q diag(f(λ)) Qᵀ`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{IfdError, Result};
use crate::scalar::{lit, to_f64, Real};

/// Relative threshold of the positive-definiteness test: the smallest
/// eigenvalue must exceed this fraction of the largest.
pub const PD_REL_TOL: f64 = 1e-12;

/// A dense real matrix that is exactly symmetric.
///
/// Construction symmetrizes the input as `(M + Mᵀ)/2`, so round-off drift in
/// computed covariances never leaks into downstream decompositions.
#[derive(Clone, Debug, PartialEq)]
pub struct SymmetricMatrix<T: Real> {
    entries: DMatrix<T>,
}

impl<T: Real> SymmetricMatrix<T> {
    pub fn new(m: DMatrix<T>) -> Result<Self> {
        if !m.is_square() {
            return Err(IfdError::invalid(format!(
                "symmetric matrix must be square, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        if m.nrows() == 0 {
            return Err(IfdError::invalid("symmetric matrix must have dim >= 1"));
        }
        if m.iter().any(|x| !x.is_finite()) {
            return Err(IfdError::invalid("matrix has non-finite entries"));
        }
        Ok(Self {
            entries: symmetrize(&m),
        })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            entries: DMatrix::identity(dim, dim),
        }
    }

    pub fn from_diagonal(diag: &DVector<T>) -> Result<Self> {
        Self::new(DMatrix::from_diagonal(diag))
    }

    pub fn from_diagonal_slice(diag: &[T]) -> Result<Self> {
        Self::from_diagonal(&DVector::from_column_slice(diag))
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    #[inline]
    pub fn matrix(&self) -> &DMatrix<T> {
        &self.entries
    }

    pub fn into_matrix(self) -> DMatrix<T> {
        self.entries
    }

    pub fn scale(&self, factor: T) -> Self {
        Self {
            entries: &self.entries * factor,
        }
    }

    /// Exact inverse through the spectral path; fails unless positive definite.
    pub fn inverse_spd(&self) -> Result<Self> {
        let eig = positive_definite_spectrum(self)?;
        Ok(eig.rebuild(|l| T::one() / l))
    }
}

/// `(M + Mᵀ)/2`.
pub fn symmetrize<T: Real>(m: &DMatrix<T>) -> DMatrix<T> {
    (m + m.transpose()) * lit::<T>(0.5)
}

/// Eigenvalues in ascending order with the matching orthonormal eigenvectors
/// stored column-wise.
#[derive(Clone, Debug)]
pub struct SpectralDecomposition<T: Real> {
    pub eigenvalues: DVector<T>,
    pub eigenvectors: DMatrix<T>,
}

impl<T: Real> SpectralDecomposition<T> {
    pub fn min_eigenvalue(&self) -> T {
        self.eigenvalues[0]
    }

    pub fn max_eigenvalue(&self) -> T {
        self.eigenvalues[self.eigenvalues.len() - 1]
    }

    /// `Q diag(f(λ)) Qᵀ`, symmetrized.
    pub fn rebuild(&self, f: impl Fn(T) -> T) -> SymmetricMatrix<T> {
        let q = &self.eigenvectors;
        let fl = self.eigenvalues.map(f);
        let mut scaled = q.clone();
        for (j, mut col) in scaled.column_iter_mut().enumerate() {
            col *= fl[j];
        }
        SymmetricMatrix {
            entries: symmetrize(&(scaled * q.transpose())),
        }
    }

    fn is_positive_definite(&self) -> bool {
        let max = self.max_eigenvalue();
        max > T::zero() && self.min_eigenvalue() > lit::<T>(PD_REL_TOL) * max
    }
}

pub fn spectral_decompose<T: Real>(a: &SymmetricMatrix<T>) -> Result<SpectralDecomposition<T>> {
    if a.entries.iter().any(|x| !x.is_finite()) {
        return Err(IfdError::invalid("matrix has non-finite entries"));
    }
    let eig = SymmetricEigen::new(a.entries.clone());
    let n = a.dim();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        eig.eigenvalues[i]
            .partial_cmp(&eig.eigenvalues[j])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let eigenvalues = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let mut eigenvectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        eigenvectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    Ok(SpectralDecomposition {
        eigenvalues,
        eigenvectors,
    })
}

/// Applies a scalar function through the spectrum. `f` returns `None` where
/// it is undefined; the first such eigenvalue is reported in the error.
pub fn apply_spectral_function<T, F>(a: &SymmetricMatrix<T>, name: &'static str, f: F) -> Result<SymmetricMatrix<T>>
where
    T: Real,
    F: Fn(T) -> Option<T>,
{
    let eig = spectral_decompose(a)?;
    let mut values = Vec::with_capacity(a.dim());
    for &l in eig.eigenvalues.iter() {
        match f(l) {
            Some(v) if v.is_finite() => values.push(v),
            _ => {
                return Err(IfdError::Domain {
                    function: name,
                    eigenvalue: to_f64(l),
                })
            }
        }
    }
    let mapped = SpectralDecomposition {
        eigenvalues: DVector::from_vec(values),
        eigenvectors: eig.eigenvectors,
    };
    Ok(mapped.rebuild(|v| v))
}

pub fn expm<T: Real>(a: &SymmetricMatrix<T>) -> Result<SymmetricMatrix<T>> {
    apply_spectral_function(a, "exp", |l| Some(l.exp()))
}

pub fn logm<T: Real>(a: &SymmetricMatrix<T>) -> Result<SymmetricMatrix<T>> {
    apply_spectral_function(a, "log", |l| (l > T::zero()).then(|| l.ln()))
}

pub fn sqrtm<T: Real>(a: &SymmetricMatrix<T>) -> Result<SymmetricMatrix<T>> {
    apply_spectral_function(a, "sqrt", |l| (l >= T::zero()).then(|| l.sqrt()))
}

pub fn inv_sqrtm<T: Real>(a: &SymmetricMatrix<T>) -> Result<SymmetricMatrix<T>> {
    apply_spectral_function(a, "inverse square root", |l| {
        (l > T::zero()).then(|| T::one() / l.sqrt())
    })
}

/// Decomposes `a` and verifies the scale-invariant positive-definiteness test.
pub fn positive_definite_spectrum<T: Real>(a: &SymmetricMatrix<T>) -> Result<SpectralDecomposition<T>> {
    let eig = spectral_decompose(a)?;
    if eig.is_positive_definite() {
        Ok(eig)
    } else {
        Err(IfdError::NotPositiveDefinite {
            min_eigenvalue: to_f64(eig.min_eigenvalue()),
            max_eigenvalue: to_f64(eig.max_eigenvalue()),
        })
    }
}

pub fn is_positive_definite<T: Real>(a: &SymmetricMatrix<T>) -> bool {
    spectral_decompose(a).map(|e| e.is_positive_definite()).unwrap_or(false)
}

/// `log det A = Σ log λ_k` for positive definite `A`.
pub fn log_det_spd<T: Real>(a: &SymmetricMatrix<T>) -> Result<T> {
    let eig = positive_definite_spectrum(a)?;
    Ok(eig.eigenvalues.iter().fold(T::zero(), |acc, &l| acc + l.ln()))
}

/// Largest singular value.
pub fn spectral_norm<T: Real>(m: &DMatrix<T>) -> T {
    if m.is_empty() {
        return T::zero();
    }
    m.clone().singular_values().iter().fold(T::zero(), |acc, &s| acc.max(s))
}

/// Truncated Neumann series for `(𝟙 + M)⁻¹` together with its a-priori
/// truncation bound `‖M‖^{order+1} / (1 − ‖M‖)`.
#[derive(Clone, Debug)]
pub struct NeumannInverse<T: Real> {
    pub inverse: DMatrix<T>,
    pub norm: T,
    pub error_bound: T,
}

pub fn neumann_inverse<T: Real>(m: &DMatrix<T>, order: usize) -> Result<NeumannInverse<T>> {
    if !m.is_square() {
        return Err(IfdError::invalid("Neumann series needs a square matrix"));
    }
    let norm = spectral_norm(m);
    if norm >= T::one() {
        return Err(IfdError::SeriesDiverges { norm: to_f64(norm) });
    }
    let n = m.nrows();
    let neg = -m;
    let mut term = DMatrix::<T>::identity(n, n);
    let mut sum = term.clone();
    for _ in 0..order {
        term = &term * &neg;
        sum += &term;
    }
    let error_bound = norm.powi(order as i32 + 1) / (T::one() - norm);
    Ok(NeumannInverse {
        inverse: sum,
        norm,
        error_bound,
    })
}

/// Matrix exponential of a general (not necessarily symmetric) square
/// matrix, by Padé approximation with scaling and squaring.
pub fn expm_general<T: Real>(m: &DMatrix<T>) -> Result<DMatrix<T>> {
    if !m.is_square() {
        return Err(IfdError::invalid("matrix exponential needs a square matrix"));
    }
    if m.iter().any(|x| !x.is_finite()) {
        return Err(IfdError::invalid("matrix has non-finite entries"));
    }
    if m.nrows() == 0 {
        return Ok(m.clone());
    }
    Ok(m.exp())
}
