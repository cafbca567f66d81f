//! Independent reference computations shared by the integration suites.
//! Nothing here calls into the library's inference routines.

#![allow(dead_code)]

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

pub fn random_spd<R: Rng>(rng: &mut R, n: usize, floor: f64) -> DMatrix<f64> {
    let a = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
    &a * a.transpose() + DMatrix::identity(n, n) * floor
}

pub fn random_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.random_range(-1.0..1.0))
}

pub fn random_vector<R: Rng>(rng: &mut R, n: usize) -> DVector<f64> {
    DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0))
}

pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0, |a, x| a.max(x.abs()))
}

/// Gaussian log density through a Cholesky factor.
pub fn gauss_log_pdf(x: &DVector<f64>, mean: &DVector<f64>, cov: &DMatrix<f64>) -> f64 {
    let chol = cov.clone().cholesky().expect("covariance must be SPD");
    let l = chol.l();
    let z = l.solve_lower_triangular(&(x - mean)).unwrap();
    let log_det: f64 = 2.0 * l.diagonal().iter().map(|v| v.ln()).sum::<f64>();
    -0.5 * (z.norm_squared() + log_det + x.len() as f64 * (2.0 * PI).ln())
}

pub fn cholesky_sample<R: Rng>(rng: &mut R, mean: &DVector<f64>, cov: &DMatrix<f64>) -> DVector<f64> {
    let l = cov.clone().cholesky().unwrap().l();
    let z = DVector::from_fn(mean.len(), |_, _| rng.sample::<f64, _>(StandardNormal));
    mean + l * z
}

/// Closed-form Gaussian KL written directly from the Gaussian integral.
pub fn kl_reference(m1: &DVector<f64>, s1: &DMatrix<f64>, m2: &DVector<f64>, s2: &DMatrix<f64>) -> f64 {
    let s2_inv = s2.clone().try_inverse().unwrap();
    let dm = m2 - m1;
    let n = m1.len() as f64;
    0.5 * ((&s2_inv * s1).trace() + (dm.transpose() * &s2_inv * &dm)[(0, 0)] - n + s2.determinant().ln()
        - s1.determinant().ln())
}

/// Minimizes the convex quadratic `½uᵀHu − gᵀu` by conjugate gradients
/// restarted from the current iterate until the gradient norm drops below
/// `tol`.
pub fn cg_minimize(h: &DMatrix<f64>, g: &DVector<f64>, mut u: DVector<f64>, tol: f64, max_iter: usize) -> DVector<f64> {
    let n = u.len();
    let mut r = g - h * &u;
    let mut p = r.clone();
    for it in 0..max_iter {
        if r.norm() < tol {
            break;
        }
        if it % n == 0 {
            r = g - h * &u;
            p = r.clone();
        }
        let hp = h * &p;
        let curvature = p.dot(&hp);
        if curvature <= 0.0 {
            break;
        }
        let alpha = r.norm_squared() / curvature;
        u += &p * alpha;
        let r_next = &r - hp * alpha;
        let beta = r_next.norm_squared() / r.norm_squared();
        p = &r_next + p * beta;
        r = r_next;
    }
    u
}

/// Moore-Penrose pseudo-inverse of a symmetric matrix by eigen-decomposition.
pub fn pinv_sym(h: &DMatrix<f64>, rel_tol: f64) -> DMatrix<f64> {
    let eig = h.clone().symmetric_eigen();
    let cut = rel_tol * eig.eigenvalues.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let inv = eig.eigenvalues.map(|v| if v.abs() > cut { 1.0 / v } else { 0.0 });
    &eig.eigenvectors * DMatrix::from_diagonal(&inv) * eig.eigenvectors.transpose()
}

/// Least-squares slope of `log y` against `log x`.
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let num: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    num / den
}

/// Composite trapezoid weights for `points` nodes on `[a, b]`.
pub fn trapezoid_nodes(a: f64, b: f64, points: usize) -> Vec<(f64, f64)> {
    let h = (b - a) / (points - 1) as f64;
    (0..points)
        .map(|i| {
            let w = if i == 0 || i == points - 1 { 0.5 * h } else { h };
            (a + i as f64 * h, w)
        })
        .collect()
}
