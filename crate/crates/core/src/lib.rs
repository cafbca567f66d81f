//! Information field dynamics.
//!
//! A data vector `d` measured at one time is evolved to a later time by
//! Bayesian reasoning on Gaussian densities:
//!
//! 1. the generalized Wiener filter turns prior + linear measurement + data
//!    into a Gaussian posterior ([`gaussian`]);
//! 2. a linearized affine step pushes that posterior forward ([`dynamics`]);
//! 3. entropic matching picks the new data vector whose posterior is closest
//!    in relative entropy to the evolved one ([`matching`]).
//!
//! [`kleingordon`] builds every matrix of the periodic 1-D Klein-Gordon
//! instance together with its exact solution, and [`simulator`] runs the
//! resulting data-update loop, the exact reference and convergence sweeps.
//!
//! The numerical core is generic over the scalar type ([`Real`]); the
//! aliases below fix it to `f64`, which is what the simulator uses.

pub mod dynamics;
pub mod error;
pub mod gaussian;
pub mod kleingordon;
pub mod matching;
pub mod matfun;
pub mod scalar;
pub mod simulator;

pub use error::{IfdError, Result};
pub use scalar::Real;

pub type SymmetricMatrixF64 = matfun::SymmetricMatrix<f64>;
pub type GaussianDensityF64 = gaussian::GaussianDensity<f64>;
pub type LinearMeasurementF64 = gaussian::LinearMeasurement<f64>;
pub type AffineDynamicsF64 = dynamics::AffineDynamics<f64>;
pub type MatchProblemF64 = matching::MatchProblem<f64>;
pub type KgModelF64 = kleingordon::KgModel<f64>;
pub type KgSystemF64 = kleingordon::KgSystem<f64>;

pub type SymmetricMatrixF32 = matfun::SymmetricMatrix<f32>;
pub type GaussianDensityF32 = gaussian::GaussianDensity<f32>;
