//! Numerical toolkit for non-equilibrium thermodynamics built on stochastic
//! measures and modular evolution.
//!
//! The crate provides:
//!
//! * [`measures`] — the family of memory kernels `W(t - t')` with their
//!   characteristic stochastic times and asymptotic amplitudes,
//! * [`sdd`] — discretized systems of density distributions with their
//!   consistency conditions, statistical correlation functions and the
//!   truncated inverse series,
//! * [`modular`] — finite-dimensional Gibbs states, entropy, Heisenberg
//!   evolution and a numerical KMS residual,
//! * [`scaling`] — the uniparametric state-space scaling map, coarse
//!   graining and weak-convergence diagnostics,
//! * [`stochastic`] — seeded Ornstein-Uhlenbeck simulation, empirical
//!   autocorrelation and the coupled constitutive solver,
//! * [`response`] — linear response with memory, its Markovian limit and the
//!   hyperbolic (Maxwell-Cattaneo-Vernotte) residual check,
//! * [`correlations`] — two-time correlation functions, the binary-mixture
//!   amplitudes and the van Hove asymptote,
//! * [`hysteresis`] — loop areas under cyclic driving and the relaxation
//!   time / stochastic time coupling criterion.

pub mod error;
pub mod field;
pub mod numeric;

pub mod correlations;
pub mod hysteresis;
pub mod measures;
pub mod modular;
pub mod response;
pub mod scaling;
pub mod sdd;
pub mod stochastic;

pub use error::{Error, Result};
pub use field::Field;
pub use measures::{KernelKind, MemoryKernel};
pub use stochastic::SampledPath;
