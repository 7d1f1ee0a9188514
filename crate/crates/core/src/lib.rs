//! Fractional differential operators on metric graphs.
//!
//! The crate assembles four layers:
//!
//! - [`fraccalc`]: left/right Riemann-Liouville fractional integrals and
//!   derivatives of order `0 < alpha < 1` on sampled functions, computed by
//!   product integration that treats the weak kernel singularity exactly.
//! - [`mittag`]: two-parameter Mittag-Leffler function `E_{alpha,beta}(z)`.
//! - [`graphmodel`]: metric graphs (star, tree, loop), vertex conditions
//!   (weighted continuity + fractional flux, Dirichlet) and graph functions.
//! - [`operator`] / [`eigensolver`]: the per-edge operator
//!   `D_{0+}^alpha + D_{l-}^alpha`, its skew-Hermitian form, numerical
//!   self-adjointness verification, and construction/validation of the
//!   closed-form eigensolutions together with an independent Volterra
//!   iteration path.
//!
//! All values are immutable after construction and every operation is a pure
//! function of its inputs, so everything can be called concurrently. With the
//! default `parallel` feature the quadrature inner loops and verification
//! trials run on rayon; disabling the feature selects a sequential fallback
//! with bit-identical results.

pub mod eigensolver;
mod error;
pub mod fraccalc;
pub mod graphmodel;
pub mod mittag;
pub mod operator;
pub(crate) mod parallel;

pub use error::Error;
pub use num_complex::Complex64;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
