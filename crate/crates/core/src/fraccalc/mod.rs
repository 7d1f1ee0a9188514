//! Riemann-Liouville fractional calculus on graded grids.
//!
//! Orders are restricted to `0 < alpha < 1`. All operators integrate the
//! piecewise-linear interpolant of the samples exactly against the weakly
//! singular kernel (product integration); grids are graded toward both
//! endpoints to recover convergence for functions with endpoint power
//! behaviour.

mod gamma;
mod grid;
pub(crate) mod quad;
mod ops;

pub use gamma::gamma;
pub(crate) use gamma::{gamma_unchecked, recip_gamma};
pub use grid::{
    EndpointLimit, EndpointSide, FracOrder, Grid, GridFunction, SingularTerm, MIN_CELLS,
};
pub use ops::{
    endpoint_trace, frac_deriv_left, frac_deriv_left_definition, frac_deriv_right,
    frac_integral_left, frac_integral_right,
};
pub(crate) use ops::{deriv_left_assemble, split_origin_terms};
