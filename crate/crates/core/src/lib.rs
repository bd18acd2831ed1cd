//! An exact computational-algebra workbench: finite-group cohomology with
//! Z/N coefficients (Schur multipliers, obstruction classes), exact
//! cyclotomic linear algebra, and an equivariant kernel calculus on finite
//! G-sets (linearisations, inflation, invariant push-forward, convolution).
//!
//! Everything is computed over exact arithmetic: rationals inside Q(zeta_N)
//! for fiberwise data, integers and Z/N for cohomology. No floating point
//! anywhere.
//!
//! The model category replaces a variety by a finite G-set carrying a vector
//! space over Q(zeta_N) at each point. All functors are exact, which makes
//! the usual derived-category operations (pullback, push-forward, kernel
//! convolution) literal finite linear algebra. The documented deviations of
//! this finite model from the geometric setting are listed in the scenario
//! reports.


pub mod autgroups;
pub mod cohomology;
pub mod cyclotomic;
pub mod equivariance;
pub mod error;
pub mod group;
pub mod gset;
pub mod io;
pub mod report;
pub mod zmod;

pub use error::{Error, Result};
