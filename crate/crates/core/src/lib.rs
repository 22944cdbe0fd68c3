//! Certified bounds on the critical drift of the frog model on `d`-ary trees.
//!
//! The pipeline is exact-in, certified-out: drift parameters are exact
//! rationals, the activation-count distribution and the recurrence functional
//! are assembled with exact coefficients, and the final inequality
//! `sup g < 1` is verified with outward-rounded interval arithmetic.
//!
//! Numeric (non-certified) routines are generic over [`Real`] so they run in
//! `f32` or `f64`; the certified routines use [`Interval`].

pub mod certify;
pub mod error;
pub mod genfun;
pub mod interval;
pub mod jet;
pub mod numeric;
pub mod params;
pub mod scalar;
pub mod search;
pub mod serde_util;
pub mod sim;
pub mod u_dist;

pub use error::{Error, Result};
pub use interval::{exp_enclosure, Dyadic, Interval, Round};
pub use params::{derive_params, DriftParams};
pub use scalar::{Numeric, Real};

/// Exact rational with arbitrary-precision numerator and denominator.
pub type Rational = num_rational::BigRational;

/// Activation-count distribution evaluated in double precision.
pub type UPmf64 = u_dist::UPmf<f64>;

/// Numeric drift parameters in double precision.
pub type NumParams64 = numeric::NumParams<f64>;

/// Library version, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
