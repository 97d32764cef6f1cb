//! Exact remote sampling of discrete distributions whose parameters are held
//! by remote custodians, with a leader that samples by approximate rejection
//! and meters every communicated bit.
//!
//! The crate is layered bottom-up:
//!
//! - [`dyadic`]: exact binary fixed-point arithmetic and the truncation algebra.
//! - [`quantum`]: density matrices, POVMs, and the Born-rule oracle.
//! - [`approx`]: certified probability approximations and the proposal `q`.
//! - [`randomness`]: counted bit sources, lazy uniforms, Knuth–Yao sampling.
//! - [`sampler`]: the rejection state machines (uniform and random-bit models).
//! - [`protocol`]: leader and custodian roles, wire format, bit meter.
//!
//! Matrix code is generic over [`Scalar`]; the aliases below fix the common
//! instantiations.

pub mod approx;
pub mod dyadic;
pub mod protocol;
pub mod quantum;
pub mod randomness;
pub mod sampler;
pub mod scalar;

pub use dyadic::{CDyadic, Dyadic, Precision};
pub use scalar::{Complex, Scalar};

/// Exact quantum model with dyadic entries.
pub type ExactModel = quantum::Model<Dyadic>;
/// Floating-point quantum model, for diagnostics only.
pub type FloatModel = quantum::Model<f64>;
/// Single-precision model.
pub type Float32Model = quantum::Model<f32>;
/// Exact rational quantum model.
pub type RationalModel = quantum::Model<num_rational::BigRational>;

/// Exact dyadic complex matrix.
pub type DyadicMatrix = quantum::CMatrix<Dyadic>;
/// Floating-point complex matrix.
pub type FloatMatrix = quantum::CMatrix<f64>;
