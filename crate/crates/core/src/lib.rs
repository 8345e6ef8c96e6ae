//! Positive unimodular H-graph plumbings and their rank-two false theta
//! q-series.
//!
//! The crate classifies the positive definite unimodular plumbing matrices of
//! the six-vertex H-graph, expands the associated series `Z(q)` by two
//! independent routes (the closed theta form and the principal-value contour
//! reduction), decides quantum-set membership with exact cyclotomic
//! arithmetic, and checks radial asymptotic expansions in high precision.
//!
//! Core routines are generic over the integer scalar; the aliases below fix
//! the arbitrary-precision choices used by the public API.

pub mod appendix;
pub mod asympt;
pub mod contour;
pub mod error;
pub mod exact;
pub mod gauss;
pub mod lattice;
pub mod plumbing;
pub mod real;
pub mod theta;
pub mod verify;

pub use error::{Error, Result};

/// Arbitrary-precision integer.
pub type Integer = num_bigint::BigInt;
/// Reduced arbitrary-precision rational with positive denominator.
pub type Rational = num_rational::BigRational;
/// Exact integer matrix over [`Integer`].
pub type Matrix = exact::IntMatrix<Integer>;
/// Software floating point used for radial sums and expansion coefficients.
pub type HighPrecision = real::HpFloat;

pub use appendix::{load_appendix, AppendixEntry};

pub use gauss::CyclotomicSum;
pub use plumbing::{HLabels, PuCensus};
pub use theta::{FamilyParams, QSeries, QuadraticForm2, SignedAlphaSet};
