//! Contextuality test with spin–path entangled neutrons.
//!
//! * [`algebra`]: states and operators on the spin ⊗ path space.
//! * [`peres_mermin`]: the magic square and exhaustive noncontextual bounds.
//! * [`interferometer`]: instrument settings to detection probabilities.
//! * [`measurement`]: Poisson counts, fringe fits, estimators, the inequality.
//! * [`cli`]: the `neutron-ks` command-line front end.
//!
//! Operators are generic over the matrix-entry scalar; states and
//! probabilities over a floating-point scalar. The aliases below fix the
//! common choices.

pub mod algebra;
pub mod cli;
pub mod interferometer;
pub mod measurement;
pub mod peres_mermin;
pub mod scalar;

pub use algebra::{
    bell_state, commutator, eigenstate, expectation, pauli, tensor_observable, AlgebraError,
    BellFamily, Operator, Pauli, Sign, StateVector, Subsystem,
};
pub use scalar::{RealScalar, Scalar};

/// Double-precision operator.
pub type Operator64 = Operator<f64>;
/// Single-precision operator.
pub type Operator32 = Operator<f32>;
/// Operator over Gaussian integers; Pauli products are exact.
pub type ExactOperator = Operator<i64>;
pub type State64 = StateVector<f64>;
pub type State32 = StateVector<f32>;
pub type MagicSquare64 = peres_mermin::MagicSquare<f64>;
pub type ExactMagicSquare = peres_mermin::MagicSquare<i64>;
pub type ForwardModel64 = interferometer::ForwardModel<f64>;
