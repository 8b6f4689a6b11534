//! Matrix multiplication and Hermitian conjugation on amplitude-encoded
//! matrices, simulated on a dense statevector.
//!
//! A complex matrix `A` of size `2^n x 2^n` is stored in the amplitudes of a
//! `2n + 2` qubit state: two index registers, a label qubit separating real
//! and imaginary parts, and a slack qubit that carries the leftover norm.
//! The product circuit takes two such states, applies a fixed sequence of
//! Walsh-Hadamard and multi-controlled gates, and after one conditional
//! measurement leaves `A1 A2` (up to a known scalar) in the output registers.
//!
//! ```
//! use qamp::{layout_for, prepare, run_pipeline, ComplexMatrix, Manipulations};
//!
//! let a = ComplexMatrix::from_real_rows(&[vec![1.0, 2.0], vec![0.0, 1.0]])?;
//! let b = ComplexMatrix::from_real_rows(&[vec![0.5, 0.0], vec![1.0, -1.0]])?;
//! let (pa, pb) = (prepare(&a, 1.0)?, prepare(&b, 1.0)?);
//!
//! let result = run_pipeline(&pa, &pb, Manipulations::NONE, &layout_for(1, false)?)?;
//! assert!(result.oracle_error < 1e-12);
//!
//! let product = qamp::matmul_oracle(&a, &b)?;
//! assert!(result.recovered().max_abs_diff(&product)?.0 < 1e-12);
//! # Ok::<(), qamp::Error>(())
//! ```

pub mod cli;
pub mod complexmat;
pub mod conjugator;
pub mod encoder;
pub mod error;
pub mod estimator;
pub mod multiplier;
pub mod registers;
pub mod resources;
pub mod statevector;

pub use complexmat::{dagger_oracle, matmul_oracle, prepare, prepare_with_phase, ComplexMatrix, PreparedMatrix};
pub use conjugator::{hermitian_conjugate, QOp};
pub use encoder::{decode, encode, Decoded, EncodedBlock};
pub use error::{Error, Result};
pub use estimator::{estimate_g, GEstimate};
pub use multiplier::{expected_g, expected_product, run_circuit, run_pipeline, Manipulations, ProductResult};
pub use registers::{layout_for, RegisterLayout, Subsystem};
pub use resources::{resource_report, ResourceReport};
pub use statevector::{Gate, GateKind, StateVector};

#[cfg(test)]
mod testutil;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/encoding.md")]
    mod encoding {}
    #[doc = include_str!("../../../book/src/conjugation.md")]
    mod conjugation {}
    #[doc = include_str!("../../../book/src/multiplication.md")]
    mod multiplication {}
    #[doc = include_str!("../../../book/src/manipulations.md")]
    mod manipulations {}
    #[doc = include_str!("../../../book/src/normalization.md")]
    mod normalization {}
    #[doc = include_str!("../../../book/src/resources.md")]
    mod resources {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
