//! Structured linear algebra over the free semigroup on `N` letters.
//!
//! The crate works with truncated noncommutative power series with matrix
//! coefficients, their images as upper triangular block operators on the
//! truncated full Fock space, and the displacement structure that these
//! operators carry. On top of that sit:
//!
//! * [`toeplitz`]: multi-Toeplitz kernels and their bijection with the
//!   Schur class of series with vanishing constant term,
//! * [`schur`]: the graded Schur algorithm (analysis and synthesis) together
//!   with the refined parameter tree,
//! * [`realization`]: time-variant colligations whose transfer maps
//!   reproduce a Schur-class series,
//! * [`scattering`]: wave operators and the constructive interpolant for
//!   displacement equations with contractive generators, including
//!   Nevanlinna-Pick problems on the unit ball of `C^N`.
//!
//! All numerical code is generic over the real scalar type ([`Real`]);
//! `f64` aliases are provided at the crate root.

pub mod displacement;
pub mod error;
pub mod linalg;
pub mod realization;
pub mod scalar;
pub mod scattering;
pub mod schur;
pub mod series;
pub mod toeplitz;
pub mod word;

pub use error::{Error, Result};
pub use scalar::{lit, CMatrix, Real, C};
pub use word::Word;

/// Double precision series.
pub type Series = series::NcSeries<f64>;
/// Single precision series.
pub type Series32 = series::NcSeries<f32>;
/// Double precision block operator on the truncated Fock space.
pub type FockOperator = series::FockBlockOperator<f64>;
/// Double precision multi-Toeplitz symbol.
pub type Symbol = toeplitz::MultiToeplitzSymbol<f64>;
/// Double precision Schur parameters.
pub type Parameters = schur::SchurData<f64>;
/// Double precision time-variant system.
pub type System = realization::SystemBsn<f64>;
/// Double precision scattering data.
pub type Scattering = scattering::ScatteringData<f64>;
/// Double precision generator pair.
pub type Generator = displacement::GeneratorPair<f64>;
/// Complex double matrix.
pub type Matrix = CMatrix<f64>;
