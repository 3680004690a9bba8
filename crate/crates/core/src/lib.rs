//! Numerics for the two-parameter canonical integral operators `T^(s,t)` on
//! the Fock space `F²`.
//!
//! `T^(s,t)` acts by the reproducing-type kernel
//!
//! ```text
//! K^(s,t)(z, w) = s^{-1/2} exp[(t z² − conj(t w²) + 2 z w̄) / (2s)]
//! ```
//!
//! against the Gaussian measure `dλ(w) = π^{-1} e^{-|w|²} dA(w)`. It is
//! unitary when `|s|² = |t|² + 1`, compact when `|s|² > |t|² + 1`, and
//! unbounded otherwise. Every closed-form quantity in the crate has a
//! numeric oracle next to it: the finite section of the operator matrix,
//! Gauss–Hermite quadrature, or a grid supremum.
//!
//! ```
//! use canonical_fock::{ParameterPair, spectral};
//!
//! let p = ParameterPair::real(2.0, 1.0)?;
//! let mu = spectral::closed_singular_values(&p, 2)?;
//! assert!((mu[0] - 0.786151).abs() < 1e-6);
//! # Ok::<(), canonical_fock::Error>(())
//! ```

pub mod berezin;
pub mod error;
pub mod kernel;
pub mod operator;
pub mod quadrature;
pub mod report;
pub mod scalar;
pub mod spectral;
pub mod verify;

pub use error::{Error, Result};
pub use kernel::{classify, kernel_eval, OperatorClass, ParameterPair, Regime};
pub use operator::{FockCoefficients, TruncatedOperator};
pub use quadrature::QuadratureGrid;
pub use scalar::{principal_sqrt, Complex};
pub use spectral::SpectralReport;
