//! Runs the code listings of the guide in `book/` as doc-tests.
//!
//! mdbook cannot link a listing against this workspace, so every chapter is
//! pulled in here as the docs of an empty module and `cargo test` runs them.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/parameters.md")]
pub mod parameters {}
#[doc = include_str!("../../../book/src/kernel.md")]
pub mod kernel {}
#[doc = include_str!("../../../book/src/finite_sections.md")]
pub mod finite_sections {}
#[doc = include_str!("../../../book/src/spectrum.md")]
pub mod spectrum {}
#[doc = include_str!("../../../book/src/trace.md")]
pub mod trace {}
#[doc = include_str!("../../../book/src/eigenfunctions.md")]
pub mod eigenfunctions {}
#[doc = include_str!("../../../book/src/quadrature.md")]
pub mod quadrature {}
#[doc = include_str!("../../../book/src/berezin.md")]
pub mod berezin {}
#[doc = include_str!("../../../book/src/fock_p.md")]
pub mod fock_p {}
#[doc = include_str!("../../../book/src/verification.md")]
pub mod verification {}
#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
#[doc = include_str!("../../../README.md")]
pub mod readme {}
