//! Spectral theory of Sturmian Hamiltonians through periodic approximants.
//!
//! The operator `(Hu)(n) = u(n+1) + u(n-1) + V·ω_α(n)·u(n)` with a mechanical
//! word `ω_α` is approximated by the periodic operators obtained from the
//! continued-fraction convergents of `α`. The crate provides:
//!
//! - [`cf`]: extended continued-fraction words, the evaluation map and convergents
//! - [`words`]: mechanical words and their period recursion
//! - [`traces`]: transfer matrices, discriminants, Chebyshev identities
//! - [`spectra`]: spectral bands, backward types and the forward band structure
//! - [`coding`]: spectral codes, level covers and the counting matrices
//! - [`ids`]: integrated density of states and gap-label certificates

pub mod cf;
pub mod coding;
pub mod error;
pub mod ids;
pub mod num;
pub mod spectra;
pub mod traces;
pub mod words;

pub use error::{Error, Result};
