//! Lancaster bivariate probabilities, their orthonormal polynomial systems and
//! the spectra of the associated two-component Gibbs samplers.
//!
//! The crate is organised bottom-up:
//!
//! * [`orthopoly`] builds orthonormal polynomials for the marginal laws, from
//!   closed-form recurrences or from exact moments.
//! * [`nef`] holds natural exponential families, conjugate priors and their
//!   mixtures.
//! * [`lancaster`] constructs and verifies Lancaster sequences.
//! * [`gibbs`] runs and diagnoses the x-chains.
//! * [`triplekernel`] evaluates and scans the triple-product kernel.

pub mod error;
pub mod gibbs;
pub mod lancaster;
pub mod nef;
pub mod orthopoly;
pub mod quad;
pub mod real;
pub mod series;
pub mod special;
pub mod triplekernel;

pub use error::{Error, Result};
