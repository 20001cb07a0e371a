//! Intertwining (Darboux) operators between matrix Schroedinger Hamiltonians.
//!
//! Everything is computed over [`expalg::ExpPoly`], finite sums of
//! `c x^m e^{kx}`, and their shared-denominator fractions in [`matfun`].

pub mod cli;
pub mod darboux;
pub mod expalg;
pub mod linalg;
pub mod matfun;
pub mod model;
pub mod par;
pub mod scenarios;
pub mod spectra;
pub mod verify;

pub use num_complex::Complex64 as C64;
