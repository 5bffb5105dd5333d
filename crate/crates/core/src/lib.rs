//! Hybrid classical/quantum image classification.
//!
//! A small fully-connected network maps each image to the site-dependent
//! fields `h` of a transverse-field Ising chain
//!
//! ```text
//! H(h) = J Σ_{j<n} σx_j σx_{j+1} + Σ_j h_j σz_j
//! ```
//!
//! The ferromagnetic state `|0…0⟩` is evolved for a fixed time and images are
//! compared through the fidelity of the resulting states. Training pushes the
//! fidelity of same-class pairs towards one and of different-class pairs
//! towards zero; classification scores a test state against per-class mean
//! projectors, measured exactly or through classical shadows.
//!
//! Basis convention used throughout: qubit 0 (the first site of the chain) is
//! the most significant bit of a basis-state index, and `|0⟩` is the `+1`
//! eigenstate of `σz`.

pub mod data_io;
pub mod encoder;
pub mod error;
pub mod gradient;
pub mod measurement;
pub mod pipeline;
pub mod quantum;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
