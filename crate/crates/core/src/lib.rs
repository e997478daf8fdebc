//! Exact biphoton-state evolution in arrays of quadratically nonlinear
//! waveguides.
//!
//! A pump injected into one (or several) waveguides generates photon pairs
//! by degenerate spontaneous parametric down-conversion while the signal
//! photons hop between neighbouring guides. To first order in the pump the
//! output is `|0> + sum_jk Q_jk A_j^+ A_k^+ |0>`, and `Q` has a closed form in
//! the supermode basis of the linear coupling matrix. This crate computes
//! that amplitude, the normalized photon-number distribution, its spread
//! `sigma(z)` and the log-log slope `gamma(z)`, and runs seeded disorder
//! ensembles on top of it.
//!
//! All rates are in units of the mean coupling `C0` and all distances are
//! the dimensionless product `C0 z`.
//!
//! The crate is `no_std` + `alloc` when built without the default `std`
//! feature. The `std` feature only switches on runtime CPU feature
//! detection in the matrix kernels.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod disorder;
pub mod error;
pub mod evolution;
pub mod exec;
pub mod linalg;
pub mod model;
pub mod oracle;
pub mod spectral;

pub use error::{Error, Result};
pub use exec::{Executor, Sequential};
pub use model::{ArrayConfig, Averaging, DisorderSpec, PumpSpec, TransportSeries};
pub use spectral::SupermodeDecomposition;

pub use num_complex::Complex64;
