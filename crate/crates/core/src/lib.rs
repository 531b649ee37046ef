//! Building blocks for studying the frequency principle of neural-network
//! training on small 1-d problems.
//!
//! The crate is organised by subsystem:
//!
//! - [`nn`]: a dense feed-forward network with exact backpropagation,
//!   seeded Gaussian initialisation and plain gradient descent.
//! - [`loss`]: mean square error, the two-term cross entropy used for the
//!   classification experiments, and the discretised Dirichlet energy used to
//!   solve Poisson's equation with a network.
//! - [`spectral`]: direct DFT / non-uniform DFT, peak picking, the relative
//!   frequency-domain error `Δ_F(γ)` and the per-mode gradient decomposition.
//! - [`poisson`]: the central-difference system for `-u'' = g` on `(-1, 1)`,
//!   a direct tridiagonal solve, Jacobi and Gauss-Seidel sweeps, the sine-mode
//!   error analysis of Jacobi, and the DNN-then-iterative hybrid.
//! - [`data`]: MNIST IDX parsing and the projection of images onto their
//!   leading principal direction.
//!
//! Everything is `f64` and single-threaded. Given the same seed and inputs,
//! every routine produces bit-identical results.

// `!(x > 0.0)` also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod csvfmt;
pub mod data;
pub mod error;
pub mod loss;
pub mod nn;
pub mod poisson;
pub mod rng;
pub mod spectral;

pub use error::{Error, Result};
