//! Generalized q-Bessel harmonic analysis on the truncated q-lattice.
//!
//! The crate is organised bottom-up:
//!
//! - [`qlattice`]: the lattice `{q^k}`, sampled functions, Jackson integrals,
//!   the q-derivative and the weighted `L^p` norms.
//! - [`qspecial`]: q-Pochhammer products, the normalized q-Bessel function
//!   `j_alpha(x; q^2)`, the generalized kernel, the q-Bessel difference
//!   operator and the normalization constants.
//! - [`qtransform`]: the generalized q-Bessel Fourier transform (direct and
//!   fast paths), the generalized translation and the weighted inner product.
//! - [`qwavelet`]: admissible wavelets, dilation, wavelet atoms, the
//!   continuous wavelet transform, the Plancherel pairing and reconstruction.
//!
//! Every function lives on lattice points only; nothing is interpolated.
//! All summations run in a fixed order with compensated accumulation, so
//! repeated evaluations on identical inputs are bit-identical.

// `!(x <= tol)` is used on purpose so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod qlattice;
pub mod qspecial;
pub mod qtransform;
pub mod qwavelet;
pub mod sum;

pub use error::{Error, Result};
pub use qlattice::{LatticeFn, QGrid, SumDomain};
pub use qspecial::VParams;
pub use qtransform::{TransformPlan, Transformed};
pub use qwavelet::{Scalogram, Wavelet};
