//! Exact simulation and statistical estimation for sequential weak
//! measurements of photon polarization.
//!
//! A single photon is prepared in a linear polarization state, weakly coupled
//! to two transverse pointer coordinates through a pair of polarization
//! projectors acting in sequence, and post-selected on a final polarization
//! state. The surviving pointer wavefunction is a small superposition of
//! displaced Gaussians whose position moments encode the weak values of the
//! two projectors and of their ordered product.
//!
//! The crate is organized along the stages of that protocol:
//!
//! - [`polarization`]: states on C^2, Hermitian 2x2 observables, single and
//!   sequential weak values.
//! - [`pointer`]: exact coupled photon+pointer evolution, post-selection, and
//!   closed-form Gaussian position moments.
//! - [`weakform`]: first-order readout formulas connecting pointer moments to
//!   weak values, their inversion, and convergence diagnostics.
//! - [`detector`]: pixelated detection with multinomial photon statistics,
//!   dark counts, background subtraction, and moment estimation.
//!
//! Everything is deterministic: sampling takes explicit seeds and stream
//! indices, so runs reproduce bit-for-bit regardless of scheduling.
//!
//! The crate is `no_std` (with `alloc`); float transcendentals come from
//! `libm`. File formats, configuration, and the command-line front end live
//! in the companion crate `seqweak-cli`.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod defaults;
pub mod detector;
mod error;
mod gauss;
pub mod pointer;
pub mod polarization;
pub mod weakform;

pub use error::{Error, Result};
