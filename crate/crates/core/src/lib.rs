//! Spectral inference for multicarrier continuous-variable QKD.
//!
//! A trial draws Gaussian carriers ([`channel::draw_block`]), spreads them
//! over `m` subcarriers, and sends them through lossy noisy sub-channels to
//! Bob while Eve taps the complement. The receiver infers a spectrum with
//! maximum-entropy quadrature inference ([`gqi`]) or a flat-top windowed
//! periodogram ([`dgqi`]). [`keyrate`] turns both parties' spectra into a
//! statistical key rate.
//!
//! All randomness comes from [`rng::RngStream`], so results are reproducible
//! for a given seed regardless of thread count.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod dft;
pub mod dgqi;
pub mod error;
pub mod gqi;
pub mod grid;
pub mod keyrate;
pub mod optim;
pub mod rng;
pub mod spectral;

pub use error::{Error, Result};
