//! Finite-blocklength achievable rates for the Gaussian multiple-access
//! channel, and Monte Carlo simulation of the coding schemes behind them.
//!
//! The library has two halves that check each other:
//!
//! * **Analysis** — closed-form capacity/dispersion quantities, normal
//!   approximations of achievable message sizes, Gaussian-region membership
//!   by Monte Carlo, and the decode-time schedules and error bounds of a
//!   rateless random-access protocol ([`dispersion`], [`region`], [`rac`]).
//! * **Simulation** — the actual random coding schemes: spherical
//!   codebooks, maximum-likelihood decoding on the multiple-access channel,
//!   and the full rateless protocol with power gating and list decoding
//!   ([`sphere`], [`mac`], [`rac`]).
//!
//! Everything is deterministic given a master seed: work is split into
//! units with independently derived ChaCha streams ([`rng`]), so results
//! are bit-identical across thread counts and runs.
//!
//! The [`harness`] module and the `fbl-gausac` binary drive parameter grids
//! from a TOML config and write CSV/JSON results.

pub mod dispersion;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod mac;
pub mod rac;
pub mod region;
pub mod rng;
pub mod specfun;
pub mod sphere;

pub use error::{Error, Result};
