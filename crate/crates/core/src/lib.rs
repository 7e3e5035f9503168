//! Secrecy-rate power allocation for an OFDM SWIPT link protected by a
//! wireless-powered full-duplex cooperative jammer.
//!
//! The transmitter splits a power budget over subcarriers; the jammer harvests
//! energy from that signal and spends it jamming the energy receiver, which is
//! also a potential eavesdropper. The information receiver cancels the
//! jamming. [`dual::ellipsoid_solve`] computes the secrecy-rate maximizing
//! allocation by dual decomposition; [`baselines`] holds the comparison
//! schemes and [`experiment`] the Monte-Carlo sweeps behind the CLI.

pub mod baselines;
pub mod channels;
pub mod dual;
pub mod ellipsoid;
pub mod error;
pub mod experiment;
pub mod model;
pub mod subproblem;

pub use error::{Error, Result};
