//! Key-rate analysis of discrete-modulation continuous-variable QKD with
//! probabilistic amplitude shaping over lossy and noisy fiber.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod classical_info;
pub mod cli_runner;
pub mod constellation;
pub mod error;
pub mod fock_space;
pub mod gaussian_engine;
pub mod holevo;
pub mod kgr_optimizer;
pub mod mixture;

pub use channel::ChannelParams;
pub use constellation::{build_psk, build_qam, Constellation, ConstellationKind};
pub use error::{Error, Result};
