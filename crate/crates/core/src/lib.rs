//! Information reconciliation for QKD post-processing.
//!
//! Two parties holding correlated sifted keys run symmetric blind error
//! correction (syndrome-based LDPC decoding with adaptive disclosure) over
//! independent sub-blocks, then verify the whole block with a polynomial
//! ε-universal hash, falling back to per-sub-block hashes on mismatch.
//!
//! Module map:
//!
//! - [`ldpc`]: parity-check matrices, PEG construction, alist I/O, code pool
//! - [`rate_adapt`]: rate selection and the shortened/punctured frame layout
//! - [`decoder`]: sum-product syndrome decoding and disclosure selection
//! - [`sbec`]: the per-sub-block correction state machine
//! - [`verify`]: polynomial hashing, bounds, and the verification protocol
//! - [`session`]: block orchestration, wire framing, leakage accounting
//! - [`sim`]: BSC key generation and the experiment runner behind the CLI

pub mod bits;
pub mod decoder;
mod error;
pub mod ldpc;
pub mod rate_adapt;
pub mod sbec;
pub mod seed;
pub mod session;
pub mod sim;
pub mod verify;

pub use error::{Error, Result};
