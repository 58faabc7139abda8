// SPDX-License-Identifier: Apache-2.0

//! Pulse synthesis for qubits encoded in the lowest four levels of one or two
//! coupled transmons.
//!
//! Frequencies are in GHz and times in ns throughout.

pub mod device;
pub mod dynamics;
pub mod error;
pub mod experiment;
pub mod gates;
pub mod numeric;
pub mod optimize;
pub mod pulse;

pub use error::{Result, SynthError};
