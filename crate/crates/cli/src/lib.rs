//! Configuration and WAV I/O behind the `windfield` binary.

pub mod config;
pub mod wav;
