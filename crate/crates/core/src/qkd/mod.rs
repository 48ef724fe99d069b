//! Seeded BB84 simulation and the key stream it feeds.
//!
//! All randomness comes from a ChaCha20 generator seeded from the session
//! config, so a config (including its seed) fully determines the result.

mod bits;
mod config;
pub mod physics;
pub mod randomness;
mod session;
mod stream;
mod timing;

pub use bits::BitString;
pub use config::{Bb84Config, MIN_PUMP};
pub use session::{run_session, run_session_traced, sample_size, Bb84SessionResult, QubitRecord, SessionTranscript};
pub use stream::QuantumKeyStream;
pub use timing::{
    per_qubit_ms, t_qkg_model, CALIBRATION_MS, CALIBRATION_NOISE, CALIBRATION_PUMP, NEGOTIATION_OVERHEAD_MS,
};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QkdError {
    #[error("invalid config value for {field}: {reason}")]
    InvalidConfig { field: &'static str, reason: String },
    #[error("config syntax: {0}")]
    ConfigSyntax(String),
    #[error("quantum key depleted: requested {requested} bits, {remaining} remaining; run a new BB84 session")]
    KeyDepleted { requested: usize, remaining: usize },
    #[error("zero-length key request")]
    EmptyRequest,
    #[error("malformed transcript at line {0}")]
    BadTranscript(usize),
}
