//! QAES: AES with key-dependent S-boxes whose key material comes from a
//! simulated BB84 quantum key distribution link.
//!
//! - [`aes`]: AES-128/192/256 with an injectable S-box.
//! - [`dqsbox`]: box generation from 256 key bits, diagnostics, row correlation analysis.
//! - [`qkd`]: seeded BB84 simulator, key stream, key-generation time model.
//! - [`modes`]: online/offline contexts and CTR/CFB/OFB/raw-block messages.
//! - [`net`]: master/slave negotiation over a framed byte stream, with an optional eavesdropper.
//! - [`container`], [`bench`]: file format and timing harness used by the CLI.

pub mod aes;
pub mod bench;
pub mod container;
pub mod dqsbox;
pub mod modes;
pub mod net;
pub mod qkd;

pub use aes::{params_for_key_len, CipherParams, Sbox};
pub use dqsbox::{generate_box, DqsBox};
pub use modes::{BlockMode, Mode, QaesContext};
pub use qkd::{run_session, Bb84Config, Bb84SessionResult, QuantumKeyStream};
