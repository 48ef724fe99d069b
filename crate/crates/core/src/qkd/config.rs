use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::QkdError;

/// Parameters of one simulated BB84 session.
///
/// The on-disk form is `key = value` lines (valid TOML); omitted keys take
/// the defaults, which reproduce the 500-qubit / 0.05-noise scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Bb84Config {
    /// Qubits sent by the master.
    pub n_pump: usize,
    /// Per-qubit bit-flip probability of the quantum channel.
    pub p_noise: f64,
    /// Fraction of qubits Eve intercepts and resends.
    pub eve_fraction: f64,
    /// Fraction of sifted bits disclosed to estimate the QBER.
    pub sacrifice_fraction: f64,
    pub qber_abort_threshold: f64,
    pub seed: u64,
}

impl Default for Bb84Config {
    fn default() -> Self {
        Bb84Config {
            n_pump: 500,
            p_noise: 0.05,
            eve_fraction: 0.0,
            sacrifice_fraction: 0.2,
            qber_abort_threshold: 0.11,
            seed: 0,
        }
    }
}

pub const MIN_PUMP: usize = 16;

impl Bb84Config {
    pub fn validate(&self) -> Result<(), QkdError> {
        let bad = |field: &'static str, value: f64| QkdError::InvalidConfig {
            field,
            reason: format!("{value} out of range"),
        };
        if self.n_pump < MIN_PUMP {
            return Err(QkdError::InvalidConfig {
                field: "n_pump",
                reason: format!("{} < {MIN_PUMP}", self.n_pump),
            });
        }
        if !(0.0..=1.0).contains(&self.p_noise) {
            return Err(bad("p_noise", self.p_noise));
        }
        if !(0.0..=1.0).contains(&self.eve_fraction) {
            return Err(bad("eve_fraction", self.eve_fraction));
        }
        if !(self.sacrifice_fraction > 0.0 && self.sacrifice_fraction < 1.0) {
            return Err(bad("sacrifice_fraction", self.sacrifice_fraction));
        }
        if !(0.0..=1.0).contains(&self.qber_abort_threshold) {
            return Err(bad("qber_abort_threshold", self.qber_abort_threshold));
        }
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Self, QkdError> {
        let cfg: Bb84Config = toml::from_str(text).map_err(|e| QkdError::ConfigSyntax(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Canonical `key = value` rendering; stable field order.
    pub fn to_config_string(&self) -> String {
        toml::to_string(self).expect("plain struct always serializes")
    }

    /// First 8 bytes of SHA-256 over the canonical rendering.
    pub fn digest(&self) -> [u8; 8] {
        let d = Sha256::digest(self.to_config_string().as_bytes());
        d[..8].try_into().expect("sha256 is 32 bytes")
    }
}
