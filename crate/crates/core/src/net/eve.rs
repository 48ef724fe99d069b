use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use super::frame::{Frame, Tag};
use crate::qkd::physics::{intercept_resend, Basis, Qubit};

/// Which frames Eve acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TapScope {
    /// Intercept-resend on simulated qubits.
    #[default]
    Quantum,
    /// Reads classical frames, leaves everything untouched.
    ClassicalOnly,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EveConfig {
    pub eve_fraction: f64,
    pub scope: TapScope,
    pub seed: u64,
}

impl EveConfig {
    pub fn intercept_all(seed: u64) -> Self {
        EveConfig {
            eve_fraction: 1.0,
            scope: TapScope::Quantum,
            seed,
        }
    }
}

/// Eavesdropper sitting on the master-to-slave direction.
#[derive(Debug)]
pub struct Eve {
    cfg: EveConfig,
    rng: ChaCha20Rng,
    intercepted: usize,
    observed: usize,
}

impl Eve {
    pub fn new(cfg: EveConfig) -> Self {
        Eve {
            rng: ChaCha20Rng::seed_from_u64(cfg.seed),
            cfg,
            intercepted: 0,
            observed: 0,
        }
    }

    /// Qubits measured and resent so far.
    pub fn intercepted(&self) -> usize {
        self.intercepted
    }

    /// Classical frames seen so far.
    pub fn observed(&self) -> usize {
        self.observed
    }

    pub fn tap(&mut self, mut frame: Frame) -> Frame {
        if !frame.tag.is_quantum() {
            self.observed += 1;
            return frame;
        }
        if self.cfg.scope != TapScope::Quantum || frame.tag != Tag::QBatch {
            return frame;
        }
        for b in frame.payload.iter_mut() {
            // Three draws per qubit whether or not it is intercepted.
            let u: f64 = self.rng.gen();
            let basis = Basis::from_bit(self.rng.gen());
            let coin: bool = self.rng.gen();
            let Some(q) = Qubit::from_byte(*b) else { continue };
            if u < self.cfg.eve_fraction {
                *b = intercept_resend(q, basis, coin).to_byte();
                self.intercepted += 1;
            }
        }
        frame
    }
}
