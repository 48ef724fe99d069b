//! Key-dependent S-boxes and their statistical analysis.
//!
//! A box is built by shuffling `0..=255` with Fisher–Yates, drawing indices
//! from an AES-256 counter-mode keystream keyed with the 256-bit key
//! material. Indices are drawn by masked rejection sampling, so given a
//! uniform keystream every permutation is equally likely.

mod analysis;

pub use analysis::{
    correlation_profile, pearson, standardize_row, AnalysisError, CorrelationProfile, RowCorrelation, ValueGrid,
};

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::aes::{encrypt_block, expand_key, Block, RoundKeySet, Sbox, AES_256};

pub const KEY_MATERIAL_BYTES: usize = 32;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DqsBoxError {
    #[error("box key material must be 256 bits, got {0}")]
    WrongKeyLength(usize),
}

/// A generated S-box plus a short identifier of the key material behind it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DqsBox {
    sbox: Sbox,
    seed_digest: [u8; 8],
}

impl DqsBox {
    pub fn sbox(&self) -> &Sbox {
        &self.sbox
    }

    pub fn into_sbox(self) -> Sbox {
        self.sbox
    }

    pub fn forward(&self) -> &[u8; 256] {
        self.sbox.forward()
    }

    pub fn inverse(&self) -> &[u8; 256] {
        self.sbox.inverse()
    }

    /// Truncated SHA-256 of the key material.
    pub fn seed_digest(&self) -> [u8; 8] {
        self.seed_digest
    }
}

/// AES-256 in counter mode over a 128-bit big-endian counter starting at zero.
struct CtrBytes {
    rks: RoundKeySet,
    counter: u128,
    buf: Block,
    pos: usize,
}

impl CtrBytes {
    fn new(key: &[u8; KEY_MATERIAL_BYTES]) -> Self {
        CtrBytes {
            rks: expand_key(key, AES_256).expect("32-byte key matches AES-256"),
            counter: 0,
            buf: [0; 16],
            pos: 16,
        }
    }

    fn next_byte(&mut self) -> u8 {
        if self.pos == 16 {
            self.buf = encrypt_block(&self.counter.to_be_bytes(), &self.rks, Sbox::standard());
            self.counter = self.counter.wrapping_add(1);
            self.pos = 0;
        }
        let b = self.buf[self.pos];
        self.pos += 1;
        b
    }

    /// Uniform draw from `0..=bound` (bound <= 255).
    fn below_or_equal(&mut self, bound: u8) -> u8 {
        let mask = ((bound as u16 + 1).next_power_of_two() - 1) as u8;
        loop {
            let r = self.next_byte() & mask;
            if r <= bound {
                return r;
            }
        }
    }
}

pub fn generate_box(key_material: &[u8]) -> Result<DqsBox, DqsBoxError> {
    let key: &[u8; KEY_MATERIAL_BYTES] = key_material
        .try_into()
        .map_err(|_| DqsBoxError::WrongKeyLength(key_material.len() * 8))?;
    let mut ks = CtrBytes::new(key);
    let mut perm: [u8; 256] = core::array::from_fn(|i| i as u8);
    for i in (1..256usize).rev() {
        let j = ks.below_or_equal(i as u8) as usize;
        perm.swap(i, j);
    }
    let digest = Sha256::digest(key);
    Ok(DqsBox {
        sbox: Sbox::from_permutation(perm).expect("a shuffle of 0..=255 is a permutation"),
        seed_digest: digest[..8].try_into().expect("sha256 is 32 bytes"),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoxDiagnostics {
    pub fixed_points: usize,
    pub differential_uniformity: usize,
}

pub fn box_diagnostics(sbox: &Sbox) -> BoxDiagnostics {
    let f = sbox.forward();
    let fixed_points = (0..256).filter(|&i| f[i] as usize == i).count();
    let mut differential_uniformity = 0;
    for a in 1..256usize {
        let mut counts = [0usize; 256];
        for x in 0..256usize {
            counts[(f[x ^ a] ^ f[x]) as usize] += 1;
        }
        differential_uniformity = differential_uniformity.max(counts.into_iter().max().unwrap_or(0));
    }
    BoxDiagnostics {
        fixed_points,
        differential_uniformity,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn key(seed: u8) -> [u8; 32] {
        core::array::from_fn(|i| seed.wrapping_mul(31).wrapping_add(i as u8))
    }

    #[test]
    fn deterministic_and_bijective() {
        let a = generate_box(&key(1)).unwrap();
        assert_eq!(a, generate_box(&key(1)).unwrap());
        let mut sorted = *a.forward();
        sorted.sort_unstable();
        assert_eq!(sorted, core::array::from_fn(|i| i as u8));
        for i in 0..256 {
            assert_eq!(a.inverse()[a.forward()[i] as usize] as usize, i);
        }
        assert_ne!(a, generate_box(&key(2)).unwrap());
    }

    #[test]
    fn rejects_wrong_length() {
        assert_eq!(generate_box(&[0; 16]), Err(DqsBoxError::WrongKeyLength(128)));
    }

    #[test]
    fn diagnostics_of_reference_boxes() {
        let id = box_diagnostics(&Sbox::identity());
        assert_eq!(id.fixed_points, 256);
        assert_eq!(id.differential_uniformity, 256);
        let std = box_diagnostics(Sbox::standard());
        assert_eq!(std.fixed_points, 0);
        assert_eq!(std.differential_uniformity, 4);
    }

    #[test]
    fn rejection_sampler_covers_range() {
        let mut ks = CtrBytes::new(&key(9));
        let mut seen = [0u32; 6];
        for _ in 0..6000 {
            seen[ks.below_or_equal(5) as usize] += 1;
        }
        assert!(seen.iter().all(|&c| (800..1200).contains(&c)), "{seen:?}");
    }
}
