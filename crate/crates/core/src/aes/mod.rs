//! AES block cipher with an injectable substitution box.
//!
//! Only SubBytes is parameterized; ShiftRows, MixColumns, AddRoundKey and the
//! key schedule are classical AES. The key schedule always uses the standard
//! S-box regardless of the box used by the rounds. No constant-time
//! guarantees are made.

mod gf;
mod sbox;

pub use sbox::{Sbox, SboxError};

use thiserror::Error;

pub type Block = [u8; 16];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AesError {
    #[error("unsupported key length: {0} bits (expected 128, 192 or 256)")]
    UnsupportedKeyLength(usize),
    #[error("key is {actual} bytes, expected {expected}")]
    WrongKeyLength { expected: usize, actual: usize },
    #[error("round key set has {actual} keys, expected {expected}")]
    WrongRoundKeyCount { expected: usize, actual: usize },
    #[error("per-round box list has {actual} entries, expected {expected}")]
    WrongBoxCount { expected: usize, actual: usize },
}

/// Key/block/round sizes, in 32-bit words and rounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CipherParams {
    nk: usize,
    nb: usize,
    nr: usize,
}

pub const AES_128: CipherParams = CipherParams { nk: 4, nb: 4, nr: 10 };
pub const AES_192: CipherParams = CipherParams { nk: 6, nb: 4, nr: 12 };
pub const AES_256: CipherParams = CipherParams { nk: 8, nb: 4, nr: 14 };

pub fn params_for_key_len(bits: usize) -> Result<CipherParams, AesError> {
    match bits {
        128 => Ok(AES_128),
        192 => Ok(AES_192),
        256 => Ok(AES_256),
        other => Err(AesError::UnsupportedKeyLength(other)),
    }
}

impl CipherParams {
    pub fn nk(&self) -> usize {
        self.nk
    }

    pub fn nb(&self) -> usize {
        self.nb
    }

    pub fn nr(&self) -> usize {
        self.nr
    }

    pub fn key_bits(&self) -> usize {
        self.nk * 32
    }

    pub fn key_bytes(&self) -> usize {
        self.nk * 4
    }

    pub fn round_key_count(&self) -> usize {
        self.nr + 1
    }
}

/// The nr + 1 round keys consumed by one block encryption.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoundKeySet {
    params: CipherParams,
    keys: Vec<Block>,
}

impl RoundKeySet {
    /// Wraps externally supplied round keys, e.g. drawn straight from a key stream.
    pub fn from_keys(params: CipherParams, keys: Vec<Block>) -> Result<Self, AesError> {
        if keys.len() != params.round_key_count() {
            return Err(AesError::WrongRoundKeyCount {
                expected: params.round_key_count(),
                actual: keys.len(),
            });
        }
        Ok(RoundKeySet { params, keys })
    }

    pub fn params(&self) -> CipherParams {
        self.params
    }

    pub fn keys(&self) -> &[Block] {
        &self.keys
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }
}

/// Standard AES key expansion (always with the standard S-box).
pub fn expand_key(key: &[u8], params: CipherParams) -> Result<RoundKeySet, AesError> {
    if key.len() != params.key_bytes() {
        return Err(AesError::WrongKeyLength {
            expected: params.key_bytes(),
            actual: key.len(),
        });
    }
    let sbox = Sbox::standard();
    let nk = params.nk;
    let total_words = params.nb * (params.nr + 1);
    let mut w: Vec<[u8; 4]> = key.chunks_exact(4).map(|c| [c[0], c[1], c[2], c[3]]).collect();
    let mut rcon = 0x01u8;
    for i in nk..total_words {
        let mut t = w[i - 1];
        if i % nk == 0 {
            t = [sbox.sub(t[1]) ^ rcon, sbox.sub(t[2]), sbox.sub(t[3]), sbox.sub(t[0])];
            rcon = gf::xtime(rcon);
        } else if nk > 6 && i % nk == 4 {
            t = t.map(|b| sbox.sub(b));
        }
        let prev = w[i - nk];
        w.push([prev[0] ^ t[0], prev[1] ^ t[1], prev[2] ^ t[2], prev[3] ^ t[3]]);
    }
    let keys = w
        .chunks_exact(4)
        .map(|words| {
            let mut k = [0u8; 16];
            for (dst, word) in k.chunks_exact_mut(4).zip(words) {
                dst.copy_from_slice(word);
            }
            k
        })
        .collect();
    Ok(RoundKeySet { params, keys })
}

#[inline]
fn add_round_key(state: &mut Block, key: &Block) {
    for (s, k) in state.iter_mut().zip(key) {
        *s ^= k;
    }
}

// State is column-major: byte (row r, column c) lives at index r + 4c.
fn shift_rows(state: &mut Block) {
    let old = *state;
    for r in 1..4 {
        for c in 0..4 {
            state[r + 4 * c] = old[r + 4 * ((c + r) % 4)];
        }
    }
}

fn inv_shift_rows(state: &mut Block) {
    let old = *state;
    for r in 1..4 {
        for c in 0..4 {
            state[r + 4 * ((c + r) % 4)] = old[r + 4 * c];
        }
    }
}

fn mix_columns(state: &mut Block) {
    for col in state.chunks_exact_mut(4) {
        let mixed = gf::mix_column([col[0], col[1], col[2], col[3]]);
        col.copy_from_slice(&mixed);
    }
}

fn inv_mix_columns(state: &mut Block) {
    for col in state.chunks_exact_mut(4) {
        let mixed = gf::inv_mix_column([col[0], col[1], col[2], col[3]]);
        col.copy_from_slice(&mixed);
    }
}

/// Runs the cipher with `box_for_round(r)` supplying SubBytes for round r (1-based).
fn encrypt_with<'a>(block: &Block, rks: &RoundKeySet, box_for_round: impl Fn(usize) -> &'a Sbox) -> Block {
    let nr = rks.params.nr;
    let keys = &rks.keys;
    let mut state = *block;
    add_round_key(&mut state, &keys[0]);
    for round in 1..=nr {
        let sbox = box_for_round(round);
        for b in state.iter_mut() {
            *b = sbox.sub(*b);
        }
        shift_rows(&mut state);
        if round != nr {
            mix_columns(&mut state);
        }
        add_round_key(&mut state, &keys[round]);
    }
    state
}

fn decrypt_with<'a>(block: &Block, rks: &RoundKeySet, box_for_round: impl Fn(usize) -> &'a Sbox) -> Block {
    let nr = rks.params.nr;
    let keys = &rks.keys;
    let mut state = *block;
    for round in (1..=nr).rev() {
        add_round_key(&mut state, &keys[round]);
        if round != nr {
            inv_mix_columns(&mut state);
        }
        inv_shift_rows(&mut state);
        let sbox = box_for_round(round);
        for b in state.iter_mut() {
            *b = sbox.inv_sub(*b);
        }
    }
    add_round_key(&mut state, &keys[0]);
    state
}

pub fn encrypt_block(block: &Block, rks: &RoundKeySet, sbox: &Sbox) -> Block {
    encrypt_with(block, rks, |_| sbox)
}

/// Inverse of [`encrypt_block`]; SubBytes is undone through `sbox`'s inverse table.
pub fn decrypt_block(block: &Block, rks: &RoundKeySet, sbox: &Sbox) -> Block {
    decrypt_with(block, rks, |_| sbox)
}

/// Encrypts with a distinct box for every round; `boxes[r - 1]` serves round r.
pub fn encrypt_block_per_round(block: &Block, rks: &RoundKeySet, boxes: &[Sbox]) -> Result<Block, AesError> {
    check_box_count(rks, boxes)?;
    Ok(encrypt_with(block, rks, |r| &boxes[r - 1]))
}

pub fn decrypt_block_per_round(block: &Block, rks: &RoundKeySet, boxes: &[Sbox]) -> Result<Block, AesError> {
    check_box_count(rks, boxes)?;
    Ok(decrypt_with(block, rks, |r| &boxes[r - 1]))
}

fn check_box_count(rks: &RoundKeySet, boxes: &[Sbox]) -> Result<(), AesError> {
    if boxes.len() != rks.params.nr {
        return Err(AesError::WrongBoxCount {
            expected: rks.params.nr,
            actual: boxes.len(),
        });
    }
    Ok(())
}
