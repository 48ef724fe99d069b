//! Test oracles written without reference to the library internals.
#![allow(dead_code)]

use aes::cipher::generic_array::GenericArray;
use aes::cipher::{BlockDecrypt, BlockEncrypt, KeyInit};
use qaes_core::qkd::QuantumKeyStream;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

/// Russian-peasant multiplication modulo x^8 + x^4 + x^3 + x + 1.
pub fn gmul(mut a: u8, mut b: u8) -> u8 {
    let mut p = 0;
    while b != 0 {
        if b & 1 == 1 {
            p ^= a;
        }
        let hi = a & 0x80;
        a <<= 1;
        if hi != 0 {
            a ^= 0x1b;
        }
        b >>= 1;
    }
    p
}

fn ginv(a: u8) -> u8 {
    // a^254 = a^-1, and 0 maps to 0.
    let mut r = 1u8;
    for _ in 0..254 {
        r = gmul(r, a);
    }
    if a == 0 {
        0
    } else {
        r
    }
}

/// The AES S-box built from the field inverse and the affine map.
pub fn reference_sbox() -> [u8; 256] {
    core::array::from_fn(|x| {
        let b = ginv(x as u8);
        b ^ b.rotate_left(1) ^ b.rotate_left(2) ^ b.rotate_left(3) ^ b.rotate_left(4) ^ 0x63
    })
}

/// State indexed as `s[row][col]`, loaded column by column.
type State = [[u8; 4]; 4];

fn load(block: &[u8; 16]) -> State {
    let mut s = [[0; 4]; 4];
    for c in 0..4 {
        for r in 0..4 {
            s[r][c] = block[4 * c + r];
        }
    }
    s
}

fn store(s: &State) -> [u8; 16] {
    let mut out = [0; 16];
    for c in 0..4 {
        for r in 0..4 {
            out[4 * c + r] = s[r][c];
        }
    }
    out
}

fn add_key(s: &mut State, k: &[u8; 16]) {
    let ks = load(k);
    for r in 0..4 {
        for c in 0..4 {
            s[r][c] ^= ks[r][c];
        }
    }
}

fn sub(s: &mut State, sbox: &[u8; 256]) {
    for row in s.iter_mut() {
        for v in row.iter_mut() {
            *v = sbox[*v as usize];
        }
    }
}

fn shift(s: &mut State) {
    for (r, row) in s.iter_mut().enumerate() {
        row.rotate_left(r);
    }
}

fn mix(s: &mut State) {
    for c in 0..4 {
        let a: [u8; 4] = core::array::from_fn(|r| s[r][c]);
        for r in 0..4 {
            s[r][c] = gmul(a[r], 2) ^ gmul(a[(r + 1) % 4], 3) ^ a[(r + 2) % 4] ^ a[(r + 3) % 4];
        }
    }
}

/// FIPS-197 key expansion using the computed S-box.
pub fn reference_expand(key: &[u8]) -> Vec<[u8; 16]> {
    let sbox = reference_sbox();
    let nk = key.len() / 4;
    let nr = nk + 6;
    let mut w: Vec<[u8; 4]> = key.chunks(4).map(|c| c.try_into().unwrap()).collect();
    let mut rcon = 1u8;
    for i in nk..4 * (nr + 1) {
        let mut t = w[i - 1];
        if i % nk == 0 {
            t.rotate_left(1);
            t = t.map(|b| sbox[b as usize]);
            t[0] ^= rcon;
            rcon = gmul(rcon, 2);
        } else if nk > 6 && i % nk == 4 {
            t = t.map(|b| sbox[b as usize]);
        }
        let prev = w[i - nk];
        w.push(core::array::from_fn(|j| prev[j] ^ t[j]));
    }
    w.chunks(4)
        .map(|ws| core::array::from_fn(|i| ws[i / 4][i % 4]))
        .collect()
}

/// Cipher with arbitrary round keys; round `r` (1-based) uses `boxes[r - 1]`.
pub fn reference_encrypt_rounds(block: &[u8; 16], round_keys: &[[u8; 16]], boxes: &[[u8; 256]]) -> [u8; 16] {
    let nr = round_keys.len() - 1;
    let mut s = load(block);
    add_key(&mut s, &round_keys[0]);
    for r in 1..=nr {
        sub(&mut s, &boxes[r - 1]);
        shift(&mut s);
        if r != nr {
            mix(&mut s);
        }
        add_key(&mut s, &round_keys[r]);
    }
    store(&s)
}

pub fn reference_encrypt(block: &[u8; 16], round_keys: &[[u8; 16]], sbox: &[u8; 256]) -> [u8; 16] {
    let boxes = vec![*sbox; round_keys.len() - 1];
    reference_encrypt_rounds(block, round_keys, &boxes)
}

/// AES from the `aes` crate, any key size.
pub fn crate_encrypt(key: &[u8], block: &[u8; 16]) -> [u8; 16] {
    let mut b = GenericArray::clone_from_slice(block);
    match key.len() {
        16 => aes::Aes128::new(GenericArray::from_slice(key)).encrypt_block(&mut b),
        24 => aes::Aes192::new(GenericArray::from_slice(key)).encrypt_block(&mut b),
        32 => aes::Aes256::new(GenericArray::from_slice(key)).encrypt_block(&mut b),
        n => panic!("bad key length {n}"),
    }
    b.into()
}

pub fn crate_decrypt(key: &[u8], block: &[u8; 16]) -> [u8; 16] {
    let mut b = GenericArray::clone_from_slice(block);
    match key.len() {
        16 => aes::Aes128::new(GenericArray::from_slice(key)).decrypt_block(&mut b),
        24 => aes::Aes192::new(GenericArray::from_slice(key)).decrypt_block(&mut b),
        32 => aes::Aes256::new(GenericArray::from_slice(key)).decrypt_block(&mut b),
        n => panic!("bad key length {n}"),
    }
    b.into()
}

/// Keyed shuffle of 0..=255: AES-256 counter-mode bytes (counter from zero,
/// big-endian) drive a descending Fisher-Yates with masked rejection.
pub fn reference_box(key: &[u8; 32]) -> [u8; 256] {
    let mut bytes = Vec::new();
    let mut counter = 0u128;
    let mut next = || {
        if bytes.is_empty() {
            let mut blk = crate_encrypt(key, &counter.to_be_bytes()).to_vec();
            blk.reverse();
            bytes = blk;
            counter += 1;
        }
        bytes.pop().unwrap()
    };
    let mut p: [u8; 256] = core::array::from_fn(|i| i as u8);
    for i in (1..256usize).rev() {
        let mask = mask_for(i);
        let j = loop {
            let r = (next() & mask) as usize;
            if r <= i {
                break r;
            }
        };
        p.swap(i, j);
    }
    p
}

/// Bit mask for uniform draws from `0..=i`: all ones up to the top bit of `i`.
pub fn mask_for(i: usize) -> u8 {
    let mut m = 0usize;
    while m < i {
        m = (m << 1) | 1;
    }
    m as u8
}

pub fn random_bytes(n: usize, seed: u64) -> Vec<u8> {
    let mut v = vec![0u8; n];
    ChaCha20Rng::seed_from_u64(seed).fill_bytes(&mut v);
    v
}

/// Stand-in for a long-running QKD link: a shared stream of uniform bits.
pub fn synthetic_stream(bits: usize, seed: u64) -> QuantumKeyStream {
    QuantumKeyStream::from_bytes(&random_bytes(bits.div_ceil(8), seed))
}

/// Row independence exactly as defined for the analyzer, computed directly.
pub fn reference_row_independence(a: &[u8; 16], b: &[u8; 16]) -> Option<f64> {
    let z = |row: &[u8; 16]| -> Option<Vec<f64>> {
        let max = *row.iter().max().unwrap() as f64;
        let min = *row.iter().min().unwrap() as f64;
        if max == min {
            return None;
        }
        let m = (max - min) / 2.0;
        let sd = ((max - min) * (max - min) / 16.0).sqrt();
        Some(row.iter().map(|&x| (x as f64 - m) / sd).collect())
    };
    let (za, zb) = (z(a)?, z(b)?);
    let dot: f64 = za.iter().zip(&zb).map(|(x, y)| x * y).sum();
    let na: f64 = za.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = zb.iter().map(|x| x * x).sum::<f64>().sqrt();
    Some((1.0 - (dot / (na * nb)).abs()) * 100.0)
}
