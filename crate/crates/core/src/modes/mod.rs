//! Online and offline QAES contexts and message encryption on top of them.
//!
//! Offline: 256 stream bits build one DQS-Box, the next `key_len` bits are
//! the master key for the classical key schedule. After initialization the
//! context never touches the stream again.
//!
//! Online: the context owns the stream. Each block invocation draws a
//! 128-bit whitening key `qk` followed by `nr + 1` round keys, straight from
//! the stream, and computes `C = E(P ^ qk)`. The box is regenerated from 256
//! stream bits once per message by default. Decryption replays the same
//! stream (the peer's copy of the sifted key) in the same order.

use thiserror::Error;

use crate::aes::{
    self, decrypt_block_per_round, encrypt_block_per_round, expand_key, params_for_key_len, AesError, Block,
    CipherParams, RoundKeySet, Sbox,
};
use crate::dqsbox::{generate_box, DqsBoxError, KEY_MATERIAL_BYTES};
use crate::qkd::{QkdError, QuantumKeyStream};

pub const BOX_BITS: usize = KEY_MATERIAL_BYTES * 8;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModeError {
    #[error(transparent)]
    Key(#[from] QkdError),
    #[error(transparent)]
    Aes(#[from] AesError),
    #[error(transparent)]
    Box(#[from] DqsBoxError),
    #[error("ciphertext length {0} is not a positive multiple of 16")]
    BadLength(usize),
    #[error("invalid padding")]
    BadPadding,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    Online,
    Offline,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BlockMode {
    Ctr,
    Cfb,
    Ofb,
    /// Independent blocks with byte-value-equals-pad-length padding.
    RawBlock,
}

impl BlockMode {
    pub const ALL: [BlockMode; 4] = [BlockMode::Ctr, BlockMode::Cfb, BlockMode::Ofb, BlockMode::RawBlock];

    pub fn is_stream(self) -> bool {
        !matches!(self, BlockMode::RawBlock)
    }

    /// Number of block-primitive invocations for a message of `len` bytes.
    pub fn invocations(self, len: usize) -> usize {
        match self {
            BlockMode::RawBlock => len / 16 + 1,
            _ => len.div_ceil(16),
        }
    }
}

/// How often fresh whitening and round keys are drawn in online mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum KeyRefresh {
    #[default]
    PerBlock,
    PerMessage,
}

/// How often the S-box is regenerated in online mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum BoxRefresh {
    #[default]
    PerMessage,
    PerBlock,
    /// A distinct box for every cipher round of every block.
    PerRound,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct OnlineOptions {
    pub key_refresh: KeyRefresh,
    pub box_refresh: BoxRefresh,
}

impl Mode {
    pub fn code(self) -> u8 {
        match self {
            Mode::Online => 1,
            Mode::Offline => 2,
        }
    }

    pub fn from_code(b: u8) -> Option<Self> {
        match b {
            1 => Some(Mode::Online),
            2 => Some(Mode::Offline),
            _ => None,
        }
    }
}

impl BlockMode {
    pub fn code(self) -> u8 {
        match self {
            BlockMode::Ctr => 1,
            BlockMode::Cfb => 2,
            BlockMode::Ofb => 3,
            BlockMode::RawBlock => 4,
        }
    }

    pub fn from_code(b: u8) -> Option<Self> {
        BlockMode::ALL.into_iter().find(|m| m.code() == b)
    }
}

impl OnlineOptions {
    /// One byte: key refresh in the high nibble, box refresh in the low nibble.
    pub fn code(self) -> u8 {
        let k = match self.key_refresh {
            KeyRefresh::PerBlock => 0,
            KeyRefresh::PerMessage => 1,
        };
        let b = match self.box_refresh {
            BoxRefresh::PerMessage => 0,
            BoxRefresh::PerBlock => 1,
            BoxRefresh::PerRound => 2,
        };
        (k << 4) | b
    }

    pub fn from_code(c: u8) -> Option<Self> {
        let key_refresh = match c >> 4 {
            0 => KeyRefresh::PerBlock,
            1 => KeyRefresh::PerMessage,
            _ => return None,
        };
        let box_refresh = match c & 0x0f {
            0 => BoxRefresh::PerMessage,
            1 => BoxRefresh::PerBlock,
            2 => BoxRefresh::PerRound,
            _ => return None,
        };
        Some(OnlineOptions {
            key_refresh,
            box_refresh,
        })
    }
}

#[derive(Debug, Clone)]
enum Boxes {
    Single(Sbox),
    PerRound(Vec<Sbox>),
}

#[derive(Debug, Clone)]
struct BlockKeys {
    whitening: Option<Block>,
    rks: RoundKeySet,
}

#[derive(Debug, Clone)]
enum Source {
    Offline,
    Online {
        stream: QuantumKeyStream,
        options: OnlineOptions,
    },
}

#[derive(Debug, Clone)]
pub struct QaesContext {
    params: CipherParams,
    block_mode: BlockMode,
    source: Source,
    boxes: Option<Boxes>,
    keys: Option<BlockKeys>,
    box_refreshes: usize,
    blocks: usize,
}

fn xor_block(a: &Block, b: &Block) -> Block {
    core::array::from_fn(|i| a[i] ^ b[i])
}

fn draw_box(stream: &mut QuantumKeyStream) -> Result<Sbox, ModeError> {
    let material: [u8; KEY_MATERIAL_BYTES] = stream.take_array()?;
    Ok(generate_box(&material)?.into_sbox())
}

impl QaesContext {
    /// Offline initialization: box from the next 256 bits, master key from the
    /// following `key_len` bits. Nothing is consumed if fewer are available.
    pub fn offline_init(
        stream: &mut QuantumKeyStream,
        key_len: usize,
        block_mode: BlockMode,
    ) -> Result<Self, ModeError> {
        let params = params_for_key_len(key_len)?;
        stream.ensure(BOX_BITS + key_len)?;
        let sbox = draw_box(stream)?;
        let key = stream.take_bits(key_len)?;
        Self::offline_with_box(key.as_bytes(), params, sbox, block_mode)
    }

    /// Offline context from an explicit master key and box. With
    /// [`Sbox::standard`] this is classical AES.
    pub fn offline_with_box(
        key: &[u8],
        params: CipherParams,
        sbox: Sbox,
        block_mode: BlockMode,
    ) -> Result<Self, ModeError> {
        let rks = expand_key(key, params)?;
        Ok(QaesContext {
            params,
            block_mode,
            source: Source::Offline,
            boxes: Some(Boxes::Single(sbox)),
            keys: Some(BlockKeys { whitening: None, rks }),
            box_refreshes: 1,
            blocks: 0,
        })
    }

    pub fn online(
        stream: QuantumKeyStream,
        key_len: usize,
        block_mode: BlockMode,
        options: OnlineOptions,
    ) -> Result<Self, ModeError> {
        Ok(QaesContext {
            params: params_for_key_len(key_len)?,
            block_mode,
            source: Source::Online { stream, options },
            boxes: None,
            keys: None,
            box_refreshes: 0,
            blocks: 0,
        })
    }

    pub fn mode(&self) -> Mode {
        match self.source {
            Source::Offline => Mode::Offline,
            Source::Online { .. } => Mode::Online,
        }
    }

    pub fn params(&self) -> CipherParams {
        self.params
    }

    pub fn block_mode(&self) -> BlockMode {
        self.block_mode
    }

    pub fn stream(&self) -> Option<&QuantumKeyStream> {
        match &self.source {
            Source::Online { stream, .. } => Some(stream),
            Source::Offline => None,
        }
    }

    /// Number of boxes generated so far (per-round refresh counts each round).
    pub fn box_refreshes(&self) -> usize {
        self.box_refreshes
    }

    /// Block-primitive invocations so far.
    pub fn blocks_processed(&self) -> usize {
        self.blocks
    }

    /// The box currently in use, if a single box is active.
    pub fn current_box(&self) -> Option<&Sbox> {
        match &self.boxes {
            Some(Boxes::Single(b)) => Some(b),
            _ => None,
        }
    }

    fn key_draw_bits(&self) -> usize {
        128 * (self.params.nr() + 2)
    }

    /// Stream bits a message of `len` bytes will consume (zero offline).
    pub fn bits_for_message(&self, len: usize) -> usize {
        let Source::Online { options, .. } = &self.source else {
            return 0;
        };
        let calls = self.block_mode.invocations(len);
        if calls == 0 {
            return 0;
        }
        let nr = self.params.nr();
        let boxes = match options.box_refresh {
            BoxRefresh::PerMessage => BOX_BITS,
            BoxRefresh::PerBlock => calls * BOX_BITS,
            BoxRefresh::PerRound => calls * nr * BOX_BITS,
        };
        let keys = match options.key_refresh {
            KeyRefresh::PerMessage => self.key_draw_bits(),
            KeyRefresh::PerBlock => calls * self.key_draw_bits(),
        };
        boxes + keys
    }

    /// Starts a new message: per-message material is redrawn lazily on first use.
    pub fn begin_message(&mut self) {
        if let Source::Online { .. } = self.source {
            self.boxes = None;
            self.keys = None;
        }
    }

    /// Draws whatever the refresh policy requires before the next block.
    fn prepare_block(&mut self) -> Result<(), ModeError> {
        let nr = self.params.nr();
        let params = self.params;
        let Source::Online { stream, options } = &mut self.source else {
            return Ok(());
        };
        let need_box = match options.box_refresh {
            BoxRefresh::PerMessage => self.boxes.is_none(),
            BoxRefresh::PerBlock | BoxRefresh::PerRound => true,
        };
        let need_keys = match options.key_refresh {
            KeyRefresh::PerMessage => self.keys.is_none(),
            KeyRefresh::PerBlock => true,
        };
        let needed = need_box as usize
            * match options.box_refresh {
                BoxRefresh::PerRound => nr * BOX_BITS,
                _ => BOX_BITS,
            }
            + need_keys as usize * 128 * (nr + 2);
        stream.ensure(needed)?;
        if need_box {
            self.boxes = Some(match options.box_refresh {
                BoxRefresh::PerRound => {
                    let boxes = (0..nr).map(|_| draw_box(stream)).collect::<Result<Vec<_>, _>>()?;
                    self.box_refreshes += nr;
                    Boxes::PerRound(boxes)
                }
                _ => {
                    self.box_refreshes += 1;
                    Boxes::Single(draw_box(stream)?)
                }
            });
        }
        if need_keys {
            let whitening: Block = stream.take_array()?;
            let round_keys = (0..=nr)
                .map(|_| stream.take_array::<16>())
                .collect::<Result<Vec<Block>, _>>()?;
            self.keys = Some(BlockKeys {
                whitening: Some(whitening),
                rks: RoundKeySet::from_keys(params, round_keys)?,
            });
        }
        Ok(())
    }

    fn material(&self) -> (&Boxes, &BlockKeys) {
        (
            self.boxes.as_ref().expect("prepared"),
            self.keys.as_ref().expect("prepared"),
        )
    }

    /// The block primitive: `C = E(P ^ qk)` online, `C = E(P)` offline.
    pub fn encrypt_block(&mut self, p: &Block) -> Result<Block, ModeError> {
        self.prepare_block()?;
        self.blocks += 1;
        let (boxes, keys) = self.material();
        let input = keys.whitening.as_ref().map_or(*p, |qk| xor_block(p, qk));
        Ok(match boxes {
            Boxes::Single(sbox) => aes::encrypt_block(&input, &keys.rks, sbox),
            Boxes::PerRound(list) => encrypt_block_per_round(&input, &keys.rks, list)?,
        })
    }

    /// Inverse of [`encrypt_block`](Self::encrypt_block): `P = D(C) ^ qk`.
    pub fn decrypt_block(&mut self, c: &Block) -> Result<Block, ModeError> {
        self.prepare_block()?;
        self.blocks += 1;
        let (boxes, keys) = self.material();
        let out = match boxes {
            Boxes::Single(sbox) => aes::decrypt_block(c, &keys.rks, sbox),
            Boxes::PerRound(list) => decrypt_block_per_round(c, &keys.rks, list)?,
        };
        Ok(keys.whitening.as_ref().map_or(out, |qk| xor_block(&out, qk)))
    }

    /// Encrypts one message. The nonce must be unique per message under a
    /// given context; reuse is not detected. Fails before consuming any key
    /// material if the stream cannot cover the whole message.
    pub fn encrypt_message(&mut self, plaintext: &[u8], nonce: &Block) -> Result<Vec<u8>, ModeError> {
        self.check_stream(plaintext.len())?;
        self.begin_message();
        match self.block_mode {
            BlockMode::Ctr => self.ctr(plaintext, nonce),
            BlockMode::Ofb => self.ofb(plaintext, nonce),
            BlockMode::Cfb => self.cfb(plaintext, nonce, true),
            BlockMode::RawBlock => {
                let pad = 16 - plaintext.len() % 16;
                let mut padded = plaintext.to_vec();
                padded.resize(plaintext.len() + pad, pad as u8);
                let mut out = Vec::with_capacity(padded.len());
                for chunk in padded.chunks_exact(16) {
                    out.extend_from_slice(&self.encrypt_block(chunk.try_into().expect("16-byte chunk"))?);
                }
                Ok(out)
            }
        }
    }

    pub fn decrypt_message(&mut self, ciphertext: &[u8], nonce: &Block) -> Result<Vec<u8>, ModeError> {
        match self.block_mode {
            BlockMode::RawBlock => {
                if ciphertext.is_empty() || !ciphertext.len().is_multiple_of(16) {
                    return Err(ModeError::BadLength(ciphertext.len()));
                }
                self.check_stream(ciphertext.len() - 1)?;
                self.begin_message();
                let mut out = Vec::with_capacity(ciphertext.len());
                for chunk in ciphertext.chunks_exact(16) {
                    out.extend_from_slice(&self.decrypt_block(chunk.try_into().expect("16-byte chunk"))?);
                }
                let pad = *out.last().expect("non-empty") as usize;
                if pad == 0 || pad > 16 || out[out.len() - pad..].iter().any(|&b| b as usize != pad) {
                    return Err(ModeError::BadPadding);
                }
                out.truncate(out.len() - pad);
                Ok(out)
            }
            mode => {
                self.check_stream(ciphertext.len())?;
                self.begin_message();
                match mode {
                    BlockMode::Ctr => self.ctr(ciphertext, nonce),
                    BlockMode::Ofb => self.ofb(ciphertext, nonce),
                    _ => self.cfb(ciphertext, nonce, false),
                }
            }
        }
    }

    fn check_stream(&self, len: usize) -> Result<(), ModeError> {
        match &self.source {
            Source::Online { stream, .. } => Ok(stream.ensure(self.bits_for_message(len))?),
            Source::Offline => Ok(()),
        }
    }

    fn ctr(&mut self, input: &[u8], nonce: &Block) -> Result<Vec<u8>, ModeError> {
        let start = u128::from_be_bytes(*nonce);
        let mut out = Vec::with_capacity(input.len());
        for (i, chunk) in input.chunks(16).enumerate() {
            let ks = self.encrypt_block(&start.wrapping_add(i as u128).to_be_bytes())?;
            out.extend(chunk.iter().zip(ks).map(|(a, k)| a ^ k));
        }
        Ok(out)
    }

    fn ofb(&mut self, input: &[u8], nonce: &Block) -> Result<Vec<u8>, ModeError> {
        let mut feedback = *nonce;
        let mut out = Vec::with_capacity(input.len());
        for chunk in input.chunks(16) {
            feedback = self.encrypt_block(&feedback)?;
            out.extend(chunk.iter().zip(feedback).map(|(a, k)| a ^ k));
        }
        Ok(out)
    }

    /// Full-block CFB; the final partial block is truncated.
    fn cfb(&mut self, input: &[u8], nonce: &Block, encrypting: bool) -> Result<Vec<u8>, ModeError> {
        let mut feedback = *nonce;
        let mut out = Vec::with_capacity(input.len());
        for chunk in input.chunks(16) {
            let ks = self.encrypt_block(&feedback)?;
            let produced: Vec<u8> = chunk.iter().zip(ks).map(|(a, k)| a ^ k).collect();
            let cipher_side = if encrypting { &produced[..] } else { chunk };
            if chunk.len() == 16 {
                feedback.copy_from_slice(cipher_side);
            }
            out.extend_from_slice(&produced);
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aes::{encrypt_block, AES_128};
    use rand::{RngCore, SeedableRng};
    use rand_chacha::ChaCha20Rng;

    fn random_stream(bytes: usize, seed: u64) -> QuantumKeyStream {
        let mut v = vec![0u8; bytes];
        ChaCha20Rng::seed_from_u64(seed).fill_bytes(&mut v);
        QuantumKeyStream::from_bytes(&v)
    }

    #[test]
    fn offline_init_consumes_box_and_key() {
        let mut s = random_stream(128, 1);
        let ctx = QaesContext::offline_init(&mut s, 192, BlockMode::Ctr).unwrap();
        assert_eq!(s.cursor(), 256 + 192);
        assert_eq!(ctx.params().nr(), 12);
        assert_eq!(ctx.mode(), Mode::Offline);
    }

    #[test]
    fn offline_init_depletion_leaves_cursor() {
        let mut s = random_stream(40, 1);
        let err = QaesContext::offline_init(&mut s, 128, BlockMode::Ctr).unwrap_err();
        assert!(matches!(err, ModeError::Key(QkdError::KeyDepleted { .. })));
        assert_eq!(s.cursor(), 0);
    }

    #[test]
    fn online_block_is_whitened_encryption() {
        let s = random_stream(1024, 5);
        let mut ctx = QaesContext::online(s.clone(), 128, BlockMode::RawBlock, Default::default()).unwrap();
        let p = [0x11u8; 16];
        let c = ctx.encrypt_block(&p).unwrap();

        let mut replay = s;
        let material: [u8; 32] = replay.take_array().unwrap();
        let sbox = generate_box(&material).unwrap();
        let qk: Block = replay.take_array().unwrap();
        let keys: Vec<Block> = (0..11).map(|_| replay.take_array().unwrap()).collect();
        let rks = RoundKeySet::from_keys(AES_128, keys).unwrap();
        assert_eq!(c, encrypt_block(&xor_block(&p, &qk), &rks, sbox.sbox()));
        assert_eq!(ctx.stream().unwrap().cursor(), replay.cursor());
    }

    #[test]
    fn raw_block_padding_errors() {
        let mut s = random_stream(64, 2);
        let mut ctx = QaesContext::offline_init(&mut s, 128, BlockMode::RawBlock).unwrap();
        assert_eq!(ctx.decrypt_message(&[0u8; 15], &[0; 16]), Err(ModeError::BadLength(15)));
        assert_eq!(ctx.decrypt_message(&[], &[0; 16]), Err(ModeError::BadLength(0)));
        let c = ctx.encrypt_message(b"", &[0; 16]).unwrap();
        assert_eq!(c.len(), 16);
        assert_eq!(ctx.decrypt_message(&c, &[0; 16]).unwrap(), b"");
    }

    #[test]
    fn insufficient_stream_fails_before_consuming() {
        let s = random_stream(256, 3);
        let mut ctx = QaesContext::online(s, 128, BlockMode::Ctr, Default::default()).unwrap();
        let err = ctx.encrypt_message(&[0u8; 1000], &[0; 16]).unwrap_err();
        assert!(matches!(err, ModeError::Key(QkdError::KeyDepleted { .. })));
        assert_eq!(ctx.stream().unwrap().cursor(), 0);
    }

    #[test]
    fn per_message_keys_reuse_material() {
        let opts = OnlineOptions {
            key_refresh: KeyRefresh::PerMessage,
            box_refresh: BoxRefresh::PerMessage,
        };
        let s = random_stream(4096, 4);
        let mut enc = QaesContext::online(s.clone(), 256, BlockMode::Ofb, opts).unwrap();
        let msg = vec![7u8; 5000];
        let c = enc.encrypt_message(&msg, &[1; 16]).unwrap();
        assert_eq!(enc.stream().unwrap().cursor(), 256 + 128 * 16);
        let mut dec = QaesContext::online(s, 256, BlockMode::Ofb, opts).unwrap();
        assert_eq!(dec.decrypt_message(&c, &[1; 16]).unwrap(), msg);
    }

    #[test]
    fn per_round_boxes_roundtrip_and_account() {
        let opts = OnlineOptions {
            key_refresh: KeyRefresh::PerBlock,
            box_refresh: BoxRefresh::PerRound,
        };
        let s = random_stream(20_000, 6);
        let mut enc = QaesContext::online(s.clone(), 128, BlockMode::RawBlock, opts).unwrap();
        let msg = b"per-round boxes, three blocks worth of text!".to_vec();
        let c = enc.encrypt_message(&msg, &[0; 16]).unwrap();
        assert_eq!(enc.box_refreshes(), 3 * 10);
        assert_eq!(enc.stream().unwrap().cursor(), 3 * 10 * 256 + 3 * 128 * 12);
        assert_eq!(enc.bits_for_message(msg.len()), enc.stream().unwrap().cursor());
        let mut dec = QaesContext::online(s, 128, BlockMode::RawBlock, opts).unwrap();
        assert_eq!(dec.decrypt_message(&c, &[0; 16]).unwrap(), msg);
    }
}
