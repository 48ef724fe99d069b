//! Encrypted file container.
//!
//! ```text
//! offset  size  field
//!      0     4  magic "QAES"
//!      4     1  version (1)
//!      5     1  mode (1 online, 2 offline)
//!      6     1  key length code (1 = 128, 2 = 192, 3 = 256)
//!      7     1  block mode (1 CTR, 2 CFB, 3 OFB, 4 raw block)
//!      8    16  nonce
//!     24    16  reserved, zero
//!     40     8  payload length, big-endian
//! ```
//!
//! Online containers carry 17 more bytes before the payload: the refresh
//! policy byte, the BB84 session seed (u64 BE) and the 8-byte config digest,
//! which is what a decryptor needs to replay the key stream.

use thiserror::Error;

use crate::aes::Block;
use crate::modes::{BlockMode, Mode, OnlineOptions};

pub const MAGIC: &[u8; 4] = b"QAES";
pub const VERSION: u8 = 1;
pub const HEADER_LEN: usize = 48;
pub const ONLINE_EXT_LEN: usize = 17;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ContainerError {
    #[error("not a QAES container (bad magic)")]
    BadMagic,
    #[error("unsupported container version {0}")]
    UnsupportedVersion(u8),
    #[error("invalid {field} byte {value:#04x}")]
    BadField { field: &'static str, value: u8 },
    #[error("reserved header bytes are not zero")]
    ReservedNotZero,
    #[error("container truncated: need {expected} bytes, have {actual}")]
    Truncated { expected: usize, actual: usize },
    #[error("{0} unexpected bytes after payload")]
    TrailingBytes(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OnlineExtension {
    pub options: OnlineOptions,
    pub session_seed: u64,
    pub config_digest: [u8; 8],
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Container {
    pub mode: Mode,
    pub key_len: usize,
    pub block_mode: BlockMode,
    pub nonce: Block,
    /// Present exactly when `mode` is online.
    pub online: Option<OnlineExtension>,
    pub payload: Vec<u8>,
}

fn key_len_code(bits: usize) -> u8 {
    match bits {
        128 => 1,
        192 => 2,
        256 => 3,
        _ => 0,
    }
}

fn key_len_from_code(code: u8) -> Option<usize> {
    match code {
        1 => Some(128),
        2 => Some(192),
        3 => Some(256),
        _ => None,
    }
}

impl Container {
    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(HEADER_LEN + ONLINE_EXT_LEN + self.payload.len());
        out.extend_from_slice(MAGIC);
        out.extend([
            VERSION,
            self.mode.code(),
            key_len_code(self.key_len),
            self.block_mode.code(),
        ]);
        out.extend_from_slice(&self.nonce);
        out.extend_from_slice(&[0; 16]);
        out.extend_from_slice(&(self.payload.len() as u64).to_be_bytes());
        if let Some(ext) = &self.online {
            out.push(ext.options.code());
            out.extend_from_slice(&ext.session_seed.to_be_bytes());
            out.extend_from_slice(&ext.config_digest);
        }
        out.extend_from_slice(&self.payload);
        out
    }

    pub fn decode(bytes: &[u8]) -> Result<Self, ContainerError> {
        let need = |expected: usize| {
            if bytes.len() < expected {
                Err(ContainerError::Truncated {
                    expected,
                    actual: bytes.len(),
                })
            } else {
                Ok(())
            }
        };
        if bytes.len() < 4 || &bytes[..4] != MAGIC {
            return Err(ContainerError::BadMagic);
        }
        need(5)?;
        if bytes[4] != VERSION {
            return Err(ContainerError::UnsupportedVersion(bytes[4]));
        }
        need(HEADER_LEN)?;
        let bad = |field, value| ContainerError::BadField { field, value };
        let mode = Mode::from_code(bytes[5]).ok_or(bad("mode", bytes[5]))?;
        let key_len = key_len_from_code(bytes[6]).ok_or(bad("key length", bytes[6]))?;
        let block_mode = BlockMode::from_code(bytes[7]).ok_or(bad("block mode", bytes[7]))?;
        let nonce: Block = bytes[8..24].try_into().expect("16 bytes");
        if bytes[24..40].iter().any(|&b| b != 0) {
            return Err(ContainerError::ReservedNotZero);
        }
        let payload_len = u64::from_be_bytes(bytes[40..48].try_into().expect("8 bytes"));

        let mut pos = HEADER_LEN;
        let online = match mode {
            Mode::Offline => None,
            Mode::Online => {
                need(pos + ONLINE_EXT_LEN)?;
                let ext = &bytes[pos..pos + ONLINE_EXT_LEN];
                pos += ONLINE_EXT_LEN;
                Some(OnlineExtension {
                    options: OnlineOptions::from_code(ext[0]).ok_or(bad("refresh policy", ext[0]))?,
                    session_seed: u64::from_be_bytes(ext[1..9].try_into().expect("8 bytes")),
                    config_digest: ext[9..17].try_into().expect("8 bytes"),
                })
            }
        };

        let end = usize::try_from(payload_len)
            .ok()
            .and_then(|n| n.checked_add(pos))
            .unwrap_or(usize::MAX);
        if bytes.len() < end {
            return Err(ContainerError::Truncated {
                expected: end,
                actual: bytes.len(),
            });
        }
        if bytes.len() > end {
            return Err(ContainerError::TrailingBytes(bytes.len() - end));
        }
        Ok(Container {
            mode,
            key_len,
            block_mode,
            nonce,
            online,
            payload: bytes[pos..].to_vec(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn offline(payload: Vec<u8>) -> Container {
        Container {
            mode: Mode::Offline,
            key_len: 192,
            block_mode: BlockMode::Ofb,
            nonce: [7; 16],
            online: None,
            payload,
        }
    }

    #[test]
    fn header_layout() {
        let bytes = offline(vec![0xee; 3]).encode();
        assert_eq!(bytes.len(), HEADER_LEN + 3);
        assert_eq!(&bytes[..8], b"QAES\x01\x02\x02\x03");
        assert_eq!(&bytes[8..24], &[7; 16]);
        assert_eq!(&bytes[24..40], &[0; 16]);
        assert_eq!(&bytes[40..48], &[0, 0, 0, 0, 0, 0, 0, 3]);
    }

    #[test]
    fn online_extension_roundtrip() {
        let c = Container {
            mode: Mode::Online,
            key_len: 128,
            block_mode: BlockMode::Ctr,
            nonce: [1; 16],
            online: Some(OnlineExtension {
                options: OnlineOptions::default(),
                session_seed: 0x0102030405060708,
                config_digest: [9; 8],
            }),
            payload: vec![],
        };
        let bytes = c.encode();
        assert_eq!(bytes.len(), HEADER_LEN + ONLINE_EXT_LEN);
        assert_eq!(&bytes[48..57], &[0, 1, 2, 3, 4, 5, 6, 7, 8]);
        assert_eq!(Container::decode(&bytes).unwrap(), c);
    }

    #[test]
    fn rejects_damage() {
        let good = offline(vec![1, 2, 3, 4]).encode();
        let mut b = good.clone();
        b[0] = b'X';
        assert_eq!(Container::decode(&b), Err(ContainerError::BadMagic));
        let mut b = good.clone();
        b[4] = 2;
        assert_eq!(Container::decode(&b), Err(ContainerError::UnsupportedVersion(2)));
        assert!(matches!(
            Container::decode(&good[..good.len() - 1]),
            Err(ContainerError::Truncated { .. })
        ));
        assert!(matches!(
            Container::decode(&good[..20]),
            Err(ContainerError::Truncated { .. })
        ));
        let mut b = good.clone();
        b.push(0);
        assert_eq!(Container::decode(&b), Err(ContainerError::TrailingBytes(1)));
        let mut b = good;
        b[30] = 1;
        assert_eq!(Container::decode(&b), Err(ContainerError::ReservedNotZero));
    }
}
