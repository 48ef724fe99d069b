//! Frame-level transcripts: one line per delivered frame.
//!
//! ```text
//! 0 M>S HELLO 13 5f1c2a0b9e33d471
//! ```
//!
//! Fields are index, direction, tag name, payload length and the first eight
//! bytes of SHA-256 over the payload, in hex.

use std::fmt::{self, Write as _};

use sha2::{Digest, Sha256};
use thiserror::Error;

use super::frame::{Frame, Tag};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    MasterToSlave,
    SlaveToMaster,
}

impl Direction {
    pub fn as_str(self) -> &'static str {
        match self {
            Direction::MasterToSlave => "M>S",
            Direction::SlaveToMaster => "S>M",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        match s {
            "M>S" => Some(Direction::MasterToSlave),
            "S>M" => Some(Direction::SlaveToMaster),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TranscriptLine {
    pub direction: Direction,
    pub tag: Tag,
    pub len: usize,
    pub digest: [u8; 8],
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Transcript {
    pub lines: Vec<TranscriptLine>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TranscriptError {
    #[error("transcript line {0} is malformed")]
    Malformed(usize),
    #[error("line {index}: {tag} before {missing}")]
    OutOfOrder {
        index: usize,
        tag: &'static str,
        missing: &'static str,
    },
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().fold(String::new(), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

impl Transcript {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record(&mut self, direction: Direction, frame: &Frame) {
        let digest = Sha256::digest(&frame.payload);
        self.lines.push(TranscriptLine {
            direction,
            tag: frame.tag,
            len: frame.payload.len(),
            digest: digest[..8].try_into().expect("sha256 is 32 bytes"),
        });
    }

    pub fn len(&self) -> usize {
        self.lines.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lines.is_empty()
    }

    pub fn count(&self, tag: Tag) -> usize {
        self.lines.iter().filter(|l| l.tag == tag).count()
    }

    pub fn parse(text: &str) -> Result<Self, TranscriptError> {
        let mut t = Transcript::new();
        for (n, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let bad = || TranscriptError::Malformed(n + 1);
            let f: Vec<&str> = line.split_whitespace().collect();
            let [idx, dir, tag, len, digest] = f[..] else {
                return Err(bad());
            };
            if idx.parse::<usize>().ok() != Some(t.lines.len()) || digest.len() != 16 {
                return Err(bad());
            }
            let mut d = [0u8; 8];
            for (i, out) in d.iter_mut().enumerate() {
                *out = u8::from_str_radix(&digest[2 * i..2 * i + 2], 16).map_err(|_| bad())?;
            }
            t.lines.push(TranscriptLine {
                direction: Direction::parse(dir).ok_or_else(bad)?,
                tag: Tag::from_name(tag).ok_or_else(bad)?,
                len: len.parse().map_err(|_| bad())?,
                digest: d,
            });
        }
        Ok(t)
    }

    /// Checks that no DATA precedes a two-way KEY_CONFIRM and a PARAMS echo,
    /// and nothing but ABORT/BYE follows an ABORT.
    pub fn validate(&self) -> Result<(), TranscriptError> {
        let mut confirm = [false; 2];
        let mut params = [false; 2];
        let mut aborted = false;
        let side = |d: Direction| d as usize;
        for (index, l) in self.lines.iter().enumerate() {
            let err = |missing| {
                Err(TranscriptError::OutOfOrder {
                    index,
                    tag: l.tag.name(),
                    missing,
                })
            };
            if aborted && l.tag != Tag::Abort {
                return err("nothing after ABORT");
            }
            match l.tag {
                Tag::KeyConfirm => confirm[side(l.direction)] = true,
                Tag::Params => {
                    if !(confirm[0] && confirm[1]) {
                        return err("KEY_CONFIRM");
                    }
                    params[side(l.direction)] = true;
                }
                Tag::Data => {
                    if !(confirm[0] && confirm[1]) {
                        return err("KEY_CONFIRM");
                    }
                    if !(params[0] && params[1]) {
                        return err("PARAMS");
                    }
                }
                Tag::Abort => aborted = true,
                _ => {}
            }
        }
        Ok(())
    }
}

impl fmt::Display for Transcript {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, l) in self.lines.iter().enumerate() {
            writeln!(
                f,
                "{i} {} {} {} {}",
                l.direction.as_str(),
                l.tag.name(),
                l.len,
                hex(&l.digest)
            )?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(frames: &[(Direction, Tag)]) -> Transcript {
        let mut t = Transcript::new();
        for (d, tag) in frames {
            t.record(*d, &Frame::new(*tag, vec![1, 2, 3]));
        }
        t
    }

    use Direction::*;

    #[test]
    fn text_roundtrip() {
        let tr = t(&[(MasterToSlave, Tag::Hello), (SlaveToMaster, Tag::Hello)]);
        let text = tr.to_string();
        assert!(text.starts_with("0 M>S HELLO 3 039058c6f2c0cb49\n"));
        assert_eq!(Transcript::parse(&text).unwrap(), tr);
        assert_eq!(
            Transcript::parse("0 X>Y HELLO 3 00"),
            Err(TranscriptError::Malformed(1))
        );
    }

    #[test]
    fn data_before_confirm_is_rejected() {
        let bad = t(&[(MasterToSlave, Tag::KeyConfirm), (MasterToSlave, Tag::Data)]);
        assert!(matches!(
            bad.validate(),
            Err(TranscriptError::OutOfOrder { index: 1, .. })
        ));
        let no_params = t(&[
            (MasterToSlave, Tag::KeyConfirm),
            (SlaveToMaster, Tag::KeyConfirm),
            (MasterToSlave, Tag::Data),
        ]);
        assert!(no_params.validate().is_err());
        let good = t(&[
            (MasterToSlave, Tag::KeyConfirm),
            (SlaveToMaster, Tag::KeyConfirm),
            (MasterToSlave, Tag::Params),
            (SlaveToMaster, Tag::Params),
            (MasterToSlave, Tag::Data),
            (MasterToSlave, Tag::Bye),
        ]);
        assert_eq!(good.validate(), Ok(()));
    }
}
