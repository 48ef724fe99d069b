use std::io::{self, Read, Write};

use thiserror::Error;

/// Maximum payload size in bytes.
pub const MAX_FRAME: usize = 1 << 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum Tag {
    Hello = 1,
    QBatch = 2,
    Bases = 3,
    SiftIdx = 4,
    QberSample = 5,
    KeyConfirm = 6,
    Params = 7,
    Data = 8,
    Abort = 9,
    Bye = 10,
}

impl Tag {
    pub fn from_u8(b: u8) -> Option<Tag> {
        use Tag::*;
        Some(match b {
            1 => Hello,
            2 => QBatch,
            3 => Bases,
            4 => SiftIdx,
            5 => QberSample,
            6 => KeyConfirm,
            7 => Params,
            8 => Data,
            9 => Abort,
            10 => Bye,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Tag::Hello => "HELLO",
            Tag::QBatch => "QBATCH",
            Tag::Bases => "BASES",
            Tag::SiftIdx => "SIFT_IDX",
            Tag::QberSample => "QBER_SAMPLE",
            Tag::KeyConfirm => "KEY_CONFIRM",
            Tag::Params => "PARAMS",
            Tag::Data => "DATA",
            Tag::Abort => "ABORT",
            Tag::Bye => "BYE",
        }
    }

    pub fn from_name(s: &str) -> Option<Tag> {
        (1..=10).filter_map(Tag::from_u8).find(|t| t.name() == s)
    }

    /// Frames that stand in for the quantum channel.
    pub fn is_quantum(self) -> bool {
        matches!(self, Tag::QBatch)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frame {
    pub tag: Tag,
    pub payload: Vec<u8>,
}

#[derive(Debug, Error)]
pub enum FrameError {
    #[error("transport: {0}")]
    Io(#[from] io::Error),
    #[error("unknown frame tag {0}")]
    UnknownTag(u8),
    #[error("frame of {0} bytes exceeds the 1 MiB limit")]
    TooLarge(usize),
}

impl Frame {
    pub fn new(tag: Tag, payload: Vec<u8>) -> Self {
        Frame { tag, payload }
    }

    pub fn len(&self) -> usize {
        self.payload.len()
    }

    pub fn is_empty(&self) -> bool {
        self.payload.is_empty()
    }

    /// `[len: u32 BE][tag: u8][payload]`, where len counts payload bytes.
    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(5 + self.payload.len());
        out.extend_from_slice(&(self.payload.len() as u32).to_be_bytes());
        out.push(self.tag as u8);
        out.extend_from_slice(&self.payload);
        out
    }

    pub fn write_to<W: Write>(&self, w: &mut W) -> Result<(), FrameError> {
        if self.payload.len() > MAX_FRAME {
            return Err(FrameError::TooLarge(self.payload.len()));
        }
        w.write_all(&self.encode())?;
        w.flush()?;
        Ok(())
    }

    pub fn read_from<R: Read>(r: &mut R) -> Result<Frame, FrameError> {
        let mut head = [0u8; 5];
        r.read_exact(&mut head)?;
        let len = u32::from_be_bytes(head[..4].try_into().expect("4 bytes")) as usize;
        if len > MAX_FRAME {
            return Err(FrameError::TooLarge(len));
        }
        let tag = Tag::from_u8(head[4]).ok_or(FrameError::UnknownTag(head[4]))?;
        let mut payload = vec![0u8; len];
        r.read_exact(&mut payload)?;
        Ok(Frame { tag, payload })
    }
}
