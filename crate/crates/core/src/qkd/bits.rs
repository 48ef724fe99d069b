use std::fmt;

/// Bit string packed MSB-first into bytes. Trailing pad bits are always zero.
#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct BitString {
    bytes: Vec<u8>,
    len: usize,
}

impl BitString {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_capacity(bits: usize) -> Self {
        BitString {
            bytes: Vec::with_capacity(bits.div_ceil(8)),
            len: 0,
        }
    }

    pub fn from_bytes(bytes: &[u8]) -> Self {
        BitString {
            bytes: bytes.to_vec(),
            len: bytes.len() * 8,
        }
    }

    /// Takes the first `len` bits of `bytes`.
    pub fn from_bytes_truncated(bytes: &[u8], len: usize) -> Option<Self> {
        if len > bytes.len() * 8 {
            return None;
        }
        let mut bytes = bytes[..len.div_ceil(8)].to_vec();
        if !len.is_multiple_of(8) {
            let last = bytes.len() - 1;
            bytes[last] &= 0xffu8 << (8 - len % 8);
        }
        Some(BitString { bytes, len })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn push(&mut self, bit: bool) {
        if self.len.is_multiple_of(8) {
            self.bytes.push(0);
        }
        if bit {
            let last = self.bytes.len() - 1;
            self.bytes[last] |= 0x80 >> (self.len % 8);
        }
        self.len += 1;
    }

    pub fn get(&self, i: usize) -> Option<bool> {
        (i < self.len).then(|| (self.bytes[i / 8] >> (7 - i % 8)) & 1 == 1)
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| (self.bytes[i / 8] >> (7 - i % 8)) & 1 == 1)
    }

    /// Packed bytes; the final byte is zero-padded when `len` is not a multiple of 8.
    pub fn as_bytes(&self) -> &[u8] {
        &self.bytes
    }

    /// Bits `[start, start + n)`, or `None` if out of range.
    pub fn slice(&self, start: usize, n: usize) -> Option<BitString> {
        let end = start.checked_add(n)?;
        if end > self.len {
            return None;
        }
        if start.is_multiple_of(8) {
            return BitString::from_bytes_truncated(&self.bytes[start / 8..], n);
        }
        let mut out = BitString::with_capacity(n);
        for i in start..end {
            out.push((self.bytes[i / 8] >> (7 - i % 8)) & 1 == 1);
        }
        Some(out)
    }

    pub fn extend(&mut self, other: &BitString) {
        if self.len.is_multiple_of(8) {
            self.bytes.extend_from_slice(&other.bytes);
            self.len += other.len;
        } else {
            for b in other.iter() {
                self.push(b);
            }
        }
    }

    pub fn count_ones(&self) -> usize {
        self.bytes.iter().map(|b| b.count_ones() as usize).sum()
    }

    pub fn to_hex(&self) -> String {
        self.bytes.iter().map(|b| format!("{b:02x}")).collect()
    }
}

impl FromIterator<bool> for BitString {
    fn from_iter<I: IntoIterator<Item = bool>>(iter: I) -> Self {
        let mut out = BitString::new();
        for b in iter {
            out.push(b);
        }
        out
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitString({} bits, {})", self.len, self.to_hex())
    }
}
