use super::{BitString, QkdError};

/// Ordered usable key bits handed out in non-overlapping segments.
///
/// Single consumer: reads advance a cursor and never re-serve bits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuantumKeyStream {
    bits: BitString,
    cursor: usize,
}

impl QuantumKeyStream {
    pub fn new(bits: BitString) -> Self {
        QuantumKeyStream { bits, cursor: 0 }
    }

    pub fn from_bytes(bytes: &[u8]) -> Self {
        Self::new(BitString::from_bytes(bytes))
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn cursor(&self) -> usize {
        self.cursor
    }

    pub fn remaining(&self) -> usize {
        self.bits.len() - self.cursor
    }

    pub fn bits(&self) -> &BitString {
        &self.bits
    }

    /// Next `n` bits. On depletion the cursor is left untouched.
    pub fn take_bits(&mut self, n: usize) -> Result<BitString, QkdError> {
        if n == 0 {
            return Err(QkdError::EmptyRequest);
        }
        if n > self.remaining() {
            return Err(QkdError::KeyDepleted {
                requested: n,
                remaining: self.remaining(),
            });
        }
        let out = self
            .bits
            .slice(self.cursor, n)
            .expect("range checked against remaining");
        self.cursor += n;
        Ok(out)
    }

    /// Next `8 * N` bits as bytes.
    pub fn take_array<const N: usize>(&mut self) -> Result<[u8; N], QkdError> {
        let bits = self.take_bits(N * 8)?;
        Ok(bits
            .as_bytes()
            .try_into()
            .expect("whole-byte segment has exactly N bytes"))
    }

    /// Checks that `n` bits are available without consuming them.
    pub fn ensure(&self, n: usize) -> Result<(), QkdError> {
        if n > self.remaining() {
            Err(QkdError::KeyDepleted {
                requested: n,
                remaining: self.remaining(),
            })
        } else {
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stream(n_bytes: usize) -> QuantumKeyStream {
        QuantumKeyStream::from_bytes(&(0..n_bytes).map(|i| (i * 37 + 5) as u8).collect::<Vec<_>>())
    }

    #[test]
    fn consecutive_takes_are_disjoint() {
        let mut s = stream(64);
        let a = s.take_bits(128).unwrap();
        let b = s.take_bits(128).unwrap();
        assert_eq!(a, s.bits().slice(0, 128).unwrap());
        assert_eq!(b, s.bits().slice(128, 128).unwrap());
        assert_eq!(s.cursor(), 256);
    }

    #[test]
    fn depletion_leaves_cursor() {
        let mut s = stream(20);
        s.take_bits(100).unwrap();
        let err = s.take_bits(100).unwrap_err();
        assert_eq!(
            err,
            QkdError::KeyDepleted {
                requested: 100,
                remaining: 60
            }
        );
        assert_eq!(s.cursor(), 100);
        assert_eq!(s.take_bits(0), Err(QkdError::EmptyRequest));
    }

    #[test]
    fn full_drain_reassembles() {
        let mut s = stream(64);
        let original = s.bits().clone();
        let mut joined = BitString::new();
        while s.remaining() > 0 {
            joined.extend(&s.take_bits(128).unwrap());
        }
        assert_eq!(joined, original);
    }

    #[test]
    fn unaligned_takes() {
        let mut s = stream(8);
        let a = s.take_bits(3).unwrap();
        let b = s.take_bits(13).unwrap();
        let mut j = a;
        j.extend(&b);
        assert_eq!(j, s.bits().slice(0, 16).unwrap());
        let arr: [u8; 2] = s.take_array().unwrap();
        assert_eq!(arr, [s.bits().as_bytes()[2], s.bits().as_bytes()[3]]);
    }
}
