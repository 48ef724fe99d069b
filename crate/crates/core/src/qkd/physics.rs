//! Bit-level model of BB84 prepare-and-measure.
//!
//! Functions here are pure: randomness (the outcome of a mismatched-basis
//! measurement) is passed in by the caller so that every draw is accounted
//! for by the caller's generator.

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Basis {
    Rectilinear,
    Diagonal,
}

impl Basis {
    pub fn from_bit(bit: bool) -> Self {
        if bit {
            Basis::Diagonal
        } else {
            Basis::Rectilinear
        }
    }

    pub fn as_bit(self) -> bool {
        matches!(self, Basis::Diagonal)
    }
}

/// A simulated photon: the value it encodes and the basis it was prepared in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Qubit {
    pub basis: Basis,
    pub value: bool,
}

impl Qubit {
    pub fn prepare(value: bool, basis: Basis) -> Self {
        Qubit { basis, value }
    }

    /// Wire encoding: bit 0 value, bit 1 basis.
    pub fn to_byte(self) -> u8 {
        (self.value as u8) | ((self.basis.as_bit() as u8) << 1)
    }

    pub fn from_byte(b: u8) -> Option<Self> {
        (b <= 3).then(|| Qubit {
            value: b & 1 == 1,
            basis: Basis::from_bit(b & 2 != 0),
        })
    }
}

/// Measuring in the preparation basis yields the value; otherwise `coin`.
pub fn measure(q: Qubit, basis: Basis, coin: bool) -> bool {
    if q.basis == basis {
        q.value
    } else {
        coin
    }
}

/// Eve measures in `eve_basis` and resends what she saw, in her basis.
pub fn intercept_resend(q: Qubit, eve_basis: Basis, coin: bool) -> Qubit {
    Qubit::prepare(measure(q, eve_basis, coin), eve_basis)
}

/// Channel noise flips the encoded value.
pub fn flip(q: Qubit, flip: bool) -> Qubit {
    Qubit {
        value: q.value ^ flip,
        ..q
    }
}
