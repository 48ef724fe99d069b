//! GF(2^8) arithmetic over the Rijndael polynomial x^8 + x^4 + x^3 + x + 1.

#[inline]
pub(crate) fn xtime(b: u8) -> u8 {
    (b << 1) ^ (((b >> 7) & 1) * 0x1b)
}

pub(crate) fn mul(mut a: u8, mut b: u8) -> u8 {
    let mut acc = 0u8;
    while b != 0 {
        if b & 1 != 0 {
            acc ^= a;
        }
        a = xtime(a);
        b >>= 1;
    }
    acc
}

pub(crate) fn mix_column(col: [u8; 4]) -> [u8; 4] {
    let [a0, a1, a2, a3] = col;
    let t = a0 ^ a1 ^ a2 ^ a3;
    [
        a0 ^ t ^ xtime(a0 ^ a1),
        a1 ^ t ^ xtime(a1 ^ a2),
        a2 ^ t ^ xtime(a2 ^ a3),
        a3 ^ t ^ xtime(a3 ^ a0),
    ]
}

pub(crate) fn inv_mix_column(col: [u8; 4]) -> [u8; 4] {
    let [a0, a1, a2, a3] = col;
    [
        mul(a0, 14) ^ mul(a1, 11) ^ mul(a2, 13) ^ mul(a3, 9),
        mul(a0, 9) ^ mul(a1, 14) ^ mul(a2, 11) ^ mul(a3, 13),
        mul(a0, 13) ^ mul(a1, 9) ^ mul(a2, 14) ^ mul(a3, 11),
        mul(a0, 11) ^ mul(a1, 13) ^ mul(a2, 9) ^ mul(a3, 14),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Carry-less multiply then reduce, bit by bit.
    fn slow_mul(a: u8, b: u8) -> u8 {
        let mut prod: u16 = 0;
        for i in 0..8 {
            if (b >> i) & 1 == 1 {
                prod ^= (a as u16) << i;
            }
        }
        for bit in (8..16).rev() {
            if (prod >> bit) & 1 == 1 {
                prod ^= 0x11b << (bit - 8);
            }
        }
        prod as u8
    }

    #[test]
    fn mul_matches_table_built_by_brute_force() {
        for a in 0..=255u8 {
            for b in 0..=255u8 {
                assert_eq!(mul(a, b), slow_mul(a, b), "{a:#x} * {b:#x}");
            }
        }
    }

    #[test]
    fn known_column() {
        // Column evaluated by hand with the brute-force multiply table.
        let c = [0xdb, 0x13, 0x53, 0x45];
        let expect = [
            slow_mul(2, 0xdb) ^ slow_mul(3, 0x13) ^ 0x53 ^ 0x45,
            0xdb ^ slow_mul(2, 0x13) ^ slow_mul(3, 0x53) ^ 0x45,
            0xdb ^ 0x13 ^ slow_mul(2, 0x53) ^ slow_mul(3, 0x45),
            slow_mul(3, 0xdb) ^ 0x13 ^ 0x53 ^ slow_mul(2, 0x45),
        ];
        assert_eq!(expect, [0x8e, 0x4d, 0xa1, 0xbc]);
        assert_eq!(mix_column(c), expect);
    }

    #[test]
    fn inverse_mix_exhaustive_per_position() {
        for pos in 0..4 {
            for v in 0..=255u8 {
                let mut col = [0x01, 0x5c, 0xa7, 0xf0];
                col[pos] = v;
                assert_eq!(inv_mix_column(mix_column(col)), col);
            }
        }
    }
}
