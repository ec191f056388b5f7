//! Arithmetic in GF(2^w) for w in {4, 8, 16, 32, 64}.
//!
//! Elements are polynomials over GF(2) packed into the low `w` bits of a
//! `u64`, bit `i` holding the coefficient of `z^i`. Each width has a fixed
//! irreducible modulus:
//!
//! | w  | modulus                          |
//! |----|----------------------------------|
//! | 4  | z^4 + z + 1                      |
//! | 8  | z^8 + z^4 + z^3 + z + 1          |
//! | 16 | z^16 + z^5 + z^3 + z + 1         |
//! | 32 | z^32 + z^7 + z^3 + z^2 + 1       |
//! | 64 | z^64 + z^4 + z^3 + z + 1         |

use crate::error::{Error, Result};

pub const SUPPORTED_WIDTHS: [u32; 5] = [4, 8, 16, 32, 64];

/// Low-order terms of each modulus; the `z^w` term is implicit.
const MODULI: [(u32, u64); 5] = [(4, 0x3), (8, 0x1B), (16, 0x2B), (32, 0x8D), (64, 0x1B)];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BinaryField {
    width: u32,
    reduction: u64,
}

impl BinaryField {
    pub fn new(width: u32) -> Result<Self> {
        MODULI
            .iter()
            .find(|&&(w, _)| w == width)
            .map(|&(width, reduction)| Self { width, reduction })
            .ok_or_else(|| Error::InvalidParams(format!("unsupported field width {width}")))
    }

    /// Narrowest supported field that embeds `u_bits`-bit integers.
    pub fn for_universe(u_bits: u32) -> Result<Self> {
        let width = SUPPORTED_WIDTHS
            .iter()
            .copied()
            .find(|&w| w >= u_bits)
            .ok_or(Error::FieldTooNarrow { width: 64, u_bits })?;
        Self::new(width)
    }

    pub fn width(self) -> u32 {
        self.width
    }

    /// The full modulus including `z^w`, as a `u128`.
    pub fn modulus(self) -> u128 {
        (1u128 << self.width) | self.reduction as u128
    }

    pub fn mask(self) -> u64 {
        if self.width == 64 {
            u64::MAX
        } else {
            (1u64 << self.width) - 1
        }
    }

    #[inline]
    pub fn mul_z(self, a: u64) -> u64 {
        let carry = (a >> (self.width - 1)) & 1;
        let shifted = (a << 1) & self.mask();
        shifted ^ (self.reduction & carry.wrapping_neg())
    }

    /// Shift-and-add multiplication.
    pub fn mul(self, a: u64, mut b: u64) -> u64 {
        let mut acc = 0;
        let mut a = a;
        while b != 0 {
            if b & 1 == 1 {
                acc ^= a;
            }
            b >>= 1;
            a = self.mul_z(a);
        }
        acc
    }
}

/// Byte-sliced lookup tables for multiplication by one fixed element `x`.
///
/// Multiplication by `x` is GF(2)-linear, so `a * x` is the XOR of the
/// products of each byte of `a` with `x`. Building costs `256 * ceil(w/8)`
/// XORs; each multiplication afterwards is `ceil(w/8)` lookups.
#[derive(Debug, Clone, Default)]
pub struct MulTable {
    table: Vec<u64>,
    bytes: usize,
}

impl MulTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Rebuilds the table for multiplier `x`, reusing the allocation.
    pub fn load(&mut self, field: BinaryField, x: u64) {
        let w = field.width as usize;
        self.bytes = w.div_ceil(8);
        self.table.clear();
        self.table.resize(self.bytes * 256, 0);
        let mut basis = [0u64; 64];
        let mut p = x & field.mask();
        for b in basis.iter_mut().take(w) {
            *b = p;
            p = field.mul_z(p);
        }
        for j in 0..self.bytes {
            let span = (w - 8 * j).min(8);
            let base = j * 256;
            for v in 1usize..(1 << span) {
                let low = v.trailing_zeros() as usize;
                self.table[base + v] = self.table[base + (v & (v - 1))] ^ basis[8 * j + low];
            }
        }
    }

    #[inline]
    pub fn mul(&self, a: u64) -> u64 {
        let mut r = 0;
        for j in 0..self.bytes {
            r ^= self.table[j * 256 + ((a >> (8 * j)) & 0xFF) as usize];
        }
        r
    }

    /// Horner evaluation of `c[0] + c[1] x + ... + c[k-1] x^(k-1)` at the
    /// loaded point.
    #[inline]
    pub fn horner(&self, coeffs: &[u64]) -> u64 {
        match self.bytes {
            4 => {
                let t = &self.table[..1024];
                coeffs.iter().rev().fold(0, |acc, &c| {
                    t[(acc & 0xFF) as usize]
                        ^ t[256 + ((acc >> 8) & 0xFF) as usize]
                        ^ t[512 + ((acc >> 16) & 0xFF) as usize]
                        ^ t[768 + ((acc >> 24) & 0xFF) as usize]
                        ^ c
                })
            }
            _ => coeffs.iter().rev().fold(0, |acc, &c| self.mul(acc) ^ c),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed;
    use rand::Rng;

    /// Schoolbook carry-less product followed by long division.
    fn reference_mul(modulus: u128, width: u32, a: u64, b: u64) -> u64 {
        let mut prod: u128 = 0;
        for i in 0..64 {
            if (b >> i) & 1 == 1 {
                prod ^= (a as u128) << i;
            }
        }
        for bit in (width..128).rev() {
            if (prod >> bit) & 1 == 1 {
                prod ^= modulus << (bit - width);
            }
        }
        prod as u64
    }

    #[test]
    fn mul_agrees_with_schoolbook() {
        let mut rng = seed::rng(1);
        for w in SUPPORTED_WIDTHS {
            let f = BinaryField::new(w).unwrap();
            for _ in 0..2000 {
                let a = rng.gen::<u64>() & f.mask();
                let b = rng.gen::<u64>() & f.mask();
                assert_eq!(f.mul(a, b), reference_mul(f.modulus(), w, a, b), "w={w}");
            }
        }
    }

    #[test]
    fn table_mul_agrees_with_mul() {
        let mut rng = seed::rng(2);
        let mut t = MulTable::new();
        for w in SUPPORTED_WIDTHS {
            let f = BinaryField::new(w).unwrap();
            for _ in 0..50 {
                let x = rng.gen::<u64>() & f.mask();
                t.load(f, x);
                for _ in 0..50 {
                    let a = rng.gen::<u64>() & f.mask();
                    assert_eq!(t.mul(a), f.mul(a, x));
                }
                let coeffs: Vec<u64> = (0..7).map(|_| rng.gen::<u64>() & f.mask()).collect();
                let mut expect = 0;
                let mut pow = 1;
                for &c in &coeffs {
                    expect ^= f.mul(c, pow);
                    pow = f.mul(pow, x);
                }
                assert_eq!(t.horner(&coeffs), expect);
            }
        }
    }

    #[test]
    fn exhaustive_gf16_has_inverses() {
        let f = BinaryField::new(4).unwrap();
        for a in 1..16u64 {
            assert_eq!((1..16u64).filter(|&b| f.mul(a, b) == 1).count(), 1);
        }
    }

    // Polynomial helpers over GF(2) for the irreducibility oracle.
    fn poly_mod(mut a: u128, m: u128) -> u128 {
        let dm = 127 - m.leading_zeros();
        while a != 0 && 127 - a.leading_zeros() >= dm {
            a ^= m << (127 - a.leading_zeros() - dm);
        }
        a
    }

    fn poly_mulmod(a: u128, b: u128, m: u128) -> u128 {
        let mut acc = 0u128;
        let mut a = poly_mod(a, m);
        let mut b = b;
        while b != 0 {
            if b & 1 == 1 {
                acc ^= a;
            }
            b >>= 1;
            a = poly_mod(a << 1, m);
        }
        acc
    }

    fn poly_gcd(mut a: u128, mut b: u128) -> u128 {
        while b != 0 {
            let r = poly_mod(a, b);
            a = b;
            b = r;
        }
        a
    }

    /// Rabin's test for widths that are powers of two: `z^(2^w) = z mod p`
    /// and `gcd(z^(2^(w/2)) - z, p) = 1`.
    fn rabin_irreducible(modulus: u128, width: u32) -> bool {
        let frob = |times: u32| {
            let mut v = 2u128;
            for _ in 0..times {
                v = poly_mulmod(v, v, modulus);
            }
            v
        };
        frob(width) == 2 && poly_gcd(modulus, frob(width / 2) ^ 2) == 1
    }

    #[test]
    fn pinned_moduli_are_irreducible() {
        for w in SUPPORTED_WIDTHS {
            let f = BinaryField::new(w).unwrap();
            assert!(rabin_irreducible(f.modulus(), w), "width {w}");
        }
        // The oracle does reject a reducible polynomial: z^4 + 1 = (z + 1)^4.
        assert!(!rabin_irreducible(0x11, 4));
        assert!(!rabin_irreducible(0x15, 4));
    }

    #[test]
    fn width_selection() {
        assert_eq!(BinaryField::for_universe(4).unwrap().width(), 4);
        assert_eq!(BinaryField::for_universe(10).unwrap().width(), 16);
        assert_eq!(BinaryField::for_universe(32).unwrap().width(), 32);
        assert_eq!(BinaryField::for_universe(33).unwrap().width(), 64);
        assert!(BinaryField::new(12).is_err());
    }
}
