//! Arithmetic in GF(2^n) for n ≤ 12 with a fixed polynomial basis.

use crate::error::{Result, WirecutError};

/// Irreducible polynomials, bit `k` = coefficient of `t^k` (leading term included).
const IRREDUCIBLE: [u32; 13] = [
    0, 0b11, 0b111, 0b1011, 0x13, 0x25, 0x43, 0x83, 0x11d, 0x211, 0x409, 0x805, 0x1053,
];

pub const MAX_DEGREE: usize = 12;

#[derive(Clone, Copy, Debug)]
pub struct Field {
    n: usize,
    poly: u32,
}

impl Field {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 || n > MAX_DEGREE {
            return Err(WirecutError::limit(format!(
                "GF(2^n) is tabulated for 1 ≤ n ≤ {MAX_DEGREE}, got {n}"
            )));
        }
        Ok(Field {
            n,
            poly: IRREDUCIBLE[n],
        })
    }

    pub fn degree(&self) -> usize {
        self.n
    }

    pub fn poly(&self) -> u32 {
        self.poly
    }

    pub fn order(&self) -> u32 {
        1 << self.n
    }

    pub fn mul(&self, a: u32, b: u32) -> u32 {
        let mut a = a;
        let mut b = b;
        let mut acc = 0u32;
        while b != 0 {
            if b & 1 == 1 {
                acc ^= a;
            }
            b >>= 1;
            a <<= 1;
            if (a >> self.n) & 1 == 1 {
                a ^= self.poly;
            }
        }
        acc
    }

    /// Absolute trace `a + a^2 + … + a^{2^{n-1}}`, which lies in {0, 1}.
    pub fn trace(&self, a: u32) -> u32 {
        let mut t = 0;
        let mut p = a;
        for _ in 0..self.n {
            t ^= p;
            p = self.mul(p, p);
        }
        debug_assert!(t <= 1);
        t
    }

    /// Symmetric matrix `M_a[i][j] = Tr(a·t^{i+j})` as column words
    /// (bit `i` of word `j`).
    pub fn trace_form_columns(&self, a: u32) -> Vec<u32> {
        let powers: Vec<u32> = (0..2 * self.n).map(|k| self.pow_t(k)).collect();
        (0..self.n)
            .map(|j| {
                (0..self.n).fold(0u32, |acc, i| {
                    acc | (self.trace(self.mul(a, powers[i + j])) << i)
                })
            })
            .collect()
    }

    fn pow_t(&self, k: usize) -> u32 {
        if self.n == 1 {
            return 1;
        }
        (0..k).fold(1u32, |acc, _| self.mul(acc, 0b10))
    }
}

/// Brute-force irreducibility test by trial division.
pub fn is_irreducible(poly: u32) -> bool {
    let deg = 31 - poly.leading_zeros();
    if deg == 0 {
        return false;
    }
    (2u32..(1 << deg)).all(|d| {
        let dd = 31 - d.leading_zeros();
        dd == 0 || dd > deg / 2 || poly_mod(poly, d) != 0
    })
}

fn poly_mod(mut a: u32, b: u32) -> u32 {
    let db = 31 - b.leading_zeros();
    while a != 0 && 31 - a.leading_zeros() >= db {
        let shift = (31 - a.leading_zeros()) - db;
        a ^= b << shift;
    }
    a
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::binmat::rank_of_words;

    #[test]
    fn table_polynomials_are_irreducible() {
        for (n, &poly) in IRREDUCIBLE.iter().enumerate().skip(1) {
            assert!(is_irreducible(poly), "n={n}");
            assert_eq!(31 - poly.leading_zeros(), n as u32);
        }
        assert!(!is_irreducible(0b101));
        assert!(!is_irreducible(0b1111));
    }

    #[test]
    fn multiplicative_group_is_cyclic_of_full_order() {
        for n in 2..=8 {
            let f = Field::new(n).unwrap();
            // every nonzero element has an inverse
            for a in 1..f.order() {
                assert!((1..f.order()).any(|b| f.mul(a, b) == 1), "n={n} a={a}");
            }
        }
    }

    #[test]
    fn gf4_products() {
        let f = Field::new(2).unwrap();
        // t^2 = t + 1
        assert_eq!(f.mul(0b10, 0b10), 0b11);
        assert_eq!(f.mul(0b11, 0b11), 0b10);
        assert_eq!(f.mul(0b10, 0b11), 1);
    }

    #[test]
    fn trace_is_linear_and_balanced() {
        for n in 1..=8 {
            let f = Field::new(n).unwrap();
            let ones = (0..f.order()).filter(|&a| f.trace(a) == 1).count();
            assert_eq!(ones as u32, f.order() / 2, "n={n}");
            for a in 0..f.order().min(32) {
                for b in 0..f.order().min(32) {
                    assert_eq!(f.trace(a ^ b), f.trace(a) ^ f.trace(b));
                }
            }
        }
    }

    #[test]
    fn trace_form_is_symmetric_and_invertible() {
        for n in 1..=10 {
            let f = Field::new(n).unwrap();
            for a in 1..f.order().min(64) {
                let cols = f.trace_form_columns(a);
                for i in 0..n {
                    for j in 0..n {
                        assert_eq!((cols[j] >> i) & 1, (cols[i] >> j) & 1);
                    }
                }
                let words: Vec<u64> = cols.iter().map(|&c| c as u64).collect();
                assert_eq!(rank_of_words(&words), n, "n={n} a={a}");
            }
        }
    }

    #[test]
    fn out_of_range_degree() {
        assert!(matches!(
            Field::new(13),
            Err(WirecutError::ResourceLimit(_))
        ));
        assert!(Field::new(0).is_err());
    }
}
