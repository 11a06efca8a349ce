//! Packed bit vectors.
//!
//! Hash rows, offset vectors, and hypercube points are all fixed-length bit
//! vectors indexed from 0. Coordinate `i` of the written form `b_1 b_2 ... b_n`
//! lives at index `i - 1`.

use std::fmt;

/// A fixed-length bit vector packed into 64-bit words.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Bits {
    len: usize,
    words: Vec<u64>,
}

impl Bits {
    /// All-zero vector of the given length.
    pub fn zeros(len: usize) -> Self {
        Bits {
            len,
            words: vec![0; len.div_ceil(64)],
        }
    }

    /// Builds a vector by evaluating `f` at each index.
    pub fn from_fn(len: usize, mut f: impl FnMut(usize) -> bool) -> Self {
        let mut b = Bits::zeros(len);
        for i in 0..len {
            if f(i) {
                b.set(i, true);
            }
        }
        b
    }

    /// Parses a `"0101"`-style string, first character at index 0.
    pub fn from_str01(s: &str) -> Self {
        Bits::from_fn(s.len(), |i| &s[i..=i] == "1")
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn set(&mut self, i: usize, v: bool) {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        let mask = 1u64 << (i % 64);
        if v {
            self.words[i / 64] |= mask;
        } else {
            self.words[i / 64] &= !mask;
        }
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Indices of set bits, ascending.
    pub fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len).filter(move |&i| self.get(i))
    }

    /// Parity of `self AND other`, i.e. the GF(2) inner product.
    ///
    /// Both vectors must have equal length.
    pub fn dot_parity(&self, other: &Bits) -> bool {
        assert_eq!(self.len, other.len, "length mismatch in dot_parity");
        self.words
            .iter()
            .zip(&other.words)
            .fold(0u32, |acc, (a, b)| acc ^ (a & b).count_ones())
            & 1
            == 1
    }
}

impl fmt::Debug for Bits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len {
            write!(f, "{}", if self.get(i) { '1' } else { '0' })?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_str01() {
        let b = Bits::from_str01("0110010");
        assert_eq!(format!("{b:?}"), "0110010");
        assert_eq!(b.count_ones(), 3);
        assert_eq!(b.iter_ones().collect::<Vec<_>>(), vec![1, 2, 5]);
    }

    #[test]
    fn dot_parity_matches_popcount() {
        let a = Bits::from_str01("1101");
        let b = Bits::from_str01("1011");
        // overlap at indices 0 and 3
        assert!(!a.dot_parity(&b));
        let c = Bits::from_str01("0111");
        // overlap at indices 1 and 3 with a = 1101: bits 1,3 -> 1 and 1 -> even
        assert!(!a.dot_parity(&c));
        let d = Bits::from_str01("1000");
        assert!(a.dot_parity(&d));
    }

    #[test]
    fn crossing_word_boundaries() {
        let mut b = Bits::zeros(130);
        b.set(0, true);
        b.set(64, true);
        b.set(129, true);
        assert_eq!(b.count_ones(), 3);
        assert_eq!(b.iter_ones().collect::<Vec<_>>(), vec![0, 64, 129]);
        b.set(64, false);
        assert_eq!(b.count_ones(), 2);
    }
}
