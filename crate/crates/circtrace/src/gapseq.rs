//! Gap-tuple and bit-string forms of sparse circular binary strings.
//!
//! A string with `k >= 1` ones is determined up to rotation by its gap tuple
//! `(x_1, ..., x_k)`: `x_j` zeros follow the j-th one, read cyclically. The
//! bit-string form fixes one rotation, starting at a one.

use std::fmt;
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GapSeqError {
    /// The gap form is undefined for strings without ones.
    #[error("binary string contains no ones")]
    NoOnes,
    /// A gap sequence needs at least one entry.
    #[error("gap sequence is empty")]
    Empty,
    #[error("invalid gap list {0:?}: expected comma-separated nonnegative integers")]
    BadGapText(String),
    #[error("invalid character {0:?} in binary string: expected only '0' and '1'")]
    BadBitChar(char),
}

/// Gap form of a k-sparse circular string: the tuple of zero-run lengths
/// after each of the k ones.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GapSequence {
    gaps: Vec<u64>,
}

impl GapSequence {
    pub fn new(gaps: Vec<u64>) -> Result<Self, GapSeqError> {
        if gaps.is_empty() {
            return Err(GapSeqError::Empty);
        }
        Ok(GapSequence { gaps })
    }

    /// Number of ones.
    pub fn k(&self) -> usize {
        self.gaps.len()
    }

    pub fn gaps(&self) -> &[u64] {
        &self.gaps
    }

    pub fn gaps_i64(&self) -> Vec<i64> {
        self.gaps.iter().map(|&g| g as i64).collect()
    }

    /// Length of the binary form: k ones plus all gap zeros.
    pub fn binary_len(&self) -> u64 {
        self.k() as u64 + self.gaps.iter().sum::<u64>()
    }

    /// The fixed-rotation binary form `1 0^{x_1} 1 0^{x_2} ... 1 0^{x_k}`.
    pub fn to_binary(&self) -> BinaryString {
        let mut bits = Vec::with_capacity(self.binary_len() as usize);
        for &g in &self.gaps {
            bits.push(true);
            bits.extend(std::iter::repeat(false).take(g as usize));
        }
        BinaryString { bits }
    }

    /// Rotation of the gap tuple: entry `j` of the result is entry
    /// `(j + r) mod k` of `self`.
    pub fn cyclic_shift(&self, r: usize) -> GapSequence {
        let k = self.k();
        let gaps = (0..k).map(|j| self.gaps[(j + r) % k]).collect();
        GapSequence { gaps }
    }

    /// True when some rotation of `self` equals `other`. Checks all k
    /// rotations directly; k stays small everywhere this is used.
    pub fn cyclically_equal(&self, other: &GapSequence) -> bool {
        if self.k() != other.k() {
            return false;
        }
        (0..self.k()).any(|r| self.cyclic_shift(r) == *other)
    }

    /// The lexicographically least rotation, a canonical representative of
    /// the cyclic equivalence class.
    pub fn canonical_rotation(&self) -> GapSequence {
        (0..self.k())
            .map(|r| self.cyclic_shift(r))
            .min()
            .expect("k >= 1")
    }

    /// The gap tuple read right-to-left (the mirror-image string).
    pub fn reversed(&self) -> GapSequence {
        let mut gaps = self.gaps.clone();
        gaps.reverse();
        GapSequence { gaps }
    }
}

impl fmt::Display for GapSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for g in &self.gaps {
            if !first {
                write!(f, ",")?;
            }
            write!(f, "{g}")?;
            first = false;
        }
        Ok(())
    }
}

impl FromStr for GapSequence {
    type Err = GapSeqError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || GapSeqError::BadGapText(s.to_string());
        let gaps = s
            .split(',')
            .map(|part| part.trim().parse::<u64>().map_err(|_| bad()))
            .collect::<Result<Vec<_>, _>>()?;
        GapSequence::new(gaps).map_err(|_| bad())
    }
}

/// A plain bit string; the channel's inputs and outputs.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BinaryString {
    bits: Vec<bool>,
}

impl BinaryString {
    pub fn new(bits: Vec<bool>) -> Self {
        BinaryString { bits }
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    /// Left rotation: bit `i` of the result is bit `(i + r) mod len` of `self`.
    pub fn rotate(&self, r: usize) -> BinaryString {
        if self.bits.is_empty() {
            return self.clone();
        }
        let n = self.bits.len();
        let bits = (0..n).map(|i| self.bits[(i + r) % n]).collect();
        BinaryString { bits }
    }

    /// Gap tuple read cyclically from the first one. The final gap wraps:
    /// it counts the zeros after the last one plus any leading zeros.
    pub fn parse_gaps(&self) -> Result<GapSequence, GapSeqError> {
        let ones: Vec<usize> = (0..self.bits.len()).filter(|&i| self.bits[i]).collect();
        if ones.is_empty() {
            return Err(GapSeqError::NoOnes);
        }
        let n = self.bits.len();
        let k = ones.len();
        let mut gaps = Vec::with_capacity(k);
        for j in 0..k {
            let here = ones[j];
            let next = ones[(j + 1) % k];
            let gap = if j + 1 < k {
                next - here - 1
            } else {
                (n - here - 1) + next
            };
            gaps.push(gap as u64);
        }
        Ok(GapSequence { gaps })
    }
}

impl fmt::Display for BinaryString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            write!(f, "{}", if b { '1' } else { '0' })?;
        }
        Ok(())
    }
}

impl FromStr for BinaryString {
    type Err = GapSeqError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bits = s
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(GapSeqError::BadBitChar(other)),
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(BinaryString { bits })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gs(gaps: &[u64]) -> GapSequence {
        GapSequence::new(gaps.to_vec()).unwrap()
    }

    #[test]
    fn binary_roundtrip() {
        let x = gs(&[1, 0, 3]);
        let w = x.to_binary();
        assert_eq!(w.to_string(), "1011000");
        assert_eq!(w.parse_gaps().unwrap(), x);
    }

    #[test]
    fn binary_len_counts_ones_and_zeros() {
        let x = gs(&[0, 2, 3, 2, 1, 1, 1, 1, 2, 3, 2, 0]);
        assert_eq!(x.binary_len(), 12 + 18);
        assert_eq!(x.to_binary().len() as u64, x.binary_len());
    }

    #[test]
    fn parse_gaps_wraps_leading_zeros() {
        let w: BinaryString = "0010100".parse().unwrap();
        // first one at index 2, gaps read from there: 1 zero, then 2 trailing + 2 leading
        assert_eq!(w.parse_gaps().unwrap(), gs(&[1, 4]));
    }

    #[test]
    fn parse_gaps_rejects_all_zeros() {
        let w: BinaryString = "0000".parse().unwrap();
        assert_eq!(w.parse_gaps(), Err(GapSeqError::NoOnes));
        let empty = BinaryString::new(vec![]);
        assert_eq!(empty.parse_gaps(), Err(GapSeqError::NoOnes));
    }

    #[test]
    fn shift_by_k_is_identity() {
        let x = gs(&[4, 1, 1, 9]);
        assert_eq!(x.cyclic_shift(4), x);
        assert_eq!(x.cyclic_shift(1), gs(&[1, 1, 9, 4]));
    }

    #[test]
    fn cyclic_equality_matches_canonical_rotation() {
        let x = gs(&[1, 2, 3]);
        let y = gs(&[3, 1, 2]);
        let z = gs(&[2, 1, 3]);
        assert!(x.cyclically_equal(&y));
        assert!(!x.cyclically_equal(&z));
        assert_eq!(x.canonical_rotation(), y.canonical_rotation());
        assert_ne!(x.canonical_rotation(), z.canonical_rotation());
        assert_eq!(x.canonical_rotation(), gs(&[1, 2, 3]));
    }

    #[test]
    fn text_forms() {
        let x: GapSequence = "0, 2,3".parse().unwrap();
        assert_eq!(x, gs(&[0, 2, 3]));
        assert_eq!(x.to_string(), "0,2,3");
        assert!("".parse::<GapSequence>().is_err());
        assert!("1,-2".parse::<GapSequence>().is_err());
        assert!("10a1".parse::<BinaryString>().is_err());
    }

    #[test]
    fn rotation_equals_parse_of_rotated_string() {
        let x = gs(&[2, 0, 1]);
        let w = x.to_binary();
        for r in 0..w.len() {
            let parsed = w.rotate(r).parse_gaps().unwrap();
            assert!(parsed.cyclically_equal(&x), "rotation {r} changed the class");
        }
    }
}
