//! Bit strings and the movement-channel bit transform.
//!
//! Robots communicate one bit per signaling block, so identifiers, ports, and
//! message payloads all travel as bit strings. The transform that puts them on
//! the channel maps `1 -> 11` and `0 -> 10`: every payload bit is announced by
//! a leading 1, which lets the silent channel mark end-of-message with the
//! first `00` pair and keeps any encoded stream free of `00` internally.

use std::fmt;
use std::str::FromStr;

/// A bit string; index 0 is the most significant / first-transmitted bit.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct BitString(Vec<bool>);

impl BitString {
    pub fn new() -> Self {
        BitString(Vec::new())
    }

    pub fn from_bits(bits: Vec<bool>) -> Self {
        BitString(bits)
    }

    /// Binary representation of `value` without leading zeros; 0 is `"0"`.
    pub fn from_uint(value: u64) -> Self {
        if value == 0 {
            return BitString(vec![false]);
        }
        let width = 64 - value.leading_zeros() as usize;
        BitString((0..width).rev().map(|i| value >> i & 1 == 1).collect())
    }

    pub fn to_uint(&self) -> u64 {
        self.0.iter().fold(0, |acc, &b| acc << 1 | b as u64)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn push(&mut self, bit: bool) {
        self.0.push(bit);
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    /// The string read back to front, used so that label comparison starts
    /// from the least significant bit.
    pub fn reversed(&self) -> Self {
        BitString(self.0.iter().rev().copied().collect())
    }

    /// 1-indexed bit access; positions beyond the string read as 0.
    pub fn bit_at(&self, pos: usize) -> bool {
        pos >= 1 && self.0.get(pos - 1).copied().unwrap_or(false)
    }

    /// Channel encoding: each payload bit becomes a pair, `1 -> 11`, `0 -> 10`.
    pub fn transformed_encode(&self) -> BitString {
        let mut out = Vec::with_capacity(self.0.len() * 2);
        for &b in &self.0 {
            out.push(true);
            out.push(b);
        }
        BitString(out)
    }

    /// Removes and returns the first (next-to-transmit) bit.
    pub fn take_first(&mut self) -> Option<bool> {
        if self.0.is_empty() {
            None
        } else {
            Some(self.0.remove(0))
        }
    }

    /// Inverse of [`transformed_encode`]. `None` if the input has odd length
    /// or any pair starts with 0.
    ///
    /// [`transformed_encode`]: BitString::transformed_encode
    pub fn transformed_decode(&self) -> Option<BitString> {
        if !self.0.len().is_multiple_of(2) {
            return None;
        }
        let mut out = Vec::with_capacity(self.0.len() / 2);
        for pair in self.0.chunks(2) {
            if !pair[0] {
                return None;
            }
            out.push(pair[1]);
        }
        Some(BitString(out))
    }
}

/// Number of binary digits of `v`; 0 still occupies one digit.
pub fn bitlen(v: u64) -> u32 {
    if v == 0 {
        1
    } else {
        64 - v.leading_zeros()
    }
}

/// Ceiling of log2(x) for x >= 1.
pub fn ceil_log2(x: u64) -> u32 {
    debug_assert!(x >= 1);
    if x <= 1 {
        0
    } else {
        bitlen(x - 1)
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for BitString {
    type Err = char;

    /// Parses a string of `0`/`1` characters; the offending character is the
    /// error for anything else.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(other),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(BitString)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_encodes_as_single_bit() {
        assert_eq!(BitString::from_uint(0).to_string(), "0");
    }

    #[test]
    fn uint_round_trip() {
        for v in [0u64, 1, 2, 5, 13, 255, 1023] {
            assert_eq!(BitString::from_uint(v).to_uint(), v);
        }
        assert_eq!(BitString::from_uint(13).to_string(), "1101");
    }

    #[test]
    fn bit_at_is_one_indexed_and_zero_padded() {
        let s: BitString = "101".parse().unwrap();
        assert!(s.bit_at(1));
        assert!(!s.bit_at(2));
        assert!(s.bit_at(3));
        assert!(!s.bit_at(4));
        assert!(!s.bit_at(0));
    }

    #[test]
    fn reversed_reverses() {
        let s: BitString = "1101".parse().unwrap();
        assert_eq!(s.reversed().to_string(), "1011");
    }

    #[test]
    fn transform_examples() {
        let s: BitString = "10".parse().unwrap();
        assert_eq!(s.transformed_encode().to_string(), "1110");
        let s: BitString = "0".parse().unwrap();
        assert_eq!(s.transformed_encode().to_string(), "10");
    }

    #[test]
    fn transformed_stream_never_contains_00() {
        for v in 0..256u64 {
            let enc = BitString::from_uint(v).transformed_encode();
            assert!(!enc.to_string().contains("00"), "v={v} enc={enc}");
        }
    }

    #[test]
    fn decode_rejects_odd_length_and_bad_pairs() {
        assert_eq!("111".parse::<BitString>().unwrap().transformed_decode(), None);
        assert_eq!("0110".parse::<BitString>().unwrap().transformed_decode(), None);
        let ok = "1110".parse::<BitString>().unwrap().transformed_decode().unwrap();
        assert_eq!(ok.to_string(), "10");
    }

    #[test]
    fn from_str_flags_bad_character() {
        assert_eq!("10x1".parse::<BitString>(), Err('x'));
    }

    #[test]
    fn take_first_pops_transmission_order() {
        let mut s: BitString = "10".parse().unwrap();
        assert_eq!(s.take_first(), Some(true));
        assert_eq!(s.take_first(), Some(false));
        assert_eq!(s.take_first(), None);
    }

    #[test]
    fn bitlen_counts_binary_digits() {
        assert_eq!(bitlen(0), 1);
        assert_eq!(bitlen(1), 1);
        assert_eq!(bitlen(2), 2);
        assert_eq!(bitlen(24), 5);
        assert_eq!(bitlen(4096), 13);
    }

    #[test]
    fn ceil_log2_matches_small_cases() {
        assert_eq!(ceil_log2(1), 0);
        assert_eq!(ceil_log2(2), 1);
        assert_eq!(ceil_log2(3), 2);
        assert_eq!(ceil_log2(4), 2);
        assert_eq!(ceil_log2(5), 3);
        assert_eq!(ceil_log2(33), 6);
    }
}
