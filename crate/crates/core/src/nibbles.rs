//! Nibble paths and the hex-prefix encoding used for Extension and Leaf paths.
//!
//! The first nibble of an encoded path carries two flags: bit 1 marks a
//! Leaf, bit 0 marks an odd-length path. Even-length paths get a zero
//! padding nibble so the payload always packs into whole bytes.

use std::fmt;
use std::ops::Deref;

use thiserror::Error;

const ODD_FLAG: u8 = 0x1;
const LEAF_FLAG: u8 = 0x2;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HexPrefixError {
    #[error("nibble value {0} out of range")]
    NibbleOutOfRange(u8),
    #[error("empty hex-prefix input")]
    Empty,
    #[error("invalid flag nibble {0:#x}")]
    InvalidFlag(u8),
    #[error("nonzero padding nibble {0:#x}")]
    NonzeroPadding(u8),
}

/// A sequence of 4-bit values.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Nibbles(Vec<u8>);

impl Nibbles {
    pub fn new() -> Self {
        Nibbles(Vec::new())
    }

    pub fn from_nibbles(values: impl Into<Vec<u8>>) -> Result<Self, HexPrefixError> {
        let values = values.into();
        if let Some(&bad) = values.iter().find(|&&n| n > 0x0f) {
            return Err(HexPrefixError::NibbleOutOfRange(bad));
        }
        Ok(Nibbles(values))
    }

    /// Splits each byte into its high and low nibble.
    pub fn from_bytes(key: &[u8]) -> Self {
        Nibbles(key.iter().flat_map(|b| [b >> 4, b & 0x0f]).collect())
    }

    /// Parses one nibble per hex digit, e.g. `"5678a"`.
    pub fn from_hex_digits(s: &str) -> Option<Self> {
        s.chars()
            .map(|c| c.to_digit(16).map(|d| d as u8))
            .collect::<Option<Vec<u8>>>()
            .map(Nibbles)
    }

    pub fn to_hex_digits(&self) -> String {
        self.0
            .iter()
            .map(|&n| char::from_digit(n as u32, 16).unwrap())
            .collect()
    }

    pub fn as_slice(&self) -> &[u8] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<u8> {
        self.0
    }

    pub fn slice(&self, start: usize) -> Nibbles {
        Nibbles(self.0[start..].to_vec())
    }

    /// Packs an even-length path back into bytes.
    pub fn to_bytes(&self) -> Option<Vec<u8>> {
        if !self.0.len().is_multiple_of(2) {
            return None;
        }
        Some(self.0.chunks(2).map(|p| (p[0] << 4) | p[1]).collect())
    }
}

impl Deref for Nibbles {
    type Target = [u8];

    fn deref(&self) -> &[u8] {
        &self.0
    }
}

impl fmt::Debug for Nibbles {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Nibbles({})", self.to_hex_digits())
    }
}

impl From<&[u8]> for Nibbles {
    fn from(key: &[u8]) -> Self {
        Nibbles::from_bytes(key)
    }
}

/// Length of the longest common prefix of two nibble slices.
pub fn common_prefix_len(a: &[u8], b: &[u8]) -> usize {
    a.iter().zip(b).take_while(|(x, y)| x == y).count()
}

/// Hex-prefix encodes `path` with the Leaf/Extension flag.
pub fn hp_encode(path: &[u8], is_leaf: bool) -> Result<Vec<u8>, HexPrefixError> {
    if let Some(&bad) = path.iter().find(|&&n| n > 0x0f) {
        return Err(HexPrefixError::NibbleOutOfRange(bad));
    }
    let odd = path.len() % 2 == 1;
    let flag = if is_leaf { LEAF_FLAG } else { 0 } | if odd { ODD_FLAG } else { 0 };

    let mut out = Vec::with_capacity(1 + path.len() / 2);
    let rest = if odd {
        out.push((flag << 4) | path[0]);
        &path[1..]
    } else {
        out.push(flag << 4);
        path
    };
    out.extend(rest.chunks(2).map(|p| (p[0] << 4) | p[1]));
    Ok(out)
}

/// Inverse of [`hp_encode`]: the path and its Leaf flag.
pub fn hp_decode(data: &[u8]) -> Result<(Nibbles, bool), HexPrefixError> {
    let (&first, rest) = data.split_first().ok_or(HexPrefixError::Empty)?;
    let flag = first >> 4;
    if flag > (LEAF_FLAG | ODD_FLAG) {
        return Err(HexPrefixError::InvalidFlag(flag));
    }
    let is_leaf = flag & LEAF_FLAG != 0;
    let mut path = Vec::with_capacity(1 + rest.len() * 2);
    if flag & ODD_FLAG != 0 {
        path.push(first & 0x0f);
    } else if first & 0x0f != 0 {
        return Err(HexPrefixError::NonzeroPadding(first & 0x0f));
    }
    path.extend(rest.iter().flat_map(|b| [b >> 4, b & 0x0f]));
    Ok((Nibbles(path), is_leaf))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn odd_path() {
        assert_eq!(
            hp_encode(&[5, 6, 7, 8, 9], false).unwrap(),
            vec![0x15, 0x67, 0x89]
        );
        assert_eq!(
            hp_encode(&[5, 6, 7, 8, 9], true).unwrap(),
            vec![0x35, 0x67, 0x89]
        );
    }

    #[test]
    fn even_path() {
        assert_eq!(
            hp_encode(&[4, 5, 6, 7, 8, 9], false).unwrap(),
            vec![0x00, 0x45, 0x67, 0x89]
        );
        assert_eq!(
            hp_encode(&[4, 5, 6, 7, 8, 9], true).unwrap(),
            vec![0x20, 0x45, 0x67, 0x89]
        );
        assert_eq!(hp_encode(&[], true).unwrap(), vec![0x20]);
        assert_eq!(hp_encode(&[], false).unwrap(), vec![0x00]);
    }

    #[test]
    fn out_of_range() {
        assert_eq!(
            hp_encode(&[1, 16], true),
            Err(HexPrefixError::NibbleOutOfRange(16))
        );
        assert!(Nibbles::from_nibbles(vec![0, 17]).is_err());
    }

    #[test]
    fn decode_examples() {
        assert_eq!(
            hp_decode(&[0x20, 0x45]).unwrap(),
            (Nibbles::from_nibbles(vec![4, 5]).unwrap(), true)
        );
        assert_eq!(
            hp_decode(&[0x15, 0x67, 0x89]).unwrap(),
            (Nibbles::from_nibbles(vec![5, 6, 7, 8, 9]).unwrap(), false)
        );
        assert_eq!(
            hp_decode(&[0x41, 0x00]),
            Err(HexPrefixError::InvalidFlag(4))
        );
        assert_eq!(hp_decode(&[0x03]), Err(HexPrefixError::NonzeroPadding(3)));
        assert_eq!(hp_decode(&[]), Err(HexPrefixError::Empty));
    }

    #[test]
    fn bytes_to_nibbles() {
        assert_eq!(
            Nibbles::from_bytes(&[0x11, 0xf2]).as_slice(),
            &[1, 1, 15, 2]
        );
        assert!(Nibbles::from_bytes(&[]).is_empty());
        assert_eq!(Nibbles::from_bytes(&[0x0a]).as_slice(), &[0, 10]);
        assert_eq!(
            Nibbles::from_bytes(&[0xab, 0x01]).to_bytes().unwrap(),
            vec![0xab, 0x01]
        );
    }

    #[test]
    fn hex_digits() {
        let n = Nibbles::from_hex_digits("56789").unwrap();
        assert_eq!(n.as_slice(), &[5, 6, 7, 8, 9]);
        assert_eq!(n.to_hex_digits(), "56789");
        assert!(Nibbles::from_hex_digits("5g").is_none());
    }

    mod props {
        use super::super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn round_trip(path in proptest::collection::vec(0u8..16, 0..=128), leaf: bool) {
                let enc = hp_encode(&path, leaf).unwrap();
                let (back, flag) = hp_decode(&enc).unwrap();
                prop_assert_eq!(back.as_slice(), &path[..]);
                prop_assert_eq!(flag, leaf);
            }

            #[test]
            fn length_and_flags(path in proptest::collection::vec(0u8..16, 0..=128), leaf: bool) {
                let enc = hp_encode(&path, leaf).unwrap();
                prop_assert_eq!(enc.len(), 1 + path.len() / 2);
                prop_assert_eq!(enc[0] & 0x10 != 0, path.len() % 2 == 1);
                prop_assert_eq!(enc[0] & 0x20 != 0, leaf);
            }
        }
    }
}
