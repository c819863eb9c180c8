//! Recursive Length Prefix serialization.
//!
//! An [`RlpItem`] is either a byte string or a list of items. Encoding is
//! canonical and decoding is strict: any input that is not the unique
//! canonical encoding of some item is rejected, so an encoding can serve as
//! the preimage of a content-addressed node key.

use thiserror::Error;

/// Offset of the single-byte prefix for short strings.
pub const STRING_OFFSET: u8 = 0x80;
/// Offset of the single-byte prefix for short lists.
pub const LIST_OFFSET: u8 = 0xc0;
/// Largest payload that still uses the one-byte prefix form.
pub const SHORT_PAYLOAD_MAX: usize = 55;
/// Maximum list nesting accepted by the decoder.
pub const MAX_DECODE_DEPTH: usize = 1024;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RlpError {
    #[error("payload length {0} does not fit the 2^64 byte limit")]
    TooLarge(u128),
    #[error("empty input")]
    Empty,
    #[error("{0} trailing bytes after item")]
    TrailingBytes(usize),
    #[error("truncated: need {needed} bytes, have {available}")]
    Truncated { needed: usize, available: usize },
    #[error("non-canonical: single byte {0:#04x} wrapped in a string prefix")]
    WrappedSingleByte(u8),
    #[error("non-canonical: long form used for payload of length {0}")]
    LongFormForShortPayload(usize),
    #[error("non-canonical: length field has a leading zero byte")]
    LeadingZeroInLength,
    #[error("list nesting exceeds {MAX_DECODE_DEPTH}")]
    TooDeep,
    #[error("expected a byte string")]
    ExpectedBytes,
    #[error("expected a list")]
    ExpectedList,
    #[error("expected a list of {expected} items, got {actual}")]
    ListLength { expected: usize, actual: usize },
    #[error("non-canonical integer: leading zero byte")]
    LeadingZeroInteger,
    #[error("integer of {0} bytes does not fit")]
    IntegerOverflow(usize),
    #[error("expected {expected} bytes, got {actual}")]
    FixedLength { expected: usize, actual: usize },
}

/// The domain of RLP: a byte string or an ordered list of items.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum RlpItem {
    Bytes(Vec<u8>),
    List(Vec<RlpItem>),
}

impl RlpItem {
    pub fn bytes(b: impl Into<Vec<u8>>) -> Self {
        RlpItem::Bytes(b.into())
    }

    pub fn empty() -> Self {
        RlpItem::Bytes(Vec::new())
    }

    pub fn list(items: impl IntoIterator<Item = RlpItem>) -> Self {
        RlpItem::List(items.into_iter().collect())
    }

    /// Minimal big-endian form; zero is the empty string.
    pub fn uint(value: impl Into<u128>) -> Self {
        RlpItem::Bytes(uint_to_be(value.into()))
    }

    pub fn as_bytes(&self) -> Result<&[u8], RlpError> {
        match self {
            RlpItem::Bytes(b) => Ok(b),
            RlpItem::List(_) => Err(RlpError::ExpectedBytes),
        }
    }

    pub fn as_list(&self) -> Result<&[RlpItem], RlpError> {
        match self {
            RlpItem::List(items) => Ok(items),
            RlpItem::Bytes(_) => Err(RlpError::ExpectedList),
        }
    }

    /// The list items, checking that there are exactly `n` of them.
    pub fn as_list_of(&self, n: usize) -> Result<&[RlpItem], RlpError> {
        let items = self.as_list()?;
        if items.len() != n {
            return Err(RlpError::ListLength {
                expected: n,
                actual: items.len(),
            });
        }
        Ok(items)
    }

    pub fn as_fixed<const N: usize>(&self) -> Result<[u8; N], RlpError> {
        let b = self.as_bytes()?;
        <[u8; N]>::try_from(b).map_err(|_| RlpError::FixedLength {
            expected: N,
            actual: b.len(),
        })
    }

    pub fn as_u128(&self) -> Result<u128, RlpError> {
        uint_from_be(self.as_bytes()?, 16)
    }

    pub fn as_u64(&self) -> Result<u64, RlpError> {
        uint_from_be(self.as_bytes()?, 8).map(|v| v as u64)
    }

    pub fn is_list(&self) -> bool {
        matches!(self, RlpItem::List(_))
    }

    /// Canonical encoding of this item.
    pub fn encode(&self) -> Vec<u8> {
        encode(self).expect("in-memory item exceeds the 2^64 byte RLP limit")
    }

    /// Length of the canonical encoding, computed without allocating it.
    pub fn encoded_len(&self) -> usize {
        let payload = match self {
            RlpItem::Bytes(b) if b.len() == 1 && b[0] < STRING_OFFSET => return 1,
            RlpItem::Bytes(b) => b.len(),
            RlpItem::List(items) => items.iter().map(RlpItem::encoded_len).sum(),
        };
        header_len(payload) + payload
    }
}

impl From<&[u8]> for RlpItem {
    fn from(b: &[u8]) -> Self {
        RlpItem::Bytes(b.to_vec())
    }
}

impl From<Vec<u8>> for RlpItem {
    fn from(b: Vec<u8>) -> Self {
        RlpItem::Bytes(b)
    }
}

impl From<&str> for RlpItem {
    fn from(s: &str) -> Self {
        RlpItem::Bytes(s.as_bytes().to_vec())
    }
}

/// Number of bytes needed to hold `n` big-endian, at least one.
pub fn num_bytes(n: u64) -> usize {
    let significant = 64 - n.leading_zeros() as usize;
    significant.div_ceil(8).max(1)
}

fn header_len(payload_len: usize) -> usize {
    if payload_len <= SHORT_PAYLOAD_MAX {
        1
    } else {
        1 + num_bytes(payload_len as u64)
    }
}

/// Prefix bytes for a payload of `len` bytes with the given string/list offset.
pub fn length_prefix(len: u128, offset: u8) -> Result<Vec<u8>, RlpError> {
    let len64 = u64::try_from(len).map_err(|_| RlpError::TooLarge(len))?;
    if len64 as usize <= SHORT_PAYLOAD_MAX {
        return Ok(vec![offset + len64 as u8]);
    }
    let n = num_bytes(len64);
    let mut out = Vec::with_capacity(1 + n);
    out.push(offset + SHORT_PAYLOAD_MAX as u8 + n as u8);
    out.extend_from_slice(&len64.to_be_bytes()[8 - n..]);
    Ok(out)
}

/// Canonical RLP encoding of `item`.
pub fn encode(item: &RlpItem) -> Result<Vec<u8>, RlpError> {
    let mut out = Vec::with_capacity(item.encoded_len());
    encode_into(item, &mut out)?;
    Ok(out)
}

fn encode_into(item: &RlpItem, out: &mut Vec<u8>) -> Result<(), RlpError> {
    match item {
        RlpItem::Bytes(b) if b.len() == 1 && b[0] < STRING_OFFSET => out.push(b[0]),
        RlpItem::Bytes(b) => {
            out.extend(length_prefix(b.len() as u128, STRING_OFFSET)?);
            out.extend_from_slice(b);
        }
        RlpItem::List(items) => {
            let payload: usize = items.iter().map(RlpItem::encoded_len).sum();
            out.extend(length_prefix(payload as u128, LIST_OFFSET)?);
            for child in items {
                encode_into(child, out)?;
            }
        }
    }
    Ok(())
}

/// Encodes a byte string without building an [`RlpItem`].
pub fn encode_bytes(b: &[u8]) -> Vec<u8> {
    encode(&RlpItem::Bytes(b.to_vec())).expect("in-memory string exceeds RLP limit")
}

/// Decodes exactly one item spanning all of `data`.
pub fn decode(data: &[u8]) -> Result<RlpItem, RlpError> {
    if data.is_empty() {
        return Err(RlpError::Empty);
    }
    let (item, used) = decode_prefix(data, 0)?;
    if used != data.len() {
        return Err(RlpError::TrailingBytes(data.len() - used));
    }
    Ok(item)
}

struct Header {
    is_list: bool,
    header_len: usize,
    payload_len: usize,
}

fn need(data: &[u8], n: usize) -> Result<(), RlpError> {
    if data.len() < n {
        Err(RlpError::Truncated {
            needed: n,
            available: data.len(),
        })
    } else {
        Ok(())
    }
}

fn read_long_length(data: &[u8], len_of_len: usize) -> Result<usize, RlpError> {
    need(data, 1 + len_of_len)?;
    let field = &data[1..1 + len_of_len];
    if field[0] == 0 {
        return Err(RlpError::LeadingZeroInLength);
    }
    let mut len: u64 = 0;
    for &b in field {
        len = (len << 8) | b as u64;
    }
    let len = usize::try_from(len).map_err(|_| RlpError::Truncated {
        needed: usize::MAX,
        available: data.len(),
    })?;
    if len <= SHORT_PAYLOAD_MAX {
        return Err(RlpError::LongFormForShortPayload(len));
    }
    Ok(len)
}

fn read_header(data: &[u8]) -> Result<Header, RlpError> {
    need(data, 1)?;
    let prefix = data[0];
    let header = match prefix {
        0x00..=0x7f => Header {
            is_list: false,
            header_len: 0,
            payload_len: 1,
        },
        0x80..=0xb7 => {
            let len = (prefix - STRING_OFFSET) as usize;
            if len == 1 {
                need(data, 2)?;
                if data[1] < STRING_OFFSET {
                    return Err(RlpError::WrappedSingleByte(data[1]));
                }
            }
            Header {
                is_list: false,
                header_len: 1,
                payload_len: len,
            }
        }
        0xb8..=0xbf => {
            let len_of_len = (prefix - 0xb7) as usize;
            Header {
                is_list: false,
                header_len: 1 + len_of_len,
                payload_len: read_long_length(data, len_of_len)?,
            }
        }
        0xc0..=0xf7 => Header {
            is_list: true,
            header_len: 1,
            payload_len: (prefix - LIST_OFFSET) as usize,
        },
        0xf8..=0xff => {
            let len_of_len = (prefix - 0xf7) as usize;
            Header {
                is_list: true,
                header_len: 1 + len_of_len,
                payload_len: read_long_length(data, len_of_len)?,
            }
        }
    };
    let total = header
        .header_len
        .checked_add(header.payload_len)
        .ok_or(RlpError::Truncated {
            needed: usize::MAX,
            available: data.len(),
        })?;
    need(data, total)?;
    Ok(header)
}

fn decode_prefix(data: &[u8], depth: usize) -> Result<(RlpItem, usize), RlpError> {
    let h = read_header(data)?;
    let payload = &data[h.header_len..h.header_len + h.payload_len];
    let used = h.header_len + h.payload_len;
    if !h.is_list {
        return Ok((RlpItem::Bytes(payload.to_vec()), used));
    }
    if depth >= MAX_DECODE_DEPTH {
        return Err(RlpError::TooDeep);
    }
    let mut items = Vec::new();
    let mut rest = payload;
    while !rest.is_empty() {
        let (child, n) = decode_prefix(rest, depth + 1)?;
        items.push(child);
        rest = &rest[n..];
    }
    Ok((RlpItem::List(items), used))
}

/// Minimal big-endian bytes of `v`; zero maps to the empty string.
pub fn uint_to_be(v: u128) -> Vec<u8> {
    let bytes = v.to_be_bytes();
    let skip = bytes.iter().take_while(|&&b| b == 0).count();
    bytes[skip..].to_vec()
}

fn uint_from_be(b: &[u8], max_len: usize) -> Result<u128, RlpError> {
    if b.first() == Some(&0) {
        return Err(RlpError::LeadingZeroInteger);
    }
    if b.len() > max_len {
        return Err(RlpError::IntegerOverflow(b.len()));
    }
    Ok(b.iter().fold(0u128, |acc, &x| (acc << 8) | x as u128))
}
