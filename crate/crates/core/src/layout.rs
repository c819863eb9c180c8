//! Contract storage layout: where each state variable lives in the
//! 2^256-slot storage space, and slot access through a storage trie.
//!
//! Byte offsets inside a slot count from the least significant end of the
//! 32-byte big-endian word, so the first variable packed into a slot holds
//! its lowest-order bytes.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::keccak::{keccak256, keccak256_concat};
use crate::rlp::{self, RlpItem};
use crate::secure::SecureTrie;
use crate::trie::TrieError;

pub const SLOT_BYTES: usize = 32;

/// Upper bound on the number of element assignments a fixed array may expand into.
pub const MAX_FIXED_ELEMENTS: u64 = 1 << 16;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LayoutError {
    #[error("integer width {0} is not a multiple of 8 in 8..=256")]
    InvalidWidth(u16),
    #[error("fixed byte length {0} is not in 1..=32")]
    InvalidByteLength(u8),
    #[error("element of {0} bytes does not fit a slot")]
    ElementTooWide(usize),
    #[error("unsupported kind: {0}")]
    Unsupported(String),
    #[error("short byte string of {0} bytes; at most 31 fit in one slot")]
    BytesTooLong(usize),
    #[error("malformed short byte string slot")]
    MalformedShortBytes,
}

#[derive(Debug, Error)]
pub enum SlotError {
    #[error(transparent)]
    Trie(#[from] TrieError),
    #[error(transparent)]
    Rlp(#[from] rlp::RlpError),
    #[error("stored slot value of {0} bytes")]
    Oversized(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Kind {
    Uint(u16),
    Int(u16),
    Bool,
    Address,
    FixedBytes(u8),
    Struct(Vec<VarDecl>),
    FixedArray { elem: Box<Kind>, len: u64 },
    DynArray(Box<Kind>),
    Mapping { key: Box<Kind>, value: Box<Kind> },
    Bytes,
    String,
}

impl Kind {
    /// Byte size of a value type, `None` for kinds that take whole slots.
    pub fn packed_size(&self) -> Result<Option<usize>, LayoutError> {
        Ok(Some(match *self {
            Kind::Uint(bits) | Kind::Int(bits) => {
                if bits == 0 || bits > 256 || bits % 8 != 0 {
                    return Err(LayoutError::InvalidWidth(bits));
                }
                bits as usize / 8
            }
            Kind::Bool => 1,
            Kind::Address => 20,
            Kind::FixedBytes(n) => {
                if n == 0 || n > 32 {
                    return Err(LayoutError::InvalidByteLength(n));
                }
                n as usize
            }
            _ => return Ok(None),
        }))
    }

    fn is_mapping_key(&self) -> bool {
        matches!(
            self,
            Kind::Uint(_)
                | Kind::Int(_)
                | Kind::Bool
                | Kind::Address
                | Kind::FixedBytes(_)
                | Kind::Bytes
                | Kind::String
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VarDecl {
    pub name: String,
    pub kind: Kind,
}

impl VarDecl {
    pub fn new(name: impl Into<String>, kind: Kind) -> Self {
        VarDecl {
            name: name.into(),
            kind,
        }
    }
}

/// A 256-bit big-endian slot number.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct SlotIndex(pub [u8; 32]);

impl SlotIndex {
    pub const ZERO: SlotIndex = SlotIndex([0; 32]);

    pub fn as_bytes(&self) -> &[u8; 32] {
        &self.0
    }

    /// Adds `n` modulo 2^256.
    pub fn wrapping_add(self, n: u64) -> SlotIndex {
        let mut out = self.0;
        let mut carry = n as u128;
        for byte in out.iter_mut().rev() {
            if carry == 0 {
                break;
            }
            let sum = *byte as u128 + (carry & 0xff);
            *byte = sum as u8;
            carry = (carry >> 8) + (sum >> 8);
        }
        SlotIndex(out)
    }

    pub fn next(self) -> SlotIndex {
        self.wrapping_add(1)
    }
}

impl From<u64> for SlotIndex {
    fn from(n: u64) -> Self {
        SlotIndex(pad32(&n.to_be_bytes()))
    }
}

impl fmt::Display for SlotIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::hex::encode(self.0))
    }
}

impl fmt::Debug for SlotIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SlotIndex({self})")
    }
}

impl FromStr for SlotIndex {
    type Err = crate::hex::HexError;

    /// Accepts decimal or 0x-hex of at most 32 bytes.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if !s.starts_with("0x") {
            if let Ok(n) = s.parse::<u64>() {
                return Ok(SlotIndex::from(n));
            }
        }
        let bytes = crate::hex::decode(s)?;
        if bytes.len() > 32 {
            return Err(crate::hex::HexError::Length {
                expected: 32,
                actual: bytes.len(),
            });
        }
        Ok(SlotIndex(pad32(&bytes)))
    }
}

/// Left-pads `bytes` (at most 32) with zeros to a 32-byte word.
pub fn pad32(bytes: &[u8]) -> [u8; 32] {
    assert!(bytes.len() <= 32, "pad32 of {} bytes", bytes.len());
    let mut out = [0u8; 32];
    out[32 - bytes.len()..].copy_from_slice(bytes);
    out
}

/// Where a variable (or a part of one) is stored.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SlotAssignment {
    pub name: String,
    pub slot: SlotIndex,
    pub offset: u8,
    pub len: u8,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Layout {
    pub assignments: Vec<SlotAssignment>,
    /// First slot not used by this layout; a derived contract starts here.
    pub next_slot: SlotIndex,
}

struct Packer {
    slot: SlotIndex,
    offset: usize,
    out: Vec<SlotAssignment>,
}

impl Packer {
    fn align(&mut self) {
        if self.offset > 0 {
            self.slot = self.slot.next();
            self.offset = 0;
        }
    }

    fn place(&mut self, name: String, size: usize) {
        if self.offset + size > SLOT_BYTES {
            self.align();
        }
        self.out.push(SlotAssignment {
            name,
            slot: self.slot,
            offset: self.offset as u8,
            len: size as u8,
        });
        self.offset += size;
    }

    fn decl(&mut self, name: String, kind: &Kind) -> Result<(), LayoutError> {
        if let Some(size) = kind.packed_size()? {
            self.place(name, size);
            return Ok(());
        }
        match kind {
            Kind::Struct(fields) => {
                self.align();
                for field in fields {
                    self.decl(format!("{name}.{}", field.name), &field.kind)?;
                }
                self.align();
            }
            Kind::FixedArray { elem, len } => {
                if *len > MAX_FIXED_ELEMENTS {
                    return Err(LayoutError::Unsupported(format!(
                        "fixed array of {len} elements"
                    )));
                }
                check_nested(elem)?;
                self.align();
                for i in 0..*len {
                    self.decl(format!("{name}[{i}]"), elem)?;
                }
                self.align();
            }
            Kind::Mapping { key, value } => {
                if !key.is_mapping_key() {
                    return Err(LayoutError::Unsupported(format!("mapping key {key:?}")));
                }
                check_nested(value)?;
                self.whole_slot(name);
            }
            Kind::DynArray(elem) => {
                check_nested(elem)?;
                self.whole_slot(name);
            }
            Kind::Bytes | Kind::String => self.whole_slot(name),
            _ => unreachable!("value types handled above"),
        }
        Ok(())
    }

    fn whole_slot(&mut self, name: String) {
        self.align();
        self.place(name, SLOT_BYTES);
        self.align();
    }
}

/// Validates a kind nested inside a container without laying it out.
fn check_nested(kind: &Kind) -> Result<(), LayoutError> {
    if kind.packed_size()?.is_some() {
        return Ok(());
    }
    match kind {
        Kind::Struct(fields) => fields.iter().try_for_each(|f| check_nested(&f.kind)),
        Kind::FixedArray { elem, .. } | Kind::DynArray(elem) => check_nested(elem),
        Kind::Mapping { key, value } if key.is_mapping_key() => check_nested(value),
        Kind::Mapping { key, .. } => Err(LayoutError::Unsupported(format!("mapping key {key:?}"))),
        _ => Ok(()),
    }
}

/// Assigns slots to `decls` in declaration order starting at `base`.
pub fn layout_static(decls: &[VarDecl], base: SlotIndex) -> Result<Layout, LayoutError> {
    let mut packer = Packer {
        slot: base,
        offset: 0,
        out: Vec::new(),
    };
    for d in decls {
        packer.decl(d.name.clone(), &d.kind)?;
    }
    packer.align();
    Ok(Layout {
        assignments: packer.out,
        next_slot: packer.slot,
    })
}

/// Lays out an inheritance chain, most basic contract first.
pub fn layout_inherited(levels: &[Vec<VarDecl>]) -> Result<Vec<SlotAssignment>, LayoutError> {
    let mut next = SlotIndex::ZERO;
    let mut out = Vec::new();
    for decls in levels {
        let layout = layout_static(decls, next)?;
        next = layout.next_slot;
        out.extend(layout.assignments);
    }
    Ok(out)
}

/// Slot of `map[key]` for a mapping declared at `map_slot`.
///
/// Keys longer than 32 bytes are hashed unpadded.
pub fn map_value_slot(map_slot: SlotIndex, key: &[u8]) -> SlotIndex {
    let digest = if key.len() <= 32 {
        keccak256_concat([&pad32(key)[..], &map_slot.0[..]])
    } else {
        keccak256_concat([key, &map_slot.0[..]])
    };
    SlotIndex(digest.0)
}

/// First data slot of a dynamic array declared at `array_slot`.
pub fn dyn_array_base(array_slot: SlotIndex) -> SlotIndex {
    SlotIndex(keccak256(array_slot.0).0)
}

/// Location of element `index` of a dynamic array of `elem_size`-byte items.
pub fn dyn_array_slots(
    array_slot: SlotIndex,
    elem_size: usize,
    index: u64,
) -> Result<SlotAssignment, LayoutError> {
    if elem_size == 0 || elem_size > SLOT_BYTES {
        return Err(LayoutError::ElementTooWide(elem_size));
    }
    let per_slot = (SLOT_BYTES / elem_size) as u64;
    Ok(SlotAssignment {
        name: format!("[{index}]"),
        slot: dyn_array_base(array_slot).wrapping_add(index / per_slot),
        offset: ((index % per_slot) as usize * elem_size) as u8,
        len: elem_size as u8,
    })
}

/// Packs a byte string of at most 31 bytes with its length in the last byte.
pub fn short_bytes_encode(data: &[u8]) -> Result<[u8; 32], LayoutError> {
    if data.len() >= SLOT_BYTES {
        return Err(LayoutError::BytesTooLong(data.len()));
    }
    let mut out = [0u8; 32];
    out[..data.len()].copy_from_slice(data);
    out[31] = data.len() as u8;
    Ok(out)
}

pub fn short_bytes_decode(slot: &[u8; 32]) -> Result<Vec<u8>, LayoutError> {
    let len = slot[31] as usize;
    if len >= SLOT_BYTES || slot[len..31].iter().any(|&b| b != 0) {
        return Err(LayoutError::MalformedShortBytes);
    }
    Ok(slot[..len].to_vec())
}

/// Byte range `[start, end)` of an assignment within the big-endian word.
fn word_range(offset: u8, len: u8) -> std::ops::Range<usize> {
    let end = SLOT_BYTES - offset as usize;
    end - len as usize..end
}

/// Writes `value` (big-endian, at most `a.len` bytes) into its place in `word`.
pub fn pack_value(word: &mut [u8; 32], a: &SlotAssignment, value: &[u8]) {
    assert!(
        value.len() <= a.len as usize,
        "value wider than its slot region"
    );
    let range = word_range(a.offset, a.len);
    let dst = &mut word[range];
    dst.fill(0);
    let start = dst.len() - value.len();
    dst[start..].copy_from_slice(value);
}

pub fn unpack_value(word: &[u8; 32], a: &SlotAssignment) -> Vec<u8> {
    word[word_range(a.offset, a.len)].to_vec()
}

/// Binds slot `index` to `content`; all-zero content removes the binding.
pub fn slot_write(
    storage: &SecureTrie,
    index: SlotIndex,
    content: &[u8; 32],
) -> Result<SecureTrie, TrieError> {
    let first = content.iter().position(|&b| b != 0);
    match first {
        None => storage.delete(&index.0),
        Some(i) => storage.insert(&index.0, &RlpItem::bytes(&content[i..]).encode()),
    }
}

/// Reads slot `index`; absent slots are zero.
pub fn slot_read(storage: &SecureTrie, index: SlotIndex) -> Result<[u8; 32], SlotError> {
    let Some(raw) = storage.get(&index.0)? else {
        return Ok([0; 32]);
    };
    let item = rlp::decode(&raw)?;
    let bytes = item.as_bytes()?;
    if bytes.len() > 32 {
        return Err(SlotError::Oversized(bytes.len()));
    }
    Ok(pad32(bytes))
}
