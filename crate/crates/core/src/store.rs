//! Content-addressed node storage: every value lives under its Keccak-256 digest.
//!
//! The file backend is an append-only log of records
//! `len: u32 BE | key: [u8; 32] | value: [u8; len]` with an in-memory index
//! rebuilt on open. A partially written final record is discarded on open;
//! any other framing damage is an error. Value integrity is checked on every
//! read, so a flipped byte in the log surfaces as [`StoreError::Corruption`].

use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::Read;
use std::os::unix::fs::FileExt;
use std::path::{Path, PathBuf};
use std::sync::{Arc, RwLock};

use thiserror::Error;

use crate::keccak::{keccak256, H256};

/// Size of the fixed record header: length prefix plus key.
pub const RECORD_HEADER_LEN: usize = 4 + 32;
/// Records claiming a longer value are treated as a damaged length field.
pub const MAX_VALUE_LEN: u32 = 1 << 24;

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("corrupted value under key {0}")]
    Corruption(H256),
    #[error("malformed log at offset {offset}: {reason}")]
    Malformed { offset: u64, reason: String },
}

/// Mapping from digest to the bytes that hash to it.
///
/// Implementations are internally synchronized: many readers may proceed
/// concurrently, writers are serialized.
pub trait NodeStore: Send + Sync {
    /// Stores `value` under `keccak256(value)` and returns the key.
    fn put(&self, value: &[u8]) -> Result<H256, StoreError>;

    /// The value stored under `key`, verified against the key.
    fn get(&self, key: &H256) -> Result<Option<Vec<u8>>, StoreError>;

    fn contains(&self, key: &H256) -> bool;

    /// Makes every prior `put` durable.
    fn flush(&self) -> Result<(), StoreError>;

    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn keys(&self) -> Vec<H256>;
}

pub type SharedStore = Arc<dyn NodeStore>;

fn verified(key: &H256, value: Vec<u8>) -> Result<Vec<u8>, StoreError> {
    if keccak256(&value) != *key {
        return Err(StoreError::Corruption(*key));
    }
    Ok(value)
}

#[derive(Default)]
pub struct MemoryStore {
    map: RwLock<HashMap<H256, Vec<u8>>>,
}

impl MemoryStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn shared() -> SharedStore {
        Arc::new(Self::new())
    }

    /// Overwrites the bytes stored under `key` without rehashing.
    ///
    /// Only useful for fault injection in tests.
    #[doc(hidden)]
    pub fn insert_unchecked(&self, key: H256, value: Vec<u8>) {
        self.map.write().unwrap().insert(key, value);
    }
}

impl NodeStore for MemoryStore {
    fn put(&self, value: &[u8]) -> Result<H256, StoreError> {
        let key = keccak256(value);
        self.map
            .write()
            .unwrap()
            .entry(key)
            .or_insert_with(|| value.to_vec());
        Ok(key)
    }

    fn get(&self, key: &H256) -> Result<Option<Vec<u8>>, StoreError> {
        let value = self.map.read().unwrap().get(key).cloned();
        value.map(|v| verified(key, v)).transpose()
    }

    fn contains(&self, key: &H256) -> bool {
        self.map.read().unwrap().contains_key(key)
    }

    fn flush(&self) -> Result<(), StoreError> {
        Ok(())
    }

    fn len(&self) -> usize {
        self.map.read().unwrap().len()
    }

    fn keys(&self) -> Vec<H256> {
        self.map.read().unwrap().keys().copied().collect()
    }
}

#[derive(Clone, Copy)]
struct Location {
    offset: u64,
    len: u32,
}

struct LogInner {
    file: File,
    index: HashMap<H256, Location>,
    end: u64,
}

/// Append-only record log on disk.
pub struct FileStore {
    path: PathBuf,
    inner: RwLock<LogInner>,
}

impl FileStore {
    /// Opens (or creates) the log at `path` and rebuilds the index.
    pub fn open(path: impl AsRef<Path>) -> Result<Self, StoreError> {
        let path = path.as_ref().to_path_buf();
        let mut file = OpenOptions::new()
            .read(true)
            .write(true)
            .create(true)
            .truncate(false)
            .open(&path)?;
        let mut buf = Vec::new();
        file.read_to_end(&mut buf)?;

        let mut index = HashMap::new();
        let mut pos = 0usize;
        while pos < buf.len() {
            let rest = &buf[pos..];
            if rest.len() < 4 {
                break;
            }
            let len = u32::from_be_bytes(rest[..4].try_into().unwrap());
            if len > MAX_VALUE_LEN {
                return Err(StoreError::Malformed {
                    offset: pos as u64,
                    reason: format!("record length {len} exceeds {MAX_VALUE_LEN}"),
                });
            }
            let total = RECORD_HEADER_LEN + len as usize;
            if rest.len() < total {
                break;
            }
            let key = H256::from_slice(&rest[4..RECORD_HEADER_LEN]).unwrap();
            index.insert(
                key,
                Location {
                    offset: (pos + RECORD_HEADER_LEN) as u64,
                    len,
                },
            );
            pos += total;
        }
        let end = pos as u64;
        if end < buf.len() as u64 {
            // crash tail: drop the incomplete record so appends stay aligned
            file.set_len(end)?;
        }
        Ok(FileStore {
            path,
            inner: RwLock::new(LogInner { file, index, end }),
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }
}

impl NodeStore for FileStore {
    fn put(&self, value: &[u8]) -> Result<H256, StoreError> {
        let key = keccak256(value);
        let len = u32::try_from(value.len())
            .ok()
            .filter(|&l| l <= MAX_VALUE_LEN)
            .ok_or_else(|| StoreError::Malformed {
                offset: 0,
                reason: format!("value of {} bytes is too large", value.len()),
            })?;
        let mut inner = self.inner.write().unwrap();
        if inner.index.contains_key(&key) {
            return Ok(key);
        }
        let mut record = Vec::with_capacity(RECORD_HEADER_LEN + value.len());
        record.extend_from_slice(&len.to_be_bytes());
        record.extend_from_slice(key.as_bytes());
        record.extend_from_slice(value);
        let at = inner.end;
        inner.file.write_all_at(&record, at)?;
        inner.end += record.len() as u64;
        inner.index.insert(
            key,
            Location {
                offset: at + RECORD_HEADER_LEN as u64,
                len,
            },
        );
        Ok(key)
    }

    fn get(&self, key: &H256) -> Result<Option<Vec<u8>>, StoreError> {
        let inner = self.inner.read().unwrap();
        let Some(loc) = inner.index.get(key).copied() else {
            return Ok(None);
        };
        let mut value = vec![0u8; loc.len as usize];
        inner.file.read_exact_at(&mut value, loc.offset)?;
        verified(key, value).map(Some)
    }

    fn contains(&self, key: &H256) -> bool {
        self.inner.read().unwrap().index.contains_key(key)
    }

    fn flush(&self) -> Result<(), StoreError> {
        self.inner.read().unwrap().file.sync_data()?;
        Ok(())
    }

    fn len(&self) -> usize {
        self.inner.read().unwrap().index.len()
    }

    fn keys(&self) -> Vec<H256> {
        self.inner.read().unwrap().index.keys().copied().collect()
    }
}

/// Reads fall through to `base`; writes stay in memory.
///
/// Lets a verifier replay state transitions on top of a store without
/// modifying the store it is auditing.
pub struct OverlayStore {
    base: SharedStore,
    top: MemoryStore,
}

impl OverlayStore {
    pub fn new(base: SharedStore) -> Self {
        OverlayStore {
            base,
            top: MemoryStore::new(),
        }
    }
}

impl NodeStore for OverlayStore {
    fn put(&self, value: &[u8]) -> Result<H256, StoreError> {
        self.top.put(value)
    }

    fn get(&self, key: &H256) -> Result<Option<Vec<u8>>, StoreError> {
        match self.top.get(key)? {
            Some(v) => Ok(Some(v)),
            None => self.base.get(key),
        }
    }

    fn contains(&self, key: &H256) -> bool {
        self.top.contains(key) || self.base.contains(key)
    }

    fn flush(&self) -> Result<(), StoreError> {
        Ok(())
    }

    fn len(&self) -> usize {
        self.keys().len()
    }

    fn keys(&self) -> Vec<H256> {
        let mut keys = self.base.keys();
        keys.extend(
            self.top
                .keys()
                .into_iter()
                .filter(|k| !self.base.contains(k)),
        );
        keys
    }
}
