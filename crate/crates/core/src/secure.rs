//! A trie addressed by `keccak256(key)` instead of the key itself.
//!
//! Original keys are not recoverable from the trie; callers always supply them.

use crate::keccak::{keccak256, H256};
use crate::store::SharedStore;
use crate::trie::{verify_proof, Proof, ProofOutcome, Trie, TrieError};

#[derive(Clone, Debug)]
pub struct SecureTrie {
    inner: Trie,
}

impl SecureTrie {
    pub fn new(store: SharedStore) -> Result<Self, TrieError> {
        Ok(SecureTrie {
            inner: Trie::new(store)?,
        })
    }

    pub fn in_memory() -> Self {
        SecureTrie {
            inner: Trie::in_memory(),
        }
    }

    pub fn at(root: H256, store: SharedStore) -> Self {
        SecureTrie {
            inner: Trie::at(root, store),
        }
    }

    pub fn root_hash(&self) -> H256 {
        self.inner.root_hash()
    }

    pub fn store(&self) -> &SharedStore {
        self.inner.store()
    }

    /// The underlying trie, keyed by digests.
    pub fn inner(&self) -> &Trie {
        &self.inner
    }

    pub fn insert(&self, key: &[u8], value: &[u8]) -> Result<SecureTrie, TrieError> {
        Ok(SecureTrie {
            inner: self.inner.insert(keccak256(key).as_bytes(), value)?,
        })
    }

    pub fn get(&self, key: &[u8]) -> Result<Option<Vec<u8>>, TrieError> {
        self.inner.get(keccak256(key).as_bytes())
    }

    pub fn delete(&self, key: &[u8]) -> Result<SecureTrie, TrieError> {
        Ok(SecureTrie {
            inner: self.inner.delete(keccak256(key).as_bytes())?,
        })
    }

    pub fn prove(&self, key: &[u8]) -> Result<Proof, TrieError> {
        self.inner.prove(keccak256(key).as_bytes())
    }
}

/// [`verify_proof`] for a proof produced by [`SecureTrie::prove`].
pub fn verify_secure_proof(root: &H256, key: &[u8], proof: &Proof) -> ProofOutcome {
    verify_proof(root, keccak256(key).as_bytes(), proof)
}
