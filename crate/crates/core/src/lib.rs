//! Ethereum's authenticated data-structure stack.
//!
//! - [`rlp`]: Recursive Length Prefix encoding with a strict decoder.
//! - [`nibbles`]: nibble paths and hex-prefix encoding.
//! - [`keccak`]: Keccak-256 (original padding).
//! - [`store`]: content-addressed node storage, in memory or as an append-only log.
//! - [`trie`]: the Merkle Patricia trie with node inlining and proofs.
//! - [`secure`]: the key-hashing trie wrapper.
//! - [`chain`]: accounts, transactions, receipts, headers and block sealing/verification.
//! - [`layout`]: contract storage slot layout and slot access through a storage trie.

pub mod chain;
pub mod hex;
pub mod keccak;
pub mod layout;
pub mod nibbles;
pub mod rlp;
pub mod secure;
pub mod store;
pub mod trie;

pub use keccak::{keccak256, EMPTY_CODE_HASH, EMPTY_TRIE_ROOT, H256};
pub use nibbles::{hp_decode, hp_encode, Nibbles};
pub use rlp::RlpItem;
pub use secure::SecureTrie;
pub use store::{FileStore, MemoryStore, NodeStore, SharedStore};
pub use trie::{verify_proof, Proof, ProofOutcome, Trie};
