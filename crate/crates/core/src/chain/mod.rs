//! A minimal Ethereum-style chain: record types, the four trie schemas, a
//! state-transition function for plain transfers, contract creation and
//! message calls, and block sealing plus replay verification.
//!
//! No EVM runs here. Creation records `keccak256(init)` as the code hash,
//! and a message call only emits a log carrying the call data.

mod account;
mod block;
pub mod bloom;
mod header;
mod receipt;
mod state;
mod transaction;

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::hex::{self, HexError};
use crate::rlp::RlpError;
use crate::trie::TrieError;

pub use account::Account;
pub use block::{
    genesis_block, receipt_trie_root, seal_block, tx_trie_root, verify_chain, VerifyError,
};
pub use bloom::Bloom;
pub use header::{ommers_hash, Block, BlockHeader, MAX_EXTRA_DATA};
pub use receipt::{header_bloom, receipt_bloom, LogEntry, Receipt, MAX_TOPICS};
pub use state::{apply_transaction, contract_address, ChainConfig, WorldState};
pub use transaction::{Transaction, TxKind};

#[derive(Debug, Error)]
pub enum ChainError {
    #[error(transparent)]
    Trie(#[from] TrieError),
    #[error("malformed record: {0}")]
    Rlp(#[from] RlpError),
    #[error("unknown sender {0}")]
    UnknownSender(Address),
    #[error("transaction fields match none of transfer/creation/call")]
    MalformedTransaction,
    #[error("log entry has {0} topics, at most 4 allowed")]
    TooManyTopics(usize),
    #[error("extraData is {0} bytes, at most 32 allowed")]
    ExtraDataTooLong(usize),
}

/// A 20-byte account address.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Address(pub [u8; 20]);

impl Address {
    pub fn as_bytes(&self) -> &[u8; 20] {
        &self.0
    }
}

impl AsRef<[u8]> for Address {
    fn as_ref(&self) -> &[u8] {
        &self.0
    }
}

impl fmt::Display for Address {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&hex::encode(self.0))
    }
}

impl fmt::Debug for Address {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Address({self})")
    }
}

impl FromStr for Address {
    type Err = HexError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        hex::decode_fixed::<20>(s).map(Address)
    }
}
