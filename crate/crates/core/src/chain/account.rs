use crate::keccak::{EMPTY_CODE_HASH, EMPTY_TRIE_ROOT, H256};
use crate::rlp::{self, RlpItem};

use super::ChainError;

/// World-state account: `[nonce, balance, storageRoot, codeHash]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Account {
    pub nonce: u64,
    pub balance: u128,
    pub storage_root: H256,
    pub code_hash: H256,
}

impl Default for Account {
    fn default() -> Self {
        Account::external(0)
    }
}

impl Account {
    /// An externally owned account with the given balance.
    pub fn external(balance: u128) -> Self {
        Account {
            nonce: 0,
            balance,
            storage_root: EMPTY_TRIE_ROOT,
            code_hash: EMPTY_CODE_HASH,
        }
    }

    pub fn is_external(&self) -> bool {
        self.storage_root == EMPTY_TRIE_ROOT && self.code_hash == EMPTY_CODE_HASH
    }

    pub fn is_contract(&self) -> bool {
        self.code_hash != EMPTY_CODE_HASH
    }

    pub fn to_rlp(&self) -> RlpItem {
        RlpItem::list([
            RlpItem::uint(self.nonce),
            RlpItem::uint(self.balance),
            RlpItem::bytes(self.storage_root.to_vec()),
            RlpItem::bytes(self.code_hash.to_vec()),
        ])
    }

    pub fn encode(&self) -> Vec<u8> {
        self.to_rlp().encode()
    }

    pub fn from_rlp(item: &RlpItem) -> Result<Self, ChainError> {
        let f = item.as_list_of(4)?;
        Ok(Account {
            nonce: f[0].as_u64()?,
            balance: f[1].as_u128()?,
            storage_root: H256(f[2].as_fixed()?),
            code_hash: H256(f[3].as_fixed()?),
        })
    }

    pub fn decode(bytes: &[u8]) -> Result<Self, ChainError> {
        Self::from_rlp(&rlp::decode(bytes)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::keccak::keccak256;
    use proptest::prelude::*;

    #[test]
    fn fresh_external_account() {
        let a = Account::external(0);
        assert!(a.is_external());
        let item = rlp::decode(&a.encode()).unwrap();
        let f = item.as_list_of(4).unwrap();
        assert_eq!(f[0], RlpItem::empty());
        assert_eq!(f[1], RlpItem::empty());
        assert_eq!(f[2].as_bytes().unwrap(), EMPTY_TRIE_ROOT.as_bytes());
        assert_eq!(f[3].as_bytes().unwrap(), EMPTY_CODE_HASH.as_bytes());
    }

    #[test]
    fn balances_change_encoding() {
        let a = Account::external(100).encode();
        let b = Account::external(20).encode();
        assert_ne!(a, b);
        assert_ne!(keccak256(&a), keccak256(&b));
    }

    #[test]
    fn rejects_wrong_shape() {
        let bad = RlpItem::list([RlpItem::empty(), RlpItem::empty()]).encode();
        assert!(Account::decode(&bad).is_err());
    }

    proptest! {
        #[test]
        fn round_trip(nonce: u64, balance: u128, s: [u8; 32], c: [u8; 32]) {
            let a = Account { nonce, balance, storage_root: H256(s), code_hash: H256(c) };
            prop_assert_eq!(Account::decode(&a.encode()).unwrap(), a);
        }
    }
}
