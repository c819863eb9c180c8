use crate::keccak::{keccak256, keccak256_concat, EMPTY_TRIE_ROOT, H256};
use crate::rlp::RlpItem;
use crate::secure::SecureTrie;
use crate::store::SharedStore;
use crate::trie::TrieError;

use super::{Account, Address, ChainError, LogEntry, Receipt, Transaction, TxKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChainConfig {
    /// Gas charged per transaction regardless of kind or outcome.
    pub gas_per_tx: u64,
}

impl Default for ChainConfig {
    fn default() -> Self {
        ChainConfig { gas_per_tx: 21_000 }
    }
}

/// The world state: `keccak256(address) -> RLP(account)` in a secure trie.
#[derive(Debug, Clone)]
pub struct WorldState {
    trie: SecureTrie,
}

impl WorldState {
    pub fn new(store: SharedStore) -> Result<Self, TrieError> {
        Ok(WorldState {
            trie: SecureTrie::new(store)?,
        })
    }

    pub fn in_memory() -> Self {
        WorldState {
            trie: SecureTrie::in_memory(),
        }
    }

    pub fn at(root: H256, store: SharedStore) -> Self {
        WorldState {
            trie: SecureTrie::at(root, store),
        }
    }

    pub fn from_trie(trie: SecureTrie) -> Self {
        WorldState { trie }
    }

    pub fn trie(&self) -> &SecureTrie {
        &self.trie
    }

    pub fn root_hash(&self) -> H256 {
        self.trie.root_hash()
    }

    pub fn store(&self) -> &SharedStore {
        self.trie.store()
    }

    pub fn get(&self, address: &Address) -> Result<Option<Account>, ChainError> {
        self.trie
            .get(address.as_ref())?
            .map(|bytes| Account::decode(&bytes))
            .transpose()
    }

    pub fn put(&self, address: &Address, account: &Account) -> Result<WorldState, ChainError> {
        Ok(WorldState {
            trie: self.trie.insert(address.as_ref(), &account.encode())?,
        })
    }

    /// Sum of all balances; walks the whole trie.
    pub fn total_balance(&self) -> Result<u128, ChainError> {
        self.trie
            .inner()
            .entries()?
            .iter()
            .map(|(_, v)| Account::decode(v).map(|a| a.balance))
            .sum()
    }

    /// Every account in the state, keyed by hashed address.
    pub fn accounts(&self) -> Result<Vec<(H256, Account)>, ChainError> {
        self.trie
            .inner()
            .entries()?
            .into_iter()
            .map(|(k, v)| {
                Ok((
                    H256::from_slice(&k).unwrap_or_default(),
                    Account::decode(&v)?,
                ))
            })
            .collect()
    }
}

/// Address of a contract created by `sender` at `nonce`:
/// the first 20 bytes of `keccak256(sender ‖ RLP(nonce))`.
pub fn contract_address(sender: &Address, nonce: u64) -> Address {
    let nonce_rlp = RlpItem::uint(nonce).encode();
    let digest = keccak256_concat([sender.as_ref(), nonce_rlp.as_slice()]);
    Address(digest.0[..20].try_into().unwrap())
}

/// Applies one transaction on top of `state`.
///
/// A rule violation (bad nonce, insufficient funds, malformed shape, call
/// into a non-contract, address collision) yields a status-0 receipt. Either
/// way the sender's nonce advances and the fixed gas is accounted. Only an
/// unknown sender is a hard error.
pub fn apply_transaction(
    state: &WorldState,
    tx: &Transaction,
    gas_before: u64,
    config: &ChainConfig,
) -> Result<(WorldState, Receipt), ChainError> {
    let sender = state
        .get(&tx.sender)?
        .ok_or(ChainError::UnknownSender(tx.sender))?;
    let cumulative = gas_before.saturating_add(config.gas_per_tx);

    if let Some((next, logs)) = try_execute(state, tx, &sender)? {
        return Ok((next, Receipt::new(cumulative, logs, 1)));
    }
    let bumped = Account {
        nonce: sender.nonce + 1,
        ..sender
    };
    let next = state.put(&tx.sender, &bumped)?;
    Ok((next, Receipt::new(cumulative, Vec::new(), 0)))
}

fn try_execute(
    state: &WorldState,
    tx: &Transaction,
    sender: &Account,
) -> Result<Option<(WorldState, Vec<LogEntry>)>, ChainError> {
    let Ok(kind) = tx.kind() else {
        return Ok(None);
    };
    if tx.nonce != sender.nonce {
        return Ok(None);
    }
    let spend = if kind == TxKind::Call { 0 } else { tx.value };
    let Some(remaining) = sender.balance.checked_sub(spend) else {
        return Ok(None);
    };
    let debited = Account {
        nonce: sender.nonce + 1,
        balance: remaining,
        ..*sender
    };

    match kind {
        TxKind::Transfer => {
            let to = tx.to.expect("transfer has a recipient");
            let state = state.put(&tx.sender, &debited)?;
            let recipient = state.get(&to)?.unwrap_or_default();
            let Some(balance) = recipient.balance.checked_add(tx.value) else {
                return Ok(None);
            };
            let state = state.put(
                &to,
                &Account {
                    balance,
                    ..recipient
                },
            )?;
            Ok(Some((state, Vec::new())))
        }
        TxKind::Create => {
            let address = contract_address(&tx.sender, tx.nonce);
            if state.get(&address)?.is_some() {
                return Ok(None);
            }
            let contract = Account {
                nonce: 0,
                balance: tx.value,
                storage_root: EMPTY_TRIE_ROOT,
                code_hash: keccak256(&tx.init),
            };
            let state = state.put(&tx.sender, &debited)?.put(&address, &contract)?;
            Ok(Some((state, Vec::new())))
        }
        TxKind::Call => {
            let to = tx.to.expect("call has a target");
            match state.get(&to)? {
                Some(target) if target.is_contract() => {}
                _ => return Ok(None),
            }
            let log = LogEntry::new(to, vec![keccak256(&tx.data).0], tx.data.clone())?;
            let state = state.put(&tx.sender, &debited)?;
            Ok(Some((state, vec![log])))
        }
    }
}
