use std::fmt;
use std::sync::Arc;

use crate::keccak::{EMPTY_TRIE_ROOT, H256};
use crate::rlp::RlpItem;
use crate::store::{OverlayStore, SharedStore};
use crate::trie::{Trie, TrieError};

use super::{
    apply_transaction, header_bloom, ommers_hash, Address, Block, BlockHeader, ChainConfig,
    ChainError, Receipt, Transaction, WorldState, MAX_EXTRA_DATA,
};

/// Root of a trie mapping `RLP(index) -> item` for 0-based indices.
fn index_trie_root(items: impl IntoIterator<Item = Vec<u8>>) -> Result<H256, TrieError> {
    let mut trie = Trie::in_memory();
    for (i, encoded) in items.into_iter().enumerate() {
        trie = trie.insert(&RlpItem::uint(i as u64).encode(), &encoded)?;
    }
    Ok(trie.root_hash())
}

pub fn tx_trie_root(txs: &[Transaction]) -> Result<H256, TrieError> {
    index_trie_root(txs.iter().map(Transaction::encode))
}

pub fn receipt_trie_root(receipts: &[Receipt]) -> Result<H256, TrieError> {
    index_trie_root(receipts.iter().map(Receipt::encode))
}

/// Block 0: no parent, no transactions, committing to `state`.
pub fn genesis_block(state: &WorldState) -> Block {
    Block {
        header: BlockHeader {
            state_root: state.root_hash(),
            ..Default::default()
        },
        ..Default::default()
    }
}

/// Executes `txs` on `pre_state` and builds the child of `parent`.
///
/// Mining fields (difficulty, mixHash, nonce) are zero; gasLimit is the sum
/// of the transactions' gas limits.
pub fn seal_block(
    parent: &BlockHeader,
    txs: Vec<Transaction>,
    ommers: Vec<BlockHeader>,
    pre_state: &WorldState,
    beneficiary: Address,
    config: &ChainConfig,
) -> Result<(Block, WorldState, Vec<Receipt>), ChainError> {
    let (post_state, receipts) = execute(pre_state, &txs, config)?;
    let header = BlockHeader {
        parent_hash: parent.hash(),
        ommers_hash: ommers_hash(&ommers),
        beneficiary,
        state_root: post_state.root_hash(),
        receipts_root: receipt_trie_root(&receipts)?,
        transactions_root: tx_trie_root(&txs)?,
        logs_bloom: header_bloom(&receipts),
        difficulty: 0,
        number: parent.number + 1,
        gas_limit: txs
            .iter()
            .fold(0u64, |acc, tx| acc.saturating_add(tx.gas_limit)),
        gas_used: receipts.last().map_or(0, |r| r.cumulative_gas_used),
        extra_data: Vec::new(),
        mix_hash: H256::ZERO,
        nonce: [0; 8],
    };
    let block = Block {
        header,
        transactions: txs,
        ommers,
    };
    Ok((block, post_state, receipts))
}

fn execute(
    state: &WorldState,
    txs: &[Transaction],
    config: &ChainConfig,
) -> Result<(WorldState, Vec<Receipt>), ChainError> {
    let mut state = state.clone();
    let mut receipts = Vec::with_capacity(txs.len());
    let mut gas = 0;
    for tx in txs {
        let (next, receipt) = apply_transaction(&state, tx, gas, config)?;
        gas = receipt.cumulative_gas_used;
        state = next;
        receipts.push(receipt);
    }
    Ok((state, receipts))
}

/// The first block that failed verification, and why.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerifyError {
    pub index: usize,
    pub reason: String,
}

impl fmt::Display for VerifyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "block {}: {}", self.index, self.reason)
    }
}

impl std::error::Error for VerifyError {}

fn expect_eq<T: PartialEq + fmt::Debug>(what: &str, header: T, computed: T) -> Result<(), String> {
    if header == computed {
        Ok(())
    } else {
        Err(format!(
            "{what} mismatch: header {header:?}, computed {computed:?}"
        ))
    }
}

/// Reads every node of the state committed to by `root` out of `store`,
/// including contract storage tries, so tampered or missing data surfaces.
fn audit_state(root: H256, store: &SharedStore) -> Result<(), String> {
    let state = WorldState::at(root, store.clone());
    state
        .trie()
        .inner()
        .audit()
        .map_err(|e| format!("state {root} does not authenticate: {e}"))?;
    let accounts = state.accounts().map_err(|e| e.to_string())?;
    for (_, account) in accounts {
        if account.storage_root != EMPTY_TRIE_ROOT {
            Trie::at(account.storage_root, store.clone())
                .audit()
                .map_err(|e| {
                    format!(
                        "storage {} does not authenticate: {e}",
                        account.storage_root
                    )
                })?;
        }
    }
    Ok(())
}

/// Replays `blocks` from `genesis` and checks every header against the
/// recomputed roots, linkage and the contents of the backing store.
///
/// `blocks[0]` must be the genesis block committing to `genesis`. Each
/// header's state is audited directly in `genesis`'s store before the block
/// is replayed; replay itself writes only to a scratch overlay.
pub fn verify_chain(
    blocks: &[Block],
    genesis: &WorldState,
    config: &ChainConfig,
) -> Result<(), VerifyError> {
    let base = genesis.store().clone();
    let scratch: SharedStore = Arc::new(OverlayStore::new(base.clone()));
    let mut state = WorldState::at(genesis.root_hash(), scratch);

    for (index, block) in blocks.iter().enumerate() {
        let fail = |reason: String| VerifyError { index, reason };
        let h = &block.header;

        if h.extra_data.len() > MAX_EXTRA_DATA {
            return Err(fail(format!("extraData is {} bytes", h.extra_data.len())));
        }
        expect_eq("ommersHash", h.ommers_hash, ommers_hash(&block.ommers)).map_err(fail)?;
        let tx_root = tx_trie_root(&block.transactions).map_err(|e| fail(e.to_string()))?;
        expect_eq("transactionsRoot", h.transactions_root, tx_root).map_err(fail)?;

        if index == 0 {
            expect_eq("number", h.number, 0).map_err(fail)?;
            expect_eq("parentHash", h.parent_hash, H256::ZERO).map_err(fail)?;
            expect_eq("stateRoot", h.state_root, genesis.root_hash()).map_err(fail)?;
            if !block.transactions.is_empty() {
                return Err(fail("genesis block carries transactions".into()));
            }
            expect_eq("receiptsRoot", h.receipts_root, EMPTY_TRIE_ROOT).map_err(fail)?;
            audit_state(h.state_root, &base).map_err(fail)?;
            continue;
        }

        let parent = &blocks[index - 1].header;
        expect_eq("parentHash", h.parent_hash, parent.hash()).map_err(fail)?;
        expect_eq("number", h.number, parent.number + 1).map_err(fail)?;
        audit_state(h.state_root, &base).map_err(fail)?;

        let (next, receipts) =
            execute(&state, &block.transactions, config).map_err(|e| fail(e.to_string()))?;
        expect_eq("stateRoot", h.state_root, next.root_hash()).map_err(fail)?;
        let receipts_root = receipt_trie_root(&receipts).map_err(|e| fail(e.to_string()))?;
        expect_eq("receiptsRoot", h.receipts_root, receipts_root).map_err(fail)?;
        let gas_used = receipts.last().map_or(0, |r| r.cumulative_gas_used);
        expect_eq("gasUsed", h.gas_used, gas_used).map_err(fail)?;
        expect_eq("logsBloom", h.logs_bloom, header_bloom(&receipts)).map_err(fail)?;
        state = next;
    }
    Ok(())
}
