use crate::keccak::{keccak256, EMPTY_TRIE_ROOT, H256};
use crate::rlp::{self, RlpItem};

use super::{Address, Bloom, ChainError, Transaction};

pub const MAX_EXTRA_DATA: usize = 32;

/// Block header with the fourteen classic fields, in this RLP order:
/// parentHash, ommersHash, beneficiary, stateRoot, receiptsRoot,
/// transactionsRoot, logsBloom, difficulty, number, gasLimit, gasUsed,
/// extraData, mixHash, nonce.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockHeader {
    pub parent_hash: H256,
    pub ommers_hash: H256,
    pub beneficiary: Address,
    pub state_root: H256,
    pub receipts_root: H256,
    pub transactions_root: H256,
    pub logs_bloom: Bloom,
    pub difficulty: u128,
    pub number: u64,
    pub gas_limit: u64,
    pub gas_used: u64,
    pub extra_data: Vec<u8>,
    pub mix_hash: H256,
    pub nonce: [u8; 8],
}

impl Default for BlockHeader {
    fn default() -> Self {
        BlockHeader {
            parent_hash: H256::ZERO,
            ommers_hash: ommers_hash(&[]),
            beneficiary: Address::default(),
            state_root: EMPTY_TRIE_ROOT,
            receipts_root: EMPTY_TRIE_ROOT,
            transactions_root: EMPTY_TRIE_ROOT,
            logs_bloom: Bloom::new(),
            difficulty: 0,
            number: 0,
            gas_limit: 0,
            gas_used: 0,
            extra_data: Vec::new(),
            mix_hash: H256::ZERO,
            nonce: [0; 8],
        }
    }
}

impl BlockHeader {
    pub fn to_rlp(&self) -> RlpItem {
        RlpItem::list([
            RlpItem::bytes(self.parent_hash.to_vec()),
            RlpItem::bytes(self.ommers_hash.to_vec()),
            RlpItem::bytes(self.beneficiary.0.to_vec()),
            RlpItem::bytes(self.state_root.to_vec()),
            RlpItem::bytes(self.receipts_root.to_vec()),
            RlpItem::bytes(self.transactions_root.to_vec()),
            RlpItem::bytes(self.logs_bloom.0.to_vec()),
            RlpItem::uint(self.difficulty),
            RlpItem::uint(self.number),
            RlpItem::uint(self.gas_limit),
            RlpItem::uint(self.gas_used),
            RlpItem::bytes(self.extra_data.clone()),
            RlpItem::bytes(self.mix_hash.to_vec()),
            RlpItem::bytes(self.nonce.to_vec()),
        ])
    }

    pub fn encode(&self) -> Vec<u8> {
        self.to_rlp().encode()
    }

    /// keccak256 of the header's RLP: what the child's parentHash must equal.
    pub fn hash(&self) -> H256 {
        keccak256(self.encode())
    }

    pub fn from_rlp(item: &RlpItem) -> Result<Self, ChainError> {
        let f = item.as_list_of(14)?;
        let extra_data = f[11].as_bytes()?.to_vec();
        if extra_data.len() > MAX_EXTRA_DATA {
            return Err(ChainError::ExtraDataTooLong(extra_data.len()));
        }
        Ok(BlockHeader {
            parent_hash: H256(f[0].as_fixed()?),
            ommers_hash: H256(f[1].as_fixed()?),
            beneficiary: Address(f[2].as_fixed()?),
            state_root: H256(f[3].as_fixed()?),
            receipts_root: H256(f[4].as_fixed()?),
            transactions_root: H256(f[5].as_fixed()?),
            logs_bloom: Bloom(f[6].as_fixed()?),
            difficulty: f[7].as_u128()?,
            number: f[8].as_u64()?,
            gas_limit: f[9].as_u64()?,
            gas_used: f[10].as_u64()?,
            extra_data,
            mix_hash: H256(f[12].as_fixed()?),
            nonce: f[13].as_fixed()?,
        })
    }

    pub fn decode(bytes: &[u8]) -> Result<Self, ChainError> {
        Self::from_rlp(&rlp::decode(bytes)?)
    }
}

/// keccak256 of the RLP list of ommer headers.
pub fn ommers_hash(ommers: &[BlockHeader]) -> H256 {
    keccak256(RlpItem::list(ommers.iter().map(BlockHeader::to_rlp)).encode())
}

/// A block: header, transactions and ommer headers.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Block {
    pub header: BlockHeader,
    pub transactions: Vec<Transaction>,
    pub ommers: Vec<BlockHeader>,
}
