use crate::rlp::{self, RlpItem};

use super::{Address, Bloom, ChainError};

/// At most four topics, one per LOG0..LOG4 opcode arity.
pub const MAX_TOPICS: usize = 4;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LogEntry {
    pub address: Address,
    topics: Vec<[u8; 32]>,
    pub data: Vec<u8>,
}

impl LogEntry {
    pub fn new(address: Address, topics: Vec<[u8; 32]>, data: Vec<u8>) -> Result<Self, ChainError> {
        if topics.len() > MAX_TOPICS {
            return Err(ChainError::TooManyTopics(topics.len()));
        }
        Ok(LogEntry {
            address,
            topics,
            data,
        })
    }

    pub fn topics(&self) -> &[[u8; 32]] {
        &self.topics
    }

    /// `[address, [topic...], data]`.
    pub fn to_rlp(&self) -> RlpItem {
        RlpItem::list([
            RlpItem::bytes(self.address.0.to_vec()),
            RlpItem::list(self.topics.iter().map(|t| RlpItem::bytes(t.to_vec()))),
            RlpItem::bytes(self.data.clone()),
        ])
    }

    pub fn from_rlp(item: &RlpItem) -> Result<Self, ChainError> {
        let f = item.as_list_of(3)?;
        let topics = f[1]
            .as_list()?
            .iter()
            .map(|t| t.as_fixed::<32>())
            .collect::<Result<Vec<_>, _>>()?;
        LogEntry::new(Address(f[0].as_fixed()?), topics, f[2].as_bytes()?.to_vec())
    }
}

/// Execution record: `[cumulativeGasUsed, logs, bloom, status]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Receipt {
    pub cumulative_gas_used: u64,
    pub logs: Vec<LogEntry>,
    pub bloom: Bloom,
    pub status: u64,
}

impl Receipt {
    pub fn new(cumulative_gas_used: u64, logs: Vec<LogEntry>, status: u64) -> Self {
        let bloom = receipt_bloom(&logs);
        Receipt {
            cumulative_gas_used,
            logs,
            bloom,
            status,
        }
    }

    pub fn to_rlp(&self) -> RlpItem {
        RlpItem::list([
            RlpItem::uint(self.cumulative_gas_used),
            RlpItem::list(self.logs.iter().map(LogEntry::to_rlp)),
            RlpItem::bytes(self.bloom.0.to_vec()),
            RlpItem::uint(self.status),
        ])
    }

    pub fn encode(&self) -> Vec<u8> {
        self.to_rlp().encode()
    }

    pub fn from_rlp(item: &RlpItem) -> Result<Self, ChainError> {
        let f = item.as_list_of(4)?;
        Ok(Receipt {
            cumulative_gas_used: f[0].as_u64()?,
            logs: f[1]
                .as_list()?
                .iter()
                .map(LogEntry::from_rlp)
                .collect::<Result<_, _>>()?,
            bloom: Bloom(f[2].as_fixed()?),
            status: f[3].as_u64()?,
        })
    }

    pub fn decode(bytes: &[u8]) -> Result<Self, ChainError> {
        Self::from_rlp(&rlp::decode(bytes)?)
    }
}

/// Bloom over every log's address, each topic, and each address‖topic pair.
pub fn receipt_bloom(logs: &[LogEntry]) -> Bloom {
    let mut bloom = Bloom::new();
    for log in logs {
        bloom.insert(log.address.as_ref());
        for topic in &log.topics {
            bloom.insert(topic);
            let mut pair = log.address.0.to_vec();
            pair.extend_from_slice(topic);
            bloom.insert(&pair);
        }
    }
    bloom
}

/// Bitwise OR of the receipts' blooms.
pub fn header_bloom(receipts: &[Receipt]) -> Bloom {
    receipts.iter().fold(Bloom::new(), |mut acc, r| {
        acc.accrue(&r.bloom);
        acc
    })
}
