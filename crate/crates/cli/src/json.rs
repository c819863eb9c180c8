//! JSON shapes accepted and produced by the CLI.

use std::collections::BTreeMap;

use ethds::chain::{Address, Block, BlockHeader, Bloom, Transaction};
use ethds::hex;
use ethds::layout::{Kind, VarDecl};
use ethds::{RlpItem, H256};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::CliError;

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Invalid(msg.into())
}

/// `"0x…"` strings are hex bytes, other strings ASCII bytes, arrays nest.
pub fn item_from_json(v: &Value) -> Result<RlpItem, CliError> {
    match v {
        Value::String(s) if s.starts_with("0x") => Ok(RlpItem::Bytes(hex::decode(s)?)),
        Value::String(s) if s.is_ascii() => Ok(RlpItem::Bytes(s.as_bytes().to_vec())),
        Value::String(s) => Err(invalid(format!("non-ASCII string {s:?}"))),
        Value::Array(items) => items
            .iter()
            .map(item_from_json)
            .collect::<Result<_, _>>()
            .map(RlpItem::List),
        other => Err(invalid(format!("expected string or array, got {other}"))),
    }
}

fn is_plain_ascii(b: &[u8]) -> bool {
    b.iter().all(|c| (0x20..0x7f).contains(c)) && !b.starts_with(b"0x")
}

/// Inverse of [`item_from_json`]. Printable ASCII is shown as text unless `force_hex`.
pub fn item_to_json(item: &RlpItem, force_hex: bool) -> Value {
    match item {
        RlpItem::Bytes(b) if !force_hex && is_plain_ascii(b) => {
            Value::String(String::from_utf8(b.clone()).expect("ascii"))
        }
        RlpItem::Bytes(b) => Value::String(hex::encode(b)),
        RlpItem::List(items) => {
            Value::Array(items.iter().map(|i| item_to_json(i, force_hex)).collect())
        }
    }
}

pub fn quantity(n: impl Into<u128>) -> String {
    format!("{:#x}", n.into())
}

pub fn parse_u128(s: &str) -> Result<u128, CliError> {
    let digits = s
        .strip_prefix("0x")
        .ok_or_else(|| invalid(format!("expected 0x-hex, got {s:?}")))?;
    if digits.is_empty() {
        return Ok(0);
    }
    u128::from_str_radix(digits, 16).map_err(|e| invalid(format!("{s:?}: {e}")))
}

pub fn parse_u64(s: &str) -> Result<u64, CliError> {
    u64::try_from(parse_u128(s)?).map_err(|_| invalid(format!("{s:?} exceeds 64 bits")))
}

fn parse_h256(s: &str) -> Result<H256, CliError> {
    Ok(H256(hex::decode_fixed::<32>(s)?))
}

fn parse_address(s: &str) -> Result<Address, CliError> {
    Ok(s.parse::<Address>()?)
}

/// Genesis allocation entry.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AllocJson {
    pub balance: String,
    #[serde(default = "zero")]
    pub nonce: String,
}

fn zero() -> String {
    "0x0".into()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TxJson {
    pub sender: String,
    pub nonce: String,
    #[serde(default)]
    pub to: Option<String>,
    #[serde(default = "zero")]
    pub value: String,
    #[serde(default)]
    pub gas_price: Option<String>,
    #[serde(default)]
    pub gas_limit: Option<String>,
    #[serde(default)]
    pub init: Option<String>,
    #[serde(default)]
    pub data: Option<String>,
    #[serde(default)]
    pub v: Option<String>,
    #[serde(default)]
    pub r: Option<String>,
    #[serde(default)]
    pub s: Option<String>,
}

fn word(s: &Option<String>) -> Result<[u8; 32], CliError> {
    let Some(s) = s else { return Ok([0; 32]) };
    let b = hex::decode(s)?;
    if b.len() > 32 {
        return Err(invalid(format!("signature word of {} bytes", b.len())));
    }
    let mut out = [0u8; 32];
    out[32 - b.len()..].copy_from_slice(&b);
    Ok(out)
}

impl TxJson {
    pub fn to_tx(&self) -> Result<Transaction, CliError> {
        let bytes = |s: &Option<String>| -> Result<Vec<u8>, CliError> {
            s.as_deref().map_or(Ok(Vec::new()), |s| Ok(hex::decode(s)?))
        };
        let to = self.to.as_deref().map(parse_address).transpose()?;
        let init = bytes(&self.init)?;
        let data = bytes(&self.data)?;
        let default_gas = match (&to, data.is_empty()) {
            (None, _) => 100_000,
            (Some(_), true) => 21_000,
            (Some(_), false) => 50_000,
        };
        let v = match &self.v {
            Some(v) => u8::try_from(parse_u128(v)?).map_err(|_| invalid("v exceeds one byte"))?,
            None => 0,
        };
        Ok(Transaction {
            nonce: parse_u64(&self.nonce)?,
            gas_price: self.gas_price.as_deref().map_or(Ok(0), parse_u128)?,
            gas_limit: self
                .gas_limit
                .as_deref()
                .map_or(Ok(default_gas), parse_u64)?,
            to,
            value: parse_u128(&self.value)?,
            init,
            data,
            v,
            r: word(&self.r)?,
            s: word(&self.s)?,
            sender: parse_address(&self.sender)?,
        })
    }

    pub fn from_tx(tx: &Transaction) -> Self {
        TxJson {
            sender: tx.sender.to_string(),
            nonce: quantity(tx.nonce),
            to: tx.to.map(|a| a.to_string()),
            value: quantity(tx.value),
            gas_price: Some(quantity(tx.gas_price)),
            gas_limit: Some(quantity(tx.gas_limit)),
            init: Some(hex::encode(&tx.init)),
            data: Some(hex::encode(&tx.data)),
            v: Some(quantity(tx.v)),
            r: Some(hex::encode(tx.r)),
            s: Some(hex::encode(tx.s)),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct HeaderJson {
    pub parent_hash: String,
    pub ommers_hash: String,
    pub beneficiary: String,
    pub state_root: String,
    pub receipts_root: String,
    pub transactions_root: String,
    pub logs_bloom: String,
    pub difficulty: String,
    pub number: String,
    pub gas_limit: String,
    pub gas_used: String,
    pub extra_data: String,
    pub mix_hash: String,
    pub nonce: String,
}

impl HeaderJson {
    pub fn from_header(h: &BlockHeader) -> Self {
        HeaderJson {
            parent_hash: h.parent_hash.to_string(),
            ommers_hash: h.ommers_hash.to_string(),
            beneficiary: h.beneficiary.to_string(),
            state_root: h.state_root.to_string(),
            receipts_root: h.receipts_root.to_string(),
            transactions_root: h.transactions_root.to_string(),
            logs_bloom: hex::encode(h.logs_bloom.0),
            difficulty: quantity(h.difficulty),
            number: quantity(h.number),
            gas_limit: quantity(h.gas_limit),
            gas_used: quantity(h.gas_used),
            extra_data: hex::encode(&h.extra_data),
            mix_hash: h.mix_hash.to_string(),
            nonce: hex::encode(h.nonce),
        }
    }

    pub fn to_header(&self) -> Result<BlockHeader, CliError> {
        Ok(BlockHeader {
            parent_hash: parse_h256(&self.parent_hash)?,
            ommers_hash: parse_h256(&self.ommers_hash)?,
            beneficiary: parse_address(&self.beneficiary)?,
            state_root: parse_h256(&self.state_root)?,
            receipts_root: parse_h256(&self.receipts_root)?,
            transactions_root: parse_h256(&self.transactions_root)?,
            logs_bloom: Bloom(hex::decode_fixed::<256>(&self.logs_bloom)?),
            difficulty: parse_u128(&self.difficulty)?,
            number: parse_u64(&self.number)?,
            gas_limit: parse_u64(&self.gas_limit)?,
            gas_used: parse_u64(&self.gas_used)?,
            extra_data: hex::decode(&self.extra_data)?,
            mix_hash: parse_h256(&self.mix_hash)?,
            nonce: hex::decode_fixed::<8>(&self.nonce)?,
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BlockJson {
    pub hash: String,
    pub header: HeaderJson,
    pub transactions: Vec<TxJson>,
    #[serde(default)]
    pub ommers: Vec<HeaderJson>,
}

impl BlockJson {
    pub fn from_block(b: &Block) -> Self {
        BlockJson {
            hash: b.header.hash().to_string(),
            header: HeaderJson::from_header(&b.header),
            transactions: b.transactions.iter().map(TxJson::from_tx).collect(),
            ommers: b.ommers.iter().map(HeaderJson::from_header).collect(),
        }
    }

    pub fn to_block(&self) -> Result<Block, CliError> {
        Ok(Block {
            header: self.header.to_header()?,
            transactions: self
                .transactions
                .iter()
                .map(TxJson::to_tx)
                .collect::<Result<_, _>>()?,
            ommers: self
                .ommers
                .iter()
                .map(HeaderJson::to_header)
                .collect::<Result<_, _>>()?,
        })
    }
}

/// A sealed chain: genesis allocation plus blocks, block 0 being genesis.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChainJson {
    pub genesis: BTreeMap<String, AllocJson>,
    pub blocks: Vec<BlockJson>,
}

/// A chain description to be sealed: allocation plus per-block transactions.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DescriptionJson {
    pub genesis: BTreeMap<String, AllocJson>,
    pub blocks: Vec<BlockSpecJson>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BlockSpecJson {
    #[serde(default)]
    pub beneficiary: Option<String>,
    pub transactions: Vec<TxJson>,
}

pub fn parse_alloc(
    alloc: &BTreeMap<String, AllocJson>,
) -> Result<Vec<(Address, u64, u128)>, CliError> {
    alloc
        .iter()
        .map(|(addr, a)| {
            Ok((
                parse_address(addr)?,
                parse_u64(&a.nonce)?,
                parse_u128(&a.balance)?,
            ))
        })
        .collect()
}

pub fn parse_beneficiary(s: &Option<String>) -> Result<Address, CliError> {
    s.as_deref().map_or(Ok(Address::default()), parse_address)
}

/// One declaration of the `layout` input.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DeclJson {
    #[serde(default)]
    pub name: String,
    pub kind: String,
    #[serde(default)]
    pub width: Option<u16>,
    #[serde(default)]
    pub length: Option<u64>,
    #[serde(default)]
    pub elements: Vec<DeclJson>,
}

impl DeclJson {
    pub fn to_decl(&self) -> Result<VarDecl, CliError> {
        Ok(VarDecl::new(self.name.clone(), self.to_kind()?))
    }

    fn single_element(&self) -> Result<Kind, CliError> {
        match self.elements.as_slice() {
            [e] => e.to_kind(),
            _ => Err(invalid(format!(
                "{} `{}` needs exactly one element",
                self.kind, self.name
            ))),
        }
    }

    fn to_kind(&self) -> Result<Kind, CliError> {
        let byte_width = |w: u16| u8::try_from(w).map_err(|_| invalid(format!("bytes width {w}")));
        Ok(match self.kind.as_str() {
            "uint" => Kind::Uint(self.width.unwrap_or(256)),
            "int" => Kind::Int(self.width.unwrap_or(256)),
            "bool" => Kind::Bool,
            "address" => Kind::Address,
            "bytes" => match self.width {
                Some(w) => Kind::FixedBytes(byte_width(w)?),
                None => Kind::Bytes,
            },
            "string" => Kind::String,
            "struct" => Kind::Struct(
                self.elements
                    .iter()
                    .map(DeclJson::to_decl)
                    .collect::<Result<_, _>>()?,
            ),
            "array" => {
                let elem = Box::new(self.single_element()?);
                match self.length {
                    Some(len) => Kind::FixedArray { elem, len },
                    None => Kind::DynArray(elem),
                }
            }
            "mapping" => match self.elements.as_slice() {
                [k, v] => Kind::Mapping {
                    key: Box::new(k.to_kind()?),
                    value: Box::new(v.to_kind()?),
                },
                _ => {
                    return Err(invalid(format!(
                        "mapping `{}` needs key and value elements",
                        self.name
                    )))
                }
            },
            other => return Err(invalid(format!("unknown kind {other:?}"))),
        })
    }
}
