use crate::keccak::{keccak256, H256};
use crate::rlp::{self, uint_to_be, RlpItem};

use super::{Address, ChainError};

/// Which of the three field shapes a transaction has.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TxKind {
    Transfer,
    Create,
    Call,
}

/// A transaction. `v`, `r`, `s` are carried opaquely; the sender is explicit
/// since signatures are not recovered.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Transaction {
    pub nonce: u64,
    pub gas_price: u128,
    pub gas_limit: u64,
    pub to: Option<Address>,
    pub value: u128,
    pub init: Vec<u8>,
    pub data: Vec<u8>,
    pub v: u8,
    pub r: [u8; 32],
    pub s: [u8; 32],
    pub sender: Address,
}

fn scalar(bytes: &[u8; 32]) -> RlpItem {
    let skip = bytes.iter().take_while(|&&b| b == 0).count();
    RlpItem::bytes(&bytes[skip..])
}

fn scalar_from(item: &RlpItem) -> Result<[u8; 32], ChainError> {
    let b = item.as_bytes()?;
    if b.first() == Some(&0) {
        return Err(rlp::RlpError::LeadingZeroInteger.into());
    }
    if b.len() > 32 {
        return Err(rlp::RlpError::IntegerOverflow(b.len()).into());
    }
    let mut out = [0u8; 32];
    out[32 - b.len()..].copy_from_slice(b);
    Ok(out)
}

impl Transaction {
    pub fn transfer(sender: Address, nonce: u64, to: Address, value: u128) -> Self {
        Transaction {
            nonce,
            gas_limit: 21_000,
            to: Some(to),
            value,
            sender,
            ..Default::default()
        }
    }

    pub fn create(sender: Address, nonce: u64, init: Vec<u8>, value: u128) -> Self {
        Transaction {
            nonce,
            gas_limit: 100_000,
            init,
            value,
            sender,
            ..Default::default()
        }
    }

    pub fn call(sender: Address, nonce: u64, to: Address, data: Vec<u8>) -> Self {
        Transaction {
            nonce,
            gas_limit: 50_000,
            to: Some(to),
            data,
            sender,
            ..Default::default()
        }
    }

    pub fn kind(&self) -> Result<TxKind, ChainError> {
        match (
            self.to.is_some(),
            self.init.is_empty(),
            self.data.is_empty(),
        ) {
            (true, true, true) => Ok(TxKind::Transfer),
            (false, false, true) => Ok(TxKind::Create),
            (true, true, false) => Ok(TxKind::Call),
            _ => Err(ChainError::MalformedTransaction),
        }
    }

    /// `[nonce, gasPrice, gasLimit, to, value, init, data, v, r, s, sender]`.
    pub fn to_rlp(&self) -> RlpItem {
        RlpItem::list([
            RlpItem::uint(self.nonce),
            RlpItem::uint(self.gas_price),
            RlpItem::uint(self.gas_limit),
            RlpItem::bytes(self.to.map(|a| a.0.to_vec()).unwrap_or_default()),
            RlpItem::uint(self.value),
            RlpItem::bytes(self.init.clone()),
            RlpItem::bytes(self.data.clone()),
            RlpItem::bytes(uint_to_be(self.v as u128)),
            scalar(&self.r),
            scalar(&self.s),
            RlpItem::bytes(self.sender.0.to_vec()),
        ])
    }

    pub fn encode(&self) -> Vec<u8> {
        self.to_rlp().encode()
    }

    pub fn hash(&self) -> H256 {
        keccak256(self.encode())
    }

    pub fn from_rlp(item: &RlpItem) -> Result<Self, ChainError> {
        let f = item.as_list_of(11)?;
        let to = match f[3].as_bytes()? {
            [] => None,
            _ => Some(Address(f[3].as_fixed()?)),
        };
        let v = f[7].as_u64()?;
        let v = u8::try_from(v).map_err(|_| rlp::RlpError::IntegerOverflow(8))?;
        Ok(Transaction {
            nonce: f[0].as_u64()?,
            gas_price: f[1].as_u128()?,
            gas_limit: f[2].as_u64()?,
            to,
            value: f[4].as_u128()?,
            init: f[5].as_bytes()?.to_vec(),
            data: f[6].as_bytes()?.to_vec(),
            v,
            r: scalar_from(&f[8])?,
            s: scalar_from(&f[9])?,
            sender: Address(f[10].as_fixed()?),
        })
    }

    pub fn decode(bytes: &[u8]) -> Result<Self, ChainError> {
        Self::from_rlp(&rlp::decode(bytes)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn kinds() {
        let a = Address([1; 20]);
        let b = Address([2; 20]);
        assert_eq!(
            Transaction::transfer(a, 0, b, 5).kind().unwrap(),
            TxKind::Transfer
        );
        assert_eq!(
            Transaction::create(a, 0, vec![0x60], 0).kind().unwrap(),
            TxKind::Create
        );
        assert_eq!(
            Transaction::call(a, 0, b, vec![1]).kind().unwrap(),
            TxKind::Call
        );

        let mut both = Transaction::call(a, 0, b, vec![1]);
        both.init = vec![2];
        assert!(both.kind().is_err());
        let nowhere = Transaction {
            sender: a,
            ..Default::default()
        };
        assert!(nowhere.kind().is_err());
    }

    #[test]
    fn unused_fields_encode_empty() {
        let tx = Transaction::transfer(Address([1; 20]), 0, Address([2; 20]), 0);
        let item = tx.to_rlp();
        let f = item.as_list_of(11).unwrap();
        for i in [0, 1, 4, 5, 6, 7, 8, 9] {
            assert_eq!(f[i], RlpItem::empty(), "field {i}");
        }
    }

    proptest! {
        #[test]
        fn round_trip(
            nonce: u64, gas_price: u128, gas_limit: u64, to: Option<[u8; 20]>, value: u128,
            init in proptest::collection::vec(any::<u8>(), 0..40),
            data in proptest::collection::vec(any::<u8>(), 0..40),
            v: u8, r: [u8; 32], s: [u8; 32], sender: [u8; 20],
        ) {
            let tx = Transaction {
                nonce, gas_price, gas_limit, to: to.map(Address), value, init, data, v, r, s,
                sender: Address(sender),
            };
            prop_assert_eq!(Transaction::decode(&tx.encode()).unwrap(), tx);
        }
    }
}
