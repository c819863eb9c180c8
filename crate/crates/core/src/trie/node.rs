use crate::keccak::H256;
use crate::nibbles::{hp_decode, hp_encode, Nibbles};
use crate::rlp::{self, RlpItem};

use super::TrieError;

/// Child references shorter than this are embedded in the parent.
pub const INLINE_LIMIT: usize = 32;

/// A Merkle Patricia trie node.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum Node {
    #[default]
    Empty,
    Leaf {
        path: Nibbles,
        value: Vec<u8>,
    },
    Extension {
        path: Nibbles,
        child: ChildRef,
    },
    Branch {
        children: Box<[ChildRef; 16]>,
        value: Option<Vec<u8>>,
    },
}

/// How a parent points at a child.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum ChildRef {
    #[default]
    Empty,
    Hash(H256),
    Inline(Box<Node>),
}

impl ChildRef {
    pub fn is_empty(&self) -> bool {
        matches!(self, ChildRef::Empty)
    }

    fn to_rlp(&self) -> RlpItem {
        match self {
            ChildRef::Empty => RlpItem::empty(),
            ChildRef::Hash(h) => RlpItem::bytes(h.to_vec()),
            ChildRef::Inline(node) => node.to_rlp(),
        }
    }

    fn from_rlp(item: &RlpItem) -> Result<Self, TrieError> {
        match item {
            RlpItem::Bytes(b) if b.is_empty() => Ok(ChildRef::Empty),
            RlpItem::Bytes(b) => H256::from_slice(b).map(ChildRef::Hash).ok_or_else(|| {
                TrieError::InvalidNode(format!("child reference of {} bytes", b.len()))
            }),
            RlpItem::List(_) => {
                if item.encoded_len() >= INLINE_LIMIT {
                    return Err(TrieError::InvalidNode(
                        "embedded child is not shorter than 32 bytes".into(),
                    ));
                }
                let node = Node::from_rlp(item)?;
                if node == Node::Empty {
                    return Err(TrieError::InvalidNode("embedded empty node".into()));
                }
                Ok(ChildRef::Inline(Box::new(node)))
            }
        }
    }
}

pub fn empty_children() -> Box<[ChildRef; 16]> {
    Box::new(std::array::from_fn(|_| ChildRef::Empty))
}

impl Node {
    pub fn leaf(path: Nibbles, value: Vec<u8>) -> Node {
        Node::Leaf { path, value }
    }

    /// The node as an RLP item; the empty node is the empty string.
    pub fn to_rlp(&self) -> RlpItem {
        match self {
            Node::Empty => RlpItem::empty(),
            Node::Leaf { path, value } => RlpItem::list([
                RlpItem::bytes(hp_encode(path, true).expect("nibble path")),
                RlpItem::bytes(value.clone()),
            ]),
            Node::Extension { path, child } => RlpItem::list([
                RlpItem::bytes(hp_encode(path, false).expect("nibble path")),
                child.to_rlp(),
            ]),
            Node::Branch { children, value } => {
                let mut items: Vec<RlpItem> = children.iter().map(ChildRef::to_rlp).collect();
                items.push(RlpItem::bytes(value.clone().unwrap_or_default()));
                RlpItem::List(items)
            }
        }
    }

    pub fn encode(&self) -> Vec<u8> {
        self.to_rlp().encode()
    }

    /// Parses a node, rejecting shapes this trie never produces.
    pub fn from_rlp(item: &RlpItem) -> Result<Node, TrieError> {
        let items = match item {
            RlpItem::Bytes(b) if b.is_empty() => return Ok(Node::Empty),
            RlpItem::Bytes(_) => return Err(TrieError::InvalidNode("node is a string".into())),
            RlpItem::List(items) => items,
        };
        match items.len() {
            2 => {
                let encoded_path = items[0].as_bytes()?;
                let (path, is_leaf) = hp_decode(encoded_path)
                    .map_err(|e| TrieError::InvalidNode(format!("path: {e}")))?;
                if is_leaf {
                    let value = items[1].as_bytes()?;
                    if value.is_empty() {
                        return Err(TrieError::InvalidNode("leaf with empty value".into()));
                    }
                    Ok(Node::Leaf {
                        path,
                        value: value.to_vec(),
                    })
                } else {
                    if path.is_empty() {
                        return Err(TrieError::InvalidNode("extension with empty path".into()));
                    }
                    let child = ChildRef::from_rlp(&items[1])?;
                    match &child {
                        ChildRef::Empty => {
                            return Err(TrieError::InvalidNode("extension without child".into()))
                        }
                        ChildRef::Inline(n) if !matches!(**n, Node::Branch { .. }) => {
                            return Err(TrieError::InvalidNode(
                                "extension must point at a branch".into(),
                            ))
                        }
                        _ => {}
                    }
                    Ok(Node::Extension { path, child })
                }
            }
            17 => {
                let mut children = empty_children();
                for (slot, item) in children.iter_mut().zip(items) {
                    *slot = ChildRef::from_rlp(item)?;
                }
                let value = items[16].as_bytes()?;
                let value = (!value.is_empty()).then(|| value.to_vec());
                let occupied = children.iter().filter(|c| !c.is_empty()).count()
                    + usize::from(value.is_some());
                if occupied < 2 {
                    return Err(TrieError::InvalidNode(
                        "branch with fewer than two occupied slots".into(),
                    ));
                }
                Ok(Node::Branch { children, value })
            }
            n => Err(TrieError::InvalidNode(format!("list of {n} items"))),
        }
    }

    pub fn decode(bytes: &[u8]) -> Result<Node, TrieError> {
        Node::from_rlp(&rlp::decode(bytes)?)
    }
}
