//! The `ethds` command line: encoders, hashing, tries, storage layout and a
//! small sealed-chain demo over hex strings, JSON and node store files.

use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use ethds::chain::{
    genesis_block, seal_block, verify_chain, Account, Block, ChainConfig, ChainError, WorldState,
};
use ethds::hex::{self, HexError};
use ethds::layout::{self, LayoutError, SlotIndex};
use ethds::nibbles::HexPrefixError;
use ethds::rlp::RlpError;
use ethds::store::StoreError;
use ethds::trie::TrieError;
use ethds::{
    hp_decode, hp_encode, keccak256, FileStore, MemoryStore, Nibbles, Proof, ProofOutcome,
    SecureTrie, SharedStore, Trie, H256,
};
use serde_json::{json, Value};
use thiserror::Error;

pub mod json;

use json::{BlockJson, ChainJson, DeclJson, DescriptionJson};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("io: {0}")]
    Io(#[from] io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("hex: {0}")]
    Hex(#[from] HexError),
    #[error("rlp: {0}")]
    Rlp(#[from] RlpError),
    #[error("hex-prefix: {0}")]
    HexPrefix(#[from] HexPrefixError),
    #[error("store: {0}")]
    Store(#[from] StoreError),
    #[error("trie: {0}")]
    Trie(#[from] TrieError),
    #[error("chain: {0}")]
    Chain(#[from] ChainError),
    #[error("layout: {0}")]
    Layout(#[from] LayoutError),
    #[error("slot: {0}")]
    Slot(#[from] layout::SlotError),
    #[error("verification failed: {0}")]
    Verify(String),
    #[error("{0}")]
    Invalid(String),
    #[error("key not found")]
    NotFound,
}

#[derive(Debug, Parser)]
#[command(
    name = "ethds",
    version,
    about = "Authenticated data structures of an Ethereum-style chain"
)]
pub struct Cli {
    /// Write output to this file instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Recursive Length Prefix encoding.
    #[command(subcommand)]
    Rlp(RlpCmd),
    /// Hex-prefix encoding of nibble paths.
    #[command(subcommand)]
    Hp(HpCmd),
    /// Keccak-256 of hex input, a file, or hex on standard input.
    Keccak {
        hex: Option<String>,
        #[arg(long, conflicts_with = "hex")]
        file: Option<PathBuf>,
    },
    /// Merkle Patricia trie operations.
    #[command(subcommand)]
    Trie(TrieCmd),
    /// Storage slot assignment for a JSON list of declarations.
    Layout {
        /// Declaration file; standard input when absent.
        input: Option<PathBuf>,
        /// First slot (decimal or 0x-hex).
        #[arg(long, default_value = "0")]
        base: String,
    },
    /// Read or write contract storage slots.
    #[command(subcommand)]
    Slot(SlotCmd),
    /// Sealed chain demo and verification.
    #[command(subcommand)]
    Chain(ChainCmd),
}

#[derive(Debug, Subcommand)]
pub enum RlpCmd {
    /// Encode a JSON item (argument or standard input) to 0x-hex.
    Encode { json: Option<String> },
    /// Decode 0x-hex (argument or standard input) to a JSON item.
    Decode {
        hex: Option<String>,
        /// Print every byte string as 0x-hex.
        #[arg(long)]
        hex_only: bool,
    },
}

#[derive(Debug, Subcommand)]
pub enum HpCmd {
    /// Encode nibbles given as hex digits, e.g. `56789`.
    Encode {
        nibbles: String,
        #[arg(long)]
        leaf: bool,
    },
    /// Decode 0x-hex into nibbles and the leaf flag.
    Decode { hex: String },
}

#[derive(Debug, Args)]
pub struct TrieOpts {
    /// Hash keys before use.
    #[arg(long)]
    pub secure: bool,
    /// Node store file.
    #[arg(long)]
    pub store: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum TrieCmd {
    /// Insert a JSON object of hex key -> hex value and print the root.
    Build {
        input: Option<PathBuf>,
        #[command(flatten)]
        opts: TrieOpts,
    },
    /// Root of a JSON object of hex key -> hex value, without persisting.
    Root {
        input: Option<PathBuf>,
        #[arg(long)]
        secure: bool,
    },
    /// Look up a key under a stored root.
    Get {
        key: String,
        #[arg(long)]
        root: String,
        #[command(flatten)]
        opts: TrieOpts,
    },
    /// Emit the proof of a key under a stored root as a JSON array.
    Prove {
        key: String,
        #[arg(long)]
        root: String,
        #[command(flatten)]
        opts: TrieOpts,
    },
    /// Check a proof file (JSON array of hex nodes) against a root.
    Verify {
        key: String,
        #[arg(long)]
        root: String,
        /// Proof file; standard input when absent.
        #[arg(long)]
        proof: Option<PathBuf>,
        #[arg(long)]
        secure: bool,
    },
}

#[derive(Debug, Subcommand)]
pub enum SlotCmd {
    /// Print the 32-byte content of a slot.
    Read {
        slot: String,
        #[arg(long)]
        root: String,
        #[arg(long)]
        store: PathBuf,
    },
    /// Write up to 32 bytes (left-padded) to a slot and print the new storage root.
    Write {
        slot: String,
        value: String,
        /// Storage root to start from; empty storage when absent.
        #[arg(long)]
        root: Option<String>,
        #[arg(long)]
        store: PathBuf,
    },
}

#[derive(Debug, Subcommand)]
pub enum ChainCmd {
    /// Seal the built-in two-block chain and print it as JSON.
    Demo {
        #[arg(long)]
        store: Option<PathBuf>,
    },
    /// Seal a chain description (genesis allocation and per-block transactions).
    Seal {
        input: PathBuf,
        #[arg(long)]
        store: Option<PathBuf>,
    },
    /// Replay a sealed chain against the node store.
    Verify {
        input: PathBuf,
        #[arg(long)]
        store: PathBuf,
    },
}

fn read_input(path: Option<&Path>) -> Result<Vec<u8>, CliError> {
    match path {
        Some(p) if p != Path::new("-") => Ok(fs::read(p)?),
        _ => {
            let mut buf = Vec::new();
            io::stdin().read_to_end(&mut buf)?;
            Ok(buf)
        }
    }
}

fn arg_or_stdin(arg: Option<String>) -> Result<String, CliError> {
    match arg {
        Some(a) => Ok(a),
        None => Ok(String::from_utf8(read_input(None)?)
            .map_err(|_| CliError::Invalid("standard input is not UTF-8".into()))?),
    }
}

fn open_store(path: Option<&Path>) -> Result<SharedStore, CliError> {
    Ok(match path {
        Some(p) => Arc::new(FileStore::open(p)?),
        None => MemoryStore::shared(),
    })
}

fn parse_root(s: &str) -> Result<H256, CliError> {
    Ok(H256(hex::decode_fixed::<32>(s)?))
}

fn read_pairs(input: Option<&Path>) -> Result<Vec<(Vec<u8>, Vec<u8>)>, CliError> {
    let v: Value = serde_json::from_slice(&read_input(input)?)?;
    let obj = v.as_object().ok_or_else(|| {
        CliError::Invalid("expected a JSON object of hex key -> hex value".into())
    })?;
    obj.iter()
        .map(|(k, v)| {
            let v = v
                .as_str()
                .ok_or_else(|| CliError::Invalid(format!("value of {k} is not a string")))?;
            Ok((hex::decode(k)?, hex::decode(v)?))
        })
        .collect()
}

/// Either trie flavour behind one interface.
enum AnyTrie {
    Plain(Trie),
    Secure(SecureTrie),
}

impl AnyTrie {
    fn new(secure: bool, store: SharedStore) -> Result<Self, CliError> {
        Ok(if secure {
            AnyTrie::Secure(SecureTrie::new(store)?)
        } else {
            AnyTrie::Plain(Trie::new(store)?)
        })
    }

    fn at(secure: bool, root: H256, store: SharedStore) -> Self {
        if secure {
            AnyTrie::Secure(SecureTrie::at(root, store))
        } else {
            AnyTrie::Plain(Trie::at(root, store))
        }
    }

    fn insert(self, k: &[u8], v: &[u8]) -> Result<Self, CliError> {
        Ok(match self {
            AnyTrie::Plain(t) => AnyTrie::Plain(t.insert(k, v)?),
            AnyTrie::Secure(t) => AnyTrie::Secure(t.insert(k, v)?),
        })
    }

    fn get(&self, k: &[u8]) -> Result<Option<Vec<u8>>, CliError> {
        Ok(match self {
            AnyTrie::Plain(t) => t.get(k)?,
            AnyTrie::Secure(t) => t.get(k)?,
        })
    }

    fn prove(&self, k: &[u8]) -> Result<Proof, CliError> {
        Ok(match self {
            AnyTrie::Plain(t) => t.prove(k)?,
            AnyTrie::Secure(t) => t.prove(k)?,
        })
    }

    fn root_hash(&self) -> H256 {
        match self {
            AnyTrie::Plain(t) => t.root_hash(),
            AnyTrie::Secure(t) => t.root_hash(),
        }
    }
}

fn build_trie(input: Option<&Path>, secure: bool, store: SharedStore) -> Result<AnyTrie, CliError> {
    let mut trie = AnyTrie::new(secure, store.clone())?;
    for (k, v) in read_pairs(input)? {
        if v.is_empty() {
            return Err(CliError::Invalid(format!(
                "empty value for key {}",
                hex::encode(&k)
            )));
        }
        trie = trie.insert(&k, &v)?;
    }
    store.flush()?;
    Ok(trie)
}

fn pretty(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("serializable")
}

fn run_rlp(cmd: RlpCmd) -> Result<String, CliError> {
    match cmd {
        RlpCmd::Encode { json } => {
            let v: Value = serde_json::from_str(&arg_or_stdin(json)?)?;
            Ok(hex::encode(ethds::rlp::encode(&json::item_from_json(&v)?)?))
        }
        RlpCmd::Decode { hex: h, hex_only } => {
            let bytes = hex::decode(arg_or_stdin(h)?.trim())?;
            let item = ethds::rlp::decode(&bytes)?;
            Ok(serde_json::to_string(&json::item_to_json(&item, hex_only))?)
        }
    }
}

fn run_hp(cmd: HpCmd) -> Result<String, CliError> {
    match cmd {
        HpCmd::Encode { nibbles, leaf } => {
            let path = Nibbles::from_hex_digits(&nibbles)
                .ok_or_else(|| CliError::Invalid(format!("not hex digits: {nibbles:?}")))?;
            Ok(hex::encode(hp_encode(&path, leaf)?))
        }
        HpCmd::Decode { hex: h } => {
            let (path, leaf) = hp_decode(&hex::decode(&h)?)?;
            Ok(json!({ "nibbles": path.to_hex_digits(), "leaf": leaf }).to_string())
        }
    }
}

fn run_trie(cmd: TrieCmd) -> Result<String, CliError> {
    match cmd {
        TrieCmd::Build { input, opts } => {
            let store = open_store(opts.store.as_deref())?;
            Ok(build_trie(input.as_deref(), opts.secure, store)?
                .root_hash()
                .to_string())
        }
        TrieCmd::Root { input, secure } => {
            Ok(build_trie(input.as_deref(), secure, MemoryStore::shared())?
                .root_hash()
                .to_string())
        }
        TrieCmd::Get { key, root, opts } => {
            let store = open_store(opts.store.as_deref())?;
            let trie = AnyTrie::at(opts.secure, parse_root(&root)?, store);
            match trie.get(&hex::decode(&key)?)? {
                Some(v) => Ok(hex::encode(v)),
                None => Err(CliError::NotFound),
            }
        }
        TrieCmd::Prove { key, root, opts } => {
            let store = open_store(opts.store.as_deref())?;
            let trie = AnyTrie::at(opts.secure, parse_root(&root)?, store);
            let proof = trie.prove(&hex::decode(&key)?)?;
            let nodes: Vec<String> = proof.nodes.iter().map(hex::encode).collect();
            Ok(pretty(&json!(nodes)))
        }
        TrieCmd::Verify {
            key,
            root,
            proof,
            secure,
        } => {
            let nodes: Vec<String> = serde_json::from_slice(&read_input(proof.as_deref())?)?;
            let proof = Proof {
                nodes: nodes
                    .iter()
                    .map(|n| hex::decode(n))
                    .collect::<Result<_, _>>()?,
            };
            let root = parse_root(&root)?;
            let key = hex::decode(&key)?;
            let outcome = if secure {
                ethds::secure::verify_secure_proof(&root, &key, &proof)
            } else {
                ethds::verify_proof(&root, &key, &proof)
            };
            match outcome {
                ProofOutcome::Present(v) => {
                    Ok(json!({ "status": "present", "value": hex::encode(v) }).to_string())
                }
                ProofOutcome::Absent => Ok(json!({ "status": "absent" }).to_string()),
                ProofOutcome::Invalid(e) => Err(CliError::Verify(format!("invalid proof: {e}"))),
            }
        }
    }
}

fn run_layout(input: Option<&Path>, base: &str) -> Result<String, CliError> {
    let decls: Vec<DeclJson> = serde_json::from_slice(&read_input(input)?)?;
    let decls = decls
        .iter()
        .map(DeclJson::to_decl)
        .collect::<Result<Vec<_>, _>>()?;
    let base: SlotIndex = base.parse()?;
    let l = layout::layout_static(&decls, base)?;
    let slots: Vec<Value> = l
        .assignments
        .iter()
        .map(|a| json!({ "name": a.name, "slot": a.slot.to_string(), "offset": a.offset, "length": a.len }))
        .collect();
    Ok(pretty(
        &json!({ "slots": slots, "nextSlot": l.next_slot.to_string() }),
    ))
}

fn run_slot(cmd: SlotCmd) -> Result<String, CliError> {
    match cmd {
        SlotCmd::Read { slot, root, store } => {
            let storage = SecureTrie::at(parse_root(&root)?, open_store(Some(&store))?);
            Ok(hex::encode(layout::slot_read(&storage, slot.parse()?)?))
        }
        SlotCmd::Write {
            slot,
            value,
            root,
            store,
        } => {
            let store = open_store(Some(&store))?;
            let storage = match root {
                Some(r) => SecureTrie::at(parse_root(&r)?, store.clone()),
                None => SecureTrie::new(store.clone())?,
            };
            let bytes = hex::decode(&value)?;
            if bytes.len() > 32 {
                return Err(CliError::Invalid(format!(
                    "slot value of {} bytes",
                    bytes.len()
                )));
            }
            let next = layout::slot_write(&storage, slot.parse()?, &layout::pad32(&bytes))?;
            store.flush()?;
            Ok(next.root_hash().to_string())
        }
    }
}

fn genesis_state(
    alloc: &[(ethds::chain::Address, u64, u128)],
    store: SharedStore,
) -> Result<WorldState, CliError> {
    let mut state = WorldState::new(store)?;
    for (addr, nonce, balance) in alloc {
        let account = Account {
            nonce: *nonce,
            ..Account::external(*balance)
        };
        state = state.put(addr, &account)?;
    }
    Ok(state)
}

/// Seals a description into a chain whose states live in `store`.
pub fn seal_description(desc: &DescriptionJson, store: SharedStore) -> Result<ChainJson, CliError> {
    let config = ChainConfig::default();
    let mut state = genesis_state(&json::parse_alloc(&desc.genesis)?, store.clone())?;
    let mut blocks: Vec<Block> = vec![genesis_block(&state)];
    for spec in &desc.blocks {
        let txs = spec
            .transactions
            .iter()
            .map(json::TxJson::to_tx)
            .collect::<Result<Vec<_>, _>>()?;
        let parent = &blocks.last().expect("genesis").header;
        let beneficiary = json::parse_beneficiary(&spec.beneficiary)?;
        let (block, next, _) = seal_block(parent, txs, vec![], &state, beneficiary, &config)?;
        blocks.push(block);
        state = next;
    }
    store.flush()?;
    Ok(ChainJson {
        genesis: desc.genesis.clone(),
        blocks: blocks.iter().map(BlockJson::from_block).collect(),
    })
}

/// The two-block scenario: an account's balance becomes 100, then 20.
pub fn demo_description() -> DescriptionJson {
    serde_json::from_value(json!({
        "genesis": {
            "0xa1a1a1a1a1a1a1a1a1a1a1a1a1a1a1a1a1a1a1a1": { "balance": "0xb4" }
        },
        "blocks": [
            {
                "beneficiary": "0xc3c3c3c3c3c3c3c3c3c3c3c3c3c3c3c3c3c3c3c3",
                "transactions": [{
                    "sender": "0xa1a1a1a1a1a1a1a1a1a1a1a1a1a1a1a1a1a1a1a1",
                    "nonce": "0x0",
                    "to": "0xb2b2b2b2b2b2b2b2b2b2b2b2b2b2b2b2b2b2b2b2",
                    "value": "0x64"
                }]
            },
            {
                "beneficiary": "0xc3c3c3c3c3c3c3c3c3c3c3c3c3c3c3c3c3c3c3c3",
                "transactions": [
                    {
                        "sender": "0xb2b2b2b2b2b2b2b2b2b2b2b2b2b2b2b2b2b2b2b2",
                        "nonce": "0x0",
                        "to": "0xc3c3c3c3c3c3c3c3c3c3c3c3c3c3c3c3c3c3c3c3",
                        "value": "0x32"
                    },
                    {
                        "sender": "0xb2b2b2b2b2b2b2b2b2b2b2b2b2b2b2b2b2b2b2b2",
                        "nonce": "0x1",
                        "to": "0xa1a1a1a1a1a1a1a1a1a1a1a1a1a1a1a1a1a1a1a1",
                        "value": "0x1e"
                    }
                ]
            }
        ]
    }))
    .expect("demo description is well formed")
}

/// Verifies a sealed chain against the states held in `store`.
pub fn verify_sealed(chain: &ChainJson, store: SharedStore) -> Result<(), CliError> {
    let genesis = genesis_state(&json::parse_alloc(&chain.genesis)?, store)?;
    let blocks = chain
        .blocks
        .iter()
        .map(BlockJson::to_block)
        .collect::<Result<Vec<_>, _>>()?;
    verify_chain(&blocks, &genesis, &ChainConfig::default())
        .map_err(|e| CliError::Verify(e.to_string()))
}

fn run_chain(cmd: ChainCmd) -> Result<String, CliError> {
    match cmd {
        ChainCmd::Demo { store } => {
            let chain = seal_description(&demo_description(), open_store(store.as_deref())?)?;
            Ok(serde_json::to_string_pretty(&chain)?)
        }
        ChainCmd::Seal { input, store } => {
            let desc: DescriptionJson = serde_json::from_slice(&fs::read(input)?)?;
            let chain = seal_description(&desc, open_store(store.as_deref())?)?;
            Ok(serde_json::to_string_pretty(&chain)?)
        }
        ChainCmd::Verify { input, store } => {
            let chain: ChainJson = serde_json::from_slice(&fs::read(input)?)?;
            verify_sealed(&chain, open_store(Some(&store))?)?;
            Ok(format!("ok: {} blocks verified", chain.blocks.len()))
        }
    }
}

/// Executes a parsed command and returns what it prints.
pub fn execute(command: Command) -> Result<String, CliError> {
    match command {
        Command::Rlp(c) => run_rlp(c),
        Command::Hp(c) => run_hp(c),
        Command::Keccak { hex: h, file } => {
            let data = match file {
                Some(path) => fs::read(path)?,
                None => hex::decode(arg_or_stdin(h)?.trim())?,
            };
            Ok(keccak256(data).to_string())
        }
        Command::Trie(c) => run_trie(c),
        Command::Layout { input, base } => run_layout(input.as_deref(), &base),
        Command::Slot(c) => run_slot(c),
        Command::Chain(c) => run_chain(c),
    }
}

/// Runs the CLI; returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    let result = execute(cli.command).and_then(|mut text| {
        text.push('\n');
        match &cli.out {
            Some(path) => fs::write(path, text)?,
            None => io::stdout().write_all(text.as_bytes())?,
        }
        Ok(())
    });
    match result {
        Ok(()) => 0,
        Err(e) => {
            let line = e.to_string().replace('\n', " ");
            eprintln!("error: {line}");
            1
        }
    }
}
