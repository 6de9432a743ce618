//! Central-bank ledger state machine.
//!
//! The append-only log is the source of truth; the live UTXO set is a
//! derived index. Applying a transaction verifies it, atomically swaps
//! inputs for outputs, builds a Merkle tree over the new outputs and signs
//! its root with the central bank confirmation key.

use sha2::{Digest, Sha256};
use std::collections::HashMap;
use thiserror::Error;

use crate::encoding::{CodecError, Reader, Writer};
use crate::group::{GroupElement, GroupParams};
use crate::pedersen::{Commitment, Opening};
use crate::schnorr::{self, SchnorrKeyPair, Signature};
use crate::txbuild::{
    self, ConcealedTx, Digest32, OpeningPacket, OutputRecord, UtxoView, VerifyReport,
};
use rand::{CryptoRng, Rng};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LedgerError {
    #[error("input UTXO not found (unknown or already spent)")]
    UnknownInput,
    #[error("transaction verification failed: {0:?}")]
    VerifyFailed(VerifyReport),
    #[error("duplicate transaction id")]
    DuplicateTxId,
    #[error("empty leaf set")]
    EmptyLeaves,
    #[error("leaf index out of range")]
    IndexOutOfRange,
    #[error("corrupt snapshot: {0}")]
    CorruptSnapshot(CodecError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UtxoRecord {
    pub utxo_id: Digest32,
    pub commitment: Commitment,
    pub owner_pubkey: GroupElement,
    pub created_tx_id: Digest32,
    pub index: u32,
}

/// Central-bank signature over the Merkle root of a confirmed transaction's
/// outputs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfirmationRecord {
    pub tx_id: Digest32,
    pub merkle_root: Digest32,
    pub root_signature: Signature,
}

/// Sibling digests bottom-up; the flag is true when the sibling sits on
/// the right. Levels where the node is promoted unpaired contribute no
/// path entry.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MerklePath {
    pub leaf_index: u32,
    pub siblings: Vec<(Digest32, bool)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LogEntry {
    /// Minting event: outputs created from nothing, openings retained by
    /// the central bank.
    Genesis {
        outputs: Vec<OutputRecord>,
        confirmation: ConfirmationRecord,
    },
    Tx {
        tx: ConcealedTx,
        confirmation: ConfirmationRecord,
    },
}

#[derive(Debug, Clone)]
pub struct LedgerState {
    pub live_utxos: HashMap<Digest32, UtxoRecord>,
    pub log: Vec<LogEntry>,
    pub cb_keypair: SchnorrKeyPair,
    /// Openings of the genesis outputs; the only openings the central bank
    /// ever holds.
    pub genesis_openings: Vec<Opening>,
    /// Range-proof bit width enforced on every applied transaction.
    pub n_bits: u32,
    /// Total minted supply in minor units.
    pub total_supply: u64,
}

impl UtxoView for LedgerState {
    fn lookup(&self, utxo_id: &Digest32) -> Option<(Commitment, GroupElement)> {
        self.live_utxos
            .get(utxo_id)
            .map(|rec| (rec.commitment.clone(), rec.owner_pubkey.clone()))
    }
}

fn node_hash(left: &Digest32, right: &Digest32) -> Digest32 {
    let mut hasher = Sha256::new();
    hasher.update(left);
    hasher.update(right);
    hasher.finalize().into()
}

/// Root of a binary tree with unpaired nodes promoted unchanged.
pub fn merkle_root(leaves: &[Digest32]) -> Result<Digest32, LedgerError> {
    if leaves.is_empty() {
        return Err(LedgerError::EmptyLeaves);
    }
    let mut level: Vec<Digest32> = leaves.to_vec();
    while level.len() > 1 {
        let mut next = Vec::with_capacity(level.len().div_ceil(2));
        for pair in level.chunks(2) {
            if pair.len() == 2 {
                next.push(node_hash(&pair[0], &pair[1]));
            } else {
                next.push(pair[0]);
            }
        }
        level = next;
    }
    Ok(level[0])
}

pub fn inclusion_proof(leaves: &[Digest32], index: usize) -> Result<MerklePath, LedgerError> {
    if leaves.is_empty() {
        return Err(LedgerError::EmptyLeaves);
    }
    if index >= leaves.len() {
        return Err(LedgerError::IndexOutOfRange);
    }
    let mut siblings = Vec::new();
    let mut level: Vec<Digest32> = leaves.to_vec();
    let mut pos = index;
    while level.len() > 1 {
        let sibling_pos = if pos % 2 == 0 { pos + 1 } else { pos - 1 };
        if sibling_pos < level.len() {
            siblings.push((level[sibling_pos], sibling_pos > pos));
        }
        let mut next = Vec::with_capacity(level.len().div_ceil(2));
        for pair in level.chunks(2) {
            if pair.len() == 2 {
                next.push(node_hash(&pair[0], &pair[1]));
            } else {
                next.push(pair[0]);
            }
        }
        level = next;
        pos /= 2;
    }
    Ok(MerklePath {
        leaf_index: index as u32,
        siblings,
    })
}

pub fn verify_inclusion(root: &Digest32, leaf: &Digest32, path: &MerklePath) -> bool {
    let mut acc = *leaf;
    for (sibling, is_right) in &path.siblings {
        acc = if *is_right {
            node_hash(&acc, sibling)
        } else {
            node_hash(sibling, &acc)
        };
    }
    acc == *root
}

/// Message signed by the central bank when confirming a transaction.
fn confirmation_message(tx_id: &Digest32, root: &Digest32) -> Vec<u8> {
    let mut m = Vec::with_capacity(64 + 12);
    m.extend_from_slice(b"cbdc-confirm");
    m.extend_from_slice(tx_id);
    m.extend_from_slice(root);
    m
}

fn output_leaves(params: &GroupParams, outputs: &[OutputRecord]) -> Vec<Digest32> {
    outputs
        .iter()
        .map(|o| Sha256::digest(txbuild::output_record_bytes(params, o)).into())
        .collect()
}

fn confirm_outputs<R: Rng + CryptoRng>(
    params: &GroupParams,
    cb_keypair: &SchnorrKeyPair,
    tx_id: Digest32,
    outputs: &[OutputRecord],
    rng: &mut R,
) -> ConfirmationRecord {
    let leaves = output_leaves(params, outputs);
    let root = merkle_root(&leaves).expect("nonempty outputs");
    let sig = schnorr::sign(
        params,
        cb_keypair,
        schnorr::DOMAIN_CONFIRM,
        &confirmation_message(&tx_id, &root),
        rng,
    );
    ConfirmationRecord {
        tx_id,
        merkle_root: root,
        root_signature: sig,
    }
}

/// Create a fresh ledger by minting `payouts` as genesis outputs.
///
/// The central bank keeps the genesis openings; the returned packet hands
/// copies to the recipients' banks.
pub fn mint_genesis<R: Rng + CryptoRng>(
    params: &GroupParams,
    payouts: &[(u64, GroupElement)],
    n_bits: u32,
    rng: &mut R,
) -> (LedgerState, OpeningPacket) {
    let cb_keypair = schnorr::keygen(params, &params.g.clone(), rng);
    let openings: Vec<Opening> = payouts
        .iter()
        .map(|(value, _)| Opening::random(params, *value, rng))
        .collect();
    let outputs: Vec<OutputRecord> = openings
        .iter()
        .zip(payouts.iter())
        .map(|(opening, (_, owner))| OutputRecord {
            commitment: crate::pedersen::commit(params, opening),
            owner_pubkey: owner.clone(),
        })
        .collect();

    // genesis tx id: hash of the canonical output bytes
    let mut hasher = Sha256::new();
    hasher.update(b"cbdc-genesis-v1");
    hasher.update(params.digest());
    for output in &outputs {
        hasher.update(txbuild::output_record_bytes(params, output));
    }
    let genesis_id: Digest32 = hasher.finalize().into();

    let mut live_utxos = HashMap::new();
    for (index, output) in outputs.iter().enumerate() {
        let utxo_id = txbuild::utxo_id(&genesis_id, index as u32);
        live_utxos.insert(
            utxo_id,
            UtxoRecord {
                utxo_id,
                commitment: output.commitment.clone(),
                owner_pubkey: output.owner_pubkey.clone(),
                created_tx_id: genesis_id,
                index: index as u32,
            },
        );
    }

    let log = if outputs.is_empty() {
        Vec::new()
    } else {
        vec![LogEntry::Genesis {
            outputs: outputs.clone(),
            confirmation: confirm_outputs(params, &cb_keypair, genesis_id, &outputs, rng),
        }]
    };

    let total_supply = payouts.iter().map(|(v, _)| *v).sum();
    let state = LedgerState {
        live_utxos,
        log,
        cb_keypair,
        genesis_openings: openings.clone(),
        n_bits,
        total_supply,
    };
    let packet = OpeningPacket {
        inputs: Vec::new(),
        outputs: openings.into_iter().enumerate().collect(),
    };
    (state, packet)
}

impl LedgerState {
    pub fn genesis_tx_id(&self) -> Option<Digest32> {
        match self.log.first() {
            Some(LogEntry::Genesis { confirmation, .. }) => Some(confirmation.tx_id),
            _ => None,
        }
    }

    /// Verify and apply a concealed transaction. On any failure the state
    /// is left untouched.
    pub fn apply_tx<R: Rng + CryptoRng>(
        &mut self,
        params: &GroupParams,
        tx: &ConcealedTx,
        rng: &mut R,
    ) -> Result<ConfirmationRecord, LedgerError> {
        let id = txbuild::tx_id(params, tx);
        if self.log.iter().any(|entry| match entry {
            LogEntry::Genesis { confirmation, .. } | LogEntry::Tx { confirmation, .. } => {
                confirmation.tx_id == id
            }
        }) {
            return Err(LedgerError::DuplicateTxId);
        }
        // a second spend of the same UTXO fails here: the first spend
        // erased it from the live set
        for input in &tx.inputs {
            if !self.live_utxos.contains_key(&input.utxo_id) {
                return Err(LedgerError::UnknownInput);
            }
        }
        let report = txbuild::central_verify(self, params, tx, self.n_bits);
        if !report.accepted() {
            return Err(LedgerError::VerifyFailed(report));
        }

        for input in &tx.inputs {
            self.live_utxos.remove(&input.utxo_id);
        }
        for (index, output) in tx.outputs.iter().enumerate() {
            let utxo_id = txbuild::utxo_id(&id, index as u32);
            self.live_utxos.insert(
                utxo_id,
                UtxoRecord {
                    utxo_id,
                    commitment: output.commitment.clone(),
                    owner_pubkey: output.owner_pubkey.clone(),
                    created_tx_id: id,
                    index: index as u32,
                },
            );
        }
        let confirmation = confirm_outputs(params, &self.cb_keypair, id, &tx.outputs, rng);
        self.log.push(LogEntry::Tx {
            tx: tx.clone(),
            confirmation: confirmation.clone(),
        });
        Ok(confirmation)
    }

    /// Inclusion path for output `index` of the given confirmed tx.
    pub fn confirmation_path(
        &self,
        params: &GroupParams,
        tx_id: &Digest32,
        index: usize,
    ) -> Result<MerklePath, LedgerError> {
        for entry in &self.log {
            let (outputs, confirmation) = match entry {
                LogEntry::Genesis {
                    outputs,
                    confirmation,
                } => (outputs, confirmation),
                LogEntry::Tx { tx, confirmation } => (&tx.outputs, confirmation),
            };
            if &confirmation.tx_id == tx_id {
                let leaves = output_leaves(params, outputs);
                return inclusion_proof(&leaves, index);
            }
        }
        Err(LedgerError::UnknownInput)
    }

    /// Rebuild the live set from genesis plus the log; used by restore and
    /// the replay-equivalence checks.
    pub fn replay_live_set(&self, params: &GroupParams) -> HashMap<Digest32, UtxoRecord> {
        let mut live = HashMap::new();
        for entry in &self.log {
            match entry {
                LogEntry::Genesis {
                    outputs,
                    confirmation,
                } => {
                    for (index, output) in outputs.iter().enumerate() {
                        let utxo_id = txbuild::utxo_id(&confirmation.tx_id, index as u32);
                        live.insert(
                            utxo_id,
                            UtxoRecord {
                                utxo_id,
                                commitment: output.commitment.clone(),
                                owner_pubkey: output.owner_pubkey.clone(),
                                created_tx_id: confirmation.tx_id,
                                index: index as u32,
                            },
                        );
                    }
                }
                LogEntry::Tx { tx, confirmation } => {
                    debug_assert_eq!(txbuild::tx_id(params, tx), confirmation.tx_id);
                    for input in &tx.inputs {
                        live.remove(&input.utxo_id);
                    }
                    for (index, output) in tx.outputs.iter().enumerate() {
                        let utxo_id = txbuild::utxo_id(&confirmation.tx_id, index as u32);
                        live.insert(
                            utxo_id,
                            UtxoRecord {
                                utxo_id,
                                commitment: output.commitment.clone(),
                                owner_pubkey: output.owner_pubkey.clone(),
                                created_tx_id: confirmation.tx_id,
                                index: index as u32,
                            },
                        );
                    }
                }
            }
        }
        live
    }

    /// Serialize the log, keys and metadata. The live set is derived on
    /// restore.
    pub fn snapshot(&self, params: &GroupParams) -> Vec<u8> {
        let mut w = Writer::new();
        w.put_raw(b"CBLG");
        w.put_u8(1);
        w.put_digest(&params.digest());
        w.put_u32(self.n_bits);
        w.put_u64(self.total_supply);
        w.put_scalar(params, &self.cb_keypair.private);
        w.put_u32(self.genesis_openings.len() as u32);
        for opening in &self.genesis_openings {
            w.put_scalar(params, &opening.value);
            w.put_scalar(params, &opening.randomness);
        }
        w.put_u32(self.log.len() as u32);
        for entry in &self.log {
            match entry {
                LogEntry::Genesis {
                    outputs,
                    confirmation,
                } => {
                    w.put_u8(0);
                    let mut inner = Writer::new();
                    inner.put_u32(outputs.len() as u32);
                    for output in outputs {
                        inner.put_raw(&txbuild::output_record_bytes(params, output));
                    }
                    w.put_var_bytes(inner.as_bytes());
                    encode_confirmation(params, &mut w, confirmation);
                }
                LogEntry::Tx { tx, confirmation } => {
                    w.put_u8(1);
                    w.put_var_bytes(&txbuild::encode_tx(params, tx));
                    encode_confirmation(params, &mut w, confirmation);
                }
            }
        }
        let digest: Digest32 = Sha256::digest(w.as_bytes()).into();
        w.put_digest(&digest);
        w.into_bytes()
    }

    pub fn restore(params: &GroupParams, bytes: &[u8]) -> Result<LedgerState, LedgerError> {
        let parse = |bytes: &[u8]| -> Result<LedgerState, CodecError> {
            if bytes.len() < 32 {
                return Err(CodecError::Truncated(bytes.len()));
            }
            let (body, digest) = bytes.split_at(bytes.len() - 32);
            let expected: Digest32 = Sha256::digest(body).into();
            if digest != expected {
                return Err(CodecError::DigestMismatch);
            }
            let mut r = Reader::new(body);
            if r.get_raw(4)? != b"CBLG" {
                return Err(CodecError::Malformed("bad magic"));
            }
            let version = r.get_u8()?;
            if version != 1 {
                return Err(CodecError::VersionMismatch(version));
            }
            if r.get_digest()? != params.digest() {
                return Err(CodecError::Malformed("params digest mismatch"));
            }
            let n_bits = r.get_u32()?;
            let total_supply = r.get_u64()?;
            let cb_private = r.get_scalar(params)?;
            let n_gen = r.get_u32()? as usize;
            let mut genesis_openings = Vec::with_capacity(n_gen);
            for _ in 0..n_gen {
                genesis_openings.push(Opening {
                    value: r.get_scalar(params)?,
                    randomness: r.get_scalar(params)?,
                });
            }
            let n_log = r.get_u32()? as usize;
            let mut log = Vec::with_capacity(n_log);
            for _ in 0..n_log {
                let kind = r.get_u8()?;
                match kind {
                    0 => {
                        let inner_bytes = r.get_var_bytes()?;
                        let mut inner = Reader::new(inner_bytes);
                        let n_out = inner.get_u32()? as usize;
                        let mut outputs = Vec::with_capacity(n_out);
                        for _ in 0..n_out {
                            outputs.push(OutputRecord {
                                commitment: Commitment {
                                    point: inner.get_element(params)?,
                                },
                                owner_pubkey: inner.get_element(params)?,
                            });
                        }
                        inner.finish()?;
                        let confirmation = decode_confirmation(params, &mut r)?;
                        log.push(LogEntry::Genesis {
                            outputs,
                            confirmation,
                        });
                    }
                    1 => {
                        let tx_bytes = r.get_var_bytes()?;
                        let mut inner = Reader::new(tx_bytes);
                        let tx = txbuild::decode_tx(params, &mut inner)?;
                        inner.finish()?;
                        let confirmation = decode_confirmation(params, &mut r)?;
                        log.push(LogEntry::Tx { tx, confirmation });
                    }
                    _ => return Err(CodecError::Malformed("bad log entry kind")),
                }
            }
            r.finish()?;
            let cb_keypair = schnorr::keypair_from_private(params, &params.g.clone(), cb_private);
            let mut state = LedgerState {
                live_utxos: HashMap::new(),
                log,
                cb_keypair,
                genesis_openings,
                n_bits,
                total_supply,
            };
            state.live_utxos = state.replay_live_set(params);
            Ok(state)
        };
        parse(bytes).map_err(LedgerError::CorruptSnapshot)
    }
}

fn encode_confirmation(params: &GroupParams, w: &mut Writer, c: &ConfirmationRecord) {
    w.put_digest(&c.tx_id);
    w.put_digest(&c.merkle_root);
    w.put_scalar(params, &c.root_signature.s);
    w.put_scalar(params, &c.root_signature.e);
}

fn decode_confirmation(
    params: &GroupParams,
    r: &mut Reader<'_>,
) -> Result<ConfirmationRecord, CodecError> {
    Ok(ConfirmationRecord {
        tx_id: r.get_digest()?,
        merkle_root: r.get_digest()?,
        root_signature: Signature {
            s: r.get_scalar(params)?,
            e: r.get_scalar(params)?,
        },
    })
}

/// Payee-side confirmation check: the opening matches the output
/// commitment, the output is included under the signed Merkle root, and
/// the root signature verifies under the central bank key.
pub fn verify_confirmation(
    params: &GroupParams,
    cb_pubkey: &GroupElement,
    output: &OutputRecord,
    opening: &Opening,
    path: &MerklePath,
    confirmation: &ConfirmationRecord,
) -> bool {
    if !crate::pedersen::open_check(params, &output.commitment, opening) {
        return false;
    }
    let leaf: Digest32 = Sha256::digest(txbuild::output_record_bytes(params, output)).into();
    if !verify_inclusion(&confirmation.merkle_root, &leaf, path) {
        return false;
    }
    schnorr::verify(
        params,
        &params.g,
        cb_pubkey,
        schnorr::DOMAIN_CONFIRM,
        &confirmation_message(&confirmation.tx_id, &confirmation.merkle_root),
        &confirmation.root_signature,
    )
}
