//! Construction, payer review and central-bank verification of concealed
//! UTXO transactions.
//!
//! A concealed transaction carries commitment inputs `C`, commitment
//! outputs `C'`, one range proof per output, a balance signature keyed on
//! the randomness difference `alpha`, and one payer signature per distinct
//! input owner. The central bank accepts when the payer signatures verify,
//! every range proof verifies, and the commitment quotient
//! `z = prod C / prod C'` verifies the balance signature as a public key
//! over base `h`.

use num_bigint::BigUint;
use num_traits::Zero;
use rand::{CryptoRng, Rng};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::encoding::Writer;
use crate::group::{GroupElement, GroupParams, Scalar};
use crate::pedersen::{self, Commitment, Opening};
use crate::rangeproof::{self, RangeProof, RangeProofError};
use crate::schnorr::{self, SchnorrKeyPair, Signature};

pub type Digest32 = [u8; 32];

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TxBuildError {
    #[error("sum of inputs does not equal sum of payouts")]
    UnbalancedAmounts,
    #[error(transparent)]
    RangeProof(#[from] RangeProofError),
    #[error("no inputs or no outputs")]
    Empty,
}

/// A transaction output as recorded on the ledger: concealed value plus
/// the payee's evolving public key.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutputRecord {
    pub commitment: Commitment,
    pub owner_pubkey: GroupElement,
}

/// Reference to a live UTXO being spent, with its commitment restated so
/// the signed message covers it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InputRef {
    pub utxo_id: Digest32,
    pub owner_pubkey: GroupElement,
    pub commitment: Commitment,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConcealedTx {
    pub inputs: Vec<InputRef>,
    pub outputs: Vec<OutputRecord>,
    pub range_proofs: Vec<RangeProof>,
    pub balance_sig: Signature,
    pub payer_sigs: Vec<(GroupElement, Signature)>,
}

/// Openings for the positions a party is entitled to see; never sent to
/// the central bank for non-genesis transactions.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct OpeningPacket {
    pub inputs: Vec<(usize, Opening)>,
    pub outputs: Vec<(usize, Opening)>,
}

/// Outcome of central-bank verification; the transaction is accepted iff
/// all three flags are true.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerifyReport {
    pub payer_sig_ok: bool,
    pub range_ok: bool,
    pub balance_ok: bool,
    pub z: GroupElement,
}

impl VerifyReport {
    pub fn accepted(&self) -> bool {
        self.payer_sig_ok && self.range_ok && self.balance_ok
    }
}

/// Read view of the live UTXO set used during verification.
pub trait UtxoView {
    fn lookup(&self, utxo_id: &Digest32) -> Option<(Commitment, GroupElement)>;
}

/// Canonical signed message over inputs and outputs.
///
/// The paper signs `C || C'`; input refs and owner keys are included as
/// well so ownership cannot be swapped after signing. Range proofs are
/// excluded: they are independently verified.
pub fn canonical_message(
    params: &GroupParams,
    inputs: &[InputRef],
    outputs: &[OutputRecord],
) -> Vec<u8> {
    let mut w = Writer::new();
    w.put_raw(b"cbdc-tx-v1");
    w.put_digest(&params.digest());
    w.put_u32(inputs.len() as u32);
    for input in inputs {
        w.put_digest(&input.utxo_id);
        w.put_element(params, &input.owner_pubkey);
        w.put_element(params, &input.commitment.point);
    }
    w.put_u32(outputs.len() as u32);
    for output in outputs {
        w.put_element(params, &output.commitment.point);
        w.put_element(params, &output.owner_pubkey);
    }
    let digest: Digest32 = Sha256::digest(w.as_bytes()).into();
    digest.to_vec()
}

/// Transaction id: hash of everything except the signatures.
pub fn tx_id(params: &GroupParams, tx: &ConcealedTx) -> Digest32 {
    let mut hasher = Sha256::new();
    hasher.update(b"cbdc-txid-v1");
    hasher.update(canonical_message(params, &tx.inputs, &tx.outputs));
    for proof in &tx.range_proofs {
        for d in &proof.bit_commitments {
            hasher.update(params.element_bytes(&d.point));
        }
        for or in &proof.or_proofs {
            hasher.update(params.element_bytes(&or.t0));
            hasher.update(params.element_bytes(&or.t1));
            hasher.update(params.scalar_bytes(&or.e0));
            hasher.update(params.scalar_bytes(&or.e1));
            hasher.update(params.scalar_bytes(&or.z0));
            hasher.update(params.scalar_bytes(&or.z1));
        }
    }
    hasher.finalize().into()
}

/// Deterministic UTXO id of output `index` of transaction `created_tx_id`.
pub fn utxo_id(created_tx_id: &Digest32, index: u32) -> Digest32 {
    let mut hasher = Sha256::new();
    hasher.update(b"cbdc-utxo-v1");
    hasher.update(created_tx_id);
    hasher.update(index.to_be_bytes());
    hasher.finalize().into()
}

/// Build a concealed transaction (without payer signatures) from input
/// openings and intended payouts.
///
/// Output randomness is fresh; if the balance key comes out zero the last
/// output randomness is resampled and the commitments rebuilt.
pub fn build_concealed_tx<R: Rng + CryptoRng>(
    params: &GroupParams,
    spend_openings: &[(InputRef, Opening)],
    payouts: &[(u64, GroupElement)],
    n_bits: u32,
    rng: &mut R,
) -> Result<(ConcealedTx, OpeningPacket), TxBuildError> {
    if spend_openings.is_empty() || payouts.is_empty() {
        return Err(TxBuildError::Empty);
    }
    let bound = BigUint::from(1u32) << n_bits;
    let mut sum_in = BigUint::zero();
    for (_, opening) in spend_openings {
        sum_in += &opening.value.0;
    }
    let mut sum_out = BigUint::zero();
    for (value, _) in payouts {
        if BigUint::from(*value) >= bound {
            return Err(TxBuildError::RangeProof(RangeProofError::ValueOutOfRange(
                n_bits,
            )));
        }
        sum_out += BigUint::from(*value);
    }
    if sum_in != sum_out {
        return Err(TxBuildError::UnbalancedAmounts);
    }

    let input_randomness: Vec<Scalar> = spend_openings
        .iter()
        .map(|(_, o)| o.randomness.clone())
        .collect();

    // fresh output randomness; resample on a zero balance key
    let (output_openings, balance_keypair) = loop {
        let openings: Vec<Opening> = payouts
            .iter()
            .map(|(value, _)| Opening {
                value: params.scalar_from_biguint(BigUint::from(*value)),
                randomness: params.random_scalar(rng),
            })
            .collect();
        let output_randomness: Vec<Scalar> =
            openings.iter().map(|o| o.randomness.clone()).collect();
        match schnorr::balance_key(params, &input_randomness, &output_randomness) {
            Ok(kp) => break (openings, kp),
            Err(schnorr::SchnorrError::ZeroAlpha) => continue,
        }
    };

    let outputs: Vec<OutputRecord> = output_openings
        .iter()
        .zip(payouts.iter())
        .map(|(opening, (_, owner))| OutputRecord {
            commitment: pedersen::commit(params, opening),
            owner_pubkey: owner.clone(),
        })
        .collect();
    let inputs: Vec<InputRef> = spend_openings.iter().map(|(i, _)| i.clone()).collect();

    let mut range_proofs = Vec::with_capacity(outputs.len());
    for opening in &output_openings {
        range_proofs.push(rangeproof::prove_range(params, opening, n_bits, rng)?);
    }

    let message = canonical_message(params, &inputs, &outputs);
    let balance_sig = schnorr::sign(
        params,
        &balance_keypair,
        schnorr::DOMAIN_BALANCE,
        &message,
        rng,
    );

    let packet = OpeningPacket {
        inputs: spend_openings
            .iter()
            .enumerate()
            .map(|(i, (_, o))| (i, o.clone()))
            .collect(),
        outputs: output_openings.into_iter().enumerate().collect(),
    };

    Ok((
        ConcealedTx {
            inputs,
            outputs,
            range_proofs,
            balance_sig,
            payer_sigs: Vec::new(),
        },
        packet,
    ))
}

/// Payer-side review: every opening in the packet must check against the
/// corresponding commitment, all inputs under the payer's key must be
/// covered by the packet, and the opened outputs must exactly match the
/// payer's intent as a multiset of (value, owner) pairs.
pub fn payer_review(
    params: &GroupParams,
    tx: &ConcealedTx,
    packet: &OpeningPacket,
    payer_pubkey: &GroupElement,
    intent: &[(u64, GroupElement)],
) -> bool {
    // all owned inputs accounted for and opening-checked
    for (idx, input) in tx.inputs.iter().enumerate() {
        if &input.owner_pubkey != payer_pubkey {
            continue;
        }
        match packet.inputs.iter().find(|(i, _)| *i == idx) {
            Some((_, opening)) => {
                if !pedersen::open_check(params, &input.commitment, opening) {
                    return false;
                }
            }
            None => return false,
        }
    }

    // opened outputs must equal the intent multiset
    let mut opened: Vec<(BigUint, GroupElement)> = Vec::new();
    for (idx, opening) in &packet.outputs {
        let output = match tx.outputs.get(*idx) {
            Some(o) => o,
            None => return false,
        };
        if !pedersen::open_check(params, &output.commitment, opening) {
            return false;
        }
        opened.push((opening.value.0.clone(), output.owner_pubkey.clone()));
    }
    let mut expected: Vec<(BigUint, GroupElement)> = intent
        .iter()
        .map(|(v, owner)| (BigUint::from(*v), owner.clone()))
        .collect();
    opened.sort();
    expected.sort();
    opened == expected
}

/// Payer authorization: a Schnorr signature over base `g` on the canonical
/// message. Callers run `payer_review` first.
pub fn payer_sign<R: Rng + CryptoRng>(
    params: &GroupParams,
    tx: &ConcealedTx,
    payer_keypair: &SchnorrKeyPair,
    rng: &mut R,
) -> Signature {
    let message = canonical_message(params, &tx.inputs, &tx.outputs);
    schnorr::sign(params, payer_keypair, schnorr::DOMAIN_PAYER, &message, rng)
}

/// Central-bank verification, in order: input liveness and payer
/// signatures, range proofs, then the balance identity `z = beta`.
/// Failures are report flags, never errors.
pub fn central_verify<V: UtxoView>(
    ledger_view: &V,
    params: &GroupParams,
    tx: &ConcealedTx,
    n_bits: u32,
) -> VerifyReport {
    let message = canonical_message(params, &tx.inputs, &tx.outputs);

    // (1) every input live with matching record, every distinct input owner
    // covered by a verifying payer signature
    let mut payer_sig_ok = !tx.inputs.is_empty();
    for input in &tx.inputs {
        match ledger_view.lookup(&input.utxo_id) {
            Some((commitment, owner)) => {
                if commitment != input.commitment || owner != input.owner_pubkey {
                    payer_sig_ok = false;
                    break;
                }
            }
            None => {
                payer_sig_ok = false;
                break;
            }
        }
        let covered = tx.payer_sigs.iter().any(|(pubkey, sig)| {
            pubkey == &input.owner_pubkey
                && schnorr::verify(
                    params,
                    &params.g,
                    pubkey,
                    schnorr::DOMAIN_PAYER,
                    &message,
                    sig,
                )
        });
        if !covered {
            payer_sig_ok = false;
            break;
        }
    }

    // (2) range proofs, one per output
    let mut range_ok = tx.range_proofs.len() == tx.outputs.len();
    if range_ok {
        for (output, proof) in tx.outputs.iter().zip(tx.range_proofs.iter()) {
            if !rangeproof::verify_range(params, &output.commitment, proof, n_bits) {
                range_ok = false;
                break;
            }
        }
    }

    // (3) z as the balance public key
    let input_commitments: Vec<Commitment> =
        tx.inputs.iter().map(|i| i.commitment.clone()).collect();
    let output_commitments: Vec<Commitment> =
        tx.outputs.iter().map(|o| o.commitment.clone()).collect();
    let z = pedersen::combine(params, &input_commitments, &output_commitments);
    let balance_ok = schnorr::verify(
        params,
        &params.h,
        &z,
        schnorr::DOMAIN_BALANCE,
        &message,
        &tx.balance_sig,
    );

    VerifyReport {
        payer_sig_ok,
        range_ok,
        balance_ok,
        z,
    }
}

/// Canonical bytes of an output record as stored in Merkle leaves and the
/// ledger log.
pub fn output_record_bytes(params: &GroupParams, output: &OutputRecord) -> Vec<u8> {
    let mut w = Writer::new();
    w.put_element(params, &output.commitment.point);
    w.put_element(params, &output.owner_pubkey);
    w.into_bytes()
}

pub fn encode_range_proof(params: &GroupParams, w: &mut Writer, proof: &RangeProof) {
    w.put_u32(proof.bit_commitments.len() as u32);
    for d in &proof.bit_commitments {
        w.put_element(params, &d.point);
    }
    for or in &proof.or_proofs {
        w.put_element(params, &or.t0);
        w.put_element(params, &or.t1);
        w.put_scalar(params, &or.e0);
        w.put_scalar(params, &or.e1);
        w.put_scalar(params, &or.z0);
        w.put_scalar(params, &or.z1);
    }
}

pub fn decode_range_proof(
    params: &GroupParams,
    r: &mut crate::encoding::Reader<'_>,
) -> Result<RangeProof, crate::encoding::CodecError> {
    let n = r.get_u32()? as usize;
    let mut bit_commitments = Vec::with_capacity(n);
    for _ in 0..n {
        bit_commitments.push(Commitment {
            point: r.get_element(params)?,
        });
    }
    let mut or_proofs = Vec::with_capacity(n);
    for _ in 0..n {
        or_proofs.push(crate::rangeproof::BitOrProof {
            t0: r.get_element(params)?,
            t1: r.get_element(params)?,
            e0: r.get_scalar(params)?,
            e1: r.get_scalar(params)?,
            z0: r.get_scalar(params)?,
            z1: r.get_scalar(params)?,
        });
    }
    Ok(RangeProof {
        bit_commitments,
        or_proofs,
    })
}

fn encode_signature(params: &GroupParams, w: &mut Writer, sig: &Signature) {
    w.put_scalar(params, &sig.s);
    w.put_scalar(params, &sig.e);
}

fn decode_signature(
    params: &GroupParams,
    r: &mut crate::encoding::Reader<'_>,
) -> Result<Signature, crate::encoding::CodecError> {
    Ok(Signature {
        s: r.get_scalar(params)?,
        e: r.get_scalar(params)?,
    })
}

/// Full canonical transaction encoding: fixed field order, count-prefixed
/// lists, fixed-width numerics.
pub fn encode_tx(params: &GroupParams, tx: &ConcealedTx) -> Vec<u8> {
    let mut w = Writer::new();
    w.put_u32(tx.inputs.len() as u32);
    for input in &tx.inputs {
        w.put_digest(&input.utxo_id);
        w.put_element(params, &input.owner_pubkey);
        w.put_element(params, &input.commitment.point);
    }
    w.put_u32(tx.outputs.len() as u32);
    for output in &tx.outputs {
        w.put_element(params, &output.commitment.point);
        w.put_element(params, &output.owner_pubkey);
    }
    w.put_u32(tx.range_proofs.len() as u32);
    for proof in &tx.range_proofs {
        encode_range_proof(params, &mut w, proof);
    }
    encode_signature(params, &mut w, &tx.balance_sig);
    w.put_u32(tx.payer_sigs.len() as u32);
    for (pubkey, sig) in &tx.payer_sigs {
        w.put_element(params, pubkey);
        encode_signature(params, &mut w, sig);
    }
    w.into_bytes()
}

pub fn decode_tx(
    params: &GroupParams,
    r: &mut crate::encoding::Reader<'_>,
) -> Result<ConcealedTx, crate::encoding::CodecError> {
    let n_in = r.get_u32()? as usize;
    let mut inputs = Vec::with_capacity(n_in);
    for _ in 0..n_in {
        inputs.push(InputRef {
            utxo_id: r.get_digest()?,
            owner_pubkey: r.get_element(params)?,
            commitment: Commitment {
                point: r.get_element(params)?,
            },
        });
    }
    let n_out = r.get_u32()? as usize;
    let mut outputs = Vec::with_capacity(n_out);
    for _ in 0..n_out {
        outputs.push(OutputRecord {
            commitment: Commitment {
                point: r.get_element(params)?,
            },
            owner_pubkey: r.get_element(params)?,
        });
    }
    let n_rp = r.get_u32()? as usize;
    let mut range_proofs = Vec::with_capacity(n_rp);
    for _ in 0..n_rp {
        range_proofs.push(decode_range_proof(params, r)?);
    }
    let balance_sig = decode_signature(params, r)?;
    let n_sigs = r.get_u32()? as usize;
    let mut payer_sigs = Vec::with_capacity(n_sigs);
    for _ in 0..n_sigs {
        let pubkey = r.get_element(params)?;
        let sig = decode_signature(params, r)?;
        payer_sigs.push((pubkey, sig));
    }
    Ok(ConcealedTx {
        inputs,
        outputs,
        range_proofs,
        balance_sig,
        payer_sigs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::seeded_rng;
    use crate::schnorr::keypair_from_private;
    use std::collections::HashMap;

    pub struct MapView(pub HashMap<Digest32, (Commitment, GroupElement)>);

    impl UtxoView for MapView {
        fn lookup(&self, utxo_id: &Digest32) -> Option<(Commitment, GroupElement)> {
            self.0.get(utxo_id).cloned()
        }
    }

    fn tp() -> GroupParams {
        GroupParams::test_profile()
    }

    /// One live UTXO of value 10, randomness 4, owned by the payer key x=3.
    fn worked_setup(
        params: &GroupParams,
    ) -> (MapView, InputRef, Opening, SchnorrKeyPair) {
        let payer = keypair_from_private(params, &params.g.clone(), Scalar::from_u64(3));
        let opening = Opening::from_u64(params, 10, 4);
        let commitment = pedersen::commit(params, &opening);
        let id = utxo_id(&[7u8; 32], 0);
        let input = InputRef {
            utxo_id: id,
            owner_pubkey: payer.public.clone(),
            commitment: commitment.clone(),
        };
        let mut live = HashMap::new();
        live.insert(id, (commitment, payer.public.clone()));
        (MapView(live), input, opening, payer)
    }

    #[test]
    fn worked_balanced_transaction() {
        let params = tp();
        let mut rng = seeded_rng(b"txw");
        let (view, input, opening, payer) = worked_setup(&params);
        let payee = keypair_from_private(&params, &params.g.clone(), Scalar::from_u64(5));
        let payouts = vec![(6u64, payee.public.clone()), (4u64, payer.public.clone())];
        let (mut tx, packet) =
            build_concealed_tx(&params, &[(input, opening)], &payouts, 3, &mut rng).unwrap();
        assert!(payer_review(&params, &tx, &packet, &payer.public, &payouts));
        let sig = payer_sign(&params, &tx, &payer, &mut rng);
        tx.payer_sigs.push((payer.public.clone(), sig));
        let report = central_verify(&view, &params, &tx, 3);
        assert!(report.accepted(), "{report:?}");
        // z equals h^alpha for the actual randomness used
        let r_out: Vec<Scalar> = packet
            .outputs
            .iter()
            .map(|(_, o)| o.randomness.clone())
            .collect();
        let beta = schnorr::balance_key(&params, &[Scalar::from_u64(4)], &r_out)
            .unwrap()
            .public;
        assert_eq!(report.z, beta);
    }

    #[test]
    fn worked_fixed_randomness_identity() {
        // input (10, 4), outputs (6, 1) and (4, 2): z = beta = 8.
        let params = tp();
        let c_in = pedersen::commit(&params, &Opening::from_u64(&params, 10, 4));
        let c1 = pedersen::commit(&params, &Opening::from_u64(&params, 6, 1));
        let c2 = pedersen::commit(&params, &Opening::from_u64(&params, 4, 2));
        let z = pedersen::combine(&params, &[c_in], &[c1, c2]);
        assert_eq!(z, GroupElement::from_u64(8));
        let kp = schnorr::balance_key(
            &params,
            &[Scalar::from_u64(4)],
            &[Scalar::from_u64(1), Scalar::from_u64(2)],
        )
        .unwrap();
        assert_eq!(kp.public, GroupElement::from_u64(8));
    }

    #[test]
    fn unbalanced_payouts_rejected_at_build() {
        let params = tp();
        let mut rng = seeded_rng(b"txu");
        let (_, input, opening, payer) = worked_setup(&params);
        let payouts = vec![(7u64, payer.public.clone()), (4u64, payer.public.clone())];
        assert_eq!(
            build_concealed_tx(&params, &[(input, opening)], &payouts, 3, &mut rng)
                .unwrap_err(),
            TxBuildError::UnbalancedAmounts
        );
    }

    #[test]
    fn minimal_single_output_tx() {
        let params = tp();
        let mut rng = seeded_rng(b"txm");
        let (view, input, opening, payer) = worked_setup(&params);
        // single output of the full value; 10 needs 4 bits but q = 11 caps
        // n at 3, so use value 7 via a dedicated input
        let opening7 = Opening::from_u64(&params, 7, 4);
        let c7 = pedersen::commit(&params, &opening7);
        let id7 = utxo_id(&[9u8; 32], 0);
        let input7 = InputRef {
            utxo_id: id7,
            owner_pubkey: payer.public.clone(),
            commitment: c7.clone(),
        };
        let mut live = view.0;
        live.insert(id7, (c7, payer.public.clone()));
        let view = MapView(live);
        let _ = (input, opening);
        let payouts = vec![(7u64, payer.public.clone())];
        let (mut tx, _) =
            build_concealed_tx(&params, &[(input7, opening7)], &payouts, 3, &mut rng).unwrap();
        assert_eq!(tx.range_proofs.len(), 1);
        let sig = payer_sign(&params, &tx, &payer, &mut rng);
        tx.payer_sigs.push((payer.public.clone(), sig));
        assert!(central_verify(&view, &params, &tx, 3).accepted());
    }

    #[test]
    fn review_detects_substituted_owner_key() {
        let params = tp();
        let mut rng = seeded_rng(b"txs");
        let (_, input, opening, payer) = worked_setup(&params);
        let payee = keypair_from_private(&params, &params.g.clone(), Scalar::from_u64(5));
        let payouts = vec![(6u64, payee.public.clone()), (4u64, payer.public.clone())];
        let (mut tx, packet) =
            build_concealed_tx(&params, &[(input, opening)], &payouts, 3, &mut rng).unwrap();
        // bank swaps the payee key for its own
        tx.outputs[0].owner_pubkey = GroupElement::from_u64(13);
        assert!(!payer_review(&params, &tx, &packet, &payer.public, &payouts));
    }

    #[test]
    fn review_detects_inflated_value() {
        let params = tp();
        let mut rng = seeded_rng(b"txi");
        let (_, input, opening, payer) = worked_setup(&params);
        let payee = keypair_from_private(&params, &params.g.clone(), Scalar::from_u64(5));
        let payouts = vec![(6u64, payee.public.clone()), (4u64, payer.public.clone())];
        let (tx, packet) =
            build_concealed_tx(&params, &[(input, opening)], &payouts, 3, &mut rng).unwrap();
        let wrong_intent = vec![(5u64, payee.public.clone()), (4u64, payer.public.clone())];
        assert!(!payer_review(&params, &tx, &packet, &payer.public, &wrong_intent));
    }

    #[test]
    fn signature_from_non_owner_rejected() {
        let params = tp();
        let mut rng = seeded_rng(b"txn");
        let (view, input, opening, payer) = worked_setup(&params);
        let stranger = keypair_from_private(&params, &params.g.clone(), Scalar::from_u64(7));
        let payouts = vec![(6u64, payer.public.clone()), (4u64, payer.public.clone())];
        let (mut tx, _) =
            build_concealed_tx(&params, &[(input, opening)], &payouts, 3, &mut rng).unwrap();
        let sig = payer_sign(&params, &tx, &stranger, &mut rng);
        tx.payer_sigs.push((stranger.public.clone(), sig));
        let report = central_verify(&view, &params, &tx, 3);
        assert!(!report.payer_sig_ok);
    }

    #[test]
    fn signature_over_mutated_tx_rejected() {
        let params = tp();
        let mut rng = seeded_rng(b"txmut");
        let (view, input, opening, payer) = worked_setup(&params);
        let payouts = vec![(6u64, payer.public.clone()), (4u64, payer.public.clone())];
        let (mut tx, _) =
            build_concealed_tx(&params, &[(input.clone(), opening)], &payouts, 3, &mut rng)
                .unwrap();
        let mut mutated = tx.clone();
        mutated.outputs.swap(0, 1);
        let sig = payer_sign(&params, &mutated, &payer, &mut rng);
        tx.payer_sigs.push((payer.public.clone(), sig));
        let report = central_verify(&view, &params, &tx, 3);
        assert!(!report.payer_sig_ok);
    }

    #[test]
    fn unbalanced_commitments_fail_balance_check() {
        // outputs commit 7 and 4 against input 10 with randomness (4; 1, 2):
        // z = 1 * inv(12 * 12 = 6) = 4 != beta = 8.
        let params = tp();
        let mut rng = seeded_rng(b"txb");
        let (view, input, _, payer) = worked_setup(&params);
        let c1 = pedersen::commit(&params, &Opening::from_u64(&params, 7, 1));
        let c2 = pedersen::commit(&params, &Opening::from_u64(&params, 4, 2));
        let outputs = vec![
            OutputRecord {
                commitment: c1,
                owner_pubkey: payer.public.clone(),
            },
            OutputRecord {
                commitment: c2,
                owner_pubkey: payer.public.clone(),
            },
        ];
        let z = pedersen::combine(
            &params,
            &[input.commitment.clone()],
            &outputs.iter().map(|o| o.commitment.clone()).collect::<Vec<_>>(),
        );
        assert_eq!(z, GroupElement::from_u64(4));
        // the bank still signs with alpha = 4 - 1 - 2 = 1, beta = 8 != z
        let kp = schnorr::balance_key(
            &params,
            &[Scalar::from_u64(4)],
            &[Scalar::from_u64(1), Scalar::from_u64(2)],
        )
        .unwrap();
        let message = canonical_message(&params, &[input.clone()], &outputs);
        let balance_sig =
            schnorr::sign(&params, &kp, schnorr::DOMAIN_BALANCE, &message, &mut rng);
        let mut tx = ConcealedTx {
            inputs: vec![input],
            outputs,
            range_proofs: vec![
                rangeproof::prove_range(&params, &Opening::from_u64(&params, 7, 1), 3, &mut rng)
                    .unwrap(),
                rangeproof::prove_range(&params, &Opening::from_u64(&params, 4, 2), 3, &mut rng)
                    .unwrap(),
            ],
            balance_sig,
            payer_sigs: Vec::new(),
        };
        let sig = payer_sign(&params, &tx, &payer, &mut rng);
        tx.payer_sigs.push((payer.public.clone(), sig));
        let report = central_verify(&view, &params, &tx, 3);
        assert!(report.payer_sig_ok);
        assert!(report.range_ok);
        assert!(!report.balance_ok);
    }

    #[test]
    fn missing_signature_for_any_input_owner_rejected() {
        let params = tp();
        let mut rng = seeded_rng(b"txms");
        // two inputs from distinct payers
        let p1 = keypair_from_private(&params, &params.g.clone(), Scalar::from_u64(3));
        let p2 = keypair_from_private(&params, &params.g.clone(), Scalar::from_u64(5));
        let o1 = Opening::from_u64(&params, 3, 4);
        let o2 = Opening::from_u64(&params, 4, 6);
        let mut live = HashMap::new();
        let mk = |owner: &SchnorrKeyPair, o: &Opening, tag: u8| {
            let c = pedersen::commit(&params, o);
            let id = utxo_id(&[tag; 32], 0);
            (
                InputRef {
                    utxo_id: id,
                    owner_pubkey: owner.public.clone(),
                    commitment: c.clone(),
                },
                id,
                c,
            )
        };
        let (i1, id1, c1) = mk(&p1, &o1, 1);
        let (i2, id2, c2) = mk(&p2, &o2, 2);
        live.insert(id1, (c1, p1.public.clone()));
        live.insert(id2, (c2, p2.public.clone()));
        let view = MapView(live);
        let payouts = vec![(7u64, p1.public.clone())];
        let (mut tx, _) = build_concealed_tx(
            &params,
            &[(i1, o1), (i2, o2)],
            &payouts,
            3,
            &mut rng,
        )
        .unwrap();
        let s1 = payer_sign(&params, &tx, &p1, &mut rng);
        let s2 = payer_sign(&params, &tx, &p2, &mut rng);
        tx.payer_sigs = vec![(p1.public.clone(), s1.clone()), (p2.public.clone(), s2.clone())];
        assert!(central_verify(&view, &params, &tx, 3).accepted());
        // drop each signature in turn
        for drop_idx in 0..2 {
            let mut partial = tx.clone();
            partial.payer_sigs.remove(drop_idx);
            assert!(!central_verify(&view, &params, &partial, 3).payer_sig_ok);
        }
    }

    #[test]
    fn tx_codec_round_trip() {
        let params = tp();
        let mut rng = seeded_rng(b"txc");
        let (_, input, opening, payer) = worked_setup(&params);
        let payouts = vec![(6u64, payer.public.clone()), (4u64, payer.public.clone())];
        let (mut tx, _) =
            build_concealed_tx(&params, &[(input, opening)], &payouts, 3, &mut rng).unwrap();
        let sig = payer_sign(&params, &tx, &payer, &mut rng);
        tx.payer_sigs.push((payer.public.clone(), sig));
        let bytes = encode_tx(&params, &tx);
        let mut r = crate::encoding::Reader::new(&bytes);
        let decoded = decode_tx(&params, &mut r).unwrap();
        r.finish().unwrap();
        assert_eq!(decoded, tx);
        assert_eq!(tx_id(&params, &decoded), tx_id(&params, &tx));
    }

    #[test]
    fn balanced_random_transactions_always_accept() {
        let params = tp();
        let mut rng = seeded_rng(b"txprop");
        for _ in 0..300 {
            let payer = schnorr::keygen(&params, &params.g.clone(), &mut rng);
            let total = 1 + (rand::Rng::gen_range(&mut rng, 0u64..7));
            let split = rand::Rng::gen_range(&mut rng, 0u64..=total);
            let opening = Opening::random(&params, total, &mut rng);
            let c = pedersen::commit(&params, &opening);
            let id = utxo_id(&[3u8; 32], 0);
            let input = InputRef {
                utxo_id: id,
                owner_pubkey: payer.public.clone(),
                commitment: c.clone(),
            };
            let mut live = HashMap::new();
            live.insert(id, (c, payer.public.clone()));
            let view = MapView(live);
            let payouts = vec![
                (split, payer.public.clone()),
                (total - split, payer.public.clone()),
            ];
            let (mut tx, _) =
                build_concealed_tx(&params, &[(input, opening)], &payouts, 3, &mut rng)
                    .unwrap();
            let sig = payer_sign(&params, &tx, &payer, &mut rng);
            tx.payer_sigs.push((payer.public.clone(), sig));
            assert!(central_verify(&view, &params, &tx, 3).accepted());
        }
    }
}
