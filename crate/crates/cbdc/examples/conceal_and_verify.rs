//! Build a concealed transaction and watch the central bank verify it
//! without ever seeing an amount.
//!
//! Runs in the tiny hand-checkable group (p = 23, q = 11, g = 2, h = 8) so
//! every number printed can be recomputed on paper.

use cbdc::group::{seeded_rng, GroupParams, Scalar};
use cbdc::pedersen::{commit, Opening};
use cbdc::schnorr::keypair_from_private;
use cbdc::txbuild::{
    build_concealed_tx, central_verify, payer_review, payer_sign, InputRef, UtxoView,
};
use std::collections::HashMap;

struct View(HashMap<[u8; 32], (cbdc::pedersen::Commitment, cbdc::group::GroupElement)>);

impl UtxoView for View {
    fn lookup(
        &self,
        utxo_id: &[u8; 32],
    ) -> Option<(cbdc::pedersen::Commitment, cbdc::group::GroupElement)> {
        self.0.get(utxo_id).cloned()
    }
}

fn main() {
    let params = GroupParams::test_profile();
    let mut rng = seeded_rng(b"conceal-example");
    println!(
        "group: p = {}, q = {}, g = {}, h = {}",
        params.p, params.q, params.g.0, params.h.0
    );

    // the payer holds a note of value 5, committed with randomness 7
    let payer = keypair_from_private(&params, &params.g.clone(), Scalar::from_u64(3));
    let payee = keypair_from_private(&params, &params.g.clone(), Scalar::from_u64(5));
    let note = Opening::from_u64(&params, 5, 7);
    let note_commitment = commit(&params, &note);
    println!(
        "note: commit(5, 7) = g^5 h^7 = {} (value hidden inside)",
        note_commitment.point.0
    );

    let utxo_id = [1u8; 32];
    let ledger_view = View(HashMap::from([(
        utxo_id,
        (note_commitment.clone(), payer.public.clone()),
    )]));
    let input = InputRef {
        utxo_id,
        owner_pubkey: payer.public.clone(),
        commitment: note_commitment,
    };

    // pay 3 to the payee, 2 back as change
    let payouts = vec![(3u64, payee.public.clone()), (2u64, payer.public.clone())];
    let (mut tx, packet) =
        build_concealed_tx(&params, &[(input, note)], &payouts, 3, &mut rng).unwrap();
    for (i, output) in tx.outputs.iter().enumerate() {
        println!("output {i}: commitment {}", output.commitment.point.0);
    }

    // the payer checks the built transaction matches the intent, then signs
    let intent = payouts.clone();
    assert!(payer_review(&params, &tx, &packet, &payer.public, &intent));
    let sig = payer_sign(&params, &tx, &payer, &mut rng);
    tx.payer_sigs.push((payer.public.clone(), sig));

    // central bank: range proofs, ownership signature, and the balance
    // check z = (product of inputs) / (product of outputs) = h^alpha
    let report = central_verify(&ledger_view, &params, &tx, 3);
    println!(
        "central bank verdict: payer_sig={} range={} balance={} (z = {})",
        report.payer_sig_ok, report.range_ok, report.balance_ok, report.z.0
    );
    assert!(report.accepted());

    // an inflated payment cannot be built at all
    let bad = build_concealed_tx(
        &params,
        &[(
            InputRef {
                utxo_id,
                owner_pubkey: payer.public.clone(),
                commitment: commit(&params, &Opening::from_u64(&params, 5, 7)),
            },
            Opening::from_u64(&params, 5, 7),
        )],
        &[(6, payee.public.clone())],
        3,
        &mut rng,
    );
    println!("attempt to pay 6 from a 5 note: {:?}", bad.err().unwrap());
}
