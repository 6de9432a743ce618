//! Mint, spend, and hand the payee a confirmation they can verify against
//! nothing but the central bank's public key.

use cbdc::group::{seeded_rng, GroupParams, Scalar};
use cbdc::ledger::{mint_genesis, verify_confirmation, LedgerState};
use cbdc::schnorr::keypair_from_private;
use cbdc::txbuild::{build_concealed_tx, payer_sign, InputRef};

fn main() {
    let params = GroupParams::test_profile();
    let mut rng = seeded_rng(b"merkle-example");
    let payer = keypair_from_private(&params, &params.g.clone(), Scalar::from_u64(3));
    let payee = keypair_from_private(&params, &params.g.clone(), Scalar::from_u64(5));

    // the central bank mints a 7-unit note to the payer and keeps the
    // genesis opening; it is the last opening it will ever hold
    let (mut state, packet) = mint_genesis(&params, &[(7, payer.public.clone())], 3, &mut rng);
    let rec = state.live_utxos.values().next().unwrap().clone();
    println!("minted utxo {}", hex::encode(&rec.utxo_id[..8]));

    let (mut tx, spend_packet) = build_concealed_tx(
        &params,
        &[(
            InputRef {
                utxo_id: rec.utxo_id,
                owner_pubkey: rec.owner_pubkey.clone(),
                commitment: rec.commitment.clone(),
            },
            packet.outputs[0].1.clone(),
        )],
        &[(4, payee.public.clone()), (3, payer.public.clone())],
        3,
        &mut rng,
    )
    .unwrap();
    let sig = payer_sign(&params, &tx, &payer, &mut rng);
    tx.payer_sigs.push((payer.public.clone(), sig));

    let confirmation = state.apply_tx(&params, &tx, &mut rng).unwrap();
    println!(
        "confirmed tx {} under merkle root {}",
        hex::encode(&confirmation.tx_id[..8]),
        hex::encode(&confirmation.merkle_root[..8])
    );

    // the payee gets: their output, its opening (from the bank), an
    // inclusion path, and the signed root
    let output = tx.outputs[0].clone();
    let opening = spend_packet
        .outputs
        .iter()
        .find(|(i, _)| *i == 0)
        .unwrap()
        .1
        .clone();
    let path = state
        .confirmation_path(&params, &confirmation.tx_id, 0)
        .unwrap();
    let ok = verify_confirmation(
        &params,
        &state.cb_keypair.public,
        &output,
        &opening,
        &path,
        &confirmation,
    );
    println!("payee verifies confirmation: {ok}");
    assert!(ok);

    // replaying the spend is rejected
    println!("replay: {:?}", state.apply_tx(&params, &tx, &mut rng).unwrap_err());

    // the whole ledger round-trips through its snapshot
    let bytes = state.snapshot(&params);
    let restored = LedgerState::restore(&params, &bytes).unwrap();
    assert_eq!(restored.live_utxos, state.live_utxos);
    println!("snapshot: {} bytes, restored {} live utxos", bytes.len(), restored.live_utxos.len());
}
