//! Aggregate three payments into one transaction and measure the
//! counterparty anonymity an outside observer faces.

use cbdc::coinjoin::{aggregate, anonymity_of, build_component, BatchPolicy, Batcher};
use cbdc::group::{seeded_rng, GroupParams, Scalar};
use cbdc::ledger::mint_genesis;
use cbdc::schnorr::keypair_from_private;
use cbdc::txbuild::{central_verify, InputRef};

fn main() {
    let params = GroupParams::test_profile();
    let mut rng = seeded_rng(b"coinjoin-example");
    let payers: Vec<_> = [2u64, 3, 4]
        .iter()
        .map(|x| keypair_from_private(&params, &params.g.clone(), Scalar::from_u64(*x)))
        .collect();
    let payees: Vec<_> = [5u64, 6, 7]
        .iter()
        .map(|x| keypair_from_private(&params, &params.g.clone(), Scalar::from_u64(*x)))
        .collect();

    let payouts: Vec<_> = payers.iter().map(|kp| (5u64, kp.public.clone())).collect();
    let (mut state, packet) = mint_genesis(&params, &payouts, 3, &mut rng);

    // each payer prepares a component; a threshold batcher releases the
    // batch once three distinct payers are pending
    let mut batcher = Batcher::new(
        BatchPolicy::Threshold {
            k_min: 3,
            timeout: 1000,
        },
        0,
    );
    for (i, payer) in payers.iter().enumerate() {
        let rec = state
            .live_utxos
            .values()
            .find(|r| r.owner_pubkey == payer.public)
            .unwrap();
        let opening = packet
            .outputs
            .iter()
            .find(|(j, _)| *j == rec.index as usize)
            .unwrap()
            .1
            .clone();
        let (component, _) = build_component(
            &params,
            &[(
                InputRef {
                    utxo_id: rec.utxo_id,
                    owner_pubkey: rec.owner_pubkey.clone(),
                    commitment: rec.commitment.clone(),
                },
                opening,
            )],
            &[(5, payees[i].public.clone())],
            std::slice::from_ref(payer),
            3,
            &mut rng,
        )
        .unwrap();
        batcher.submit(component, i as u64);
        let released = batcher.poll(i as u64);
        println!(
            "payer {} queued a component; batch released: {}",
            i,
            released.is_some()
        );
        if let Some(batch) = released {
            let tx = aggregate(&params, &batch, b"window-0", &mut rng).unwrap();
            println!(
                "aggregate: {} inputs, {} outputs, k-anonymity {}",
                tx.inputs.len(),
                tx.outputs.len(),
                anonymity_of(&tx)
            );
            let report = central_verify(&state, &params, &tx, 3);
            println!(
                "one balance signature covers the whole batch: accepted = {}",
                report.accepted()
            );
            state.apply_tx(&params, &tx, &mut rng).unwrap();
        }
    }
}
