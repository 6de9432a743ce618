//! One-time keys per payment, with supervised re-identification.
//!
//! The ledger only ever sees freshly derived public keys, so entries are
//! unlinkable to each other. The issuing bank keeps the key-to-identity
//! mapping and reveals it only against a token signed by the oversight
//! authority; every disclosure attempt is logged.

use cbdc::group::{seeded_rng, GroupParams};
use cbdc::pseudonym::{authorize_disclosure, IdentityRegistry, MasterSecret};
use cbdc::schnorr::keygen;

fn main() {
    let params = GroupParams::test_profile();
    let mut rng = seeded_rng(b"pseudonym-example");

    let mut wallet = MasterSecret::random(&mut rng);
    println!("five payments, five unrelated public keys:");
    let mut keys = Vec::new();
    for i in 0..5 {
        let kp = wallet.next_keypair(&params);
        println!("  payment {i}: pubkey {}", kp.public.0);
        keys.push(kp);
    }

    // the wallet can be rebuilt from the seed alone
    let rebuilt = MasterSecret::new(wallet.seed);
    assert_eq!(rebuilt.derive_keypair(&params, 3).public, keys[3].public);
    println!("wallet rebuilt from seed reproduces key 3: ok");

    let authority = keygen(&params, &params.g.clone(), &mut rng);
    let mut registry = IdentityRegistry::new(authority.public.clone());
    for kp in &keys {
        registry.register(kp.public.clone(), "acct:alice");
    }

    // disclosure with a proper token
    let token = authorize_disclosure(&params, &authority, &keys[2].public, "aml-case-17", &mut rng);
    let who = registry.disclose(&params, &keys[2].public, &token).unwrap();
    println!("authorized disclosure of key 2: {who}");

    // a fishing attempt with a token for the wrong key
    let refused = registry.disclose(&params, &keys[4].public, &token);
    println!("token replayed against key 4: {refused:?}");

    println!("audit log:");
    for entry in &registry.access_log {
        println!(
            "  pubkey {} purpose {:?} granted {}",
            entry.pubkey.0, entry.purpose, entry.granted
        );
    }
}
