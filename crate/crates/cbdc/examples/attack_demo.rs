//! Why concealment needs binding: forging payments against a counter-mode
//! strawman succeeds almost every time, while the same attack against
//! Pedersen commitments finds nothing to forge.

use cbdc::attackdemo::{forgery_rate_empirical, forgery_rate_exact, ToyCipherConfig};
use cbdc::group::{generate_group_params, seeded_rng, Scalar};
use cbdc::pedersen::{commit, open_check, Commitment, Opening};
use num_bigint::RandBigInt;

fn main() {
    // strawman: amounts hidden as c = tag XOR keystream(counter); the bank
    // accepts anything that decrypts to a fresh nonzero tag
    println!("counter-mode strawman, random-ciphertext forgery:");
    for (bits, q1) in [(16u32, 1000u64), (16, 30_000), (12, 2048), (8, 255)] {
        let config = ToyCipherConfig::new(bits, [7u8; 32]).unwrap();
        let mut rng = seeded_rng(b"attack-example");
        let exact = forgery_rate_exact(bits, q1).unwrap();
        let observed = forgery_rate_empirical(&config, q1, 100_000, &mut rng).unwrap();
        println!(
            "  {bits:>2}-bit blocks, {q1:>6} spent tags: exact {exact:.5}, observed {observed:.5}"
        );
    }

    // the same strategy against commitments: guess a group element and
    // claim an opening for it
    println!();
    println!("same attack against Pedersen commitments (64-bit group):");
    let params = generate_group_params(64, b"attack-demo").unwrap();
    let mut rng = seeded_rng(b"commit-attack");
    let trials = 100_000;
    let mut successes = 0u64;
    for t in 0..trials {
        let point = params.mod_exp(&params.g, &Scalar(rng.gen_biguint_below(&params.q)));
        let claimed = Opening::random(&params, t % 1000, &mut rng);
        if open_check(&params, &Commitment { point }, &claimed) {
            successes += 1;
        }
    }
    println!("  {successes} forgeries accepted in {trials} trials");

    let honest = Opening::random(&params, 42, &mut rng);
    println!(
        "  honest opening still verifies: {}",
        open_check(&params, &commit(&params, &honest), &honest)
    );
}
