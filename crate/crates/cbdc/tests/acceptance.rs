//! End-to-end acceptance checks, one per guaranteed property.
//!
//! Each test prints a single `criterion N (...): pass` line (visible with
//! `cargo test --test acceptance -- --nocapture`) or panics with a `fail`
//! line. Tolerances are fixed here, not tuned to match observations.

use std::collections::HashMap;

use cbdc::anonmodel::{
    achieved_k, poisson_pmf, prob_at_least, simulate_waiting, waiting_cdf, waiting_quantile,
};
use cbdc::attackdemo::{forgery_rate_empirical, forgery_rate_exact, ToyCipherConfig};
use cbdc::group::{generate_group_params, seeded_rng, GroupElement, GroupParams, Scalar};
use cbdc::ledger::{inclusion_proof, merkle_root, mint_genesis, verify_confirmation, verify_inclusion};
use cbdc::pedersen::{combine, commit, Commitment, Opening};
use cbdc::rangeproof::{prove_range, verify_range};
use cbdc::schnorr::{self, keypair_from_private};
use cbdc::txbuild::{
    build_concealed_tx, canonical_message, central_verify, payer_sign, ConcealedTx, InputRef,
    OutputRecord, UtxoView,
};
use cbdc::wire::{run_scenario, ScenarioConfig};
use num_bigint::BigUint;
use rand::Rng;

fn report(criterion: u32, name: &str, ok: bool) {
    println!(
        "criterion {criterion} ({name}): {}",
        if ok { "pass" } else { "fail" }
    );
    assert!(ok, "criterion {criterion} ({name}) failed");
}

struct MapView(HashMap<[u8; 32], (Commitment, GroupElement)>);

impl UtxoView for MapView {
    fn lookup(&self, utxo_id: &[u8; 32]) -> Option<(Commitment, GroupElement)> {
        self.0.get(utxo_id).cloned()
    }
}

/// Random balanced and unbalanced transactions in one group; returns
/// (balanced transactions not fully accepted, unbalanced transactions
/// whose balance check passed anyway).
fn balance_proof_run(params: &GroupParams, count: usize, seed: &[u8]) -> (usize, usize) {
    let mut rng = seeded_rng(seed);
    let payer = schnorr::keygen(params, &params.g.clone(), &mut rng);
    let payee = schnorr::keygen(params, &params.g.clone(), &mut rng);

    let mut balanced_failures = 0usize;
    for i in 0..count {
        // most transactions 1-in 1-out at 1 bit; every 16th, 1-in 2-out at
        // 2 bits, so both shapes and widths stay covered
        let wide = i % 16 == 0;
        let n_bits = if wide { 2 } else { 1 };
        let value: u64 = rng.gen_range(0..1u64 << n_bits);
        let input_opening = Opening::random(params, value, &mut rng);
        let input_commitment = commit(params, &input_opening);
        let utxo_id = {
            let mut id = [0u8; 32];
            id[..8].copy_from_slice(&(i as u64).to_be_bytes());
            id
        };
        let view = MapView(HashMap::from([(
            utxo_id,
            (input_commitment.clone(), payer.public.clone()),
        )]));
        let input = InputRef {
            utxo_id,
            owner_pubkey: payer.public.clone(),
            commitment: input_commitment,
        };
        let payouts = if wide && value > 0 {
            let first = rng.gen_range(0..=value);
            vec![
                (first, payee.public.clone()),
                (value - first, payer.public.clone()),
            ]
        } else {
            vec![(value, payee.public.clone())]
        };
        let (mut tx, _) =
            build_concealed_tx(params, &[(input, input_opening)], &payouts, n_bits, &mut rng)
                .unwrap();
        let sig = payer_sign(params, &tx, &payer, &mut rng);
        tx.payer_sigs.push((payer.public.clone(), sig));
        let r = central_verify(&view, params, &tx, n_bits);
        if !(r.payer_sig_ok && r.range_ok && r.balance_ok) {
            balanced_failures += 1;
        }
    }

    let mut unbalanced_accepts = 0usize;
    for i in 0..count {
        // output value differs from the input value; everything else,
        // including the payer signature and range proof, is honest
        let n_bits = 2;
        let value: u64 = rng.gen_range(0..4u64);
        let delta: u64 = rng.gen_range(1..4u64);
        let out_value = (value + delta) % 4;
        let input_opening = Opening::random(params, value, &mut rng);
        let input_commitment = commit(params, &input_opening);
        let utxo_id = {
            let mut id = [0u8; 32];
            id[..8].copy_from_slice(&(i as u64).to_be_bytes());
            id[8] = 1;
            id
        };
        let view = MapView(HashMap::from([(
            utxo_id,
            (input_commitment.clone(), payer.public.clone()),
        )]));
        let out_opening = Opening::random(params, out_value, &mut rng);
        let output = OutputRecord {
            commitment: commit(params, &out_opening),
            owner_pubkey: payee.public.clone(),
        };
        let proof = prove_range(params, &out_opening, n_bits, &mut rng).unwrap();
        let alpha = params.scalar_sub(&input_opening.randomness, &out_opening.randomness);
        let inputs = vec![InputRef {
            utxo_id,
            owner_pubkey: payer.public.clone(),
            commitment: input_commitment,
        }];
        let outputs = vec![output];
        let message = canonical_message(params, &inputs, &outputs);
        let balance_sig = if alpha.is_zero() {
            // alpha = 0 would make beta the identity; sign with a random key
            let k = schnorr::keygen(params, &params.h.clone(), &mut rng);
            schnorr::sign(params, &k, schnorr::DOMAIN_BALANCE, &message, &mut rng)
        } else {
            let k = keypair_from_private(params, &params.h.clone(), alpha);
            schnorr::sign(params, &k, schnorr::DOMAIN_BALANCE, &message, &mut rng)
        };
        let mut tx = ConcealedTx {
            inputs,
            outputs,
            range_proofs: vec![proof],
            balance_sig,
            payer_sigs: Vec::new(),
        };
        let sig = payer_sign(params, &tx, &payer, &mut rng);
        tx.payer_sigs.push((payer.public.clone(), sig));
        let r = central_verify(&view, params, &tx, n_bits);
        if r.balance_ok {
            unbalanced_accepts += 1;
        }
    }
    (balanced_failures, unbalanced_accepts)
}

#[test]
fn c1_balance_proof_correctness() {
    // worked vector in the hand-checkable group: input commit(10, 4),
    // outputs commit(6, 1) and commit(4, 2); alpha = 4 - 3 = 1, so
    // z = beta = h^1 = 8
    let tp = GroupParams::test_profile();
    let z = combine(
        &tp,
        &[commit(&tp, &Opening::from_u64(&tp, 10, 4))],
        &[
            commit(&tp, &Opening::from_u64(&tp, 6, 1)),
            commit(&tp, &Opening::from_u64(&tp, 4, 2)),
        ],
    );
    let vector_ok = z == GroupElement(BigUint::from(8u32));

    let t0 = std::time::Instant::now();
    let (tb, tu) = balance_proof_run(&tp, 10_000, b"c1-test-profile");
    let test_elapsed = t0.elapsed();

    let params = generate_group_params(2048, b"acceptance-2048").unwrap();
    let t0 = std::time::Instant::now();
    let (pb, pu) = balance_proof_run(&params, 10_000, b"c1-2048");
    let prod_elapsed = t0.elapsed();

    println!(
        "  test profile: {test_elapsed:?}, {tb} balanced rejected, {tu} of 10^4 \
         unbalanced accepted (11-element group, soundness error ~1/11)"
    );
    println!(
        "  2048-bit profile: {prod_elapsed:?}, {pb} balanced rejected, {pu} \
         unbalanced accepted"
    );
    // every-time rejection is a statement about the real group; the toy
    // group's Schnorr check has soundness error ~1/11 per trial, so there
    // the unbalanced side only needs to reject by a wide majority
    report(
        1,
        "balance proof correctness",
        vector_ok
            && tb == 0
            && tu < 2_000
            && pb == 0
            && pu == 0
            && test_elapsed.as_secs() < 60,
    );
}

#[test]
fn c2_range_proof_soundness_completeness() {
    let params = GroupParams::test_profile();
    let mut rng = seeded_rng(b"c2");
    let n_bits = 3u32;

    // completeness over the full range
    let mut ok = true;
    for v in 0..8u64 {
        let opening = Opening::random(&params, v, &mut rng);
        let c = commit(&params, &opening);
        let proof = prove_range(&params, &opening, n_bits, &mut rng).unwrap();
        ok &= verify_range(&params, &c, &proof, n_bits);
    }

    // the boundary 2^n and the negative encoding q - 1 are refused
    ok &= prove_range(&params, &Opening::from_u64(&params, 8, 3), n_bits, &mut rng).is_err();
    ok &= prove_range(&params, &Opening::from_u64(&params, 10, 3), n_bits, &mut rng).is_err();

    // exhaustive small-group soundness: for every out-of-range committed
    // value, any bit decomposition whose weighted product reproduces the
    // commitment is a second opening with a different value, which a
    // committer without the discrete log of h cannot produce; so no
    // value-preserving accepting proof exists
    for bad_value in 8..11u64 {
        for r in 0..11u64 {
            let c = commit(&params, &Opening::from_u64(&params, bad_value, r));
            for assignment in 0..8u64 {
                for s0 in 0..11u64 {
                    for s1 in 0..11u64 {
                        for s2 in 0..11u64 {
                            let bits = [assignment & 1, (assignment >> 1) & 1, (assignment >> 2) & 1];
                            let ss = [s0, s1, s2];
                            let mut product = GroupElement(BigUint::from(1u32));
                            for i in 0..3 {
                                let d = commit(&params, &Opening::from_u64(&params, bits[i], ss[i]));
                                let w = Scalar(BigUint::from(1u64 << i));
                                product = params.mod_mul(&product, &params.mod_exp(&d.point, &w));
                            }
                            if product == c.point {
                                ok &= assignment % 11 != bad_value % 11;
                            }
                        }
                    }
                }
            }
        }
    }
    report(2, "range proof soundness and completeness", ok);
}

#[test]
fn c3_double_spend_and_authorization() {
    // randomized scripts; run_scenario fails the whole script if a replay
    // or a forged signature is ever accepted. Runs in a generated 64-bit
    // group: in the 11-element toy group a random impostor key collides
    // with the true owner key once in 11 tries, which is a key collision,
    // not a verifier false accept.
    let params = generate_group_params(64, b"c3-group").unwrap();
    let mut rng = seeded_rng(b"c3-scripts");
    let names = ["alice", "bob", "carol", "dave"];
    let mut false_accepts = 0usize;
    for run in 0..1000usize {
        let mut script = String::new();
        let n_accounts = rng.gen_range(2..=4usize);
        let mut balances = vec![0u64; n_accounts];
        for (i, name) in names.iter().take(n_accounts).enumerate() {
            balances[i] = rng.gen_range(4..=7u64);
            script.push_str(&format!("MINT {name} {}\n", balances[i]));
        }
        let n_pays = rng.gen_range(1..=3usize);
        for _ in 0..n_pays {
            let amount = rng.gen_range(1..=2u64);
            let a = rng.gen_range(0..n_accounts);
            if balances[a] < amount {
                continue;
            }
            let mut b = rng.gen_range(0..n_accounts);
            if b == a {
                b = (b + 1) % n_accounts;
            }
            balances[a] -= amount;
            balances[b] += amount;
            script.push_str(&format!("PAY {} {} {amount}\n", names[a], names[b]));
        }
        script.push_str("EXPECT-REJECT REPLAY\n");
        let a = (0..n_accounts).find(|&i| balances[i] >= 1).unwrap();
        let b = (a + 1) % n_accounts;
        script.push_str(&format!("EXPECT-REJECT FORGE-SIG {} {} 1\n", names[a], names[b]));
        let config = ScenarioConfig {
            seed: format!("c3-{run}").into_bytes(),
            params: Some(params.clone()),
            ..ScenarioConfig::default()
        };
        if let Err(e) = run_scenario(config, &script) {
            let msg = e.to_string();
            if msg.contains("was accepted") {
                false_accepts += 1;
            } else {
                panic!("script {run} failed for an unrelated reason: {msg}\n{script}");
            }
        }
    }
    report(
        3,
        "double spend and authorization, 1000 scripts",
        false_accepts == 0,
    );
}

#[test]
fn c4_merkle_confirmations() {
    let params = GroupParams::test_profile();
    let mut rng = seeded_rng(b"c4");
    let mut ok = true;

    // every output of every confirmed transaction verifies
    let payer = keypair_from_private(&params, &params.g.clone(), Scalar::from_u64(3));
    let payee = keypair_from_private(&params, &params.g.clone(), Scalar::from_u64(5));
    let payouts: Vec<_> = (0..16).map(|_| (6u64, payer.public.clone())).collect();
    let (mut state, packet) = mint_genesis(&params, &payouts, 3, &mut rng);
    let records: Vec<_> = state.live_utxos.values().cloned().collect();
    let mut confirmed: Vec<(cbdc::ledger::ConfirmationRecord, ConcealedTx, Vec<Opening>)> =
        Vec::new();
    for rec in records {
        let opening = packet
            .outputs
            .iter()
            .find(|(j, _)| *j == rec.index as usize)
            .unwrap()
            .1
            .clone();
        let (mut tx, spend_packet) = build_concealed_tx(
            &params,
            &[(
                InputRef {
                    utxo_id: rec.utxo_id,
                    owner_pubkey: rec.owner_pubkey.clone(),
                    commitment: rec.commitment.clone(),
                },
                opening,
            )],
            &[(2, payee.public.clone()), (4, payee.public.clone())],
            3,
            &mut rng,
        )
        .unwrap();
        let sig = payer_sign(&params, &tx, &payer, &mut rng);
        tx.payer_sigs.push((payer.public.clone(), sig));
        let confirmation = state.apply_tx(&params, &tx, &mut rng).unwrap();
        let openings = spend_packet.outputs.iter().map(|(_, o)| o.clone()).collect();
        confirmed.push((confirmation, tx, openings));
    }
    for (confirmation, tx, openings) in &confirmed {
        for (index, output) in tx.outputs.iter().enumerate() {
            let path = state
                .confirmation_path(&params, &confirmation.tx_id, index)
                .unwrap();
            ok &= verify_confirmation(
                &params,
                &state.cb_keypair.public,
                output,
                &openings[index],
                &path,
                confirmation,
            );
            // tamper with a byte of the root: must flip false
            let mut bad = confirmation.clone();
            bad.merkle_root[0] ^= 1;
            ok &= !verify_confirmation(
                &params,
                &state.cb_keypair.public,
                output,
                &openings[index],
                &path,
                &bad,
            );
        }
    }

    // random trees up to 1024 leaves, byte-flip falsification
    for &n in &[1usize, 2, 7, 64, 513, 1024] {
        let leaves: Vec<[u8; 32]> = (0..n)
            .map(|_| {
                let mut d = [0u8; 32];
                rng.fill(&mut d);
                d
            })
            .collect();
        let root = merkle_root(&leaves).unwrap();
        for (i, leaf) in leaves.iter().enumerate() {
            let path = inclusion_proof(&leaves, i).unwrap();
            ok &= verify_inclusion(&root, leaf, &path);
            let mut bad_leaf = *leaf;
            let byte = rng.gen_range(0..32usize);
            bad_leaf[byte] ^= 1 << rng.gen_range(0..8);
            ok &= !verify_inclusion(&root, &bad_leaf, &path);
        }
    }
    report(4, "merkle confirmations", ok);
}

#[test]
fn c5_poisson_moments() {
    // count arrivals in 10^4 windows of length 100 at rate 1 by summing
    // exponential gaps
    let mut rng = seeded_rng(b"c5");
    let (lambda, t_window, windows) = (1.0f64, 100.0f64, 10_000usize);
    let counts: Vec<f64> = (0..windows)
        .map(|_| {
            let mut t = 0.0;
            let mut n = 0u64;
            loop {
                let u: f64 = rng.gen();
                t += -(1.0 - u).ln() / lambda;
                if t > t_window {
                    break;
                }
                n += 1;
            }
            n as f64
        })
        .collect();
    let mean = counts.iter().sum::<f64>() / windows as f64;
    let var = counts.iter().map(|c| (c - mean) * (c - mean)).sum::<f64>() / (windows - 1) as f64;
    println!("  empirical mean {mean:.3}, variance {var:.3} (target 100 each)");
    let target = lambda * t_window;
    report(
        5,
        "poisson moments",
        (mean - target).abs() / target < 0.05 && (var - target).abs() / target < 0.05,
    );
}

#[test]
fn c6_batch_size_tail() {
    // exact tail by direct pmf summation, independent of the incomplete
    // gamma path inside prob_at_least
    let head: f64 = (0..80u64).map(|i| poisson_pmf(i, 100.0).unwrap()).sum();
    let exact = 1.0 - head;
    let got = prob_at_least(80, 100.0).unwrap();
    println!("  P(N >= 80 | mean 100): {got:.10} (oracle {exact:.10})");
    report(
        6,
        "batch size tail",
        (got - exact).abs() < 1e-9 && (got - 0.982).abs() < 5e-3 && achieved_k(100.0) == 80,
    );
}

#[test]
fn c7_waiting_time_distribution() {
    let (lambda, k) = (1.0f64, 20u64);
    // the 0.999 quantile of Gamma(19, 1) is 35.3514 (scipy oracle); a
    // chart read of "about 31" for this curve actually sits at the 0.99
    // level (30.58), so both levels are pinned here
    let q999 = waiting_quantile(k, lambda, 0.999).unwrap();
    let q99 = waiting_quantile(k, lambda, 0.99).unwrap();
    println!(
        "  waiting-time quantiles for 20-anonymity: 99% {q99:.3}, 99.9% {q999:.3}"
    );
    let mut ok = (q999 - 35.351_443_705_75).abs() < 1e-6 && (29.0..=34.0).contains(&q99);

    // KS distance between 10^5 simulated waits and the gamma CDF
    let trials = 100_000usize;
    let mut rng = seeded_rng(b"c7-ks");
    let mut sample: Vec<f64> = (0..trials)
        .map(|_| {
            let mut acc = 0.0;
            for _ in 0..(k - 1) {
                let u: f64 = rng.gen();
                acc += -(1.0 - u).ln() / lambda;
            }
            acc
        })
        .collect();
    sample.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut ks: f64 = 0.0;
    for (i, x) in sample.iter().enumerate() {
        let model = waiting_cdf(k, lambda, *x).unwrap();
        ks = ks
            .max((model - (i + 1) as f64 / trials as f64).abs())
            .max((model - i as f64 / trials as f64).abs());
    }
    println!("  KS distance at 10^5 trials: {ks:.5}");
    ok &= ks < 0.01;
    report(7, "waiting time distribution", ok);
}

#[test]
fn c8_mean_wait_linearity() {
    let mut ok = true;
    for &lambda in &[0.5f64, 1.0, 5.0] {
        let stats = simulate_waiting(lambda, 100, 4000, b"c8").unwrap();
        // regress mean wait on k for k = 2..100
        let points: Vec<(f64, f64)> = stats
            .iter()
            .filter(|s| s.k >= 2)
            .map(|s| (s.k as f64, s.mean))
            .collect();
        let n = points.len() as f64;
        let sx: f64 = points.iter().map(|(x, _)| x).sum();
        let sy: f64 = points.iter().map(|(_, y)| y).sum();
        let sxx: f64 = points.iter().map(|(x, _)| x * x).sum();
        let sxy: f64 = points.iter().map(|(x, y)| x * y).sum();
        let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        let intercept = (sy - slope * sx) / n;
        let ss_tot: f64 = points.iter().map(|(_, y)| (y - sy / n) * (y - sy / n)).sum();
        let ss_res: f64 = points
            .iter()
            .map(|(x, y)| {
                let e = y - (slope * x + intercept);
                e * e
            })
            .sum();
        let r2 = 1.0 - ss_res / ss_tot;
        println!(
            "  lambda {lambda}: slope {slope:.4} (expect {:.4}), R^2 {r2:.5}",
            1.0 / lambda
        );
        ok &= r2 >= 0.99 && (slope - 1.0 / lambda).abs() / (1.0 / lambda) < 0.05;
    }
    report(8, "mean waiting time linear in k", ok);
}

#[test]
fn c9_counter_mode_forgery() {
    let exact = forgery_rate_exact(16, 1000).unwrap();
    let config = ToyCipherConfig::new(16, [3u8; 32]).unwrap();
    let mut rng = seeded_rng(b"c9");
    let empirical = forgery_rate_empirical(&config, 1000, 1_000_000, &mut rng).unwrap();
    println!("  forgery rate: exact {exact:.5}, empirical {empirical:.5}");
    let mut ok = (empirical - exact).abs() < 0.005 && (exact - 0.98472).abs() < 1e-4;

    // monotone non-increasing in the number of spent tags
    let mut last = f64::INFINITY;
    for q1 in (0..1u64 << 16).step_by(4096) {
        let rate = forgery_rate_exact(16, q1).unwrap();
        ok &= rate <= last;
        last = rate;
    }
    report(9, "counter mode forgery demo", ok);
}

#[test]
fn c10_performance_shape() {
    // verification excluding range proofs is one product of m+n
    // commitments plus a fixed two-exponentiation signature check;
    // build-side commitment generation is two exponentiations per output.
    // Measure both against m+n and check the growth is at most linear
    // with a positive floor.
    let params = generate_group_params(1024, b"c10-bench").unwrap();
    let mut rng = seeded_rng(b"c10");
    let key = schnorr::keygen(&params, &params.h.clone(), &mut rng);
    let sizes = [2usize, 4, 8, 16, 32, 64];
    let reps = 5;

    // cost of the fixed part alone: one signature check, two exponentiations
    let floor_cost = {
        let message = vec![9u8; 32];
        let sig = schnorr::sign(&params, &key, 2, &message, &mut rng);
        let mut best = f64::INFINITY;
        for _ in 0..reps {
            let t0 = std::time::Instant::now();
            let _ = schnorr::verify(&params, &params.h, &key.public, 2, &message, &sig);
            best = best.min(t0.elapsed().as_secs_f64());
        }
        best
    };

    let mut verify_times = Vec::new();
    let mut build_times = Vec::new();
    for &size in &sizes {
        let openings: Vec<Opening> = (0..size)
            .map(|_| Opening::random(&params, 5, &mut rng))
            .collect();
        let commitments: Vec<Commitment> =
            openings.iter().map(|o| commit(&params, o)).collect();
        let (ins, outs) = commitments.split_at(size / 2);
        let message = vec![7u8; 32];
        let sig = schnorr::sign(&params, &key, 2, &message, &mut rng);

        let mut best = f64::INFINITY;
        for _ in 0..reps {
            let t0 = std::time::Instant::now();
            let z = combine(&params, ins, outs);
            let _ = schnorr::verify(&params, &params.h, &z, 2, &message, &sig);
            best = best.min(t0.elapsed().as_secs_f64());
        }
        verify_times.push((size as f64, best));

        let mut best = f64::INFINITY;
        for _ in 0..reps {
            let t0 = std::time::Instant::now();
            for o in &openings {
                let _ = commit(&params, o);
            }
            best = best.min(t0.elapsed().as_secs_f64());
        }
        build_times.push((size as f64, best));
    }

    let linear_fit = |points: &[(f64, f64)]| {
        let n = points.len() as f64;
        let sx: f64 = points.iter().map(|(x, _)| x).sum();
        let sy: f64 = points.iter().map(|(_, y)| y).sum();
        let sxx: f64 = points.iter().map(|(x, _)| x * x).sum();
        let sxy: f64 = points.iter().map(|(x, y)| x * y).sum();
        let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        let intercept = (sy - slope * sx) / n;
        let ss_tot: f64 = points.iter().map(|(_, y)| (y - sy / n) * (y - sy / n)).sum();
        let ss_res: f64 = points
            .iter()
            .map(|(x, y)| {
                let e = y - (slope * x + intercept);
                e * e
            })
            .sum();
        (slope, intercept, 1.0 - ss_res / ss_tot)
    };

    let (b_slope, _b_intercept, b_r2) = linear_fit(&build_times);
    let v_min = verify_times.iter().map(|(_, t)| *t).fold(f64::INFINITY, f64::min);
    let v_small = verify_times[0].1;
    let v_large = verify_times[verify_times.len() - 1].1;
    println!(
        "  central-bank verify: {:.3e}s at m+n=2, {:.3e}s at m+n=64, \
         two-exponentiation floor {:.3e}s",
        v_small, v_large, floor_cost
    );
    println!("  bank-side commit:    slope {:.3e}s per output, R^2 {b_r2:.4}", b_slope);
    // qualitative shape only: verification sits on the signature-check
    // floor and grows at most linearly with the commitment count, while
    // the bank-side build cost is linear in the output count
    let growth_ratio = v_large / v_small;
    let size_ratio = sizes[sizes.len() - 1] as f64 / sizes[0] as f64;
    let ok = v_min > 0.5 * floor_cost
        && growth_ratio < size_ratio
        && b_r2 > 0.9
        && b_slope > 0.0;
    report(10, "performance shape", ok);
}

#[test]
fn c11_information_boundary() {
    let scripts = [
        "MINT alice 7\nPAY alice bob 4\nPAY bob carol 2\n",
        "MINT alice 6\nMINT bob 6\nMINT carol 6\nQUEUE alice dora 2\nQUEUE bob eve 3\nQUEUE carol frank 4\nBATCH\n",
        "MINT a 7\nPAY a b 3\nEXPECT-REJECT REPLAY\nEXPECT-REJECT FORGE-SIG a b 1\n",
    ];
    let mut ok = true;
    let mut messages = 0usize;
    for (i, script) in scripts.iter().enumerate() {
        let config = ScenarioConfig {
            seed: format!("c11-{i}").into_bytes(),
            ..ScenarioConfig::default()
        };
        let transcript = run_scenario(config, script).unwrap();
        messages += transcript.envelopes.len();
        ok &= !transcript.central_bank_saw_opening();
        // sanity: openings did flow to wallets, so the scan is not vacuous
        ok &= transcript.envelopes.iter().any(|e| {
            e.to == cbdc::wire::Role::Wallet && cbdc::wire::message_contains_opening(&e.body)
        });
    }
    println!("  scanned {messages} messages across {} scenarios", scripts.len());
    report(11, "information boundary", ok);
}
