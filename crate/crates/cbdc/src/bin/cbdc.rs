//! Thin command line front end.
//!
//! The library's examples are the primary interface; this binary only
//! exposes the same capabilities for scripting. Ledger state is kept as a
//! replayable scenario script (a "world" file): every mutating command
//! appends a line and re-runs the script deterministically, so the file is
//! both the state and its audit trail.

use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

use cbdc::anonmodel;
use cbdc::attackdemo::{forgery_rate_empirical, forgery_rate_exact, ToyCipherConfig};
use cbdc::encoding::{decode_params, encode_params};
use cbdc::group::{generate_group_params, seeded_rng, GroupParams};
use cbdc::ledger::mint_genesis;
use cbdc::pseudonym::MasterSecret;
use cbdc::txbuild::{build_concealed_tx, central_verify, payer_sign, InputRef};
use cbdc::wire::{run_scenario, ScenarioConfig};

#[derive(Parser)]
#[command(name = "cbdc", about = "Confidential CBDC ledger prototype")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate group parameters and write them to a file.
    ParamsGen {
        /// Modulus size; the test profile ignores this.
        #[arg(long, default_value_t = 2048)]
        bits: u32,
        /// "test" for the tiny hand-checkable group, "prod" to generate.
        #[arg(long, default_value = "prod")]
        profile: String,
        #[arg(long, default_value = "cbdc-params")]
        seed: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Derive a wallet keypair from a seed and print it.
    Keygen {
        #[arg(long)]
        params: PathBuf,
        #[arg(long)]
        seed: String,
        /// Derivation index within the wallet.
        #[arg(long, default_value_t = 0)]
        index: u64,
    },
    /// Record a minting event in a world file.
    Mint {
        #[arg(long)]
        world: PathBuf,
        name: String,
        amount: u64,
    },
    /// Record a payment in a world file and print the verification report.
    Pay {
        #[arg(long)]
        world: PathBuf,
        payer: String,
        payee: String,
        amount: u64,
    },
    /// Queue payments for aggregation, or flush the pending batch.
    Batch {
        #[arg(long)]
        world: PathBuf,
        /// "payer payee amount" triple; repeatable. With no queue entries
        /// the pending batch is flushed.
        #[arg(long)]
        queue: Vec<String>,
        /// Flush after queueing.
        #[arg(long)]
        flush: bool,
    },
    /// Re-verify every confirmation in a world file.
    VerifyConfirmation {
        #[arg(long)]
        world: PathBuf,
    },
    /// Monte Carlo waiting-time simulation.
    Simulate {
        #[arg(long, default_value_t = 1.0)]
        lambda: f64,
        #[arg(long, default_value_t = 10)]
        k_max: u64,
        #[arg(long, default_value_t = 10_000)]
        trials: usize,
        #[arg(long, default_value = "simulate")]
        seed: String,
    },
    /// Closed-form anonymity model queries.
    Model {
        #[arg(long, default_value_t = 1.0)]
        lambda: f64,
        /// Batching window length.
        #[arg(long, default_value_t = 100.0)]
        window: f64,
        /// Anonymity target.
        #[arg(long, default_value_t = 80)]
        k: u64,
    },
    /// Time transaction building and verification.
    Bench {
        #[arg(long, default_value_t = 256)]
        bits: u32,
        #[arg(long, default_value_t = 20)]
        txs: usize,
        #[arg(long, default_value_t = 8)]
        range_bits: u32,
    },
    /// Forgery rates against the strawman counter-mode scheme.
    AttackDemo {
        #[arg(long, default_value_t = 16)]
        block_bits: u32,
        #[arg(long, default_value_t = 1000)]
        q1: u64,
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
    },
    /// Run a scenario script and print its transcript.
    Scenario {
        script: PathBuf,
        #[arg(long, default_value = "scenario")]
        seed: String,
    },
}

fn load_world(path: &PathBuf) -> std::io::Result<String> {
    match std::fs::read_to_string(path) {
        Ok(s) => Ok(s),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(String::new()),
        Err(e) => Err(e),
    }
}

/// Append lines to the world script, re-run it, and print the last events.
fn world_step(world: &PathBuf, new_lines: &[String]) -> Result<(), String> {
    let mut script = load_world(world).map_err(|e| e.to_string())?;
    for line in new_lines {
        script.push_str(line);
        script.push('\n');
    }
    let transcript =
        run_scenario(ScenarioConfig::default(), &script).map_err(|e| e.to_string())?;
    std::fs::write(world, &script).map_err(|e| e.to_string())?;
    for line in transcript.lines.iter().rev().take(new_lines.len() + 1).rev() {
        println!("{line}");
    }
    if let Some(report) = transcript.reports.last() {
        println!(
            "last verification: payer_sig={} range={} balance={}",
            report.payer_sig_ok, report.range_ok, report.balance_ok
        );
    }
    if let Some(root) = transcript.final_root {
        println!("confirmation root: {}", hex::encode(root));
    }
    Ok(())
}

fn run() -> Result<(), String> {
    match Cli::parse().command {
        Command::ParamsGen {
            bits,
            profile,
            seed,
            out,
        } => {
            let params = match profile.as_str() {
                "test" => GroupParams::test_profile(),
                "prod" => generate_group_params(bits.into(), seed.as_bytes())
                    .map_err(|e| e.to_string())?,
                other => return Err(format!("unknown profile {other}")),
            };
            std::fs::write(&out, encode_params(&params)).map_err(|e| e.to_string())?;
            println!(
                "wrote {} ({} bit modulus)",
                out.display(),
                params.p.bits()
            );
            Ok(())
        }
        Command::Keygen {
            params,
            seed,
            index,
        } => {
            let bytes = std::fs::read(&params).map_err(|e| e.to_string())?;
            let params = decode_params(&bytes).map_err(|e| e.to_string())?;
            use sha2::Digest;
            let mut seed32 = [0u8; 32];
            seed32.copy_from_slice(&sha2::Sha256::digest(seed.as_bytes()));
            let wallet = MasterSecret::new(seed32);
            let kp = wallet.derive_keypair(&params, index);
            println!("private: {}", hex::encode(params.scalar_bytes(&kp.private)));
            println!("public:  {}", hex::encode(params.element_bytes(&kp.public)));
            Ok(())
        }
        Command::Mint {
            world,
            name,
            amount,
        } => world_step(&world, &[format!("MINT {name} {amount}")]),
        Command::Pay {
            world,
            payer,
            payee,
            amount,
        } => world_step(&world, &[format!("PAY {payer} {payee} {amount}")]),
        Command::Batch {
            world,
            queue,
            flush,
        } => {
            let mut lines: Vec<String> = queue.iter().map(|q| format!("QUEUE {q}")).collect();
            if flush || queue.is_empty() {
                lines.push("BATCH".to_string());
            }
            world_step(&world, &lines)
        }
        Command::VerifyConfirmation { world } => {
            let script = load_world(&world).map_err(|e| e.to_string())?;
            if script.is_empty() {
                return Err("empty world file".to_string());
            }
            let transcript =
                run_scenario(ScenarioConfig::default(), &script).map_err(|e| e.to_string())?;
            let accepted = transcript.reports.iter().filter(|r| r.accepted()).count();
            println!(
                "replayed {} submissions, {} accepted",
                transcript.reports.len(),
                accepted
            );
            match transcript.final_root {
                Some(root) => {
                    println!("final confirmation root: {}", hex::encode(root));
                    Ok(())
                }
                None => Err("no confirmed transactions".to_string()),
            }
        }
        Command::Simulate {
            lambda,
            k_max,
            trials,
            seed,
        } => {
            let stats = anonmodel::simulate_waiting(lambda, k_max, trials, seed.as_bytes())
                .map_err(|e| e.to_string())?;
            println!("{:>4} {:>12} {:>12} {:>12} {:>12}", "k", "mean", "model", "p50", "p99.9");
            for s in &stats {
                println!(
                    "{:>4} {:>12.4} {:>12.4} {:>12.4} {:>12.4}",
                    s.k,
                    s.mean,
                    anonmodel::waiting_mean(s.k, lambda),
                    s.p50,
                    s.p999
                );
            }
            Ok(())
        }
        Command::Model { lambda, window, k } => {
            let mean = lambda * window;
            let p = anonmodel::prob_at_least(k, mean).map_err(|e| e.to_string())?;
            println!("arrival rate {lambda}, window {window}: expected batch size {mean}");
            println!("P(batch size >= {k}) = {p:.6}");
            println!("anonymity achieved with ~97.7% confidence: {}", anonmodel::achieved_k(mean));
            for q in [0.5, 0.9, 0.999] {
                let z = anonmodel::waiting_quantile(k, lambda, q).map_err(|e| e.to_string())?;
                println!("waiting time for {k}-anonymity, q{:.1}%: {z:.4}", q * 100.0);
            }
            Ok(())
        }
        Command::Bench {
            bits,
            txs,
            range_bits,
        } => {
            let t0 = std::time::Instant::now();
            let params = generate_group_params(bits.into(), b"bench").map_err(|e| e.to_string())?;
            println!("params ({bits} bit): {:?}", t0.elapsed());
            let mut rng = seeded_rng(b"bench-run");
            let payer = cbdc::schnorr::keygen(&params, &params.g.clone(), &mut rng);
            let payee = cbdc::schnorr::keygen(&params, &params.g.clone(), &mut rng);
            let payouts: Vec<(u64, _)> = (0..txs).map(|_| (9u64, payer.public.clone())).collect();
            let (state, packet) = mint_genesis(&params, &payouts, range_bits, &mut rng);
            let mut build_total = std::time::Duration::ZERO;
            let mut verify_total = std::time::Duration::ZERO;
            for (i, rec) in state.live_utxos.values().enumerate() {
                let opening = packet
                    .outputs
                    .iter()
                    .find(|(j, _)| *j == rec.index as usize)
                    .unwrap()
                    .1
                    .clone();
                let input = InputRef {
                    utxo_id: rec.utxo_id,
                    owner_pubkey: rec.owner_pubkey.clone(),
                    commitment: rec.commitment.clone(),
                };
                let t = std::time::Instant::now();
                let (mut tx, _) = build_concealed_tx(
                    &params,
                    &[(input, opening)],
                    &[(4, payee.public.clone()), (5, payer.public.clone())],
                    range_bits,
                    &mut rng,
                )
                .map_err(|e| e.to_string())?;
                let sig = payer_sign(&params, &tx, &payer, &mut rng);
                tx.payer_sigs.push((payer.public.clone(), sig));
                build_total += t.elapsed();
                let t = std::time::Instant::now();
                let report = central_verify(&state, &params, &tx, range_bits);
                verify_total += t.elapsed();
                if !report.accepted() {
                    return Err(format!("bench tx {i} rejected: {report:?}"));
                }
            }
            println!("{txs} txs, 1 input, 2 outputs, {range_bits} range bits");
            println!("build:  {:?} total, {:?}/tx", build_total, build_total / txs as u32);
            println!("verify: {:?} total, {:?}/tx", verify_total, verify_total / txs as u32);
            Ok(())
        }
        Command::AttackDemo {
            block_bits,
            q1,
            trials,
        } => {
            let exact = forgery_rate_exact(block_bits, q1).map_err(|e| e.to_string())?;
            let config = ToyCipherConfig::new(block_bits, [7u8; 32]).map_err(|e| e.to_string())?;
            let mut rng = seeded_rng(b"attack-cli");
            let empirical =
                forgery_rate_empirical(&config, q1, trials, &mut rng).map_err(|e| e.to_string())?;
            println!("counter-mode concealment, {block_bits}-bit blocks, {q1} spent tags");
            println!("forgery success rate: exact {exact:.5}, observed {empirical:.5} over {trials} trials");
            Ok(())
        }
        Command::Scenario { script, seed } => {
            let text = std::fs::read_to_string(&script).map_err(|e| e.to_string())?;
            let config = ScenarioConfig {
                seed: seed.into_bytes(),
                ..ScenarioConfig::default()
            };
            let transcript = run_scenario(config, &text).map_err(|e| e.to_string())?;
            for line in &transcript.lines {
                println!("{line}");
            }
            println!("messages exchanged: {}", transcript.envelopes.len());
            println!("transcript digest: {}", hex::encode(transcript.digest()));
            if transcript.central_bank_saw_opening() {
                return Err("central bank received a value opening".to_string());
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
