//! Drive wallets, banks and the central bank through a scripted day of
//! payments, including a double spend and a forged signature, and check
//! the transcript.

use cbdc::wire::{run_scenario, Role, ScenarioConfig};

fn main() {
    let script = "\
        # mint working balances\n\
        MINT alice 7\n\
        MINT bob 6\n\
        MINT carol 5\n\
        # a direct payment\n\
        PAY alice bob 4\n\
        # three payments aggregated into one batch\n\
        QUEUE alice dora 2\n\
        QUEUE bob eve 3\n\
        QUEUE carol frank 4\n\
        BATCH\n\
        # attacks\n\
        EXPECT-REJECT REPLAY\n\
        EXPECT-REJECT FORGE-SIG bob alice 1\n\
    ";
    let transcript = run_scenario(ScenarioConfig::default(), script).unwrap();

    println!("event log:");
    for line in &transcript.lines {
        println!("  {line}");
    }
    println!();
    println!("messages exchanged: {}", transcript.envelopes.len());
    let to_cb = transcript
        .envelopes
        .iter()
        .filter(|e| e.to == Role::CentralBank)
        .count();
    println!("messages to the central bank: {to_cb}");
    println!(
        "central bank ever saw a value opening: {}",
        transcript.central_bank_saw_opening()
    );
    println!(
        "final merkle root: {}",
        hex::encode(transcript.final_root.unwrap())
    );
    println!("transcript digest: {}", hex::encode(transcript.digest()));

    // the same seed reproduces the same run, byte for byte
    let again = run_scenario(ScenarioConfig::default(), script).unwrap();
    assert_eq!(transcript.digest(), again.digest());
    assert_eq!(transcript.envelopes, again.envelopes);
    println!("re-run with same seed: identical transcript");
}
