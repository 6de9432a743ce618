//! Quantify the trade-off between batch anonymity and waiting time.
//!
//! With payments arriving at rate `lambda`, a batching window of length
//! `t` holds `Poisson(lambda t)` payments, and reaching `k`-anonymity
//! means waiting a `Gamma(k - 1, lambda)` amount of time. The closed-form
//! model and a Monte Carlo simulation are printed side by side.

use cbdc::anonmodel::{
    achieved_k, prob_at_least, simulate_waiting, waiting_mean, waiting_quantile,
};

fn main() {
    let lambda = 1.0;

    println!("window sizing at arrival rate {lambda}/tick:");
    for window in [10.0, 50.0, 100.0, 500.0] {
        let mean = lambda * window;
        let k = achieved_k(mean);
        println!(
            "  window {window:>5}: expect {mean:>4} payments, \
             {k}-anonymity with P(>= {k}) = {:.4}",
            prob_at_least(k, mean).unwrap()
        );
    }

    println!();
    println!("waiting time for k-anonymity (model vs 20000 simulated trials):");
    let stats = simulate_waiting(lambda, 30, 20_000, b"tradeoff").unwrap();
    println!(
        "{:>4} {:>12} {:>12} {:>12} {:>12} {:>12}",
        "k", "model mean", "sim mean", "model p50", "sim p50", "sim p99.9"
    );
    for s in stats.iter().filter(|s| s.k % 5 == 0) {
        println!(
            "{:>4} {:>12.3} {:>12.3} {:>12.3} {:>12.3} {:>12.3}",
            s.k,
            waiting_mean(s.k, lambda),
            s.mean,
            waiting_quantile(s.k, lambda, 0.5).unwrap(),
            s.p50,
            s.p999
        );
    }

    println!();
    println!("doubling the arrival rate halves every latency figure:");
    for rate in [0.5, 1.0, 2.0, 4.0] {
        println!(
            "  lambda {rate:>4}: median wait for 20-anonymity = {:.3} ticks",
            waiting_quantile(20, rate, 0.5).unwrap()
        );
    }
}
