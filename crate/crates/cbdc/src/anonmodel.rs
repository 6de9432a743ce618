//! Poisson/gamma analytics for the anonymity-versus-latency trade-off.
//!
//! Payment arrivals are modelled as a Poisson process with rate `lambda`.
//! A batch collected over a window of length `t` then contains
//! `Poisson(lambda t)` transactions, and the waiting time until a payment
//! is covered by `k - 1` other arrivals is `Gamma(k - 1, lambda)`
//! distributed. Everything here is plain `f64` numerics: log-space Poisson
//! terms and the regularized incomplete gamma function evaluated by series
//! or continued fraction depending on the argument region.

use rand::Rng;
use thiserror::Error;

use crate::group::seeded_rng;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ModelError {
    #[error("parameter out of domain: {0}")]
    Domain(&'static str),
    #[error("iteration failed to converge")]
    NoConvergence,
}

const EPS: f64 = 1e-15;
const MAX_ITER: usize = 10_000;

/// Lanczos approximation (g = 7, 9 terms), accurate to ~1e-15 for x > 0.
pub fn ln_gamma(x: f64) -> f64 {
    const COEF: [f64; 9] = [
        0.999_999_999_999_809_93,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_13,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_571_6e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        // reflection
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = COEF[0];
    for (i, c) in COEF.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + 7.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

/// Series expansion for the regularized lower incomplete gamma, valid and
/// fast for `x < a + 1`.
fn gamma_p_series(a: f64, x: f64) -> Result<f64, ModelError> {
    let mut term = 1.0 / a;
    let mut sum = term;
    for n in 1..MAX_ITER {
        term *= x / (a + n as f64);
        sum += term;
        if term.abs() < sum.abs() * EPS {
            return Ok(sum * (-x + a * x.ln() - ln_gamma(a)).exp());
        }
    }
    Err(ModelError::NoConvergence)
}

/// Continued fraction (modified Lentz) for the regularized upper tail,
/// valid and fast for `x >= a + 1`.
fn gamma_q_cf(a: f64, x: f64) -> Result<f64, ModelError> {
    const FPMIN: f64 = 1e-300;
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / FPMIN;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..MAX_ITER {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < FPMIN {
            d = FPMIN;
        }
        c = b + an / c;
        if c.abs() < FPMIN {
            c = FPMIN;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            return Ok((-x + a * x.ln() - ln_gamma(a)).exp() * h);
        }
    }
    Err(ModelError::NoConvergence)
}

/// Regularized lower incomplete gamma `P(a, x)`.
pub fn gamma_p(a: f64, x: f64) -> Result<f64, ModelError> {
    if a <= 0.0 {
        return Err(ModelError::Domain("shape must be positive"));
    }
    if x < 0.0 {
        return Err(ModelError::Domain("argument must be nonnegative"));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x < a + 1.0 {
        gamma_p_series(a, x)
    } else {
        Ok(1.0 - gamma_q_cf(a, x)?)
    }
}

/// `P(N = k)` for `N ~ Poisson(mean)`, computed in log space so large
/// means do not overflow the factorial.
pub fn poisson_pmf(k: u64, mean: f64) -> Result<f64, ModelError> {
    if mean < 0.0 {
        return Err(ModelError::Domain("mean must be nonnegative"));
    }
    if mean == 0.0 {
        return Ok(if k == 0 { 1.0 } else { 0.0 });
    }
    let kf = k as f64;
    Ok((kf * mean.ln() - mean - ln_gamma(kf + 1.0)).exp())
}

/// `P(N >= k)` for `N ~ Poisson(mean)`.
///
/// Uses the duality with the gamma distribution: at least `k` arrivals in
/// the window means the `k`-th arrival came early, so the tail equals
/// `P(k, mean)`.
pub fn prob_at_least(k: u64, mean: f64) -> Result<f64, ModelError> {
    if k == 0 {
        return Ok(1.0);
    }
    gamma_p(k as f64, mean)
}

/// Batch size met or exceeded with high probability: two standard
/// deviations below the expected count, floored at zero.
pub fn achieved_k(mean: f64) -> u64 {
    (mean - 2.0 * mean.sqrt()).max(0.0).floor() as u64
}

/// CDF of the waiting time until a payment shares a batch with `k - 1`
/// others: `Gamma(k - 1, lambda)` evaluated at `z`.
pub fn waiting_cdf(k: u64, lambda: f64, z: f64) -> Result<f64, ModelError> {
    if lambda <= 0.0 {
        return Err(ModelError::Domain("rate must be positive"));
    }
    if z < 0.0 {
        return Ok(0.0);
    }
    if k <= 1 {
        // the payment is its own batch of one; no waiting
        return Ok(1.0);
    }
    gamma_p((k - 1) as f64, lambda * z)
}

/// Mean of the waiting-time distribution, `(k - 1) / lambda`.
pub fn waiting_mean(k: u64, lambda: f64) -> f64 {
    (k.saturating_sub(1)) as f64 / lambda
}

/// Quantile of the waiting time by bisection on the CDF.
pub fn waiting_quantile(k: u64, lambda: f64, p: f64) -> Result<f64, ModelError> {
    if !(0.0..1.0).contains(&p) {
        return Err(ModelError::Domain("probability must be in [0, 1)"));
    }
    if k <= 1 || p == 0.0 {
        return Ok(0.0);
    }
    let mut lo = 0.0_f64;
    let mut hi = waiting_mean(k, lambda).max(1.0 / lambda);
    while waiting_cdf(k, lambda, hi)? < p {
        hi *= 2.0;
        if hi > 1e18 {
            return Err(ModelError::NoConvergence);
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if waiting_cdf(k, lambda, mid)? < p {
            lo = mid;
        } else {
            hi = mid;
        }
        if (hi - lo) <= 1e-9 * hi.max(1.0) {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Empirical waiting-time summary for one anonymity level.
#[derive(Debug, Clone, PartialEq)]
pub struct WaitingStats {
    pub k: u64,
    pub mean: f64,
    pub p50: f64,
    pub p999: f64,
}

/// Monte Carlo waiting times by simulating the arrival process directly.
///
/// Each trial draws exponential inter-arrival gaps by inverse transform,
/// `-ln(1 - U) / lambda`, and the waiting time for anonymity `k` is the
/// prefix sum of the first `k - 1` gaps.
pub fn simulate_waiting(
    lambda: f64,
    k_max: u64,
    trials: usize,
    seed: &[u8],
) -> Result<Vec<WaitingStats>, ModelError> {
    if lambda <= 0.0 {
        return Err(ModelError::Domain("rate must be positive"));
    }
    if k_max < 1 || trials == 0 {
        return Err(ModelError::Domain("need at least one level and one trial"));
    }
    let mut rng = seeded_rng(seed);
    let levels = k_max as usize;
    let mut samples: Vec<Vec<f64>> = vec![Vec::with_capacity(trials); levels];
    for _ in 0..trials {
        let mut acc = 0.0;
        samples[0].push(0.0);
        for level in 1..levels {
            let u: f64 = rng.gen();
            acc += -(1.0 - u).ln() / lambda;
            samples[level].push(acc);
        }
    }
    let mut out = Vec::with_capacity(levels);
    for (level, mut xs) in samples.into_iter().enumerate() {
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        let quantile = |p: f64| {
            let idx = ((xs.len() as f64 * p) as usize).min(xs.len() - 1);
            xs[idx]
        };
        out.push(WaitingStats {
            k: level as u64 + 1,
            mean,
            p50: quantile(0.5),
            p999: quantile(0.999),
        });
    }
    Ok(out)
}
