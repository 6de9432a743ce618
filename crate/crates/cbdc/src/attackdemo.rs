//! Forgery demonstration against counter-mode concealment.
//!
//! A strawman design hides amounts by XORing them with a keystream,
//! `c = m XOR PRF(key, counter)`. Nothing ties the ciphertext to the
//! amount, so an attacker who submits random bytes gets them accepted
//! whenever they decrypt to any fresh nonzero amount tag. With `b`-bit
//! blocks and `q1` tags already spent, that happens with probability
//! `(2^b - q1 - 1) / 2^b`, close to certainty at practical sizes. The
//! contrast test shows the same attack against a commitment scheme, where
//! acceptance requires a valid opening, goes nowhere.

use rand::{CryptoRng, Rng};
use sha2::{Digest, Sha256};
use std::collections::HashSet;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AttackError {
    #[error("block width must be between 8 and 32 bits")]
    BadBlockBits,
    #[error("spent tags exceed the block space")]
    TooManyTags,
}

/// Toy counter-mode cipher over `block_bits`-bit amount tags.
#[derive(Debug, Clone)]
pub struct ToyCipherConfig {
    pub block_bits: u32,
    pub key: [u8; 32],
}

impl ToyCipherConfig {
    pub fn new(block_bits: u32, key: [u8; 32]) -> Result<Self, AttackError> {
        if !(8..=32).contains(&block_bits) {
            return Err(AttackError::BadBlockBits);
        }
        Ok(ToyCipherConfig { block_bits, key })
    }

    fn mask(&self) -> u64 {
        (1u64 << self.block_bits) - 1
    }

    /// Keystream block for one counter: a keyed hash truncated to the
    /// block width.
    pub fn keystream(&self, counter: u64) -> u64 {
        let mut hasher = Sha256::new();
        hasher.update(b"toy-ctr-v1");
        hasher.update(self.key);
        hasher.update(counter.to_be_bytes());
        let digest = hasher.finalize();
        u64::from_be_bytes(digest[..8].try_into().unwrap()) & self.mask()
    }

    pub fn encrypt(&self, amount_tag: u64, counter: u64) -> u64 {
        (amount_tag & self.mask()) ^ self.keystream(counter)
    }

    pub fn decrypt(&self, ciphertext: u64, counter: u64) -> u64 {
        self.encrypt(ciphertext, counter)
    }
}

/// One forgery attempt: the attacker submits uniformly random bytes as a
/// ciphertext under a fresh counter. The bank decrypts and accepts any
/// nonzero tag it has not seen spent.
pub fn forgery_trial<R: Rng + CryptoRng>(
    config: &ToyCipherConfig,
    spent_tags: &HashSet<u64>,
    counter: u64,
    rng: &mut R,
) -> bool {
    let forged: u64 = rng.gen::<u64>() & config.mask();
    let tag = config.decrypt(forged, counter);
    tag != 0 && !spent_tags.contains(&tag)
}

/// Closed-form success probability of one trial.
pub fn forgery_rate_exact(block_bits: u32, q1: u64) -> Result<f64, AttackError> {
    if !(8..=32).contains(&block_bits) {
        return Err(AttackError::BadBlockBits);
    }
    let space = 1u64 << block_bits;
    if q1 >= space {
        return Err(AttackError::TooManyTags);
    }
    Ok((space - q1 - 1) as f64 / space as f64)
}

/// Distinct nonzero tags standing in for `q1` legitimately spent amounts.
pub fn spent_tag_set(config: &ToyCipherConfig, q1: u64) -> Result<HashSet<u64>, AttackError> {
    if q1 >= 1u64 << config.block_bits {
        return Err(AttackError::TooManyTags);
    }
    Ok((1..=q1).collect())
}

/// Run `trials` independent forgeries and return the empirical success
/// rate.
pub fn forgery_rate_empirical<R: Rng + CryptoRng>(
    config: &ToyCipherConfig,
    q1: u64,
    trials: u64,
    rng: &mut R,
) -> Result<f64, AttackError> {
    let spent = spent_tag_set(config, q1)?;
    let mut successes = 0u64;
    for counter in 0..trials {
        if forgery_trial(config, &spent, counter, rng) {
            successes += 1;
        }
    }
    Ok(successes as f64 / trials as f64)
}
