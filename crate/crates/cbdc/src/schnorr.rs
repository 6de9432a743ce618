//! Schnorr signatures over a configurable base element.
//!
//! Payer keys live over base `g`; the balance proof of a concealed
//! transaction signs over base `h` with private key
//! `alpha = sum(input randomness) - sum(output randomness) mod q`,
//! so the public key `beta = h^alpha` equals the commitment quotient `z`
//! exactly when the transaction balances.

use num_bigint::BigUint;
use rand::{CryptoRng, Rng};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::group::{GroupElement, GroupParams, Scalar};

/// Domain-separation prefix for payer signatures (base `g`).
pub const DOMAIN_PAYER: u8 = 0x01;
/// Domain-separation prefix for balance signatures (base `h`).
pub const DOMAIN_BALANCE: u8 = 0x02;
/// Domain-separation prefix for confirmation signatures by the central bank.
pub const DOMAIN_CONFIRM: u8 = 0x03;
/// Domain-separation prefix for identity-disclosure authorization tokens.
pub const DOMAIN_AUTH: u8 = 0x04;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SchnorrError {
    #[error("balance key is zero; resample one output randomness")]
    ZeroAlpha,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SchnorrKeyPair {
    pub base: GroupElement,
    pub private: Scalar,
    pub public: GroupElement,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Signature {
    pub s: Scalar,
    pub e: Scalar,
}

/// Fresh keypair over `base`: private uniform in `Z_q^*`, public = base^private.
pub fn keygen<R: Rng + CryptoRng>(
    params: &GroupParams,
    base: &GroupElement,
    rng: &mut R,
) -> SchnorrKeyPair {
    let private = params.random_scalar(rng);
    keypair_from_private(params, base, private)
}

pub fn keypair_from_private(
    params: &GroupParams,
    base: &GroupElement,
    private: Scalar,
) -> SchnorrKeyPair {
    let public = params.mod_exp(base, &private);
    SchnorrKeyPair {
        base: base.clone(),
        private,
        public,
    }
}

/// `e = H(domain || params digest || t || m) mod q`.
fn challenge(params: &GroupParams, domain: u8, t: &GroupElement, message: &[u8]) -> Scalar {
    let mut hasher = Sha256::new();
    hasher.update([domain]);
    hasher.update(params.digest());
    hasher.update(params.element_bytes(t));
    hasher.update(message);
    params.scalar_from_biguint(BigUint::from_bytes_be(&hasher.finalize()))
}

/// Sign with a fresh nonce: `t = base^k`, `e = H(t || m)`, `s = k - x*e mod q`.
pub fn sign<R: Rng + CryptoRng>(
    params: &GroupParams,
    keypair: &SchnorrKeyPair,
    domain: u8,
    message: &[u8],
    rng: &mut R,
) -> Signature {
    let k = params.random_scalar(rng);
    let t = params.mod_exp(&keypair.base, &k);
    let e = challenge(params, domain, &t, message);
    let s = params.scalar_sub(&k, &params.scalar_mul(&keypair.private, &e));
    Signature { s, e }
}

/// Recompute `t' = base^s * public^e` and check `H(t' || m) = e`.
pub fn verify(
    params: &GroupParams,
    base: &GroupElement,
    public: &GroupElement,
    domain: u8,
    message: &[u8],
    sig: &Signature,
) -> bool {
    let t = params.mod_mul(
        &params.mod_exp(base, &sig.s),
        &params.mod_exp(public, &sig.e),
    );
    challenge(params, domain, &t, message) == sig.e
}

/// Test seam: sign with an injected nonce and challenge so the hand-checkable
/// vectors of the worked test group can be asserted exactly.
#[cfg(any(test, feature = "test-seam"))]
pub fn sign_with_parts(
    params: &GroupParams,
    keypair: &SchnorrKeyPair,
    k: &Scalar,
    e: &Scalar,
) -> Signature {
    let s = params.scalar_sub(k, &params.scalar_mul(&keypair.private, e));
    Signature {
        s,
        e: e.clone(),
    }
}

/// Test seam mirror of `verify`: checks the algebraic identity
/// `base^s * public^e = base^k` against an injected challenge.
#[cfg(any(test, feature = "test-seam"))]
pub fn verify_with_injected_challenge(
    params: &GroupParams,
    base: &GroupElement,
    public: &GroupElement,
    expected_t: &GroupElement,
    sig: &Signature,
) -> bool {
    let t = params.mod_mul(
        &params.mod_exp(base, &sig.s),
        &params.mod_exp(public, &sig.e),
    );
    t == *expected_t
}

/// Balance key of a concealed transaction:
/// `alpha = (sum r_i - sum r'_j) mod q`, public key `beta = h^alpha`.
///
/// A zero alpha is signalled so the transaction builder can resample one
/// output randomness; beta would otherwise be the degenerate identity.
pub fn balance_key(
    params: &GroupParams,
    input_randomness: &[Scalar],
    output_randomness: &[Scalar],
) -> Result<SchnorrKeyPair, SchnorrError> {
    let zero = Scalar::from_u64(0);
    let sum_in = input_randomness
        .iter()
        .fold(zero.clone(), |acc, r| params.scalar_add(&acc, r));
    let sum_out = output_randomness
        .iter()
        .fold(zero, |acc, r| params.scalar_add(&acc, r));
    let alpha = params.scalar_sub(&sum_in, &sum_out);
    if alpha.is_zero() {
        return Err(SchnorrError::ZeroAlpha);
    }
    Ok(keypair_from_private(params, &params.h.clone(), alpha))
}
