//! Evolving pseudonymous keys and the supervised identity registry.
//!
//! Wallets never reuse a signing key: each payment uses a fresh keypair
//! derived from a master seed and a counter, so ledger entries carry
//! unlinkable one-time public keys. The issuing bank registers each derived
//! key against the holder's identity, and an oversight authority can compel
//! disclosure with a signed authorization token; every disclosure attempt,
//! granted or refused, lands in an audit log.

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::group::{GroupElement, GroupParams, Scalar};
use crate::schnorr::{self, SchnorrKeyPair, Signature, DOMAIN_AUTH};
use num_bigint::BigUint;
use num_traits::Zero;
use rand::{CryptoRng, Rng};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RegistryError {
    #[error("authorization token invalid")]
    Unauthorized,
    #[error("public key not registered")]
    UnknownPubkey,
}

/// Wallet master secret; the counter advances once per derived key.
#[derive(Debug, Clone)]
pub struct MasterSecret {
    pub seed: [u8; 32],
    pub counter: u64,
}

impl MasterSecret {
    pub fn new(seed: [u8; 32]) -> Self {
        MasterSecret { seed, counter: 0 }
    }

    pub fn random<R: Rng + CryptoRng>(rng: &mut R) -> Self {
        let mut seed = [0u8; 32];
        rng.fill(&mut seed);
        MasterSecret::new(seed)
    }

    /// Derive the keypair at an explicit index without touching the
    /// counter; deterministic, so a wallet can be rebuilt from the seed.
    pub fn derive_keypair(&self, params: &GroupParams, index: u64) -> SchnorrKeyPair {
        let mut salt = 0u8;
        loop {
            let mut hasher = Sha256::new();
            hasher.update(b"cbdc-pseud-v1");
            hasher.update(self.seed);
            hasher.update([salt]);
            hasher.update(index.to_be_bytes());
            let digest = hasher.finalize();
            let x = BigUint::from_bytes_be(&digest) % &params.q;
            if !x.is_zero() {
                return schnorr::keypair_from_private(params, &params.g.clone(), Scalar(x));
            }
            // zero exponent would give the identity pubkey; perturb and retry
            salt = salt.wrapping_add(1);
        }
    }

    /// Derive at the current counter and advance it.
    pub fn next_keypair(&mut self, params: &GroupParams) -> SchnorrKeyPair {
        let kp = self.derive_keypair(params, self.counter);
        self.counter += 1;
        kp
    }
}

/// Token authorizing disclosure of one pseudonym for a stated purpose.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AuthToken {
    pub purpose: String,
    pub signature: Signature,
}

fn auth_message(params: &GroupParams, pubkey: &GroupElement, purpose: &str) -> Vec<u8> {
    let mut m = Vec::new();
    m.extend_from_slice(&params.element_bytes(pubkey));
    m.extend_from_slice(purpose.as_bytes());
    m
}

/// Issue a disclosure token; done by the oversight authority.
pub fn authorize_disclosure<R: Rng + CryptoRng>(
    params: &GroupParams,
    authority: &SchnorrKeyPair,
    pubkey: &GroupElement,
    purpose: &str,
    rng: &mut R,
) -> AuthToken {
    AuthToken {
        purpose: purpose.to_string(),
        signature: schnorr::sign(
            params,
            authority,
            DOMAIN_AUTH,
            &auth_message(params, pubkey, purpose),
            rng,
        ),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AccessLogEntry {
    pub pubkey: GroupElement,
    pub purpose: String,
    pub granted: bool,
}

/// Bank-held mapping from one-time public keys to account identities.
#[derive(Debug, Clone)]
pub struct IdentityRegistry {
    authority_pubkey: GroupElement,
    entries: Vec<(GroupElement, String)>,
    pub access_log: Vec<AccessLogEntry>,
}

impl IdentityRegistry {
    pub fn new(authority_pubkey: GroupElement) -> Self {
        IdentityRegistry {
            authority_pubkey,
            entries: Vec::new(),
            access_log: Vec::new(),
        }
    }

    pub fn register(&mut self, pubkey: GroupElement, identity: &str) {
        self.entries.push((pubkey, identity.to_string()));
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Reveal the identity behind a pseudonym, given a valid token from
    /// the authority. Every attempt is logged.
    pub fn disclose(
        &mut self,
        params: &GroupParams,
        pubkey: &GroupElement,
        token: &AuthToken,
    ) -> Result<String, RegistryError> {
        let valid = schnorr::verify(
            params,
            &params.g,
            &self.authority_pubkey,
            DOMAIN_AUTH,
            &auth_message(params, pubkey, &token.purpose),
            &token.signature,
        );
        let found = self
            .entries
            .iter()
            .find(|(pk, _)| pk == pubkey)
            .map(|(_, id)| id.clone());
        let granted = valid && found.is_some();
        self.access_log.push(AccessLogEntry {
            pubkey: pubkey.clone(),
            purpose: token.purpose.clone(),
            granted,
        });
        if !valid {
            return Err(RegistryError::Unauthorized);
        }
        found.ok_or(RegistryError::UnknownPubkey)
    }
}
