//! Prime-order multiplicative subgroup arithmetic and parameter generation.
//!
//! All cryptographic modules work over a subgroup of `Z_p^*` of prime order
//! `q` (with `q | p-1`), generated by `g`, together with a second generator
//! `h` whose discrete log relative to `g` is unknown to every party.

use num_bigint::{BigUint, RandBigInt};
use num_traits::{One, Zero};
use rand::{CryptoRng, Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use sha2::{Digest, Sha256};
use thiserror::Error;

/// Rounds of Miller-Rabin giving error probability at most 2^-80.
const MILLER_RABIN_ROUNDS: usize = 40;

/// Candidate budget for prime search before giving up.
const PRIME_SEARCH_BUDGET: usize = 100_000;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GroupError {
    #[error("parameter generation failed for the given bit length and seed")]
    GenerationFailure,
    #[error("empty seed")]
    EmptySeed,
    #[error("modular inverse of a non-invertible element")]
    NoInverse,
}

/// An exponent reduced mod `q`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Scalar(pub BigUint);

/// A member of the order-`q` subgroup of `Z_p^*`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroupElement(pub BigUint);

impl Scalar {
    pub fn from_u64(v: u64) -> Self {
        Scalar(BigUint::from(v))
    }

    pub fn zero() -> Self {
        Scalar(BigUint::zero())
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }
}

impl GroupElement {
    pub fn from_u64(v: u64) -> Self {
        GroupElement(BigUint::from(v))
    }

    pub fn is_one(&self) -> bool {
        self.0.is_one()
    }
}

/// Profile identifier carried in the parameter file header.
pub const PROFILE_TEST: u8 = 0;
pub const PROFILE_PROD: u8 = 1;

/// Public group parameters `(p, q, g, h)`.
///
/// `h` is derived by hashing into the subgroup (default), so nobody knows
/// the trapdoor exponent `a` with `h = g^a`. A ceremony-mode constructor
/// that records `a` exists for tests exercising the binding argument.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupParams {
    pub p: BigUint,
    pub q: BigUint,
    pub g: GroupElement,
    pub h: GroupElement,
    pub profile: u8,
}

impl GroupParams {
    /// The hand-checkable test group: p = 23, q = 11, g = 2, h = 8.
    ///
    /// 2 has order 11 mod 23 and 8 = 2^3 shares that order.
    pub fn test_profile() -> Self {
        GroupParams {
            p: BigUint::from(23u32),
            q: BigUint::from(11u32),
            g: GroupElement::from_u64(2),
            h: GroupElement::from_u64(8),
            profile: PROFILE_TEST,
        }
    }

    /// Ceremony-mode construction: `h = g^a mod p` with the trapdoor
    /// exponent returned to the caller. Only tests should use this.
    pub fn with_trapdoor(p: BigUint, q: BigUint, g: GroupElement, a: &Scalar) -> (Self, Scalar) {
        let h = GroupElement(g.0.modpow(&a.0, &p));
        (
            GroupParams {
                p,
                q,
                g,
                h,
                profile: PROFILE_TEST,
            },
            a.clone(),
        )
    }

    /// Width in bytes of a serialized group element.
    pub fn element_width(&self) -> usize {
        ((self.p.bits() as usize) + 7) / 8
    }

    /// Width in bytes of a serialized scalar.
    pub fn scalar_width(&self) -> usize {
        ((self.q.bits() as usize) + 7) / 8
    }

    pub fn element_bytes(&self, e: &GroupElement) -> Vec<u8> {
        to_fixed_be(&e.0, self.element_width())
    }

    pub fn scalar_bytes(&self, s: &Scalar) -> Vec<u8> {
        to_fixed_be(&s.0, self.scalar_width())
    }

    /// Digest over the canonical parameter encoding; used for domain
    /// separation in every Fiat-Shamir challenge.
    pub fn digest(&self) -> [u8; 32] {
        let mut hasher = Sha256::new();
        hasher.update(b"cbdc-params-v1");
        let w = self.element_width();
        hasher.update(to_fixed_be(&self.p, w));
        hasher.update(to_fixed_be(&self.q, w));
        hasher.update(to_fixed_be(&self.g.0, w));
        hasher.update(to_fixed_be(&self.h.0, w));
        hasher.finalize().into()
    }

    /// `base^e mod p`.
    pub fn mod_exp(&self, base: &GroupElement, e: &Scalar) -> GroupElement {
        GroupElement(base.0.modpow(&e.0, &self.p))
    }

    /// `a * b mod p`.
    pub fn mod_mul(&self, a: &GroupElement, b: &GroupElement) -> GroupElement {
        GroupElement((&a.0 * &b.0) % &self.p)
    }

    /// `x^-1 mod p` by extended Euclid; orders of magnitude cheaper than
    /// the Fermat exponentiation at 2048-bit moduli.
    pub fn mod_inv(&self, x: &GroupElement) -> Result<GroupElement, GroupError> {
        inverse_mod(&x.0, &self.p)
            .map(GroupElement)
            .ok_or(GroupError::NoInverse)
    }

    pub fn scalar_add(&self, a: &Scalar, b: &Scalar) -> Scalar {
        Scalar((&a.0 + &b.0) % &self.q)
    }

    pub fn scalar_sub(&self, a: &Scalar, b: &Scalar) -> Scalar {
        Scalar(((&a.0 + &self.q) - (&b.0 % &self.q)) % &self.q)
    }

    pub fn scalar_mul(&self, a: &Scalar, b: &Scalar) -> Scalar {
        Scalar((&a.0 * &b.0) % &self.q)
    }

    pub fn scalar_inv(&self, a: &Scalar) -> Result<Scalar, GroupError> {
        inverse_mod(&a.0, &self.q)
            .map(Scalar)
            .ok_or(GroupError::NoInverse)
    }

    pub fn scalar_from_biguint(&self, v: BigUint) -> Scalar {
        Scalar(v % &self.q)
    }

    /// Membership check: value in [1, p) with value^q = 1 mod p.
    pub fn is_member(&self, e: &GroupElement) -> bool {
        !e.0.is_zero() && e.0 < self.p && e.0.modpow(&self.q, &self.p).is_one()
    }

    /// Uniform scalar in [1, q), matching draws from `Z_q^*`.
    pub fn random_scalar<R: Rng + CryptoRng>(&self, rng: &mut R) -> Scalar {
        loop {
            let v = rng.gen_biguint_below(&self.q);
            if !v.is_zero() {
                return Scalar(v);
            }
        }
    }
}

/// Big-endian fixed-width encoding, left-padded with zeros.
/// `x^-1 mod m` for coprime `x`, via the extended Euclidean algorithm.
fn inverse_mod(x: &BigUint, m: &BigUint) -> Option<BigUint> {
    use num_bigint::BigInt;
    use num_integer::Integer;
    if x.is_zero() {
        return None;
    }
    let e = BigInt::from(x.clone()).extended_gcd(&BigInt::from(m.clone()));
    if !e.gcd.is_one() {
        return None;
    }
    let m_int = BigInt::from(m.clone());
    let inv = e.x.mod_floor(&m_int);
    inv.to_biguint()
}

pub fn to_fixed_be(v: &BigUint, width: usize) -> Vec<u8> {
    let b = v.to_bytes_be();
    assert!(b.len() <= width, "value too wide for field");
    let mut out = vec![0u8; width - b.len()];
    out.extend_from_slice(&b);
    out
}

/// Seeded RNG used everywhere deterministic behaviour is required.
pub fn seeded_rng(seed: &[u8]) -> ChaCha20Rng {
    let mut hasher = Sha256::new();
    hasher.update(b"cbdc-rng-v1");
    hasher.update(seed);
    let digest: [u8; 32] = hasher.finalize().into();
    ChaCha20Rng::from_seed(digest)
}

/// Deterministic parameter generation: `p` of `p_bits` bits, a 256-bit
/// (or `p_bits/2`-bit, whichever is smaller) prime `q` dividing `p - 1`,
/// `g` of order `q`, `h` hashed into the subgroup.
pub fn generate_group_params(p_bits: u64, seed: &[u8]) -> Result<GroupParams, GroupError> {
    if seed.is_empty() {
        return Err(GroupError::EmptySeed);
    }
    if p_bits < 32 {
        return Err(GroupError::GenerationFailure);
    }
    let q_bits = 256.min(p_bits / 2);
    let mut rng = seeded_rng(&[b"params", seed].concat());

    for _ in 0..64 {
        let q = match random_prime(&mut rng, q_bits) {
            Some(q) => q,
            None => continue,
        };
        // Search for p = q*c + 1 prime with exactly p_bits bits.
        let c_bits = p_bits - q_bits;
        for _ in 0..PRIME_SEARCH_BUDGET / 64 {
            let mut c = rng.gen_biguint(c_bits);
            c.set_bit(c_bits - 1, true);
            c.set_bit(0, false); // q odd, so c must be even for p to be odd
            let p = &q * &c + 1u32;
            if p.bits() != p_bits || !is_probable_prime(&p, &mut rng) {
                continue;
            }
            let g = match find_generator(&p, &q, &mut rng) {
                Some(g) => g,
                None => continue,
            };
            let mut partial = GroupParams {
                p,
                q,
                g,
                h: GroupElement(BigUint::one()),
                profile: if p_bits >= 2048 {
                    PROFILE_PROD
                } else {
                    PROFILE_TEST
                },
            };
            partial.h = derive_h(&partial, b"cbdc-h-v1")?;
            return Ok(partial);
        }
    }
    Err(GroupError::GenerationFailure)
}

/// Hash-to-subgroup derivation of the second generator:
/// `h = Hash(tag || ctr)^((p-1)/q) mod p`, re-hashing while the result
/// is 1 or collides with `g`.
pub fn derive_h(params: &GroupParams, domain_tag: &[u8]) -> Result<GroupElement, GroupError> {
    let cofactor = (&params.p - 1u32) / &params.q;
    for counter in 0u32..4096 {
        let mut hasher = Sha256::new();
        hasher.update(domain_tag);
        hasher.update(params.element_bytes(&params.g));
        hasher.update(to_fixed_be(&params.p, params.element_width()));
        hasher.update(counter.to_be_bytes());
        let cand = BigUint::from_bytes_be(&hasher.finalize()) % &params.p;
        if cand.is_zero() {
            continue;
        }
        let h = cand.modpow(&cofactor, &params.p);
        if !h.is_one() && h != params.g.0 {
            return Ok(GroupElement(h));
        }
    }
    Err(GroupError::GenerationFailure)
}

fn find_generator<R: RngCore>(p: &BigUint, q: &BigUint, rng: &mut R) -> Option<GroupElement> {
    let cofactor = (p - 1u32) / q;
    for _ in 0..256 {
        let u = rng.gen_biguint_below(p);
        if u < BigUint::from(2u32) {
            continue;
        }
        let g = u.modpow(&cofactor, p);
        if !g.is_one() {
            return Some(GroupElement(g));
        }
    }
    None
}

fn random_prime<R: RngCore>(rng: &mut R, bits: u64) -> Option<BigUint> {
    for _ in 0..PRIME_SEARCH_BUDGET {
        let mut cand = rng.gen_biguint(bits);
        cand.set_bit(bits - 1, true);
        cand.set_bit(0, true);
        if is_probable_prime(&cand, rng) {
            return Some(cand);
        }
    }
    None
}

const SMALL_PRIMES: [u32; 30] = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89,
    97, 101, 103, 107, 109, 113,
];

/// Miller-Rabin with enough rounds for error at most 2^-80.
pub fn is_probable_prime<R: RngCore>(n: &BigUint, rng: &mut R) -> bool {
    if n < &BigUint::from(2u32) {
        return false;
    }
    for &sp in SMALL_PRIMES.iter() {
        let spb = BigUint::from(sp);
        if n == &spb {
            return true;
        }
        if (n % spb).is_zero() {
            return false;
        }
    }
    let n_minus_1 = n - 1u32;
    let two = BigUint::from(2u32);
    let s = n_minus_1.trailing_zeros().unwrap_or(0);
    let d = &n_minus_1 >> s;
    'witness: for _ in 0..MILLER_RABIN_ROUNDS {
        let a = rng.gen_biguint_range(&two, &n_minus_1);
        let mut x = a.modpow(&d, n);
        if x.is_one() || x == n_minus_1 {
            continue;
        }
        for _ in 0..s.saturating_sub(1) {
            x = x.modpow(&two, n);
            if x == n_minus_1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}
