//! Pedersen commitments `c = g^x h^r mod p` with homomorphic combination.

use num_bigint::BigUint;
use num_traits::One;
use rand::{CryptoRng, Rng};

use crate::group::{GroupElement, GroupParams, Scalar};

/// The secret side of a commitment: the committed amount and its randomness.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Opening {
    pub value: Scalar,
    pub randomness: Scalar,
}

impl Opening {
    pub fn new(value: Scalar, randomness: Scalar) -> Self {
        Opening { value, randomness }
    }

    pub fn from_u64(params: &GroupParams, value: u64, randomness: u64) -> Self {
        Opening {
            value: params.scalar_from_biguint(BigUint::from(value)),
            randomness: params.scalar_from_biguint(BigUint::from(randomness)),
        }
    }

    /// The committed amount, assuming it fits a machine word (amounts in
    /// this prototype always do; randomness never round-trips this way).
    pub fn value_u64(&self) -> u64 {
        let digits = self.value.0.to_u64_digits();
        match digits.len() {
            0 => 0,
            1 => digits[0],
            _ => panic!("opening value exceeds u64"),
        }
    }

    /// Fresh opening of `value` with random nonzero `r`.
    pub fn random<R: Rng + CryptoRng>(params: &GroupParams, value: u64, rng: &mut R) -> Self {
        Opening {
            value: params.scalar_from_biguint(BigUint::from(value)),
            randomness: params.random_scalar(rng),
        }
    }
}

/// A concealed value.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Commitment {
    pub point: GroupElement,
}

/// `commit(x, r) = g^x h^r mod p`.
pub fn commit(params: &GroupParams, opening: &Opening) -> Commitment {
    let gx = params.mod_exp(&params.g, &opening.value);
    let hr = params.mod_exp(&params.h, &opening.randomness);
    Commitment {
        point: params.mod_mul(&gx, &hr),
    }
}

/// True iff `c` opens to `opening`.
pub fn open_check(params: &GroupParams, c: &Commitment, opening: &Opening) -> bool {
    commit(params, opening) == *c
}

/// `Π numerators / Π denominators mod p`, the central bank's verification
/// value `z` when applied to a transaction's inputs and outputs.
pub fn combine(
    params: &GroupParams,
    numerators: &[Commitment],
    denominators: &[Commitment],
) -> GroupElement {
    let num = numerators.iter().fold(GroupElement(BigUint::one()), |acc, c| {
        params.mod_mul(&acc, &c.point)
    });
    let den = denominators
        .iter()
        .fold(GroupElement(BigUint::one()), |acc, c| {
            params.mod_mul(&acc, &c.point)
        });
    // den is a product of subgroup members, never zero mod p.
    let den_inv = params.mod_inv(&den).expect("nonzero denominator");
    params.mod_mul(&num, &den_inv)
}

/// Pointwise product: commits to the componentwise sum of the openings.
pub fn homomorphic_add(params: &GroupParams, c1: &Commitment, c2: &Commitment) -> Commitment {
    Commitment {
        point: params.mod_mul(&c1.point, &c2.point),
    }
}
