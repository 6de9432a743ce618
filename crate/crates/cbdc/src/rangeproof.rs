//! Bit-decomposition range proof: a committed value lies in `[0, 2^n)`.
//!
//! The value is split into bit commitments `d_i = g^{b_i} h^{s_i}` whose
//! weighted product reconstructs the target commitment exactly (the last
//! bit randomness is solved for), and each bit carries a Fiat-Shamir OR
//! proof that it commits to 0 or 1.

use num_bigint::BigUint;
use num_traits::One;
use rand::{CryptoRng, Rng};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::group::{GroupElement, GroupParams, Scalar};
use crate::pedersen::{Commitment, Opening};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RangeProofError {
    #[error("value out of range [0, 2^{0})")]
    ValueOutOfRange(u32),
    #[error("2^n must be smaller than the subgroup order q")]
    BitWidthTooLarge,
}

/// OR-composition transcript proving one bit commitment hides 0 or 1.
///
/// Verification checks `e0 + e1 = H(context) mod q` and, for both branches,
/// `h^{z_j} = t_j * A_j^{e_j}` where `A_0 = d` and `A_1 = d / g`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitOrProof {
    pub t0: GroupElement,
    pub t1: GroupElement,
    pub e0: Scalar,
    pub e1: Scalar,
    pub z0: Scalar,
    pub z1: Scalar,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RangeProof {
    pub bit_commitments: Vec<Commitment>,
    pub or_proofs: Vec<BitOrProof>,
}

/// Default range width: values up to about 4.29e9 minor units.
pub const DEFAULT_N_BITS: u32 = 32;

fn check_width(params: &GroupParams, n_bits: u32) -> Result<(), RangeProofError> {
    let bound = BigUint::one() << n_bits;
    if bound >= params.q {
        return Err(RangeProofError::BitWidthTooLarge);
    }
    Ok(())
}

/// Challenge binds the params digest, the target commitment, the bit index
/// and both branch commitments, so transcripts cannot be replayed across
/// outputs or positions.
fn bit_challenge(
    params: &GroupParams,
    target: &Commitment,
    index: u32,
    t0: &GroupElement,
    t1: &GroupElement,
) -> Scalar {
    let mut hasher = Sha256::new();
    hasher.update(b"cbdc-rp-v1");
    hasher.update(params.digest());
    hasher.update(params.element_bytes(&target.point));
    hasher.update(index.to_be_bytes());
    hasher.update(params.element_bytes(t0));
    hasher.update(params.element_bytes(t1));
    params.scalar_from_biguint(BigUint::from_bytes_be(&hasher.finalize()))
}

/// Prove that `opening.value` lies in `[0, 2^n_bits)`.
///
/// Bit randomness: `s_0 .. s_{n-2}` random, `s_{n-1}` solved so that
/// `sum 2^i s_i = opening.randomness mod q`, making the weighted product
/// of bit commitments equal the target commitment with no extra proof.
pub fn prove_range<R: Rng + CryptoRng>(
    params: &GroupParams,
    opening: &Opening,
    n_bits: u32,
    rng: &mut R,
) -> Result<RangeProof, RangeProofError> {
    check_width(params, n_bits)?;
    let bound = BigUint::one() << n_bits;
    if opening.value.0 >= bound {
        return Err(RangeProofError::ValueOutOfRange(n_bits));
    }
    let target = crate::pedersen::commit(params, opening);

    let n = n_bits as usize;
    let bits: Vec<bool> = (0..n).map(|i| opening.value.0.bit(i as u64)).collect();

    // choose s_0..s_{n-2}, solve s_{n-1}
    let mut s: Vec<Scalar> = (0..n - 1).map(|_| params.random_scalar(rng)).collect();
    let mut acc = Scalar::from_u64(0);
    for (i, si) in s.iter().enumerate() {
        let w = params.scalar_from_biguint(BigUint::one() << i);
        acc = params.scalar_add(&acc, &params.scalar_mul(&w, si));
    }
    let w_last = params.scalar_from_biguint(BigUint::one() << (n - 1));
    let w_last_inv = params.scalar_inv(&w_last).expect("2^i invertible mod odd q");
    let s_last = params.scalar_mul(
        &params.scalar_sub(&opening.randomness, &acc),
        &w_last_inv,
    );
    s.push(s_last);

    let mut bit_commitments = Vec::with_capacity(n);
    let mut or_proofs = Vec::with_capacity(n);
    let g_inv = params.mod_inv(&params.g).expect("g nonzero");
    for i in 0..n {
        let b = bits[i];
        let d = crate::pedersen::commit(
            params,
            &Opening {
                value: Scalar::from_u64(b as u64),
                randomness: s[i].clone(),
            },
        );
        // A0 = d (bit 0 branch), A1 = d / g (bit 1 branch)
        let a0 = d.point.clone();
        let a1 = params.mod_mul(&d.point, &g_inv);

        // simulate the wrong branch, run the real branch
        let e_sim = params.random_scalar(rng);
        let z_sim = params.random_scalar(rng);
        let a_sim = if b { &a0 } else { &a1 };
        let a_sim_pow = params.mod_exp(a_sim, &e_sim);
        let t_sim = params.mod_mul(
            &params.mod_exp(&params.h, &z_sim),
            &params.mod_inv(&a_sim_pow).expect("subgroup member"),
        );
        let w = params.random_scalar(rng);
        let t_real = params.mod_exp(&params.h, &w);

        let (t0, t1) = if b {
            (t_sim.clone(), t_real.clone())
        } else {
            (t_real.clone(), t_sim.clone())
        };
        let e = bit_challenge(params, &target, i as u32, &t0, &t1);
        let e_real = params.scalar_sub(&e, &e_sim);
        let z_real = params.scalar_add(&w, &params.scalar_mul(&s[i], &e_real));

        let (e0, e1, z0, z1) = if b {
            (e_sim, e_real, z_sim, z_real)
        } else {
            (e_real, e_sim, z_real, z_sim)
        };
        bit_commitments.push(d);
        or_proofs.push(BitOrProof {
            t0,
            t1,
            e0,
            e1,
            z0,
            z1,
        });
    }
    Ok(RangeProof {
        bit_commitments,
        or_proofs,
    })
}

/// Verify a range proof against the target commitment `c`.
pub fn verify_range(
    params: &GroupParams,
    c: &Commitment,
    proof: &RangeProof,
    n_bits: u32,
) -> bool {
    if check_width(params, n_bits).is_err() {
        return false;
    }
    let n = n_bits as usize;
    if proof.bit_commitments.len() != n || proof.or_proofs.len() != n {
        return false;
    }
    let g_inv = match params.mod_inv(&params.g) {
        Ok(v) => v,
        Err(_) => return false,
    };

    // product check: prod d_i^{2^i} must equal c
    let mut product = GroupElement(BigUint::one());
    for (i, d) in proof.bit_commitments.iter().enumerate() {
        if !params.is_member(&d.point) {
            return false;
        }
        let w = params.scalar_from_biguint(BigUint::one() << i);
        product = params.mod_mul(&product, &params.mod_exp(&d.point, &w));
    }
    if product != c.point {
        return false;
    }

    for (i, (d, or)) in proof
        .bit_commitments
        .iter()
        .zip(proof.or_proofs.iter())
        .enumerate()
    {
        let e = bit_challenge(params, c, i as u32, &or.t0, &or.t1);
        if params.scalar_add(&or.e0, &or.e1) != e {
            return false;
        }
        let a0 = d.point.clone();
        let a1 = params.mod_mul(&d.point, &g_inv);
        let lhs0 = params.mod_exp(&params.h, &or.z0);
        let rhs0 = params.mod_mul(&or.t0, &params.mod_exp(&a0, &or.e0));
        if lhs0 != rhs0 {
            return false;
        }
        let lhs1 = params.mod_exp(&params.h, &or.z1);
        let rhs1 = params.mod_mul(&or.t1, &params.mod_exp(&a1, &or.e1));
        if lhs1 != rhs1 {
            return false;
        }
    }
    true
}

/// Proof size in serialized elements/scalars: n bit commitments plus n OR
/// transcripts of two elements and four scalars each.
pub fn proof_size_bytes(params: &GroupParams, n_bits: u32) -> usize {
    let n = n_bits as usize;
    n * params.element_width() + n * (2 * params.element_width() + 4 * params.scalar_width())
}
