//! Coinjoin-style transaction aggregation.
//!
//! Several payment components are merged into one concealed transaction
//! whose inputs and outputs are shuffled together, dissolving the pairing
//! between payer and payee. The aggregate balance key is the sum of the
//! component balance secrets, so one signature proves conservation for the
//! whole batch.

use rand::seq::SliceRandom;
use rand::{CryptoRng, Rng};
use thiserror::Error;

use crate::group::{seeded_rng, GroupElement, GroupParams, Scalar};
use crate::pedersen::Opening;
use crate::rangeproof::RangeProof;
use crate::schnorr::{self, SchnorrKeyPair};
use crate::txbuild::{
    self, canonical_message, ConcealedTx, InputRef, OpeningPacket, OutputRecord, TxBuildError,
};
use num_traits::Zero;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CoinjoinError {
    #[error("no components to aggregate")]
    EmptyBatch,
    #[error("component balance secrets cancel; re-randomize one component")]
    ZeroAggregateKey,
    #[error("component build failed: {0}")]
    Build(#[from] TxBuildError),
}

/// One payer's contribution to a batch: their spent inputs, concealed
/// outputs with range proofs, the balance secret `alpha` for just this
/// component, and the keys needed to co-sign the final aggregate.
///
/// Components live inside the payer's bank, which in this model custodies
/// the payer's signing keys, so carrying them here mirrors who actually
/// holds what.
#[derive(Debug, Clone)]
pub struct TxComponent {
    pub inputs: Vec<InputRef>,
    pub outputs: Vec<OutputRecord>,
    pub range_proofs: Vec<RangeProof>,
    pub balance_secret: Scalar,
    pub payer_keys: Vec<SchnorrKeyPair>,
}

/// Build a component from owned inputs and requested payouts.
///
/// Mirrors transaction building but defers both signatures: they can only
/// cover the final aggregate, which is not known yet.
pub fn build_component<R: Rng + CryptoRng>(
    params: &GroupParams,
    spend_openings: &[(InputRef, Opening)],
    payouts: &[(u64, GroupElement)],
    payer_keys: &[SchnorrKeyPair],
    n_bits: u32,
    rng: &mut R,
) -> Result<(TxComponent, OpeningPacket), CoinjoinError> {
    if spend_openings.is_empty() || payouts.is_empty() {
        return Err(CoinjoinError::Build(TxBuildError::Empty));
    }
    let in_total: u64 = spend_openings
        .iter()
        .map(|(_, o)| o.value_u64())
        .sum();
    let out_total: u64 = payouts.iter().map(|(v, _)| *v).sum();
    if in_total != out_total {
        return Err(CoinjoinError::Build(TxBuildError::UnbalancedAmounts));
    }

    let mut outputs = Vec::with_capacity(payouts.len());
    let mut range_proofs = Vec::with_capacity(payouts.len());
    let mut out_openings = Vec::with_capacity(payouts.len());
    for (value, owner) in payouts {
        let opening = Opening::random(params, *value, rng);
        outputs.push(OutputRecord {
            commitment: crate::pedersen::commit(params, &opening),
            owner_pubkey: owner.clone(),
        });
        range_proofs.push(
            crate::rangeproof::prove_range(params, &opening, n_bits, rng)
                .map_err(TxBuildError::from)?,
        );
        out_openings.push(opening);
    }

    let balance_secret = component_secret(params, spend_openings, &out_openings);
    let component = TxComponent {
        inputs: spend_openings.iter().map(|(r, _)| r.clone()).collect(),
        outputs,
        range_proofs,
        balance_secret,
        payer_keys: payer_keys.to_vec(),
    };
    let packet = OpeningPacket {
        inputs: spend_openings
            .iter()
            .enumerate()
            .map(|(i, (_, o))| (i, o.clone()))
            .collect(),
        outputs: out_openings.into_iter().enumerate().collect(),
    };
    Ok((component, packet))
}

/// `alpha` for one component: input randomness minus output randomness.
pub fn component_secret(
    params: &GroupParams,
    spend_openings: &[(InputRef, Opening)],
    out_openings: &[Opening],
) -> Scalar {
    let mut alpha = Scalar::zero();
    for (_, opening) in spend_openings {
        alpha = params.scalar_add(&alpha, &opening.randomness);
    }
    for opening in out_openings {
        alpha = params.scalar_sub(&alpha, &opening.randomness);
    }
    alpha
}

/// Merge components into a single signed transaction.
///
/// Inputs and (output, range proof) pairs from all components are
/// concatenated and shuffled under a deterministic seed so the batch is
/// reproducible. Every distinct payer key co-signs the aggregate message
/// and one balance signature covers the sum of the component secrets.
pub fn aggregate<R: Rng + CryptoRng>(
    params: &GroupParams,
    components: &[TxComponent],
    shuffle_seed: &[u8],
    rng: &mut R,
) -> Result<ConcealedTx, CoinjoinError> {
    if components.is_empty() {
        return Err(CoinjoinError::EmptyBatch);
    }
    let mut inputs: Vec<InputRef> = Vec::new();
    let mut out_pairs: Vec<(OutputRecord, RangeProof)> = Vec::new();
    let mut alpha = Scalar::zero();
    for component in components {
        inputs.extend(component.inputs.iter().cloned());
        out_pairs.extend(
            component
                .outputs
                .iter()
                .cloned()
                .zip(component.range_proofs.iter().cloned()),
        );
        alpha = params.scalar_add(&alpha, &component.balance_secret);
    }
    if alpha.0.is_zero() {
        return Err(CoinjoinError::ZeroAggregateKey);
    }

    let mut shuffle_rng = seeded_rng(shuffle_seed);
    inputs.shuffle(&mut shuffle_rng);
    out_pairs.shuffle(&mut shuffle_rng);
    let (outputs, range_proofs): (Vec<_>, Vec<_>) = out_pairs.into_iter().unzip();

    let balance_keypair = schnorr::keypair_from_private(params, &params.h.clone(), alpha);
    let message = canonical_message(params, &inputs, &outputs);
    let balance_sig = schnorr::sign(
        params,
        &balance_keypair,
        schnorr::DOMAIN_BALANCE,
        &message,
        rng,
    );

    let mut tx = ConcealedTx {
        inputs,
        outputs,
        range_proofs,
        balance_sig,
        payer_sigs: Vec::new(),
    };
    let mut signed: Vec<GroupElement> = Vec::new();
    for component in components {
        for keypair in &component.payer_keys {
            if signed.contains(&keypair.public) {
                continue;
            }
            let sig = txbuild::payer_sign(params, &tx, keypair, rng);
            tx.payer_sigs.push((keypair.public.clone(), sig));
            signed.push(keypair.public.clone());
        }
    }
    Ok(tx)
}

/// What one payer can attribute inside an aggregate: their own inputs and
/// whichever outputs they hold openings for. Everything else is opaque.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PayerView {
    pub own_input_indices: Vec<usize>,
    pub openable_output_indices: Vec<usize>,
    pub foreign_inputs: usize,
    pub foreign_outputs: usize,
}

pub fn extract_view(
    params: &GroupParams,
    tx: &ConcealedTx,
    payer_pubkey: &GroupElement,
    held_openings: &[Opening],
) -> PayerView {
    let own_input_indices: Vec<usize> = tx
        .inputs
        .iter()
        .enumerate()
        .filter(|(_, input)| &input.owner_pubkey == payer_pubkey)
        .map(|(i, _)| i)
        .collect();
    let openable_output_indices: Vec<usize> = tx
        .outputs
        .iter()
        .enumerate()
        .filter(|(_, output)| {
            held_openings
                .iter()
                .any(|o| crate::pedersen::open_check(params, &output.commitment, o))
        })
        .map(|(i, _)| i)
        .collect();
    PayerView {
        foreign_inputs: tx.inputs.len() - own_input_indices.len(),
        foreign_outputs: tx.outputs.len() - openable_output_indices.len(),
        own_input_indices,
        openable_output_indices,
    }
}

/// Counterparty anonymity of a transaction: the smaller of the distinct
/// input-owner and distinct output-owner counts. An observer matching a
/// payer to a payee picks among at least this many candidates on the
/// thinner side.
pub fn anonymity_of(tx: &ConcealedTx) -> usize {
    let mut in_owners: Vec<&GroupElement> = Vec::new();
    for input in &tx.inputs {
        if !in_owners.contains(&&input.owner_pubkey) {
            in_owners.push(&input.owner_pubkey);
        }
    }
    let mut out_owners: Vec<&GroupElement> = Vec::new();
    for output in &tx.outputs {
        if !out_owners.contains(&&output.owner_pubkey) {
            out_owners.push(&output.owner_pubkey);
        }
    }
    in_owners.len().min(out_owners.len())
}

/// When a pending batch is released.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BatchPolicy {
    /// Flush everything pending each time `window` ticks elapse.
    FixedWindow { window: u64 },
    /// Flush once `k_min` distinct payers are pending, or after the oldest
    /// component has waited `timeout` ticks.
    Threshold { k_min: usize, timeout: u64 },
}

#[derive(Debug, Clone)]
pub struct Batcher {
    pub policy: BatchPolicy,
    pending: Vec<(u64, TxComponent)>,
    window_start: u64,
}

impl Batcher {
    pub fn new(policy: BatchPolicy, now: u64) -> Self {
        Batcher {
            policy,
            pending: Vec::new(),
            window_start: now,
        }
    }

    pub fn submit(&mut self, component: TxComponent, now: u64) {
        self.pending.push((now, component));
    }

    pub fn pending_len(&self) -> usize {
        self.pending.len()
    }

    fn distinct_payers(&self) -> usize {
        let mut owners: Vec<&GroupElement> = Vec::new();
        for (_, component) in &self.pending {
            for input in &component.inputs {
                if !owners.contains(&&input.owner_pubkey) {
                    owners.push(&input.owner_pubkey);
                }
            }
        }
        owners.len()
    }

    /// Release the pending components if the policy says the batch is due.
    pub fn poll(&mut self, now: u64) -> Option<Vec<TxComponent>> {
        let due = match self.policy {
            BatchPolicy::FixedWindow { window } => now >= self.window_start + window,
            BatchPolicy::Threshold { k_min, timeout } => {
                self.distinct_payers() >= k_min
                    || self
                        .pending
                        .first()
                        .is_some_and(|(t, _)| now >= t + timeout)
            }
        };
        if !due || self.pending.is_empty() {
            if due {
                self.window_start = now;
            }
            return None;
        }
        self.window_start = now;
        Some(self.pending.drain(..).map(|(_, c)| c).collect())
    }
}
