//! Confidential UTXO ledger prototype for a retail central bank digital
//! currency.
//!
//! Transaction values are hidden inside Pedersen commitments while the
//! central bank still verifies that no money is created: the difference of
//! commitment randomness acts as a Schnorr private key whose public key
//! equals the commitment quotient exactly when inputs and outputs balance.
//! Coinjoin-style aggregation dissolves transaction boundaries for
//! counterparty anonymity, and a Poisson/gamma model quantifies the
//! anonymity-versus-waiting-time trade-off of batching.
//!
//! Module map:
//! - [`group`]: prime-order subgroup arithmetic and parameter generation
//! - [`pedersen`]: commitments `c = g^x h^r` with homomorphic combination
//! - [`schnorr`]: signatures over a configurable base, balance-key derivation
//! - [`rangeproof`]: bit-decomposition proof that a committed value is in `[0, 2^n)`
//! - [`txbuild`]: building, reviewing and verifying concealed transactions
//! - [`ledger`]: the central bank state machine with Merkle confirmations
//! - [`coinjoin`]: transaction aggregation and k-anonymity measurement
//! - [`anonmodel`]: Poisson/gamma analytics and waiting-time simulation
//! - [`pseudonym`]: evolving per-transaction keys and the identity registry
//! - [`attackdemo`]: counter-mode forgery demonstration at toy block sizes
//! - [`wire`]: canonical message encodings, simulated transport, scenarios

pub mod anonmodel;
pub mod encoding;
pub mod attackdemo;
pub mod coinjoin;
pub mod group;
pub mod ledger;
pub mod pedersen;
pub mod pseudonym;
pub mod rangeproof;
pub mod schnorr;
pub mod txbuild;
pub mod wire;

pub use group::{generate_group_params, GroupElement, GroupParams, Scalar};
pub use pedersen::{Commitment, Opening};
pub use txbuild::ConcealedTx;
