//! Multi-secret sharing over generalized monotone access structures.
//!
//! Participants choose their own shares `s` and publish only `ps = g^s mod n`.
//! For every secret the dealer publishes a degree-1 polynomial's public point
//! `(1, f(1))` and, per minimal qualified set, the value `f(d)` masked with
//! `ps_k^s0 mod n` for each member `k`. Members unmask with `ps0^s_k`, which
//! anyone can check against `ps_k` using the published `h0`, and the
//! recovered secret is checked against a published tag.
//!
//! Module map:
//! - [`numtheory`]: primes, modular exponentiation and inverse
//! - [`access`]: access structures as antichains of minimal sets
//! - [`linepoly`]: lines over Z_m
//! - [`codec`]: fixed-width encoding, XOR masking, tags
//! - [`dealer`]: setup, sharing, dynamic updates
//! - [`participant`]: keys, roster, contributions
//! - [`combiner`]: verification and reconstruction
//! - [`bulletin`]: the public board document

pub mod access;
pub mod bulletin;
pub mod codec;
pub mod combiner;
pub mod dealer;
mod error;
pub mod linepoly;
pub mod numtheory;
pub mod participant;

pub use access::{AccessStructure, ParticipantId, QualifiedSet};
pub use bulletin::Board;
pub use codec::{MaskWidth, Tag};
pub use dealer::{
    DealerSecretRecord, DealerState, EmptyStructurePolicy, PackageEntry, PublicParams,
    RemovalReport, SecretId, SecretPackage, ShareDraws,
};
pub use error::{Error, Result};
pub use linepoly::LinePoly;
pub use participant::{Contribution, ParticipantKey, Roster};
