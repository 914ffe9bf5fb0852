//! Contribution checks, unmasking, interpolation and tag verification.

use std::collections::BTreeSet;

use num_bigint::BigUint;
use num_traits::One;

use crate::access::ParticipantId;
use crate::codec::{tag, xor_combine, MaskWidth};
use crate::dealer::{PublicParams, SecretPackage};
use crate::error::{Error, Result};
use crate::linepoly::{interpolate_line, secret_of};
use crate::numtheory::mod_exp;
use crate::participant::{Contribution, ParticipantKey, Roster};

/// True iff `x^h0 mod n` equals the contributor's published pseudo-share.
pub fn verify_contribution(
    params: &PublicParams,
    package: &SecretPackage,
    pseudo_share: &BigUint,
    contribution: &Contribution,
) -> bool {
    contribution.x < *params.n()
        && contribution.secret_id == package.secret_id
        && mod_exp(&contribution.x, &package.h0, params.n()).ok().as_ref() == Some(pseudo_share)
}

/// Recovers the secret from exactly one contribution per member of
/// qualified set `set_index`.
///
/// Membership is checked first, then every contribution is verified; all
/// failing contributors are named in [`Error::BadContribution`] before any
/// unmasking happens.
pub fn reconstruct(
    params: &PublicParams,
    roster: &Roster,
    package: &SecretPackage,
    set_index: usize,
    contributions: &[Contribution],
) -> Result<BigUint> {
    let entry = package.entry(set_index)?;
    let mut seen = BTreeSet::new();
    for c in contributions {
        if !entry.gamma.contains(&c.pid) || !seen.insert(&c.pid) {
            return Err(Error::ExtraContribution(c.pid.clone()));
        }
    }
    if let Some(missing) = entry.gamma.iter().find(|pid| !seen.contains(pid)) {
        return Err(Error::MissingContribution(missing.clone()));
    }

    let mut cheaters = Vec::new();
    for c in contributions {
        let ps = roster.pseudo_share(&c.pid)?;
        if c.set_index != set_index || !verify_contribution(params, package, ps, c) {
            cheaters.push(c.pid.clone());
        }
    }
    if !cheaters.is_empty() {
        return Err(Error::BadContribution(cheaters));
    }

    unmask_and_recover(params, package, set_index, contributions.iter().map(|c| &c.x))
}

/// Unmasks `H` with the supplied values and interpolates through the public
/// point. No membership or verification checks: callers that skip
/// [`reconstruct`] get whatever the values produce.
pub fn unmask_and_recover<'a, I>(
    params: &PublicParams,
    package: &SecretPackage,
    set_index: usize,
    xs: I,
) -> Result<BigUint>
where
    I: IntoIterator<Item = &'a BigUint>,
{
    let entry = package.entry(set_index)?;
    let f_d = xor_combine(&entry.masked, xs, params.width())?;
    if f_d >= *params.m() {
        return Err(Error::UnmaskOutOfField);
    }
    let line = interpolate_line(
        (&BigUint::one(), &package.f1),
        (&entry.d, &f_d),
        params.m(),
    )?;
    Ok(secret_of(&line).clone())
}

/// True iff the recovered `secret` reproduces the tag published for
/// qualified set `set_index`.
pub fn verify_secret(package: &SecretPackage, set_index: usize, secret: &BigUint, width: MaskWidth) -> bool {
    match package.entries.get(set_index) {
        Some(entry) => tag(secret, &entry.d, width).is_ok_and(|t| t == entry.tag),
        None => false,
    }
}

/// Combiner-less reconstruction run by one member of the qualified set: the
/// member computes its own value locally and checks every peer's value
/// before recovering the secret itself.
pub fn peer_reconstruct(
    params: &PublicParams,
    roster: &Roster,
    package: &SecretPackage,
    set_index: usize,
    own_key: &ParticipantKey,
    peers: &[Contribution],
) -> Result<BigUint> {
    let own = own_key.contribute(params, package, set_index)?;
    let mut all: Vec<Contribution> = peers
        .iter()
        .filter(|c| c.pid != *own_key.pid())
        .cloned()
        .collect();
    all.push(own);
    reconstruct(params, roster, package, set_index, &all)
}

/// Members of qualified set `set_index` whose contribution is absent.
pub fn missing_members(package: &SecretPackage, set_index: usize, contributions: &[Contribution]) -> Result<Vec<ParticipantId>> {
    let entry = package.entry(set_index)?;
    Ok(entry
        .gamma
        .iter()
        .filter(|pid| !contributions.iter().any(|c| &c.pid == *pid))
        .cloned()
        .collect())
}
