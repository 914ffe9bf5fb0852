//! The trusted dealer: parameter setup, publication of secret packages, and
//! the dynamic updates that only ever touch public values.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigUint;
use num_traits::One;
use rand::Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::access::{AccessStructure, ParticipantId, QualifiedSet};
use crate::codec::{hex_int, tag, xor_combine, MaskWidth, Tag};
use crate::error::{Error, Result};
use crate::linepoly::LinePoly;
use crate::numtheory::{
    ceil_sqrt, gcd, gen_prime, is_probable_prime, mod_exp, mod_inv, next_prime_after,
    sample_inclusive,
};
use crate::participant::Roster;

/// The published triple `(g, n, m)` plus the derived mask width.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawParams", into = "RawParams")]
pub struct PublicParams {
    g: BigUint,
    n: BigUint,
    m: BigUint,
    width: MaskWidth,
}

#[derive(Clone, Serialize, Deserialize)]
pub(crate) struct RawParams {
    #[serde(with = "hex_int")]
    g: BigUint,
    #[serde(with = "hex_int")]
    n: BigUint,
    #[serde(with = "hex_int")]
    m: BigUint,
    width: MaskWidth,
}

impl PublicParams {
    /// Checks every published-parameter invariant and derives the width.
    pub fn new(g: BigUint, n: BigUint, m: BigUint) -> Result<Self> {
        if n < BigUint::from(4u32) {
            return Err(Error::invariant("n too small"));
        }
        if m <= n {
            return Err(Error::invariant("m not greater than n"));
        }
        if !is_probable_prime(&m) {
            return Err(Error::invariant("m not prime"));
        }
        if !is_admissible_generator(&g, &n) {
            return Err(Error::invariant("g outside [ceil(sqrt n), n] or not a unit mod n"));
        }
        let width = MaskWidth::for_modulus(&m);
        Ok(PublicParams { g, n, m, width })
    }

    pub fn g(&self) -> &BigUint {
        &self.g
    }

    pub fn n(&self) -> &BigUint {
        &self.n
    }

    pub fn m(&self) -> &BigUint {
        &self.m
    }

    pub fn width(&self) -> MaskWidth {
        self.width
    }
}

impl TryFrom<RawParams> for PublicParams {
    type Error = Error;

    fn try_from(raw: RawParams) -> Result<Self> {
        let params = PublicParams::new(raw.g, raw.n, raw.m)?;
        if params.width != raw.width {
            return Err(Error::invariant("width mismatch"));
        }
        Ok(params)
    }
}

impl From<PublicParams> for RawParams {
    fn from(p: PublicParams) -> Self {
        RawParams {
            g: p.g,
            n: p.n,
            m: p.m,
            width: p.width,
        }
    }
}

/// `g` must lie in `[ceil(sqrt n), n]` and be a unit mod `n`. The unit
/// condition rules out `g = p` and `g = q`.
pub fn is_admissible_generator(g: &BigUint, n: &BigUint) -> bool {
    *g >= ceil_sqrt(n) && g <= n && gcd(g, n).is_one()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SecretId(pub u32);

impl fmt::Display for SecretId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Public values for one qualified set of one secret.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PackageEntry {
    pub gamma: QualifiedSet,
    #[serde(with = "hex_int")]
    pub d: BigUint,
    #[serde(rename = "h", with = "hex_int")]
    pub masked: BigUint,
    pub tag: Tag,
}

/// Everything published for one secret.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SecretPackage {
    pub secret_id: SecretId,
    #[serde(with = "hex_int")]
    pub ps0: BigUint,
    #[serde(with = "hex_int")]
    pub h0: BigUint,
    #[serde(with = "hex_int")]
    pub f1: BigUint,
    pub entries: Vec<PackageEntry>,
}

impl SecretPackage {
    pub fn entry(&self, index: usize) -> Result<&PackageEntry> {
        self.entries.get(index).ok_or(Error::IndexOutOfRange {
            index,
            len: self.entries.len(),
        })
    }

    pub fn structure(&self) -> Result<AccessStructure> {
        AccessStructure::validate_minimal(self.entries.iter().map(|e| e.gamma.clone()))
    }

    pub fn d_values(&self) -> impl Iterator<Item = &BigUint> {
        self.entries.iter().map(|e| &e.d)
    }

    /// SHA-256 of the package's canonical JSON encoding.
    pub fn fingerprint(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("package serializes");
        hex::encode(Sha256::digest(bytes))
    }
}

/// Random choices made for one (re-)sharing.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShareDraws {
    pub s0: BigUint,
    pub a1: BigUint,
    pub d: Vec<BigUint>,
}

impl ShareDraws {
    pub fn sample<R: Rng + ?Sized>(
        params: &PublicParams,
        phi: &BigUint,
        set_count: usize,
        rng: &mut R,
    ) -> Result<Self> {
        let two = BigUint::from(2u32);
        let s0 = loop {
            let candidate = sample_inclusive(rng, &two, params.n());
            if gcd(&candidate, phi).is_one() {
                break candidate;
            }
        };
        let a1 = sample_inclusive(rng, &BigUint::one(), &(params.m() - 1u32));
        let d = sample_abscissae(params, set_count, &BTreeSet::new(), rng)?;
        Ok(ShareDraws { s0, a1, d })
    }
}

/// `count` distinct values from `[2, m-1]` avoiding `taken`; collisions are
/// resampled. Abscissa 1 is reserved for the public point.
fn sample_abscissae<R: Rng + ?Sized>(
    params: &PublicParams,
    count: usize,
    taken: &BTreeSet<BigUint>,
    rng: &mut R,
) -> Result<Vec<BigUint>> {
    let available = params.m() - 2u32;
    if BigUint::from(count + taken.len()) > available {
        return Err(Error::Parameter("field too small for that many qualified sets".into()));
    }
    let (low, high) = (BigUint::from(2u32), params.m() - 1u32);
    let mut seen = taken.clone();
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let d = sample_inclusive(rng, &low, &high);
        if seen.insert(d.clone()) {
            out.push(d);
        }
    }
    Ok(out)
}

/// Private per-secret state the dealer keeps so later updates can reuse the
/// same `s0`, polynomial and secret.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DealerSecretRecord {
    #[serde(with = "hex_int")]
    pub s0: BigUint,
    #[serde(with = "hex_int")]
    pub k0: BigUint,
    #[serde(with = "hex_int")]
    pub a1: BigUint,
    /// Last package published for this secret.
    pub package: SecretPackage,
}

impl DealerSecretRecord {
    pub fn d_list(&self) -> Vec<BigUint> {
        self.package.d_values().cloned().collect()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RemovalReport {
    pub renewed: Vec<SecretPackage>,
    /// Secrets withdrawn because every qualified set mentioned the removed
    /// participant.
    pub suspended: Vec<SecretId>,
}

/// What `remove_participant` does with a secret that would be left with no
/// qualified set.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum EmptyStructurePolicy {
    /// Refuse the whole removal, changing nothing.
    #[default]
    Reject,
    /// Withdraw the secret and drop its record.
    Suspend,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DealerState {
    #[serde(with = "hex_int")]
    p: BigUint,
    #[serde(with = "hex_int")]
    q: BigUint,
    #[serde(with = "hex_int")]
    phi: BigUint,
    records: BTreeMap<SecretId, DealerSecretRecord>,
    next_secret: u32,
}

/// Generates two distinct `bits_per_prime`-bit primes and publishes
/// parameters over them.
pub fn setup<R: Rng + ?Sized>(bits_per_prime: u64, rng: &mut R) -> Result<(PublicParams, DealerState)> {
    if bits_per_prime < 4 {
        return Err(Error::Parameter("primes must have at least 4 bits".into()));
    }
    let p = gen_prime(bits_per_prime, rng)?;
    let q = loop {
        let q = gen_prime(bits_per_prime, rng)?;
        if q != p {
            break q;
        }
    };
    setup_from_primes(p, q, rng)
}

/// Setup over caller-chosen primes; `g` is sampled from `[ceil(sqrt n), n]`
/// until it is a unit.
pub fn setup_from_primes<R: Rng + ?Sized>(
    p: BigUint,
    q: BigUint,
    rng: &mut R,
) -> Result<(PublicParams, DealerState)> {
    let n = check_primes(&p, &q)?;
    let low = ceil_sqrt(&n);
    let g = loop {
        let g = sample_inclusive(rng, &low, &n);
        if is_admissible_generator(&g, &n) {
            break g;
        }
    };
    setup_with_generator(p, q, g)
}

/// Fully determined setup, for fixtures.
pub fn setup_with_generator(p: BigUint, q: BigUint, g: BigUint) -> Result<(PublicParams, DealerState)> {
    let n = check_primes(&p, &q)?;
    let m = next_prime_after(&n);
    let params = PublicParams::new(g, n, m).map_err(|e| match e {
        Error::InvariantViolation(rule) => Error::Parameter(rule),
        other => other,
    })?;
    let phi = (&p - 1u32) * (&q - 1u32);
    let state = DealerState {
        p,
        q,
        phi,
        records: BTreeMap::new(),
        next_secret: 1,
    };
    Ok((params, state))
}

fn check_primes(p: &BigUint, q: &BigUint) -> Result<BigUint> {
    if p == q {
        return Err(Error::Parameter("p and q must differ".into()));
    }
    if !is_probable_prime(p) || !is_probable_prime(q) {
        return Err(Error::Parameter("p and q must be prime".into()));
    }
    Ok(p * q)
}

impl DealerState {
    pub fn phi(&self) -> &BigUint {
        &self.phi
    }

    pub fn record(&self, id: SecretId) -> Result<&DealerSecretRecord> {
        self.records.get(&id).ok_or(Error::UnknownSecret(id))
    }

    pub fn secret_ids(&self) -> impl Iterator<Item = SecretId> + '_ {
        self.records.keys().copied()
    }

    /// Checks the private state matches the published parameters.
    pub fn check_against(&self, params: &PublicParams) -> Result<()> {
        if &self.p * &self.q != *params.n() {
            return Err(Error::invariant("dealer primes do not match n"));
        }
        if (&self.p - 1u32) * (&self.q - 1u32) != self.phi {
            return Err(Error::invariant("phi does not match p and q"));
        }
        Ok(())
    }

    pub fn share_secret<R: Rng + ?Sized>(
        &mut self,
        params: &PublicParams,
        roster: &Roster,
        secret: BigUint,
        structure: AccessStructure,
        rng: &mut R,
    ) -> Result<SecretPackage> {
        precheck(params, roster, &secret, &structure)?;
        let draws = ShareDraws::sample(params, &self.phi, structure.set_count(), rng)?;
        self.share_secret_with(params, roster, secret, structure, draws)
    }

    /// `share_secret` with every random choice supplied by the caller.
    pub fn share_secret_with(
        &mut self,
        params: &PublicParams,
        roster: &Roster,
        secret: BigUint,
        structure: AccessStructure,
        draws: ShareDraws,
    ) -> Result<SecretPackage> {
        let id = SecretId(self.next_secret);
        let record = self.build_record(params, roster, id, secret, &structure, draws)?;
        self.next_secret += 1;
        let package = record.package.clone();
        self.records.insert(id, record);
        Ok(package)
    }

    /// Full re-share of `id` under a fresh `s0`, polynomial and abscissae.
    pub fn renew_secret<R: Rng + ?Sized>(
        &mut self,
        params: &PublicParams,
        roster: &Roster,
        id: SecretId,
        new_secret: BigUint,
        rng: &mut R,
    ) -> Result<SecretPackage> {
        let structure = self.record(id)?.package.structure()?;
        precheck(params, roster, &new_secret, &structure)?;
        let draws = ShareDraws::sample(params, &self.phi, structure.set_count(), rng)?;
        self.renew_secret_with(params, roster, id, new_secret, draws)
    }

    pub fn renew_secret_with(
        &mut self,
        params: &PublicParams,
        roster: &Roster,
        id: SecretId,
        new_secret: BigUint,
        draws: ShareDraws,
    ) -> Result<SecretPackage> {
        let structure = self.record(id)?.package.structure()?;
        let record = self.build_record(params, roster, id, new_secret, &structure, draws)?;
        let package = record.package.clone();
        self.records.insert(id, record);
        Ok(package)
    }

    pub fn add_qualified_set<R: Rng + ?Sized>(
        &mut self,
        params: &PublicParams,
        roster: &Roster,
        id: SecretId,
        gamma: QualifiedSet,
        rng: &mut R,
    ) -> Result<SecretPackage> {
        let record = self.record(id)?;
        record.package.structure()?.with_added(gamma.clone())?;
        check_enrolled(roster, &gamma)?;
        let taken: BTreeSet<BigUint> = record.package.d_values().cloned().collect();
        let d = sample_abscissae(params, 1, &taken, rng)?.remove(0);
        self.add_qualified_set_with(params, roster, id, gamma, d)
    }

    /// Appends one entry computed from the retained `s0`, `a1` and secret;
    /// existing entries are left as they are.
    pub fn add_qualified_set_with(
        &mut self,
        params: &PublicParams,
        roster: &Roster,
        id: SecretId,
        gamma: QualifiedSet,
        d: BigUint,
    ) -> Result<SecretPackage> {
        let record = self.record(id)?;
        record.package.structure()?.with_added(gamma.clone())?;
        check_enrolled(roster, &gamma)?;
        check_abscissa(params, &d)?;
        if record.package.d_values().any(|existing| *existing == d) {
            return Err(Error::Parameter("abscissa already used by this secret".into()));
        }
        let poly = LinePoly::new(record.k0.clone(), record.a1.clone(), params.m().clone())?;
        let entry = build_entry(params, roster, &poly, &record.s0, gamma, d)?;
        let record = self.records.get_mut(&id).expect("checked above");
        record.package.entries.push(entry);
        Ok(record.package.clone())
    }

    /// Withdraws the public values of qualified set `index`.
    pub fn remove_qualified_set(&mut self, id: SecretId, index: usize) -> Result<SecretPackage> {
        let record = self.records.get_mut(&id).ok_or(Error::UnknownSecret(id))?;
        record.package.structure()?.with_removed(index)?;
        record.package.entries.remove(index);
        Ok(record.package.clone())
    }

    /// Drops `pid` from the roster and from every structure mentioning it,
    /// then renews each affected secret (same secret value, fresh draws).
    pub fn remove_participant<R: Rng + ?Sized>(
        &mut self,
        params: &PublicParams,
        roster: &mut Roster,
        pid: &ParticipantId,
        policy: EmptyStructurePolicy,
        rng: &mut R,
    ) -> Result<RemovalReport> {
        if !roster.contains(pid) {
            return Err(Error::UnknownParticipant(pid.clone()));
        }
        let mut shrunk = Vec::new();
        let mut emptied = Vec::new();
        for (&id, record) in &self.records {
            let structure = record.package.structure()?;
            if !structure.mentions(pid) {
                continue;
            }
            match structure.filtered(|set| !set.contains(pid)) {
                Some((remaining, kept)) => shrunk.push((id, remaining, kept)),
                None => emptied.push(id),
            }
        }
        if !emptied.is_empty() && policy == EmptyStructurePolicy::Reject {
            return Err(Error::StructureBecameEmpty(emptied));
        }

        roster.remove(pid)?;
        for id in &emptied {
            self.records.remove(id);
        }
        let mut report = RemovalReport {
            renewed: Vec::with_capacity(shrunk.len()),
            suspended: emptied,
        };
        for (id, remaining, kept) in shrunk {
            let record = self.records.get_mut(&id).expect("collected above");
            record.package.entries = kept
                .iter()
                .map(|&i| record.package.entries[i].clone())
                .collect();
            debug_assert_eq!(record.package.structure()?, remaining);
            let secret = record.k0.clone();
            report
                .renewed
                .push(self.renew_secret(params, roster, id, secret, rng)?);
        }
        Ok(report)
    }

    fn build_record(
        &self,
        params: &PublicParams,
        roster: &Roster,
        id: SecretId,
        secret: BigUint,
        structure: &AccessStructure,
        draws: ShareDraws,
    ) -> Result<DealerSecretRecord> {
        precheck(params, roster, &secret, structure)?;
        let ShareDraws { s0, a1, d } = draws;
        if s0 < BigUint::from(2u32) || s0 > *params.n() || !gcd(&s0, &self.phi).is_one() {
            return Err(Error::Parameter("s0 must lie in [2, n] and be coprime to phi(n)".into()));
        }
        if d.len() != structure.set_count() {
            return Err(Error::Parameter("need exactly one abscissa per qualified set".into()));
        }
        let distinct: BTreeSet<&BigUint> = d.iter().collect();
        if distinct.len() != d.len() {
            return Err(Error::Parameter("abscissae must be distinct".into()));
        }
        d.iter().try_for_each(|d| check_abscissa(params, d))?;

        let poly = LinePoly::new(secret.clone(), a1.clone(), params.m().clone())?;
        let entries = structure
            .minimal_sets()
            .iter()
            .zip(d)
            .map(|(gamma, d)| build_entry(params, roster, &poly, &s0, gamma.clone(), d))
            .collect::<Result<Vec<_>>>()?;
        let package = SecretPackage {
            secret_id: id,
            ps0: mod_exp(params.g(), &s0, params.n())?,
            h0: mod_inv(&s0, &self.phi)?,
            f1: poly.eval(&BigUint::one())?,
            entries,
        };
        Ok(DealerSecretRecord {
            s0,
            k0: secret,
            a1,
            package,
        })
    }
}

fn precheck(
    params: &PublicParams,
    roster: &Roster,
    secret: &BigUint,
    structure: &AccessStructure,
) -> Result<()> {
    if secret >= params.m() {
        return Err(Error::SecretTooLarge);
    }
    structure
        .minimal_sets()
        .iter()
        .try_for_each(|set| check_enrolled(roster, set))
}

fn check_enrolled(roster: &Roster, set: &QualifiedSet) -> Result<()> {
    match set.iter().find(|pid| !roster.contains(pid)) {
        Some(pid) => Err(Error::UnknownParticipant(pid.clone())),
        None => Ok(()),
    }
}

fn check_abscissa(params: &PublicParams, d: &BigUint) -> Result<()> {
    if *d < BigUint::from(2u32) || d >= params.m() {
        return Err(Error::Parameter("abscissa must lie in [2, m-1]".into()));
    }
    Ok(())
}

/// `H = f(d) xor ps_1^s0 xor ... xor ps_l^s0` plus the tag `F(K, d)`.
fn build_entry(
    params: &PublicParams,
    roster: &Roster,
    poly: &LinePoly,
    s0: &BigUint,
    gamma: QualifiedSet,
    d: BigUint,
) -> Result<PackageEntry> {
    let masks = gamma
        .iter()
        .map(|pid| mod_exp(roster.pseudo_share(pid)?, s0, params.n()))
        .collect::<Result<Vec<_>>>()?;
    let masked = xor_combine(&poly.eval(&d)?, &masks, params.width())?;
    let tag = tag(poly.secret(), &d, params.width())?;
    Ok(PackageEntry {
        gamma,
        d,
        masked,
        tag,
    })
}
