//! In-memory multi-party simulation with cheater injection.
//!
//! Builds a whole deployment from a seed, runs every qualified set's
//! reconstruction, every strict subset of every minimal set, and a few
//! random unauthorized coalitions, and reports each session's outcome.

use std::collections::BTreeSet;
use std::time::Instant;

use msss::combiner::{reconstruct, unmask_and_recover, verify_secret};
use msss::dealer::setup;
use msss::numtheory::{gcd, sample_inclusive};
use msss::{
    AccessStructure, Contribution, Error, ParticipantId, ParticipantKey, PublicParams,
    QualifiedSet, Roster, SecretPackage,
};
use num_bigint::BigUint;
use num_traits::One;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::Serialize;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SimConfig {
    pub participants: usize,
    pub secrets: usize,
    /// Upper bound on minimal sets per secret; each secret draws 1..=max_sets.
    pub max_sets: usize,
    /// Largest minimal-set size; 0 means up to the whole roster.
    pub max_set_size: usize,
    /// Tampered contributions injected into every qualified session.
    pub cheaters_per_session: usize,
    /// Random unauthorized coalitions tried per secret.
    pub coalitions_per_secret: usize,
    pub prime_bits: u64,
    pub seed: u64,
    #[serde(skip)]
    pub timings: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            participants: 5,
            secrets: 3,
            max_sets: 4,
            max_set_size: 0,
            cheaters_per_session: 0,
            coalitions_per_secret: 3,
            prime_bits: 16,
            seed: 42,
            timings: false,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.participants == 0 {
            return Err("need at least one participant".into());
        }
        if self.secrets == 0 {
            return Err("need at least one secret".into());
        }
        if self.max_sets == 0 {
            return Err("max_sets must be at least 1".into());
        }
        if self.prime_bits < 4 {
            return Err("primes need at least 4 bits".into());
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SessionKind {
    Qualified,
    StrictSubset,
    Coalition,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Outcome {
    /// Recovered value equals the shared secret and its tag verifies.
    Recovered,
    /// Contribution checks named the listed cheaters.
    CheatersDetected,
    /// Unauthorized pool: unmasking failed or the tag rejected the value.
    Rejected,
    /// Unauthorized pool produced a value whose tag verified.
    FalseAcceptance,
    Failed(String),
}

#[derive(Clone, Debug, Serialize)]
pub struct Session {
    pub secret_id: u32,
    pub set_index: Option<usize>,
    pub kind: SessionKind,
    pub members: Vec<ParticipantId>,
    pub injected_cheaters: Vec<ParticipantId>,
    pub detected_cheaters: Vec<ParticipantId>,
    pub outcome: Outcome,
    pub tag_ok: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub micros: Option<u64>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Summary {
    pub qualified_sessions: usize,
    pub qualified_recovered: usize,
    pub unauthorized_sessions: usize,
    pub unauthorized_accepted: usize,
    pub cheaters_injected: usize,
    pub cheaters_detected: usize,
    pub cheaters_missed: usize,
    pub failures: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub config: SimConfig,
    pub n_bits: u64,
    pub m_bits: u64,
    pub structures: Vec<String>,
    pub sessions: Vec<Session>,
    pub summary: Summary,
}

impl Report {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

struct Deployment {
    params: PublicParams,
    keys: Vec<ParticipantKey>,
    roster: Roster,
    shared: Vec<(BigUint, SecretPackage)>,
}

pub fn run_simulation(config: &SimConfig) -> Result<Report, String> {
    config.validate()?;
    let mut rng = ChaCha20Rng::seed_from_u64(config.seed);
    let deployment = deploy(config, &mut rng).map_err(|e| e.to_string())?;
    let Deployment {
        params,
        keys,
        roster,
        shared,
    } = &deployment;

    let mut sessions = Vec::new();
    for (secret, package) in shared {
        for (j, entry) in package.entries.iter().enumerate() {
            sessions.push(qualified_session(config, params, keys, roster, package, secret, j, &mut rng));
            let members: Vec<&ParticipantId> = entry.gamma.iter().collect();
            for mask in 1..(1u64 << members.len()) - 1 {
                let subset: QualifiedSet = members
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| mask & (1 << i) != 0)
                    .map(|(_, p)| (*p).clone())
                    .collect();
                sessions.push(unauthorized_session(
                    config,
                    params,
                    keys,
                    package,
                    SessionKind::StrictSubset,
                    &subset,
                    Some(j),
                ));
            }
        }
        let structure = package.structure().map_err(|e| e.to_string())?;
        for _ in 0..config.coalitions_per_secret {
            if let Some(coalition) = unauthorized_coalition(&structure, keys, &mut rng) {
                sessions.push(unauthorized_session(
                    config,
                    params,
                    keys,
                    package,
                    SessionKind::Coalition,
                    &coalition,
                    None,
                ));
            }
        }
    }

    let summary = summarize(&sessions);
    Ok(Report {
        config: config.clone(),
        n_bits: params.n().bits(),
        m_bits: params.m().bits(),
        structures: shared
            .iter()
            .map(|(_, p)| p.structure().map(|s| s.to_string()).unwrap_or_default())
            .collect(),
        sessions,
        summary,
    })
}

fn deploy(config: &SimConfig, rng: &mut ChaCha20Rng) -> msss::Result<Deployment> {
    let (params, mut dealer) = setup(config.prime_bits, rng)?;
    let keys: Vec<ParticipantKey> = (1..=config.participants)
        .map(|i| {
            let pid = ParticipantId::new(format!("P{i}")).expect("valid id");
            ParticipantKey::generate(&params, pid, rng)
        })
        .collect();
    let roster: Roster = keys
        .iter()
        .map(|k| (k.pid().clone(), k.pseudo_share().clone()))
        .collect();
    let mut shared = Vec::with_capacity(config.secrets);
    for _ in 0..config.secrets {
        let structure = random_antichain(config, &keys, rng);
        let secret = sample_inclusive(rng, &BigUint::ZERO, &(params.m() - 1u32));
        let package = dealer.share_secret(&params, &roster, secret.clone(), structure, rng)?;
        shared.push((secret, package));
    }
    Ok(Deployment {
        params,
        keys,
        roster,
        shared,
    })
}

/// Draws random non-empty subsets, keeping those that preserve the
/// antichain, until the target count is reached or attempts run out.
pub fn random_antichain<R: Rng + ?Sized>(
    config: &SimConfig,
    keys: &[ParticipantKey],
    rng: &mut R,
) -> AccessStructure {
    let target = rng.gen_range(1..=config.max_sets);
    let max_size = match config.max_set_size {
        0 => keys.len(),
        s => s.min(keys.len()),
    };
    let mut structure: Option<AccessStructure> = None;
    let mut attempts = 0;
    while structure.as_ref().map_or(0, |s| s.set_count()) < target && attempts < 64 {
        attempts += 1;
        let size = rng.gen_range(1..=max_size);
        let set: QualifiedSet = keys
            .choose_multiple(rng, size)
            .map(|k| k.pid().clone())
            .collect();
        structure = match structure {
            None => Some(AccessStructure::validate_minimal([set]).expect("non-empty set")),
            Some(s) => Some(s.with_added(set).unwrap_or(s)),
        };
    }
    structure.expect("first attempt always succeeds")
}

fn unauthorized_coalition<R: Rng + ?Sized>(
    structure: &AccessStructure,
    keys: &[ParticipantKey],
    rng: &mut R,
) -> Option<QualifiedSet> {
    for _ in 0..32 {
        let size = rng.gen_range(1..=keys.len());
        let coalition: QualifiedSet = keys
            .choose_multiple(rng, size)
            .map(|k| k.pid().clone())
            .collect();
        if !structure.is_authorized(&coalition) {
            return Some(coalition);
        }
    }
    None
}

/// A unit mod n different from `honest`.
fn tampered_value<R: Rng + ?Sized>(params: &PublicParams, honest: &BigUint, rng: &mut R) -> BigUint {
    loop {
        let x = sample_inclusive(rng, &BigUint::one(), &(params.n() - 1u32));
        if x != *honest && gcd(&x, params.n()).is_one() {
            return x;
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn qualified_session(
    config: &SimConfig,
    params: &PublicParams,
    keys: &[ParticipantKey],
    roster: &Roster,
    package: &SecretPackage,
    secret: &BigUint,
    set_index: usize,
    rng: &mut ChaCha20Rng,
) -> Session {
    let start = Instant::now();
    let gamma = &package.entries[set_index].gamma;
    let mut contributions: Vec<Contribution> = keys
        .iter()
        .filter(|k| gamma.contains(k.pid()))
        .map(|k| k.contribute(params, package, set_index).expect("member contributes"))
        .collect();
    let cheat_count = config.cheaters_per_session.min(contributions.len());
    let mut injected: Vec<ParticipantId> = Vec::new();
    for i in rand::seq::index::sample(rng, contributions.len(), cheat_count) {
        let c = &mut contributions[i];
        c.x = tampered_value(params, &c.x, rng);
        injected.push(c.pid.clone());
    }
    injected.sort();

    let (outcome, detected, tag_ok) = match reconstruct(params, roster, package, set_index, &contributions) {
        Ok(k) => {
            let tag_ok = verify_secret(package, set_index, &k, params.width());
            let outcome = if tag_ok && k == *secret {
                Outcome::Recovered
            } else {
                Outcome::Failed("recovered value does not match".into())
            };
            (outcome, Vec::new(), tag_ok)
        }
        Err(Error::BadContribution(mut named)) => {
            named.sort();
            (Outcome::CheatersDetected, named, false)
        }
        Err(e) => (Outcome::Failed(e.to_string()), Vec::new(), false),
    };
    Session {
        secret_id: package.secret_id.0,
        set_index: Some(set_index),
        kind: SessionKind::Qualified,
        members: gamma.iter().cloned().collect(),
        injected_cheaters: injected,
        detected_cheaters: detected,
        outcome,
        tag_ok,
        micros: config.timings.then(|| start.elapsed().as_micros() as u64),
    }
}

/// Pools the honest values of `pool` and tries them against set
/// `set_index`, or against every set when `None`. Accepted only if some
/// attempt yields a value whose tag verifies.
fn unauthorized_session(
    config: &SimConfig,
    params: &PublicParams,
    keys: &[ParticipantKey],
    package: &SecretPackage,
    kind: SessionKind,
    pool: &QualifiedSet,
    set_index: Option<usize>,
) -> Session {
    let start = Instant::now();
    let indices: Vec<usize> = match set_index {
        Some(j) => vec![j],
        None => (0..package.entries.len()).collect(),
    };
    let mut accepted = false;
    for j in indices {
        let gamma = &package.entries[j].gamma;
        let xs: Vec<BigUint> = keys
            .iter()
            .filter(|k| pool.contains(k.pid()) && gamma.contains(k.pid()))
            .map(|k| k.contribute(params, package, j).expect("member contributes").x)
            .collect();
        if let Ok(k) = unmask_and_recover(params, package, j, &xs) {
            accepted |= verify_secret(package, j, &k, params.width());
        }
    }
    Session {
        secret_id: package.secret_id.0,
        set_index,
        kind,
        members: pool.iter().cloned().collect(),
        injected_cheaters: Vec::new(),
        detected_cheaters: Vec::new(),
        outcome: if accepted {
            Outcome::FalseAcceptance
        } else {
            Outcome::Rejected
        },
        tag_ok: accepted,
        micros: config.timings.then(|| start.elapsed().as_micros() as u64),
    }
}

fn summarize(sessions: &[Session]) -> Summary {
    let mut summary = Summary::default();
    for s in sessions {
        match s.kind {
            SessionKind::Qualified => {
                summary.qualified_sessions += 1;
                summary.cheaters_injected += s.injected_cheaters.len();
                let injected: BTreeSet<_> = s.injected_cheaters.iter().collect();
                let detected: BTreeSet<_> = s.detected_cheaters.iter().collect();
                summary.cheaters_detected += injected.intersection(&detected).count();
                summary.cheaters_missed += injected.difference(&detected).count();
                match &s.outcome {
                    Outcome::Recovered if injected.is_empty() => summary.qualified_recovered += 1,
                    Outcome::CheatersDetected if injected == detected => {}
                    _ => summary.failures += 1,
                }
            }
            SessionKind::StrictSubset | SessionKind::Coalition => {
                summary.unauthorized_sessions += 1;
                if s.outcome == Outcome::FalseAcceptance {
                    summary.unauthorized_accepted += 1;
                }
            }
        }
    }
    summary
}
