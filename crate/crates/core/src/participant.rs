//! Participant keys, the public roster of pseudo-shares, and
//! reconstruction contributions.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::access::ParticipantId;
use crate::codec::hex_int;
use crate::dealer::{PublicParams, SecretId, SecretPackage};
use crate::error::{Error, Result};
use crate::numtheory::{mod_exp, sample_inclusive};

/// A participant's private share `s` and its public image `ps = g^s mod n`.
///
/// The share is only reachable through serialization into the participant's
/// own key file; no accessor hands it out.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParticipantKey {
    pid: ParticipantId,
    #[serde(with = "hex_int")]
    n: BigUint,
    #[serde(with = "hex_int")]
    s: BigUint,
    #[serde(with = "hex_int")]
    ps: BigUint,
}

impl ParticipantKey {
    /// Draws `s` uniformly from `[2, n]`.
    pub fn generate<R: Rng + ?Sized>(params: &PublicParams, pid: ParticipantId, rng: &mut R) -> Self {
        let s = sample_inclusive(rng, &BigUint::from(2u32), params.n());
        Self::from_share(params, pid, s).expect("sampled share is in range")
    }

    /// Builds a key from a chosen share; used for fixtures and key import.
    pub fn from_share(params: &PublicParams, pid: ParticipantId, s: BigUint) -> Result<Self> {
        if s < BigUint::from(2u32) || s > *params.n() {
            return Err(Error::Parameter("participant share must lie in [2, n]".into()));
        }
        let ps = mod_exp(params.g(), &s, params.n())?;
        Ok(ParticipantKey {
            pid,
            n: params.n().clone(),
            s,
            ps,
        })
    }

    pub fn pid(&self) -> &ParticipantId {
        &self.pid
    }

    pub fn pseudo_share(&self) -> &BigUint {
        &self.ps
    }

    /// Bit length of the private share, for share-size accounting.
    pub fn share_bits(&self) -> u64 {
        self.s.bits()
    }

    /// Checks the key file is consistent and belongs to this deployment.
    pub fn check_against(&self, params: &PublicParams) -> Result<()> {
        if self.n != *params.n() {
            return Err(Error::invariant("key belongs to a different modulus"));
        }
        if mod_exp(params.g(), &self.s, params.n())? != self.ps {
            return Err(Error::invariant("key pseudo-share does not match its share"));
        }
        Ok(())
    }

    /// Computes `x = ps0^s mod n` for qualified set `set_index` of `package`.
    pub fn contribute(
        &self,
        params: &PublicParams,
        package: &SecretPackage,
        set_index: usize,
    ) -> Result<Contribution> {
        let entry = package.entry(set_index)?;
        if !entry.gamma.contains(&self.pid) {
            return Err(Error::NotAMember {
                pid: self.pid.clone(),
                index: set_index,
            });
        }
        Ok(Contribution {
            pid: self.pid.clone(),
            secret_id: package.secret_id,
            set_index,
            x: mod_exp(&package.ps0, &self.s, params.n())?,
        })
    }
}

pub fn keygen<R: Rng + ?Sized>(params: &PublicParams, pid: ParticipantId, rng: &mut R) -> ParticipantKey {
    ParticipantKey::generate(params, pid, rng)
}

pub fn contribute(
    key: &ParticipantKey,
    params: &PublicParams,
    package: &SecretPackage,
    set_index: usize,
) -> Result<Contribution> {
    key.contribute(params, package, set_index)
}

/// The value a participant releases during reconstruction, with the framing
/// the combiner needs to bind it to a mask.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Contribution {
    pub pid: ParticipantId,
    pub secret_id: SecretId,
    pub set_index: usize,
    #[serde(with = "hex_int")]
    pub x: BigUint,
}

/// Enrolled participants and their published pseudo-shares.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Roster(#[serde(with = "roster_serde")] BTreeMap<ParticipantId, BigUint>);

impl Roster {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn enroll(&mut self, pid: ParticipantId, ps: BigUint) -> Result<()> {
        if self.0.contains_key(&pid) {
            return Err(Error::DuplicateParticipant(pid));
        }
        self.0.insert(pid, ps);
        Ok(())
    }

    pub fn remove(&mut self, pid: &ParticipantId) -> Result<BigUint> {
        self.0
            .remove(pid)
            .ok_or_else(|| Error::UnknownParticipant(pid.clone()))
    }

    pub fn pseudo_share(&self, pid: &ParticipantId) -> Result<&BigUint> {
        self.0
            .get(pid)
            .ok_or_else(|| Error::UnknownParticipant(pid.clone()))
    }

    pub fn contains(&self, pid: &ParticipantId) -> bool {
        self.0.contains_key(pid)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&ParticipantId, &BigUint)> {
        self.0.iter()
    }
}

impl FromIterator<(ParticipantId, BigUint)> for Roster {
    fn from_iter<I: IntoIterator<Item = (ParticipantId, BigUint)>>(iter: I) -> Self {
        Roster(iter.into_iter().collect())
    }
}

mod roster_serde {
    use std::collections::BTreeMap;

    use num_bigint::BigUint;
    use serde::{de, ser::SerializeMap, Deserialize, Deserializer, Serializer};

    use crate::access::ParticipantId;
    use crate::codec::hex_int;

    pub fn serialize<S: Serializer>(
        map: &BTreeMap<ParticipantId, BigUint>,
        serializer: S,
    ) -> Result<S::Ok, S::Error> {
        let mut out = serializer.serialize_map(Some(map.len()))?;
        for (pid, ps) in map {
            out.serialize_entry(pid, &hex_int::to_hex(ps))?;
        }
        out.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        deserializer: D,
    ) -> Result<BTreeMap<ParticipantId, BigUint>, D::Error> {
        BTreeMap::<ParticipantId, String>::deserialize(deserializer)?
            .into_iter()
            .map(|(pid, hex)| Ok((pid, hex_int::from_hex(&hex).map_err(de::Error::custom)?)))
            .collect()
    }
}
