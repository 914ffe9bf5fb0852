//! Generalized monotone access structures given by their minimal qualified
//! sets.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const MAX_ID_LEN: usize = 64;

/// A participant identifier: a short printable string without whitespace,
/// `,` or `|` (those separate ids and sets on the command line).
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct ParticipantId(String);

impl ParticipantId {
    pub fn new(id: impl Into<String>) -> Result<Self> {
        let id = id.into();
        let valid = !id.is_empty()
            && id.len() <= MAX_ID_LEN
            && id
                .chars()
                .all(|c| c.is_ascii_graphic() && c != ',' && c != '|');
        if valid {
            Ok(ParticipantId(id))
        } else {
            Err(Error::Parameter(format!("invalid participant id {id:?}")))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for ParticipantId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl FromStr for ParticipantId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ParticipantId::new(s)
    }
}

impl TryFrom<String> for ParticipantId {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        ParticipantId::new(s)
    }
}

impl From<ParticipantId> for String {
    fn from(id: ParticipantId) -> String {
        id.0
    }
}

pub type QualifiedSet = BTreeSet<ParticipantId>;

/// An antichain of non-empty minimal qualified sets, in the order given.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<QualifiedSet>", into = "Vec<QualifiedSet>")]
pub struct AccessStructure {
    minimal_sets: Vec<QualifiedSet>,
}

impl AccessStructure {
    /// Validates `sets` as minimal qualified sets. Each set is normalized
    /// (sorted, de-duplicated); input order of the sets is kept.
    pub fn validate_minimal<S, I>(sets: S) -> Result<Self>
    where
        S: IntoIterator<Item = I>,
        I: IntoIterator<Item = ParticipantId>,
    {
        let minimal_sets: Vec<QualifiedSet> = sets
            .into_iter()
            .map(|set| set.into_iter().collect())
            .collect();
        if minimal_sets.is_empty() {
            return Err(Error::EmptyStructure);
        }
        if let Some(i) = minimal_sets.iter().position(BTreeSet::is_empty) {
            return Err(Error::EmptySet(i));
        }
        check_antichain(&minimal_sets)?;
        Ok(AccessStructure { minimal_sets })
    }

    /// Parses the command-line notation `A,B|B,C`.
    pub fn parse(text: &str) -> Result<Self> {
        let sets = text
            .split('|')
            .map(|set| {
                set.split(',')
                    .map(str::trim)
                    .filter(|id| !id.is_empty())
                    .map(ParticipantId::new)
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Self::validate_minimal(sets)
    }

    pub fn minimal_sets(&self) -> &[QualifiedSet] {
        &self.minimal_sets
    }

    pub fn set_count(&self) -> usize {
        self.minimal_sets.len()
    }

    /// True iff `subset` contains some minimal set.
    pub fn is_authorized(&self, subset: &QualifiedSet) -> bool {
        self.minimal_sets.iter().any(|set| set.is_subset(subset))
    }

    /// Lowest (0-based) index whose minimal set equals `subset` exactly.
    pub fn matching_set_index(&self, subset: &QualifiedSet) -> Option<usize> {
        self.minimal_sets.iter().position(|set| set == subset)
    }

    pub fn participants(&self) -> QualifiedSet {
        self.minimal_sets.iter().flatten().cloned().collect()
    }

    pub fn mentions(&self, pid: &ParticipantId) -> bool {
        self.minimal_sets.iter().any(|set| set.contains(pid))
    }

    /// Structure with `set` appended, if the result is still an antichain.
    pub fn with_added(&self, set: QualifiedSet) -> Result<Self> {
        let mut sets = self.minimal_sets.clone();
        sets.push(set);
        Self::validate_minimal(sets)
    }

    /// Structure with set `index` removed; the last set cannot be removed.
    pub fn with_removed(&self, index: usize) -> Result<Self> {
        if index >= self.minimal_sets.len() {
            return Err(Error::IndexOutOfRange {
                index,
                len: self.minimal_sets.len(),
            });
        }
        if self.minimal_sets.len() == 1 {
            return Err(Error::LastEntry);
        }
        let mut sets = self.minimal_sets.clone();
        sets.remove(index);
        Ok(AccessStructure { minimal_sets: sets })
    }

    /// Keeps only the sets that satisfy `keep`; `None` if nothing is left.
    pub(crate) fn filtered(&self, keep: impl Fn(&QualifiedSet) -> bool) -> Option<(Self, Vec<usize>)> {
        let kept: Vec<usize> = (0..self.minimal_sets.len())
            .filter(|&i| keep(&self.minimal_sets[i]))
            .collect();
        if kept.is_empty() {
            return None;
        }
        let minimal_sets = kept.iter().map(|&i| self.minimal_sets[i].clone()).collect();
        Some((AccessStructure { minimal_sets }, kept))
    }
}

fn check_antichain(sets: &[QualifiedSet]) -> Result<()> {
    for (i, a) in sets.iter().enumerate() {
        for (j, b) in sets.iter().enumerate() {
            if i != j && a.is_subset(b) {
                // equal sets: report the earlier one as contained
                let (first, second) = if a == b { (i.min(j), i.max(j)) } else { (i, j) };
                return Err(Error::NotAntichain { first, second });
            }
        }
    }
    Ok(())
}

impl TryFrom<Vec<QualifiedSet>> for AccessStructure {
    type Error = Error;

    fn try_from(sets: Vec<QualifiedSet>) -> Result<Self> {
        AccessStructure::validate_minimal(sets)
    }
}

impl From<AccessStructure> for Vec<QualifiedSet> {
    fn from(structure: AccessStructure) -> Self {
        structure.minimal_sets
    }
}

impl fmt::Display for AccessStructure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let text = self
            .minimal_sets
            .iter()
            .map(|set| set.iter().map(ParticipantId::as_str).collect::<Vec<_>>().join(","))
            .collect::<Vec<_>>()
            .join("|");
        f.write_str(&text)
    }
}
