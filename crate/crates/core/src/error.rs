use std::path::PathBuf;

use crate::access::ParticipantId;
use crate::dealer::SecretId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("value is not invertible modulo the given modulus")]
    NotInvertible,

    #[error("access structure has no minimal sets")]
    EmptyStructure,
    #[error("minimal set #{0} is empty")]
    EmptySet(usize),
    #[error("not an antichain: set #{first} is contained in set #{second}")]
    NotAntichain { first: usize, second: usize },

    #[error("interpolation points share the same abscissa")]
    DegeneratePoints,
    #[error("value needs {needed} bytes but the mask width is {width}")]
    Overflow { needed: usize, width: usize },

    #[error("secret must be smaller than the field modulus m")]
    SecretTooLarge,
    #[error("unknown participant `{0}`")]
    UnknownParticipant(ParticipantId),
    #[error("participant `{0}` is already enrolled")]
    DuplicateParticipant(ParticipantId),
    #[error("unknown secret {0}")]
    UnknownSecret(SecretId),
    #[error("qualified set index {index} out of range (secret has {len})")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("a secret must keep at least one qualified set")]
    LastEntry,
    #[error("secrets {0:?} would lose every qualified set")]
    StructureBecameEmpty(Vec<SecretId>),

    #[error("participant `{pid}` is not a member of qualified set #{index}")]
    NotAMember { pid: ParticipantId, index: usize },
    #[error("missing contribution from `{0}`")]
    MissingContribution(ParticipantId),
    #[error("unexpected contribution from `{0}`")]
    ExtraContribution(ParticipantId),
    #[error("contribution check failed for {}", display_ids(.0))]
    BadContribution(Vec<ParticipantId>),
    #[error("unmasked value is not a field element; public data or coalition is wrong")]
    UnmaskOutOfField,

    #[error("malformed document: {0}")]
    MalformedDocument(String),
    #[error("invariant violation: {0}")]
    InvariantViolation(String),
    #[error("{}: {source}", .path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

fn display_ids(ids: &[ParticipantId]) -> String {
    ids.iter()
        .map(|id| id.as_str())
        .collect::<Vec<_>>()
        .join(", ")
}

impl Error {
    pub(crate) fn invariant(rule: impl Into<String>) -> Self {
        Error::InvariantViolation(rule.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
