//! The public bulletin board and its canonical JSON document.
//!
//! Layout: top-level keys `params`, `roster`, `packages`, `revision`. Big
//! integers are lowercase hex without leading zeros, tags are 64 hex digits,
//! maps are ordered by key. Equal boards serialize to identical bytes.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::Write;
use std::path::Path;

use num_bigint::BigUint;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::access::{AccessStructure, ParticipantId};
use crate::dealer::{PublicParams, RawParams, RemovalReport, SecretId, SecretPackage};
use crate::error::{Error, Result};
use crate::participant::Roster;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Board {
    params: PublicParams,
    roster: Roster,
    packages: BTreeMap<SecretId, SecretPackage>,
    revision: u64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBoard {
    params: RawParams,
    roster: Roster,
    packages: BTreeMap<SecretId, SecretPackage>,
    revision: u64,
}

impl Board {
    pub fn new(params: PublicParams) -> Self {
        Board {
            params,
            roster: Roster::new(),
            packages: BTreeMap::new(),
            revision: 0,
        }
    }

    pub fn params(&self) -> &PublicParams {
        &self.params
    }

    pub fn roster(&self) -> &Roster {
        &self.roster
    }

    pub fn revision(&self) -> u64 {
        self.revision
    }

    pub fn packages(&self) -> impl Iterator<Item = &SecretPackage> {
        self.packages.values()
    }

    pub fn package(&self, id: SecretId) -> Result<&SecretPackage> {
        self.packages.get(&id).ok_or(Error::UnknownSecret(id))
    }

    pub fn enroll(&mut self, pid: ParticipantId, pseudo_share: BigUint) -> Result<()> {
        check_pseudo_share(&self.params, &pseudo_share)?;
        self.roster.enroll(pid, pseudo_share)?;
        self.revision += 1;
        Ok(())
    }

    /// Inserts or replaces the package for its secret id.
    pub fn publish(&mut self, package: SecretPackage) -> Result<()> {
        check_package(&self.params, &self.roster, &package)?;
        self.packages.insert(package.secret_id, package);
        self.revision += 1;
        Ok(())
    }

    pub fn withdraw(&mut self, id: SecretId) -> Result<SecretPackage> {
        let package = self.packages.remove(&id).ok_or(Error::UnknownSecret(id))?;
        self.revision += 1;
        Ok(package)
    }

    /// Publishes the outcome of a participant removal: the roster entry
    /// goes, suspended secrets are withdrawn, renewed packages replace the
    /// old ones.
    pub fn apply_removal(&mut self, pid: &ParticipantId, report: &RemovalReport) -> Result<()> {
        let mut next = self.clone();
        next.roster.remove(pid)?;
        for id in &report.suspended {
            next.packages.remove(id);
        }
        for package in &report.renewed {
            next.packages.insert(package.secret_id, package.clone());
        }
        next.validate()?;
        next.revision += 1;
        *self = next;
        Ok(())
    }

    /// Re-checks every semantic invariant of the board.
    pub fn validate(&self) -> Result<()> {
        for (_, ps) in self.roster.iter() {
            check_pseudo_share(&self.params, ps)?;
        }
        for (id, package) in &self.packages {
            if *id != package.secret_id {
                return Err(Error::invariant("package key does not match its secret id"));
            }
            check_package(&self.params, &self.roster, package)?;
        }
        Ok(())
    }

    pub fn to_canonical_string(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("board serializes");
        text.push('\n');
        text
    }

    pub fn from_canonical_str(text: &str) -> Result<Self> {
        let raw: RawBoard =
            serde_json::from_str(text).map_err(|e| Error::MalformedDocument(e.to_string()))?;
        let board = Board {
            params: PublicParams::try_from(raw.params)?,
            roster: raw.roster,
            packages: raw.packages,
            revision: raw.revision,
        };
        board.validate()?;
        Ok(board)
    }

    /// Writes the document by whole-file replacement so readers never see a
    /// partial board.
    pub fn save(&self, path: &Path) -> Result<()> {
        write_atomically(path, self.to_canonical_string().as_bytes())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_canonical_str(&text)
    }
}

/// Writes `bytes` to a sibling temp file, then renames it over `path`.
pub fn write_atomically(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let file_name = path
        .file_name()
        .ok_or_else(|| Error::io(path, std::io::Error::other("path has no file name")))?;
    let tmp = dir.join(format!(".{}.tmp{}", file_name.to_string_lossy(), std::process::id()));
    let write = || -> std::io::Result<()> {
        let mut file = fs::File::create(&tmp)?;
        file.write_all(bytes)?;
        file.sync_all()?;
        fs::rename(&tmp, path)
    };
    write().map_err(|e| {
        let _ = fs::remove_file(&tmp);
        Error::io(path, e)
    })
}

fn check_pseudo_share(params: &PublicParams, ps: &BigUint) -> Result<()> {
    if ps.is_zero() || ps >= params.n() {
        return Err(Error::invariant("pseudo-share outside [1, n-1]"));
    }
    Ok(())
}

fn check_package(params: &PublicParams, roster: &Roster, package: &SecretPackage) -> Result<()> {
    if package.entries.is_empty() {
        return Err(Error::invariant("package has no qualified sets"));
    }
    AccessStructure::validate_minimal(package.entries.iter().map(|e| e.gamma.clone()))
        .map_err(|e| Error::invariant(format!("access structure: {e}")))?;
    if let Some(pid) = package
        .entries
        .iter()
        .flat_map(|e| &e.gamma)
        .find(|pid| !roster.contains(pid))
    {
        return Err(Error::invariant(format!("unknown participant {pid} in qualified set")));
    }
    let mut seen = BTreeSet::new();
    let mask_limit = BigUint::from(1u32) << (8 * params.width().bytes());
    for entry in &package.entries {
        if entry.d < BigUint::from(2u32) || entry.d >= *params.m() {
            return Err(Error::invariant("d outside [2, m-1]"));
        }
        if !seen.insert(&entry.d) {
            return Err(Error::invariant("duplicate d"));
        }
        if entry.masked >= mask_limit {
            return Err(Error::invariant("H wider than the mask width"));
        }
    }
    if package.f1 >= *params.m() {
        return Err(Error::invariant("f1 outside the field"));
    }
    if package.ps0.is_zero() || package.ps0 >= *params.n() {
        return Err(Error::invariant("ps0 outside [1, n-1]"));
    }
    if package.h0.is_zero() || package.h0 >= *params.n() {
        return Err(Error::invariant("h0 outside [1, n-1]"));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dealer::tests::{big, pid, toy_keys, toy_package, toy_params};

    fn toy_board() -> Board {
        let params = toy_params();
        let mut board = Board::new(params.clone());
        for key in toy_keys(&params) {
            board.enroll(key.pid().clone(), key.pseudo_share().clone()).unwrap();
        }
        board.publish(toy_package()).unwrap();
        board
    }

    #[test]
    fn canonical_round_trip() {
        let board = toy_board();
        let text = board.to_canonical_string();
        let back = Board::from_canonical_str(&text).unwrap();
        assert_eq!(back, board);
        assert_eq!(back.to_canonical_string(), text);
        assert!(text.contains(r#""A": "2d""#), "{text}");
        assert!(text.contains(r#""h": "b8""#), "{text}");
    }

    #[test]
    fn empty_board_document() {
        let board = Board::new(toy_params());
        let text = board.to_canonical_string();
        assert!(text.contains(r#""packages": {}"#));
        assert_eq!(Board::from_canonical_str(&text).unwrap(), board);
    }

    #[test]
    fn revision_increases_on_mutation() {
        let mut board = toy_board();
        let r = board.revision();
        board.publish(toy_package()).unwrap();
        assert!(board.revision() > r);
        let r = board.revision();
        board.withdraw(toy_package().secret_id).unwrap();
        assert!(board.revision() > r);
        let r = board.revision();
        assert!(board.enroll(pid("A"), big(3)).is_err());
        assert_eq!(board.revision(), r);
    }

    #[test]
    fn invariant_violations_are_named() {
        let text = toy_board().to_canonical_string();

        let composite_m = text.replace(r#""m": "95""#, r#""m": "99""#);
        let err = Board::from_canonical_str(&composite_m).unwrap_err();
        assert!(matches!(&err, Error::InvariantViolation(rule) if rule == "m not prime"), "{err}");

        let mut board = toy_board();
        let mut package = toy_package();
        package.entries.push(package.entries[0].clone());
        package.entries[1].gamma = [pid("C")].into_iter().collect();
        board.packages.insert(package.secret_id, package);
        let err = Board::from_canonical_str(&board.to_canonical_string()).unwrap_err();
        assert!(matches!(&err, Error::InvariantViolation(rule) if rule == "duplicate d"), "{err}");

        let unknown = text.replace(r#""A": "2d","#, "");
        let err = Board::from_canonical_str(&unknown).unwrap_err();
        assert!(matches!(&err, Error::InvariantViolation(rule) if rule.contains("unknown participant")), "{err}");
    }

    #[test]
    fn syntax_errors_are_malformed() {
        assert!(matches!(Board::from_canonical_str("{"), Err(Error::MalformedDocument(_))));
        let text = toy_board().to_canonical_string();
        let upper = text.replace(r#""h": "b8""#, r#""h": "B8""#);
        assert!(matches!(Board::from_canonical_str(&upper), Err(Error::MalformedDocument(_))));
        let padded = text.replace(r#""h": "b8""#, r#""h": "0b8""#);
        assert!(matches!(Board::from_canonical_str(&padded), Err(Error::MalformedDocument(_))));
    }

    #[test]
    fn publish_checks_roster() {
        let params = toy_params();
        let mut board = Board::new(params.clone());
        let keys = toy_keys(&params);
        board.enroll(keys[0].pid().clone(), keys[0].pseudo_share().clone()).unwrap();
        assert!(board.publish(toy_package()).is_err());
    }

    #[test]
    fn save_and_load_files() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("board.json");
        let board = toy_board();
        board.save(&path).unwrap();
        let first = fs::read(&path).unwrap();
        board.save(&path).unwrap();
        assert_eq!(fs::read(&path).unwrap(), first);
        assert_eq!(Board::load(&path).unwrap(), board);
        let missing = dir.path().join("nope.json");
        let err = Board::load(&missing).unwrap_err();
        assert!(err.to_string().contains("nope.json"), "{err}");
    }
}
