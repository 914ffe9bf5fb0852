//! Browser demo: a toy deployment you can share secrets into, reconstruct
//! from (optionally with a tampered contribution), and an explorer that
//! tells whether a pool of participants is authorized.
//!
//! Everything returns JSON strings so the page can stay plain JavaScript.

use msss::combiner::{reconstruct, unmask_and_recover, verify_secret};
use msss::dealer::setup_from_primes;
use msss::{
    AccessStructure, Board, Contribution, DealerState, Error, ParticipantId, ParticipantKey,
    QualifiedSet, SecretId,
};
use num_bigint::BigUint;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

fn js_err(message: String) -> JsValue {
    JsValue::from_str(&message)
}

fn parse_pool(text: &str) -> Result<QualifiedSet, String> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| ParticipantId::new(s).map_err(|e| e.to_string()))
        .collect()
}

#[wasm_bindgen]
pub struct Demo {
    dealer: DealerState,
    board: Board,
    keys: Vec<ParticipantKey>,
    rng: ChaCha20Rng,
}

#[wasm_bindgen]
impl Demo {
    /// A deployment over `n = p*q` with the named participants enrolled.
    #[wasm_bindgen(constructor)]
    pub fn new(p: u32, q: u32, participants: &str, seed: u32) -> Result<Demo, JsValue> {
        Demo::build(p, q, participants, seed).map_err(js_err)
    }

    /// Public parameters and roster as JSON.
    pub fn summary(&self) -> String {
        self.summary_value().to_string()
    }

    /// The whole bulletin board document.
    pub fn board(&self) -> String {
        self.board.to_canonical_string()
    }

    /// Shares `secret` under `sets` (e.g. "A,B|C") and returns the package.
    pub fn share(&mut self, secret: u32, sets: &str) -> Result<String, JsValue> {
        self.share_secret(secret, sets).map(|v| v.to_string()).map_err(js_err)
    }

    /// Reconstructs with the members of set `set` (numbered from 1). When
    /// `tamper` names a member, the low bit of its contribution is flipped.
    pub fn reconstruct(&self, secret_id: u32, set: usize, tamper: Option<String>) -> Result<String, JsValue> {
        self.run_reconstruction(secret_id, set, tamper.as_deref())
            .map(|v| v.to_string())
            .map_err(js_err)
    }
}

impl Demo {
    pub fn build(p: u32, q: u32, participants: &str, seed: u32) -> Result<Demo, String> {
        let mut rng = ChaCha20Rng::seed_from_u64(seed.into());
        let (params, dealer) =
            setup_from_primes(BigUint::from(p), BigUint::from(q), &mut rng).map_err(|e| e.to_string())?;
        let mut board = Board::new(params.clone());
        let mut keys = Vec::new();
        for pid in parse_pool(participants)? {
            let key = ParticipantKey::generate(&params, pid.clone(), &mut rng);
            board.enroll(pid, key.pseudo_share().clone()).map_err(|e| e.to_string())?;
            keys.push(key);
        }
        if keys.is_empty() {
            return Err("name at least one participant".into());
        }
        Ok(Demo { dealer, board, keys, rng })
    }

    pub fn summary_value(&self) -> Value {
        let params = self.board.params();
        json!({
            "n": params.n().to_string(),
            "m": params.m().to_string(),
            "g": params.g().to_string(),
            "participants": self.keys.iter().map(|k| json!({
                "id": k.pid().as_str(),
                "ps": k.pseudo_share().to_string(),
            })).collect::<Vec<_>>(),
        })
    }

    pub fn share_secret(&mut self, secret: u32, sets: &str) -> Result<Value, String> {
        let structure = AccessStructure::parse(sets).map_err(|e| e.to_string())?;
        let params = self.board.params().clone();
        let roster = self.board.roster().clone();
        let package = self
            .dealer
            .share_secret(&params, &roster, BigUint::from(secret), structure, &mut self.rng)
            .map_err(|e| e.to_string())?;
        let value = json!({
            "secret_id": package.secret_id.0,
            "ps0": package.ps0.to_string(),
            "h0": package.h0.to_string(),
            "f1": package.f1.to_string(),
            "sets": package.entries.iter().map(|e| json!({
                "members": e.gamma.iter().map(ParticipantId::as_str).collect::<Vec<_>>(),
                "d": e.d.to_string(),
                "h": e.masked.to_string(),
                "tag": e.tag.to_hex(),
            })).collect::<Vec<_>>(),
        });
        self.board.publish(package).map_err(|e| e.to_string())?;
        Ok(value)
    }

    pub fn run_reconstruction(&self, secret_id: u32, set: usize, tamper: Option<&str>) -> Result<Value, String> {
        let params = self.board.params();
        let package = self.board.package(SecretId(secret_id)).map_err(|e| e.to_string())?;
        let j = set.checked_sub(1).ok_or("sets are numbered from 1")?;
        let entry = package.entry(j).map_err(|e| e.to_string())?;
        let mut contributions: Vec<Contribution> = self
            .keys
            .iter()
            .filter(|k| entry.gamma.contains(k.pid()))
            .map(|k| k.contribute(params, package, j))
            .collect::<Result<_, _>>()
            .map_err(|e| e.to_string())?;
        if let Some(target) = tamper.filter(|t| !t.is_empty()) {
            let c = contributions
                .iter_mut()
                .find(|c| c.pid.as_str() == target)
                .ok_or_else(|| format!("{target} is not in set {set}"))?;
            c.x ^= BigUint::from(1u32);
        }

        let xs: Vec<Value> = contributions
            .iter()
            .map(|c| json!({ "id": c.pid.as_str(), "x": c.x.to_string() }))
            .collect();
        // What the unmasking alone would produce, with no contribution checks.
        let unchecked = match unmask_and_recover(params, package, j, contributions.iter().map(|c| &c.x)) {
            Ok(k) => json!({ "secret": k.to_string(), "tag_ok": verify_secret(package, j, &k, params.width()) }),
            Err(e) => json!({ "error": e.to_string() }),
        };
        let checked = match reconstruct(params, self.board.roster(), package, j, &contributions) {
            Ok(k) => json!({ "secret": k.to_string(), "tag_ok": verify_secret(package, j, &k, params.width()) }),
            Err(Error::BadContribution(cheaters)) => json!({
                "cheaters": cheaters.iter().map(ParticipantId::as_str).collect::<Vec<_>>(),
            }),
            Err(e) => json!({ "error": e.to_string() }),
        };
        Ok(json!({ "contributions": xs, "checked": checked, "unchecked": unchecked }))
    }
}

/// Whether `pool` is authorized under `sets`, which minimal set it covers,
/// and every minimal set it is missing members of.
#[wasm_bindgen]
pub fn explore(sets: &str, pool: &str) -> Result<String, JsValue> {
    explore_value(sets, pool).map(|v| v.to_string()).map_err(js_err)
}

pub fn explore_value(sets: &str, pool: &str) -> Result<Value, String> {
    let structure = AccessStructure::parse(sets).map_err(|e| e.to_string())?;
    let pool = parse_pool(pool)?;
    let gaps: Vec<Value> = structure
        .minimal_sets()
        .iter()
        .enumerate()
        .map(|(i, set)| {
            json!({
                "set": i + 1,
                "members": set.iter().map(ParticipantId::as_str).collect::<Vec<_>>(),
                "missing": set.difference(&pool).map(ParticipantId::as_str).collect::<Vec<_>>(),
            })
        })
        .collect();
    Ok(json!({
        "structure": structure.to_string(),
        "authorized": structure.is_authorized(&pool),
        "covers": structure.minimal_sets().iter().position(|set| set.is_subset(&pool)).map(|i| i + 1),
        "sets": gaps,
    }))
}
