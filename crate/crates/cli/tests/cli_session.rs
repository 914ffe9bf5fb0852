use std::fs;
use std::path::{Path, PathBuf};

use msss_cli::{exit, run};
use serde_json::Value;
use sha2::{Digest, Sha256};

struct Outcome {
    code: u8,
    stdout: String,
    stderr: String,
}

fn msss(args: &[&str]) -> Outcome {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("msss").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    Outcome {
        code,
        stdout: String::from_utf8(out).unwrap(),
        stderr: String::from_utf8(err).unwrap(),
    }
}

fn ok(args: &[&str]) -> String {
    let outcome = msss(args);
    assert_eq!(outcome.code, 0, "{args:?} failed: {}", outcome.stderr);
    outcome.stdout
}

struct Toy {
    dir: tempfile::TempDir,
}

impl Toy {
    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn p(&self, name: &str) -> String {
        self.path(name).to_string_lossy().into_owned()
    }

    fn dealer_args(&self) -> Vec<String> {
        vec!["--board".into(), self.p("board.json"), "--dealer".into(), self.p("dealer.json")]
    }

    fn run(&self, head: &[&str], tail: &[&str]) -> Outcome {
        let dealer = self.dealer_args();
        let args: Vec<&str> = head
            .iter()
            .copied()
            .chain(dealer.iter().map(String::as_str))
            .chain(tail.iter().copied())
            .collect();
        msss(&args)
    }

    fn contribute(&self, who: &str, secret_id: &str, set: &str) -> Outcome {
        let key = self.p(&format!("{who}.key"));
        let out = self.p(&format!("{who}-{secret_id}-{set}.json"));
        msss(&[
            "contribute", "--board", &self.p("board.json"), "--secret-id", secret_id, "--set", set,
            "--key", &key, "--out", &out,
        ])
    }

    fn reconstruct(&self, secret_id: &str, set: &str, who: &[&str], extra: &[&str]) -> Outcome {
        let files: Vec<String> = who.iter().map(|w| self.p(&format!("{w}-{secret_id}-{set}.json"))).collect();
        let mut args = vec!["reconstruct", "--board", &self.p("board.json")]
            .into_iter()
            .map(String::from)
            .collect::<Vec<_>>();
        args.extend(["--secret-id", secret_id, "--set", set].map(String::from));
        args.push("--contribution".into());
        args.extend(files);
        args.extend(extra.iter().map(|s| s.to_string()));
        let refs: Vec<&str> = args.iter().map(String::as_str).collect();
        msss(&refs)
    }
}

/// p = 11, q = 13, g = 15; A, B, C hold shares 5, 7, 11.
fn toy_world() -> Toy {
    let toy = Toy { dir: tempfile::tempdir().unwrap() };
    let out = toy.run(&["setup"], &["--test-primes", "11,13", "--test-generator", "15"]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    assert!(out.stdout.contains("n: 143\nm: 149\ng: 15\n"), "{}", out.stdout);
    for (who, share) in [("A", "5"), ("B", "7"), ("C", "11")] {
        ok(&[
            "enroll", "--board", &toy.p("board.json"), "--id", who, "--key-out", &toy.p(&format!("{who}.key")),
            "--test-share", share,
        ]);
    }
    toy
}

fn board_json(toy: &Toy) -> Value {
    serde_json::from_str(&fs::read_to_string(toy.path("board.json")).unwrap()).unwrap()
}

fn file_hash(path: &Path) -> Vec<u8> {
    Sha256::digest(fs::read(path).unwrap()).to_vec()
}

#[test]
fn toy_session_recovers_100() {
    let toy = toy_world();
    let board = board_json(&toy);
    assert_eq!(board["roster"]["A"], "2d");
    assert_eq!(board["roster"]["B"], "73");

    let out = toy.run(&["share"], &["--secret", "100", "--sets", "A,B", "--test-draws", "7,5,7"]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    assert_eq!(out.stdout, "secret-id: 1\n");
    let package = &board_json(&toy)["packages"]["1"];
    assert_eq!(package["h0"], "67");
    assert_eq!(package["ps0"], "73");
    assert_eq!(package["f1"], "69");
    assert_eq!(package["entries"][0]["h"], "b8");

    assert_eq!(toy.contribute("A", "1", "1").stdout, "x: 6f\n");
    assert_eq!(toy.contribute("B", "1", "1").stdout, "x: 50\n");
    let out = toy.reconstruct("1", "1", &["A", "B"], &[]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    assert_eq!(out.stdout, "secret: 100\ntag: ok\n");

    let out = msss(&[
        "verify", "--board", &toy.p("board.json"), "--secret-id", "1", "--set", "1", "--secret", "100",
    ]);
    assert_eq!(out.code, 0);
    let out = msss(&[
        "verify", "--board", &toy.p("board.json"), "--secret-id", "1", "--set", "1", "--secret", "101",
    ]);
    assert_eq!(out.code, exit::TAG_MISMATCH);
}

#[test]
fn scripted_toy_session() {
    let toy = toy_world();
    let out = toy.run(&["share"], &["--secret", "100", "--sets", "A,B", "--test-draws", "7,5,7"]);
    assert_eq!(out.stdout, "secret-id: 1\n");
    let out = toy.run(&["share"], &["--secret", "0x21", "--sets", "B,C|A,C", "--seed", "8"]);
    assert_eq!(out.stdout, "secret-id: 2\n");

    toy.contribute("A", "1", "1");
    toy.contribute("B", "1", "1");
    assert_eq!(toy.reconstruct("1", "1", &["A", "B"], &[]).stdout, "secret: 100\ntag: ok\n");
    let out = msss(&[
        "verify", "--board", &toy.p("board.json"), "--secret-id", "1", "--set", "1", "--secret", "100",
        "--contribution", &toy.p("A-1-1.json"), &toy.p("B-1-1.json"),
    ]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    assert_eq!(out.stdout, "ok: A\nok: B\ntag: ok\n");

    let out = toy.run(&["update", "add-set"], &["--secret-id", "1", "--set", "C", "--test-d", "9"]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    toy.contribute("C", "1", "2");
    assert_eq!(toy.reconstruct("1", "2", &["C"], &[]).stdout, "secret: 100\ntag: ok\n");
    toy.contribute("A", "2", "2");
    toy.contribute("C", "2", "2");
    assert_eq!(toy.reconstruct("2", "2", &["A", "C"], &[]).stdout, "secret: 33\ntag: ok\n");

    // The first package is untouched by the second share.
    let package = &board_json(&toy)["packages"]["1"];
    assert_eq!(package["f1"], "69");
    assert_eq!(package["entries"][0]["h"], "b8");
}

#[test]
fn secret_equal_to_m_is_too_large() {
    let toy = toy_world();
    assert_eq!(toy.run(&["share"], &["--secret", "149", "--sets", "A"]).code, exit::SECRET_TOO_LARGE);
    assert_eq!(toy.run(&["share"], &["--secret", "148", "--sets", "A"]).code, 0);
}

#[test]
fn bit_flipped_contribution_names_the_cheater() {
    let toy = toy_world();
    toy.run(&["share"], &["--secret", "100", "--sets", "A,B", "--test-draws", "7,5,7"]);
    toy.contribute("A", "1", "1");
    toy.contribute("B", "1", "1");
    let path = toy.path("B-1-1.json");
    let text = fs::read_to_string(&path).unwrap().replace(r#""x": "50""#, r#""x": "51""#);
    fs::write(&path, text).unwrap();

    let out = toy.reconstruct("1", "1", &["A", "B"], &[]);
    assert_eq!(out.code, exit::BAD_CONTRIBUTION);
    assert_eq!(out.stdout, "cheater: B\n");
    assert!(!out.stdout.contains("secret:"));

    // Without the per-contribution check only the tag can object.
    let out = toy.reconstruct("1", "1", &["A", "B"], &["--skip-checks"]);
    assert_eq!(out.code, exit::TAG_MISMATCH, "{}", out.stdout);
}

#[test]
fn incomplete_or_foreign_contributions_are_refused() {
    let toy = toy_world();
    toy.run(&["share"], &["--secret", "100", "--sets", "A,B", "--test-draws", "7,5,7"]);
    toy.contribute("A", "1", "1");
    assert_eq!(toy.reconstruct("1", "1", &["A"], &[]).code, exit::MISSING_CONTRIBUTION);
    assert_eq!(toy.contribute("C", "1", "1").code, exit::NOT_A_MEMBER);
    assert_eq!(toy.contribute("A", "1", "2").code, exit::INDEX_OUT_OF_RANGE);
    assert_eq!(toy.contribute("A", "9", "1").code, exit::UNKNOWN_SECRET);
}

#[test]
fn add_set_then_reconstruct_with_the_new_set() {
    let toy = toy_world();
    toy.run(&["share"], &["--secret", "100", "--sets", "A,C", "--test-draws", "7,5,7"]);
    let out = toy.run(&["update", "add-set"], &["--secret-id", "1", "--set", "B", "--test-d", "9"]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    let package = &board_json(&toy)["packages"]["1"];
    assert_eq!(package["entries"][1]["h"], "c1"); // 193
    toy.contribute("B", "1", "2");
    assert_eq!(toy.reconstruct("1", "2", &["B"], &[]).stdout, "secret: 100\ntag: ok\n");
    toy.contribute("A", "1", "1");
    toy.contribute("C", "1", "1");
    assert_eq!(toy.reconstruct("1", "1", &["A", "C"], &[]).stdout, "secret: 100\ntag: ok\n");

    let out = toy.run(&["update", "add-set"], &["--secret-id", "1", "--set", "B,C"]);
    assert_eq!(out.code, exit::NOT_ANTICHAIN);
}

#[test]
fn renewal_makes_old_contributions_stale_and_leaves_keys_alone() {
    let toy = toy_world();
    toy.run(&["share"], &["--secret", "100", "--sets", "A,B", "--seed", "1"]);
    toy.run(&["share"], &["--secret", "55", "--sets", "B,C", "--seed", "2"]);
    toy.contribute("A", "1", "1");
    toy.contribute("B", "1", "1");
    let keys: Vec<_> = ["A", "B", "C"].iter().map(|w| file_hash(&toy.path(&format!("{w}.key")))).collect();
    let other = board_json(&toy)["packages"]["2"].clone();

    let out = toy.run(&["update", "renew"], &["--secret-id", "1", "--secret", "77", "--test-draws", "11,3,5"]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    assert_eq!(out.stdout, "renewed: 1\n");
    assert_eq!(board_json(&toy)["packages"]["2"], other);
    let after: Vec<_> = ["A", "B", "C"].iter().map(|w| file_hash(&toy.path(&format!("{w}.key")))).collect();
    assert_eq!(after, keys);

    // Stale values fail the contribution check, and without it the tag.
    assert_eq!(toy.reconstruct("1", "1", &["A", "B"], &[]).code, exit::BAD_CONTRIBUTION);
    let out = toy.reconstruct("1", "1", &["A", "B"], &["--skip-checks"]);
    assert_eq!(out.code, exit::TAG_MISMATCH, "{}{}", out.stdout, out.stderr);

    toy.contribute("A", "1", "1");
    toy.contribute("B", "1", "1");
    assert_eq!(toy.reconstruct("1", "1", &["A", "B"], &[]).stdout, "secret: 77\ntag: ok\n");
}

#[test]
fn remove_participant_renews_affected_secrets_only() {
    let toy = toy_world();
    toy.run(&["share"], &["--secret", "100", "--sets", "A,B|C", "--seed", "1"]);
    toy.run(&["share"], &["--secret", "55", "--sets", "B,C", "--seed", "2"]);
    toy.run(&["share"], &["--secret", "7", "--sets", "A", "--seed", "3"]);
    let untouched = board_json(&toy)["packages"]["2"].clone();

    let out = toy.run(&["update", "remove-participant"], &["--id", "A"]);
    assert_eq!(out.code, exit::STRUCTURE_BECAME_EMPTY);
    let out = toy.run(&["update", "remove-participant"], &["--id", "A", "--suspend-empty", "--seed", "4"]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    assert_eq!(out.stdout, "removed: A\nrenewed: 1\nsuspended: 3\n");

    let board = board_json(&toy);
    assert!(board["roster"].get("A").is_none());
    assert!(board["packages"].get("3").is_none());
    assert_eq!(board["packages"]["2"], untouched);
    assert_eq!(board["packages"]["1"]["entries"].as_array().unwrap().len(), 1);
    toy.contribute("C", "1", "1");
    assert_eq!(toy.reconstruct("1", "1", &["C"], &[]).stdout, "secret: 100\ntag: ok\n");
}

#[test]
fn remove_set_and_text_secrets() {
    let toy = toy_world();
    let out = toy.run(&["share"], &["--secret", "Hi", "--text", "--sets", "A|B"]);
    assert_eq!(out.code, exit::SECRET_TOO_LARGE, "{}", out.stderr);
    toy.run(&["share"], &["--secret", "0x2a", "--sets", "A|B"]);
    let out = toy.run(&["update", "remove-set"], &["--secret-id", "1", "--set", "1"]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    let out = toy.run(&["update", "remove-set"], &["--secret-id", "1", "--set", "1"]);
    assert_eq!(out.code, exit::LAST_ENTRY);
    toy.contribute("B", "1", "1");
    assert_eq!(toy.reconstruct("1", "1", &["B"], &[]).stdout, "secret: 42\ntag: ok\n");
}

#[test]
fn document_errors_have_their_own_codes() {
    let toy = toy_world();
    let out = toy.run(&["setup"], &["--test-primes", "11,13"]);
    assert_eq!(out.code, exit::EXISTS);
    let out = msss(&[
        "enroll", "--board", &toy.p("board.json"), "--id", "A", "--key-out", &toy.p("A2.key"),
    ]);
    assert_eq!(out.code, exit::DUPLICATE_PARTICIPANT);
    assert_eq!(toy.run(&["share"], &["--secret", "1", "--sets", "A,Z"]).code, exit::UNKNOWN_PARTICIPANT);
    assert_eq!(toy.run(&["share"], &["--secret", "1", "--sets", "A|A,B"]).code, exit::NOT_ANTICHAIN);

    fs::write(toy.path("lockless.json"), "{ nope").unwrap();
    let out = msss(&["contribute", "--board", &toy.p("lockless.json"), "--secret-id", "1", "--set", "1",
        "--key", &toy.p("A.key"), "--out", &toy.p("x.json")]);
    assert_eq!(out.code, exit::MALFORMED);
    let out = msss(&["contribute", "--board", &toy.p("missing.json"), "--secret-id", "1", "--set", "1",
        "--key", &toy.p("A.key"), "--out", &toy.p("x.json")]);
    assert_eq!(out.code, exit::IO);

    let text = fs::read_to_string(toy.path("board.json")).unwrap();
    fs::write(toy.path("board.json"), text.replace(r#""m": "95""#, r#""m": "99""#)).unwrap();
    assert_eq!(toy.run(&["share"], &["--secret", "1", "--sets", "A"]).code, exit::INVARIANT);

    fs::write(toy.path("board.json.lock"), "").unwrap();
    assert_eq!(toy.run(&["share"], &["--secret", "1", "--sets", "A"]).code, exit::LOCKED);

    assert_eq!(msss(&["share"]).code, 2);
    assert_eq!(msss(&["--help"]).code, 0);
}

#[test]
fn simulate_prints_a_reproducible_report() {
    let args = ["simulate", "--participants", "4", "--secrets", "2", "--cheaters", "1", "--seed", "9"];
    let first = ok(&args);
    assert_eq!(ok(&args), first);
    let report: Value = serde_json::from_str(&first).unwrap();
    let summary = &report["summary"];
    assert_eq!(summary["qualified_recovered"], 0);
    assert_eq!(summary["cheaters_injected"], summary["qualified_sessions"]);
    assert_eq!(summary["cheaters_detected"], summary["cheaters_injected"]);
    assert_eq!(summary["cheaters_missed"], 0);
    assert_eq!(summary["unauthorized_accepted"], 0);
}

#[test]
fn binary_reports_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_msss");
    let status = std::process::Command::new(bin).arg("share").output().unwrap();
    assert_eq!(status.status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let board = dir.path().join("none.json");
    let out = std::process::Command::new(bin)
        .args(["contribute", "--board", board.to_str().unwrap(), "--secret-id", "1", "--set", "1"])
        .args(["--key", "k", "--out", "o"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(exit::IO as i32));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
}
