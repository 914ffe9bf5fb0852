use std::collections::BTreeSet;

use msss::combiner::{reconstruct, unmask_and_recover, verify_secret};
use msss::dealer::setup;
use msss::{AccessStructure, Board, EmptyStructurePolicy, ParticipantId, ParticipantKey, QualifiedSet, Roster};
use num_bigint::BigUint;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

const NAMES: [&str; 5] = ["A", "B", "C", "D", "E"];

fn pid(s: &str) -> ParticipantId {
    ParticipantId::new(s).unwrap()
}

fn subset(mask: u32) -> QualifiedSet {
    NAMES
        .iter()
        .enumerate()
        .filter(|(i, _)| mask >> i & 1 == 1)
        .map(|(_, n)| pid(n))
        .collect()
}

/// Keeps the masks that have no proper subset among the others.
fn antichain(masks: &[u32]) -> Vec<u32> {
    let unique: BTreeSet<u32> = masks.iter().copied().filter(|m| *m != 0).collect();
    unique
        .iter()
        .copied()
        .filter(|m| !unique.iter().any(|o| o != m && o & m == *o))
        .collect()
}

struct World {
    board: Board,
    keys: Vec<ParticipantKey>,
}

fn world(seed: u64) -> (World, msss::DealerState, ChaCha20Rng) {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let (params, dealer) = setup(12, &mut rng).unwrap();
    let mut board = Board::new(params.clone());
    let keys: Vec<_> = NAMES.iter().map(|n| ParticipantKey::generate(&params, pid(n), &mut rng)).collect();
    for key in &keys {
        board.enroll(key.pid().clone(), key.pseudo_share().clone()).unwrap();
    }
    (World { board, keys }, dealer, rng)
}

fn contributions(world: &World, id: msss::SecretId, j: usize, members: &QualifiedSet) -> Vec<msss::Contribution> {
    let package = world.board.package(id).unwrap();
    world
        .keys
        .iter()
        .filter(|k| members.contains(k.pid()))
        .map(|k| k.contribute(world.board.params(), package, j).unwrap())
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn every_set_recovers_and_no_subset_does(
        seed in any::<u64>(),
        masks in prop::collection::vec(1u32..32, 1..5),
        secret in 0u64..1 << 20,
    ) {
        let (mut world, mut dealer, mut rng) = world(seed);
        let sets = antichain(&masks);
        let structure = AccessStructure::validate_minimal(sets.iter().map(|m| subset(*m))).unwrap();
        let params = world.board.params().clone();
        let secret = BigUint::from(secret) % params.m();
        let roster = world.board.roster().clone();
        let package = dealer.share_secret(&params, &roster, secret.clone(), structure, &mut rng).unwrap();
        let id = package.secret_id;
        world.board.publish(package).unwrap();
        let package = world.board.package(id).unwrap();

        for (j, entry) in package.entries.iter().enumerate() {
            let cs = contributions(&world, id, j, &entry.gamma);
            let k = reconstruct(&params, world.board.roster(), package, j, &cs).unwrap();
            prop_assert_eq!(&k, &secret);
            prop_assert!(verify_secret(package, j, &k, params.width()));

            // Dropping any member leaves one mask in place, so the tag must reject.
            for leave_out in entry.gamma.iter() {
                let xs: Vec<BigUint> = cs.iter().filter(|c| &c.pid != leave_out).map(|c| c.x.clone()).collect();
                if let Ok(k) = unmask_and_recover(&params, package, j, &xs) {
                    prop_assert!(!verify_secret(package, j, &k, params.width()));
                }
            }
        }
    }
}

#[test]
fn board_round_trips_after_every_update() {
    let (mut world, mut dealer, mut rng) = world(5);
    let params = world.board.params().clone();
    let mut roster: Roster = world.board.roster().clone();
    for text in ["A,B|C,D", "B,E", "A|D,E"] {
        let package = dealer
            .share_secret(&params, &roster, BigUint::from(9u32), AccessStructure::parse(text).unwrap(), &mut rng)
            .unwrap();
        world.board.publish(package).unwrap();
    }
    let reload = |board: &Board| Board::from_canonical_str(&board.to_canonical_string()).unwrap();
    assert_eq!(reload(&world.board), world.board);

    let id = msss::SecretId(2);
    let grown = dealer.add_qualified_set(&params, &roster, id, subset(0b00101), &mut rng).unwrap();
    world.board.publish(grown).unwrap();
    assert_eq!(reload(&world.board), world.board);

    let report = dealer
        .remove_participant(&params, &mut roster, &pid("E"), EmptyStructurePolicy::Reject, &mut rng)
        .unwrap();
    world.board.apply_removal(&pid("E"), &report).unwrap();
    assert_eq!(reload(&world.board), world.board);
    world.keys.retain(|k| k.pid().as_str() != "E");

    for package in world.board.packages() {
        for (j, entry) in package.entries.iter().enumerate() {
            let cs = contributions(&world, package.secret_id, j, &entry.gamma);
            let k = reconstruct(&params, world.board.roster(), package, j, &cs).unwrap();
            assert_eq!(k, BigUint::from(9u32));
        }
    }
}
