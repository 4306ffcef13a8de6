use std::collections::HashMap;

use rotorlab::rotor::{
    flow_check, record_cards, replay_with_cards, run, run_sequential, BlobStats,
};
use rotorlab::{Coord2, Direction, SeededRandom};

/// Hash-map rotor aggregation: rotors start East and turn a quarter
/// counterclockwise before each departure.
fn naive(n: u64) -> HashMap<(i32, i32), (bool, u64)> {
    let step = [(1, 0), (0, 1), (-1, 0), (0, -1)]; // E N W S
    let mut sites: HashMap<(i32, i32), (bool, u64)> = HashMap::new();
    for _ in 0..n {
        let mut p = (0, 0);
        loop {
            let cell = sites.entry(p).or_insert((false, 0));
            if !cell.0 {
                cell.0 = true;
                break;
            }
            cell.1 += 1;
            let (dx, dy) = step[(cell.1 % 4) as usize];
            p = (p.0 + dx, p.1 + dy);
        }
    }
    sites
}

#[test]
fn matches_plain_simulation() {
    for n in [1u64, 2, 5, 6, 37, 400, 2500] {
        let want = naive(n);
        for blob in [run_sequential(n).unwrap(), run(n).unwrap().0] {
            let occupied: usize = want.values().filter(|c| c.0).count();
            assert_eq!(blob.occupied_sites().len(), occupied, "n={n}");
            for (&(x, y), &(occ, dep)) in &want {
                let cell = blob.cell(Coord2::new(x, y));
                assert_eq!(
                    (cell.occupied, cell.departures),
                    (occ, dep),
                    "n={n} at ({x},{y})"
                );
            }
        }
    }
}

#[test]
fn fast_run_agrees_at_random_sizes() {
    let mut rng = SeededRandom::new(11);
    for _ in 0..12 {
        let n = 1 + rng.below(30_000);
        assert_eq!(run(n).unwrap().0, run_sequential(n).unwrap(), "n={n}");
    }
}

#[test]
fn first_bugs() {
    let b = run_sequential(6).unwrap();
    for p in [(0, 0), (1, 0), (-1, 0), (0, 1), (0, -1), (0, 2)] {
        assert!(b.is_occupied(Coord2::new(p.0, p.1)), "{p:?}");
    }
    let s = BlobStats::of(&run_sequential(5).unwrap());
    assert_eq!((s.max_occupied_dist2, s.min_vacant_dist2), (Some(1), 2));
    let s = run(1).unwrap().1;
    assert_eq!(
        (s.site_count, s.max_occupied_dist2, s.min_vacant_dist2),
        (1, Some(0), 1)
    );
    assert_eq!(run(0).unwrap().1.max_occupied_dist2, None);
}

#[test]
fn card_examples() {
    assert!(record_cards(1).unwrap().is_empty());
    let two = record_cards(2).unwrap();
    assert_eq!(two.total(), 1);
    assert_eq!(two.get(Coord2::ORIGIN, Direction::North), 1);
    let six = record_cards(6).unwrap();
    // bugs 2 to 6 leave the origin N, W, S, E, N
    let origin: Vec<u64> = [
        Direction::North,
        Direction::West,
        Direction::South,
        Direction::East,
    ]
    .iter()
    .map(|&d| six.get(Coord2::ORIGIN, d))
    .collect();
    assert_eq!(origin, [2, 1, 1, 1]);
    assert_eq!(six.get(Coord2::new(0, 1), Direction::North), 1);
    assert_eq!(six.total(), run_sequential(6).unwrap().total_departures());
    let text = six.to_text();
    assert_eq!(rotorlab::rotor::CardStacks::parse(&text).unwrap(), six);
}

#[test]
fn replay_occupancy() {
    let one = replay_with_cards(&record_cards(1).unwrap(), 1, 3).unwrap();
    assert_eq!((one.occupied, one.consumed), (vec![Coord2::ORIGIN], 0));
    let cards = record_cards(100).unwrap();
    let occ = run(100).unwrap().0.occupied_sites();
    for seed in 0..10 {
        assert_eq!(replay_with_cards(&cards, 100, seed).unwrap().occupied, occ);
    }
}

#[test]
fn flow_holds() {
    for n in [1u64, 1000] {
        assert!(flow_check(&run(n).unwrap().0).is_empty());
    }
}
