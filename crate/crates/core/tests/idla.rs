use rotorlab::idla::{expected_flow_check, roundness, run_coupled, run_idla};
use rotorlab::lattice::is_connected;
use rotorlab::rotor::CardStacks;
use rotorlab::Coord2;

#[test]
fn ten_thousand_bugs() {
    let a = run_idla(10_000, 3).unwrap();
    let occ = a.occupied_sites();
    assert_eq!(occ.len(), 10_000);
    assert!(is_connected(&occ));
    assert_eq!(a, run_idla(10_000, 3).unwrap());
    assert_eq!(a.stats().site_count, 10_000);
}

#[test]
fn rounder_at_larger_sizes() {
    for seed in 0..5 {
        let r = roundness(&run_idla(100_000, seed).unwrap());
        assert!(
            r.delta_in < 0.03 * r.r_eff && r.delta_out < 0.03 * r.r_eff,
            "{r:?}"
        );
        assert!(!r.clamped);
    }
}

#[test]
fn expected_tent_identity() {
    // a single run conserves bugs exactly; the averaged tent residual is 0
    // up to noise, so only a few sites should sit beyond three standard errors
    for seed in 0..3 {
        let s = expected_flow_check(1000, 50, seed).unwrap();
        assert_eq!(s.exact_violations, 0);
        assert!(s.sites_checked > 1000);
        assert!(s.fraction_beyond() <= 0.01, "{s:?}");
    }
}

#[test]
fn coupled_without_cards() {
    let c = run_coupled(&CardStacks::new(), 1, 9);
    assert_eq!(c.settled_set, vec![Coord2::ORIGIN]);
    let stuck = run_coupled(&CardStacks::new(), 2, 9);
    assert_eq!(stuck.settled, 1);
    assert_eq!(stuck.failed_at.map(|f| f.0), Some(Coord2::ORIGIN));
}
