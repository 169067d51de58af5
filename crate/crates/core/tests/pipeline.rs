use mubforge_core::bases::{load_basis_set, mub_family, pbar, qbar, quantum_pair_value, save_basis_set};
use mubforge_core::games::{pqrac_value, GameOptions};
use mubforge_core::hierarchy::{random_realization, upper_bound, BoundOptions, Level};

#[test]
fn saved_family_round_trips_and_scores_as_mubs() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("mubs8.json");
    let set = mub_family(8).unwrap();
    save_basis_set(&set, &path).unwrap();
    let back = load_basis_set(&path).unwrap();
    for (a, b) in set.bases().iter().zip(back.bases()) {
        assert_eq!(a.matrix(), b.matrix());
    }
    assert!((pbar(&back).unwrap() - quantum_pair_value(8)).abs() < 1e-12);
    assert!((qbar(&back).unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn pair_game_matches_pair_average() {
    let set = mub_family(3).unwrap();
    let r = pqrac_value(&set, 2, GameOptions::default()).unwrap();
    assert!((r.value - pbar(&set).unwrap()).abs() < 1e-12);
}

#[test]
fn bound_dominates_random_realizations() {
    let report = upper_bound(3, 2, Level::Q1, &BoundOptions::default()).unwrap();
    for seed in 0..20 {
        let r = random_realization(3, 2, seed).unwrap();
        assert!(r.value() <= report.ptilde_bound + 1e-9, "seed {seed}");
    }
}
