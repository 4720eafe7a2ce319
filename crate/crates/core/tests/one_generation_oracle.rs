//! One full generation of iLSHADE-RSP (NP = 5, D = 3) against a
//! straight-line reference that reads the same scripted uniforms.

#[path = "support/one_generation.rs"]
mod one_generation;

use one_generation::check;

#[test]
fn one_generation_matches_reference() {
    let mut saw_perturbation = false;
    let mut saw_archive_trim = false;
    let mut saw_success = false;
    let mut saw_failure = false;
    for seed in 1..=200u64 {
        let r = check(seed, 0.2).unwrap();
        saw_perturbation |= r.perturbed.iter().any(|&b| b);
        saw_archive_trim |= r.trimmed;
        saw_success |= !r.deltas.is_empty();
        saw_failure |= r.deltas.len() < 5;
    }
    assert!(saw_perturbation && saw_archive_trim && saw_success && saw_failure);
}

#[test]
fn one_generation_with_every_trial_perturbed() {
    for seed in 1..=50u64 {
        let r = check(seed, 1.0).unwrap();
        assert!(r.perturbed.iter().all(|&b| b));
    }
}

#[test]
fn one_generation_without_perturbation() {
    for seed in 1..=50u64 {
        let r = check(seed, 0.0).unwrap();
        assert!(r.perturbed.iter().all(|&b| !b));
    }
}
