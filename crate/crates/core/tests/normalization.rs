mod common;

use std::collections::BTreeSet;

use pts::corpus;
use pts::deduction::{check_proof, Deduction};
use pts::formula::Formula;
use pts::normalize::{find_redexes, is_normal, normalize};
use pts::schema::Calculus;

fn open_set(d: &Deduction) -> BTreeSet<Formula> {
    d.open_assumptions().into_iter().collect()
}

/// Normalizes every proof and checks the invariants; returns how many had a detour.
fn normalizes(calc: &Calculus, proofs: &[Deduction]) -> usize {
    let mut with_redex = 0;
    for d in proofs {
        assert!(
            check_proof(calc, d).valid,
            "generator produced an invalid proof: {d}"
        );
        if !find_redexes(calc, d).is_empty() {
            with_redex += 1;
        }
        let (n, trace) = normalize(calc, d, 10_000).unwrap();
        assert!(!trace.exhausted, "budget exhausted on {d}");
        assert!(trace.blocked.is_empty(), "{d}: blocked {:?}", trace.blocked);
        assert!(is_normal(calc, &n), "not normal: {n}");
        assert_eq!(n.conclusion(), d.conclusion());
        assert!(open_set(&n).is_subset(&open_set(d)), "{d} => {n}");
        assert!(check_proof(calc, &n).valid);
        assert_eq!(trace.replay(calc, d).unwrap(), n);
    }
    with_redex
}

#[test]
fn generated_ipl_proofs_normalize() {
    let c = corpus::load("ipl").unwrap();
    let proofs = common::proofs(&c, 1000, 40, 0x1b1);
    assert!(proofs.iter().all(|d| d.size() <= 40));
    let detours = normalizes(&c, &proofs);
    assert!(detours >= 100, "only {detours} generated proofs contain a detour");
}

#[test]
fn generated_modal_and_classical_proofs_normalize() {
    for name in ["s4-frame", "s5-frame", "cpl"] {
        let c = corpus::load(name).unwrap();
        let proofs = common::proofs(&c, 80, 40, 0x5eed);
        let detours = normalizes(&c, &proofs);
        assert!(detours >= 10, "{name}: only {detours} proofs contain a detour");
    }
}
