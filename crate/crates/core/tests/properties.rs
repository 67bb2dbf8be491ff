mod common;

use std::collections::BTreeSet;

use proptest::prelude::*;
use proptest::sample::select;

use pts::corpus::{self, ENTRIES};
use pts::deduction::{check_proof, instantiate_rule, Deduction};
use pts::formula::{Fixity, Formula, Signature};
use pts::harmony::{all_verdicts, Status};
use pts::normalize::{apply_redex, normalize};
use pts::prover::{search, Sequent};
use pts::schema::{
    derive_elims_from_intro, derive_intros_from_elim, Assignment, Calculus, PremiseSchema, RuleClass,
    RuleKind, RuleSchema, Schema, SideCondition,
};

fn signature() -> Signature {
    Signature::builtin()
        .with("tonk", Fixity::Infix)
        .and_then(|s| s.with("x", Fixity::Infix))
        .and_then(|s| s.with("T", Fixity::Prefix))
        .unwrap()
}

fn formula() -> impl Strategy<Value = Formula> {
    let atom = "[a-z][a-z0-9_]{0,3}"
        .prop_filter("connective name", |a| a != "tonk" && a != "x")
        .prop_map(Formula::atom);
    let leaf = prop_oneof![4 => atom, 1 => select(vec!["#f", "#t"]).prop_map(Formula::constant)];
    leaf.prop_recursive(5, 40, 2, |inner| {
        prop_oneof![
            (select(vec!["~", "[]", "<>", "T"]), inner.clone()).prop_map(|(op, a)| Formula::unary(op, a)),
            (select(vec!["&", "|", "->", "tonk", "x"]), inner.clone(), inner)
                .prop_map(|(op, a, b)| Formula::binary(op, a, b)),
        ]
    })
}

fn calculus() -> impl Strategy<Value = Calculus> {
    select(ENTRIES.iter().map(|e| e.name).collect::<Vec<_>>()).prop_map(|n| corpus::load(n).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn formula_render_round_trips(f in formula()) {
        let text = f.render();
        prop_assert_eq!(Formula::parse(&text, &signature()).unwrap(), f);
    }

    #[test]
    fn modal_wrapping_is_modalised(f in formula()) {
        prop_assert!(Formula::unary("[]", f.clone()).is_modalised());
        prop_assert!(Formula::unary("<>", f).is_modalised());
    }

    #[test]
    fn non_modal_compounds_are_modalised_componentwise(
        op in select(vec!["&", "|", "->", "tonk", "x"]),
        f in formula(),
        g in formula(),
    ) {
        let both = f.is_modalised() && g.is_modalised();
        prop_assert_eq!(Formula::binary(op, f.clone(), g).is_modalised(), both);
        prop_assert_eq!(Formula::unary("~", f.clone()).is_modalised(), f.is_modalised());
    }

    #[test]
    fn a_single_assumption_is_valid_everywhere(c in calculus(), f in formula()) {
        let d = Deduction::assume(f.clone());
        let report = check_proof(&c, &d);
        prop_assert!(report.valid);
        prop_assert_eq!(report.open_assumptions, vec![f]);
    }

    #[test]
    fn verdicts_ignore_rule_order(c in calculus(), seed in any::<u64>()) {
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        let mut shuffled = c.clone();
        shuffled.rules.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
        let key = |c: &Calculus| -> Vec<(String, Status, Vec<String>)> {
            all_verdicts(c)
                .into_iter()
                .map(|v| {
                    let mut derived: Vec<String> = v.derived.iter().map(|r| r.conclusion.to_string()).collect();
                    derived.sort();
                    (v.connective, v.status, derived)
                })
                .collect()
        };
        prop_assert_eq!(key(&c), key(&shuffled));
        prop_assert_eq!(key(&c), key(&c));
    }
}

/// An intro rule for `k` whose premises partition the constituents `A1..An`:
/// each group concludes its first member and discharges the rest.
fn type1_intro() -> impl Strategy<Value = RuleSchema> {
    (1usize..5)
        .prop_flat_map(|n| {
            (
                Just(n),
                Just((0..n).collect::<Vec<_>>()).prop_shuffle(),
                proptest::collection::vec(any::<bool>(), n),
            )
        })
        .prop_map(|(n, order, cuts)| {
            let var = |i: usize| Schema::var(&format!("A{}", i + 1));
            let mut groups: Vec<Vec<usize>> = Vec::new();
            for (i, &v) in order.iter().enumerate() {
                match groups.last_mut() {
                    Some(g) if i > 0 && !cuts[i] => g.push(v),
                    _ => groups.push(vec![v]),
                }
            }
            RuleSchema {
                name: "kI".into(),
                kind: RuleKind::Intro,
                major: None,
                premises: groups
                    .iter()
                    .map(|g| PremiseSchema {
                        discharged: g[1..].iter().map(|&i| var(i)).collect(),
                        conclusion: var(g[0]),
                    })
                    .collect(),
                conclusion: Schema::Compound("k".into(), (0..n).map(var).collect()),
                side: SideCondition::None,
                frame: false,
            }
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn read_off_has_one_elim_per_premise(r in type1_intro()) {
        prop_assert_eq!(r.classify(), RuleClass::Type1Intro);
        let elims = derive_elims_from_intro(&r).unwrap();
        prop_assert_eq!(elims.len(), r.premises.len());
        for e in &elims {
            prop_assert_eq!(e.kind, RuleKind::Elim);
            prop_assert_eq!(e.principal_connective(), Some("k"));
        }
    }
}

#[test]
fn corpus_read_off_cardinalities() {
    for e in ENTRIES {
        let c = corpus::load(e.name).unwrap();
        for r in &c.rules {
            match r.classify() {
                RuleClass::Type1Intro => {
                    assert_eq!(
                        derive_elims_from_intro(r).unwrap().len(),
                        r.premises.len(),
                        "{}",
                        r.name
                    )
                }
                RuleClass::Type2Elim => {
                    assert_eq!(
                        derive_intros_from_elim(r).unwrap().len(),
                        r.premises.len(),
                        "{}",
                        r.name
                    )
                }
                _ => {}
            }
        }
    }
}

#[test]
fn side_conditions_are_never_stable() {
    for e in ENTRIES {
        let c = corpus::load(e.name).unwrap();
        for v in all_verdicts(&c) {
            let conditioned = c
                .rules_for(&v.connective)
                .iter()
                .any(|r| !r.side.is_none() || r.frame);
            if conditioned {
                assert_ne!(v.status, Status::Stable, "{}: {}", e.name, v.connective);
            }
        }
    }
}

fn generated_calculus() -> impl Strategy<Value = Calculus> {
    select(vec!["ipl", "cpl", "s4", "s4-frame", "s5", "s5-frame"]).prop_map(|n| corpus::load(n).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn open_assumptions_are_unlabelled_leaves(c in generated_calculus(), seed in any::<u64>()) {
        let d = common::Generator::for_calculus(&c, seed, 40).proof(40);
        prop_assert!(check_proof(&c, &d).valid);
        let leaves: BTreeSet<Formula> = d
            .paths_post_order()
            .iter()
            .filter_map(|p| d.get(p))
            .filter(|n| n.children().is_empty())
            .map(|l| l.conclusion().clone())
            .collect();
        for f in d.open_assumptions() {
            prop_assert!(leaves.contains(&f));
        }
        for l in d.open_leaves() {
            prop_assert!(l.label().is_none(), "bound leaf reported open: {l}");
        }
    }

    #[test]
    fn instantiated_rules_check(c in generated_calculus(), seed in any::<u64>()) {
        let mut g = common::Generator::for_calculus(&c, seed, 30);
        let d = g.proof(30);
        // Rebuild the root from its children through instantiate_rule.
        if let Deduction::Application { rule, discharge, children, .. } = &d {
            let r = c.rule(rule).unwrap();
            let mut asg = Assignment::new();
            for (s, ch) in r.major.iter().chain(r.premises.iter().map(|p| &p.conclusion)).rev().zip(children.iter().rev()) {
                prop_assume!(s.match_into(ch.conclusion(), &mut asg));
            }
            prop_assume!(r.conclusion.match_into(d.conclusion(), &mut asg));
            let rebuilt = instantiate_rule(r, &asg, children.clone(), *discharge).unwrap();
            prop_assert!(check_proof(&c, &rebuilt).valid, "{}", rebuilt);
            prop_assert_eq!(rebuilt.conclusion(), d.conclusion());
        }
    }

    #[test]
    fn every_reduction_step_stays_valid(c in generated_calculus(), seed in any::<u64>()) {
        prop_assume!(c.name != "s4" && c.name != "s5");
        let d = common::Generator::for_calculus(&c, seed, 40).proof(60);
        let (n, trace) = normalize(&c, &d, 10_000).unwrap();
        let mut cur = d.canonical();
        for step in &trace.steps {
            cur = apply_redex(&c, &cur, &step.redex).unwrap();
            prop_assert!(check_proof(&c, &cur).valid, "step {} of {}", step.index, d);
            prop_assert_eq!(cur.conclusion(), d.conclusion());
            prop_assert_eq!(cur.size(), step.size_after);
        }
        prop_assert_eq!(cur, n);
    }
}

fn ipl_sequent() -> impl Strategy<Value = Sequent> {
    let atom = select(vec!["p", "q"]).prop_map(Formula::atom);
    let f = atom.prop_recursive(2, 6, 2, |inner| {
        (select(vec!["&", "|", "->"]), inner.clone(), inner).prop_map(|(op, a, b)| Formula::binary(op, a, b))
    });
    (proptest::collection::vec(f.clone(), 0..3), f).prop_map(|(a, g)| Sequent::new(a, g))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn search_is_sound_monotone_and_deterministic(s in ipl_sequent(), depth in 1usize..4) {
        let c = corpus::load("ipl").unwrap();
        let r = search(&c, &s, depth);
        let again = search(&c, &s, depth);
        prop_assert_eq!(&r, &again);
        if let Some(proof) = &r.proof {
            prop_assert!(r.found);
            prop_assert!(check_proof(&c, proof).valid);
            prop_assert_eq!(proof.conclusion(), &s.goal);
            for f in proof.open_assumptions() {
                prop_assert!(s.assumptions.contains(&f));
            }
            let (n, _) = normalize(&c, proof, 10_000).unwrap();
            prop_assert_eq!(n.conclusion(), &s.goal);
            prop_assert!(search(&c, &s, depth + 1).found);
        }
    }
}
