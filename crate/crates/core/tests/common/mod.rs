//! Seeded generator of valid deductions for property suites.
//!
//! Proofs are built forward: a pool starts with assumption leaves and each step
//! applies a random rule to pool members, discharging every matching open leaf.
//! Candidates that fail the checker are dropped, so whatever comes out is valid.

#![allow(dead_code)]

use pts::deduction::{check_proof, Deduction, Label};
use pts::formula::Formula;
use pts::schema::{Assignment, Calculus, RuleSchema, Schema};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub struct Generator<'a> {
    calculus: &'a Calculus,
    rng: ChaCha8Rng,
    atoms: Vec<Formula>,
    pool: Vec<Deduction>,
    max_size: usize,
}

fn parse(c: &Calculus, texts: &[&str]) -> Vec<Formula> {
    texts.iter().map(|t| c.parse_formula(t).unwrap()).collect()
}

/// Replaces open leaves whose formula satisfies `pick` by hypotheses labelled `label`.
fn close(d: &Deduction, label: Label, pick: &dyn Fn(&Formula) -> bool) -> Deduction {
    match d {
        Deduction::Assumption { formula, label: None } if pick(formula) => {
            Deduction::hyp(label, formula.clone())
        }
        Deduction::Assumption { .. } => d.clone(),
        Deduction::Application {
            rule,
            discharge,
            children,
            conclusion,
        } => Deduction::Application {
            rule: rule.clone(),
            discharge: *discharge,
            children: children.iter().map(|c| close(c, label, pick)).collect(),
            conclusion: conclusion.clone(),
        },
    }
}

fn unassumed(d: &Deduction) -> Vec<Formula> {
    let mut out: Vec<Formula> = d
        .open_leaves()
        .into_iter()
        .filter(|l| l.label().is_none())
        .map(|l| l.conclusion().clone())
        .collect();
    out.sort();
    out.dedup();
    out
}

impl<'a> Generator<'a> {
    /// `seeds` are the initial open assumptions.
    pub fn new(calculus: &'a Calculus, seed: u64, seeds: &[&str], max_size: usize) -> Self {
        let atoms = parse(calculus, &["p", "q", "r"]);
        let pool = parse(calculus, seeds)
            .into_iter()
            .map(Deduction::assume)
            .collect();
        Generator {
            calculus,
            rng: ChaCha8Rng::seed_from_u64(seed),
            atoms,
            pool,
            max_size,
        }
    }

    pub fn for_calculus(calculus: &'a Calculus, seed: u64, max_size: usize) -> Self {
        let seeds: &[&str] = if calculus.is_modal() {
            &[
                "p",
                "q",
                "[]p",
                "[]q",
                "<>p",
                "[](p -> q)",
                "([]p & []q)",
                "<>[]p",
                "([]p | []q)",
                "#f",
            ]
        } else if calculus.signature.contains("~") {
            &["p", "q", "~p", "~q", "(p & q)", "(p & ~p)", "~(p & q)", "#f"]
        } else {
            &[
                "p",
                "q",
                "r",
                "(p & q)",
                "(p | q)",
                "(p -> q)",
                "((p -> q) & p)",
                "(q -> r)",
                "#f",
            ]
        };
        Self::new(calculus, seed, seeds, max_size)
    }

    fn random_formula(&mut self) -> Formula {
        if self.rng.gen_bool(0.6) {
            self.atoms.choose(&mut self.rng).unwrap().clone()
        } else {
            self.pool.choose(&mut self.rng).unwrap().conclusion().clone()
        }
    }

    /// Some pool proof (or a fresh assumption) concluding an instance of `s`.
    fn fill(&mut self, s: &Schema, asg: &mut Assignment, leaf_ok: bool) -> Option<Deduction> {
        let mut order: Vec<usize> = (0..self.pool.len()).collect();
        order.shuffle(&mut self.rng);
        for i in order.into_iter().take(24) {
            if let Some(a) = s.matches(self.pool[i].conclusion(), asg) {
                *asg = a;
                return Some(self.pool[i].clone());
            }
        }
        if !leaf_ok {
            return None;
        }
        for v in s.vars() {
            asg.entry(v).or_insert_with(|| self.random_formula());
        }
        s.instantiate(asg).map(Deduction::assume)
    }

    fn apply(&mut self, rule: &RuleSchema) -> Option<Deduction> {
        let mut asg = Assignment::new();
        let mut major = None;
        if let Some(m) = &rule.major {
            major = Some(self.fill(m, &mut asg, false)?);
        }
        let mut premises = Vec::new();
        for p in &rule.premises {
            let leaf_ok = self.rng.gen_bool(0.3);
            premises.push(self.fill(&p.conclusion, &mut asg, leaf_ok)?);
        }
        for v in rule.vars() {
            asg.entry(v).or_insert_with(|| self.random_formula());
        }
        let conclusion = rule.conclusion.instantiate(&asg)?;
        let label = major
            .iter()
            .chain(&premises)
            .map(Deduction::max_label)
            .max()
            .unwrap_or(0)
            + 1;
        let mut frame = Vec::new();
        let last = rule.premises.len().saturating_sub(1);
        for (i, (p, d)) in rule.premises.iter().zip(premises.iter_mut()).enumerate() {
            let hyps: Vec<Formula> = p.discharged.iter().filter_map(|s| s.instantiate(&asg)).collect();
            *d = close(d, label, &|f| hyps.contains(f));
            if rule.frame && i == last {
                for f in unassumed(d) {
                    let derived = self.pool.iter().find(|x| x.conclusion() == &f).cloned();
                    let pick = derived.filter(|_| self.rng.gen_bool(0.5));
                    frame.push(pick.unwrap_or_else(|| Deduction::assume(f.clone())));
                }
                *d = close(d, label, &|_| true);
            }
        }
        let mut children: Vec<Deduction> = major.into_iter().collect();
        children.extend(frame);
        children.extend(premises);
        let binds = children.iter().any(|c| !c.hyps_with_label(label).is_empty());
        let node = Deduction::Application {
            rule: rule.name.clone(),
            discharge: (rule.discharges() && binds).then_some(label),
            children,
            conclusion,
        }
        .canonical();
        (node.size() <= self.max_size && check_proof(self.calculus, &node).valid).then_some(node)
    }

    /// Runs `steps` rule applications and returns the largest proof built.
    pub fn proof(&mut self, steps: usize) -> Deduction {
        let rules = self.calculus.rules.clone();
        for _ in 0..steps {
            let r = rules.choose(&mut self.rng).unwrap();
            if let Some(d) = self.apply(r) {
                self.pool.push(d);
            }
        }
        self.pool.iter().max_by_key(|d| d.size()).cloned().unwrap()
    }
}

/// `count` generated proofs of at most `max_size` nodes, one generator per seed.
pub fn proofs(calculus: &Calculus, count: usize, max_size: usize, seed: u64) -> Vec<Deduction> {
    (0..count as u64)
        .map(|i| Generator::for_calculus(calculus, seed.wrapping_add(i), max_size).proof(60))
        .collect()
}
