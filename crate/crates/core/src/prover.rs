//! Bounded goal-directed proof search.
//!
//! Every formula in a candidate proof is drawn from a finite universe: the
//! subformulas of the sequent plus one layer of connective applications over
//! them. Depth is the nesting of rule applications. Search is exhaustive within
//! those bounds and deterministic: rules are tried in declaration order and
//! metavariables range over the universe in sorted order.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::{Serialize, Serializer};

use crate::deduction::{Deduction, Label};
use crate::error::{Error, Result};
use crate::formula::{Fixity, Formula, BOTTOM, DIAMOND};
use crate::schema::{Assignment, Calculus, RuleSchema, Schema, SideCondition};

/// Assumptions (a multiset, searched as a set) and a goal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sequent {
    pub assumptions: Vec<Formula>,
    pub goal: Formula,
}

impl Sequent {
    pub fn new(assumptions: Vec<Formula>, goal: Formula) -> Self {
        Sequent { assumptions, goal }
    }

    /// Parses `a1, a2 |- g` (the assumption list may be empty).
    pub fn parse(text: &str, calculus: &Calculus) -> Result<Self> {
        let (lhs, rhs) = text.split_once("|-").ok_or_else(|| Error::Syntax {
            line: 1,
            column: 1,
            message: format!("expected `assumptions |- goal`, found `{text}`"),
        })?;
        let assumptions = lhs
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| calculus.parse_formula(s))
            .collect::<Result<_>>()?;
        Ok(Sequent {
            assumptions,
            goal: calculus.parse_formula(rhs.trim())?,
        })
    }

    fn formulas(&self) -> impl Iterator<Item = &Formula> {
        self.assumptions.iter().chain(std::iter::once(&self.goal))
    }
}

impl fmt::Display for Sequent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let lhs: Vec<String> = self.assumptions.iter().map(ToString::to_string).collect();
        if lhs.is_empty() {
            write!(f, "|- {}", self.goal)
        } else {
            write!(f, "{} |- {}", lhs.join(", "), self.goal)
        }
    }
}

impl Serialize for Sequent {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

fn proof_as_text<S: Serializer>(p: &Option<Deduction>, s: S) -> Result<S::Ok, S::Error> {
    match p {
        Some(d) => s.collect_str(d),
        None => s.serialize_none(),
    }
}

/// `found` implies `proof` is valid, concludes the goal and depends only on the assumptions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SearchResult {
    pub found: bool,
    #[serde(serialize_with = "proof_as_text")]
    pub proof: Option<Deduction>,
    pub nodes_explored: usize,
    pub depth: usize,
}

/// Subformula closure of the sequent plus one layer of connective applications.
pub fn universe(calculus: &Calculus, sequent: &Sequent) -> BTreeSet<Formula> {
    let mut base: BTreeSet<Formula> = BTreeSet::new();
    for f in sequent.formulas() {
        base.extend(f.subformulas().into_iter().cloned());
    }
    let items: Vec<Formula> = base.iter().cloned().collect();
    let mut out = base;
    for c in calculus.signature.iter() {
        match c.fixity {
            Fixity::Nullary => {
                out.insert(Formula::constant(&c.name));
            }
            Fixity::Prefix => out.extend(items.iter().map(|a| Formula::unary(&c.name, a.clone()))),
            Fixity::Infix => {
                for a in &items {
                    for b in &items {
                        out.insert(Formula::binary(&c.name, a.clone(), b.clone()));
                    }
                }
            }
        }
    }
    out
}

/// Hypotheses in scope: formula to its source (`None` for an open assumption).
type Context = BTreeMap<Formula, Option<Label>>;

type Key = (Formula, usize, Vec<(Formula, Option<Label>)>, Label);

struct Search<'a> {
    calculus: &'a Calculus,
    universe: Vec<Formula>,
    members: BTreeSet<Formula>,
    memo: HashMap<Key, Option<Deduction>>,
    explored: usize,
}

/// Which context formulas a premise of a restricted rule may use.
fn admits(side: SideCondition, f: &Formula) -> bool {
    match side {
        SideCondition::S4BoxedAssumptions | SideCondition::S4Possibility => f.is_boxed(),
        SideCondition::S5ModalisedAssumptions | SideCondition::S5Possibility => f.is_modalised(),
        SideCondition::None | SideCondition::BotAtomicConclusion => true,
    }
}

impl Search<'_> {
    fn prove(&mut self, goal: &Formula, depth: usize, ctx: &Context, next: Label) -> Option<Deduction> {
        if let Some(&label) = ctx.get(goal) {
            return Some(Deduction::Assumption {
                formula: goal.clone(),
                label,
            });
        }
        if depth == 0 {
            return None;
        }
        let key: Key = (
            goal.clone(),
            depth,
            ctx.iter().map(|(f, l)| (f.clone(), *l)).collect(),
            next,
        );
        if let Some(hit) = self.memo.get(&key) {
            return hit.clone();
        }
        // Shallowest proof first, so every subproof has minimal depth.
        let found = match self.prove(goal, depth - 1, ctx, next) {
            Some(d) => Some(d),
            None => {
                self.explored += 1;
                self.expand(goal, depth, ctx, next)
            }
        };
        self.memo.insert(key, found.clone());
        found
    }

    fn expand(&mut self, goal: &Formula, depth: usize, ctx: &Context, next: Label) -> Option<Deduction> {
        let calculus = self.calculus;
        for rule in &calculus.rules {
            if !self.conclusion_allowed(rule, goal) {
                continue;
            }
            let mut asg = Assignment::new();
            if !rule.conclusion.match_into(goal, &mut asg) {
                continue;
            }
            for asg in self.instances(rule, asg) {
                if let Some(d) = self.try_instance(rule, &asg, goal, depth, ctx, next) {
                    return Some(d);
                }
            }
        }
        None
    }

    fn conclusion_allowed(&self, rule: &RuleSchema, goal: &Formula) -> bool {
        match rule.side {
            SideCondition::S4Possibility => goal.root() == Some(DIAMOND),
            SideCondition::S5Possibility => goal.is_modalised(),
            SideCondition::BotAtomicConclusion => {
                goal.is_atom() || (self.calculus.is_modal() && goal.is_boxed())
            }
            _ => true,
        }
    }

    /// Assignments extending `asg` under which every schema of `rule` lands in the universe.
    fn instances(&self, rule: &RuleSchema, asg: Assignment) -> Vec<Assignment> {
        let mut schemas: Vec<&Schema> = rule.major.iter().collect();
        for p in &rule.premises {
            schemas.push(&p.conclusion);
            schemas.extend(&p.discharged);
        }
        let mut out = Vec::new();
        self.extend(&schemas, asg, &mut out);
        out
    }

    fn extend(&self, schemas: &[&Schema], asg: Assignment, out: &mut Vec<Assignment>) {
        let Some((s, rest)) = schemas.split_first() else {
            out.push(asg);
            return;
        };
        if let Some(f) = s.instantiate(&asg) {
            if self.members.contains(&f) {
                self.extend(rest, asg, out);
            }
            return;
        }
        for u in &self.universe {
            if let Some(a) = s.matches(u, &asg) {
                self.extend(rest, a, out);
            }
        }
    }

    fn try_instance(
        &mut self,
        rule: &RuleSchema,
        asg: &Assignment,
        goal: &Formula,
        depth: usize,
        ctx: &Context,
        next: Label,
    ) -> Option<Deduction> {
        let inst = |s: &Schema| s.instantiate(asg).expect("instances bind every metavariable");
        let mut children = Vec::new();
        if let Some(m) = &rule.major {
            children.push(self.prove(&inst(m), depth - 1, ctx, next)?);
        }
        let label = next;
        let last = rule.premises.len().saturating_sub(1);
        let mut premises = Vec::new();
        let mut frame = Vec::new();
        let mut binds = false;
        for (i, p) in rule.premises.iter().enumerate() {
            let hyps: Vec<Formula> = p.discharged.iter().map(inst).collect();
            if rule.frame && i == last {
                let pool: Vec<Formula> = ctx.keys().filter(|f| admits(rule.side, f)).cloned().collect();
                if rule.side == SideCondition::S5Possibility && !hyps.iter().all(Formula::is_modalised) {
                    return None;
                }
                let mut inner: Context = pool.iter().map(|f| (f.clone(), Some(label))).collect();
                inner.extend(hyps.iter().map(|h| (h.clone(), Some(label))));
                let body = self.prove(&inst(&p.conclusion), depth - 1, &inner, next + 1)?;
                let used: BTreeSet<&Formula> = body.hyps_with_label(label).into_iter().collect();
                for f in pool.iter().filter(|f| used.contains(f)) {
                    frame.push(Deduction::Assumption {
                        formula: f.clone(),
                        label: ctx[f],
                    });
                }
                binds |= !used.is_empty();
                premises.push(body);
                continue;
            }
            let mut inner: Context = if i == last && !rule.side.is_none() {
                ctx.iter()
                    .filter(|(f, _)| admits(rule.side, f))
                    .map(|(f, l)| (f.clone(), *l))
                    .collect()
            } else {
                ctx.clone()
            };
            inner.extend(hyps.iter().map(|h| (h.clone(), Some(label))));
            let child = self.prove(&inst(&p.conclusion), depth - 1, &inner, next + 1)?;
            binds |= !child.hyps_with_label(label).is_empty();
            premises.push(child);
        }
        children.extend(frame);
        children.extend(premises);
        Some(Deduction::Application {
            rule: rule.name.clone(),
            discharge: binds.then_some(label),
            children,
            conclusion: goal.clone(),
        })
    }
}

/// Searches for a proof of `sequent` of depth at most `depth`.
pub fn search(calculus: &Calculus, sequent: &Sequent, depth: usize) -> SearchResult {
    let members = universe(calculus, sequent);
    let mut s = Search {
        calculus,
        universe: members.iter().cloned().collect(),
        members,
        memo: HashMap::new(),
        explored: 0,
    };
    let ctx: Context = sequent.assumptions.iter().map(|f| (f.clone(), None)).collect();
    let proof = s.prove(&sequent.goal, depth, &ctx, 1).map(|d| d.canonical());
    SearchResult {
        found: proof.is_some(),
        proof,
        nodes_explored: s.explored,
        depth,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Probe {
    pub sequent: Sequent,
    pub result: SearchResult,
}

/// Closed derivability of falsum and of a fresh atom, and whether a second
/// fresh atom follows from the first.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConsistencyReport {
    pub depth: usize,
    /// Absent when the calculus has no falsum constant.
    pub falsum: Option<Probe>,
    pub atom: Probe,
    pub trivialising: Probe,
}

impl ConsistencyReport {
    /// Neither falsum nor the fresh atom is provable from no assumptions.
    pub fn consistent(&self) -> bool {
        !self.atom.result.found && self.falsum.as_ref().is_none_or(|p| !p.result.found)
    }
}

fn probe(calculus: &Calculus, sequent: Sequent, depth: usize) -> Probe {
    let result = search(calculus, &sequent, depth);
    Probe { sequent, result }
}

/// Atoms not mentioned in any rule of `calculus`.
fn fresh_atoms(calculus: &Calculus) -> (Formula, Formula) {
    let used: BTreeSet<String> = calculus
        .rules
        .iter()
        .map(RuleSchema::render)
        .flat_map(|text| {
            text.split(|c: char| !c.is_ascii_alphanumeric() && c != '_')
                .map(str::to_string)
                .collect::<Vec<_>>()
        })
        .collect();
    let mut fresh = ["p", "q", "r", "s"]
        .into_iter()
        .map(str::to_string)
        .chain((0..).map(|i| format!("p{i}")))
        .filter(|a| !used.contains(a) && !calculus.signature.contains(a));
    let a = fresh.next().expect("infinitely many atoms");
    let b = fresh.next().expect("infinitely many atoms");
    (Formula::atom(a), Formula::atom(b))
}

pub fn check_consistency(calculus: &Calculus, depth: usize) -> ConsistencyReport {
    let (p, q) = fresh_atoms(calculus);
    let falsum = calculus
        .signature
        .contains(BOTTOM)
        .then(|| probe(calculus, Sequent::new(vec![], Formula::constant(BOTTOM)), depth));
    ConsistencyReport {
        depth,
        falsum,
        atom: probe(calculus, Sequent::new(vec![], p.clone()), depth),
        trivialising: probe(calculus, Sequent::new(vec![p], q), depth),
    }
}

/// A probe unprovable in the base calculus but provable in the extension.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Witness {
    pub sequent: Sequent,
    #[serde(serialize_with = "deduction_as_text")]
    pub proof: Deduction,
}

fn deduction_as_text<S: Serializer>(d: &Deduction, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(d)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConservativityReport {
    pub depth: usize,
    pub probes: usize,
    pub witnesses: Vec<Witness>,
}

impl ConservativityReport {
    pub fn conservative(&self) -> bool {
        self.witnesses.is_empty()
    }
}

/// Fails unless every rule of `base` is in `extended` and every probe uses base vocabulary only.
pub fn check_conservativity(
    base: &Calculus,
    extended: &Calculus,
    probes: &[Sequent],
    depth: usize,
) -> Result<ConservativityReport> {
    for r in &base.rules {
        if extended.rule(&r.name) != Some(r) {
            return Err(Error::NotAnExtension(r.name.clone()));
        }
    }
    for s in probes {
        for f in s.formulas() {
            if let Some(c) = f.connectives().into_iter().find(|c| !base.signature.contains(c)) {
                return Err(Error::VocabularyViolation(format!("`{c}` in {s}")));
            }
        }
    }
    let mut witnesses = Vec::new();
    for s in probes {
        if search(base, s, depth).found {
            continue;
        }
        if let Some(proof) = search(extended, s, depth).proof {
            witnesses.push(Witness {
                sequent: s.clone(),
                proof,
            });
        }
    }
    Ok(ConservativityReport {
        depth,
        probes: probes.len(),
        witnesses,
    })
}

/// Searches `f |- g` and `g |- f`.
pub fn check_interderivable(
    calculus: &Calculus,
    f: &Formula,
    g: &Formula,
    depth: usize,
) -> (SearchResult, SearchResult) {
    (
        search(calculus, &Sequent::new(vec![f.clone()], g.clone()), depth),
        search(calculus, &Sequent::new(vec![g.clone()], f.clone()), depth),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use crate::deduction::check_proof;

    fn seq(c: &Calculus, text: &str) -> Sequent {
        Sequent::parse(text, c).unwrap()
    }

    fn assert_sound(c: &Calculus, s: &Sequent, r: &SearchResult) {
        let d = r.proof.as_ref().expect("found");
        let report = check_proof(c, d);
        assert!(report.valid, "{}: {:?}", d, report.violations);
        assert_eq!(d.conclusion(), &s.goal);
        assert!(report.open_assumptions.iter().all(|f| s.assumptions.contains(f)));
    }

    #[test]
    fn conjunction_elimination() {
        let c = corpus::load("ipl").unwrap();
        let s = seq(&c, "(p & q) |- p");
        let r = search(&c, &s, 2);
        assert!(r.found);
        assert_sound(&c, &s, &r);
        assert_eq!(r.proof.unwrap().render(), "(apply andE1 (assume (p & q)) => p)");
    }

    #[test]
    fn nothing_from_nothing() {
        let c = corpus::load("ipl").unwrap();
        assert!(!search(&c, &seq(&c, "|- p"), 6).found);
        let report = check_consistency(&c, 6);
        assert!(report.consistent());
        assert!(!report.trivialising.result.found);
    }

    #[test]
    fn tonk_trivialises() {
        let c = corpus::load("tonk").unwrap();
        let s = seq(&c, "p |- q");
        let r = search(&c, &s, 2);
        assert!(r.found);
        assert_sound(&c, &s, &r);
        assert!(check_consistency(&c, 3).trivialising.result.found);
    }

    #[test]
    fn discharging_proofs() {
        let c = corpus::load("ipl").unwrap();
        for text in [
            "|- (p -> p)",
            "(p | q) |- (q | p)",
            "(p -> q), (q -> r) |- (p -> r)",
        ] {
            let s = seq(&c, text);
            let r = search(&c, &s, 4);
            assert!(r.found, "{text}");
            assert_sound(&c, &s, &r);
        }
    }

    #[test]
    fn modal_side_conditions_respected() {
        let c = corpus::load("s4").unwrap();
        assert!(!search(&c, &seq(&c, "p |- []p"), 4).found);
        let s = seq(&c, "[]p |- [][]p");
        let r = search(&c, &s, 4);
        assert_sound(&c, &s, &r);
        let c = corpus::load("s4-frame").unwrap();
        assert!(!search(&c, &seq(&c, "p |- []p"), 4).found);
        let s = seq(&c, "[]p, q |- [][]p");
        let r = search(&c, &s, 4);
        assert_sound(&c, &s, &r);
        let s = seq(&c, "<>p, [](p -> q) |- <>q");
        let r = search(&c, &s, 4);
        assert_sound(&c, &s, &r);
    }

    #[test]
    fn twins() {
        let c = corpus::load("ipl-times").unwrap();
        let f = c.parse_formula("(p & q)").unwrap();
        let g = c.parse_formula("(p x q)").unwrap();
        let (a, b) = check_interderivable(&c, &f, &g, 4);
        assert!(a.found && b.found);
        let (a, b) = check_interderivable(&c, &Formula::atom("p"), &Formula::atom("q"), 4);
        assert!(!a.found && !b.found);
    }

    #[test]
    fn conservativity() {
        let ipl = corpus::load("ipl").unwrap();
        let ext = corpus::load("ipl-tonk").unwrap();
        let probes = vec![seq(&ipl, "p |- q")];
        let report = check_conservativity(&ipl, &ext, &probes, 3).unwrap();
        assert_eq!(report.witnesses.len(), 1);
        assert!(check_conservativity(&ipl, &ext, &[], 3).unwrap().conservative());
        let bad = vec![seq(&ext, "(p tonk q) |- q")];
        assert!(matches!(
            check_conservativity(&ipl, &ext, &bad, 3),
            Err(Error::VocabularyViolation(_))
        ));
        assert!(matches!(
            check_conservativity(&ext, &ipl, &probes, 3),
            Err(Error::NotAnExtension(_))
        ));
    }

    #[test]
    fn sequent_syntax() {
        let c = corpus::load("ipl").unwrap();
        assert_eq!(seq(&c, " p , (p -> q) |- q").to_string(), "p, (p -> q) |- q");
        assert_eq!(seq(&c, "|- p").assumptions.len(), 0);
        assert!(Sequent::parse("p q", &c).is_err());
    }
}
