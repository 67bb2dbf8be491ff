//! Inference-rule schemas, the calculus file format, rule classification
//! and the read-off of counterpart rules.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::formula::{Connective, Fixity, Formula, Signature, BOX, DIAMOND};
use crate::syntax::{self, Cursor};

/// Metavariable assignment produced by matching schemas against formulas.
pub type Assignment = BTreeMap<String, Formula>;

/// A formula pattern: uppercase identifiers are metavariables.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Schema {
    Var(String),
    Atom(String),
    Compound(String, Vec<Schema>),
}

impl Schema {
    pub fn var(name: &str) -> Self {
        Schema::Var(name.to_string())
    }

    pub fn parse(text: &str, sig: &Signature) -> Result<Self> {
        let mut cur = Cursor::new(text);
        let s = cur.schema(sig)?;
        if !cur.at_end() {
            return Err(cur.error("trailing input after schema"));
        }
        Ok(s)
    }

    pub fn root(&self) -> Option<&str> {
        match self {
            Schema::Compound(op, _) => Some(op),
            _ => None,
        }
    }

    pub fn args(&self) -> &[Schema] {
        match self {
            Schema::Compound(_, args) => args,
            _ => &[],
        }
    }

    pub fn as_var(&self) -> Option<&str> {
        match self {
            Schema::Var(v) => Some(v),
            _ => None,
        }
    }

    /// Metavariables in order of first occurrence.
    pub fn vars(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut Vec<String>) {
        match self {
            Schema::Var(v) => {
                if !out.contains(v) {
                    out.push(v.clone());
                }
            }
            Schema::Atom(_) => {}
            Schema::Compound(_, args) => args.iter().for_each(|a| a.collect_vars(out)),
        }
    }

    pub fn contains_var(&self, name: &str) -> bool {
        match self {
            Schema::Var(v) => v == name,
            Schema::Atom(_) => false,
            Schema::Compound(_, args) => args.iter().any(|a| a.contains_var(name)),
        }
    }

    pub fn is_ground(&self) -> bool {
        match self {
            Schema::Var(_) => false,
            Schema::Atom(_) => true,
            Schema::Compound(_, args) => args.iter().all(Schema::is_ground),
        }
    }

    pub fn connectives(&self) -> Vec<&str> {
        match self {
            Schema::Compound(op, args) => {
                let mut out = vec![op.as_str()];
                out.extend(args.iter().flat_map(Schema::connectives));
                out
            }
            _ => Vec::new(),
        }
    }

    /// The formula this schema denotes if it has no metavariables.
    pub fn to_formula(&self) -> Option<Formula> {
        match self {
            Schema::Var(_) => None,
            Schema::Atom(a) => Some(Formula::Atom(a.clone())),
            Schema::Compound(op, args) => Some(Formula::Compound(
                op.clone(),
                args.iter().map(Schema::to_formula).collect::<Option<_>>()?,
            )),
        }
    }

    pub fn from_formula(f: &Formula) -> Self {
        match f {
            Formula::Atom(a) => Schema::Atom(a.clone()),
            Formula::Compound(op, args) => {
                Schema::Compound(op.clone(), args.iter().map(Schema::from_formula).collect())
            }
        }
    }

    /// Substitutes `assignment`; `None` if some metavariable is unassigned.
    pub fn instantiate(&self, assignment: &Assignment) -> Option<Formula> {
        match self {
            Schema::Var(v) => assignment.get(v).cloned(),
            Schema::Atom(a) => Some(Formula::Atom(a.clone())),
            Schema::Compound(op, args) => Some(Formula::Compound(
                op.clone(),
                args.iter()
                    .map(|a| a.instantiate(assignment))
                    .collect::<Option<_>>()?,
            )),
        }
    }

    /// Structural match against a ground formula, extending `assignment`.
    /// On failure `assignment` may hold partial bindings; callers match on a copy.
    pub fn match_into(&self, f: &Formula, assignment: &mut Assignment) -> bool {
        match (self, f) {
            (Schema::Var(v), _) => match assignment.get(v) {
                Some(bound) => bound == f,
                None => {
                    assignment.insert(v.clone(), f.clone());
                    true
                }
            },
            (Schema::Atom(a), Formula::Atom(b)) => a == b,
            (Schema::Compound(op, sargs), Formula::Compound(fop, fargs)) => {
                op == fop
                    && sargs.len() == fargs.len()
                    && sargs.iter().zip(fargs).all(|(s, f)| s.match_into(f, assignment))
            }
            _ => false,
        }
    }

    /// Non-destructive match: the extended assignment, if consistent.
    pub fn matches(&self, f: &Formula, assignment: &Assignment) -> Option<Assignment> {
        let mut a = assignment.clone();
        self.match_into(f, &mut a).then_some(a)
    }

    pub fn rename(&self, map: &BTreeMap<String, String>) -> Schema {
        match self {
            Schema::Var(v) => Schema::Var(map.get(v).cloned().unwrap_or_else(|| v.clone())),
            Schema::Atom(_) => self.clone(),
            Schema::Compound(op, args) => {
                Schema::Compound(op.clone(), args.iter().map(|a| a.rename(map)).collect())
            }
        }
    }
}

impl fmt::Display for Schema {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Schema::Var(v) | Schema::Atom(v) => f.write_str(v),
            Schema::Compound(op, args) => {
                let args: Vec<String> = args.iter().map(ToString::to_string).collect();
                let mut out = String::new();
                syntax::render_node(&mut out, op, &args);
                f.write_str(&out)
            }
        }
    }
}

/// One premise of a rule: its conclusion and the hypotheses the rule closes above it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PremiseSchema {
    pub discharged: Vec<Schema>,
    pub conclusion: Schema,
}

impl PremiseSchema {
    pub fn plain(conclusion: Schema) -> Self {
        PremiseSchema {
            discharged: Vec::new(),
            conclusion,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RuleKind {
    Intro,
    Elim,
}

impl RuleKind {
    pub fn keyword(self) -> &'static str {
        match self {
            RuleKind::Intro => "intro",
            RuleKind::Elim => "elim",
        }
    }
}

/// Restrictions on rule application. Anything but `None` rules out stability.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum SideCondition {
    #[default]
    None,
    /// Every assumption the premise depends on is of the form `[]C`.
    S4BoxedAssumptions,
    /// Every assumption the premise depends on is modalised.
    S5ModalisedAssumptions,
    /// The conclusion is `<>D` and the other assumptions of the case are boxed.
    S4Possibility,
    /// The conclusion and the other assumptions of the case are modalised.
    S5Possibility,
    /// The conclusion is atomic, or of the form `[]A` in a modal calculus.
    BotAtomicConclusion,
}

impl SideCondition {
    pub const ALL: [SideCondition; 6] = [
        SideCondition::None,
        SideCondition::S4BoxedAssumptions,
        SideCondition::S5ModalisedAssumptions,
        SideCondition::S4Possibility,
        SideCondition::S5Possibility,
        SideCondition::BotAtomicConclusion,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            SideCondition::None => "none",
            SideCondition::S4BoxedAssumptions => "s4-boxed-assumptions",
            SideCondition::S5ModalisedAssumptions => "s5-modalised-assumptions",
            SideCondition::S4Possibility => "s4-possibility",
            SideCondition::S5Possibility => "s5-possibility",
            SideCondition::BotAtomicConclusion => "bot-atomic-conclusion",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|s| s.tag() == tag)
    }

    pub fn is_none(self) -> bool {
        self == SideCondition::None
    }
}

impl fmt::Display for SideCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

/// An inference-rule pattern.
///
/// Frame rules carry, besides `premises`, a variable number of frame premises
/// `A1..An` that must be exactly the open assumptions of the body premise
/// (the last entry of `premises`), where they are discharged.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RuleSchema {
    pub name: String,
    pub kind: RuleKind,
    pub major: Option<Schema>,
    pub premises: Vec<PremiseSchema>,
    pub conclusion: Schema,
    pub side: SideCondition,
    pub frame: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RuleClass {
    Type1Intro,
    Type2Elim,
    FrameForm,
    Other,
}

/// How well an intro rule's conclusion is built from its premises.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum IntroFit {
    /// All and only the premises and discharged hypotheses.
    Exact,
    /// Only premises and hypotheses, plus unconstrained metavariables (tonk, `|I`).
    Partial,
    None,
}

impl RuleSchema {
    /// Every metavariable of the rule.
    pub fn vars(&self) -> Vec<String> {
        let mut out = Vec::new();
        for s in self.schemas() {
            s.collect_vars(&mut out);
        }
        out
    }

    fn schemas(&self) -> impl Iterator<Item = &Schema> {
        self.major
            .iter()
            .chain(
                self.premises
                    .iter()
                    .flat_map(|p| p.discharged.iter().chain(std::iter::once(&p.conclusion))),
            )
            .chain(std::iter::once(&self.conclusion))
    }

    /// Whether applications of the rule bind hypotheses.
    pub fn discharges(&self) -> bool {
        self.frame || self.premises.iter().any(|p| !p.discharged.is_empty())
    }

    /// Connective whose formula the rule introduces or eliminates.
    pub fn principal_connective(&self) -> Option<&str> {
        match self.kind {
            RuleKind::Intro => self.conclusion.root(),
            RuleKind::Elim => self.major.as_ref().and_then(Schema::root),
        }
    }

    /// Connectives the rule is counted against when forming verdicts.
    ///
    /// Rules without a principal connective (consequentia mirabilis concludes a bare `A`)
    /// are attributed to the main operators of their discharged hypotheses.
    pub fn governs(&self) -> Vec<String> {
        if let Some(c) = self.principal_connective() {
            return vec![c.to_string()];
        }
        let mut out: Vec<String> = Vec::new();
        for h in self.premises.iter().flat_map(|p| &p.discharged) {
            if let Some(op) = h.root() {
                if !out.iter().any(|o| o == op) {
                    out.push(op.to_string());
                }
            }
        }
        out
    }

    /// Metavariables of an intro conclusion that no premise or hypothesis constrains.
    pub fn unconstrained_vars(&self) -> Vec<String> {
        if self.kind != RuleKind::Intro {
            return Vec::new();
        }
        self.conclusion
            .vars()
            .into_iter()
            .filter(|v| {
                !self
                    .premises
                    .iter()
                    .any(|p| p.conclusion.contains_var(v) || p.discharged.iter().any(|d| d.contains_var(v)))
            })
            .collect()
    }

    /// Elim rule whose premises all conclude its own (metavariable) conclusion,
    /// so that a segment of equal formulas can thread through it.
    pub fn is_threading(&self) -> bool {
        self.kind == RuleKind::Elim
            && !self.premises.is_empty()
            && self.conclusion.as_var().is_some()
            && self.premises.iter().all(|p| p.conclusion == self.conclusion)
    }

    /// The rule with its frame premises dropped.
    pub fn unframed(&self) -> RuleSchema {
        RuleSchema {
            frame: false,
            ..self.clone()
        }
    }

    /// Shape only: no name, no side condition, no frame.
    pub fn stripped(&self) -> RuleSchema {
        RuleSchema {
            name: String::new(),
            side: SideCondition::None,
            frame: false,
            ..self.clone()
        }
    }

    pub(crate) fn intro_fit(&self) -> IntroFit {
        if self.kind != RuleKind::Intro || self.major.is_some() {
            return IntroFit::None;
        }
        let Some(constituents) = self.conclusion.root().map(|_| self.conclusion.args()) else {
            return IntroFit::None;
        };
        let items: Vec<&Schema> = self
            .premises
            .iter()
            .flat_map(|p| std::iter::once(&p.conclusion).chain(&p.discharged))
            .collect();
        let mut remaining: Vec<&Schema> = constituents.iter().collect();
        for item in &items {
            if let Some(i) = remaining.iter().position(|c| c == item) {
                remaining.remove(i);
            } else if !item.is_ground() {
                // fixed parameters such as the `#f` premise of `~I` need not be constituents
                return IntroFit::None;
            }
        }
        if remaining.is_empty() {
            return IntroFit::Exact;
        }
        let free = remaining.iter().all(|c| {
            c.as_var()
                .is_some_and(|v| !items.iter().any(|i| i.contains_var(v)))
        });
        if free {
            IntroFit::Partial
        } else {
            IntroFit::None
        }
    }

    pub(crate) fn is_type2(&self) -> bool {
        if self.kind != RuleKind::Elim {
            return false;
        }
        let (Some(major), Some(c)) = (&self.major, self.conclusion.as_var()) else {
            return false;
        };
        if major.root().is_none() || major.contains_var(c) {
            return false;
        }
        if !self.premises.iter().all(|p| p.conclusion == self.conclusion) {
            return false;
        }
        let mut hyps: Vec<&Schema> = self.premises.iter().flat_map(|p| &p.discharged).collect();
        if hyps.iter().any(|h| h.contains_var(c)) {
            return false;
        }
        let mut constituents: Vec<&Schema> = major.args().iter().collect();
        hyps.sort();
        constituents.sort();
        hyps == constituents
    }

    pub fn classify(&self) -> RuleClass {
        if self.frame {
            let base = self.unframed();
            let shaped = self.premises.len() == 1
                && match self.kind {
                    RuleKind::Intro => {
                        self.premises[0].discharged.is_empty() && base.intro_fit() == IntroFit::Exact
                    }
                    RuleKind::Elim => base.is_type2(),
                };
            return if shaped {
                RuleClass::FrameForm
            } else {
                RuleClass::Other
            };
        }
        if self.intro_fit() == IntroFit::Exact {
            RuleClass::Type1Intro
        } else if self.is_type2() {
            RuleClass::Type2Elim
        } else {
            RuleClass::Other
        }
    }

    /// E-rules read off an intro rule: one per premise, that premise as conclusion,
    /// its discharged hypotheses as minor premises, the intro conclusion as major.
    pub(crate) fn read_off_elims(&self) -> Vec<RuleSchema> {
        let n = self.premises.len();
        self.premises
            .iter()
            .enumerate()
            .map(|(i, p)| RuleSchema {
                name: counterpart_name(&self.name, 'I', 'E', i, n),
                kind: RuleKind::Elim,
                major: Some(self.conclusion.clone()),
                premises: p.discharged.iter().cloned().map(PremiseSchema::plain).collect(),
                conclusion: p.conclusion.clone(),
                side: SideCondition::None,
                frame: false,
            })
            .collect()
    }

    /// I-rules read off an elim rule: one per collateral deduction, with that
    /// deduction's discharged hypotheses as premises and the major premise as conclusion.
    pub(crate) fn read_off_intros(&self) -> Vec<RuleSchema> {
        let Some(major) = &self.major else {
            return Vec::new();
        };
        let n = self.premises.len();
        self.premises
            .iter()
            .enumerate()
            .map(|(i, p)| RuleSchema {
                name: counterpart_name(&self.name, 'E', 'I', i, n),
                kind: RuleKind::Intro,
                major: None,
                premises: p.discharged.iter().cloned().map(PremiseSchema::plain).collect(),
                conclusion: major.clone(),
                side: SideCondition::None,
                frame: false,
            })
            .collect()
    }

    fn validate(&self, sig: &Signature) -> Result<()> {
        match (self.kind, &self.major) {
            (RuleKind::Intro, Some(_)) => {
                return Err(Error::Syntax {
                    line: 0,
                    column: 0,
                    message: format!("intro rule `{}` cannot have a major premise", self.name),
                })
            }
            (RuleKind::Elim, None) => {
                return Err(Error::Syntax {
                    line: 0,
                    column: 0,
                    message: format!("elim rule `{}` needs a major premise", self.name),
                })
            }
            _ => {}
        }
        for s in self.schemas() {
            for c in s.connectives() {
                if !sig.contains(c) {
                    return Err(Error::UndeclaredConnective(c.to_string()));
                }
            }
        }
        Ok(())
    }

    /// Rule block in calculus-file syntax.
    pub fn render(&self) -> String {
        let mut out = format!("rule {} kind {}", self.name, self.kind.keyword());
        if !self.side.is_none() {
            out.push_str(&format!(" side {}", self.side));
        }
        if self.frame {
            out.push_str(" frame");
        }
        out.push('\n');
        if let Some(m) = &self.major {
            out.push_str(&format!("  major {m}\n"));
        }
        for p in &self.premises {
            out.push_str("  premise ");
            if !p.discharged.is_empty() {
                let hyps: Vec<String> = p.discharged.iter().map(ToString::to_string).collect();
                out.push_str(&format!("discharge {} ", hyps.join(", ")));
            }
            out.push_str(&format!("{}\n", p.conclusion));
        }
        out.push_str(&format!("  conclusion {}\n", self.conclusion));
        out
    }
}

impl fmt::Display for RuleSchema {
    /// One-line summary: `name: major; [hyps] prem; ... => conclusion`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        if let Some(m) = &self.major {
            parts.push(m.to_string());
        }
        if self.frame {
            parts.push("A1..An".to_string());
        }
        for p in &self.premises {
            if p.discharged.is_empty() {
                parts.push(p.conclusion.to_string());
            } else {
                let hyps: Vec<String> = p.discharged.iter().map(ToString::to_string).collect();
                parts.push(format!("[{}] {}", hyps.join(", "), p.conclusion));
            }
        }
        write!(f, "{}: {} => {}", self.name, parts.join("; "), self.conclusion)?;
        if !self.side.is_none() {
            write!(f, " ({})", self.side)?;
        }
        Ok(())
    }
}

fn counterpart_name(name: &str, from: char, to: char, index: usize, total: usize) -> String {
    let stem = name
        .strip_suffix(from)
        .map_or_else(|| format!("{name}_"), str::to_string);
    if total == 1 {
        format!("{stem}{to}")
    } else {
        format!("{stem}{to}{}", index + 1)
    }
}

pub fn classify_rule(r: &RuleSchema) -> RuleClass {
    r.classify()
}

pub fn derive_elims_from_intro(r: &RuleSchema) -> Result<Vec<RuleSchema>> {
    if r.classify() != RuleClass::Type1Intro {
        return Err(Error::NotType1(r.name.clone()));
    }
    Ok(r.read_off_elims())
}

pub fn derive_intros_from_elim(r: &RuleSchema) -> Result<Vec<RuleSchema>> {
    if r.classify() != RuleClass::Type2Elim {
        return Err(Error::NotType2(r.name.clone()));
    }
    Ok(r.read_off_intros())
}

/// Bijective metavariable renaming under construction.
#[derive(Debug, Clone, Default)]
struct Renaming {
    forward: BTreeMap<String, String>,
    backward: BTreeMap<String, String>,
}

impl Renaming {
    fn unify(&mut self, a: &Schema, b: &Schema) -> bool {
        match (a, b) {
            (Schema::Var(x), Schema::Var(y)) => match (self.forward.get(x), self.backward.get(y)) {
                (Some(fy), Some(bx)) => fy == y && bx == x,
                (None, None) => {
                    self.forward.insert(x.clone(), y.clone());
                    self.backward.insert(y.clone(), x.clone());
                    true
                }
                _ => false,
            },
            (Schema::Atom(x), Schema::Atom(y)) => x == y,
            (Schema::Compound(p, xs), Schema::Compound(q, ys)) => {
                p == q && xs.len() == ys.len() && xs.iter().zip(ys).all(|(x, y)| self.unify(x, y))
            }
            _ => false,
        }
    }

    /// Matches two multisets of schemas under a common renaming, backtracking over orderings.
    fn unify_multiset(&self, xs: &[&Schema], ys: &[&Schema]) -> Option<Renaming> {
        if xs.len() != ys.len() {
            return None;
        }
        let Some((first, rest)) = xs.split_first() else {
            return Some(self.clone());
        };
        for (j, y) in ys.iter().enumerate() {
            let mut attempt = self.clone();
            if attempt.unify(first, y) {
                let others: Vec<&Schema> = ys
                    .iter()
                    .enumerate()
                    .filter(|&(k, _)| k != j)
                    .map(|(_, y)| *y)
                    .collect();
                if let Some(done) = attempt.unify_multiset(rest, &others) {
                    return Some(done);
                }
            }
        }
        None
    }

    fn unify_premises(&self, xs: &[PremiseSchema], ys: &[&PremiseSchema]) -> bool {
        if xs.len() != ys.len() {
            return false;
        }
        let Some((first, rest)) = xs.split_first() else {
            return true;
        };
        for (j, y) in ys.iter().enumerate() {
            let mut attempt = self.clone();
            if !attempt.unify(&first.conclusion, &y.conclusion) {
                continue;
            }
            let hx: Vec<&Schema> = first.discharged.iter().collect();
            let hy: Vec<&Schema> = y.discharged.iter().collect();
            if let Some(next) = attempt.unify_multiset(&hx, &hy) {
                let others: Vec<&PremiseSchema> = ys
                    .iter()
                    .enumerate()
                    .filter(|&(k, _)| k != j)
                    .map(|(_, y)| *y)
                    .collect();
                if next.unify_premises(rest, &others) {
                    return true;
                }
            }
        }
        false
    }
}

/// Identity up to bijective renaming of metavariables and reordering of premises.
/// Rule names are ignored; kind, side condition and frame flag must agree.
pub fn schema_equivalent(a: &RuleSchema, b: &RuleSchema) -> bool {
    if a.kind != b.kind || a.side != b.side || a.frame != b.frame {
        return false;
    }
    let mut ren = Renaming::default();
    match (&a.major, &b.major) {
        (Some(x), Some(y)) => {
            if !ren.unify(x, y) {
                return false;
            }
        }
        (None, None) => {}
        _ => return false,
    }
    if !ren.unify(&a.conclusion, &b.conclusion) {
        return false;
    }
    let ys: Vec<&PremiseSchema> = b.premises.iter().collect();
    ren.unify_premises(&a.premises, &ys)
}

/// [`schema_equivalent`] on bare shapes, ignoring side conditions and frame premises.
pub fn shape_equivalent(a: &RuleSchema, b: &RuleSchema) -> bool {
    schema_equivalent(&a.stripped(), &b.stripped())
}

/// A named signature with its rules: the unit loaded from a calculus file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Calculus {
    pub name: String,
    pub signature: Signature,
    pub rules: Vec<RuleSchema>,
}

impl Calculus {
    pub fn new(name: impl Into<String>, signature: Signature) -> Self {
        Calculus {
            name: name.into(),
            signature,
            rules: Vec::new(),
        }
    }

    pub fn add_rule(&mut self, rule: RuleSchema) -> Result<()> {
        if self.rule(&rule.name).is_some() {
            return Err(Error::DuplicateRule(rule.name));
        }
        rule.validate(&self.signature)?;
        self.rules.push(rule);
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Self> {
        parse_calculus(text)
    }

    pub fn rule(&self, name: &str) -> Option<&RuleSchema> {
        self.rules.iter().find(|r| r.name == name)
    }

    /// Rules attributed to `connective` (see [`RuleSchema::governs`]).
    pub fn rules_for(&self, connective: &str) -> Vec<&RuleSchema> {
        self.rules
            .iter()
            .filter(|r| r.governs().iter().any(|c| c == connective))
            .collect()
    }

    pub fn is_modal(&self) -> bool {
        self.signature.contains(BOX) || self.signature.contains(DIAMOND)
    }

    pub fn has_frame_rules(&self) -> bool {
        self.rules.iter().any(|r| r.frame)
    }

    pub fn parse_formula(&self, text: &str) -> Result<Formula> {
        Formula::parse(text, &self.signature)
    }

    /// Union of two calculi; rule names must not clash unless the rules are identical.
    pub fn merge(&self, other: &Calculus, name: &str) -> Result<Calculus> {
        let mut merged = Calculus {
            name: name.to_string(),
            signature: self.signature.merge(&other.signature)?,
            rules: self.rules.clone(),
        };
        for r in &other.rules {
            match merged.rule(&r.name) {
                Some(existing) if existing == r => {}
                Some(_) => return Err(Error::DuplicateRule(r.name.clone())),
                None => merged.rules.push(r.clone()),
            }
        }
        Ok(merged)
    }

    /// The calculus in its file format; parses back to an equal value.
    pub fn render(&self) -> String {
        let mut out = format!("calculus {}\n", self.name);
        for c in self.signature.iter() {
            out.push_str(&render_connective(c));
        }
        for r in &self.rules {
            out.push('\n');
            out.push_str(&r.render());
        }
        out
    }
}

pub(crate) fn render_connective(c: &Connective) -> String {
    format!(
        "connective {} arity {} fixity {}\n",
        c.name,
        c.arity,
        c.fixity.keyword()
    )
}

/// Strips a `#` comment: a `#` token standing alone (so `#f` and `#t` survive).
fn strip_comment(line: &str) -> &str {
    let bytes = line.as_bytes();
    for (i, &b) in bytes.iter().enumerate() {
        if b != b'#' {
            continue;
        }
        let before_ok = i == 0 || bytes[i - 1].is_ascii_whitespace();
        let after_ok = i + 1 == bytes.len() || bytes[i + 1].is_ascii_whitespace();
        if before_ok && after_ok {
            return &line[..i];
        }
    }
    line
}

struct PendingRule {
    rule: RuleSchema,
    has_conclusion: bool,
    line: usize,
}

/// Parses the line-oriented calculus format.
///
/// ```text
/// calculus <name>
/// connective <name> arity <n> fixity <infix|prefix|nullary>
/// rule <name> kind <intro|elim> [side <tag>] [frame]
///   [major <schema>]
///   premise [discharge <schema> ("," <schema>)*] <schema>
///   conclusion <schema>
/// ```
pub fn parse_calculus(text: &str) -> Result<Calculus> {
    let lines: Vec<(usize, &str)> = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, strip_comment(l)))
        .filter(|(_, l)| !l.trim().is_empty())
        .collect();

    // connectives first, so rules may use connectives declared further down
    let mut name: Option<String> = None;
    let mut signature = Signature::new();
    for &(no, line) in &lines {
        let mut cur = Cursor::at(line, no, 0);
        match cur.word() {
            Some("calculus") => {
                if name.is_some() {
                    return Err(cur.error("duplicate `calculus` header"));
                }
                let n = cur.word().ok_or_else(|| cur.error("expected calculus name"))?;
                end_of_line(&mut cur)?;
                name = Some(n.to_string());
            }
            Some("connective") => signature.declare(parse_connective(&mut cur)?)?,
            _ => {}
        }
    }
    let name = name.ok_or(Error::Syntax {
        line: 1,
        column: 1,
        message: "missing `calculus <name>` header".into(),
    })?;

    let mut calculus = Calculus::new(name, signature);
    let mut pending: Option<PendingRule> = None;
    for &(no, line) in &lines {
        let mut cur = Cursor::at(line, no, 0);
        let keyword_at = cur.clone();
        match cur.word() {
            Some("calculus") | Some("connective") => {}
            Some("rule") => {
                if let Some(p) = pending.take() {
                    finish_rule(&mut calculus, p)?;
                }
                pending = Some(parse_rule_header(&mut cur)?);
            }
            Some(kw @ ("major" | "premise" | "conclusion")) => {
                let p = pending
                    .as_mut()
                    .ok_or_else(|| keyword_at.error(format!("`{kw}` outside a rule block")))?;
                if p.has_conclusion {
                    return Err(
                        keyword_at.error(format!("`{kw}` after the conclusion of rule `{}`", p.rule.name))
                    );
                }
                let sig = &calculus.signature;
                match kw {
                    "major" => {
                        if p.rule.major.is_some() {
                            return Err(keyword_at.error("second major premise"));
                        }
                        p.rule.major = Some(cur.schema(sig)?);
                    }
                    "premise" => {
                        let mut discharged = Vec::new();
                        let save = cur.clone();
                        if cur.word() == Some("discharge") {
                            loop {
                                discharged.push(cur.schema(sig)?);
                                if !cur.eat(",") {
                                    break;
                                }
                            }
                        } else {
                            cur = save;
                        }
                        let conclusion = cur.schema(sig)?;
                        p.rule.premises.push(PremiseSchema {
                            discharged,
                            conclusion,
                        });
                    }
                    _ => {
                        p.rule.conclusion = cur.schema(sig)?;
                        p.has_conclusion = true;
                    }
                }
                end_of_line(&mut cur)?;
            }
            Some(other) => {
                return Err(keyword_at.error(format!("unknown directive `{other}`")));
            }
            None => return Err(keyword_at.error("expected a directive")),
        }
    }
    if let Some(p) = pending.take() {
        finish_rule(&mut calculus, p)?;
    }
    Ok(calculus)
}

fn end_of_line(cur: &mut Cursor<'_>) -> Result<()> {
    if cur.at_end() {
        Ok(())
    } else {
        Err(cur.error("unexpected trailing input"))
    }
}

fn parse_connective(cur: &mut Cursor<'_>) -> Result<Connective> {
    let name = cur.word().ok_or_else(|| cur.error("expected connective name"))?;
    keyword(cur, "arity")?;
    let arity_at = cur.clone();
    let arity: usize = cur
        .word()
        .and_then(|w| w.parse().ok())
        .ok_or_else(|| arity_at.error("expected a non-negative arity"))?;
    keyword(cur, "fixity")?;
    let fixity_at = cur.clone();
    let fixity = match cur.word() {
        Some("infix") => Fixity::Infix,
        Some("prefix") => Fixity::Prefix,
        Some("nullary") => Fixity::Nullary,
        _ => return Err(fixity_at.error("expected `infix`, `prefix` or `nullary`")),
    };
    end_of_line(cur)?;
    Connective::new(name, arity, fixity)
}

fn keyword(cur: &mut Cursor<'_>, kw: &str) -> Result<()> {
    let at = cur.clone();
    if cur.word() == Some(kw) {
        Ok(())
    } else {
        Err(at.error(format!("expected `{kw}`")))
    }
}

fn parse_rule_header(cur: &mut Cursor<'_>) -> Result<PendingRule> {
    let line = cur.line();
    let name = cur.word().ok_or_else(|| cur.error("expected rule name"))?;
    keyword(cur, "kind")?;
    let kind_at = cur.clone();
    let kind = match cur.word() {
        Some("intro") => RuleKind::Intro,
        Some("elim") => RuleKind::Elim,
        _ => return Err(kind_at.error("expected `intro` or `elim`")),
    };
    let mut side = SideCondition::None;
    let mut frame = false;
    loop {
        let at = cur.clone();
        match cur.word() {
            None => break,
            Some("side") => {
                let tag_at = cur.clone();
                let tag = cur.word().unwrap_or_default();
                side = SideCondition::from_tag(tag)
                    .ok_or_else(|| tag_at.error(format!("unknown side condition `{tag}`")))?;
            }
            Some("frame") => frame = true,
            Some(other) => return Err(at.error(format!("unexpected `{other}` in rule header"))),
        }
    }
    Ok(PendingRule {
        rule: RuleSchema {
            name: name.to_string(),
            kind,
            major: None,
            premises: Vec::new(),
            conclusion: Schema::Var(String::new()),
            side,
            frame,
        },
        has_conclusion: false,
        line,
    })
}

fn finish_rule(calculus: &mut Calculus, p: PendingRule) -> Result<()> {
    let at = |message: String| Error::Syntax {
        line: p.line,
        column: 1,
        message,
    };
    if !p.has_conclusion {
        return Err(at(format!("rule `{}` has no conclusion", p.rule.name)));
    }
    match calculus.add_rule(p.rule) {
        Err(Error::Syntax { message, .. }) => Err(at(message)),
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const CONJ: &str = "\
calculus conj
connective & arity 2 fixity infix
rule andI kind intro
  premise A
  premise B
  conclusion (A & B)
rule andE1 kind elim
  major (A & B)
  conclusion A
rule andE2 kind elim
  major (A & B)
  conclusion B
";

    fn rule(src: &str) -> RuleSchema {
        let header = "calculus t\n\
            connective & arity 2 fixity infix\n\
            connective | arity 2 fixity infix\n\
            connective -> arity 2 fixity infix\n\
            connective ~ arity 1 fixity prefix\n\
            connective #f arity 0 fixity nullary\n\
            connective #t arity 0 fixity nullary\n\
            connective [] arity 1 fixity prefix\n\
            connective <> arity 1 fixity prefix\n\
            connective x arity 2 fixity infix\n\
            connective tonk arity 2 fixity infix\n\
            connective t arity 1 fixity prefix\n";
        let c = parse_calculus(&format!("{header}{src}")).unwrap();
        c.rules.into_iter().next().unwrap()
    }

    #[test]
    fn parses_conjunction_calculus() {
        let c = parse_calculus(CONJ).unwrap();
        assert_eq!(c.name, "conj");
        assert_eq!(c.rules.len(), 3);
        assert_eq!(c.rules[0].premises.len(), 2);
        assert_eq!(
            c.rules[1].major,
            Some(Schema::parse("(A & B)", &c.signature).unwrap())
        );
    }

    #[test]
    fn empty_rule_section_is_valid() {
        let c = parse_calculus("calculus empty\nconnective & arity 2 fixity infix\n").unwrap();
        assert!(c.rules.is_empty());
    }

    #[test]
    fn duplicate_rule_rejected() {
        let src = format!("{CONJ}rule andI kind intro\n  premise A\n  conclusion (A & A)\n");
        assert_eq!(parse_calculus(&src), Err(Error::DuplicateRule("andI".into())));
    }

    #[test]
    fn unknown_connective_and_arity_errors() {
        let bad = "calculus b\nrule r kind intro\n  premise A\n  conclusion (A & A)\n";
        assert!(matches!(
            parse_calculus(bad),
            Err(Error::UnknownConnective { .. })
        ));
        let arity = "calculus b\nconnective & arity 1 fixity infix\n";
        assert!(matches!(parse_calculus(arity), Err(Error::ArityMismatch { .. })));
    }

    #[test]
    fn structural_errors() {
        let no_major = "calculus b\nconnective & arity 2 fixity infix\nrule r kind elim\n  conclusion A\n";
        assert!(matches!(
            parse_calculus(no_major),
            Err(Error::Syntax { line: 3, .. })
        ));
        let no_concl = "calculus b\nconnective & arity 2 fixity infix\nrule r kind intro\n  premise A\n";
        assert!(matches!(parse_calculus(no_concl), Err(Error::Syntax { .. })));
        assert!(matches!(
            parse_calculus("connective & arity 2 fixity infix\n"),
            Err(Error::Syntax { .. })
        ));
    }

    #[test]
    fn comments_spare_constants() {
        let src = "# header comment\ncalculus b # trailing\nconnective #f arity 0 fixity nullary\n\
                   rule botE kind elim\n  major #f\n  conclusion C # anything\n";
        let c = parse_calculus(src).unwrap();
        assert_eq!(c.rules[0].major.as_ref().unwrap().root(), Some("#f"));
    }

    #[test]
    fn discharge_lists() {
        let r = rule("rule xE kind elim\n major (A x B)\n premise discharge A, B C\n conclusion C\n");
        assert_eq!(r.premises[0].discharged, vec![Schema::var("A"), Schema::var("B")]);
        assert_eq!(r.premises[0].conclusion, Schema::var("C"));
    }

    #[test]
    fn render_round_trips() {
        let c = parse_calculus(CONJ).unwrap();
        assert_eq!(parse_calculus(&c.render()).unwrap(), c);
    }

    #[test]
    fn classification() {
        let and_i = rule("rule andI kind intro\n premise A\n premise B\n conclusion (A & B)\n");
        assert_eq!(and_i.classify(), RuleClass::Type1Intro);
        let or_e = rule("rule orE kind elim\n major (A | B)\n premise discharge A C\n premise discharge B C\n conclusion C\n");
        assert_eq!(or_e.classify(), RuleClass::Type2Elim);
        let cm = rule("rule cm kind intro\n premise discharge ~A #f\n conclusion A\n");
        assert_eq!(cm.classify(), RuleClass::Other);
        let neg_i = rule("rule negI kind intro\n premise discharge A #f\n conclusion ~A\n");
        assert_eq!(neg_i.classify(), RuleClass::Type1Intro);
        let top_i = rule("rule topI kind intro\n conclusion #t\n");
        assert_eq!(top_i.classify(), RuleClass::Type1Intro);
        let bot_e = rule("rule botE kind elim\n major #f\n conclusion C\n");
        assert_eq!(bot_e.classify(), RuleClass::Type2Elim);
        let tonk_i = rule("rule tonkI kind intro\n premise A\n conclusion (A tonk B)\n");
        assert_eq!(tonk_i.classify(), RuleClass::Other);
        assert_eq!(tonk_i.intro_fit(), IntroFit::Partial);
        assert_eq!(tonk_i.unconstrained_vars(), vec!["B".to_string()]);
        let and_e = rule("rule andE1 kind elim\n major (A & B)\n conclusion A\n");
        assert_eq!(and_e.classify(), RuleClass::Other);
        let box_frame =
            rule("rule boxI kind intro side s4-boxed-assumptions frame\n premise B\n conclusion []B\n");
        assert_eq!(box_frame.classify(), RuleClass::FrameForm);
        let dia_frame = rule("rule diaE kind elim side s4-possibility frame\n major <>B\n premise discharge B C\n conclusion C\n");
        assert_eq!(dia_frame.classify(), RuleClass::FrameForm);
    }

    #[test]
    fn read_off_elims() {
        let and_i = rule("rule andI kind intro\n premise A\n premise B\n conclusion (A & B)\n");
        let elims = derive_elims_from_intro(&and_i).unwrap();
        assert_eq!(elims.len(), 2);
        assert!(elims.iter().all(|e| e.premises.is_empty()));
        assert_eq!(elims[0].name, "andE1");
        assert_eq!(elims[1].conclusion, Schema::var("B"));

        let imp_i = rule("rule impI kind intro\n premise discharge A B\n conclusion (A -> B)\n");
        let elims = derive_elims_from_intro(&imp_i).unwrap();
        assert_eq!(elims.len(), 1);
        assert_eq!(elims[0].premises, vec![PremiseSchema::plain(Schema::var("A"))]);
        assert_eq!(elims[0].name, "impE");

        let top_i = rule("rule topI kind intro\n conclusion #t\n");
        assert!(derive_elims_from_intro(&top_i).unwrap().is_empty());

        let tonk_i = rule("rule tonkI kind intro\n premise A\n conclusion (A tonk B)\n");
        assert_eq!(
            derive_elims_from_intro(&tonk_i),
            Err(Error::NotType1("tonkI".into()))
        );
    }

    #[test]
    fn read_off_intros() {
        let or_e = rule("rule orE kind elim\n major (A | B)\n premise discharge A C\n premise discharge B C\n conclusion C\n");
        let intros = derive_intros_from_elim(&or_e).unwrap();
        assert_eq!(intros.len(), 2);
        assert_eq!(intros[0].name, "orI1");
        assert_eq!(intros[1].premises, vec![PremiseSchema::plain(Schema::var("B"))]);

        let x_e = rule("rule xE kind elim\n major (A x B)\n premise discharge A, B C\n conclusion C\n");
        let intros = derive_intros_from_elim(&x_e).unwrap();
        assert_eq!(intros.len(), 1);
        assert_eq!(intros[0].premises.len(), 2);

        let bot_e = rule("rule botE kind elim\n major #f\n conclusion C\n");
        assert!(derive_intros_from_elim(&bot_e).unwrap().is_empty());

        let and_e = rule("rule andE1 kind elim\n major (A & B)\n conclusion A\n");
        assert!(matches!(derive_intros_from_elim(&and_e), Err(Error::NotType2(_))));
    }

    #[test]
    fn equivalence() {
        let and_e1 = rule("rule andE1 kind elim\n major (A & B)\n conclusion A\n");
        let and_e2 = rule("rule andE2 kind elim\n major (A & B)\n conclusion B\n");
        let renamed = rule("rule d kind elim\n major (X & Y)\n conclusion X\n");
        assert!(schema_equivalent(&and_e1, &renamed));
        assert!(!schema_equivalent(&and_e1, &and_e2));

        let or_e = rule("rule orE kind elim\n major (A | B)\n premise discharge A C\n premise discharge B C\n conclusion C\n");
        let swapped = rule("rule orE kind elim\n major (A | B)\n premise discharge B C\n premise discharge A C\n conclusion C\n");
        assert!(schema_equivalent(&or_e, &swapped));

        // not bijective: X would have to stand for both A and B
        let collapsed = rule("rule c kind elim\n major (X | X)\n premise discharge X C\n premise discharge X C\n conclusion C\n");
        assert!(!schema_equivalent(&or_e, &collapsed));
    }

    #[test]
    fn side_conditions_matter_for_equivalence_but_not_shape() {
        let box_i = rule("rule boxI kind intro side s4-boxed-assumptions\n premise B\n conclusion []B\n");
        let plain = rule("rule boxI kind intro\n premise B\n conclusion []B\n");
        assert!(!schema_equivalent(&box_i, &plain));
        assert!(shape_equivalent(&box_i, &plain));
    }

    #[test]
    fn governs() {
        let cm = rule("rule cm kind intro\n premise discharge ~A #f\n conclusion A\n");
        assert_eq!(cm.governs(), vec!["~".to_string()]);
        let and_e = rule("rule andE1 kind elim\n major (A & B)\n conclusion A\n");
        assert_eq!(and_e.governs(), vec!["&".to_string()]);
    }

    #[test]
    fn matching() {
        let sig = crate::formula::Signature::builtin();
        let s = Schema::parse("(A & A)", &sig).unwrap();
        let good = Formula::parse("(p & p)", &sig).unwrap();
        let bad = Formula::parse("(p & q)", &sig).unwrap();
        assert!(s.matches(&good, &Assignment::new()).is_some());
        assert!(s.matches(&bad, &Assignment::new()).is_none());
    }
}
