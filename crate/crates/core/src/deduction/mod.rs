//! Concrete deduction trees and the parenthesised proof format.
//!
//! ```text
//! proof := "(assume " formula ")"
//!        | "(hyp " label " " formula ")"
//!        | "(apply " rule [" discharge " label] {" " proof} " => " formula ")"
//! ```
//!
//! Elimination applications list the major premise first, then frame premises
//! (if any), then minor premises in rule-declaration order.

mod check;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::formula::{self, Formula};
use crate::schema::Calculus;
use crate::syntax::Cursor;

pub(crate) use check::layout;
pub use check::{check_node, check_proof, instantiate_rule, CheckReport, Violation};

/// Discharge label binding hypotheses to the rule application that closes them.
pub type Label = u32;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Deduction {
    /// A leaf. Unlabelled leaves are open assumptions; labelled ones are hypotheses
    /// discharged by the enclosing application carrying the same label.
    Assumption { formula: Formula, label: Option<Label> },
    Application {
        rule: String,
        discharge: Option<Label>,
        children: Vec<Deduction>,
        conclusion: Formula,
    },
}

/// Child-index sequence from the root. Serialized as its display form.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodePath(pub Vec<usize>);

impl Serialize for NodePath {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl NodePath {
    pub fn root() -> Self {
        NodePath(Vec::new())
    }

    pub fn child(&self, i: usize) -> Self {
        let mut v = self.0.clone();
        v.push(i);
        NodePath(v)
    }

    pub fn is_prefix_of(&self, other: &NodePath) -> bool {
        other.0.starts_with(&self.0)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for NodePath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("/");
        }
        for i in &self.0 {
            write!(f, "/{i}")?;
        }
        Ok(())
    }
}

impl Deduction {
    pub fn assume(formula: Formula) -> Self {
        Deduction::Assumption { formula, label: None }
    }

    pub fn hyp(label: Label, formula: Formula) -> Self {
        Deduction::Assumption {
            formula,
            label: Some(label),
        }
    }

    pub fn apply(
        rule: impl Into<String>,
        discharge: Option<Label>,
        children: Vec<Deduction>,
        conclusion: Formula,
    ) -> Self {
        Deduction::Application {
            rule: rule.into(),
            discharge,
            children,
            conclusion,
        }
    }

    pub fn parse(text: &str, calculus: &Calculus) -> Result<Self> {
        parse_proof(text, calculus)
    }

    pub fn conclusion(&self) -> &Formula {
        match self {
            Deduction::Assumption { formula, .. } => formula,
            Deduction::Application { conclusion, .. } => conclusion,
        }
    }

    pub fn children(&self) -> &[Deduction] {
        match self {
            Deduction::Assumption { .. } => &[],
            Deduction::Application { children, .. } => children,
        }
    }

    pub fn rule(&self) -> Option<&str> {
        match self {
            Deduction::Application { rule, .. } => Some(rule),
            _ => None,
        }
    }

    pub fn discharge(&self) -> Option<Label> {
        match self {
            Deduction::Application { discharge, .. } => *discharge,
            _ => None,
        }
    }

    pub fn label(&self) -> Option<Label> {
        match self {
            Deduction::Assumption { label, .. } => *label,
            _ => None,
        }
    }

    /// Number of nodes.
    pub fn size(&self) -> usize {
        1 + self.children().iter().map(Deduction::size).sum::<usize>()
    }

    /// Longest chain of rule applications from the root to a leaf.
    pub fn depth(&self) -> usize {
        match self {
            Deduction::Assumption { .. } => 0,
            Deduction::Application { children, .. } => {
                1 + children.iter().map(Deduction::depth).max().unwrap_or(0)
            }
        }
    }

    pub fn get(&self, path: &NodePath) -> Option<&Deduction> {
        path.0.iter().try_fold(self, |node, &i| node.children().get(i))
    }

    pub fn get_mut(&mut self, path: &NodePath) -> Option<&mut Deduction> {
        let mut node = self;
        for &i in &path.0 {
            node = match node {
                Deduction::Application { children, .. } => children.get_mut(i)?,
                Deduction::Assumption { .. } => return None,
            };
        }
        Some(node)
    }

    /// Copy of the tree with the subtree at `path` replaced.
    pub fn replace_at(&self, path: &NodePath, new: Deduction) -> Result<Deduction> {
        let mut out = self.clone();
        let slot = out
            .get_mut(path)
            .ok_or_else(|| Error::InvalidPath(path.to_string()))?;
        *slot = new;
        Ok(out)
    }

    /// All node paths in post-order (children left to right, then the node).
    pub fn paths_post_order(&self) -> Vec<NodePath> {
        fn go(d: &Deduction, at: NodePath, out: &mut Vec<NodePath>) {
            for (i, c) in d.children().iter().enumerate() {
                go(c, at.child(i), out);
            }
            out.push(at);
        }
        let mut out = Vec::new();
        go(self, NodePath::root(), &mut out);
        out
    }

    /// Leaves not discharged inside this subtree, left to right.
    pub fn open_leaves(&self) -> Vec<&Deduction> {
        fn go<'a>(d: &'a Deduction, bound: &mut Vec<Label>, out: &mut Vec<&'a Deduction>) {
            match d {
                Deduction::Assumption { label, .. } => {
                    if label.is_none_or(|l| !bound.contains(&l)) {
                        out.push(d);
                    }
                }
                Deduction::Application {
                    discharge, children, ..
                } => {
                    if let Some(l) = discharge {
                        bound.push(*l);
                    }
                    for c in children {
                        go(c, bound, out);
                    }
                    if discharge.is_some() {
                        bound.pop();
                    }
                }
            }
        }
        let mut out = Vec::new();
        go(self, &mut Vec::new(), &mut out);
        out
    }

    /// Formulas of the open leaves of this subtree (a multiset, in leaf order).
    pub fn open_assumptions(&self) -> Vec<Formula> {
        self.open_leaves()
            .into_iter()
            .map(|l| l.conclusion().clone())
            .collect()
    }

    /// Open assumptions of the subtree at `at`: labels bound above `at` count as open.
    pub fn open_assumptions_at(&self, at: &NodePath) -> Result<Vec<Formula>> {
        self.get(at)
            .map(Deduction::open_assumptions)
            .ok_or_else(|| Error::InvalidPath(at.to_string()))
    }

    /// Leaves labelled `label` anywhere in this subtree.
    pub fn hyps_with_label(&self, label: Label) -> Vec<&Formula> {
        match self {
            Deduction::Assumption {
                formula,
                label: Some(l),
            } if *l == label => vec![formula],
            Deduction::Assumption { .. } => Vec::new(),
            Deduction::Application { children, .. } => {
                children.iter().flat_map(|c| c.hyps_with_label(label)).collect()
            }
        }
    }

    /// Largest label used by a binder or a leaf.
    pub fn max_label(&self) -> Label {
        match self {
            Deduction::Assumption { label, .. } => label.unwrap_or(0),
            Deduction::Application {
                discharge, children, ..
            } => children
                .iter()
                .map(Deduction::max_label)
                .chain(discharge.iter().copied())
                .max()
                .unwrap_or(0),
        }
    }

    /// Renumbers binders 1, 2, ... in pre-order and updates the leaves they bind.
    /// Two trees are equal up to label renaming iff their canonical forms are equal.
    pub fn canonical(&self) -> Deduction {
        fn go(d: &Deduction, scope: &mut Vec<(Label, Label)>, next: &mut Label) -> Deduction {
            match d {
                Deduction::Assumption { formula, label } => Deduction::Assumption {
                    formula: formula.clone(),
                    label: label.map(|l| {
                        scope
                            .iter()
                            .rev()
                            .find(|(old, _)| *old == l)
                            .map_or(l, |(_, new)| *new)
                    }),
                },
                Deduction::Application {
                    rule,
                    discharge,
                    children,
                    conclusion,
                } => {
                    let fresh = discharge.map(|old| {
                        *next += 1;
                        scope.push((old, *next));
                        *next
                    });
                    let children = children.iter().map(|c| go(c, scope, next)).collect();
                    if fresh.is_some() {
                        scope.pop();
                    }
                    Deduction::Application {
                        rule: rule.clone(),
                        discharge: fresh,
                        children,
                        conclusion: conclusion.clone(),
                    }
                }
            }
        }
        go(self, &mut Vec::new(), &mut 0)
    }

    pub fn equal_up_to_labels(&self, other: &Deduction) -> bool {
        self.canonical() == other.canonical()
    }

    /// Replaces every leaf labelled `label` by the first graft whose conclusion is
    /// the leaf's formula. Fails naming the first formula with no graft.
    pub fn graft(&self, label: Label, grafts: &[&Deduction]) -> Result<Deduction, Formula> {
        match self {
            Deduction::Assumption {
                formula,
                label: Some(l),
            } if *l == label => grafts
                .iter()
                .find(|g| g.conclusion() == formula)
                .map(|g| (*g).clone())
                .ok_or_else(|| formula.clone()),
            Deduction::Assumption { .. } => Ok(self.clone()),
            Deduction::Application {
                rule,
                discharge,
                children,
                conclusion,
            } => Ok(Deduction::Application {
                rule: rule.clone(),
                discharge: *discharge,
                children: children
                    .iter()
                    .map(|c| c.graft(label, grafts))
                    .collect::<Result<_, _>>()?,
                conclusion: conclusion.clone(),
            }),
        }
    }

    /// Every formula occurring in the tree.
    pub fn formulas(&self) -> Vec<&Formula> {
        let mut out = vec![self.conclusion()];
        for c in self.children() {
            out.extend(c.formulas());
        }
        out
    }

    /// Single-line rendering in the proof format.
    pub fn render(&self) -> String {
        self.to_string()
    }

    /// Indented multi-line rendering; parses back to the same tree.
    pub fn render_pretty(&self) -> String {
        let mut out = String::new();
        self.pretty_into(&mut out, 0);
        out
    }

    fn pretty_into(&self, out: &mut String, indent: usize) {
        match self {
            Deduction::Assumption { .. } => out.push_str(&self.to_string()),
            Deduction::Application {
                rule,
                discharge,
                children,
                conclusion,
            } => {
                out.push_str("(apply ");
                out.push_str(rule);
                if let Some(l) = discharge {
                    out.push_str(&format!(" discharge {l}"));
                }
                let pad = " ".repeat(indent + 2);
                for c in children {
                    out.push('\n');
                    out.push_str(&pad);
                    c.pretty_into(out, indent + 2);
                }
                if children.is_empty() {
                    out.push(' ');
                } else {
                    out.push('\n');
                    out.push_str(&pad);
                }
                out.push_str(&format!("=> {conclusion})"));
            }
        }
    }
}

impl fmt::Display for Deduction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Deduction::Assumption { formula, label: None } => write!(f, "(assume {formula})"),
            Deduction::Assumption {
                formula,
                label: Some(l),
            } => write!(f, "(hyp {l} {formula})"),
            Deduction::Application {
                rule,
                discharge,
                children,
                conclusion,
            } => {
                write!(f, "(apply {rule}")?;
                if let Some(l) = discharge {
                    write!(f, " discharge {l}")?;
                }
                for c in children {
                    write!(f, " {c}")?;
                }
                write!(f, " => {conclusion})")
            }
        }
    }
}

/// Parses the proof format, resolving formulas against the calculus signature.
pub fn parse_proof(text: &str, calculus: &Calculus) -> Result<Deduction> {
    let mut cur = Cursor::new(text);
    let d = parse_node(&mut cur, calculus, &mut Vec::new())?;
    if !cur.at_end() {
        return Err(cur.error("trailing input after proof"));
    }
    Ok(d)
}

fn parse_label(cur: &mut Cursor<'_>) -> Result<Label> {
    cur.skip_ws();
    let at = cur.clone();
    cur.word()
        .and_then(|w| w.parse().ok())
        .ok_or_else(|| at.error("expected a numeric label"))
}

fn parse_node(cur: &mut Cursor<'_>, calculus: &Calculus, scope: &mut Vec<Label>) -> Result<Deduction> {
    cur.expect("(")?;
    let at = cur.clone();
    match cur.ident() {
        Some("assume") => {
            let f = formula::parse_at(cur, &calculus.signature)?;
            cur.expect(")")?;
            Ok(Deduction::assume(f))
        }
        Some("hyp") => {
            let label = parse_label(cur)?;
            if !scope.contains(&label) {
                return Err(Error::UndeclaredLabel(label));
            }
            let f = formula::parse_at(cur, &calculus.signature)?;
            cur.expect(")")?;
            Ok(Deduction::hyp(label, f))
        }
        Some("apply") => {
            let name_at = cur.clone();
            let rule = cur
                .word()
                .ok_or_else(|| name_at.error("expected a rule name"))?
                .to_string();
            if calculus.rule(&rule).is_none() {
                return Err(Error::UnknownRule(rule));
            }
            let save = cur.clone();
            let discharge = if cur.word() == Some("discharge") {
                Some(parse_label(cur)?)
            } else {
                *cur = save;
                None
            };
            if let Some(l) = discharge {
                scope.push(l);
            }
            let mut children = Vec::new();
            loop {
                cur.skip_ws();
                if cur.eat("=>") {
                    break;
                }
                if cur.peek() != Some('(') {
                    return Err(cur.error("expected a sub-proof or `=>`"));
                }
                children.push(parse_node(cur, calculus, scope)?);
            }
            if discharge.is_some() {
                scope.pop();
            }
            let conclusion = formula::parse_at(cur, &calculus.signature)?;
            cur.expect(")")?;
            Ok(Deduction::Application {
                rule,
                discharge,
                children,
                conclusion,
            })
        }
        _ => Err(at.error("expected `assume`, `hyp` or `apply`")),
    }
}

/// Multiset inclusion of formula lists.
pub fn multiset_subset(small: &[Formula], large: &[Formula]) -> bool {
    let mut counts: BTreeMap<&Formula, isize> = BTreeMap::new();
    for f in large {
        *counts.entry(f).or_default() += 1;
    }
    small.iter().all(|f| {
        let c = counts.entry(f).or_default();
        *c -= 1;
        *c >= 0
    })
}

/// Set inclusion of formula lists.
pub fn set_subset(small: &[Formula], large: &[Formula]) -> bool {
    let large: BTreeSet<&Formula> = large.iter().collect();
    small.iter().all(|f| large.contains(f))
}

pub fn open_assumptions(d: &Deduction, at: &NodePath) -> Result<Vec<Formula>> {
    d.open_assumptions_at(at)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;

    fn ipl() -> Calculus {
        corpus::load("ipl").unwrap()
    }

    const IMP_PEAK: &str = "(apply impE (apply impI discharge 1 (apply andE1 (apply andI (hyp 1 p) (assume q) => (p & q)) => p) => (p -> p)) (assume p) => p)";

    #[test]
    fn single_assumption() {
        let d = parse_proof("(assume p)", &ipl()).unwrap();
        assert_eq!(d.open_assumptions(), vec![Formula::atom("p")]);
        assert_eq!(d.size(), 1);
    }

    #[test]
    fn unknown_rule() {
        assert_eq!(
            parse_proof("(apply bogus (assume p))", &ipl()),
            Err(Error::UnknownRule("bogus".into()))
        );
    }

    #[test]
    fn undeclared_label() {
        assert_eq!(
            parse_proof("(apply impI discharge 1 (hyp 2 p) => (p -> p))", &ipl()),
            Err(Error::UndeclaredLabel(2))
        );
    }

    #[test]
    fn render_round_trip() {
        let d = parse_proof(IMP_PEAK, &ipl()).unwrap();
        assert_eq!(d.render(), IMP_PEAK);
        assert_eq!(parse_proof(&d.render_pretty(), &ipl()).unwrap(), d);
    }

    #[test]
    fn open_assumptions_by_path() {
        let d = parse_proof(IMP_PEAK, &ipl()).unwrap();
        let p = Formula::atom("p");
        let q = Formula::atom("q");
        // above the discharge the hypothesis is open
        let body = NodePath(vec![0, 0]);
        assert_eq!(d.open_assumptions_at(&body).unwrap(), vec![p.clone(), q.clone()]);
        // at the implication introduction it is closed
        assert_eq!(
            d.open_assumptions_at(&NodePath(vec![0])).unwrap(),
            vec![q.clone()]
        );
        assert_eq!(d.open_assumptions(), vec![q, p]);
        assert!(matches!(
            d.open_assumptions_at(&NodePath(vec![5])),
            Err(Error::InvalidPath(_))
        ));
    }

    #[test]
    fn syntax_errors_report_lines() {
        let err = parse_proof("(apply andI\n  (assume p)\n  (assume q\n  => (p & q))", &ipl());
        assert!(matches!(err, Err(Error::Syntax { line: 4, .. })), "{err:?}");
    }

    #[test]
    fn canonical_labels() {
        let a = parse_proof("(apply impI discharge 7 (hyp 7 p) => (p -> p))", &ipl()).unwrap();
        let b = parse_proof("(apply impI discharge 1 (hyp 1 p) => (p -> p))", &ipl()).unwrap();
        assert_ne!(a, b);
        assert!(a.equal_up_to_labels(&b));
        assert_eq!(a.canonical(), b);
    }

    #[test]
    fn paths_display() {
        assert_eq!(NodePath::root().to_string(), "/");
        assert_eq!(NodePath(vec![0, 2]).to_string(), "/0/2");
    }
}
