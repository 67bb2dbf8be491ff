//! Rule-instance checking and side conditions.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Serialize, Serializer};

use super::{Deduction, Label, NodePath};
use crate::error::{Error, Result};
use crate::formula::{Formula, DIAMOND};
use crate::schema::{Assignment, Calculus, RuleSchema, Schema, SideCondition};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub path: NodePath,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

/// `valid` holds iff `violations` is empty.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CheckReport {
    pub valid: bool,
    pub violations: Vec<Violation>,
    #[serde(serialize_with = "formulas_as_text")]
    pub open_assumptions: Vec<Formula>,
}

fn formulas_as_text<S: Serializer>(fs: &[Formula], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(fs.iter().map(ToString::to_string))
}

/// Checks every node of `d` against `calculus`.
pub fn check_proof(calculus: &Calculus, d: &Deduction) -> CheckReport {
    let mut violations = Vec::new();
    let mut binders: BTreeSet<Label> = BTreeSet::new();
    walk(
        calculus,
        d,
        NodePath::root(),
        &mut Vec::new(),
        &mut binders,
        &mut violations,
    );
    CheckReport {
        valid: violations.is_empty(),
        violations,
        open_assumptions: d.open_assumptions(),
    }
}

fn walk(
    calculus: &Calculus,
    d: &Deduction,
    path: NodePath,
    scope: &mut Vec<Label>,
    binders: &mut BTreeSet<Label>,
    out: &mut Vec<Violation>,
) {
    match d {
        Deduction::Assumption { label, .. } => {
            if let Some(l) = label {
                if !scope.contains(l) {
                    out.push(Violation {
                        path,
                        message: format!("hypothesis label {l} is not bound by an enclosing application"),
                    });
                }
            }
        }
        Deduction::Application {
            discharge, children, ..
        } => {
            if let Some(l) = discharge {
                if !binders.insert(*l) {
                    out.push(Violation {
                        path: path.clone(),
                        message: format!("discharge label {l} is used by more than one application"),
                    });
                }
                scope.push(*l);
            }
            for (i, c) in children.iter().enumerate() {
                walk(calculus, c, path.child(i), scope, binders, out);
            }
            if discharge.is_some() {
                scope.pop();
            }
            for message in check_node(calculus, d) {
                out.push(Violation {
                    path: path.clone(),
                    message,
                });
            }
        }
    }
}

/// How an application's children line up with its rule.
pub(crate) struct Layout<'a> {
    pub major: Option<&'a Deduction>,
    pub frame: &'a [Deduction],
    pub premises: &'a [Deduction],
}

pub(crate) fn layout<'a>(rule: &RuleSchema, children: &'a [Deduction]) -> Result<Layout<'a>, String> {
    let fixed = usize::from(rule.major.is_some()) + rule.premises.len();
    if children.len() < fixed || (!rule.frame && children.len() != fixed) {
        let expected = if rule.frame {
            format!("at least {fixed}")
        } else {
            fixed.to_string()
        };
        return Err(format!(
            "rule `{}` takes {expected} premise(s), found {}",
            rule.name,
            children.len()
        ));
    }
    let (major, rest) = match rule.major {
        Some(_) => (Some(&children[0]), &children[1..]),
        None => (None, children),
    };
    let n = rest.len() - rule.premises.len();
    Ok(Layout {
        major,
        frame: &rest[..n],
        premises: &rest[n..],
    })
}

/// Problems with one application node; empty when the node is a correct rule instance.
/// Only the subtree rooted at `node` is consulted.
pub fn check_node(calculus: &Calculus, node: &Deduction) -> Vec<String> {
    let Deduction::Application {
        rule: name,
        discharge,
        children,
        conclusion,
    } = node
    else {
        return Vec::new();
    };
    let Some(rule) = calculus.rule(name) else {
        return vec![format!("unknown rule `{name}`")];
    };
    let lay = match layout(rule, children) {
        Ok(l) => l,
        Err(m) => return vec![m],
    };

    let mut asg = Assignment::new();
    if let (Some(schema), Some(m)) = (&rule.major, lay.major) {
        if !schema.match_into(m.conclusion(), &mut asg) {
            return vec![format!(
                "major premise {} does not match {schema} in `{name}`",
                m.conclusion()
            )];
        }
    }
    for (i, (p, c)) in rule.premises.iter().zip(lay.premises).enumerate() {
        if !p.conclusion.match_into(c.conclusion(), &mut asg) {
            return vec![format!(
                "premise {} ({}) does not match {} in `{name}`",
                i + 1,
                c.conclusion(),
                p.conclusion
            )];
        }
    }
    if !rule.conclusion.match_into(conclusion, &mut asg) {
        return vec![format!(
            "conclusion {conclusion} does not match {} in `{name}`",
            rule.conclusion
        )];
    }

    let mut problems = Vec::new();
    let frame_formulas: Vec<&Formula> = lay.frame.iter().map(Deduction::conclusion).collect();

    match discharge {
        Some(l) if !rule.discharges() => {
            problems.push(format!("rule `{name}` discharges nothing but carries label {l}"));
        }
        Some(l) => {
            let closed = lay.major.into_iter().chain(lay.frame);
            if closed.flat_map(|c| c.hyps_with_label(*l)).next().is_some() {
                problems.push(format!(
                    "label {l} is discharged in a major or frame premise of `{name}`"
                ));
            }
            let last = lay.premises.len().saturating_sub(1);
            for (i, (p, c)) in rule.premises.iter().zip(lay.premises).enumerate() {
                for h in c.hyps_with_label(*l) {
                    let by_schema = p.discharged.iter().any(|s| s.matches(h, &asg).is_some());
                    let by_frame = rule.frame && i == last && frame_formulas.contains(&h);
                    if !by_schema && !by_frame {
                        problems.push(format!(
                            "hypothesis {h} [{l}] is not dischargeable by premise {} of `{name}`",
                            i + 1
                        ));
                    }
                }
            }
        }
        None => {}
    }

    let Some(body) = lay.premises.last() else {
        problems.extend(side_condition(calculus, rule, conclusion, &[], &[], &[]));
        return problems;
    };
    let body_hyps: Vec<Formula> = rule
        .premises
        .last()
        .map(|p| p.discharged.iter().filter_map(|s| s.instantiate(&asg)).collect())
        .unwrap_or_default();
    let mut collateral = Vec::new();
    let mut discharged_here = Vec::new();
    for leaf in body.open_leaves() {
        match leaf.label() {
            Some(l) if Some(l) == *discharge => discharged_here.push(leaf.conclusion().clone()),
            _ => collateral.push(leaf.conclusion().clone()),
        }
    }

    if rule.frame {
        if !collateral.is_empty() {
            let open: Vec<String> = collateral.iter().map(ToString::to_string).collect();
            problems.push(format!(
                "frame premises of `{name}` must be exactly the open assumptions of its last premise, which also depends on {}",
                open.join(", ")
            ));
        }
        let used: BTreeSet<&Formula> = discharged_here.iter().collect();
        let missing: Vec<String> = frame_formulas
            .iter()
            .filter(|f| !used.contains(*f))
            .map(ToString::to_string)
            .collect();
        if !missing.is_empty() {
            problems.push(format!(
                "frame premise(s) {} of `{name}` are not assumptions of its last premise",
                missing.join(", ")
            ));
        }
    } else {
        // non-frame rules: hypotheses other than the rule's own stay collateral
        collateral.extend(discharged_here.into_iter().filter(|h| !body_hyps.contains(h)));
    }

    let frame_owned: Vec<Formula> = frame_formulas.into_iter().cloned().collect();
    problems.extend(side_condition(
        calculus,
        rule,
        conclusion,
        &collateral,
        &frame_owned,
        &body_hyps,
    ));
    problems
}

/// `collateral`: open assumptions of the last premise other than the rule's own hypotheses.
fn side_condition(
    calculus: &Calculus,
    rule: &RuleSchema,
    conclusion: &Formula,
    collateral: &[Formula],
    frame: &[Formula],
    hyps: &[Formula],
) -> Vec<String> {
    let name = &rule.name;
    let mut problems = Vec::new();
    let mut require = |fs: &[Formula], ok: fn(&Formula) -> bool, what: &str, role: &str| {
        for f in fs.iter().filter(|f| !ok(f)) {
            problems.push(format!("{role} {f} of `{name}` is not {what}"));
        }
    };
    let role = if rule.frame { "frame premise" } else { "assumption" };
    let deps: &[Formula] = if rule.frame { frame } else { collateral };
    match rule.side {
        SideCondition::None => {}
        SideCondition::S4BoxedAssumptions => require(deps, Formula::is_boxed, "of the form []C", role),
        SideCondition::S5ModalisedAssumptions => require(deps, Formula::is_modalised, "modalised", role),
        SideCondition::S4Possibility => {
            require(deps, Formula::is_boxed, "of the form []E", role);
            if conclusion.root() != Some(DIAMOND) {
                problems.push(format!(
                    "conclusion {conclusion} of `{name}` is not of the form <>D"
                ));
            }
        }
        SideCondition::S5Possibility => {
            require(deps, Formula::is_modalised, "modalised", role);
            if rule.frame {
                require(hyps, Formula::is_modalised, "modalised", "hypothesis");
            }
            if !conclusion.is_modalised() {
                problems.push(format!("conclusion {conclusion} of `{name}` is not modalised"));
            }
        }
        SideCondition::BotAtomicConclusion => {
            let ok = conclusion.is_atom() || (calculus.is_modal() && conclusion.is_boxed());
            if !ok {
                let allowed = if calculus.is_modal() {
                    "atomic or of the form []A"
                } else {
                    "atomic"
                };
                problems.push(format!("conclusion {conclusion} of `{name}` is not {allowed}"));
            }
        }
    }
    problems
}

/// Builds one application of `rule` on top of `children`.
///
/// `children` follow the proof-format layout. If the rule discharges and no
/// label is given, a label above every label in `children` is allocated.
pub fn instantiate_rule(
    rule: &RuleSchema,
    assignment: &Assignment,
    children: Vec<Deduction>,
    label: Option<Label>,
) -> Result<Deduction> {
    let mismatch = |message: String| Error::Mismatch {
        rule: rule.name.clone(),
        message,
    };
    let lay = layout(rule, &children).map_err(mismatch)?;
    let inst = |s: &Schema| {
        s.instantiate(assignment)
            .ok_or_else(|| mismatch(format!("assignment does not cover {s}")))
    };
    if let (Some(schema), Some(m)) = (&rule.major, lay.major) {
        let want = inst(schema)?;
        if *m.conclusion() != want {
            return Err(mismatch(format!(
                "major premise concludes {}, expected {want}",
                m.conclusion()
            )));
        }
    }
    for (i, (p, c)) in rule.premises.iter().zip(lay.premises).enumerate() {
        let want = inst(&p.conclusion)?;
        if *c.conclusion() != want {
            return Err(mismatch(format!(
                "premise {} concludes {}, expected {want}",
                i + 1,
                c.conclusion()
            )));
        }
    }
    let conclusion = inst(&rule.conclusion)?;
    let discharge = if rule.discharges() {
        Some(label.unwrap_or_else(|| children.iter().map(Deduction::max_label).max().unwrap_or(0) + 1))
    } else {
        None
    };
    Ok(Deduction::Application {
        rule: rule.name.clone(),
        discharge,
        children,
        conclusion,
    })
}
