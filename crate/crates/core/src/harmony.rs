//! Stable / harmonious / disharmonious verdicts per connective.
//!
//! A connective is checked from each side that has a candidate defining rule:
//! a single introduction rule (type 1) whose read-off eliminations are compared
//! with the declared ones, or a single elimination rule (type 2) whose read-off
//! introductions are compared with the declared ones. Frame rules are checked
//! through their frame-free form.

use std::fmt;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::schema::{shape_equivalent, Calculus, IntroFit, RuleClass, RuleKind, RuleSchema};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Status {
    Stable,
    Harmonious,
    Disharmonious,
    Unclassified,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Status::Stable => "Stable",
            Status::Harmonious => "Harmonious",
            Status::Disharmonious => "Disharmonious",
            Status::Unclassified => "Unclassified",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Direction {
    /// Eliminations read off the introduction rule.
    FromIntro,
    /// Introductions read off the elimination rule.
    FromElim,
}

/// The rule a successful verdict treats as meaning-giving.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Defining {
    pub rule: String,
    pub direction: Direction,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HarmonyVerdict {
    pub connective: String,
    pub status: Status,
    #[serde(serialize_with = "rules_as_text")]
    pub derived: Vec<RuleSchema>,
    pub mismatches: Vec<String>,
    #[serde(skip)]
    pub defining: Option<Defining>,
}

fn rules_as_text<S: Serializer>(rules: &[RuleSchema], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(rules.iter().map(ToString::to_string))
}

impl HarmonyVerdict {
    pub fn is_acceptable(&self) -> bool {
        matches!(self.status, Status::Stable | Status::Harmonious)
    }
}

struct Attempt<'a> {
    defining: &'a RuleSchema,
    direction: Direction,
    derived: Vec<RuleSchema>,
    mismatches: Vec<String>,
}

fn intro_candidate(r: &RuleSchema) -> bool {
    if r.kind != RuleKind::Intro {
        return false;
    }
    if r.frame {
        return r.classify() == RuleClass::FrameForm;
    }
    r.intro_fit() != IntroFit::None
}

fn elim_candidate(r: &RuleSchema) -> bool {
    match (r.kind, r.frame) {
        (RuleKind::Elim, true) => r.classify() == RuleClass::FrameForm,
        (RuleKind::Elim, false) => r.classify() == RuleClass::Type2Elim,
        _ => false,
    }
}

fn attempt<'a>(defining: &'a RuleSchema, direction: Direction, rules: &[&'a RuleSchema]) -> Attempt<'a> {
    let base = defining.unframed();
    let (derived, counterpart_kind) = match direction {
        Direction::FromIntro => (base.read_off_elims(), RuleKind::Elim),
        Direction::FromElim => (base.read_off_intros(), RuleKind::Intro),
    };
    let mut mismatches = Vec::new();
    if direction == Direction::FromIntro && base.intro_fit() == IntroFit::Partial {
        mismatches.push(format!(
            "`{}` is not of type 1: its conclusion {} also contains {}, which no premise provides",
            defining.name,
            defining.conclusion,
            defining.unconstrained_vars().join(", ")
        ));
    }
    let mut declared: Vec<Option<&RuleSchema>> = rules
        .iter()
        .copied()
        .filter(|r| r.kind == counterpart_kind)
        .map(Some)
        .collect();
    for d in &derived {
        let hit = declared
            .iter_mut()
            .find(|slot| slot.is_some_and(|r| shape_equivalent(&r.unframed(), d)));
        match hit {
            Some(slot) => *slot = None,
            None => mismatches.push(format!("read-off rule {d} has no declared counterpart")),
        }
    }
    for r in declared.into_iter().flatten() {
        mismatches.push(format!("declared rule {r} does not match any read-off rule"));
    }
    for r in rules {
        if r.kind != counterpart_kind && r.name != defining.name {
            mismatches.push(format!(
                "rule `{}` is unmatched: it is neither the defining rule nor read off from it",
                r.name
            ));
        }
    }
    mismatches.sort();
    Attempt {
        defining,
        direction,
        derived,
        mismatches,
    }
}

/// Classifies the rules governing `connective` in `calculus`.
pub fn harmony_verdict(calculus: &Calculus, connective: &str) -> Result<HarmonyVerdict> {
    if !calculus.signature.contains(connective) {
        return Err(Error::UndeclaredConnective(connective.to_string()));
    }
    let rules = calculus.rules_for(connective);
    let mut verdict = HarmonyVerdict {
        connective: connective.to_string(),
        status: Status::Unclassified,
        derived: Vec::new(),
        mismatches: Vec::new(),
        defining: None,
    };
    if rules.is_empty() {
        verdict.mismatches.push("no rules govern this connective".into());
        return Ok(verdict);
    }

    let mut attempts = Vec::new();
    let intros: Vec<&RuleSchema> = rules.iter().copied().filter(|r| intro_candidate(r)).collect();
    if let [only] = intros.as_slice() {
        attempts.push(attempt(only, Direction::FromIntro, &rules));
    }
    let elims: Vec<&RuleSchema> = rules.iter().copied().filter(|r| elim_candidate(r)).collect();
    if let [only] = elims.as_slice() {
        attempts.push(attempt(only, Direction::FromElim, &rules));
    }

    if attempts.is_empty() {
        verdict
            .mismatches
            .push("no type-1 introduction or type-2 elimination rule to read off from".into());
        return Ok(verdict);
    }

    if let Some(ok) = attempts.iter().find(|a| a.mismatches.is_empty()) {
        let unconditional = rules.iter().all(|r| r.side.is_none() && !r.frame);
        verdict.status = if unconditional {
            Status::Stable
        } else {
            Status::Harmonious
        };
        verdict.derived = ok.derived.clone();
        verdict.defining = Some(Defining {
            rule: ok.defining.name.clone(),
            direction: ok.direction,
        });
        return Ok(verdict);
    }

    verdict.status = Status::Disharmonious;
    for a in attempts {
        verdict.derived.extend(a.derived);
        verdict.mismatches.extend(a.mismatches);
    }
    Ok(verdict)
}

/// Verdicts for every declared connective, sorted by connective name.
pub fn all_verdicts(calculus: &Calculus) -> Vec<HarmonyVerdict> {
    let mut names: Vec<&str> = calculus.signature.iter().map(|c| c.name.as_str()).collect();
    names.sort_unstable();
    names
        .into_iter()
        .map(|n| harmony_verdict(calculus, n).expect("declared connective"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;

    fn verdict(calc: &str, conn: &str) -> HarmonyVerdict {
        harmony_verdict(&corpus::load(calc).unwrap(), conn).unwrap()
    }

    #[test]
    fn ipl_is_stable() {
        for conn in ["&", "|", "->", "#f"] {
            assert_eq!(verdict("ipl", conn).status, Status::Stable, "{conn}");
        }
    }

    #[test]
    fn conjunction_defined_by_intro() {
        let v = verdict("ipl", "&");
        assert_eq!(v.defining.unwrap().direction, Direction::FromIntro);
        assert_eq!(v.derived.len(), 2);
    }

    #[test]
    fn tonk_is_disharmonious() {
        let v = verdict("tonk", "tonk");
        assert_eq!(v.status, Status::Disharmonious);
        assert_eq!(v.derived.len(), 1);
        assert_eq!(v.derived[0].conclusion.to_string(), "A");
        assert!(v.mismatches.iter().any(|m| m.contains("tonkE")));
    }

    #[test]
    fn box_under_side_condition_is_harmonious() {
        assert_eq!(verdict("s4", "[]").status, Status::Harmonious);
        assert_eq!(verdict("s4", "<>").status, Status::Harmonious);
        assert_eq!(verdict("s5-frame", "[]").status, Status::Harmonious);
    }

    #[test]
    fn classical_negation_is_disharmonious() {
        let v = verdict("cpl", "~");
        assert_eq!(v.status, Status::Disharmonious);
        assert!(
            v.mismatches.iter().any(|m| m.contains("`cm`")),
            "{:?}",
            v.mismatches
        );
    }

    #[test]
    fn missing_elim_is_disharmonious() {
        let c = Calculus::parse(
            "calculus half\nconnective & arity 2 fixity infix\n\
             rule andI kind intro\n premise A\n premise B\n conclusion (A & B)\n\
             rule andE1 kind elim\n major (A & B)\n conclusion A\n",
        )
        .unwrap();
        assert_eq!(harmony_verdict(&c, "&").unwrap().status, Status::Disharmonious);
    }

    #[test]
    fn no_rules_is_unclassified() {
        let c = Calculus::parse("calculus bare\nconnective & arity 2 fixity infix\n").unwrap();
        assert_eq!(harmony_verdict(&c, "&").unwrap().status, Status::Unclassified);
        assert!(matches!(
            harmony_verdict(&c, "|"),
            Err(Error::UndeclaredConnective(_))
        ));
    }

    #[test]
    fn json_field_order() {
        let v = verdict("top", "#t");
        let json = serde_json::to_string(&v).unwrap();
        assert_eq!(
            json,
            r##"{"connective":"#t","status":"Stable","derived":[],"mismatches":[]}"##
        );
    }
}
