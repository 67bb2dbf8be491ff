//! Detour detection and removal.
//!
//! A peak is an elimination whose major premise is concluded by an introduction
//! for the same connective. A ridge is a run of equal formulas threaded through
//! the minor premises of `orE`-shaped eliminations, starting at an introduction
//! and ending as a major premise. Ridges are shortened by pushing the final
//! elimination into the cases; peaks are levelled by grafting subproofs onto
//! discharged hypotheses.
//!
//! Rewrites that leave the tree invalid (a modal side condition no longer holds)
//! are rolled back and the redex is reported as blocked.

use std::fmt;

use serde::Serialize;

use crate::deduction::{check_proof, layout, Deduction, Label, NodePath};
use crate::error::{Error, Result};
use crate::formula::{Formula, BOTTOM, BOX};
use crate::schema::{shape_equivalent, Assignment, Calculus, RuleKind, RuleSchema};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RedexKind {
    Peak,
    Ridge,
    #[serde(rename = "bot-box-peak")]
    BotModalPeak,
}

impl fmt::Display for RedexKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RedexKind::Peak => "peak",
            RedexKind::Ridge => "ridge",
            RedexKind::BotModalPeak => "bot-box-peak",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Redex {
    pub kind: RedexKind,
    /// The elimination whose major premise is the detour.
    pub site: NodePath,
    pub connective: String,
    /// Rule above the major premise, then the rule at `site`.
    pub rules: (String, String),
    /// For ridges: formula occurrences from the introduction down to the major premise.
    pub segment: Vec<NodePath>,
}

impl fmt::Display for Redex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} on {} at {} ({}/{})",
            self.kind, self.connective, self.site, self.rules.0, self.rules.1
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TraceStep {
    pub index: usize,
    pub redex: Redex,
    pub rewrite: &'static str,
    pub size_before: usize,
    pub size_after: usize,
}

impl fmt::Display for TraceStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "step {}: {} at {} [{} / {}] {} nodes -> {}",
            self.index,
            self.redex.kind,
            self.redex.site,
            self.redex.rules.0,
            self.redex.rules.1,
            self.size_before,
            self.size_after
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Blocked {
    pub redex: Redex,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReductionTrace {
    pub steps: Vec<TraceStep>,
    pub initial_size: usize,
    pub final_size: usize,
    /// Redexes left in the final deduction because rewriting them fails.
    pub blocked: Vec<Blocked>,
    /// The step budget ran out while a reducible redex remained.
    pub exhausted: bool,
}

impl ReductionTrace {
    /// Re-applies the recorded steps to `initial`.
    pub fn replay(&self, calculus: &Calculus, initial: &Deduction) -> Result<Deduction> {
        self.steps
            .iter()
            .try_fold(initial.canonical(), |d, s| apply_redex(calculus, &d, &s.redex))
    }
}

fn rule<'c>(calculus: &'c Calculus, d: &Deduction) -> Option<&'c RuleSchema> {
    d.rule().and_then(|n| calculus.rule(n))
}

/// The redex whose elimination sits at `node`, if any.
fn redex_at(calculus: &Calculus, node: &Deduction, site: &NodePath) -> Option<Redex> {
    let re = rule(calculus, node)?;
    if re.kind != RuleKind::Elim {
        return None;
    }
    let conn = re.principal_connective()?;
    let major = node.children().first()?;
    let rm = rule(calculus, major)?;
    let mk = |kind, segment| Redex {
        kind,
        site: site.clone(),
        connective: conn.to_string(),
        rules: (rm.name.clone(), re.name.clone()),
        segment,
    };
    if rm.kind == RuleKind::Intro && rm.principal_connective() == Some(conn) {
        return Some(mk(RedexKind::Peak, Vec::new()));
    }
    if conn == BOX
        && re.premises.is_empty()
        && rm.kind == RuleKind::Elim
        && rm.premises.is_empty()
        && rm.major.as_ref().and_then(|m| m.root()) == Some(BOTTOM)
    {
        return Some(mk(RedexKind::BotModalPeak, Vec::new()));
    }
    if rm.is_threading() {
        let segment = segment(calculus, major, site.child(0), conn)?;
        return Some(mk(RedexKind::Ridge, segment));
    }
    None
}

/// Longest chain through threading eliminations from `node` up to an introduction
/// for `conn`, listed from the introduction down to `node`.
fn segment(calculus: &Calculus, node: &Deduction, at: NodePath, conn: &str) -> Option<Vec<NodePath>> {
    let r = rule(calculus, node)?;
    if r.kind == RuleKind::Intro {
        return (r.principal_connective() == Some(conn)).then(|| vec![at]);
    }
    if !r.is_threading() {
        return None;
    }
    let lay = layout(r, node.children()).ok()?;
    let offset = node.children().len() - lay.premises.len();
    let mut best: Option<Vec<NodePath>> = None;
    for (i, c) in lay.premises.iter().enumerate() {
        if let Some(s) = segment(calculus, c, at.child(offset + i), conn) {
            if best.as_ref().is_none_or(|b| s.len() > b.len()) {
                best = Some(s);
            }
        }
    }
    let mut s = best?;
    s.push(at);
    Some(s)
}

/// Every redex, in post-order of its site (leftmost-innermost first).
pub fn find_redexes(calculus: &Calculus, d: &Deduction) -> Vec<Redex> {
    d.paths_post_order()
        .into_iter()
        .filter_map(|p| redex_at(calculus, d.get(&p)?, &p))
        .collect()
}

fn of_kind(calculus: &Calculus, d: &Deduction, kind: RedexKind) -> Vec<Redex> {
    find_redexes(calculus, d)
        .into_iter()
        .filter(|r| r.kind == kind)
        .collect()
}

pub fn find_maximal_formulas(calculus: &Calculus, d: &Deduction) -> Vec<Redex> {
    of_kind(calculus, d, RedexKind::Peak)
}

pub fn find_maximal_segments(calculus: &Calculus, d: &Deduction) -> Vec<Redex> {
    of_kind(calculus, d, RedexKind::Ridge)
}

pub fn find_bot_modal_peaks(calculus: &Calculus, d: &Deduction) -> Vec<Redex> {
    of_kind(calculus, d, RedexKind::BotModalPeak)
}

struct App<'a> {
    rule: &'a RuleSchema,
    discharge: Option<Label>,
    children: &'a [Deduction],
    conclusion: &'a Formula,
}

fn app<'a>(calculus: &'a Calculus, d: &'a Deduction) -> Option<App<'a>> {
    match d {
        Deduction::Application {
            rule: name,
            discharge,
            children,
            conclusion,
        } => Some(App {
            rule: calculus.rule(name)?,
            discharge: *discharge,
            children,
            conclusion,
        }),
        Deduction::Assumption { .. } => None,
    }
}

fn expect_redex<'a>(
    calculus: &Calculus,
    d: &'a Deduction,
    r: &Redex,
    expected: &'static str,
) -> Result<&'a Deduction> {
    let not = || Error::NotARedex {
        expected,
        site: r.site.to_string(),
    };
    let node = d.get(&r.site).ok_or_else(not)?;
    match redex_at(calculus, node, &r.site) {
        Some(found) if found.kind == r.kind => Ok(node),
        _ => Err(not()),
    }
}

fn irreducible(site: &NodePath, reason: String) -> Error {
    Error::Irreducible {
        site: site.to_string(),
        reason,
    }
}

fn graft(
    body: &Deduction,
    label: Option<Label>,
    sources: &[&Deduction],
    site: &NodePath,
) -> Result<Deduction> {
    match label {
        Some(l) => body.graft(l, sources).map_err(|f| {
            irreducible(
                site,
                format!("no subproof of {f} to put in place of its hypotheses"),
            )
        }),
        None => Ok(body.clone()),
    }
}

/// Levels the peak at `r.site`: the elimination and the introduction above it are
/// replaced by the matching premise deduction of one of them.
pub fn reduce_peak(calculus: &Calculus, d: &Deduction, r: &Redex) -> Result<Deduction> {
    let node = expect_redex(calculus, d, r, "maximal formula")?;
    let e = app(calculus, node).expect("redex node is an application");
    let i = app(calculus, &e.children[0]).expect("peak major is an application");
    let le = layout(e.rule, e.children).map_err(|m| irreducible(&r.site, m))?;
    let li = layout(i.rule, i.children).map_err(|m| irreducible(&r.site, m))?;
    let e_shape = e.rule.unframed();
    let i_shape = i.rule.unframed();

    let replacement = if e_shape.is_type2() {
        // select the case of the elimination the introduction corresponds to
        let intros = e_shape.read_off_intros();
        let premises: Vec<Formula> = li.premises.iter().map(|p| p.conclusion().clone()).collect();
        let k = intros
            .iter()
            .position(|x| shape_equivalent(x, &i_shape))
            .or_else(|| {
                let mut asg = Assignment::new();
                let major = e.rule.major.as_ref()?;
                if !major.match_into(i.conclusion, &mut asg) {
                    return None;
                }
                e.rule.premises.iter().position(|p| {
                    let mut hyps: Vec<Formula> =
                        p.discharged.iter().filter_map(|s| s.instantiate(&asg)).collect();
                    let mut want = premises.clone();
                    hyps.sort();
                    want.sort();
                    hyps == want
                })
            })
            .ok_or_else(|| {
                irreducible(
                    &r.site,
                    format!("no case of `{}` corresponds to `{}`", e.rule.name, i.rule.name),
                )
            })?;
        let sources: Vec<&Deduction> = li.premises.iter().chain(le.frame).chain(li.frame).collect();
        graft(&le.premises[k], e.discharge, &sources, &r.site)?
    } else {
        // the elimination recovers one premise of the introduction
        let elims = i_shape.read_off_elims();
        let k = elims
            .iter()
            .position(|x| shape_equivalent(x, &e_shape))
            .filter(|&k| li.premises[k].conclusion() == e.conclusion)
            .or_else(|| li.premises.iter().position(|p| p.conclusion() == e.conclusion))
            .ok_or_else(|| {
                irreducible(
                    &r.site,
                    format!("`{}` has no premise concluding {}", i.rule.name, e.conclusion),
                )
            })?;
        let sources: Vec<&Deduction> = le.frame.iter().chain(le.premises).chain(li.frame).collect();
        graft(&li.premises[k], i.discharge, &sources, &r.site)?
    };
    d.replace_at(&r.site, replacement)
}

/// Rebinds every leaf of `d` that is open in `d` (except hypotheses labelled `keep`)
/// to `to`, collecting the original leaves.
fn rebind_open(d: &Deduction, keep: Option<Label>, to: Label, lifted: &mut Vec<Deduction>) -> Deduction {
    fn go(
        d: &Deduction,
        keep: Option<Label>,
        to: Label,
        bound: &mut Vec<Label>,
        lifted: &mut Vec<Deduction>,
    ) -> Deduction {
        match d {
            Deduction::Assumption { formula, label } => {
                let open = label.is_none_or(|l| !bound.contains(&l) && Some(l) != keep);
                if open {
                    lifted.push(d.clone());
                    Deduction::hyp(to, formula.clone())
                } else {
                    d.clone()
                }
            }
            Deduction::Application {
                rule,
                discharge,
                children,
                conclusion,
            } => {
                bound.extend(discharge);
                let children = children.iter().map(|c| go(c, keep, to, bound, lifted)).collect();
                if discharge.is_some() {
                    bound.pop();
                }
                Deduction::Application {
                    rule: rule.clone(),
                    discharge: *discharge,
                    children,
                    conclusion: conclusion.clone(),
                }
            }
        }
    }
    go(d, keep, to, &mut Vec::new(), lifted)
}

/// Pushes the elimination at `r.site` into every case of the threading
/// elimination above it, shortening the segment by one.
pub fn permute_ridge(calculus: &Calculus, d: &Deduction, r: &Redex) -> Result<Deduction> {
    let node = expect_redex(calculus, d, r, "maximal segment")?;
    let e = app(calculus, node).expect("redex node is an application");
    let m = app(calculus, &e.children[0]).expect("ridge major is an application");
    let lm = layout(m.rule, m.children).map_err(|msg| irreducible(&r.site, msg))?;
    let rest_e = &e.children[1..];

    let mut frame: Vec<Deduction> = lm.frame.to_vec();
    let mut discharge_m = m.discharge;
    let rest: Vec<Deduction> = if m.rule.frame {
        // the cases of a frame rule may only depend on its frame premises:
        // what the pushed elimination needs is routed through new frame premises
        let label = *discharge_m.get_or_insert_with(|| d.max_label() + 1);
        rest_e
            .iter()
            .map(|x| {
                let depends_on_e = e.discharge.is_some_and(|l| !x.hyps_with_label(l).is_empty());
                if depends_on_e {
                    rebind_open(x, e.discharge, label, &mut frame)
                } else {
                    frame.push(x.clone());
                    Deduction::hyp(label, x.conclusion().clone())
                }
            })
            .collect()
    } else {
        rest_e.to_vec()
    };

    let cases: Vec<Deduction> = lm
        .premises
        .iter()
        .map(|case| {
            let mut children = vec![case.clone()];
            children.extend(rest.iter().cloned());
            Deduction::Application {
                rule: e.rule.name.clone(),
                discharge: e.discharge,
                children,
                conclusion: e.conclusion.clone(),
            }
        })
        .collect();

    let mut children: Vec<Deduction> = lm.major.into_iter().cloned().collect();
    children.extend(frame);
    children.extend(cases);
    let pushed = Deduction::Application {
        rule: m.rule.name.clone(),
        discharge: discharge_m,
        children,
        conclusion: e.conclusion.clone(),
    };
    d.replace_at(&r.site, pushed)
}

/// `botE` to `[]A` followed by `boxE` to `A` becomes `botE` to `A`.
pub fn reduce_bot_modal_peak(calculus: &Calculus, d: &Deduction, r: &Redex) -> Result<Deduction> {
    let node = expect_redex(calculus, d, r, "bot/box peak")?;
    let bot = &node.children()[0];
    let levelled = Deduction::Application {
        rule: bot.rule().expect("application").to_string(),
        discharge: bot.discharge(),
        children: bot.children().to_vec(),
        conclusion: node.conclusion().clone(),
    };
    d.replace_at(&r.site, levelled)
}

fn rewrite_name(kind: RedexKind) -> &'static str {
    match kind {
        RedexKind::Peak => "reduce-peak",
        RedexKind::Ridge => "permute-ridge",
        RedexKind::BotModalPeak => "level-bot-box",
    }
}

/// Drops frame premises whose hypotheses no longer occur in the body, so that the
/// frame stays exactly the body's open assumptions after a rewrite discarded some.
pub fn prune_frames(calculus: &Calculus, d: &Deduction) -> Deduction {
    let Deduction::Application {
        rule: name,
        discharge,
        children,
        conclusion,
    } = d
    else {
        return d.clone();
    };
    let mut children: Vec<Deduction> = children.iter().map(|c| prune_frames(calculus, c)).collect();
    if let Some(r) = calculus.rule(name).filter(|r| r.frame) {
        let fixed = usize::from(r.major.is_some());
        let n = children.len().saturating_sub(fixed + r.premises.len());
        let used: Vec<Formula> = children[fixed + n..]
            .iter()
            .flat_map(|c| discharge.map(|l| c.hyps_with_label(l)).unwrap_or_default())
            .cloned()
            .collect();
        let mut i = 0;
        children.retain(|c| {
            let keep = i < fixed || i >= fixed + n || used.contains(c.conclusion());
            i += 1;
            keep
        });
    }
    Deduction::Application {
        rule: name.clone(),
        discharge: *discharge,
        children,
        conclusion: conclusion.clone(),
    }
}

/// Applies the rewrite for `r`, prunes unused frame premises and renumbers
/// discharge labels canonically.
pub fn apply_redex(calculus: &Calculus, d: &Deduction, r: &Redex) -> Result<Deduction> {
    let out = match r.kind {
        RedexKind::Peak => reduce_peak(calculus, d, r)?,
        RedexKind::Ridge => permute_ridge(calculus, d, r)?,
        RedexKind::BotModalPeak => reduce_bot_modal_peak(calculus, d, r)?,
    };
    let out = if calculus.has_frame_rules() {
        prune_frames(calculus, &out)
    } else {
        out
    };
    Ok(out.canonical())
}

/// The rewritten tree, or why the redex must stay.
fn try_rewrite(calculus: &Calculus, d: &Deduction, r: &Redex) -> Result<Deduction, String> {
    let out = apply_redex(calculus, d, r).map_err(|e| e.to_string())?;
    let report = check_proof(calculus, &out);
    match report.violations.first() {
        None => Ok(out),
        Some(v) => Err(format!("rewritten deduction is invalid at {v}")),
    }
}

/// Normalizes leftmost-innermost. Labels in the result are canonical.
///
/// Fails only when `d` is not valid in `calculus`; running out of steps is
/// flagged in the trace.
pub fn normalize(
    calculus: &Calculus,
    d: &Deduction,
    max_steps: usize,
) -> Result<(Deduction, ReductionTrace)> {
    if let Some(v) = check_proof(calculus, d).violations.first() {
        return Err(Error::InvalidDeduction {
            calculus: calculus.name.clone(),
            message: v.to_string(),
        });
    }
    let mut cur = d.canonical();
    let initial_size = cur.size();
    let mut steps = Vec::new();
    let mut blocked = Vec::new();
    let mut exhausted = false;
    'outer: loop {
        blocked.clear();
        let mut redexes = find_redexes(calculus, &cur);
        // Ridges first, each group leftmost-innermost.
        redexes.sort_by_key(|r| r.kind != RedexKind::Ridge);
        for redex in redexes {
            match try_rewrite(calculus, &cur, &redex) {
                Ok(next) => {
                    if steps.len() == max_steps {
                        exhausted = true;
                        break 'outer;
                    }
                    steps.push(TraceStep {
                        index: steps.len() + 1,
                        rewrite: rewrite_name(redex.kind),
                        size_before: cur.size(),
                        size_after: next.size(),
                        redex,
                    });
                    cur = next;
                    continue 'outer;
                }
                Err(reason) => blocked.push(Blocked { redex, reason }),
            }
        }
        break;
    }
    if exhausted {
        blocked.clear();
    }
    let trace = ReductionTrace {
        steps,
        initial_size,
        final_size: cur.size(),
        blocked,
        exhausted,
    };
    Ok((cur, trace))
}

/// No peaks, ridges or bot/box peaks remain. In calculi with frame rules,
/// redexes whose rewrite would be invalid are not counted.
pub fn is_normal(calculus: &Calculus, d: &Deduction) -> bool {
    let frames = calculus.has_frame_rules();
    find_redexes(calculus, d)
        .iter()
        .all(|r| frames && try_rewrite(calculus, d, r).is_err())
}
