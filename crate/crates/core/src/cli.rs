//! The `pts` command surface. Exit codes: 0 positive verdict, 1 negative verdict,
//! 2 operational error.

use std::fmt::Write as _;
use std::path::Path;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::corpus;
use crate::deduction::{check_proof, parse_proof};
use crate::error::{Error, Result};
use crate::harmony::all_verdicts;
use crate::normalize::{is_normal, normalize};
use crate::prover::{check_conservativity, search, Sequent};
use crate::schema::{derive_elims_from_intro, derive_intros_from_elim, Calculus, RuleClass, RuleKind};

#[derive(Debug, Parser)]
#[command(
    name = "pts",
    version,
    about = "Harmony, normalization and bounded search for natural-deduction calculi"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum From {
    Intro,
    Elim,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Harmony verdict for every connective of a calculus.
    CheckRules {
        calculus: String,
        #[arg(long)]
        json: bool,
    },
    /// Read off the counterpart rules of a connective's defining rule.
    Derive {
        calculus: String,
        #[arg(allow_hyphen_values = true)]
        connective: String,
        #[arg(long, value_enum)]
        from: From,
        #[arg(long)]
        json: bool,
    },
    /// Check a proof file against a calculus.
    CheckProof {
        calculus: String,
        proof: String,
        #[arg(long)]
        json: bool,
    },
    /// Normalize a proof; the normal proof goes to stdout.
    Normalize {
        calculus: String,
        proof: String,
        /// One line per rewrite step, on stderr.
        #[arg(long)]
        trace: bool,
        #[arg(long)]
        json: bool,
        #[arg(long, default_value_t = 10_000)]
        max_steps: usize,
    },
    /// Bounded proof search.
    Search {
        calculus: String,
        #[arg(long)]
        goal: String,
        /// Comma-separated assumptions.
        #[arg(long, default_value = "")]
        assume: String,
        #[arg(long)]
        depth: usize,
        #[arg(long)]
        json: bool,
    },
    /// Look for sequents in base vocabulary provable only in the extension.
    Conservativity {
        base: String,
        extended: String,
        /// `a, b |- g`; may be repeated.
        #[arg(long = "probe")]
        probes: Vec<String>,
        #[arg(long)]
        depth: usize,
        #[arg(long)]
        json: bool,
    },
}

/// What a command printed and how it exits.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn error(e: impl std::fmt::Display) -> Self {
        Outcome {
            code: 2,
            stdout: String::new(),
            stderr: format!("error: {e}\n"),
        }
    }
}

/// Reads a file; a path naming a shipped corpus entry (`ipl`, `corpus/ipl.pts`)
/// falls back to the embedded copy when it does not exist on disk.
fn read(path: &str) -> Result<String> {
    match std::fs::read_to_string(path) {
        Ok(text) => Ok(text),
        Err(e) => {
            let stem = Path::new(path)
                .file_stem()
                .and_then(|s| s.to_str())
                .unwrap_or(path);
            match corpus::entry(stem) {
                Some(entry) if path == entry.name || path.ends_with(entry.file) => Ok(entry.text.to_string()),
                _ => Err(Error::Io(format!("cannot read {path}: {e}"))),
            }
        }
    }
}

fn load(path: &str) -> Result<Calculus> {
    Calculus::parse(&read(path)?)
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => execute(&cli.command).unwrap_or_else(Outcome::error),
        Err(e) => {
            let text = e.render().to_string();
            if e.use_stderr() {
                Outcome {
                    code: 2,
                    stdout: String::new(),
                    stderr: text,
                }
            } else {
                Outcome {
                    code: 0,
                    stdout: text,
                    stderr: String::new(),
                }
            }
        }
    }
}

fn json_line(v: &serde_json::Value) -> String {
    format!(
        "{}\n",
        serde_json::to_string_pretty(v).expect("json values serialize")
    )
}

pub fn execute(command: &Command) -> Result<Outcome> {
    match command {
        Command::CheckRules { calculus, json } => check_rules(&load(calculus)?, *json),
        Command::Derive {
            calculus,
            connective,
            from,
            json,
        } => derive(&load(calculus)?, connective, *from, *json),
        Command::CheckProof {
            calculus,
            proof,
            json,
        } => {
            let c = load(calculus)?;
            let d = parse_proof(&read(proof)?, &c)?;
            let report = check_proof(&c, &d);
            let stdout = if *json {
                json_line(&serde_json::to_value(&report).expect("report serializes"))
            } else {
                let mut out = String::from(if report.valid { "valid\n" } else { "invalid\n" });
                for v in &report.violations {
                    writeln!(out, "  {v}").unwrap();
                }
                let open: Vec<String> = report.open_assumptions.iter().map(ToString::to_string).collect();
                writeln!(out, "open assumptions: {{{}}}", open.join(", ")).unwrap();
                out
            };
            Ok(Outcome {
                code: i32::from(!report.valid),
                stdout,
                stderr: String::new(),
            })
        }
        Command::Normalize {
            calculus,
            proof,
            trace,
            json,
            max_steps,
        } => {
            let c = load(calculus)?;
            let d = parse_proof(&read(proof)?, &c)?;
            let (n, t) = normalize(&c, &d, *max_steps)?;
            let normal = !t.exhausted && is_normal(&c, &n);
            let mut stderr = String::new();
            if *trace && !*json {
                for s in &t.steps {
                    writeln!(stderr, "{s}").unwrap();
                }
            }
            for b in &t.blocked {
                writeln!(stderr, "blocked: {} ({})", b.redex, b.reason).unwrap();
            }
            if t.exhausted {
                writeln!(stderr, "step budget of {max_steps} exhausted").unwrap();
            }
            let stdout = if *json {
                json_line(&json!({
                    "proof": n.render(),
                    "normal": normal,
                    "trace": t,
                }))
            } else {
                format!("{}\n", n.render())
            };
            Ok(Outcome {
                code: i32::from(!normal),
                stdout,
                stderr,
            })
        }
        Command::Search {
            calculus,
            goal,
            assume,
            depth,
            json,
        } => {
            let c = load(calculus)?;
            let sequent = Sequent::parse(&format!("{assume} |- {goal}"), &c)?;
            let r = search(&c, &sequent, *depth);
            let stdout = if *json {
                json_line(&json!({ "sequent": sequent, "result": r }))
            } else {
                match &r.proof {
                    Some(p) => format!(
                        "found {sequent} within depth {depth} ({} nodes explored)\n{p}\n",
                        r.nodes_explored
                    ),
                    None => format!(
                        "not found {sequent} within depth {depth} ({} nodes explored)\n",
                        r.nodes_explored
                    ),
                }
            };
            Ok(Outcome {
                code: i32::from(!r.found),
                stdout,
                stderr: String::new(),
            })
        }
        Command::Conservativity {
            base,
            extended,
            probes,
            depth,
            json,
        } => {
            let b = load(base)?;
            let e = load(extended)?;
            let sequents = probes
                .iter()
                .map(|p| Sequent::parse(p, &e))
                .collect::<Result<Vec<_>>>()?;
            let report = check_conservativity(&b, &e, &sequents, *depth)?;
            let stdout = if *json {
                json_line(&serde_json::to_value(&report).expect("report serializes"))
            } else {
                let mut out = String::new();
                if report.conservative() {
                    writeln!(
                        out,
                        "no witness among {} probe(s) at depth {depth}",
                        report.probes
                    )
                    .unwrap();
                }
                for w in &report.witnesses {
                    writeln!(out, "witness {}\n{}", w.sequent, w.proof).unwrap();
                }
                out
            };
            Ok(Outcome {
                code: i32::from(!report.conservative()),
                stdout,
                stderr: String::new(),
            })
        }
    }
}

fn check_rules(c: &Calculus, json: bool) -> Result<Outcome> {
    let verdicts = all_verdicts(c);
    let ok = verdicts.iter().all(|v| v.is_acceptable());
    let stdout = if json {
        json_line(&json!({ "calculus": c.name, "verdicts": verdicts }))
    } else {
        let mut out = format!("calculus {}\n", c.name);
        let width = verdicts.iter().map(|v| v.connective.len()).max().unwrap_or(0);
        for v in &verdicts {
            let mut line = format!("{:width$}  {:13}", v.connective, v.status.to_string());
            if let Some(d) = &v.defining {
                write!(line, "  (read off `{}`)", d.rule).unwrap();
            }
            writeln!(out, "{}", line.trim_end()).unwrap();
            for m in &v.mismatches {
                writeln!(out, "{:width$}    {m}", "").unwrap();
            }
        }
        out
    };
    Ok(Outcome {
        code: i32::from(!ok),
        stdout,
        stderr: String::new(),
    })
}

fn derive(c: &Calculus, connective: &str, from: From, json: bool) -> Result<Outcome> {
    if !c.signature.contains(connective) {
        return Err(Error::UndeclaredConnective(connective.to_string()));
    }
    let kind = match from {
        From::Intro => RuleKind::Intro,
        From::Elim => RuleKind::Elim,
    };
    let wanted = match from {
        From::Intro => RuleClass::Type1Intro,
        From::Elim => RuleClass::Type2Elim,
    };
    let candidates: Vec<_> = c
        .rules_for(connective)
        .into_iter()
        .filter(|r| r.kind == kind)
        .filter(|r| {
            let class = r.classify();
            class == wanted || (class == RuleClass::FrameForm && r.unframed().classify() == wanted)
        })
        .collect();
    let defining = match candidates.as_slice() {
        [only] => only.unframed(),
        [] => {
            return Err(match from {
                From::Intro => Error::NotType1(format!("no introduction rule for `{connective}`")),
                From::Elim => Error::NotType2(format!("no elimination rule for `{connective}`")),
            })
        }
        _ => {
            let names: Vec<&str> = candidates.iter().map(|r| r.name.as_str()).collect();
            return Err(Error::Mismatch {
                rule: names.join(", "),
                message: format!("`{connective}` has more than one candidate defining rule"),
            });
        }
    };
    let derived = match from {
        From::Intro => derive_elims_from_intro(&defining)?,
        From::Elim => derive_intros_from_elim(&defining)?,
    };
    let stdout = if json {
        json_line(&json!({
            "connective": connective,
            "from": defining.name,
            "derived": derived.iter().map(|r| r.render()).collect::<Vec<_>>(),
        }))
    } else {
        let mut out = String::new();
        if derived.is_empty() {
            let missing = match from {
                From::Intro => "no E-rule: `{}` has no premises",
                From::Elim => "no I-rule: `{}` has no collateral deductions",
            };
            writeln!(out, "# {}", missing.replace("{}", &defining.name)).unwrap();
        }
        let mut listing = Calculus::new(format!("{}-derived", c.name), c.signature.clone());
        listing.rules = derived;
        out.push_str(&listing.render());
        out
    };
    Ok(Outcome {
        code: 0,
        stdout,
        stderr: String::new(),
    })
}
