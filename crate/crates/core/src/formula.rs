//! Formulas over a declared signature of connectives.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::syntax::{self, Cursor};

pub const AND: &str = "&";
pub const OR: &str = "|";
pub const IMPLIES: &str = "->";
pub const NOT: &str = "~";
pub const BOTTOM: &str = "#f";
pub const TOP: &str = "#t";
pub const BOX: &str = "[]";
pub const DIAMOND: &str = "<>";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Fixity {
    Infix,
    Prefix,
    Nullary,
}

impl Fixity {
    pub fn arity(self) -> usize {
        match self {
            Fixity::Infix => 2,
            Fixity::Prefix => 1,
            Fixity::Nullary => 0,
        }
    }

    pub fn keyword(self) -> &'static str {
        match self {
            Fixity::Infix => "infix",
            Fixity::Prefix => "prefix",
            Fixity::Nullary => "nullary",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Connective {
    pub name: String,
    pub arity: usize,
    pub fixity: Fixity,
}

impl Connective {
    /// Checks that `arity` agrees with `fixity` and that reserved names keep their usual shape.
    pub fn new(name: impl Into<String>, arity: usize, fixity: Fixity) -> Result<Self> {
        let name = name.into();
        if fixity.arity() != arity {
            return Err(Error::ArityMismatch {
                connective: name,
                message: format!("arity {arity} is inconsistent with fixity {}", fixity.keyword()),
            });
        }
        if let Some(expected) = reserved_fixity(&name) {
            if expected != fixity {
                return Err(Error::ArityMismatch {
                    message: format!("reserved connective must be {}", expected.keyword()),
                    connective: name,
                });
            }
        }
        let valid_name = !name.is_empty()
            && !name.contains(|c: char| c.is_whitespace() || c == '(' || c == ')' || c == ',')
            && (name.chars().all(syntax::is_ident_char) || !name.starts_with(syntax::is_ident_start));
        if !valid_name {
            return Err(Error::ArityMismatch {
                message: "connective names are identifiers or symbol runs".into(),
                connective: name,
            });
        }
        Ok(Connective { name, arity, fixity })
    }
}

fn reserved_fixity(name: &str) -> Option<Fixity> {
    match name {
        AND | OR | IMPLIES => Some(Fixity::Infix),
        NOT | BOX | DIAMOND => Some(Fixity::Prefix),
        BOTTOM | TOP => Some(Fixity::Nullary),
        _ => None,
    }
}

/// The connectives a calculus may use, in declaration order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Signature {
    connectives: Vec<Connective>,
}

impl Signature {
    pub fn new() -> Self {
        Self::default()
    }

    /// All reserved connectives: `& | -> ~ #f #t [] <>`.
    pub fn builtin() -> Self {
        let mut sig = Signature::new();
        for (name, fixity) in [
            (AND, Fixity::Infix),
            (OR, Fixity::Infix),
            (IMPLIES, Fixity::Infix),
            (NOT, Fixity::Prefix),
            (BOTTOM, Fixity::Nullary),
            (TOP, Fixity::Nullary),
            (BOX, Fixity::Prefix),
            (DIAMOND, Fixity::Prefix),
        ] {
            sig.declare(Connective::new(name, fixity.arity(), fixity).unwrap())
                .unwrap();
        }
        sig
    }

    pub fn declare(&mut self, connective: Connective) -> Result<()> {
        if self.get(&connective.name).is_some() {
            return Err(Error::DuplicateConnective(connective.name));
        }
        self.connectives.push(connective);
        Ok(())
    }

    /// Builder-style [`Signature::declare`].
    pub fn with(mut self, name: &str, fixity: Fixity) -> Result<Self> {
        self.declare(Connective::new(name, fixity.arity(), fixity)?)?;
        Ok(self)
    }

    pub fn get(&self, name: &str) -> Option<&Connective> {
        self.connectives.iter().find(|c| c.name == name)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.get(name).is_some()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Connective> {
        self.connectives.iter()
    }

    pub fn len(&self) -> usize {
        self.connectives.len()
    }

    pub fn is_empty(&self) -> bool {
        self.connectives.is_empty()
    }

    /// Union of two signatures; fails if a shared name is declared with different shapes.
    pub fn merge(&self, other: &Signature) -> Result<Signature> {
        let mut merged = self.clone();
        for c in other.iter() {
            match merged.get(&c.name) {
                Some(existing) if existing == c => {}
                Some(_) => return Err(Error::DuplicateConnective(c.name.clone())),
                None => merged.connectives.push(c.clone()),
            }
        }
        Ok(merged)
    }
}

/// A propositional or modal formula. Equality is syntactic identity.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Formula {
    Atom(String),
    Compound(String, Vec<Formula>),
}

/// Root of a formula: an atom, or the name of its main connective.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Operator<'a> {
    Atom,
    Connective(&'a str),
}

impl Formula {
    pub fn atom(name: impl Into<String>) -> Self {
        Formula::Atom(name.into())
    }

    pub fn compound(op: impl Into<String>, args: Vec<Formula>) -> Self {
        Formula::Compound(op.into(), args)
    }

    pub fn unary(op: &str, arg: Formula) -> Self {
        Formula::Compound(op.to_string(), vec![arg])
    }

    pub fn binary(op: &str, left: Formula, right: Formula) -> Self {
        Formula::Compound(op.to_string(), vec![left, right])
    }

    pub fn constant(op: &str) -> Self {
        Formula::Compound(op.to_string(), Vec::new())
    }

    /// Parses `text` as exactly one formula over `sig`.
    pub fn parse(text: &str, sig: &Signature) -> Result<Self> {
        let mut cur = Cursor::new(text);
        let f = parse_at(&mut cur, sig)?;
        if !cur.at_end() {
            return Err(cur.error("trailing input after formula"));
        }
        Ok(f)
    }

    pub fn main_operator(&self) -> Operator<'_> {
        match self {
            Formula::Atom(_) => Operator::Atom,
            Formula::Compound(op, _) => Operator::Connective(op),
        }
    }

    /// Name of the root connective, `None` for atoms.
    pub fn root(&self) -> Option<&str> {
        match self {
            Formula::Atom(_) => None,
            Formula::Compound(op, _) => Some(op),
        }
    }

    pub fn args(&self) -> &[Formula] {
        match self {
            Formula::Atom(_) => &[],
            Formula::Compound(_, args) => args,
        }
    }

    pub fn is_atom(&self) -> bool {
        matches!(self, Formula::Atom(_))
    }

    pub fn is_boxed(&self) -> bool {
        self.root() == Some(BOX)
    }

    pub fn is_diamond(&self) -> bool {
        self.root() == Some(DIAMOND)
    }

    /// True iff every atom occurrence lies below some `[]` or `<>`.
    pub fn is_modalised(&self) -> bool {
        match self {
            Formula::Atom(_) => false,
            Formula::Compound(op, _) if op == BOX || op == DIAMOND => true,
            Formula::Compound(_, args) => args.iter().all(Formula::is_modalised),
        }
    }

    pub fn size(&self) -> usize {
        1 + self.args().iter().map(Formula::size).sum::<usize>()
    }

    /// Every subformula, the formula itself first, in pre-order.
    pub fn subformulas(&self) -> Vec<&Formula> {
        let mut out = vec![self];
        for a in self.args() {
            out.extend(a.subformulas());
        }
        out
    }

    /// Connective names used anywhere in the formula.
    pub fn connectives(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect_connectives(&mut out);
        out
    }

    fn collect_connectives<'a>(&'a self, out: &mut Vec<&'a str>) {
        if let Formula::Compound(op, args) = self {
            if !out.contains(&op.as_str()) {
                out.push(op);
            }
            for a in args {
                a.collect_connectives(out);
            }
        }
    }

    pub fn atoms(&self) -> Vec<&str> {
        match self {
            Formula::Atom(a) => vec![a],
            Formula::Compound(_, args) => args.iter().flat_map(Formula::atoms).collect(),
        }
    }

    pub fn render(&self) -> String {
        self.to_string()
    }
}

pub(crate) fn parse_at(cur: &mut Cursor<'_>, sig: &Signature) -> Result<Formula> {
    let start = cur.clone();
    let schema = cur.schema(sig)?;
    schema.to_formula().ok_or_else(|| {
        let var = schema.vars().into_iter().next().unwrap_or_default();
        Error::UnknownConnective {
            token: var,
            line: start.line(),
            column: start.column(),
        }
    })
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Atom(a) => f.write_str(a),
            Formula::Compound(op, args) => {
                let args: Vec<String> = args.iter().map(ToString::to_string).collect();
                let mut out = String::new();
                syntax::render_node(&mut out, op, &args);
                f.write_str(&out)
            }
        }
    }
}

/// Free-function form of [`Formula::parse`].
pub fn parse_formula(text: &str, sig: &Signature) -> Result<Formula> {
    Formula::parse(text, sig)
}

pub fn render_formula(f: &Formula) -> String {
    f.render()
}

pub fn is_modalised(f: &Formula) -> bool {
    f.is_modalised()
}

pub fn is_boxed(f: &Formula) -> bool {
    f.is_boxed()
}

pub fn main_operator(f: &Formula) -> Operator<'_> {
    f.main_operator()
}
