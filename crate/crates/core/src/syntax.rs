//! Shared lexer and recursive-descent parser for formulas and formula schemas.
//!
//! Grammar (no precedence, binary compounds are always parenthesised):
//!
//! ```text
//! formula := atom | var | nullary | prefixop formula | "(" formula infixop formula ")"
//! atom    := [a-z][A-Za-z0-9_]*
//! var     := [A-Z][A-Za-z0-9_]*      (schemas only)
//! ```
//!
//! Identifiers that name a declared connective are read as that connective,
//! so `tonk`, `T`, `t` and `x` can be declared without lexer changes.

use crate::error::{Error, Result};
use crate::formula::{Fixity, Signature};
use crate::schema::Schema;

pub(crate) fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic()
}

pub(crate) fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

/// Position-tracking view over one line (or one fragment) of input.
#[derive(Debug, Clone)]
pub(crate) struct Cursor<'a> {
    src: &'a str,
    pos: usize,
    line: usize,
    col_offset: usize,
}

impl<'a> Cursor<'a> {
    pub(crate) fn new(src: &'a str) -> Self {
        Self::at(src, 1, 0)
    }

    /// A cursor whose columns are reported relative to `col_offset` on `line`.
    pub(crate) fn at(src: &'a str, line: usize, col_offset: usize) -> Self {
        Cursor {
            src,
            pos: 0,
            line,
            col_offset,
        }
    }

    pub(crate) fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    pub(crate) fn column(&self) -> usize {
        let before = &self.src[..self.pos];
        match before.rfind('\n') {
            Some(nl) => before[nl + 1..].chars().count() + 1,
            None => self.col_offset + before.chars().count() + 1,
        }
    }

    pub(crate) fn line(&self) -> usize {
        self.line + self.src[..self.pos].matches('\n').count()
    }

    pub(crate) fn skip_ws(&mut self) {
        let trimmed = self.rest().trim_start();
        self.pos = self.src.len() - trimmed.len();
    }

    pub(crate) fn at_end(&mut self) -> bool {
        self.skip_ws();
        self.pos == self.src.len()
    }

    pub(crate) fn peek(&self) -> Option<char> {
        self.rest().chars().next()
    }

    pub(crate) fn eat(&mut self, token: &str) -> bool {
        self.skip_ws();
        if self.rest().starts_with(token) {
            self.pos += token.len();
            true
        } else {
            false
        }
    }

    pub(crate) fn expect(&mut self, token: &str) -> Result<()> {
        if self.eat(token) {
            Ok(())
        } else {
            Err(self.error(format!("expected `{token}`")))
        }
    }

    pub(crate) fn error(&self, message: impl Into<String>) -> Error {
        Error::Syntax {
            line: self.line(),
            column: self.column(),
            message: message.into(),
        }
    }

    /// Reads `[A-Za-z][A-Za-z0-9_]*` if present.
    pub(crate) fn ident(&mut self) -> Option<&'a str> {
        self.skip_ws();
        let rest = self.rest();
        let mut chars = rest.char_indices();
        match chars.next() {
            Some((_, c)) if is_ident_start(c) => {}
            _ => return None,
        }
        let end = chars
            .find(|&(_, c)| !is_ident_char(c))
            .map_or(rest.len(), |(i, _)| i);
        self.pos += end;
        Some(&rest[..end])
    }

    /// Reads a whitespace-delimited word that contains no parentheses.
    pub(crate) fn word(&mut self) -> Option<&'a str> {
        self.skip_ws();
        let rest = self.rest();
        let end = rest
            .find(|c: char| c.is_whitespace() || c == '(' || c == ')')
            .unwrap_or(rest.len());
        if end == 0 {
            return None;
        }
        self.pos += end;
        Some(&rest[..end])
    }

    fn unknown(&self, token: &str) -> Error {
        Error::UnknownConnective {
            token: token.to_string(),
            line: self.line(),
            column: self.column(),
        }
    }

    /// Longest declared symbolic connective at the cursor, consumed if found.
    fn symbol(&mut self, sig: &Signature) -> Result<(&'a str, Fixity)> {
        let rest = self.rest();
        let best = sig
            .iter()
            .filter(|c| !c.name.starts_with(is_ident_start) && rest.starts_with(c.name.as_str()))
            .max_by_key(|c| c.name.len());
        match best {
            Some(c) => {
                let len = c.name.len();
                self.pos += len;
                Ok((&rest[..len], c.fixity))
            }
            None => {
                let end = rest
                    .find(|c: char| c.is_whitespace() || c == '(' || c == ')' || is_ident_char(c))
                    .unwrap_or(rest.len())
                    .max(rest.chars().next().map_or(0, char::len_utf8));
                Err(self.unknown(&rest[..end]))
            }
        }
    }

    /// Reads a connective token (identifier or symbol) and its fixity.
    fn operator(&mut self, sig: &Signature) -> Result<(&'a str, Fixity)> {
        self.skip_ws();
        if matches!(self.peek(), None | Some('(') | Some(')')) {
            return Err(self.error("expected an infix connective"));
        }
        let start = self.clone();
        if let Some(id) = self.ident() {
            return match sig.get(id) {
                Some(c) => Ok((id, c.fixity)),
                None => Err(start.unknown(id)),
            };
        }
        self.symbol(sig)
    }

    /// Parses one formula schema starting at the cursor.
    pub(crate) fn schema(&mut self, sig: &Signature) -> Result<Schema> {
        self.skip_ws();
        match self.peek() {
            None => Err(self.error("expected a formula, found end of input")),
            Some('(') => {
                self.pos += 1;
                let left = self.schema(sig)?;
                self.skip_ws();
                let before_op = self.clone();
                let (op, fixity) = self.operator(sig)?;
                if fixity != Fixity::Infix {
                    return Err(before_op.error(format!(
                        "`{op}` is not an infix connective; parentheses enclose binary compounds only"
                    )));
                }
                let right = self.schema(sig)?;
                self.expect(")")?;
                Ok(Schema::Compound(op.to_string(), vec![left, right]))
            }
            Some(')') => Err(self.error("unexpected `)`")),
            Some(c) if is_ident_start(c) => {
                let start = self.clone();
                let id = self.ident().expect("identifier start checked");
                match sig.get(id) {
                    Some(conn) => self.after_operator(sig, &start, id, conn.fixity),
                    None if c.is_ascii_lowercase() => Ok(Schema::Atom(id.to_string())),
                    None => Ok(Schema::Var(id.to_string())),
                }
            }
            Some(_) => {
                let start = self.clone();
                let (op, fixity) = self.symbol(sig)?;
                self.after_operator(sig, &start, op, fixity)
            }
        }
    }

    fn after_operator(
        &mut self,
        sig: &Signature,
        start: &Cursor<'a>,
        op: &str,
        fixity: Fixity,
    ) -> Result<Schema> {
        match fixity {
            Fixity::Nullary => Ok(Schema::Compound(op.to_string(), Vec::new())),
            Fixity::Prefix => {
                let arg = self.schema(sig)?;
                Ok(Schema::Compound(op.to_string(), vec![arg]))
            }
            Fixity::Infix => {
                Err(start.error(format!("infix connective `{op}` must appear inside parentheses")))
            }
        }
    }
}

/// Renders a tree in the concrete syntax accepted by [`Cursor::schema`].
pub(crate) fn render_node(out: &mut String, op: &str, args: &[String]) {
    match args {
        [] => out.push_str(op),
        [arg] => {
            out.push_str(op);
            let glue = op.ends_with(is_ident_char) && arg.starts_with(is_ident_char);
            if glue {
                out.push(' ');
            }
            out.push_str(arg);
        }
        [l, r] => {
            out.push('(');
            out.push_str(l);
            out.push(' ');
            out.push_str(op);
            out.push(' ');
            out.push_str(r);
            out.push(')');
        }
        _ => unreachable!("connectives have arity at most 2"),
    }
}
