//! Compact textual notation for terms, used by tests, examples and the
//! debugging output.
//!
//! ```text
//! term     := item*                      (whitespace is ignored, `ε` is empty)
//! item     := atom ('^' exponent)?
//! atom     := '(' term ')' | var | sym | char
//! var      := [xyz] digit* '\''*
//! sym      := 'o' digit*
//! char     := any other letter or digit
//! exponent := int | '{' intexpr '}'
//! int      := [mnk] digit* | number
//! ```
//!
//! Integer expressions allow `+`, `-`, `*`, juxtaposed coefficients (`2m1`)
//! and lengths `|x|`.

use crate::error::TermError;
use crate::int::{IntConstraint, IntTerm, Relation};
use crate::term::{StringEquation, StringTerm, Token, Vocab};

struct Cursor<'a> {
    chars: Vec<char>,
    pos: usize,
    vocab: &'a mut Vocab,
}

fn err(offset: usize, message: impl Into<String>) -> TermError {
    TermError::Notation {
        offset,
        message: message.into(),
    }
}

impl<'a> Cursor<'a> {
    fn new(s: &str, vocab: &'a mut Vocab) -> Self {
        Cursor {
            chars: s.chars().collect(),
            pos: 0,
            vocab,
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.chars.len() && (self.chars[self.pos].is_whitespace() || self.chars[self.pos] == 'ε') {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek();
        if c.is_some() {
            self.pos += 1;
        }
        c
    }

    fn expect(&mut self, c: char) -> Result<(), TermError> {
        match self.bump() {
            Some(d) if d == c => Ok(()),
            other => Err(err(self.pos, format!("expected `{c}`, found {other:?}"))),
        }
    }

    fn digits(&mut self) -> String {
        let mut s = String::new();
        while let Some(c) = self.chars.get(self.pos) {
            if c.is_ascii_digit() {
                s.push(*c);
                self.pos += 1;
            } else {
                break;
            }
        }
        s
    }

    fn term(&mut self) -> Result<StringTerm, TermError> {
        let mut tokens = Vec::new();
        while let Some(c) = self.peek() {
            if c == ')' || c == '=' {
                break;
            }
            let atom = self.atom()?;
            if self.peek() == Some('^') {
                self.pos += 1;
                let exp = self.exponent()?;
                let base = match atom {
                    Atom::Group(t) => t,
                    Atom::Tok(t) => StringTerm::new(vec![t]),
                };
                tokens.push(Token::power(base, exp).map_err(|_| err(self.pos, "variable in power base"))?);
            } else {
                match atom {
                    Atom::Group(t) => tokens.extend(t.into_tokens()),
                    Atom::Tok(t) => tokens.push(t),
                }
            }
        }
        Ok(StringTerm::new(tokens))
    }

    fn atom(&mut self) -> Result<Atom, TermError> {
        let start = self.pos;
        let c = self.bump().ok_or_else(|| err(start, "unexpected end"))?;
        match c {
            '(' => {
                let t = self.term()?;
                self.expect(')')?;
                Ok(Atom::Group(t))
            }
            'x' | 'y' | 'z' => {
                let mut name = c.to_string();
                name.push_str(&self.digits());
                while self.chars.get(self.pos) == Some(&'\'') {
                    name.push('\'');
                    self.pos += 1;
                }
                Ok(Atom::Tok(Token::Var(self.vocab.var(&name))))
            }
            'o' => {
                let name = format!("o{}", self.digits());
                Ok(Atom::Tok(Token::Sym(self.vocab.sym(&name))))
            }
            c if c.is_alphanumeric() => {
                self.vocab.add_char(c);
                Ok(Atom::Tok(Token::Char(c)))
            }
            other => Err(err(start, format!("unexpected `{other}`"))),
        }
    }

    fn exponent(&mut self) -> Result<IntTerm, TermError> {
        if self.peek() == Some('{') {
            self.pos += 1;
            let e = self.int_expr()?;
            self.expect('}')?;
            Ok(e)
        } else {
            self.int_factor()
        }
    }

    fn int_expr(&mut self) -> Result<IntTerm, TermError> {
        let mut acc = if self.peek() == Some('-') {
            self.pos += 1;
            -&self.int_product()?
        } else {
            self.int_product()?
        };
        loop {
            match self.peek() {
                Some('+') => {
                    self.pos += 1;
                    acc = &acc + &self.int_product()?;
                }
                Some('-') => {
                    self.pos += 1;
                    acc = &acc - &self.int_product()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn int_product(&mut self) -> Result<IntTerm, TermError> {
        let mut acc = self.int_factor()?;
        while self.peek() == Some('*') {
            self.pos += 1;
            acc = &acc * &self.int_factor()?;
        }
        Ok(acc)
    }

    /// A number optionally followed directly by a name, or a name, or `|x|`.
    fn int_factor(&mut self) -> Result<IntTerm, TermError> {
        let start = self.pos;
        match self.peek() {
            Some(c) if c.is_ascii_digit() => {
                let k: i64 = self.digits().parse().map_err(|_| err(start, "bad number"))?;
                let coeff = IntTerm::constant(k);
                match self.chars.get(self.pos) {
                    Some('m' | 'n' | 'k' | '|' | '(') => Ok(&coeff * &self.int_factor()?),
                    _ => Ok(coeff),
                }
            }
            Some('|') => {
                self.pos += 1;
                let t = self.term_until_bar()?;
                Ok(t.length())
            }
            Some('(') => {
                self.pos += 1;
                let e = self.int_expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Some(c @ ('m' | 'n' | 'k')) => {
                self.pos += 1;
                let mut name = c.to_string();
                name.push_str(&self.digits());
                while self.chars.get(self.pos) == Some(&'\'') {
                    name.push('\'');
                    self.pos += 1;
                    name.push_str(&self.digits());
                }
                Ok(IntTerm::var(self.vocab.int(&name)))
            }
            other => Err(err(start, format!("expected integer term, found {other:?}"))),
        }
    }

    fn term_until_bar(&mut self) -> Result<StringTerm, TermError> {
        let end = self.chars[self.pos..]
            .iter()
            .position(|c| *c == '|')
            .ok_or_else(|| err(self.pos, "unterminated length"))?;
        let inner: String = self.chars[self.pos..self.pos + end].iter().collect();
        self.pos += end + 1;
        let mut sub = Cursor::new(&inner, self.vocab);
        let t = sub.term()?;
        if sub.peek().is_some() {
            return Err(err(sub.pos, "trailing input in length"));
        }
        Ok(t)
    }

    fn finish(&mut self) -> Result<(), TermError> {
        match self.peek() {
            None => Ok(()),
            Some(c) => Err(err(self.pos, format!("trailing `{c}`"))),
        }
    }
}

enum Atom {
    Group(StringTerm),
    Tok(Token),
}

pub fn parse_term(vocab: &mut Vocab, s: &str) -> Result<StringTerm, TermError> {
    let mut c = Cursor::new(s, vocab);
    let t = c.term()?;
    c.finish()?;
    Ok(t)
}

/// Parses `lhs = rhs`.
pub fn parse_equation(vocab: &mut Vocab, s: &str) -> Result<StringEquation, TermError> {
    let mut c = Cursor::new(s, vocab);
    let lhs = c.term()?;
    c.expect('=')?;
    let rhs = c.term()?;
    c.finish()?;
    Ok(StringEquation::new(lhs, rhs))
}

pub fn parse_int(vocab: &mut Vocab, s: &str) -> Result<IntTerm, TermError> {
    let mut c = Cursor::new(s, vocab);
    let t = c.int_expr()?;
    c.finish()?;
    Ok(t)
}

/// Parses `e1 rel e2` with `rel` one of `=`, `<=`, `<`, `>=`, `>`.
pub fn parse_constraint(vocab: &mut Vocab, s: &str) -> Result<IntConstraint, TermError> {
    let mut c = Cursor::new(s, vocab);
    let lhs = c.int_expr()?;
    let rel = match c.bump() {
        Some('=') => Relation::Eq,
        Some('<') if c.chars.get(c.pos) == Some(&'=') => {
            c.pos += 1;
            Relation::Le
        }
        Some('<') => Relation::Lt,
        Some('>') if c.chars.get(c.pos) == Some(&'=') => {
            c.pos += 1;
            Relation::Ge
        }
        Some('>') => Relation::Gt,
        other => return Err(err(c.pos, format!("expected relation, found {other:?}"))),
    };
    let rhs = c.int_expr()?;
    c.finish()?;
    Ok(IntConstraint::new(rel, lhs, rhs))
}
