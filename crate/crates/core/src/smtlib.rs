//! SMT-LIB2 subset: declarations of string constants and equations over
//! literals and `str.++`.

use std::fmt::{self, Write as _};

use crate::error::ParseError;
use crate::subst::Model;
use crate::term::{StrVar, StringEquation, StringTerm, Token, Vocab};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Pos {
    pub line: usize,
    pub column: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Sexp {
    Symbol(String, Pos),
    Literal(String, Pos),
    Other(String, Pos),
    List(Vec<Sexp>, Pos),
}

impl Sexp {
    fn pos(&self) -> Pos {
        match self {
            Sexp::Symbol(_, p) | Sexp::Literal(_, p) | Sexp::Other(_, p) | Sexp::List(_, p) => *p,
        }
    }

    fn symbol(&self) -> Option<&str> {
        match self {
            Sexp::Symbol(s, _) => Some(s),
            _ => None,
        }
    }
}

fn syntax(p: Pos, message: impl Into<String>) -> ParseError {
    ParseError::Syntax { line: p.line, column: p.column, message: message.into() }
}

fn unsupported(p: Pos, feature: impl Into<String>) -> ParseError {
    ParseError::Unsupported { line: p.line, column: p.column, feature: feature.into() }
}

struct Lexer<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    pos: Pos,
}

impl Lexer<'_> {
    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.pos.line += 1;
            self.pos.column = 1;
        } else {
            self.pos.column += 1;
        }
        Some(c)
    }

    fn skip_blank(&mut self) {
        while let Some(&c) = self.chars.peek() {
            if c == ';' {
                while self.chars.peek().is_some_and(|&c| c != '\n') {
                    self.bump();
                }
            } else if c.is_whitespace() {
                self.bump();
            } else {
                break;
            }
        }
    }

    fn sexp(&mut self) -> Result<Option<Sexp>, ParseError> {
        self.skip_blank();
        let start = self.pos;
        let Some(&c) = self.chars.peek() else { return Ok(None) };
        match c {
            '(' => {
                self.bump();
                let mut items = Vec::new();
                loop {
                    self.skip_blank();
                    match self.chars.peek() {
                        None => return Err(syntax(start, "unclosed parenthesis")),
                        Some(')') => {
                            self.bump();
                            return Ok(Some(Sexp::List(items, start)));
                        }
                        Some(_) => items.push(self.sexp()?.expect("input remains")),
                    }
                }
            }
            ')' => Err(syntax(start, "unexpected `)`")),
            '"' => {
                self.bump();
                let mut s = String::new();
                loop {
                    match self.bump() {
                        None => return Err(syntax(start, "unterminated string literal")),
                        Some('"') if self.chars.peek() == Some(&'"') => {
                            self.bump();
                            s.push('"');
                        }
                        Some('"') => break,
                        Some(c) => s.push(c),
                    }
                }
                let s = unescape(&s).map_err(|m| syntax(start, m))?;
                Ok(Some(Sexp::Literal(s, start)))
            }
            '|' => {
                self.bump();
                let mut s = String::new();
                loop {
                    match self.bump() {
                        None => return Err(syntax(start, "unterminated quoted symbol")),
                        Some('|') => break,
                        Some(c) => s.push(c),
                    }
                }
                Ok(Some(Sexp::Symbol(s, start)))
            }
            _ => {
                let mut s = String::new();
                while let Some(&c) = self.chars.peek() {
                    if c.is_whitespace() || matches!(c, '(' | ')' | '"' | ';' | '|') {
                        break;
                    }
                    s.push(c);
                    self.bump();
                }
                let first = s.chars().next().expect("non-empty token");
                if first.is_ascii_digit() || first == ':' || first == '#' {
                    Ok(Some(Sexp::Other(s, start)))
                } else {
                    Ok(Some(Sexp::Symbol(s, start)))
                }
            }
        }
    }
}

/// `\u{h..}` and `\uhhhh` escapes; any other backslash is literal.
fn unescape(s: &str) -> Result<String, String> {
    let cs: Vec<char> = s.chars().collect();
    let mut out = String::new();
    let mut i = 0;
    while i < cs.len() {
        if cs[i] == '\\' && cs.get(i + 1) == Some(&'u') {
            if cs.get(i + 2) == Some(&'{') {
                if let Some(end) = cs[i + 3..].iter().position(|&c| c == '}') {
                    let hex: String = cs[i + 3..i + 3 + end].iter().collect();
                    if (1..=5).contains(&hex.len()) {
                        if let Some(c) = u32::from_str_radix(&hex, 16).ok().and_then(char::from_u32) {
                            out.push(c);
                            i += 4 + end;
                            continue;
                        }
                    }
                }
            } else if cs.len() >= i + 6 {
                let hex: String = cs[i + 2..i + 6].iter().collect();
                if hex.chars().all(|c| c.is_ascii_hexdigit()) {
                    let c = u32::from_str_radix(&hex, 16).ok().and_then(char::from_u32).ok_or("invalid escape")?;
                    out.push(c);
                    i += 6;
                    continue;
                }
            }
        }
        out.push(cs[i]);
        i += 1;
    }
    Ok(out)
}

fn escape(s: &str) -> String {
    let mut out = String::new();
    for c in s.chars() {
        match c {
            '"' => out.push_str("\"\""),
            '\\' => out.push_str("\\u{5c}"),
            ' '..='~' => out.push(c),
            _ => {
                let _ = write!(out, "\\u{{{:x}}}", c as u32);
            }
        }
    }
    out
}

/// A parsed benchmark: declared constants and equations over them.
#[derive(Clone, Debug)]
pub struct Problem {
    pub vocab: Vocab,
    pub declared: Vec<StrVar>,
    pub assertions: Vec<StringEquation>,
    pub logic: Option<String>,
    pub source: Option<String>,
}

#[derive(PartialEq, Eq, Debug)]
enum Named {
    Char(char),
    Var(String),
}

impl Problem {
    fn named(&self, u: &StringTerm) -> Vec<Named> {
        u.tokens()
            .iter()
            .map(|t| match t {
                Token::Char(c) => Named::Char(*c),
                Token::Var(x) => Named::Var(self.vocab.var_name(*x).to_string()),
                _ => unreachable!("input terms are plain"),
            })
            .collect()
    }

    fn shape(&self) -> (Vec<String>, Vec<(Vec<Named>, Vec<Named>)>) {
        let decl = self.declared.iter().map(|x| self.vocab.var_name(*x).to_string()).collect();
        let eqs = self.assertions.iter().map(|e| (self.named(&e.lhs), self.named(&e.rhs))).collect();
        (decl, eqs)
    }
}

impl PartialEq for Problem {
    fn eq(&self, other: &Self) -> bool {
        self.logic == other.logic && self.shape() == other.shape()
    }
}

pub fn parse_smt2(text: &str) -> Result<Problem, ParseError> {
    let mut lx = Lexer { chars: text.chars().peekable(), pos: Pos { line: 1, column: 1 } };
    let mut p = Problem { vocab: Vocab::new(), declared: Vec::new(), assertions: Vec::new(), logic: None, source: None };
    while let Some(cmd) = lx.sexp()? {
        let Sexp::List(items, pos) = &cmd else {
            return Err(syntax(cmd.pos(), "expected a command"));
        };
        let Some(head) = items.first().and_then(Sexp::symbol) else {
            return Err(syntax(*pos, "expected a command name"));
        };
        match head {
            "set-logic" => {
                let logic = items.get(1).and_then(Sexp::symbol).ok_or_else(|| syntax(*pos, "set-logic expects a symbol"))?;
                if !matches!(logic, "QF_S" | "QF_SLIA") {
                    return Err(unsupported(items[1].pos(), format!("logic {logic}")));
                }
                p.logic = Some(logic.to_string());
            }
            "set-info" | "set-option" | "check-sat" | "get-model" | "exit" => {}
            "declare-fun" => {
                let [_, name, Sexp::List(args, _), sort] = items.as_slice() else {
                    return Err(syntax(*pos, "malformed declare-fun"));
                };
                if !args.is_empty() {
                    return Err(unsupported(*pos, "declare-fun with arguments"));
                }
                declare(&mut p, name, sort)?;
            }
            "declare-const" => {
                let [_, name, sort] = items.as_slice() else {
                    return Err(syntax(*pos, "malformed declare-const"));
                };
                declare(&mut p, name, sort)?;
            }
            "assert" => {
                let [_, body] = items.as_slice() else {
                    return Err(syntax(*pos, "assert expects one term"));
                };
                let e = equation(&mut p, body)?;
                p.assertions.push(e);
            }
            other => return Err(unsupported(*pos, other.to_string())),
        }
    }
    Ok(p)
}

fn declare(p: &mut Problem, name: &Sexp, sort: &Sexp) -> Result<(), ParseError> {
    let Some(n) = name.symbol() else {
        return Err(syntax(name.pos(), "expected a symbol"));
    };
    match sort.symbol() {
        Some("String") => {}
        Some(s) => return Err(unsupported(sort.pos(), format!("sort {s}"))),
        None => return Err(unsupported(sort.pos(), "compound sort")),
    }
    if p.vocab.lookup_var(n).is_some() {
        return Err(syntax(name.pos(), format!("`{n}` declared twice")));
    }
    let x = p.vocab.var(n);
    p.declared.push(x);
    Ok(())
}

fn equation(p: &mut Problem, body: &Sexp) -> Result<StringEquation, ParseError> {
    let Sexp::List(items, pos) = body else {
        return Err(unsupported(body.pos(), "non-equation assertion"));
    };
    match items.first() {
        Some(Sexp::Symbol(s, _)) if s == "=" => {}
        Some(Sexp::Symbol(s, sp)) => return Err(unsupported(*sp, s.clone())),
        _ => return Err(syntax(*pos, "expected an application")),
    }
    let [_, l, r] = items.as_slice() else {
        return Err(syntax(*pos, "`=` expects two arguments"));
    };
    let mut lt = Vec::new();
    let mut rt = Vec::new();
    term(p, l, &mut lt)?;
    term(p, r, &mut rt)?;
    Ok(StringEquation::new(StringTerm::new(lt), StringTerm::new(rt)))
}

fn term(p: &mut Problem, t: &Sexp, out: &mut Vec<Token>) -> Result<(), ParseError> {
    match t {
        Sexp::Literal(s, _) => {
            for c in s.chars() {
                p.vocab.add_char(c);
                out.push(Token::Char(c));
            }
            Ok(())
        }
        Sexp::Symbol(s, pos) => match p.vocab.lookup_var(s) {
            Some(x) => {
                out.push(Token::Var(x));
                Ok(())
            }
            None => Err(syntax(*pos, format!("undeclared constant `{s}`"))),
        },
        Sexp::Other(s, pos) => Err(unsupported(*pos, s.clone())),
        Sexp::List(items, pos) => {
            let head = items.first().ok_or_else(|| syntax(*pos, "empty application"))?;
            match head.symbol() {
                Some("str.++") => {
                    for a in &items[1..] {
                        term(p, a, out)?;
                    }
                    Ok(())
                }
                Some(op) => Err(unsupported(head.pos(), op.to_string())),
                None => Err(syntax(*pos, "expected an operator")),
            }
        }
    }
}

fn is_simple_symbol(s: &str) -> bool {
    let special = "~!@$%^&*_-+=<>.?/";
    !s.is_empty()
        && !s.starts_with(|c: char| c.is_ascii_digit())
        && s.chars().all(|c| c.is_ascii_alphanumeric() || special.contains(c))
}

fn symbol(s: &str) -> String {
    if is_simple_symbol(s) {
        s.to_string()
    } else {
        format!("|{s}|")
    }
}

fn print_term(p: &Problem, u: &StringTerm, out: &mut String) {
    let mut parts: Vec<String> = Vec::new();
    let mut lit = String::new();
    for t in u.tokens() {
        match t {
            Token::Char(c) => lit.push(*c),
            Token::Var(x) => {
                if !lit.is_empty() {
                    parts.push(format!("\"{}\"", escape(&std::mem::take(&mut lit))));
                }
                parts.push(symbol(p.vocab.var_name(*x)));
            }
            _ => unreachable!("input terms are plain"),
        }
    }
    if !lit.is_empty() || parts.is_empty() {
        parts.push(format!("\"{}\"", escape(&lit)));
    }
    if parts.len() == 1 {
        out.push_str(&parts[0]);
    } else {
        let _ = write!(out, "(str.++ {})", parts.join(" "));
    }
}

pub fn print_smt2(p: &Problem) -> String {
    let mut s = String::new();
    if let Some(l) = &p.logic {
        let _ = writeln!(s, "(set-logic {l})");
    }
    for x in &p.declared {
        let _ = writeln!(s, "(declare-const {} String)", symbol(p.vocab.var_name(*x)));
    }
    for e in &p.assertions {
        s.push_str("(assert (= ");
        print_term(p, &e.lhs, &mut s);
        s.push(' ');
        print_term(p, &e.rhs, &mut s);
        s.push_str("))\n");
    }
    s.push_str("(check-sat)\n");
    s
}

/// `define-fun` lines for the declared constants.
pub struct ModelDisplay<'a> {
    pub problem: &'a Problem,
    pub model: &'a Model,
}

impl fmt::Display for ModelDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for x in &self.problem.declared {
            let v = self.model.strings.get(x).map(String::as_str).unwrap_or("");
            writeln!(f, "(define-fun {} () String \"{}\")", symbol(self.problem.vocab.var_name(*x)), escape(v))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_file() {
        let p = parse_smt2("(set-logic QF_S)\n(declare-fun x () String)\n(declare-fun y () String)\n(assert (= (str.++ x x) (str.++ y \"b\")))\n(check-sat)\n").unwrap();
        assert_eq!(p.assertions.len(), 1);
        assert_eq!(p.assertions[0].display(&p.vocab).to_string(), "x x = y b");
    }

    #[test]
    fn unsupported_operator_named() {
        let e = parse_smt2("(declare-const x String)\n(declare-const y String)\n(assert (str.contains x y))").unwrap_err();
        assert_eq!(e, ParseError::Unsupported { line: 3, column: 10, feature: "str.contains".into() });
        let e = parse_smt2("(declare-const x String)\n(assert (= (str.len x) 3))").unwrap_err();
        assert!(matches!(e, ParseError::Unsupported { feature, .. } if feature == "str.len"));
    }

    #[test]
    fn syntax_errors_carry_positions() {
        let e = parse_smt2("(assert (= x \"a\"))").unwrap_err();
        assert_eq!(e, ParseError::Syntax { line: 1, column: 12, message: "undeclared constant `x`".into() });
        let e = parse_smt2("(declare-const x String)\n  (assert (= x \"a\")").unwrap_err();
        assert!(matches!(e, ParseError::Syntax { line: 2, column: 3, .. }));
    }

    #[test]
    fn empty_problem() {
        let p = parse_smt2("(check-sat)").unwrap();
        assert!(p.assertions.is_empty());
    }

    #[test]
    fn escapes_round_trip() {
        let src = "(declare-const |a b| String)\n(assert (= (str.++ |a b| \"q\"\"\\u{7f}\\u0041\") \"\"))";
        let p = parse_smt2(src).unwrap();
        let lits: String = p.assertions[0].lhs.tokens().iter().filter_map(|t| if let Token::Char(c) = t { Some(*c) } else { None }).collect();
        assert_eq!(lits, "q\"\u{7f}A");
        let q = parse_smt2(&print_smt2(&p)).unwrap();
        assert_eq!(p, q);
    }
}
