//! Tokens, string terms and string equations.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use crate::error::TermError;
use crate::int::{Atom, IntTerm};

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct StrVar(pub u32);

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct SymChar(pub u32);

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct IntVar(pub u32);

/// Ground power `base^exponent`. The base never contains a string variable.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Power {
    pub base: StringTerm,
    pub exponent: IntTerm,
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Token {
    Char(char),
    Sym(SymChar),
    Var(StrVar),
    Power(Arc<Power>),
}

impl Token {
    /// Builds a power token, rejecting bases that mention string variables.
    pub fn power(base: StringTerm, exponent: IntTerm) -> Result<Token, TermError> {
        if !base.is_ground() {
            return Err(TermError::VariableInPowerBase);
        }
        Ok(Token::Power(Arc::new(Power { base, exponent })))
    }

    /// Same as [`Token::power`] for bases known to be ground.
    pub(crate) fn ground_power(base: StringTerm, exponent: IntTerm) -> Token {
        debug_assert!(base.is_ground());
        Token::Power(Arc::new(Power { base, exponent }))
    }

    pub fn is_char(&self) -> bool {
        matches!(self, Token::Char(_) | Token::Sym(_))
    }

    pub fn is_ground(&self) -> bool {
        !matches!(self, Token::Var(_))
    }

    pub fn as_power(&self) -> Option<&Power> {
        match self {
            Token::Power(p) => Some(p),
            _ => None,
        }
    }

    pub fn as_var(&self) -> Option<StrVar> {
        match self {
            Token::Var(x) => Some(*x),
            _ => None,
        }
    }

    pub fn length(&self) -> IntTerm {
        match self {
            Token::Char(_) | Token::Sym(_) => IntTerm::constant(1),
            Token::Var(x) => IntTerm::len(*x),
            Token::Power(p) => &p.exponent * &p.base.length(),
        }
    }

    pub fn reverse(&self) -> Token {
        match self {
            Token::Power(p) => Token::ground_power(p.base.reverse(), p.exponent.clone()),
            t => t.clone(),
        }
    }
}

/// Finite token sequence; the empty sequence is ε.
#[derive(Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct StringTerm(Vec<Token>);

impl StringTerm {
    pub fn empty() -> Self {
        StringTerm(Vec::new())
    }

    pub fn new(tokens: Vec<Token>) -> Self {
        StringTerm(tokens)
    }

    pub fn from_chars(s: &str) -> Self {
        StringTerm(s.chars().map(Token::Char).collect())
    }

    pub fn tokens(&self) -> &[Token] {
        &self.0
    }

    pub fn into_tokens(self) -> Vec<Token> {
        self.0
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn first(&self) -> Option<&Token> {
        self.0.first()
    }

    pub fn push(&mut self, t: Token) {
        self.0.push(t);
    }

    pub fn concat(&self, other: &StringTerm) -> StringTerm {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        StringTerm(v)
    }

    pub fn slice(&self, from: usize, to: usize) -> StringTerm {
        StringTerm(self.0[from..to].to_vec())
    }

    /// Every character counts 1, `len(x)` for variables, `m * |w|` for `w^m`.
    pub fn length(&self) -> IntTerm {
        self.0.iter().fold(IntTerm::zero(), |acc, t| &acc + &t.length())
    }

    /// Number of tokens, powers counted as one.
    pub fn symbolic_length(&self) -> usize {
        self.0.len()
    }

    /// Contiguous token windows, including ε and the whole term. Windows of
    /// each power base are included one level deep.
    pub fn consecutive_tokens(&self) -> BTreeSet<StringTerm> {
        let mut out = BTreeSet::new();
        Self::windows_into(&self.0, &mut out);
        for t in &self.0 {
            if let Token::Power(p) = t {
                Self::windows_into(&p.base.0, &mut out);
            }
        }
        out
    }

    fn windows_into(tokens: &[Token], out: &mut BTreeSet<StringTerm>) {
        out.insert(StringTerm::empty());
        for i in 0..tokens.len() {
            for j in i + 1..=tokens.len() {
                out.insert(StringTerm(tokens[i..j].to_vec()));
            }
        }
    }

    pub fn reverse(&self) -> StringTerm {
        StringTerm(self.0.iter().rev().map(Token::reverse).collect())
    }

    pub fn is_ground(&self) -> bool {
        self.0.iter().all(Token::is_ground)
    }

    /// Only concrete characters.
    pub fn is_concrete(&self) -> bool {
        self.0.iter().all(|t| matches!(t, Token::Char(_)))
    }

    pub fn as_concrete(&self) -> Option<String> {
        self.0
            .iter()
            .map(|t| match t {
                Token::Char(c) => Some(*c),
                _ => None,
            })
            .collect()
    }

    pub fn vars(&self) -> BTreeSet<StrVar> {
        let mut out = BTreeSet::new();
        for t in &self.0 {
            if let Token::Var(x) = t {
                out.insert(*x);
            }
        }
        out
    }

    pub fn contains_var(&self, x: StrVar) -> bool {
        self.0.iter().any(|t| matches!(t, Token::Var(y) if *y == x))
    }

    /// Visits every token, descending into power bases.
    pub fn visit(&self, f: &mut impl FnMut(&Token)) {
        for t in &self.0 {
            f(t);
            if let Token::Power(p) = t {
                p.base.visit(f);
            }
        }
    }

    pub fn int_atoms(&self) -> BTreeSet<Atom> {
        let mut out = BTreeSet::new();
        self.visit(&mut |t| {
            if let Token::Power(p) = t {
                out.extend(p.exponent.atoms());
            }
        });
        out
    }

    /// Total token count including tokens inside power bases.
    pub fn weight(&self) -> usize {
        self.0
            .iter()
            .map(|t| match t {
                Token::Power(p) => 1 + p.base.weight(),
                _ => 1,
            })
            .sum()
    }

    pub fn display<'a>(&'a self, vocab: &'a Vocab) -> impl fmt::Display + 'a {
        DisplayTerm(self, vocab)
    }
}

impl From<Vec<Token>> for StringTerm {
    fn from(v: Vec<Token>) -> Self {
        StringTerm(v)
    }
}

impl FromIterator<Token> for StringTerm {
    fn from_iter<I: IntoIterator<Item = Token>>(iter: I) -> Self {
        StringTerm(iter.into_iter().collect())
    }
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct StringEquation {
    pub lhs: StringTerm,
    pub rhs: StringTerm,
}

impl StringEquation {
    pub fn new(lhs: StringTerm, rhs: StringTerm) -> Self {
        StringEquation { lhs, rhs }
    }

    pub fn swapped(&self) -> StringEquation {
        StringEquation::new(self.rhs.clone(), self.lhs.clone())
    }

    pub fn reversed(&self) -> StringEquation {
        StringEquation::new(self.lhs.reverse(), self.rhs.reverse())
    }

    pub fn is_trivial(&self) -> bool {
        self.lhs == self.rhs
    }

    /// Only variables and concrete characters.
    pub fn is_plain(&self) -> bool {
        let plain = |t: &StringTerm| t.tokens().iter().all(|t| matches!(t, Token::Char(_) | Token::Var(_)));
        plain(&self.lhs) && plain(&self.rhs)
    }

    pub fn vars(&self) -> BTreeSet<StrVar> {
        let mut v = self.lhs.vars();
        v.extend(self.rhs.vars());
        v
    }

    pub fn weight(&self) -> usize {
        self.lhs.weight() + self.rhs.weight()
    }

    pub fn display<'a>(&'a self, vocab: &'a Vocab) -> impl fmt::Display + 'a {
        DisplayEq(self, vocab)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Checkpoint {
    vars: usize,
    syms: usize,
    ints: usize,
    fresh: u32,
}

/// Name tables and fresh-name generation. Identifiers are interned indices.
#[derive(Clone, Debug, Default)]
pub struct Vocab {
    vars: Vec<String>,
    syms: Vec<String>,
    ints: Vec<String>,
    var_lookup: HashMap<String, StrVar>,
    int_lookup: HashMap<String, IntVar>,
    sym_lookup: HashMap<String, SymChar>,
    alphabet: BTreeSet<char>,
    witness: Option<char>,
    fresh: u32,
}

impl Vocab {
    pub fn new() -> Self {
        Self::default()
    }

    /// Interns a user-visible variable name.
    pub fn var(&mut self, name: &str) -> StrVar {
        if let Some(v) = self.var_lookup.get(name) {
            return *v;
        }
        let v = StrVar(self.vars.len() as u32);
        self.vars.push(name.to_string());
        self.var_lookup.insert(name.to_string(), v);
        v
    }

    pub fn lookup_var(&self, name: &str) -> Option<StrVar> {
        self.var_lookup.get(name).copied()
    }

    pub fn var_count(&self) -> usize {
        self.vars.len()
    }

    /// Fresh names carry a `'` which cannot occur in an SMT-LIB simple symbol.
    pub fn fresh_var(&mut self, from: StrVar) -> StrVar {
        self.fresh += 1;
        let base = self.vars[from.0 as usize].split('\'').next().unwrap_or("x").to_string();
        let v = StrVar(self.vars.len() as u32);
        self.vars.push(format!("{base}'{}", self.fresh));
        v
    }

    pub fn fresh_sym(&mut self) -> SymChar {
        self.fresh += 1;
        let s = SymChar(self.syms.len() as u32);
        self.syms.push(format!("o'{}", self.fresh));
        s
    }

    pub fn fresh_int(&mut self) -> IntVar {
        self.fresh += 1;
        let v = IntVar(self.ints.len() as u32);
        self.ints.push(format!("m'{}", self.fresh));
        v
    }

    /// Interns a named integer variable.
    pub fn int(&mut self, name: &str) -> IntVar {
        if let Some(v) = self.int_lookup.get(name) {
            return *v;
        }
        let v = IntVar(self.ints.len() as u32);
        self.ints.push(name.to_string());
        self.int_lookup.insert(name.to_string(), v);
        v
    }

    /// Interns a named symbolic character.
    pub fn sym(&mut self, name: &str) -> SymChar {
        if let Some(s) = self.sym_lookup.get(name) {
            return *s;
        }
        let s = SymChar(self.syms.len() as u32);
        self.syms.push(name.to_string());
        self.sym_lookup.insert(name.to_string(), s);
        s
    }

    pub fn lookup_int(&self, name: &str) -> Option<IntVar> {
        self.int_lookup.get(name).copied()
    }

    pub fn var_name(&self, v: StrVar) -> &str {
        self.vars.get(v.0 as usize).map(String::as_str).unwrap_or("?")
    }

    pub fn sym_name(&self, s: SymChar) -> &str {
        self.syms.get(s.0 as usize).map(String::as_str).unwrap_or("?")
    }

    pub fn int_name(&self, v: IntVar) -> &str {
        self.ints.get(v.0 as usize).map(String::as_str).unwrap_or("?")
    }

    pub fn add_char(&mut self, c: char) {
        self.alphabet.insert(c);
        if self.witness == Some(c) {
            self.witness = None;
        }
    }

    /// Adds one character not occurring in the input, so that the alphabet
    /// is never exhausted by the input characters alone.
    pub fn close_alphabet(&mut self) -> char {
        if let Some(w) = self.witness {
            return w;
        }
        let w = ('a'..='z')
            .chain('A'..='Z')
            .chain('0'..='9')
            .chain((0x100u32..).filter_map(char::from_u32))
            .find(|c| !self.alphabet.contains(c))
            .expect("some character is unused");
        self.alphabet.insert(w);
        self.witness = Some(w);
        w
    }

    /// Current sizes of the fresh-name tables.
    pub fn checkpoint(&self) -> Checkpoint {
        Checkpoint { vars: self.vars.len(), syms: self.syms.len(), ints: self.ints.len(), fresh: self.fresh }
    }

    /// Forgets fresh names created after `cp`. Named (interned) entries
    /// created since are dropped as well, so only roll back over code that
    /// allocates fresh names.
    pub fn rollback(&mut self, cp: Checkpoint) {
        self.vars.truncate(cp.vars);
        self.syms.truncate(cp.syms);
        self.ints.truncate(cp.ints);
        self.var_lookup.retain(|_, v| (v.0 as usize) < cp.vars);
        self.sym_lookup.retain(|_, v| (v.0 as usize) < cp.syms);
        self.int_lookup.retain(|_, v| (v.0 as usize) < cp.ints);
        self.fresh = cp.fresh;
    }

    pub fn alphabet(&self) -> &BTreeSet<char> {
        &self.alphabet
    }

    pub fn least_char(&self) -> char {
        self.alphabet.iter().next().copied().unwrap_or('a')
    }
}

fn write_char(f: &mut fmt::Formatter<'_>, c: char) -> fmt::Result {
    if c.is_ascii_graphic() {
        write!(f, "{c}")
    } else {
        write!(f, "\\u{{{:x}}}", c as u32)
    }
}

fn write_token(f: &mut fmt::Formatter<'_>, t: &Token, v: &Vocab) -> fmt::Result {
    match t {
        Token::Char(c) => write_char(f, *c),
        Token::Sym(s) => write!(f, "{}", v.sym_name(*s)),
        Token::Var(x) => write!(f, "{}", v.var_name(*x)),
        Token::Power(p) => {
            let simple = p.exponent.as_constant().is_some() || p.exponent.terms().count() == 1 && p.exponent.constant_part() == 0 && p.exponent.terms().all(|(m, c)| c == 1 && m.degree() == 1);
            if p.base.symbolic_length() == 1 && matches!(p.base.tokens()[0], Token::Char(_) | Token::Sym(_)) {
                write_token(f, &p.base.tokens()[0], v)?;
            } else {
                write!(f, "(")?;
                for t in p.base.tokens() {
                    write_token(f, t, v)?;
                }
                write!(f, ")")?;
            }
            if simple {
                write!(f, "^{}", p.exponent.display(v))
            } else {
                write!(f, "^{{{}}}", p.exponent.display(v))
            }
        }
    }
}

fn write_tokens(f: &mut fmt::Formatter<'_>, ts: &[Token], v: &Vocab) -> fmt::Result {
    if ts.is_empty() {
        return write!(f, "ε");
    }
    for (i, t) in ts.iter().enumerate() {
        if i > 0 {
            write!(f, " ")?;
        }
        write_token(f, t, v)?;
    }
    Ok(())
}

struct DisplayTerm<'a>(&'a StringTerm, &'a Vocab);

impl fmt::Display for DisplayTerm<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_tokens(f, self.0.tokens(), self.1)
    }
}

struct DisplayEq<'a>(&'a StringEquation, &'a Vocab);

impl fmt::Display for DisplayEq<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} = {}", self.0.lhs.display(self.1), self.0.rhs.display(self.1))
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::int::IntTerm;

    /// Parses a compact term: lowercase `a`..`h` are characters, `x`,`y`,`z`
    /// (optionally followed by digits) are variables, `(..)^m` is a power
    /// over integer variable `m`.
    pub(crate) fn term(v: &mut Vocab, s: &str) -> StringTerm {
        crate::notation::parse_term(v, s).expect("valid notation")
    }

    #[test]
    fn length_of_empty_is_zero() {
        assert_eq!(StringTerm::empty().length(), IntTerm::zero());
    }

    #[test]
    fn length_expands_powers_and_variables() {
        let mut v = Vocab::new();
        let u = term(&mut v, "(abc)^m x b");
        let m = IntTerm::var(IntVar(0));
        let x = v.lookup_var("x").unwrap();
        let expected = &(&m.scale(3) + &IntTerm::len(x)) + &IntTerm::constant(1);
        assert_eq!(u.length(), expected);

        let u = term(&mut v, "a x (ab)^m");
        let expected = &(&IntTerm::constant(1) + &IntTerm::len(x)) + &m.scale(2);
        assert_eq!(u.length(), expected);
    }

    #[test]
    fn symbolic_length_counts_powers_once() {
        let mut v = Vocab::new();
        assert_eq!(term(&mut v, "(abc)^m x b").symbolic_length(), 3);
        assert_eq!(StringTerm::empty().symbolic_length(), 0);
        assert_eq!(term(&mut v, "abba").symbolic_length(), 4);
    }

    #[test]
    fn consecutive_tokens_matches_listing() {
        let mut v = Vocab::new();
        let u = term(&mut v, "(abc)^m x b");
        let got = u.consecutive_tokens();
        let expected: BTreeSet<StringTerm> = ["", "a", "b", "c", "(abc)^m", "x", "ab", "bc", "(abc)^m x", "x b", "abc", "(abc)^m x b"]
            .iter()
            .map(|s| term(&mut v, s))
            .collect();
        assert_eq!(got, expected);
        assert_eq!(got.len(), 12);

        let eps = StringTerm::empty().consecutive_tokens();
        assert_eq!(eps.len(), 1);
        let xy = term(&mut v, "x y").consecutive_tokens();
        let expected: BTreeSet<StringTerm> = ["", "x", "y", "x y"].iter().map(|s| term(&mut v, s)).collect();
        assert_eq!(xy, expected);
    }

    #[test]
    fn reverse_reverses_power_bases() {
        let mut v = Vocab::new();
        let u = term(&mut v, "a x (ab)^m");
        assert_eq!(u.reverse(), term(&mut v, "(ba)^m x a"));
        assert_eq!(StringTerm::empty().reverse(), StringTerm::empty());
        assert_eq!(u.reverse().reverse(), u);
    }

    #[test]
    fn power_base_must_be_ground() {
        let mut v = Vocab::new();
        let x = v.var("x");
        let base = StringTerm::new(vec![Token::Var(x)]);
        assert!(Token::power(base, IntTerm::constant(2)).is_err());
    }

    #[test]
    fn witness_character_is_fresh() {
        let mut v = Vocab::new();
        v.add_char('a');
        v.add_char('b');
        let w = v.close_alphabet();
        assert_eq!(w, 'c');
        assert_eq!(v.alphabet().len(), 3);
    }
}
