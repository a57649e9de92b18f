//! Substitutions, bindings and models.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::int::{Atom, IntConstraint, IntTerm};
use crate::term::{IntVar, StrVar, StringEquation, StringTerm, SymChar, Token, Vocab};

/// Maps string variables to terms and symbolic characters to characters.
/// Variables without an entry map to themselves.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Substitution {
    pub strings: BTreeMap<StrVar, StringTerm>,
    pub chars: BTreeMap<SymChar, Token>,
    pub ints: BTreeMap<IntVar, IntTerm>,
}

impl Substitution {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn single(x: StrVar, t: StringTerm) -> Self {
        let mut s = Self::new();
        s.strings.insert(x, t);
        s
    }

    pub fn char(o: SymChar, t: Token) -> Self {
        debug_assert!(t.is_char());
        let mut s = Self::new();
        s.chars.insert(o, t);
        s
    }

    pub fn int(m: IntVar, t: IntTerm) -> Self {
        let mut s = Self::new();
        s.ints.insert(m, t);
        s
    }

    pub fn from_binding(b: &Binding) -> Self {
        match b {
            Binding::Str(x, t) => Self::single(*x, t.clone()),
            Binding::Sym(o, t) => Self::char(*o, t.clone()),
            Binding::Int(m, t) => Self::int(*m, t.clone()),
        }
    }

    pub fn is_identity(&self) -> bool {
        self.strings.iter().all(|(x, t)| t.tokens() == [Token::Var(*x)])
            && self.chars.iter().all(|(o, t)| *t == Token::Sym(*o))
            && self.ints.iter().all(|(m, t)| *t == IntTerm::var(*m))
    }

    /// No variable is reachable from its own image.
    pub fn is_acyclic(&self) -> bool {
        fn reach(s: &Substitution, from: StrVar, target: StrVar, depth: usize) -> bool {
            if depth > s.strings.len() {
                return true;
            }
            match s.strings.get(&from) {
                None => false,
                Some(t) => t.vars().into_iter().any(|y| {
                    if y == from && t.tokens() == [Token::Var(from)] {
                        return false;
                    }
                    y == target || reach(s, y, target, depth + 1)
                }),
            }
        }
        self.strings.keys().all(|x| {
            let t = &self.strings[x];
            if t.tokens() == [Token::Var(*x)] {
                return true;
            }
            !t.contains_var(*x) && !t.vars().into_iter().any(|y| reach(self, y, *x, 0))
        })
    }

    fn map_token(&self, t: &Token, out: &mut Vec<Token>) {
        match t {
            Token::Var(x) => match self.strings.get(x) {
                Some(img) => out.extend(img.tokens().iter().cloned()),
                None => out.push(t.clone()),
            },
            Token::Sym(o) => out.push(self.chars.get(o).cloned().unwrap_or_else(|| t.clone())),
            Token::Char(_) => out.push(t.clone()),
            Token::Power(p) => {
                let base = self.apply_term(&p.base);
                let exp = self.apply_int(&p.exponent);
                out.push(Token::ground_power(base, exp));
            }
        }
    }

    pub fn apply_term(&self, u: &StringTerm) -> StringTerm {
        let mut out = Vec::with_capacity(u.symbolic_length());
        for t in u.tokens() {
            self.map_token(t, &mut out);
        }
        StringTerm::new(out)
    }

    pub fn apply_equation(&self, e: &StringEquation) -> StringEquation {
        StringEquation::new(self.apply_term(&e.lhs), self.apply_term(&e.rhs))
    }

    /// `len(x)` becomes the length of the image of `x`.
    pub fn apply_int(&self, t: &IntTerm) -> IntTerm {
        if self.strings.is_empty() && self.ints.is_empty() {
            return t.clone();
        }
        t.substitute(&|a| match a {
            Atom::Len(x) => self.strings.get(&x).map(StringTerm::length),
            Atom::Int(m) => self.ints.get(&m).cloned(),
        })
    }

    pub fn apply_constraint(&self, c: &IntConstraint) -> IntConstraint {
        IntConstraint::new(c.relation, self.apply_int(&c.lhs), self.apply_int(&c.rhs))
    }

    pub fn display<'a>(&'a self, vocab: &'a Vocab) -> impl fmt::Display + 'a {
        DisplaySubst(self, vocab)
    }
}

struct DisplaySubst<'a>(&'a Substitution, &'a Vocab);

impl fmt::Display for DisplaySubst<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        let mut sep = |f: &mut fmt::Formatter<'_>| -> fmt::Result {
            if !first {
                write!(f, ", ")?;
            }
            first = false;
            Ok(())
        };
        for (x, t) in &self.0.strings {
            sep(f)?;
            write!(f, "{}/{}", self.1.var_name(*x), t.display(self.1))?;
        }
        for (o, t) in &self.0.chars {
            sep(f)?;
            write!(f, "{}/{}", self.1.sym_name(*o), StringTerm::new(vec![t.clone()]).display(self.1))?;
        }
        for (m, t) in &self.0.ints {
            sep(f)?;
            write!(f, "{}/{}", self.1.int_name(*m), t.display(self.1))?;
        }
        Ok(())
    }
}

/// A single elimination step recorded along a search path.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Binding {
    Str(StrVar, StringTerm),
    Sym(SymChar, Token),
    Int(IntVar, IntTerm),
}

/// Persistent list of bindings, newest first.
#[derive(Clone, Debug, Default)]
pub struct BindingList(Option<Arc<BindingCell>>);

#[derive(Debug)]
struct BindingCell {
    binding: Binding,
    prev: BindingList,
    len: usize,
}

impl BindingList {
    pub fn new() -> Self {
        BindingList(None)
    }

    pub fn push(&self, binding: Binding) -> BindingList {
        BindingList(Some(Arc::new(BindingCell {
            binding,
            prev: self.clone(),
            len: self.len() + 1,
        })))
    }

    pub fn len(&self) -> usize {
        self.0.as_ref().map_or(0, |c| c.len)
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_none()
    }

    /// Newest first.
    pub fn iter(&self) -> impl Iterator<Item = &Binding> {
        let mut cur = self.0.as_deref();
        std::iter::from_fn(move || {
            let c = cur?;
            cur = c.prev.0.as_deref();
            Some(&c.binding)
        })
    }
}

/// Concrete assignment of strings, characters and naturals.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Model {
    pub strings: BTreeMap<StrVar, String>,
    pub chars: BTreeMap<SymChar, char>,
    pub ints: BTreeMap<IntVar, i64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EvalError {
    NegativeExponent,
    TooLong,
}

/// Upper bound on the size of unwound strings during evaluation.
pub const MAX_UNWOUND: usize = 1 << 22;

impl Model {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn int_value(&self, a: Atom) -> i64 {
        match a {
            Atom::Int(m) => self.ints.get(&m).copied().unwrap_or(0),
            Atom::Len(x) => self.strings.get(&x).map_or(0, |s| s.chars().count() as i64),
        }
    }

    /// Unwinds `u` to a concrete string. Unassigned variables are ε,
    /// unassigned symbolic characters are `default`.
    pub fn eval_term(&self, u: &StringTerm, default: char) -> Result<String, EvalError> {
        let mut out = String::new();
        self.eval_into(u, default, &mut out)?;
        Ok(out)
    }

    fn eval_into(&self, u: &StringTerm, default: char, out: &mut String) -> Result<(), EvalError> {
        for t in u.tokens() {
            match t {
                Token::Char(c) => out.push(*c),
                Token::Sym(o) => out.push(self.chars.get(o).copied().unwrap_or(default)),
                Token::Var(x) => {
                    if let Some(s) = self.strings.get(x) {
                        out.push_str(s);
                    }
                }
                Token::Power(p) => {
                    let n = p.exponent.eval(&|a| self.int_value(a));
                    if n < 0 {
                        return Err(EvalError::NegativeExponent);
                    }
                    let mut base = String::new();
                    self.eval_into(&p.base, default, &mut base)?;
                    if (base.len() as i128).saturating_mul(n) + out.len() as i128 > MAX_UNWOUND as i128 {
                        return Err(EvalError::TooLong);
                    }
                    for _ in 0..n {
                        out.push_str(&base);
                    }
                }
            }
            if out.len() > MAX_UNWOUND {
                return Err(EvalError::TooLong);
            }
        }
        Ok(())
    }

    pub fn satisfies(&self, e: &StringEquation, default: char) -> bool {
        match (self.eval_term(&e.lhs, default), self.eval_term(&e.rhs, default)) {
            (Ok(a), Ok(b)) => a == b,
            _ => false,
        }
    }

    pub fn satisfies_all(&self, eqs: &[StringEquation], default: char) -> bool {
        eqs.iter().all(|e| self.satisfies(e, default))
    }
}
