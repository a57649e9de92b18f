//! Term rewriting: power normalization, lemma constraints and the head
//! alignment of rotated power bases.
//!
//! Every rule strictly decreases [`measure`]: the number of power tokens,
//! then the token count through power bases.

use std::collections::BTreeSet;

use crate::int::{IntConstraint, IntTerm};
use crate::intsolver::{IntSolver, IntStore};
use crate::term::{StringEquation, StringTerm, Token};

/// Entailment oracle consulted by conditional rules.
pub trait Oracle {
    fn entails(&mut self, c: &IntConstraint) -> bool;
}

/// Oracle that never entails anything non-trivial.
pub struct NoOracle;

impl Oracle for NoOracle {
    fn entails(&mut self, c: &IntConstraint) -> bool {
        matches!(c.normalize(), crate::int::Normalized::True)
    }
}

pub struct StoreOracle<'a> {
    pub solver: &'a mut IntSolver,
    pub store: &'a IntStore,
}

impl Oracle for StoreOracle<'_> {
    fn entails(&mut self, c: &IntConstraint) -> bool {
        self.solver.entails(self.store, c)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RewriteOutcome {
    pub term: StringTerm,
    pub changed: bool,
    /// Side conditions of conditional rules that fired.
    pub used: Vec<IntConstraint>,
}

pub fn rewrite_term(u: &StringTerm, oracle: &mut dyn Oracle) -> RewriteOutcome {
    let mut used = Vec::new();
    let term = normalize(u, oracle, &mut used);
    debug_assert!(term == *u || measure(&term) < measure(u), "rewriting must decrease the measure");
    RewriteOutcome { changed: term != *u, term, used }
}

pub fn rewrite_equation(e: &StringEquation, oracle: &mut dyn Oracle) -> (StringEquation, Vec<IntConstraint>) {
    let l = rewrite_term(&e.lhs, oracle);
    let r = rewrite_term(&e.rhs, oracle);
    let mut used = l.used;
    used.extend(r.used);
    (StringEquation::new(l.term, r.term), used)
}

/// Classifies an integer constraint after normalization.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum IntRewrite {
    True,
    False,
    Constraint(IntConstraint),
}

pub fn rewrite_int_constraint(c: &IntConstraint) -> IntRewrite {
    match c.normalize() {
        crate::int::Normalized::True => IntRewrite::True,
        crate::int::Normalized::False => IntRewrite::False,
        crate::int::Normalized::Constraint(n) => IntRewrite::Constraint(n.to_constraint()),
    }
}

fn normalize(u: &StringTerm, oracle: &mut dyn Oracle, used: &mut Vec<IntConstraint>) -> StringTerm {
    let mut out: Vec<Token> = Vec::with_capacity(u.symbolic_length());
    for t in u.tokens() {
        match t {
            Token::Power(p) => {
                let base = normalize(&p.base, oracle, used);
                push_power(&mut out, base, p.exponent.clone(), oracle, used);
            }
            _ => push_plain(&mut out, t.clone()),
        }
    }
    StringTerm::new(out)
}

/// Pushes a non-power token, folding it into a preceding `w^m` when it
/// completes another copy of `w`.
fn push_plain(out: &mut Vec<Token>, t: Token) {
    out.push(t);
    absorb_trailing_copy(out);
}

/// `w^m w ⤳ w^{m+1}`: the last |w| tokens equal the base of the power just
/// before them.
fn absorb_trailing_copy(out: &mut Vec<Token>) {
    loop {
        let n = out.len();
        let mut done = true;
        for k in 1..n {
            let idx = n - 1 - k;
            if let Token::Power(p) = &out[idx] {
                if p.base.symbolic_length() == k && p.base.tokens() == &out[idx + 1..] {
                    let exp = &p.exponent + &IntTerm::constant(1);
                    let base = p.base.clone();
                    out.truncate(idx);
                    out.push(Token::ground_power(base, exp));
                    done = false;
                }
                break;
            }
            if !out[idx].is_ground() || k > MAX_FOLD {
                break;
            }
        }
        if done {
            return;
        }
        merge_last_powers(out);
    }
}

const MAX_FOLD: usize = 64;

/// Powers of character-only bases with a constant exponent are spelled out
/// up to this length.
const UNWIND_LIMIT: usize = 12;

/// Lexicographic termination measure: number of power tokens, then weight.
pub fn measure(u: &StringTerm) -> (usize, usize) {
    let mut powers = 0;
    u.visit(&mut |t| {
        if matches!(t, Token::Power(_)) {
            powers += 1;
        }
    });
    (powers, u.weight())
}

fn push_power(out: &mut Vec<Token>, base: StringTerm, exp: IntTerm, oracle: &mut dyn Oracle, used: &mut Vec<IntConstraint>) {
    if base.is_empty() {
        return;
    }
    // (v^{m1})^{m2} ⤳ v^{m1 m2}
    let (base, exp) = match base.tokens() {
        [Token::Power(inner)] => (inner.base.clone(), &inner.exponent * &exp),
        _ => (base, exp),
    };
    // Bases are kept primitive: (r^k)^m ⤳ r^{k m}.
    let (base, exp) = match primitive_root(base.tokens()) {
        Some((root, k)) => (StringTerm::new(root.to_vec()), exp.scale(k as i64)),
        None => (base, exp),
    };
    match exp.as_constant() {
        Some(k) if k <= 0 => return,
        Some(k) if base.tokens().iter().all(Token::is_char) && (k as usize).saturating_mul(base.weight()) <= UNWIND_LIMIT => {
            for _ in 0..k {
                for t in base.tokens() {
                    match t {
                        Token::Power(p) => push_power(out, p.base.clone(), p.exponent.clone(), oracle, used),
                        t => push_plain(out, t.clone()),
                    }
                }
            }
            return;
        }
        Some(_) => {}
        None => {
            let zero = IntConstraint::eq(exp.clone(), IntTerm::zero());
            if oracle.entails(&zero) {
                used.push(zero);
                return;
            }
            let one = IntConstraint::eq(exp.clone(), IntTerm::constant(1));
            if oracle.entails(&one) {
                used.push(one);
                for t in base.into_tokens() {
                    match t {
                        Token::Power(p) => push_power(out, p.base.clone(), p.exponent.clone(), oracle, used),
                        t => push_plain(out, t),
                    }
                }
                return;
            }
        }
    }
    // w w^m ⤳ w^{m+1}, possibly several copies.
    let mut exp = exp;
    let k = base.symbolic_length();
    while out.len() >= k && out[out.len() - k..] == *base.tokens() {
        out.truncate(out.len() - k);
        exp = &exp + &IntTerm::constant(1);
    }
    out.push(Token::ground_power(base, exp));
    merge_last_powers(out);
    absorb_trailing_copy(out);
}

/// v^{m1} v^{m2} ⤳ v^{m1+m2} on the last two tokens.
fn merge_last_powers(out: &mut Vec<Token>) {
    while out.len() >= 2 {
        let n = out.len();
        let (Token::Power(a), Token::Power(b)) = (&out[n - 2], &out[n - 1]) else {
            return;
        };
        if a.base != b.base {
            return;
        }
        let merged = Token::ground_power(a.base.clone(), &a.exponent + &b.exponent);
        out.truncate(n - 2);
        out.push(merged);
    }
}

/// `tokens = root^k` with `k >= 2` and `root` primitive.
pub fn primitive_root(tokens: &[Token]) -> Option<(&[Token], usize)> {
    let n = tokens.len();
    (1..n).filter(|p| n.is_multiple_of(*p)).find_map(|p| {
        let root = &tokens[..p];
        tokens.chunks(p).all(|c| c == root).then_some((root, n / p))
    })
}

/// Power lemma and length lemma constraints for a set of equations.
pub fn lemma_constraints(eqs: &[StringEquation]) -> Vec<IntConstraint> {
    let mut out = BTreeSet::new();
    for e in eqs {
        for side in [&e.lhs, &e.rhs] {
            side.visit(&mut |t| match t {
                Token::Power(p) => {
                    out.insert(IntConstraint::ge(p.exponent.clone(), IntTerm::zero()));
                }
                Token::Var(x) => {
                    out.insert(IntConstraint::ge(IntTerm::len(*x), IntTerm::zero()));
                }
                _ => {}
            });
        }
        out.insert(IntConstraint::eq(e.lhs.length(), e.rhs.length()));
    }
    out.into_iter().collect()
}

/// `w2 (w1 w2)^m v ⤳ (w2 w1)^m w2 v` when `w2 w1` equals `target`.
/// Returns the rewritten term if the rotation applies at the head.
pub fn rotate_head(u: &StringTerm, target: &StringTerm) -> Option<StringTerm> {
    let ts = u.tokens();
    let j = ts.iter().position(|t| !t.is_char())?;
    if j == 0 {
        return None;
    }
    let Token::Power(p) = &ts[j] else { return None };
    let c = p.base.tokens();
    if j > c.len() || c.len() != target.symbolic_length() {
        return None;
    }
    let w2 = &ts[..j];
    let (w1, tail) = c.split_at(c.len() - j);
    if tail != w2 {
        return None;
    }
    let mut rotated: Vec<Token> = w2.to_vec();
    rotated.extend_from_slice(w1);
    if rotated != target.tokens() {
        return None;
    }
    let mut out = vec![Token::ground_power(StringTerm::new(rotated), p.exponent.clone())];
    out.extend_from_slice(w2);
    out.extend_from_slice(&ts[j + 1..]);
    Some(StringTerm::new(out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::int::IntConstraint;
    use crate::notation::{parse_constraint, parse_equation, parse_term};
    use crate::term::Vocab;

    fn rw(v: &mut Vocab, s: &str) -> StringTerm {
        let t = parse_term(v, s).unwrap();
        rewrite_term(&t, &mut NoOracle).term
    }

    fn t(v: &mut Vocab, s: &str) -> StringTerm {
        parse_term(v, s).unwrap()
    }

    #[test]
    fn symbol_followed_by_its_power() {
        let mut v = Vocab::new();
        assert_eq!(rw(&mut v, "o o^{m1}"), t(&mut v, "o^{m1+1}"));
        assert_eq!(rw(&mut v, "o^{m1} o"), t(&mut v, "o^{m1+1}"));
    }

    #[test]
    fn nested_powers_flatten_and_merge() {
        let mut v = Vocab::new();
        assert_eq!(rw(&mut v, "b^{m3} (b^{m1})^{m2}"), t(&mut v, "b^{m1*m2+m3}"));
    }

    #[test]
    fn empty_base_and_trivial_exponents() {
        let mut v = Vocab::new();
        assert_eq!(rw(&mut v, "x (a^0)^m y"), t(&mut v, "x y"));
        assert_eq!(rw(&mut v, "(ab)^1 x"), t(&mut v, "a b x"));
        assert_eq!(rw(&mut v, "a^0"), StringTerm::empty());
        assert_eq!(rw(&mut v, "(ab)^2 x"), t(&mut v, "a b a b x"));
    }

    #[test]
    fn zero_exponent_by_entailment() {
        struct Zero;
        impl Oracle for Zero {
            fn entails(&mut self, c: &IntConstraint) -> bool {
                c.rhs.as_constant() == Some(0)
            }
        }
        let mut v = Vocab::new();
        let u = t(&mut v, "x a^m b");
        let out = rewrite_term(&u, &mut Zero);
        assert_eq!(out.term, t(&mut v, "x b"));
        assert!(out.changed);
        assert_eq!(out.used.len(), 1);
    }

    #[test]
    fn repeated_base_becomes_primitive() {
        let mut v = Vocab::new();
        assert_eq!(rw(&mut v, "(abab)^m"), t(&mut v, "(ab)^{2m}"));
        assert_eq!(rw(&mut v, "ab (ab)^m ab"), t(&mut v, "(ab)^{m+2}"));
    }

    #[test]
    fn idempotent() {
        let mut v = Vocab::new();
        for s in ["x (ab)^m a b y", "o o^{m1} x a a^n", "(b^{m1})^{m2} b"] {
            let once = rw(&mut v, s);
            let twice = rewrite_term(&once, &mut NoOracle);
            assert!(!twice.changed, "{s}");
        }
    }

    #[test]
    fn rotation_aligns_with_other_head() {
        let mut v = Vocab::new();
        let u = t(&mut v, "a (ba)^m x");
        let target = t(&mut v, "ab");
        assert_eq!(rotate_head(&u, &target), Some(t(&mut v, "(ab)^m a x")));
        assert_eq!(rotate_head(&u, &t(&mut v, "ba")), None);
    }

    #[test]
    fn lemma_constraints_of_two_equations() {
        let mut v = Vocab::new();
        let e = parse_equation(&mut v, "x3x3x4bx5b = x5x5x5x5x4bb").unwrap();
        let lemmas = lemma_constraints(&[e]);
        let store = IntStore::new().with(lemmas.iter()).unwrap();
        let want = parse_constraint(&mut v, "2|x3| = 3|x5|").unwrap();
        let want = match want.normalize() {
            crate::int::Normalized::Constraint(n) => n,
            _ => unreachable!(),
        };
        assert_eq!(store.constraints(), &[want]);
        assert!(lemma_constraints(&[]).is_empty());
        let e = parse_equation(&mut v, "a^m = x").unwrap();
        let lemmas = lemma_constraints(&[e]);
        let m = IntTerm::var(v.lookup_int("m").unwrap());
        assert!(lemmas.contains(&IntConstraint::ge(m, IntTerm::zero())));
    }

    #[test]
    fn int_constraint_classification() {
        let mut v = Vocab::new();
        assert_eq!(rewrite_int_constraint(&parse_constraint(&mut v, "0 <= 1").unwrap()), IntRewrite::True);
        assert_eq!(rewrite_int_constraint(&parse_constraint(&mut v, "1 <= 0").unwrap()), IntRewrite::False);
    }
}
