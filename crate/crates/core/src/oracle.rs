//! Bounded brute-force decision procedure used as ground truth in tests.

use std::collections::BTreeSet;

use crate::int::{Atom, IntTerm};
use crate::intsolver::IntStore;
use crate::subst::Model;
use crate::term::{IntVar, StrVar, StringEquation, SymChar, Token};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OracleResult {
    Sat(Model),
    UnsatWithinBounds,
}

impl OracleResult {
    pub fn is_sat(&self) -> bool {
        matches!(self, OracleResult::Sat(_))
    }
}

#[derive(Clone, Debug)]
pub struct Bounds {
    pub max_len: usize,
    pub alphabet: Vec<char>,
    /// Largest value tried for integer variables.
    pub max_int: i64,
}

impl Bounds {
    pub fn new(max_len: usize, alphabet: &[char]) -> Self {
        Bounds { max_len, alphabet: alphabet.to_vec(), max_int: max_len as i64 }
    }
}

/// First model of `eqs` with every variable of length at most `max_len`
/// over `alphabet`, in order of total length, then lexicographic.
pub fn brute_force(eqs: &[StringEquation], max_len: usize, alphabet: &[char]) -> OracleResult {
    match first_model(eqs, None, &Bounds::new(max_len, alphabet)) {
        Some(m) => OracleResult::Sat(m),
        None => OracleResult::UnsatWithinBounds,
    }
}

pub fn first_model(eqs: &[StringEquation], store: Option<&IntStore>, bounds: &Bounds) -> Option<Model> {
    let mut found = None;
    enumerate(eqs, store, bounds, &mut |m| {
        found = Some(m.clone());
        false
    });
    found
}

/// Every model within bounds, in enumeration order.
pub fn all_models(eqs: &[StringEquation], store: Option<&IntStore>, bounds: &Bounds) -> Vec<Model> {
    let mut out = Vec::new();
    enumerate(eqs, store, bounds, &mut |m| {
        out.push(m.clone());
        true
    });
    out
}

struct Unknowns {
    vars: Vec<StrVar>,
    syms: Vec<SymChar>,
    ints: Vec<IntVar>,
}

fn unknowns(eqs: &[StringEquation], store: Option<&IntStore>) -> Unknowns {
    let mut vars = BTreeSet::new();
    let mut syms = BTreeSet::new();
    let mut ints = BTreeSet::new();
    let atom = |a: Atom, vars: &mut BTreeSet<StrVar>, ints: &mut BTreeSet<IntVar>| match a {
        Atom::Int(m) => {
            ints.insert(m);
        }
        Atom::Len(x) => {
            vars.insert(x);
        }
    };
    for e in eqs {
        for side in [&e.lhs, &e.rhs] {
            side.visit(&mut |t| match t {
                Token::Var(x) => {
                    vars.insert(*x);
                }
                Token::Sym(o) => {
                    syms.insert(*o);
                }
                _ => {}
            });
            for a in side.int_atoms() {
                atom(a, &mut vars, &mut ints);
            }
        }
    }
    if let Some(s) = store {
        for a in s.atoms() {
            atom(a, &mut vars, &mut ints);
        }
    }
    Unknowns { vars: vars.into_iter().collect(), syms: syms.into_iter().collect(), ints: ints.into_iter().collect() }
}

/// Calls `f` on each model until it returns false.
pub fn enumerate(eqs: &[StringEquation], store: Option<&IntStore>, bounds: &Bounds, f: &mut dyn FnMut(&Model) -> bool) {
    let u = unknowns(eqs, store);
    let default = bounds.alphabet.first().copied().unwrap_or('a');
    let length_checks: Vec<IntTerm> = eqs
        .iter()
        .map(|e| &e.lhs.length() - &e.rhs.length())
        .filter(|d| d.atoms().all(|a| matches!(a, Atom::Len(_))))
        .collect();
    let nv = u.vars.len();
    let mut lens = vec![0usize; nv];
    for total in 0..=nv * bounds.max_len {
        let mut cont = true;
        compositions(&mut lens, 0, total, bounds.max_len, &mut |lens| {
            let len_of = |a: Atom| match a {
                Atom::Len(x) => u.vars.binary_search(&x).map_or(0, |i| lens[i] as i64),
                Atom::Int(_) => 0,
            };
            if length_checks.iter().any(|d| d.eval(&len_of) != 0) {
                return true;
            }
            cont = strings(&u, lens, bounds, &mut |m| {
                if m.satisfies_all(eqs, default) && store.is_none_or(|s| s.holds(&|a| m.int_value(a))) {
                    f(m)
                } else {
                    true
                }
            });
            cont
        });
        if !cont {
            return;
        }
    }
}

/// Length vectors with the given sum, each entry at most `cap`, in
/// lexicographic order.
fn compositions(lens: &mut Vec<usize>, i: usize, rest: usize, cap: usize, f: &mut dyn FnMut(&[usize]) -> bool) -> bool {
    if i == lens.len() {
        return rest > 0 || f(lens);
    }
    if (lens.len() - i) * cap < rest {
        return true;
    }
    for l in 0..=cap.min(rest) {
        lens[i] = l;
        if !compositions(lens, i + 1, rest - l, cap, f) {
            return false;
        }
    }
    true
}

fn strings(u: &Unknowns, lens: &[usize], bounds: &Bounds, f: &mut dyn FnMut(&Model) -> bool) -> bool {
    let k = bounds.alphabet.len();
    if k == 0 && lens.iter().any(|&l| l > 0) {
        return true;
    }
    let positions: usize = lens.iter().sum::<usize>() + u.syms.len();
    let int_range = (bounds.max_int + 1) as usize;
    let mut digits = vec![0usize; positions];
    let mut int_digits = vec![0usize; u.ints.len()];
    let mut model = Model::new();
    loop {
        let mut p = 0;
        for (x, &l) in u.vars.iter().zip(lens) {
            let s: String = digits[p..p + l].iter().map(|&d| bounds.alphabet[d]).collect();
            model.strings.insert(*x, s);
            p += l;
        }
        for o in &u.syms {
            model.chars.insert(*o, bounds.alphabet[digits[p]]);
            p += 1;
        }
        loop {
            for (m, &d) in u.ints.iter().zip(&int_digits) {
                model.ints.insert(*m, d as i64);
            }
            if !f(&model) {
                return false;
            }
            if !odometer(&mut int_digits, int_range) {
                break;
            }
        }
        if !odometer(&mut digits, k) {
            return true;
        }
    }
}

/// Advances the last digit first. False once every combination is seen.
fn odometer(digits: &mut [usize], base: usize) -> bool {
    for d in digits.iter_mut().rev() {
        *d += 1;
        if *d < base {
            return true;
        }
        *d = 0;
    }
    false
}

/// Start positions (overlapping) of `w` in `s`.
pub fn count_occurrences(w: &[char], s: &[char]) -> usize {
    if w.is_empty() || w.len() > s.len() {
        return 0;
    }
    let n = s.windows(w.len()).filter(|win| *win == w).count();
    debug_assert!(!crate::parikh::is_unbordered(w) || n == non_overlapping(w, s));
    n
}

fn non_overlapping(w: &[char], s: &[char]) -> usize {
    let (mut i, mut n) = (0, 0);
    while i + w.len() <= s.len() {
        if &s[i..i + w.len()] == w {
            n += 1;
            i += w.len();
        } else {
            i += 1;
        }
    }
    n
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::notation::{parse_constraint, parse_equation};
    use crate::term::Vocab;

    #[test]
    fn square_instance_sat() {
        let mut v = Vocab::new();
        let e = parse_equation(&mut v, "xx = yb").unwrap();
        let OracleResult::Sat(m) = brute_force(std::slice::from_ref(&e), 2, &['a', 'b']) else { panic!() };
        assert!(m.satisfies(&e, 'a'));
        assert_eq!(m.strings[&v.lookup_var("x").unwrap()], "b");
        assert_eq!(m.strings[&v.lookup_var("y").unwrap()], "b");
    }

    #[test]
    fn parikh_instance_unsat_within_bounds() {
        let mut v = Vocab::new();
        let e = parse_equation(&mut v, "xay = ybx").unwrap();
        assert_eq!(brute_force(&[e], 3, &['a', 'b']), OracleResult::UnsatWithinBounds);
    }

    #[test]
    fn trivial_equation_empty_model() {
        let mut v = Vocab::new();
        let e = parse_equation(&mut v, "x = x").unwrap();
        let OracleResult::Sat(m) = brute_force(&[e], 2, &['a']) else { panic!() };
        assert_eq!(m.strings.values().next().unwrap(), "");
    }

    #[test]
    fn powers_and_store() {
        let mut v = Vocab::new();
        let e = parse_equation(&mut v, "(ab)^m x = abab").unwrap();
        let c = parse_constraint(&mut v, "m >= 1").unwrap();
        let s = IntStore::new().with([&c]).unwrap();
        let ms = all_models(&[e], Some(&s), &Bounds::new(4, &['a', 'b']));
        assert_eq!(ms.len(), 2);
    }

    #[test]
    fn occurrences() {
        let ab: Vec<char> = "ab".chars().collect();
        assert_eq!(count_occurrences(&ab, &"abababab".chars().collect::<Vec<_>>()), 4);
        assert_eq!(count_occurrences(&ab, &[]), 0);
        let aa: Vec<char> = "aa".chars().collect();
        assert_eq!(count_occurrences(&aa, &['a', 'a', 'a']), 2);
    }
}
