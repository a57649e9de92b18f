//! Equality decomposition at boundaries with a known length difference.

use crate::int::{IntConstraint, IntTerm};
use crate::intsolver::{IntModel, IntSolver, IntStore};
use crate::term::{StringEquation, StringTerm, Token, Vocab};

/// Largest padding introduced by one split.
pub const MAX_PAD: i64 = 16;

/// Boundary `i` on the lhs and `j` on the rhs with `|lhs[..i]| - |rhs[..j]|
/// = d` entailed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Split {
    pub i: usize,
    pub j: usize,
    pub d: i64,
}

fn has_var_or_power(ts: &[Token]) -> bool {
    ts.iter().any(|t| matches!(t, Token::Var(_) | Token::Power(_)))
}

fn eval(t: &IntTerm, m: &IntModel) -> i128 {
    t.eval(&|a| m.get(&a).copied().unwrap_or(0))
}

/// Two models of the store used to discard non-constant differences before
/// asking for entailment.
pub struct Probes {
    models: Vec<IntModel>,
}

impl Probes {
    pub fn new(store: &IntStore, solver: &mut IntSolver) -> Option<Probes> {
        let m1 = solver.relaxed_model(store)?;
        let mut models = vec![m1];
        if let Some(m2) = solver.diverse_model(store, &models[0]) {
            models.push(m2);
        }
        Some(Probes { models })
    }

    /// The common value of `t` under all probe models.
    pub fn agreed(&self, t: &IntTerm) -> Option<i64> {
        let v = eval(t, &self.models[0]);
        self.models.iter().all(|m| eval(t, m) == v).then_some(v as i64)
    }
}

pub fn find_split(eq: &StringEquation, store: &IntStore, solver: &mut IntSolver, probes: &Probes) -> Option<Split> {
    let (l, r) = (eq.lhs.tokens(), eq.rhs.tokens());
    let (nl, nr) = (l.len(), r.len());
    let mut prefix_l = vec![IntTerm::zero()];
    for t in l {
        let last = prefix_l.last().expect("non-empty").clone();
        prefix_l.push(&last + &t.length());
    }
    let mut prefix_r = vec![IntTerm::zero()];
    for t in r {
        let last = prefix_r.last().expect("non-empty").clone();
        prefix_r.push(&last + &t.length());
    }
    let mut cands: Vec<(bool, usize, usize, i64)> = Vec::new();
    for i in 0..=nl {
        for j in 0..=nr {
            if (i == 0 && j == 0) || (i == nl && j == nr) {
                continue;
            }
            let diff = &prefix_l[i] - &prefix_r[j];
            let d0 = eval(&diff, &probes.models[0]);
            if probes.models.iter().any(|m| eval(&diff, m) != d0) || d0.abs() > MAX_PAD as i128 {
                continue;
            }
            let d = d0 as i64;
            if !eligible(l, r, i, j, d) {
                continue;
            }
            cands.push((d != 0, i, j, d));
        }
    }
    cands.sort();
    for (_, i, j, d) in cands {
        let diff = &prefix_l[i] - &prefix_r[j];
        if solver.entails(store, &IntConstraint::eq(diff, IntTerm::constant(d))) {
            return Some(Split { i, j, d });
        }
    }
    None
}

fn eligible(l: &[Token], r: &[Token], i: usize, j: usize, d: i64) -> bool {
    let (u1, u2, v1, v2) = (&l[..i], &l[i..], &r[..j], &r[j..]);
    if d == 0 {
        return [u1, u2, v1, v2].iter().all(|p| has_var_or_power(p));
    }
    // Orient so that the first part of `a` is the longer one.
    let (a1, a2, b1, b2) = if d > 0 { (u1, u2, v1, v2) } else { (v1, v2, u1, u2) };
    let d = d.unsigned_abs() as usize;
    let total = l.len() + r.len();
    !a1.is_empty() && !b2.is_empty() && a1.len() + b1.len() + d < total && a2.len() + b2.len() + d < total
}

/// `{u1 ≃ v1 ō, ō u2 ≃ v2}` for `d > 0`; sides are swapped first when
/// `d < 0` and swapped back in the result.
pub fn decompose(eq: &StringEquation, split: Split, vocab: &mut Vocab) -> Vec<StringEquation> {
    let (l, r) = (eq.lhs.tokens(), eq.rhs.tokens());
    let t = |s: &[Token]| StringTerm::new(s.to_vec());
    let (u1, u2, v1, v2) = (t(&l[..split.i]), t(&l[split.i..]), t(&r[..split.j]), t(&r[split.j..]));
    if split.d == 0 {
        return vec![StringEquation::new(u1, v1), StringEquation::new(u2, v2)];
    }
    let pad: StringTerm = (0..split.d.unsigned_abs()).map(|_| Token::Sym(vocab.fresh_sym())).collect();
    if split.d > 0 {
        vec![StringEquation::new(u1, v1.concat(&pad)), StringEquation::new(pad.concat(&u2), v2)]
    } else {
        vec![StringEquation::new(u1.concat(&pad), v1), StringEquation::new(u2, pad.concat(&v2))]
    }
}
