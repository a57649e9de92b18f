//! Ground power introduction.

use std::collections::VecDeque;

use crate::int::{IntConstraint, IntTerm};
use crate::intsolver::{IntSolver, IntStore};
use crate::rules::{Branch, Orientation};
use crate::subst::Binding;
use crate::term::{StrVar, StringEquation, StringTerm, Token, Vocab};

/// A strict prefix of a ground term with the side conditions that make it
/// strict.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrefixCase {
    pub prefix: StringTerm,
    pub side: Vec<IntConstraint>,
}

pub fn sdec(w: &StringTerm, vocab: &mut Vocab) -> Vec<PrefixCase> {
    sdec_tokens(w.tokens(), vocab)
}

fn sdec_tokens(ts: &[Token], vocab: &mut Vocab) -> Vec<PrefixCase> {
    let Some((head, rest)) = ts.split_first() else {
        return Vec::new();
    };
    let mut out = sdec_token(head, vocab);
    for PrefixCase { prefix, side } in sdec_tokens(rest, vocab) {
        let mut p = vec![head.clone()];
        p.extend(prefix.into_tokens());
        out.push(PrefixCase { prefix: StringTerm::new(p), side });
    }
    out
}

fn sdec_token(t: &Token, vocab: &mut Vocab) -> Vec<PrefixCase> {
    match t {
        Token::Char(_) | Token::Sym(_) => vec![PrefixCase { prefix: StringTerm::empty(), side: Vec::new() }],
        Token::Power(p) => {
            let inner = sdec(&p.base, vocab);
            if inner.is_empty() {
                return inner;
            }
            let m = IntTerm::var(vocab.fresh_int());
            let bounds = [IntConstraint::ge(m.clone(), IntTerm::zero()), IntConstraint::lt(m.clone(), p.exponent.clone())];
            inner
                .into_iter()
                .map(|PrefixCase { prefix, side }| {
                    let mut tokens = vec![Token::ground_power(p.base.clone(), m.clone())];
                    tokens.extend(prefix.into_tokens());
                    let mut s = bounds.to_vec();
                    s.extend(side);
                    PrefixCase { prefix: StringTerm::new(tokens), side: s }
                })
                .collect()
        }
        Token::Var(_) => unreachable!("power bases and prefixes are ground"),
    }
}

/// Whether a ground term may concretize to ε: every character sits inside
/// a power.
pub fn can_be_empty(w: &StringTerm) -> bool {
    w.tokens().iter().all(|t| matches!(t, Token::Power(_)))
}

/// One link `w x_{i-1} u_i ≃ x_i v_i` of a chain, in the link's frame.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Link {
    pub eq_index: usize,
    pub orientation: Orientation,
    pub w: StringTerm,
    pub from: StrVar,
    pub to: StrVar,
}

/// Links closing a cycle `x_k → x_1 → … → x_k`. All links share the
/// direction (prefix or suffix) of their orientation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CyclicChain {
    pub links: Vec<Link>,
    pub reversed: bool,
}

pub const MAX_CHAIN: usize = 4;

/// Link shape of one orientation: `l = w x ...` with `w` ground and
/// non-empty, `r = y ...`.
fn link_of(l: &StringTerm, r: &StringTerm) -> Option<(StringTerm, StrVar, StrVar)> {
    let Some(Token::Var(to)) = r.first() else { return None };
    let ts = l.tokens();
    let k = ts.iter().position(|t| !t.is_ground())?;
    if k == 0 {
        return None;
    }
    let Token::Var(from) = ts[k] else { return None };
    Some((StringTerm::new(ts[..k].to_vec()), from, *to))
}

pub fn links(eqs: &[StringEquation]) -> Vec<Link> {
    let mut out = Vec::new();
    for (i, e) in eqs.iter().enumerate() {
        for o in Orientation::ALL {
            let f = o.apply(e);
            if let Some((w, from, to)) = link_of(&f.lhs, &f.rhs) {
                out.push(Link { eq_index: i, orientation: o, w, from, to });
            }
        }
    }
    out
}

/// Shortest cycle of links with a common direction, at most [`MAX_CHAIN`]
/// long. Ties go to the cycle found from the earliest link.
pub fn detect_chain(eqs: &[StringEquation]) -> Option<CyclicChain> {
    detect_chain_from(&links(eqs))
}

fn detect_chain_from(all: &[Link]) -> Option<CyclicChain> {
    let mut best: Option<CyclicChain> = None;
    for reversed in [false, true] {
        let ls: Vec<&Link> = all.iter().filter(|l| l.orientation.is_reversed() == reversed).collect();
        for (si, start) in ls.iter().enumerate() {
            // BFS over link indices from `start` back to `start.from`.
            let mut prev: Vec<Option<usize>> = vec![None; ls.len()];
            let mut depth = vec![usize::MAX; ls.len()];
            depth[si] = 1;
            let mut queue = VecDeque::from([si]);
            let mut found = None;
            while let Some(cur) = queue.pop_front() {
                if ls[cur].to == start.from {
                    found = Some(cur);
                    break;
                }
                if depth[cur] >= MAX_CHAIN {
                    continue;
                }
                for (ni, n) in ls.iter().enumerate() {
                    if depth[ni] == usize::MAX && n.from == ls[cur].to && n.eq_index != start.eq_index {
                        depth[ni] = depth[cur] + 1;
                        prev[ni] = Some(cur);
                        queue.push_back(ni);
                    }
                }
            }
            let Some(end) = found else { continue };
            let mut path = vec![end];
            while let Some(p) = prev[*path.last().expect("non-empty")] {
                path.push(p);
            }
            path.reverse();
            let mut seen_eqs: Vec<usize> = path.iter().map(|&i| ls[i].eq_index).collect();
            seen_eqs.sort_unstable();
            seen_eqs.dedup();
            if seen_eqs.len() != path.len() {
                continue;
            }
            if best.as_ref().is_none_or(|b| path.len() < b.links.len()) {
                best = Some(CyclicChain { links: path.iter().map(|&i| ls[i].clone()).collect(), reversed });
            }
            if path.len() == 1 {
                return best;
            }
        }
    }
    best
}

/// `w̄_i = w_i w_{i-1} … w_1 w_k … w_{i+1}` for 0-based `i`.
pub fn wbar(chain: &CyclicChain, i: usize) -> StringTerm {
    let k = chain.links.len();
    let mut tokens = Vec::new();
    for step in 0..k {
        let j = (i + k - step) % k;
        tokens.extend(chain.links[j].w.tokens().iter().cloned());
    }
    StringTerm::new(tokens)
}

/// Branches of the introduction: `x_i / w̄_i^m p` with `s` per prefix case,
/// one shared fresh `m`, plus `w̄_1 ≃ ε` when that is possible. Branches
/// whose side conditions contradict `store` are dropped.
pub fn introduce(chain: &CyclicChain, store: &IntStore, solver: &mut IntSolver, vocab: &mut Vocab) -> Vec<Branch> {
    let m = IntTerm::var(vocab.fresh_int());
    let mut out = Vec::new();
    for (i, link) in chain.links.iter().enumerate() {
        let wb = wbar(chain, i);
        let power = Token::ground_power(wb.clone(), m.clone());
        for PrefixCase { prefix, side } in sdec(&wb, vocab) {
            let mut tokens = vec![power.clone()];
            tokens.extend(prefix.into_tokens());
            let mut image = StringTerm::new(tokens);
            if chain.reversed {
                image = image.reverse();
            }
            if let Some(s) = store.with(side.iter()) {
                if solver.infeasible(&s, None) {
                    continue;
                }
            } else {
                continue;
            }
            out.push(Branch { bindings: vec![Binding::Str(link.to, image)], constraints: side, equations: Vec::new() });
        }
    }
    let w1 = wbar(chain, 0);
    if can_be_empty(&w1) {
        let w1 = if chain.reversed { w1.reverse() } else { w1 };
        out.push(Branch { bindings: Vec::new(), constraints: Vec::new(), equations: vec![StringEquation::new(w1, StringTerm::empty())] });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::intsolver::IntSolverConfig;
    use crate::notation::{parse_equation, parse_term};

    fn show(v: &Vocab, cases: &[PrefixCase]) -> Vec<String> {
        cases.iter().map(|c| c.prefix.display(v).to_string()).collect()
    }

    #[test]
    fn sdec_units() {
        let mut v = Vocab::new();
        let o = parse_term(&mut v, "o").unwrap();
        let got = sdec(&o, &mut v);
        assert_eq!(got, vec![PrefixCase { prefix: StringTerm::empty(), side: vec![] }]);
        assert!(sdec(&StringTerm::empty(), &mut v).is_empty());
        let ab = parse_term(&mut v, "ab").unwrap();
        let got = sdec(&ab, &mut v);
        assert_eq!(show(&v, &got), vec!["ε", "a"]);
        let p = parse_term(&mut v, "(ab)^m").unwrap();
        let got = sdec(&p, &mut v);
        assert_eq!(got.len(), 2);
        assert!(got.iter().all(|c| c.side.len() == 2));
        assert_eq!(got[0].prefix.symbolic_length(), 1);
        assert_eq!(got[1].prefix.symbolic_length(), 2);
    }

    #[test]
    fn self_loop_detected() {
        let mut v = Vocab::new();
        let e = parse_equation(&mut v, "x3 b a x5 x3 x4 x3 = o x3 x4 x4 a x4").unwrap();
        let c = detect_chain(&[e]).unwrap();
        assert_eq!(c.links.len(), 1);
        assert_eq!(c.links[0].w.display(&v).to_string(), "o");
    }

    #[test]
    fn unsat_single_loop_branch() {
        let mut v = Vocab::new();
        let e = parse_equation(&mut v, "xbxa = axbx").unwrap();
        let c = detect_chain(&[e]).unwrap();
        let mut s = IntSolver::new(IntSolverConfig::default());
        let bs = introduce(&c, &IntStore::new(), &mut s, &mut v);
        assert_eq!(bs.len(), 1);
        let Binding::Str(_, img) = &bs[0].bindings[0] else { panic!() };
        assert!(matches!(img.tokens(), [Token::Power(_)]));
    }

    #[test]
    fn two_link_chain_with_powers() {
        let mut v = Vocab::new();
        let e1 = parse_equation(&mut v, "b^{2m1} x4 b x5 = x5 x5 x5 x5 x4 b").unwrap();
        let e4 = parse_equation(&mut v, "a x5 b^{m1} x4 b^{m1} = x4 x4 a x4").unwrap();
        let all: Vec<Link> = links(&[e1, e4]).into_iter().filter(|l| !l.orientation.is_reversed()).collect();
        let c = detect_chain_from(&all).unwrap();
        assert_eq!(c.links.len(), 2);
        let mut s = IntSolver::new(IntSolverConfig::default());
        let bs = introduce(&c, &IntStore::new(), &mut s, &mut v);
        assert_eq!(bs.len(), 4);
        let shown: Vec<String> = bs
            .iter()
            .map(|b| {
                let Binding::Str(x, img) = &b.bindings[0] else { panic!() };
                format!("{}/{}", v.var_name(*x), img.display(&v))
            })
            .collect();
        assert!(shown.iter().any(|s| s.starts_with("x4/(ab^{2m1})^") && !s.contains(" a")));
        assert!(shown.iter().any(|s| s.starts_with("x5/(b^{2m1}a)^") && s.ends_with("b^{2m1}")));
        assert_eq!(shown.iter().filter(|s| s.starts_with("x4")).count(), 2);
    }

    #[test]
    fn empty_disjunct_only_for_power_words() {
        let mut v = Vocab::new();
        let e = parse_equation(&mut v, "b^{m1} x4 b^{m1} x5 a = x4 a x4 x4").unwrap();
        let c = detect_chain(&[e]).unwrap();
        let mut s = IntSolver::new(IntSolverConfig::default());
        let bs = introduce(&c, &IntStore::new(), &mut s, &mut v);
        assert_eq!(bs.len(), 2);
        assert_eq!(bs[1].equations.len(), 1);
    }
}
