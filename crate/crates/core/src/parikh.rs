//! Occurrence counting of unbordered patterns as an unsatisfiability filter.
//!
//! A side of an equation is abstracted into characters and opaque atoms
//! (variables, symbolic characters and power tokens). The exact rules split
//! it into pieces across which no occurrence of the pattern can cross. A
//! piece that still admits crossing occurrences is kept as a *residue*,
//! which concretizes identically wherever it occurs, so residues shared by
//! both sides cancel before the min/max approximations are applied.

use std::collections::{BTreeMap, BTreeSet};

use crate::term::{StringEquation, StringTerm, Token};

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Item {
    Char(char),
    Atom(Token),
}

/// `constant + Σ coeffs[t] · P̂(t)`.
#[derive(Clone, Default, PartialEq, Eq, Debug)]
pub struct ParikhSum {
    pub constant: i64,
    pub coeffs: BTreeMap<Token, i64>,
}

impl ParikhSum {
    fn add_atom(&mut self, t: &Token, c: i64) {
        let e = self.coeffs.entry(t.clone()).or_insert(0);
        *e += c;
        if *e == 0 {
            self.coeffs.remove(t);
        }
    }

    fn add(&mut self, other: &ParikhSum, scale: i64) {
        self.constant += scale * other.constant;
        for (t, c) in &other.coeffs {
            self.add_atom(t, scale * c);
        }
    }

    /// Evaluates with `f(t)` the occurrence count inside atom `t`.
    pub fn eval(&self, f: &impl Fn(&Token) -> i64) -> i64 {
        self.constant + self.coeffs.iter().map(|(t, c)| c * f(t)).sum::<i64>()
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Mode {
    Min,
    Max,
}

pub fn is_unbordered(w: &[char]) -> bool {
    (1..w.len()).all(|k| w[..k] != w[w.len() - k..])
}

pub fn count_occurrences(w: &[char], s: &[char]) -> usize {
    if w.is_empty() || w.len() > s.len() {
        return 0;
    }
    s.windows(w.len()).filter(|win| *win == w).count()
}

pub fn abstract_term(u: &StringTerm) -> Vec<Item> {
    u.tokens()
        .iter()
        .map(|t| match t {
            Token::Char(c) => Item::Char(*c),
            t => Item::Atom(t.clone()),
        })
        .collect()
}

fn is_factor(v: &[char], w: &[char]) -> bool {
    v.is_empty() || w.windows(v.len()).any(|win| win == v)
}

fn is_proper_prefix(v: &[char], w: &[char]) -> bool {
    v.len() < w.len() && w.starts_with(v)
}

fn is_proper_suffix(v: &[char], w: &[char]) -> bool {
    v.len() < w.len() && w.ends_with(v)
}

/// Gap test with the character segment shorter than `d`: `x v y`
/// (`v` possibly empty), `x v` or `v y` (`v` non-empty). Symbolic
/// characters and powers count as variables.
pub fn is_gap(u: &StringTerm, d: usize) -> bool {
    let items = abstract_term(u);
    let atoms: Vec<usize> = items.iter().enumerate().filter(|(_, i)| matches!(i, Item::Atom(_))).map(|(k, _)| k).collect();
    let n = items.len();
    match atoms.as_slice() {
        [a, b] => *a == 0 && *b == n - 1 && n - 2 < d,
        [a] => n >= 2 && (*a == 0 || *a == n - 1) && n - 1 < d,
        _ => false,
    }
}

/// `w ⋈ u`: whether an occurrence of `w` can cross the gap `u`.
pub fn crossing(w: &[char], u: &StringTerm) -> bool {
    let items = abstract_term(u);
    let chars: Vec<char> = items
        .iter()
        .filter_map(|i| match i {
            Item::Char(c) => Some(*c),
            _ => None,
        })
        .collect();
    let first_atom = matches!(items.first(), Some(Item::Atom(_)));
    let last_atom = matches!(items.last(), Some(Item::Atom(_)));
    match (first_atom, last_atom) {
        (true, true) => chars.len() < w.len() && is_factor(&chars, w),
        (false, true) => is_proper_prefix(&chars, w) && !chars.is_empty(),
        (true, false) => is_proper_suffix(&chars, w) && !chars.is_empty(),
        (false, false) => false,
    }
}

/// Exact decomposition of one side: constant, single-atom counts and
/// residue pieces.
#[derive(Clone, Default, Debug, PartialEq, Eq)]
pub struct Exact {
    pub sum: ParikhSum,
    pub residues: BTreeMap<Vec<Item>, i64>,
}

impl Exact {
    fn add_residue(&mut self, piece: Vec<Item>, c: i64) {
        let e = self.residues.entry(piece.clone()).or_insert(0);
        *e += c;
        if *e == 0 {
            self.residues.remove(&piece);
        }
    }

    fn sub(&mut self, other: &Exact) {
        self.sum.add(&other.sum, -1);
        for (p, c) in &other.residues {
            self.add_residue(p.clone(), -c);
        }
    }
}

/// Applies the exact rules for pattern `w` (unbordered, length >= 2).
pub fn exact(w: &[char], items: &[Item]) -> Exact {
    let mut acc = Exact::default();
    let mut piece: Vec<Item> = Vec::new();
    // Explicit occurrences inside character runs.
    let mut i = 0;
    while i < items.len() {
        let hit = items.len() - i >= w.len()
            && items[i..i + w.len()]
                .iter()
                .zip(w)
                .all(|(it, c)| matches!(it, Item::Char(d) if d == c));
        if hit {
            acc.sum.constant += 1;
            reduce_piece(w, std::mem::take(&mut piece), &mut acc);
            i += w.len();
        } else {
            piece.push(items[i].clone());
            i += 1;
        }
    }
    reduce_piece(w, piece, &mut acc);
    acc
}

/// Splits at long character windows and non-crossing gaps, then trims the
/// boundary characters that cannot take part in a crossing occurrence.
fn reduce_piece(w: &[char], piece: Vec<Item>, acc: &mut Exact) {
    // Runs and atoms: r0 A1 r1 ... An rn.
    let mut runs: Vec<Vec<char>> = vec![Vec::new()];
    let mut atoms: Vec<Token> = Vec::new();
    for it in piece {
        match it {
            Item::Char(c) => runs.last_mut().expect("non-empty").push(c),
            Item::Atom(t) => {
                atoms.push(t);
                runs.push(Vec::new());
            }
        }
    }
    let k = w.len();
    // Cut positions: an inner run is a cut if it is long or non-crossing.
    let mut start = 0;
    for i in 0..=atoms.len() {
        let r = &runs[i];
        let inner = i > 0 && i < atoms.len();
        if inner && (r.len() >= k || !is_factor(r, w)) {
            // left piece: runs[start..=i] with runs[i] truncated
            let left_tail: Vec<char> = if r.len() >= k { r[..k - 1].to_vec() } else { r.clone() };
            let right_head: Vec<char> = if r.len() >= k { r[r.len() - (k - 1)..].to_vec() } else { r.clone() };
            emit(w, &runs[start..i], &atoms[start..i], Some(&left_tail), acc);
            runs[i] = right_head;
            start = i;
        }
    }
    emit(w, &runs[start..], &atoms[start..], None, acc);
}

/// Emits the sub-piece `runs[0] atoms[0] runs[1] ... atoms[n-1] tail`
/// where `tail` replaces the run after the last atom when given.
fn emit(w: &[char], runs: &[Vec<char>], atoms: &[Token], tail: Option<&Vec<char>>, acc: &mut Exact) {
    let n = atoms.len();
    let mut lead: &[char] = &runs[0];
    let trail_full: &[char] = match tail {
        Some(t) => t,
        None => &runs[n],
    };
    if n == 0 {
        // Ground piece without explicit occurrences: only long runs could
        // hold one, and those were split off already.
        let g: &[char] = if tail.is_some() { trail_full } else { lead };
        acc.sum.constant += count_occurrences(w, g) as i64;
        return;
    }
    // Leading characters that cannot start a crossing occurrence.
    if lead.len() >= w.len() {
        lead = &lead[lead.len() - (w.len() - 1)..];
    }
    while !lead.is_empty() && !is_proper_prefix(lead, w) {
        lead = &lead[1..];
    }
    let mut trail: &[char] = trail_full;
    if trail.len() >= w.len() {
        trail = &trail[..w.len() - 1];
    }
    while !trail.is_empty() && !is_proper_suffix(trail, w) {
        trail = &trail[..trail.len() - 1];
    }
    if n == 1 && lead.is_empty() && trail.is_empty() {
        acc.sum.add_atom(&atoms[0], 1);
        return;
    }
    let mut piece = Vec::new();
    piece.extend(lead.iter().map(|c| Item::Char(*c)));
    for (j, a) in atoms.iter().enumerate() {
        piece.push(Item::Atom(a.clone()));
        let r: &[char] = if j + 1 == n { trail } else { &runs[j + 1] };
        piece.extend(r.iter().map(|c| Item::Char(*c)));
    }
    acc.add_residue(piece, 1);
}

/// Upper bound on occurrences starting in an atom's tail or in the run `v`
/// between two atoms.
fn gap_cap(w: &[char], v: &[char]) -> i64 {
    for j in 1..=v.len() {
        if !is_proper_suffix(&v[..j], w) {
            continue;
        }
        for jj in j..v.len() {
            if is_proper_prefix(&v[jj..], w) {
                return 2;
            }
        }
    }
    1
}

/// Min and max sums of a residue piece.
pub fn residue_bounds(w: &[char], piece: &[Item]) -> (ParikhSum, ParikhSum) {
    let mut min = ParikhSum::default();
    let mut runs: Vec<Vec<char>> = vec![Vec::new()];
    for it in piece {
        match it {
            Item::Char(c) => runs.last_mut().expect("non-empty").push(*c),
            Item::Atom(t) => {
                min.add_atom(t, 1);
                runs.push(Vec::new());
            }
        }
    }
    let mut max = min.clone();
    let n = runs.len() - 1;
    if !runs[0].is_empty() {
        max.constant += 1;
    }
    for r in &runs[1..n] {
        max.constant += gap_cap(w, r);
    }
    if n >= 1 && !runs[n].is_empty() {
        max.constant += 1;
    }
    (min, max)
}

fn single_char_sum(a: char, items: &[Item]) -> ParikhSum {
    let mut s = ParikhSum::default();
    for it in items {
        match it {
            Item::Char(c) if *c == a => s.constant += 1,
            Item::Char(_) => {}
            Item::Atom(t) => s.add_atom(t, 1),
        }
    }
    s
}

/// Min/max Parikh sum of `u` for pattern `w`. `None` for patterns that are
/// bordered or shorter than two characters.
pub fn parikh_rewrite(mode: Mode, w: &[char], u: &StringTerm) -> Option<ParikhSum> {
    if w.len() < 2 || !is_unbordered(w) {
        return None;
    }
    let ex = exact(w, &abstract_term(u));
    let mut out = ex.sum.clone();
    for (piece, c) in &ex.residues {
        let (lo, hi) = residue_bounds(w, piece);
        out.add(if mode == Mode::Max { &hi } else { &lo }, *c);
    }
    Some(out)
}

/// Maximal unbordered factors of the character runs of each side.
pub fn enumerate_patterns(eq: &StringEquation, max_len: usize) -> BTreeSet<Vec<char>> {
    let mut out = BTreeSet::new();
    for side in [&eq.lhs, &eq.rhs] {
        for run in char_runs(side) {
            patterns_of_run(&run, max_len, &mut out);
        }
    }
    out
}

fn char_runs(u: &StringTerm) -> Vec<Vec<char>> {
    let mut runs = vec![Vec::new()];
    for t in u.tokens() {
        match t {
            Token::Char(c) => runs.last_mut().expect("non-empty").push(*c),
            _ => runs.push(Vec::new()),
        }
    }
    runs.retain(|r| r.len() >= 2);
    runs
}

fn patterns_of_run(run: &[char], max_len: usize, out: &mut BTreeSet<Vec<char>>) {
    let n = run.len();
    for i in 0..n {
        for len in 2..=max_len.min(n - i) {
            let f = &run[i..i + len];
            if !is_unbordered(f) {
                continue;
            }
            let left = i > 0 && len < max_len && is_unbordered(&run[i - 1..i + len]);
            let right = i + len < n && len < max_len && is_unbordered(&run[i..i + len + 1]);
            if !left && !right {
                out.insert(f.to_vec());
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FilterResult {
    Refuted(Vec<char>),
    Inconclusive,
}

/// Refutes if `D = exact(lhs) - exact(rhs)` is a nonzero constant, or if its
/// upper (lower) bound is negative (positive) regardless of the atoms.
fn refutes(d: &Exact, w: &[char]) -> bool {
    if d.residues.is_empty() && d.sum.coeffs.is_empty() {
        return d.sum.constant != 0;
    }
    let mut upper = d.sum.clone();
    let mut lower = d.sum.clone();
    for (piece, c) in &d.residues {
        let (lo, hi) = residue_bounds(w, piece);
        if *c > 0 {
            upper.add(&hi, *c);
            lower.add(&lo, *c);
        } else {
            upper.add(&lo, *c);
            lower.add(&hi, *c);
        }
    }
    (upper.constant < 0 && upper.coeffs.values().all(|c| *c <= 0)) || (lower.constant > 0 && lower.coeffs.values().all(|c| *c >= 0))
}

fn sum_as_exact(s: ParikhSum) -> Exact {
    Exact { sum: s, residues: BTreeMap::new() }
}

pub fn unsat_filter(eq: &StringEquation, max_len: usize) -> FilterResult {
    let l = abstract_term(&eq.lhs);
    let r = abstract_term(&eq.rhs);
    let chars: BTreeSet<char> = l
        .iter()
        .chain(r.iter())
        .filter_map(|i| match i {
            Item::Char(c) => Some(*c),
            _ => None,
        })
        .collect();
    for a in chars {
        let mut d = sum_as_exact(single_char_sum(a, &l));
        d.sub(&sum_as_exact(single_char_sum(a, &r)));
        if refutes(&d, &[a]) {
            return FilterResult::Refuted(vec![a]);
        }
    }
    let mut patterns: Vec<Vec<char>> = enumerate_patterns(eq, max_len).into_iter().collect();
    patterns.sort_by_key(|w| w.len());
    for w in patterns {
        let mut d = exact(&w, &l);
        d.sub(&exact(&w, &r));
        if refutes(&d, &w) {
            return FilterResult::Refuted(w);
        }
    }
    FilterResult::Inconclusive
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::notation::{parse_equation, parse_term};
    use crate::term::Vocab;

    fn w(s: &str) -> Vec<char> {
        s.chars().collect()
    }

    #[test]
    fn unbordered_words() {
        assert!(is_unbordered(&w("ab")));
        assert!(!is_unbordered(&w("aba")));
        assert!(!is_unbordered(&w("aa")));
        assert!(is_unbordered(&w("aabbb")));
    }

    #[test]
    fn gaps() {
        let mut v = Vocab::new();
        assert!(is_gap(&parse_term(&mut v, "x a y").unwrap(), 2));
        assert!(!is_gap(&StringTerm::empty(), 2));
        assert!(!is_gap(&parse_term(&mut v, "abc").unwrap(), 5));
        assert!(is_gap(&parse_term(&mut v, "a y").unwrap(), 2));
        assert!(!is_gap(&parse_term(&mut v, "x ab y").unwrap(), 2));
    }

    #[test]
    fn crossing_cases() {
        let mut v = Vocab::new();
        assert!(crossing(&w("ab"), &parse_term(&mut v, "x b y").unwrap()));
        assert!(!crossing(&w("ab"), &parse_term(&mut v, "x c y").unwrap()));
        assert!(crossing(&w("ab"), &parse_term(&mut v, "a y").unwrap()));
        assert!(!crossing(&w("ab"), &parse_term(&mut v, "b y").unwrap()));
        assert!(crossing(&w("ab"), &parse_term(&mut v, "x b").unwrap()));
        assert!(!crossing(&w("ab"), &parse_term(&mut v, "x a").unwrap()));
    }

    fn coeff(v: &Vocab, s: &ParikhSum, name: &str) -> i64 {
        let x = v.lookup_var(name).unwrap();
        s.coeffs.get(&Token::Var(x)).copied().unwrap_or(0)
    }

    #[test]
    fn worked_max_and_min_values() {
        let mut v = Vocab::new();
        let u = parse_term(&mut v, "xaxaabbby").unwrap();
        let max = parikh_rewrite(Mode::Max, &w("ab"), &u).unwrap();
        assert_eq!(max.constant, 2);
        assert_eq!(coeff(&v, &max, "x"), 2);
        assert_eq!(coeff(&v, &max, "y"), 1);
        assert_eq!(max.coeffs.len(), 2);

        let u = parse_term(&mut v, "xyabababx").unwrap();
        let min = parikh_rewrite(Mode::Min, &w("ab"), &u).unwrap();
        assert_eq!(min.constant, 3);
        assert_eq!(coeff(&v, &min, "x"), 2);
        assert_eq!(coeff(&v, &min, "y"), 1);
        assert_eq!(min.coeffs.len(), 2);
    }

    #[test]
    fn ground_counts_are_exact() {
        let u = StringTerm::from_chars("abcabxab");
        for mode in [Mode::Min, Mode::Max] {
            let s = parikh_rewrite(mode, &w("ab"), &u).unwrap();
            assert_eq!(s.constant, 3);
            assert!(s.coeffs.is_empty());
        }
    }

    #[test]
    fn patterns_of_examples() {
        let mut v = Vocab::new();
        let e = parse_equation(&mut v, "x1x1acx2x2b = x2x2abcx1x1").unwrap();
        assert!(enumerate_patterns(&e, 8).contains(&w("abc")));
        let e = parse_equation(&mut v, "xabcy = ybacx").unwrap();
        assert!(enumerate_patterns(&e, 8).contains(&w("bc")) || enumerate_patterns(&e, 8).contains(&w("abc")));
        let e = parse_equation(&mut v, "x y = y x").unwrap();
        assert!(enumerate_patterns(&e, 8).is_empty());
    }

    #[test]
    fn filter_examples() {
        let mut v = Vocab::new();
        let e = parse_equation(&mut v, "xay = ybx").unwrap();
        assert_eq!(unsat_filter(&e, 8), FilterResult::Refuted(w("a")));
        let e = parse_equation(&mut v, "xaxaabbby = xyabababx").unwrap();
        assert_eq!(unsat_filter(&e, 8), FilterResult::Refuted(w("ab")));
        let e = parse_equation(&mut v, "x1x1acx2x2b = x2x2abcx1x1").unwrap();
        assert_eq!(unsat_filter(&e, 8), FilterResult::Refuted(w("ac")));
        let mut d = exact(&w("abc"), &abstract_term(&e.lhs));
        d.sub(&exact(&w("abc"), &abstract_term(&e.rhs)));
        assert!(refutes(&d, &w("abc")));
        let e = parse_equation(&mut v, "xx = yb").unwrap();
        assert_eq!(unsat_filter(&e, 8), FilterResult::Inconclusive);
    }

    #[test]
    fn two_crossings_in_one_gap() {
        // x = a, y = b: "a ba b" holds two occurrences of ab.
        let mut v = Vocab::new();
        let u = parse_term(&mut v, "xbay").unwrap();
        let max = parikh_rewrite(Mode::Max, &w("ab"), &u).unwrap();
        assert!(max.constant >= 2);
    }
}
