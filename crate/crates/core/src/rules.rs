//! Equation rewriting and generating rules, look-ahead and rule priority.
//!
//! Rules match on the first tokens of an oriented equation `l ≃ r`. The
//! four orientations are materialized by swapping and reversing; results
//! are mapped back to the frame of the original equation.

use std::fmt;

use crate::int::{IntConstraint, IntTerm};
use crate::intsolver::{IntSolver, IntStore};
use crate::powers::{can_be_empty, sdec, PrefixCase};
use crate::rewrite::rotate_head;
use crate::subst::Binding;
use crate::term::{StrVar, StringEquation, StringTerm, Token, Vocab};

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Orientation {
    AsIs,
    Swapped,
    Reversed,
    SwappedReversed,
}

impl Orientation {
    pub const ALL: [Orientation; 4] = [Orientation::AsIs, Orientation::Swapped, Orientation::Reversed, Orientation::SwappedReversed];

    pub fn is_reversed(self) -> bool {
        matches!(self, Orientation::Reversed | Orientation::SwappedReversed)
    }

    pub fn is_swapped(self) -> bool {
        matches!(self, Orientation::Swapped | Orientation::SwappedReversed)
    }

    pub fn apply(self, e: &StringEquation) -> StringEquation {
        let e = if self.is_swapped() { e.swapped() } else { e.clone() };
        if self.is_reversed() {
            e.reversed()
        } else {
            e
        }
    }

    /// Inverse of [`Orientation::apply`].
    pub fn unapply(self, e: &StringEquation) -> StringEquation {
        let e = if self.is_reversed() { e.reversed() } else { e.clone() };
        if self.is_swapped() {
            e.swapped()
        } else {
            e
        }
    }
}

/// Priority classes, most urgent first.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Category {
    Conflict,
    Deterministic,
    Eliminating,
    Power,
    Generic,
}

impl Category {
    pub const ALL: [Category; 5] = [Category::Conflict, Category::Deterministic, Category::Eliminating, Category::Power, Category::Generic];

    pub fn name(self) -> &'static str {
        match self {
            Category::Conflict => "conflict",
            Category::Deterministic => "deterministic",
            Category::Eliminating => "eliminating",
            Category::Power => "power",
            Category::Generic => "generic",
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Rule {
    /// `t u ≃ t v`
    Cancel,
    /// `ε ≃ a v`, `ε ≃ o v`
    EmptyChar,
    /// `ε ≃ x v`
    EmptyVar,
    /// `ε ≃ w^m v`
    EmptyPower,
    /// `a u ≃ b v`
    CharClash,
    /// `o u ≃ @ v`
    SymChar,
    /// `@ u ≃ x v`
    CharVar,
    /// `@ u ≃ w^m v`
    CharPower,
    /// `x u ≃ y v`
    VarVar,
    /// `x u ≃ w^m v`
    VarPower,
    /// `w^{m1} u ≃ w^{m2} v`
    SameBase,
    /// `w1^{m1} u ≃ w2^{m2} v`
    OtherBase,
    /// `w2 (w1 w2)^m` aligned to `(w2 w1)^m w2`
    Rotate,
}

impl Rule {
    pub fn name(self) -> &'static str {
        match self {
            Rule::Cancel => "cancel",
            Rule::EmptyChar => "empty-char",
            Rule::EmptyVar => "empty-var",
            Rule::EmptyPower => "empty-power",
            Rule::CharClash => "char-clash",
            Rule::SymChar => "sym-char",
            Rule::CharVar => "char-var",
            Rule::CharPower => "char-power",
            Rule::VarVar => "var-var",
            Rule::VarPower => "var-power",
            Rule::SameBase => "same-base",
            Rule::OtherBase => "other-base",
            Rule::Rotate => "rotate",
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One successor: a substitution (applied to the whole node), added
/// integer constraints and added string equations.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Branch {
    pub bindings: Vec<Binding>,
    pub constraints: Vec<IntConstraint>,
    pub equations: Vec<StringEquation>,
}

impl Branch {
    fn bind(b: Binding) -> Self {
        Branch { bindings: vec![b], ..Default::default() }
    }

    fn with(mut self, cs: impl IntoIterator<Item = IntConstraint>) -> Self {
        self.constraints.extend(cs);
        self
    }

    fn map_frame(self, o: Orientation) -> Branch {
        if !o.is_reversed() {
            return self;
        }
        Branch {
            bindings: self
                .bindings
                .into_iter()
                .map(|b| match b {
                    Binding::Str(x, t) => Binding::Str(x, t.reverse()),
                    b => b,
                })
                .collect(),
            constraints: self.constraints,
            equations: self.equations.iter().map(StringEquation::reversed).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Effect {
    Conflict,
    /// Replace the target equation by these equations and add constraints.
    Replace(Vec<StringEquation>, Vec<IntConstraint>),
    Generate(Vec<Branch>),
}

impl Effect {
    pub fn branch_count(&self) -> usize {
        match self {
            Effect::Conflict => 0,
            Effect::Replace(..) => 1,
            Effect::Generate(bs) => bs.len(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RuleApplication {
    pub rule: Rule,
    pub category: Category,
    pub eq_index: usize,
    pub orientation: Orientation,
    pub effect: Effect,
    /// Set when a look-ahead case strengthened the plain rule.
    pub look_ahead: bool,
}

/// Access to the node's integer store and fresh names.
pub struct Ctx<'a> {
    pub solver: &'a mut IntSolver,
    pub store: &'a IntStore,
    pub vocab: &'a mut Vocab,
}

impl Ctx<'_> {
    pub fn entails(&mut self, c: &IntConstraint) -> bool {
        self.solver.entails(self.store, c)
    }
}

fn zero() -> IntTerm {
    IntTerm::zero()
}

fn one() -> IntTerm {
    IntTerm::constant(1)
}

struct Matched {
    rule: Rule,
    category: Category,
    /// In the oriented frame.
    effect: Effect,
}

impl Matched {
    fn new(rule: Rule, category: Category, effect: Effect) -> Option<Matched> {
        Some(Matched { rule, category, effect })
    }
}

fn replace(l: Vec<Token>, r: Vec<Token>, cs: Vec<IntConstraint>) -> Effect {
    Effect::Replace(vec![StringEquation::new(StringTerm::new(l), StringTerm::new(r))], cs)
}

/// Matches one orientation `l ≃ r`.
fn match_oriented(l: &[Token], r: &[Token], ctx: &mut Ctx) -> Option<Matched> {
    use Category::*;
    let tr = r.first()?;
    let Some(tl) = l.first() else {
        return match tr {
            Token::Char(_) | Token::Sym(_) => Matched::new(Rule::EmptyChar, Conflict, Effect::Conflict),
            Token::Var(x) => Matched::new(Rule::EmptyVar, Deterministic, Effect::Generate(vec![Branch::bind(Binding::Str(*x, StringTerm::empty()))])),
            Token::Power(p) => {
                let m = &p.exponent;
                let to_empty = Branch { equations: vec![StringEquation::new(p.base.clone(), StringTerm::empty())], ..Default::default() };
                if !can_be_empty(&p.base) {
                    return Matched::new(Rule::EmptyPower, Deterministic, replace(l.to_vec(), r.to_vec(), vec![IntConstraint::eq(m.clone(), zero())]));
                }
                if ctx.entails(&IntConstraint::ge(m.clone(), one())) {
                    return Matched::new(Rule::EmptyPower, Deterministic, Effect::Generate(vec![to_empty]));
                }
                let branches = vec![to_empty, Branch::default().with([IntConstraint::eq(m.clone(), zero())])];
                Matched::new(Rule::EmptyPower, Power, Effect::Generate(branches))
            }
        };
    };
    if tl == tr {
        return Matched::new(Rule::Cancel, Deterministic, replace(l[1..].to_vec(), r[1..].to_vec(), Vec::new()));
    }
    match (tl, tr) {
        (Token::Char(_), Token::Char(_)) => Matched::new(Rule::CharClash, Conflict, Effect::Conflict),
        (Token::Sym(o), Token::Char(_) | Token::Sym(_)) => {
            Matched::new(Rule::SymChar, Deterministic, Effect::Generate(vec![Branch::bind(Binding::Sym(*o, tr.clone()))]))
        }
        (Token::Char(_) | Token::Sym(_), Token::Var(x)) => {
            let x2 = ctx.vocab.fresh_var(*x);
            let branches = vec![
                Branch::bind(Binding::Str(*x, StringTerm::empty())),
                Branch::bind(Binding::Str(*x, StringTerm::new(vec![tl.clone(), Token::Var(x2)]))),
            ];
            Matched::new(Rule::CharVar, Eliminating, Effect::Generate(branches))
        }
        (Token::Char(_) | Token::Sym(_), Token::Power(p)) => match_char_power(l, r, p, ctx),
        (Token::Var(x), Token::Var(y)) => {
            let (x, y) = (*x, *y);
            let x2 = ctx.vocab.fresh_var(x);
            let y2 = ctx.vocab.fresh_var(y);
            let lx = IntTerm::len(x);
            let ly = IntTerm::len(y);
            let branches = vec![
                Branch::bind(Binding::Str(x, StringTerm::empty())),
                Branch::bind(Binding::Str(y, StringTerm::empty())).with([IntConstraint::gt(lx.clone(), zero())]),
                Branch::bind(Binding::Str(y, StringTerm::new(vec![Token::Var(x), Token::Var(y2)]))).with([IntConstraint::gt(lx, zero())]),
                Branch::bind(Binding::Str(x, StringTerm::new(vec![Token::Var(y), Token::Var(x2)])))
                    .with([IntConstraint::gt(ly, zero()), IntConstraint::gt(IntTerm::len(x2), zero())]),
            ];
            Matched::new(Rule::VarVar, Generic, Effect::Generate(branches))
        }
        (Token::Var(x), Token::Power(p)) => {
            let x = *x;
            let x2 = ctx.vocab.fresh_var(x);
            let power = Token::Power(p.clone());
            let mut branches = vec![Branch::bind(Binding::Str(x, StringTerm::new(vec![power, Token::Var(x2)])))];
            let mp = IntTerm::var(ctx.vocab.fresh_int());
            let head = Token::ground_power(p.base.clone(), mp.clone());
            for PrefixCase { prefix, side } in sdec(&p.base, ctx.vocab) {
                let mut tokens = vec![head.clone()];
                tokens.extend(prefix.into_tokens());
                let b = Branch::bind(Binding::Str(x, StringTerm::new(tokens)))
                    .with(side)
                    .with([IntConstraint::ge(mp.clone(), zero()), IntConstraint::lt(mp.clone(), p.exponent.clone())]);
                branches.push(b);
            }
            Matched::new(Rule::VarPower, Eliminating, Effect::Generate(branches))
        }
        (Token::Power(a), Token::Power(b)) if a.base == b.base => {
            let (m1, m2) = (&a.exponent, &b.exponent);
            let ge = IntConstraint::ge(m1.clone(), m2.clone());
            let lt = IntConstraint::lt(m1.clone(), m2.clone());
            if ctx.entails(&ge) {
                let mut nl = vec![Token::ground_power(a.base.clone(), m1 - m2)];
                nl.extend_from_slice(&l[1..]);
                return Matched::new(Rule::SameBase, Deterministic, replace(nl, r[1..].to_vec(), vec![ge]));
            }
            if ctx.entails(&lt) {
                let mut nr = vec![Token::ground_power(a.base.clone(), m2 - m1)];
                nr.extend_from_slice(&r[1..]);
                return Matched::new(Rule::SameBase, Deterministic, replace(l[1..].to_vec(), nr, vec![lt]));
            }
            Matched::new(Rule::SameBase, Power, Effect::Generate(vec![Branch::default().with([ge]), Branch::default().with([lt])]))
        }
        (Token::Power(_), Token::Power(b)) => {
            let m2 = &b.exponent;
            if ctx.entails(&IntConstraint::ge(m2.clone(), one())) {
                return unwind_and_match(l, r, Rule::OtherBase, ctx);
            }
            let branches = vec![
                Branch::default().with([IntConstraint::eq(m2.clone(), zero())]),
                Branch::default().with([IntConstraint::ge(m2.clone(), one())]),
            ];
            Matched::new(Rule::OtherBase, Power, Effect::Generate(branches))
        }
        // Var vs character and power vs character are covered by the
        // swapped orientation.
        _ => None,
    }
}

fn match_char_power(l: &[Token], r: &[Token], p: &crate::term::Power, ctx: &mut Ctx) -> Option<Matched> {
    use Category::*;
    let m = &p.exponent;
    if let Some(rot) = rotate_to_power(l, r) {
        return Matched::new(Rule::Rotate, Deterministic, replace(rot, r.to_vec(), Vec::new()));
    }
    let run: Vec<char> = l
        .iter()
        .map_while(|t| match t {
            Token::Char(c) => Some(*c),
            _ => None,
        })
        .collect();
    if !run.is_empty() && !prefix_compatible(&p.base, &run) {
        return Matched::new(Rule::CharPower, Deterministic, replace(l.to_vec(), r.to_vec(), vec![IntConstraint::eq(m.clone(), zero())]));
    }
    if ctx.entails(&IntConstraint::ge(m.clone(), one())) {
        return unwind_and_match(l, r, Rule::CharPower, ctx);
    }
    let branches = vec![
        Branch::default().with([IntConstraint::eq(m.clone(), zero())]),
        Branch::default().with([IntConstraint::ge(m.clone(), one())]),
    ];
    Matched::new(Rule::CharPower, Power, Effect::Generate(branches))
}

/// Rotates the head of `u` onto the base of the power heading `other`.
fn rotate_to_power(u: &[Token], other: &[Token]) -> Option<Vec<Token>> {
    let Some(Token::Power(q)) = other.first() else { return None };
    rotate_head(&StringTerm::new(u.to_vec()), &q.base).map(StringTerm::into_tokens)
}

/// Unwinds the power heading `r` (its exponent is entailed positive) and
/// matches again without renormalizing, so that the unwound copy cannot be
/// folded back. Only results that make progress are kept: a conflict, a
/// branching, or a replacement that cancelled at least one token.
fn unwind_and_match(l: &[Token], r: &[Token], rule: Rule, ctx: &mut Ctx) -> Option<Matched> {
    let Some(Token::Power(p)) = r.first() else { return None };
    let mut nr: Vec<Token> = p.base.tokens().to_vec();
    nr.push(Token::ground_power(p.base.clone(), &p.exponent - &one()));
    nr.extend_from_slice(&r[1..]);
    let used = IntConstraint::ge(p.exponent.clone(), one());
    unwound_progress(l.to_vec(), nr, rule, used, ctx, 0)
}

fn unwound_progress(mut l: Vec<Token>, mut r: Vec<Token>, rule: Rule, used: IntConstraint, ctx: &mut Ctx, depth: usize) -> Option<Matched> {
    use Category::*;
    let mut cancelled = 0;
    while let (Some(a), Some(b)) = (l.first(), r.first()) {
        if a != b {
            break;
        }
        l.remove(0);
        r.remove(0);
        cancelled += 1;
    }
    if cancelled > 0 {
        return Matched::new(rule, Deterministic, replace(l, r, vec![used]));
    }
    if depth > 8 {
        return None;
    }
    let (a, b) = (l.first()?, r.first()?);
    match (a, b) {
        (Token::Char(_), Token::Char(_)) => Matched::new(rule, Conflict, Effect::Conflict),
        (Token::Sym(o), Token::Char(_) | Token::Sym(_)) => Matched::new(Rule::SymChar, Deterministic, Effect::Generate(vec![Branch::bind(Binding::Sym(*o, b.clone()))])),
        (Token::Char(_), Token::Sym(o)) => Matched::new(Rule::SymChar, Deterministic, Effect::Generate(vec![Branch::bind(Binding::Sym(*o, a.clone()))])),
        (_, Token::Power(_)) | (Token::Power(_), _) => {
            let (l, r) = if matches!(b, Token::Power(_)) { (l, r) } else { (r, l) };
            let Some(Token::Power(q)) = r.first() else { return None };
            let m = &q.exponent;
            let ge = IntConstraint::ge(m.clone(), one());
            if ctx.entails(&ge) {
                let mut nr: Vec<Token> = q.base.tokens().to_vec();
                nr.push(Token::ground_power(q.base.clone(), m - &one()));
                nr.extend_from_slice(&r[1..]);
                return unwound_progress(l, nr, rule, used, ctx, depth + 1);
            }
            let branches = vec![Branch::default().with([IntConstraint::eq(m.clone(), zero())]), Branch::default().with([ge])];
            Matched::new(rule, Power, Effect::Generate(branches))
        }
        _ => None,
    }
}

/// Whether some concretization of `base^n`, `n >= 1`, is prefix-comparable
/// with `run`. Symbolic characters match anything; inner powers repeat
/// their base any number of times.
pub fn prefix_compatible(base: &StringTerm, run: &[char]) -> bool {
    let mut nfa = Nfa::default();
    let start = nfa.add();
    let end = nfa.build(base.tokens(), start);
    nfa.eps(end, start);
    let mut cur = nfa.closure(vec![start]);
    for c in run {
        if cur.contains(&end) {
            return true;
        }
        cur = nfa.closure(nfa.step(&cur, *c));
        if cur.is_empty() {
            return false;
        }
    }
    true
}

#[derive(Default)]
struct Nfa {
    /// (from, label, to); `None` label is ε, `Some(None)` is any character.
    edges: Vec<(usize, Option<Option<char>>, usize)>,
    states: usize,
}

impl Nfa {
    fn add(&mut self) -> usize {
        self.states += 1;
        self.states - 1
    }

    fn eps(&mut self, a: usize, b: usize) {
        self.edges.push((a, None, b));
    }

    fn build(&mut self, ts: &[Token], mut cur: usize) -> usize {
        for t in ts {
            let next = self.add();
            match t {
                Token::Char(c) => self.edges.push((cur, Some(Some(*c)), next)),
                Token::Sym(_) => self.edges.push((cur, Some(None), next)),
                Token::Power(p) => {
                    let inner = self.add();
                    self.eps(cur, inner);
                    let inner_end = self.build(p.base.tokens(), inner);
                    self.eps(inner_end, inner);
                    self.eps(inner, next);
                }
                Token::Var(_) => unreachable!("ground base"),
            }
            cur = next;
        }
        cur
    }

    fn closure(&self, mut set: Vec<usize>) -> Vec<usize> {
        let mut i = 0;
        while i < set.len() {
            let s = set[i];
            for (a, lab, b) in &self.edges {
                if *a == s && lab.is_none() && !set.contains(b) {
                    set.push(*b);
                }
            }
            i += 1;
        }
        set.sort_unstable();
        set
    }

    fn step(&self, set: &[usize], c: char) -> Vec<usize> {
        let mut out = Vec::new();
        for (a, lab, b) in &self.edges {
            if let Some(l) = lab {
                if set.contains(a) && (l.is_none() || *l == Some(c)) && !out.contains(b) {
                    out.push(*b);
                }
            }
        }
        out
    }
}

fn map_effect(effect: Effect, o: Orientation) -> Effect {
    match effect {
        Effect::Conflict => Effect::Conflict,
        Effect::Replace(eqs, cs) => Effect::Replace(eqs.iter().map(|e| o.unapply(e)).collect(), cs),
        Effect::Generate(bs) => Effect::Generate(bs.into_iter().map(|b| b.map_frame(o)).collect()),
    }
}

/// The rule application for one orientation of equation `eq_index`.
pub fn match_rule(eq: &StringEquation, eq_index: usize, o: Orientation, ctx: &mut Ctx) -> Option<RuleApplication> {
    let f = o.apply(eq);
    let m = match_oriented(f.lhs.tokens(), f.rhs.tokens(), ctx)?;
    Some(RuleApplication { rule: m.rule, category: m.category, eq_index, orientation: o, effect: map_effect(m.effect, o), look_ahead: false })
}

/// First conflict or deterministic step for an equation, if any.
pub fn deterministic(eq: &StringEquation, eq_index: usize, ctx: &mut Ctx) -> Option<RuleApplication> {
    let mut best: Option<RuleApplication> = None;
    for o in Orientation::ALL {
        let cp = ctx.vocab.checkpoint();
        let app = match_rule(eq, eq_index, o, ctx);
        match app {
            Some(a) if a.category == Category::Conflict => return Some(a),
            Some(a) if a.category == Category::Deterministic && branch_free(&a) => {
                if best.is_none() {
                    best = Some(a);
                }
            }
            _ => ctx.vocab.rollback(cp),
        }
    }
    best
}

/// Deterministic applications never allocate fresh names, so keeping one
/// across rollbacks of the others is safe.
fn branch_free(a: &RuleApplication) -> bool {
    match &a.effect {
        Effect::Generate(bs) => bs.len() == 1,
        _ => true,
    }
}

/// Look-ahead strengthening of a generating application.
pub fn look_ahead(eqs: &[StringEquation], app: RuleApplication, ctx: &mut Ctx) -> RuleApplication {
    let eq = app.orientation.apply(&eqs[app.eq_index]);
    let (l, r) = (eq.lhs.tokens(), eq.rhs.tokens());
    let strengthened = match app.rule {
        Rule::CharVar => look_ahead_prefix(l, r, ctx).map(|b| (Category::Eliminating, vec![b])).or_else(|| {
            // Drop x/ε when |x| >= 1 is entailed.
            let Some(Token::Var(x)) = r.first() else { return None };
            if !ctx.entails(&IntConstraint::ge(IntTerm::len(*x), one())) {
                return None;
            }
            let Effect::Generate(bs) = &app.effect else { return None };
            Some((Category::Eliminating, vec![bs[1].clone().map_frame(app.orientation)]))
        }),
        Rule::VarVar => look_ahead_lengths(l, r, &app, ctx),
        _ => None,
    };
    match strengthened {
        Some((category, branches)) => {
            let branches = branches.into_iter().map(|b| b.map_frame(app.orientation)).collect();
            RuleApplication { category, effect: Effect::Generate(branches), look_ahead: true, ..app }
        }
        None => app,
    }
}

/// `x u1 v1 ≃ g v2` with `g` a run of characters and symbolic characters:
/// the longest `w = g[..i]` such that `x = g[..j]` conflicts for every
/// `j < i`. Yields `x / w x'` when `w` is non-empty.
fn look_ahead_prefix(l: &[Token], r: &[Token], ctx: &mut Ctx) -> Option<Branch> {
    let Some(Token::Var(x)) = r.first() else { return None };
    let x = *x;
    let g: Vec<Token> = l.iter().take_while(|t| matches!(t, Token::Char(_) | Token::Sym(_))).cloned().collect();
    let u1: Vec<&Token> = r.iter().take_while(|t| matches!(t, Token::Char(_) | Token::Sym(_)) || t.as_var() == Some(x)).collect();
    let mut i = 0;
    while i <= g.len() && conflicts(&g[..i], &u1, x, l) {
        i += 1;
    }
    let i = i.min(g.len());
    if i == 0 {
        return None;
    }
    let x2 = ctx.vocab.fresh_var(x);
    let mut image = g[..i].to_vec();
    image.push(Token::Var(x2));
    Some(Branch::bind(Binding::Str(x, StringTerm::new(image))))
}

/// Substitutes `x = w` into the prefix `u1` and compares with `l`.
fn conflicts(w: &[Token], u1: &[&Token], x: StrVar, l: &[Token]) -> bool {
    let mut s: Vec<&Token> = Vec::new();
    for t in u1 {
        if t.as_var() == Some(x) {
            s.extend(w.iter());
        } else {
            s.push(t);
        }
    }
    s.iter().zip(l.iter()).take_while(|(_, b)| matches!(b, Token::Char(_) | Token::Sym(_))).any(|(a, b)| matches!((a, b), (Token::Char(p), Token::Char(q)) if p != q))
}

fn look_ahead_lengths(l: &[Token], r: &[Token], app: &RuleApplication, ctx: &mut Ctx) -> Option<(Category, Vec<Branch>)> {
    let (Some(Token::Var(x)), Some(Token::Var(y))) = (l.first(), r.first()) else { return None };
    let (x, y) = (*x, *y);
    let (lx, ly) = (IntTerm::len(x), IntTerm::len(y));
    let Effect::Generate(bs) = &app.effect else { return None };
    // Branches are already in the original frame; map to the oriented one.
    let bs: Vec<Branch> = bs.iter().cloned().map(|b| b.map_frame(app.orientation)).collect();
    if ctx.entails(&IntConstraint::eq(lx.clone(), ly.clone())) {
        return Some((Category::Eliminating, vec![Branch::bind(Binding::Str(x, StringTerm::new(vec![Token::Var(y)])))]));
    }
    // The generic branches assume the other side is non-empty; only the
    // remainder guard survives.
    if ctx.entails(&IntConstraint::gt(lx.clone(), ly.clone())) {
        let mut b = bs[3].clone();
        b.constraints.remove(0);
        return Some((Category::Eliminating, vec![b]));
    }
    if ctx.entails(&IntConstraint::lt(lx, ly)) {
        let mut b = bs[2].clone();
        b.constraints.clear();
        return Some((Category::Eliminating, vec![b]));
    }
    None
}

/// All generating applications of a node, look-ahead applied, in
/// equation/orientation order.
pub fn candidates(eqs: &[StringEquation], ctx: &mut Ctx) -> Vec<RuleApplication> {
    let mut out = Vec::new();
    for (i, e) in eqs.iter().enumerate() {
        for o in Orientation::ALL {
            if let Some(app) = match_rule(e, i, o, ctx) {
                let app = look_ahead(eqs, app, ctx);
                if !out.iter().any(|a: &RuleApplication| a.eq_index == i && a.effect == app.effect) {
                    out.push(app);
                }
            }
        }
    }
    out
}

/// Sort key: category, then fewest branches, then position.
pub fn priority_key(a: &RuleApplication) -> (Category, usize, usize, Orientation) {
    (a.category, a.effect.branch_count(), a.eq_index, a.orientation)
}

/// Highest-priority application. `tiebreak` may permute applications of
/// equal category and branch count.
pub fn rule_priority(mut apps: Vec<RuleApplication>, tiebreak: Option<&mut dyn FnMut(usize) -> usize>) -> Option<RuleApplication> {
    apps.sort_by_key(priority_key);
    let first = apps.first()?;
    let key = (first.category, first.effect.branch_count());
    let ties = apps.iter().take_while(|a| (a.category, a.effect.branch_count()) == key).count();
    let pick = match tiebreak {
        Some(f) if ties > 1 => f(ties),
        _ => 0,
    };
    Some(apps.swap_remove(pick))
}
