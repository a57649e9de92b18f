//! Integer terms and (in)equations.
//!
//! An [`IntTerm`] is a multivariate polynomial with integer coefficients over
//! [`Atom`]s. Atoms are integer variables (power exponents and their fresh
//! companions) and symbolic lengths `len(x)` of string variables. Every atom
//! ranges over the naturals.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_integer::Integer;

use crate::term::{IntVar, StrVar, Vocab};

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Atom {
    Int(IntVar),
    Len(StrVar),
}

/// Sorted multiset of atoms. The empty monomial is the constant `1`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct Monomial(Vec<Atom>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(Vec::new())
    }

    pub fn atom(a: Atom) -> Self {
        Monomial(vec![a])
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.0
    }

    pub fn degree(&self) -> usize {
        self.0.len()
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    fn product(&self, other: &Monomial) -> Monomial {
        let mut atoms = Vec::with_capacity(self.0.len() + other.0.len());
        atoms.extend_from_slice(&self.0);
        atoms.extend_from_slice(&other.0);
        atoms.sort();
        Monomial(atoms)
    }
}

/// Polynomial in normal form: equal monomials merged, zero coefficients dropped.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct IntTerm(BTreeMap<Monomial, i64>);

impl IntTerm {
    pub fn zero() -> Self {
        IntTerm(BTreeMap::new())
    }

    pub fn constant(k: i64) -> Self {
        let mut t = IntTerm::zero();
        t.add_monomial(Monomial::one(), k);
        t
    }

    pub fn atom(a: Atom) -> Self {
        let mut t = IntTerm::zero();
        t.add_monomial(Monomial::atom(a), 1);
        t
    }

    pub fn var(v: IntVar) -> Self {
        IntTerm::atom(Atom::Int(v))
    }

    pub fn len(x: StrVar) -> Self {
        IntTerm::atom(Atom::Len(x))
    }

    pub fn monomial(m: Monomial, c: i64) -> Self {
        let mut t = IntTerm::zero();
        t.add_monomial(m, c);
        t
    }

    fn add_monomial(&mut self, m: Monomial, c: i64) {
        if c == 0 {
            return;
        }
        match self.0.entry(m) {
            Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if *e.get() == 0 {
                    e.remove();
                }
            }
            Entry::Vacant(e) => {
                e.insert(c);
            }
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, i64)> + '_ {
        self.0.iter().map(|(m, c)| (m, *c))
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn constant_part(&self) -> i64 {
        self.0.get(&Monomial::one()).copied().unwrap_or(0)
    }

    /// Returns the value if the term has no atoms.
    pub fn as_constant(&self) -> Option<i64> {
        match self.0.len() {
            0 => Some(0),
            1 => self.0.get(&Monomial::one()).copied(),
            _ => None,
        }
    }

    pub fn is_linear(&self) -> bool {
        self.0.keys().all(|m| m.degree() <= 1)
    }

    pub fn atoms(&self) -> impl Iterator<Item = Atom> + '_ {
        self.0.keys().flat_map(|m| m.0.iter().copied())
    }

    pub fn scale(&self, k: i64) -> IntTerm {
        if k == 0 {
            return IntTerm::zero();
        }
        IntTerm(self.0.iter().map(|(m, c)| (m.clone(), c * k)).collect())
    }

    /// gcd of the coefficients of non-constant monomials (0 if none).
    pub fn content(&self) -> i64 {
        self.0
            .iter()
            .filter(|(m, _)| !m.is_one())
            .fold(0i64, |g, (_, c)| g.gcd(c))
    }

    /// Substitutes atoms; atoms mapped to `None` stay.
    pub fn substitute(&self, f: &impl Fn(Atom) -> Option<IntTerm>) -> IntTerm {
        let mut out = IntTerm::zero();
        for (m, c) in &self.0 {
            let mut prod = IntTerm::constant(*c);
            let mut rest = Vec::new();
            for a in &m.0 {
                match f(*a) {
                    Some(t) => prod = &prod * &t,
                    None => rest.push(*a),
                }
            }
            prod = &prod * &IntTerm::monomial(Monomial(rest), 1);
            out = &out + &prod;
        }
        out
    }

    pub fn eval(&self, f: &impl Fn(Atom) -> i64) -> i128 {
        self.0
            .iter()
            .map(|(m, c)| {
                m.0.iter()
                    .fold(*c as i128, |acc, a| acc.saturating_mul(f(*a) as i128))
            })
            .fold(0i128, |a, b| a.saturating_add(b))
    }

    /// Every atom is non-negative, so a term whose coefficients are all
    /// non-negative is bounded below by its constant.
    pub fn all_coeffs_nonneg(&self) -> bool {
        self.0.iter().all(|(m, c)| m.is_one() || *c >= 0)
    }

    pub fn all_coeffs_nonpos(&self) -> bool {
        self.0.iter().all(|(m, c)| m.is_one() || *c <= 0)
    }

    pub fn size(&self) -> usize {
        self.0.keys().map(|m| m.degree() + 1).sum()
    }

    pub fn display<'a>(&'a self, vocab: &'a Vocab) -> impl fmt::Display + 'a {
        DisplayInt(self, vocab)
    }
}

impl From<i64> for IntTerm {
    fn from(k: i64) -> Self {
        IntTerm::constant(k)
    }
}

impl Add for &IntTerm {
    type Output = IntTerm;
    fn add(self, rhs: &IntTerm) -> IntTerm {
        let mut out = self.clone();
        for (m, c) in &rhs.0 {
            out.add_monomial(m.clone(), *c);
        }
        out
    }
}

impl Sub for &IntTerm {
    type Output = IntTerm;
    fn sub(self, rhs: &IntTerm) -> IntTerm {
        let mut out = self.clone();
        for (m, c) in &rhs.0 {
            out.add_monomial(m.clone(), -*c);
        }
        out
    }
}

impl Mul for &IntTerm {
    type Output = IntTerm;
    fn mul(self, rhs: &IntTerm) -> IntTerm {
        let mut out = IntTerm::zero();
        for (m1, c1) in &self.0 {
            for (m2, c2) in &rhs.0 {
                out.add_monomial(m1.product(m2), c1 * c2);
            }
        }
        out
    }
}

impl Neg for &IntTerm {
    type Output = IntTerm;
    fn neg(self) -> IntTerm {
        self.scale(-1)
    }
}

impl Add for IntTerm {
    type Output = IntTerm;
    fn add(self, rhs: IntTerm) -> IntTerm {
        &self + &rhs
    }
}

impl Sub for IntTerm {
    type Output = IntTerm;
    fn sub(self, rhs: IntTerm) -> IntTerm {
        &self - &rhs
    }
}

impl Mul for IntTerm {
    type Output = IntTerm;
    fn mul(self, rhs: IntTerm) -> IntTerm {
        &self * &rhs
    }
}

struct DisplayInt<'a>(&'a IntTerm, &'a Vocab);

impl fmt::Display for DisplayInt<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let t = self.0;
        if t.is_zero() {
            return write!(f, "0");
        }
        // Non-constant monomials first, constant last.
        let mut parts: Vec<(&Monomial, i64)> = t.0.iter().filter(|(m, _)| !m.is_one()).map(|(m, c)| (m, *c)).collect();
        if let Some(c) = t.0.get(&Monomial::one()) {
            parts.push((&EMPTY, *c));
        }
        for (i, (m, c)) in parts.iter().enumerate() {
            let c = *c;
            if i == 0 {
                if c < 0 {
                    write!(f, "-")?;
                }
            } else if c < 0 {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let abs = c.abs();
            if m.is_one() {
                write!(f, "{abs}")?;
                continue;
            }
            if abs != 1 {
                write!(f, "{abs}")?;
            }
            for (j, a) in m.0.iter().enumerate() {
                if j > 0 {
                    write!(f, "*")?;
                }
                match a {
                    Atom::Int(v) => write!(f, "{}", self.1.int_name(*v))?,
                    Atom::Len(x) => write!(f, "|{}|", self.1.var_name(*x))?,
                }
            }
        }
        Ok(())
    }
}

static EMPTY: Monomial = Monomial(Vec::new());

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Relation {
    Eq,
    Le,
    Lt,
    Ge,
    Gt,
}

impl Relation {
    fn symbol(self) -> &'static str {
        match self {
            Relation::Eq => "=",
            Relation::Le => "<=",
            Relation::Lt => "<",
            Relation::Ge => ">=",
            Relation::Gt => ">",
        }
    }
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct IntConstraint {
    pub relation: Relation,
    pub lhs: IntTerm,
    pub rhs: IntTerm,
}

impl IntConstraint {
    pub fn new(relation: Relation, lhs: IntTerm, rhs: IntTerm) -> Self {
        IntConstraint { relation, lhs, rhs }
    }

    pub fn eq(lhs: IntTerm, rhs: IntTerm) -> Self {
        Self::new(Relation::Eq, lhs, rhs)
    }

    pub fn le(lhs: IntTerm, rhs: IntTerm) -> Self {
        Self::new(Relation::Le, lhs, rhs)
    }

    pub fn lt(lhs: IntTerm, rhs: IntTerm) -> Self {
        Self::new(Relation::Lt, lhs, rhs)
    }

    pub fn ge(lhs: IntTerm, rhs: IntTerm) -> Self {
        Self::new(Relation::Ge, lhs, rhs)
    }

    pub fn gt(lhs: IntTerm, rhs: IntTerm) -> Self {
        Self::new(Relation::Gt, lhs, rhs)
    }

    pub fn substitute(&self, f: &impl Fn(Atom) -> Option<IntTerm>) -> IntConstraint {
        IntConstraint {
            relation: self.relation,
            lhs: self.lhs.substitute(f),
            rhs: self.rhs.substitute(f),
        }
    }

    pub fn holds(&self, f: &impl Fn(Atom) -> i64) -> bool {
        let l = self.lhs.eval(f);
        let r = self.rhs.eval(f);
        match self.relation {
            Relation::Eq => l == r,
            Relation::Le => l <= r,
            Relation::Lt => l < r,
            Relation::Ge => l >= r,
            Relation::Gt => l > r,
        }
    }

    /// Moves everything to one side and normalizes over the integers.
    pub fn normalize(&self) -> Normalized {
        let diff = &self.lhs - &self.rhs;
        match self.relation {
            Relation::Eq => NormConstraint::eq_zero(diff),
            Relation::Le => NormConstraint::le_zero(diff),
            Relation::Lt => NormConstraint::le_zero(&diff + &IntTerm::constant(1)),
            Relation::Ge => NormConstraint::le_zero(-&diff),
            Relation::Gt => NormConstraint::le_zero(&(-&diff) + &IntTerm::constant(1)),
        }
    }

    pub fn display<'a>(&'a self, vocab: &'a Vocab) -> impl fmt::Display + 'a {
        DisplayConstraint(self, vocab)
    }
}

struct DisplayConstraint<'a>(&'a IntConstraint, &'a Vocab);

impl fmt::Display for DisplayConstraint<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {} {}",
            self.0.lhs.display(self.1),
            self.0.relation.symbol(),
            self.0.rhs.display(self.1)
        )
    }
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum NormKind {
    /// `poly = 0`
    Eq,
    /// `poly <= 0`
    Le,
}

/// Constraint of the form `poly = 0` or `poly <= 0`, divided through by the
/// content and tightened over the integers.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct NormConstraint {
    pub kind: NormKind,
    pub poly: IntTerm,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Normalized {
    True,
    False,
    Constraint(NormConstraint),
}

impl NormConstraint {
    pub fn eq_zero(poly: IntTerm) -> Normalized {
        if let Some(k) = poly.as_constant() {
            return if k == 0 { Normalized::True } else { Normalized::False };
        }
        let k = poly.constant_part();
        // With natural atoms, all-positive (or all-negative) coefficients
        // and a constant of the same strict sign cannot reach zero.
        if (poly.all_coeffs_nonneg() && k > 0) || (poly.all_coeffs_nonpos() && k < 0) {
            return Normalized::False;
        }
        let g = poly.content();
        if k % g != 0 {
            return Normalized::False;
        }
        let mut p = IntTerm(poly.0.iter().map(|(m, c)| (m.clone(), c / g)).collect());
        let lead = p.0.iter().find(|(m, _)| !m.is_one()).map(|(_, c)| *c).unwrap_or(1);
        if lead < 0 {
            p = -&p;
        }
        Normalized::Constraint(NormConstraint { kind: NormKind::Eq, poly: p })
    }

    pub fn le_zero(poly: IntTerm) -> Normalized {
        if let Some(k) = poly.as_constant() {
            return if k <= 0 { Normalized::True } else { Normalized::False };
        }
        let k = poly.constant_part();
        if poly.all_coeffs_nonneg() && k > 0 {
            return Normalized::False;
        }
        if poly.all_coeffs_nonpos() && k <= 0 {
            return Normalized::True;
        }
        let g = poly.content();
        let mut map = BTreeMap::new();
        for (m, c) in &poly.0 {
            if m.is_one() {
                // sum(c/g * x) + k/g <= 0 tightens to ceil(k/g)
                let q = Integer::div_ceil(&k, &g);
                if q != 0 {
                    map.insert(m.clone(), q);
                }
            } else {
                map.insert(m.clone(), c / g);
            }
        }
        Normalized::Constraint(NormConstraint { kind: NormKind::Le, poly: IntTerm(map) })
    }

    pub fn holds(&self, f: &impl Fn(Atom) -> i64) -> bool {
        let v = self.poly.eval(f);
        match self.kind {
            NormKind::Eq => v == 0,
            NormKind::Le => v <= 0,
        }
    }

    pub fn to_constraint(&self) -> IntConstraint {
        match self.kind {
            NormKind::Eq => IntConstraint::eq(self.poly.clone(), IntTerm::zero()),
            NormKind::Le => IntConstraint::le(self.poly.clone(), IntTerm::zero()),
        }
    }

    /// Splits `poly` into the non-constant part and the constant and prints
    /// `lhs rel rhs` with the constant moved right.
    pub fn display<'a>(&'a self, vocab: &'a Vocab) -> impl fmt::Display + 'a {
        DisplayNorm(self, vocab)
    }
}

struct DisplayNorm<'a>(&'a NormConstraint, &'a Vocab);

impl fmt::Display for DisplayNorm<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let k = self.0.poly.constant_part();
        let lhs = &self.0.poly - &IntTerm::constant(k);
        let rel = match self.0.kind {
            NormKind::Eq => "=",
            NormKind::Le => "<=",
        };
        let shown = write!(f, "{} {} {}", lhs.display(self.1), rel, -k);
        shown
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(i: u32) -> IntTerm {
        IntTerm::var(IntVar(i))
    }

    #[test]
    fn merges_and_drops_zero_monomials() {
        let t = &(&v(0) + &v(1)) - &v(0);
        assert_eq!(t, v(1));
        let z = &v(0) - &v(0);
        assert!(z.is_zero());
        assert_eq!(z.as_constant(), Some(0));
    }

    #[test]
    fn products_are_commutative() {
        let a = &v(0) * &v(1);
        let b = &v(1) * &v(0);
        assert_eq!(a, b);
        assert!(!a.is_linear());
    }

    #[test]
    fn trivial_constraints() {
        let c = IntConstraint::le(IntTerm::constant(0), IntTerm::constant(1));
        assert_eq!(c.normalize(), Normalized::True);
        let c = IntConstraint::le(IntTerm::constant(1), IntTerm::constant(0));
        assert_eq!(c.normalize(), Normalized::False);
        // m + 1 <= 0 is impossible for natural m
        let c = IntConstraint::le(&v(0) + &IntTerm::constant(1), IntTerm::zero());
        assert_eq!(c.normalize(), Normalized::False);
        // 2m = 1 has no integer solution
        let c = IntConstraint::eq(v(0).scale(2), IntTerm::constant(1));
        assert_eq!(c.normalize(), Normalized::False);
    }

    #[test]
    fn le_tightening_rounds_constant_up() {
        // 2m - 3 <= 0  ~>  m - 1 <= 0
        let c = IntConstraint::le(&v(0).scale(2) - &IntTerm::constant(3), IntTerm::zero());
        match c.normalize() {
            Normalized::Constraint(n) => {
                assert_eq!(n.kind, NormKind::Le);
                assert_eq!(n.poly, &v(0) - &IntTerm::constant(1));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn eq_sign_is_canonical() {
        let a = IntConstraint::eq(v(0), v(1)).normalize();
        let b = IntConstraint::eq(v(1), v(0)).normalize();
        assert_eq!(a, b);
    }
}
