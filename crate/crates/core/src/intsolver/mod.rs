//! Integer reasoning over polynomial constraints with natural atoms.
//!
//! Nonlinear monomials are linearized into fresh non-negative columns, so
//! infeasibility of the linear relaxation is a sound refutation. Models for
//! nonlinear stores are found by probing small values for the atoms that
//! occur in products.

pub mod simplex;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::hash::{DefaultHasher, Hash, Hasher};
use std::sync::Arc;

use crate::int::{Atom, IntConstraint, IntTerm, Monomial, NormConstraint, NormKind, Normalized};
use simplex::{solve_ilp, IlpResult, Row, RowKind};

pub type IntModel = BTreeMap<Atom, i64>;

/// Sorted, deduplicated set of normalized constraints. Cheap to clone.
#[derive(Clone, Debug)]
pub struct IntStore {
    cs: Arc<Vec<NormConstraint>>,
    hash: u64,
}

impl Default for IntStore {
    fn default() -> Self {
        IntStore::from_sorted(Vec::new())
    }
}

impl PartialEq for IntStore {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.cs, &other.cs) || (self.hash == other.hash && self.cs == other.cs)
    }
}

impl Eq for IntStore {}

impl Hash for IntStore {
    fn hash<H: Hasher>(&self, state: &mut H) {
        state.write_u64(self.hash);
    }
}

impl IntStore {
    pub fn new() -> Self {
        Self::default()
    }

    fn from_sorted(cs: Vec<NormConstraint>) -> Self {
        let mut h = DefaultHasher::new();
        cs.hash(&mut h);
        IntStore { cs: Arc::new(cs), hash: h.finish() }
    }

    pub fn constraints(&self) -> &[NormConstraint] {
        &self.cs
    }

    pub fn len(&self) -> usize {
        self.cs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cs.is_empty()
    }

    /// Adds constraints; `None` if one of them is trivially false.
    pub fn with<'a>(&self, cs: impl IntoIterator<Item = &'a IntConstraint>) -> Option<IntStore> {
        let mut v: Vec<NormConstraint> = self.cs.to_vec();
        let before = v.len();
        for c in cs {
            match c.normalize() {
                Normalized::True => {}
                Normalized::False => return None,
                Normalized::Constraint(n) => v.push(n),
            }
        }
        if v.len() == before {
            return Some(self.clone());
        }
        v.sort();
        v.dedup();
        Some(IntStore::from_sorted(v))
    }

    pub fn with_norm(&self, n: NormConstraint) -> IntStore {
        let mut v: Vec<NormConstraint> = self.cs.to_vec();
        if let Err(pos) = v.binary_search(&n) {
            v.insert(pos, n);
            IntStore::from_sorted(v)
        } else {
            self.clone()
        }
    }

    /// Applies an atom substitution and renormalizes; `None` on a trivially
    /// false result.
    pub fn substitute(&self, f: &impl Fn(Atom) -> Option<IntTerm>) -> Option<IntStore> {
        let mut v = Vec::with_capacity(self.cs.len());
        let mut changed = false;
        for c in self.cs.iter() {
            let p = c.poly.substitute(f);
            if p == c.poly {
                v.push(c.clone());
                continue;
            }
            changed = true;
            let n = match c.kind {
                NormKind::Eq => NormConstraint::eq_zero(p),
                NormKind::Le => NormConstraint::le_zero(p),
            };
            match n {
                Normalized::True => {}
                Normalized::False => return None,
                Normalized::Constraint(n) => v.push(n),
            }
        }
        if !changed {
            return Some(self.clone());
        }
        v.sort();
        v.dedup();
        Some(IntStore::from_sorted(v))
    }

    pub fn atoms(&self) -> BTreeSet<Atom> {
        self.cs.iter().flat_map(|c| c.poly.atoms().collect::<Vec<_>>()).collect()
    }

    pub fn holds(&self, f: &impl Fn(Atom) -> i64) -> bool {
        self.cs.iter().all(|c| c.holds(f))
    }
}

#[derive(Clone, Debug)]
pub struct IntSolverConfig {
    /// Largest value tried for atoms occurring in products.
    pub probe_bound: i64,
    /// Maximal number of probe assignments.
    pub combo_cap: usize,
    /// LP solves per branch-and-bound run.
    pub bb_budget: usize,
}

impl Default for IntSolverConfig {
    fn default() -> Self {
        IntSolverConfig { probe_bound: 16, combo_cap: 4096, bb_budget: 150 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SatResult {
    Sat(IntModel),
    Unsat,
    Unknown,
}

#[derive(Clone, Debug, Default)]
pub struct IntStats {
    pub queries: u64,
    pub cache_hits: u64,
    pub lp_runs: u64,
}

/// Entailment and satisfiability oracle with an instance-local cache.
#[derive(Debug, Default)]
pub struct IntSolver {
    pub config: IntSolverConfig,
    infeasible_cache: HashMap<(IntStore, Option<NormConstraint>), bool>,
    model_cache: HashMap<IntStore, Option<IntModel>>,
    pub stats: IntStats,
}

const CACHE_LIMIT: usize = 500_000;

struct Linear {
    cols: Vec<Monomial>,
    rows: Vec<Row>,
}

fn linearize<'a>(cs: impl IntoIterator<Item = &'a NormConstraint>) -> Linear {
    let mut index: HashMap<Monomial, usize> = HashMap::new();
    let mut cols = Vec::new();
    let mut rows = Vec::new();
    for c in cs {
        let mut coeffs = Vec::new();
        let mut rhs = 0i64;
        for (m, k) in c.poly.terms() {
            if m.is_one() {
                rhs = -k;
                continue;
            }
            let j = *index.entry(m.clone()).or_insert_with(|| {
                cols.push(m.clone());
                cols.len() - 1
            });
            coeffs.push((j, k));
        }
        let kind = match c.kind {
            NormKind::Eq => RowKind::Eq,
            NormKind::Le => RowKind::Le,
        };
        rows.push(Row { coeffs, kind, rhs });
    }
    Linear { cols, rows }
}

impl IntSolver {
    pub fn new(config: IntSolverConfig) -> Self {
        IntSolver { config, ..Default::default() }
    }

    fn check_limits(&mut self) {
        if self.infeasible_cache.len() > CACHE_LIMIT {
            self.infeasible_cache.clear();
        }
        if self.model_cache.len() > CACHE_LIMIT {
            self.model_cache.clear();
        }
    }

    /// True only if `store ∧ extra` has no integer solution.
    pub fn infeasible(&mut self, store: &IntStore, extra: Option<&NormConstraint>) -> bool {
        self.stats.queries += 1;
        let key = (store.clone(), extra.cloned());
        if let Some(r) = self.infeasible_cache.get(&key) {
            self.stats.cache_hits += 1;
            return *r;
        }
        self.check_limits();
        let r = match self.solve_linear(store, extra) {
            IlpResult::Infeasible => true,
            IlpResult::Feasible(_) | IlpResult::Unknown => false,
        };
        self.infeasible_cache.insert(key, r);
        r
    }

    fn solve_linear(&mut self, store: &IntStore, extra: Option<&NormConstraint>) -> IlpResult {
        self.stats.lp_runs += 1;
        let lin = linearize(store.constraints().iter().chain(extra));
        if lin.rows.iter().any(simplex::row_gcd_infeasible) {
            return IlpResult::Infeasible;
        }
        solve_ilp(lin.cols.len(), &lin.rows, self.config.bb_budget)
    }

    pub fn entails(&mut self, store: &IntStore, c: &IntConstraint) -> bool {
        match c.normalize() {
            Normalized::True => true,
            Normalized::False => self.infeasible(store, None),
            Normalized::Constraint(n) => self.entails_norm(store, &n),
        }
    }

    pub fn entails_norm(&mut self, store: &IntStore, n: &NormConstraint) -> bool {
        if store.constraints().binary_search(n).is_ok() {
            return true;
        }
        // poly >= 1, i.e. 1 - poly <= 0
        let above = NormConstraint::le_zero(&IntTerm::constant(1) - &n.poly);
        let refute = |s: &mut Self, neg: Normalized| match neg {
            Normalized::True => s.infeasible(store, None),
            Normalized::False => true,
            Normalized::Constraint(c) => s.infeasible(store, Some(&c)),
        };
        match n.kind {
            NormKind::Le => refute(self, above),
            NormKind::Eq => {
                // poly <= -1
                let below = NormConstraint::le_zero(&n.poly + &IntTerm::constant(1));
                refute(self, above) && refute(self, below)
            }
        }
    }

    /// Integer point of the linear relaxation; products are not checked.
    pub fn relaxed_model(&mut self, store: &IntStore) -> Option<IntModel> {
        if let Some(m) = self.model_cache.get(store) {
            return m.clone();
        }
        self.check_limits();
        let lin = linearize(store.constraints());
        self.stats.lp_runs += 1;
        let r = match solve_ilp(lin.cols.len(), &lin.rows, self.config.bb_budget) {
            IlpResult::Feasible(v) => Some(atom_values(&lin.cols, &v)),
            _ => None,
        };
        self.model_cache.insert(store.clone(), r.clone());
        r
    }

    /// A second relaxed model whose atom sum exceeds that of `base`, if any.
    pub fn diverse_model(&mut self, store: &IntStore, base: &IntModel) -> Option<IntModel> {
        let atoms = store.atoms();
        if atoms.is_empty() {
            return None;
        }
        let sum: i64 = atoms.iter().map(|a| base.get(a).copied().unwrap_or(0)).sum();
        // sum + 1 - Σ atoms <= 0
        let mut poly = IntTerm::constant(sum + 1);
        for a in &atoms {
            poly = &poly - &IntTerm::atom(*a);
        }
        let Normalized::Constraint(c) = NormConstraint::le_zero(poly) else {
            return None;
        };
        self.relaxed_model(&store.with_norm(c))
    }

    /// Full satisfiability including products.
    pub fn satisfiable(&mut self, store: &IntStore) -> SatResult {
        let lin = linearize(store.constraints());
        self.stats.lp_runs += 1;
        let v = match solve_ilp(lin.cols.len(), &lin.rows, self.config.bb_budget) {
            IlpResult::Infeasible => return SatResult::Unsat,
            IlpResult::Unknown => None,
            IlpResult::Feasible(v) => Some(v),
        };
        if let Some(v) = &v {
            let model = atom_values(&lin.cols, v);
            if store.holds(&|a| model.get(&a).copied().unwrap_or(0)) {
                return SatResult::Sat(model);
            }
        }
        let nonlinear: Vec<Atom> = store
            .constraints()
            .iter()
            .flat_map(|c| c.poly.terms().filter(|(m, _)| m.degree() >= 2).flat_map(|(m, _)| m.atoms().to_vec()).collect::<Vec<_>>())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        if nonlinear.is_empty() {
            return SatResult::Unknown;
        }
        for probe in probe_assignments(nonlinear.len(), self.config.probe_bound, self.config.combo_cap) {
            let fixed: BTreeMap<Atom, i64> = nonlinear.iter().copied().zip(probe.iter().copied()).collect();
            let Some(sub) = store.substitute(&|a| fixed.get(&a).map(|k| IntTerm::constant(*k))) else {
                continue;
            };
            let lin = linearize(sub.constraints());
            self.stats.lp_runs += 1;
            if let IlpResult::Feasible(v) = solve_ilp(lin.cols.len(), &lin.rows, self.config.bb_budget) {
                let mut model = atom_values(&lin.cols, &v);
                model.extend(fixed.iter().map(|(a, k)| (*a, *k)));
                if store.holds(&|a| model.get(&a).copied().unwrap_or(0)) {
                    return SatResult::Sat(model);
                }
            }
        }
        SatResult::Unknown
    }
}

fn atom_values(cols: &[Monomial], v: &[i64]) -> IntModel {
    cols.iter()
        .zip(v)
        .filter(|(m, _)| m.degree() == 1)
        .map(|(m, k)| (m.atoms()[0], *k))
        .collect()
}

/// Tuples over `0..=bound`, ordered by sum, at most `cap` of them.
fn probe_assignments(n: usize, bound: i64, cap: usize) -> Vec<Vec<i64>> {
    let mut b = bound.max(0);
    while b > 0 && ((b + 1) as f64).powi(n as i32) > cap as f64 {
        b -= 1;
    }
    let mut out = Vec::new();
    let mut cur = vec![0i64; n];
    loop {
        out.push(cur.clone());
        let mut i = 0;
        loop {
            if i == n {
                out.sort_by_key(|t| (t.iter().sum::<i64>(), t.clone()));
                out.truncate(cap);
                return out;
            }
            if cur[i] < b {
                cur[i] += 1;
                break;
            }
            cur[i] = 0;
            i += 1;
        }
    }
}
