//! Nielsen graph: node simplification, expansion and the search loop.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt::{self, Write as _};
use std::str::FromStr;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::decompose::{decompose, find_split, Probes};
use crate::int::{Atom, IntConstraint, IntTerm};
use crate::intsolver::{IntModel, IntSolver, IntSolverConfig, IntStore, SatResult};
use crate::parikh::{unsat_filter, FilterResult};
use crate::powers::{detect_chain, introduce};
use crate::rewrite::{lemma_constraints, rewrite_equation, StoreOracle};
use crate::rules::{candidates, look_ahead, match_rule, rule_priority, Branch, Category, Ctx, Effect, Orientation, RuleApplication};
use crate::subst::{Binding, BindingList, Model, Substitution};
use crate::term::{IntVar, StrVar, StringEquation, StringTerm, SymChar, Token, Vocab};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Strategy {
    IterDeep,
    Bfs,
}

impl FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "iterdeep" => Ok(Strategy::IterDeep),
            "bfs" => Ok(Strategy::Bfs),
            _ => Err(format!("unknown strategy `{s}`")),
        }
    }
}

#[derive(Clone, Debug)]
pub struct SearchConfig {
    pub timeout: Option<Duration>,
    /// Largest depth bound of iterative deepening, or depth limit of BFS.
    pub max_depth: usize,
    pub max_nodes: usize,
    pub initial_bound: usize,
    pub max_pattern_len: usize,
    pub dedup: bool,
    pub strategy: Strategy,
    pub seed: Option<u64>,
    pub powers: bool,
    pub decompose: bool,
    pub parikh: bool,
    pub int: IntSolverConfig,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            timeout: Some(Duration::from_secs(10)),
            max_depth: 256,
            max_nodes: 200_000,
            initial_bound: 4,
            max_pattern_len: 4,
            dedup: true,
            strategy: Strategy::IterDeep,
            seed: None,
            powers: true,
            decompose: true,
            parikh: true,
            int: IntSolverConfig::default(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Unextended,
    Extended,
    Satisfied,
    Inconsistent,
    /// No action applies, the integer solver gave up, or a model failed
    /// verification.
    Stuck,
}

impl Status {
    pub fn name(self) -> &'static str {
        match self {
            Status::Unextended => "unextended",
            Status::Extended => "extended",
            Status::Satisfied => "satisfied",
            Status::Inconsistent => "inconsistent",
            Status::Stuck => "stuck",
        }
    }
}

#[derive(Clone, Debug)]
pub struct Node {
    pub eqs: Vec<StringEquation>,
    pub store: IntStore,
    pub status: Status,
    pub parents: Vec<usize>,
    pub children: Vec<usize>,
    pub action: Option<String>,
    bindings: BindingList,
    weight: usize,
    int_model: Option<IntModel>,
}

#[derive(Clone, Debug)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    pub label: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UnknownReason {
    Budget,
    Stuck,
    IntSolver,
}

impl fmt::Display for UnknownReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            UnknownReason::Budget => "budget",
            UnknownReason::Stuck => "stuck",
            UnknownReason::IntSolver => "intsolver",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Sat(Model),
    Unsat,
    Unknown(UnknownReason),
}

impl Verdict {
    pub fn name(&self) -> &'static str {
        match self {
            Verdict::Sat(_) => "sat",
            Verdict::Unsat => "unsat",
            Verdict::Unknown(_) => "unknown",
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Stats {
    pub nodes_created: u64,
    pub nodes_expanded: u64,
    pub dedup_hits: u64,
    pub rules: BTreeMap<&'static str, u64>,
    pub powers_introduced: u64,
    pub decompositions: u64,
    pub parikh_refutations: u64,
    pub iterations: u64,
    pub model_rejections: u64,
    pub int_queries: u64,
    pub wall: Duration,
}

impl Stats {
    /// Everything except wall time, one `key value` pair per line.
    pub fn report(&self, unknown: Option<UnknownReason>) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "nodes-created {}", self.nodes_created);
        let _ = writeln!(s, "nodes-expanded {}", self.nodes_expanded);
        let _ = writeln!(s, "dedup-hits {}", self.dedup_hits);
        for c in Category::ALL {
            let _ = writeln!(s, "rules-{} {}", c.name(), self.rules.get(c.name()).copied().unwrap_or(0));
        }
        let _ = writeln!(s, "powers-introduced {}", self.powers_introduced);
        let _ = writeln!(s, "decompositions {}", self.decompositions);
        let _ = writeln!(s, "parikh-refutations {}", self.parikh_refutations);
        let _ = writeln!(s, "iterations {}", self.iterations);
        let _ = writeln!(s, "model-rejections {}", self.model_rejections);
        let _ = writeln!(s, "int-queries {}", self.int_queries);
        if let Some(r) = unknown {
            let _ = writeln!(s, "unknown-reason {r}");
        }
        s
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TraceEvent {
    Expanded { node: usize, action: String, children: Vec<usize> },
    /// Equations of the node at the moment a pattern refuted one of them.
    Parikh { node: usize, pattern: String, equations: Vec<String> },
    Satisfied { node: usize },
}

#[derive(Clone, Debug)]
pub struct Graph {
    pub nodes: Vec<Node>,
    pub edges: Vec<Edge>,
    pub vocab: Vocab,
}

impl Graph {
    pub fn to_dot(&self) -> String {
        let mut s = String::from("digraph nielsen {\n  node [shape=box, fontname=monospace];\n");
        for (i, n) in self.nodes.iter().enumerate() {
            let mut label = String::new();
            if n.eqs.is_empty() {
                label.push_str("ε = ε\\l");
            }
            for e in &n.eqs {
                let _ = write!(label, "{}\\l", escape(&e.display(&self.vocab).to_string()));
            }
            for c in n.store.constraints().iter().filter(|c| c.poly.atoms().any(|a| matches!(a, Atom::Int(_)))).take(6) {
                let _ = write!(label, "{}\\l", escape(&c.display(&self.vocab).to_string()));
            }
            let _ = write!(label, "[{}]", n.status.name());
            let _ = writeln!(s, "  n{i} [label=\"{label}\"];");
        }
        for e in &self.edges {
            let _ = writeln!(s, "  n{} -> n{} [label=\"{}\"];", e.from, e.to, escape(&e.label));
        }
        s.push_str("}\n");
        s
    }
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

#[derive(Clone, Debug)]
pub struct Outcome {
    pub verdict: Verdict,
    pub stats: Stats,
    pub graph: Graph,
    pub trace: Vec<TraceEvent>,
}

/// Decides a conjunction of equations. `vocab` must hold the names used by
/// `eqs`; it is returned inside the graph.
pub fn solve(eqs: &[StringEquation], mut vocab: Vocab, config: &SearchConfig) -> Outcome {
    for e in eqs {
        for side in [&e.lhs, &e.rhs] {
            side.visit(&mut |t| {
                if let Token::Char(c) = t {
                    vocab.add_char(*c);
                }
            });
        }
    }
    let mut s = Search {
        config,
        solver: IntSolver::new(config.int.clone()),
        vocab,
        nodes: Vec::new(),
        edges: Vec::new(),
        index: HashMap::new(),
        stats: Stats::default(),
        trace: Vec::new(),
        rng: config.seed.map(ChaCha8Rng::seed_from_u64),
        start: Instant::now(),
        input: eqs.to_vec(),
        found: None,
        int_unknown: false,
        budget_hit: false,
    };
    let verdict = s.run();
    s.stats.wall = s.start.elapsed();
    s.stats.int_queries = s.solver.stats.queries;
    Outcome { verdict, stats: s.stats, graph: Graph { nodes: s.nodes, edges: s.edges, vocab: s.vocab }, trace: s.trace }
}

const SIMPL_ROUNDS: usize = 128;

struct Search<'c> {
    config: &'c SearchConfig,
    solver: IntSolver,
    vocab: Vocab,
    nodes: Vec<Node>,
    edges: Vec<Edge>,
    index: HashMap<(Vec<StringEquation>, IntStore), usize>,
    stats: Stats,
    trace: Vec<TraceEvent>,
    rng: Option<ChaCha8Rng>,
    start: Instant,
    input: Vec<StringEquation>,
    found: Option<Model>,
    int_unknown: bool,
    budget_hit: bool,
}

struct Simplified {
    eqs: Vec<StringEquation>,
    store: IntStore,
    bindings: BindingList,
    status: Status,
    int_model: Option<IntModel>,
}

enum Step {
    None,
    Conflict,
    Replace(usize, Vec<StringEquation>, Vec<IntConstraint>),
    Bind(Branch),
}

struct Action {
    name: String,
    /// Equation removed from the node before applying each branch.
    replace: Option<usize>,
    branches: Vec<Branch>,
}

fn weight(eqs: &[StringEquation]) -> usize {
    eqs.iter().map(|e| e.lhs.symbolic_length() + e.rhs.symbolic_length()).sum()
}

fn subst_atom(s: &Substitution, a: Atom) -> Option<IntTerm> {
    let t = IntTerm::atom(a);
    let r = s.apply_int(&t);
    (r != t).then_some(r)
}

/// Applies a branch to a whole node. `None` if a constraint becomes false.
fn apply_branch(eqs: &[StringEquation], store: &IntStore, bindings: &BindingList, b: &Branch) -> Option<(Vec<StringEquation>, IntStore, BindingList)> {
    let mut eqs: Vec<StringEquation> = eqs.iter().chain(&b.equations).cloned().collect();
    let mut cs = b.constraints.clone();
    let mut store = store.clone();
    let mut bl = bindings.clone();
    for bind in &b.bindings {
        let s = Substitution::from_binding(bind);
        eqs = eqs.iter().map(|e| s.apply_equation(e)).collect();
        cs = cs.iter().map(|c| s.apply_constraint(c)).collect();
        store = store.substitute(&|a| subst_atom(&s, a))?;
        bl = bl.push(bind.clone());
    }
    let store = store.with(cs.iter())?;
    Some((eqs, store, bl))
}

fn branch_label(b: &Branch, v: &Vocab) -> String {
    let mut parts: Vec<String> = Vec::new();
    for bind in &b.bindings {
        parts.push(Substitution::from_binding(bind).display(v).to_string());
    }
    for e in &b.equations {
        parts.push(e.display(v).to_string());
    }
    for c in &b.constraints {
        parts.push(c.display(v).to_string());
    }
    parts.join(", ")
}

/// Renames variables, symbolic characters and integer variables in order
/// of first occurrence.
fn canonical(eqs: &[StringEquation], store: &IntStore) -> (Vec<StringEquation>, IntStore) {
    let mut vars: Vec<StrVar> = Vec::new();
    let mut syms: Vec<SymChar> = Vec::new();
    let mut ints: Vec<IntVar> = Vec::new();
    fn note<T: PartialEq>(v: &mut Vec<T>, x: T) {
        if !v.contains(&x) {
            v.push(x);
        }
    }
    let atom = |a: Atom, vars: &mut Vec<StrVar>, ints: &mut Vec<IntVar>| match a {
        Atom::Len(x) => note(vars, x),
        Atom::Int(m) => note(ints, m),
    };
    for e in eqs {
        for side in [&e.lhs, &e.rhs] {
            side.visit(&mut |t| match t {
                Token::Var(x) => note(&mut vars, *x),
                Token::Sym(o) => note(&mut syms, *o),
                _ => {}
            });
            for a in side.int_atoms() {
                atom(a, &mut vars, &mut ints);
            }
        }
    }
    for a in store.atoms() {
        atom(a, &mut vars, &mut ints);
    }
    let mut s = Substitution::new();
    for (i, x) in vars.iter().enumerate() {
        s.strings.insert(*x, StringTerm::new(vec![Token::Var(StrVar(i as u32))]));
    }
    for (i, o) in syms.iter().enumerate() {
        s.chars.insert(*o, Token::Sym(SymChar(i as u32)));
    }
    for (i, m) in ints.iter().enumerate() {
        s.ints.insert(*m, IntTerm::var(IntVar(i as u32)));
    }
    let eqs = eqs.iter().map(|e| s.apply_equation(e)).collect();
    let store = store.substitute(&|a| subst_atom(&s, a)).unwrap_or_default();
    (eqs, store)
}

impl Search<'_> {
    fn out_of_budget(&mut self) -> bool {
        if self.budget_hit {
            return true;
        }
        let over_time = self.config.timeout.is_some_and(|t| self.start.elapsed() >= t);
        if over_time || self.stats.nodes_created as usize >= self.config.max_nodes {
            self.budget_hit = true;
        }
        self.budget_hit
    }

    fn run(&mut self) -> Verdict {
        let root = self.make_node(None, String::new(), self.input.clone(), IntStore::new(), BindingList::new());
        match self.config.strategy {
            Strategy::IterDeep => self.iterative_deepening(root),
            Strategy::Bfs => self.bfs(root),
        }
        if let Some(m) = self.found.take() {
            return Verdict::Sat(m);
        }
        if self.nodes[root].status == Status::Inconsistent {
            return Verdict::Unsat;
        }
        Verdict::Unknown(if self.budget_hit {
            UnknownReason::Budget
        } else if self.int_unknown {
            UnknownReason::IntSolver
        } else {
            UnknownReason::Stuck
        })
    }

    fn done(&self, root: usize) -> bool {
        self.found.is_some() || self.nodes[root].status == Status::Inconsistent
    }

    fn iterative_deepening(&mut self, root: usize) {
        let mut bound = self.config.initial_bound.max(1).min(self.config.max_depth);
        loop {
            self.stats.iterations += 1;
            let mut seen = HashMap::new();
            let mut cut = false;
            self.dfs(root, 0, bound, &mut seen, &mut cut);
            if self.done(root) || self.out_of_budget() || !cut {
                return;
            }
            if bound >= self.config.max_depth {
                self.budget_hit = true;
                return;
            }
            bound = (bound * 2).min(self.config.max_depth);
        }
    }

    /// Returns true when the search must stop.
    fn dfs(&mut self, id: usize, cost: usize, bound: usize, seen: &mut HashMap<usize, usize>, cut: &mut bool) -> bool {
        if self.found.is_some() || self.out_of_budget() {
            return true;
        }
        if seen.get(&id).is_some_and(|&c| c <= cost) {
            return false;
        }
        seen.insert(id, cost);
        match self.nodes[id].status {
            Status::Satisfied | Status::Inconsistent | Status::Stuck => return false,
            Status::Unextended => {
                if cost > bound {
                    *cut = true;
                    return false;
                }
                self.expand(id);
                if self.found.is_some() {
                    return true;
                }
            }
            Status::Extended => {}
        }
        let children = self.nodes[id].children.clone();
        for c in children {
            if self.nodes[id].status == Status::Inconsistent {
                break;
            }
            let step = usize::from(self.nodes[c].weight >= self.nodes[id].weight);
            if self.dfs(c, cost + step, bound, seen, cut) {
                return true;
            }
        }
        false
    }

    fn bfs(&mut self, root: usize) {
        let mut queue = VecDeque::from([(root, 0usize)]);
        let mut queued = BTreeSet::from([root]);
        while let Some((id, depth)) = queue.pop_front() {
            if self.done(root) || self.out_of_budget() {
                return;
            }
            if self.nodes[id].status != Status::Unextended {
                continue;
            }
            if depth >= self.config.max_depth {
                self.budget_hit = true;
                continue;
            }
            self.expand(id);
            for c in self.nodes[id].children.clone() {
                if queued.insert(c) {
                    queue.push_back((c, depth + 1));
                }
            }
        }
    }

    fn make_node(&mut self, parent: Option<usize>, label: String, eqs: Vec<StringEquation>, store: IntStore, bindings: BindingList) -> usize {
        let id = self.nodes.len();
        let s = self.simpl(eqs, store, bindings, id);
        self.stats.nodes_created += 1;
        let key = (self.config.dedup && s.status == Status::Unextended).then(|| canonical(&s.eqs, &s.store));
        if let Some(k) = &key {
            if let Some(&j) = self.index.get(k) {
                self.stats.dedup_hits += 1;
                if let Some(p) = parent {
                    self.link(p, j, label);
                }
                return j;
            }
        }
        let weight = weight(&s.eqs);
        self.nodes.push(Node {
            eqs: s.eqs,
            store: s.store,
            status: s.status,
            parents: Vec::new(),
            children: Vec::new(),
            action: None,
            bindings: s.bindings,
            weight,
            int_model: s.int_model,
        });
        if let Some(k) = key {
            self.index.insert(k, id);
        }
        if let Some(p) = parent {
            self.link(p, id, label);
        }
        if s.status == Status::Satisfied {
            self.trace.push(TraceEvent::Satisfied { node: id });
            match self.extract_model(id) {
                Some(m) => self.found = Some(m),
                None => {
                    log::warn!("node {id}: extracted model does not verify");
                    self.stats.model_rejections += 1;
                    self.nodes[id].status = Status::Stuck;
                }
            }
        }
        id
    }

    fn link(&mut self, from: usize, to: usize, label: String) {
        self.nodes[from].children.push(to);
        self.nodes[to].parents.push(from);
        self.edges.push(Edge { from, to, label });
    }

    fn simpl(&mut self, eqs: Vec<StringEquation>, store: IntStore, bindings: BindingList, id: usize) -> Simplified {
        let mut eqs = eqs;
        let mut store = store;
        let mut bindings = bindings;
        let inconsistent = |eqs, store, bindings| Simplified { eqs, store, bindings, status: Status::Inconsistent, int_model: None };
        for _ in 0..SIMPL_ROUNDS {
            let Some(s) = store.with(lemma_constraints(&eqs).iter()) else {
                return inconsistent(eqs, store, bindings);
            };
            let mut changed = s != store;
            store = s;
            let mut next: Vec<StringEquation> = Vec::with_capacity(eqs.len());
            for e in &eqs {
                let (r, _) = rewrite_equation(e, &mut StoreOracle { solver: &mut self.solver, store: &store });
                changed |= r != *e;
                if r.is_trivial() {
                    changed = true;
                } else if !next.contains(&r) {
                    next.push(r);
                } else {
                    changed = true;
                }
            }
            eqs = next;
            match self.deterministic_step(&eqs, &store) {
                Step::Conflict => return inconsistent(eqs, store, bindings),
                Step::Replace(i, new, cs) => {
                    eqs.splice(i..i + 1, new);
                    let Some(s) = store.with(cs.iter()) else {
                        return inconsistent(eqs, store, bindings);
                    };
                    store = s;
                    continue;
                }
                Step::Bind(b) => {
                    let Some((e, s, bl)) = apply_branch(&eqs, &store, &bindings, &b) else {
                        return inconsistent(eqs, store, bindings);
                    };
                    (eqs, store, bindings) = (e, s, bl);
                    continue;
                }
                Step::None => {}
            }
            if let Some(b) = self.propagate(&eqs, &store) {
                let Some((e, s, bl)) = apply_branch(&eqs, &store, &bindings, &b) else {
                    return inconsistent(eqs, store, bindings);
                };
                (eqs, store, bindings) = (e, s, bl);
                continue;
            }
            if self.config.parikh {
                for e in &eqs {
                    if let FilterResult::Refuted(w) = unsat_filter(e, self.config.max_pattern_len) {
                        self.stats.parikh_refutations += 1;
                        let equations = eqs.iter().map(|e| e.display(&self.vocab).to_string()).collect();
                        self.trace.push(TraceEvent::Parikh { node: id, pattern: w.iter().collect(), equations });
                        return inconsistent(eqs, store, bindings);
                    }
                }
            }
            if self.solver.infeasible(&store, None) {
                return inconsistent(eqs, store, bindings);
            }
            if !changed {
                break;
            }
        }
        if eqs.is_empty() {
            return match self.solver.satisfiable(&store) {
                SatResult::Sat(m) => Simplified { eqs, store, bindings, status: Status::Satisfied, int_model: Some(m) },
                SatResult::Unsat => inconsistent(eqs, store, bindings),
                SatResult::Unknown => {
                    self.int_unknown = true;
                    Simplified { eqs, store, bindings, status: Status::Stuck, int_model: None }
                }
            };
        }
        Simplified { eqs, store, bindings, status: Status::Unextended, int_model: None }
    }

    /// First conflict, replacement or single deterministic binding.
    fn deterministic_step(&mut self, eqs: &[StringEquation], store: &IntStore) -> Step {
        let mut ctx = Ctx { solver: &mut self.solver, store, vocab: &mut self.vocab };
        for (i, e) in eqs.iter().enumerate() {
            for o in Orientation::ALL {
                let cp = ctx.vocab.checkpoint();
                let Some(app) = match_rule(e, i, o, &mut ctx) else { continue };
                match app.effect {
                    Effect::Conflict => return Step::Conflict,
                    Effect::Replace(new, cs) => {
                        let noop = new.len() == 1 && new[0] == *e && store.with(cs.iter()).as_ref() == Some(store);
                        if !noop {
                            return Step::Replace(i, new, cs);
                        }
                        ctx.vocab.rollback(cp);
                    }
                    Effect::Generate(mut bs) if app.category == Category::Deterministic && bs.len() == 1 => {
                        return Step::Bind(bs.pop().expect("one branch"));
                    }
                    Effect::Generate(_) => ctx.vocab.rollback(cp),
                }
            }
        }
        Step::None
    }

    /// `len(x) ∈ {0, 1}` and constant exponents entailed by the store.
    fn propagate(&mut self, eqs: &[StringEquation], store: &IntStore) -> Option<Branch> {
        let probes = Probes::new(store, &mut self.solver)?;
        let mut vars = BTreeSet::new();
        let mut ints = BTreeSet::new();
        for e in eqs {
            vars.extend(e.vars());
            for side in [&e.lhs, &e.rhs] {
                for a in side.int_atoms() {
                    if let Atom::Int(m) = a {
                        ints.insert(m);
                    }
                }
            }
        }
        for x in vars {
            let Some(v) = probes.agreed(&IntTerm::len(x)) else { continue };
            if v > 1 || !self.solver.entails(store, &IntConstraint::eq(IntTerm::len(x), IntTerm::constant(v))) {
                continue;
            }
            let image = if v == 0 { StringTerm::empty() } else { StringTerm::new(vec![Token::Sym(self.vocab.fresh_sym())]) };
            return Some(Branch { bindings: vec![Binding::Str(x, image)], ..Default::default() });
        }
        for m in ints {
            let Some(v) = probes.agreed(&IntTerm::var(m)) else { continue };
            if self.solver.entails(store, &IntConstraint::eq(IntTerm::var(m), IntTerm::constant(v))) {
                return Some(Branch { bindings: vec![Binding::Int(m, IntTerm::constant(v))], ..Default::default() });
            }
        }
        None
    }

    fn expand(&mut self, id: usize) {
        self.stats.nodes_expanded += 1;
        let eqs = self.nodes[id].eqs.clone();
        let store = self.nodes[id].store.clone();
        let bindings = self.nodes[id].bindings.clone();
        let Some(action) = self.choose_action(&eqs, &store) else {
            self.nodes[id].status = Status::Stuck;
            return;
        };
        log::debug!("node {id}: {} with {} branches", action.name, action.branches.len());
        let mut base = eqs.clone();
        if let Some(i) = action.replace {
            base.remove(i);
        }
        self.nodes[id].status = Status::Extended;
        self.nodes[id].action = Some(action.name.clone());
        let mut kids = Vec::new();
        for b in &action.branches {
            let label = branch_label(b, &self.vocab);
            match apply_branch(&base, &store, &bindings, b) {
                Some((e, s, bl)) => kids.push(self.make_node(Some(id), label, e, s, bl)),
                None => {
                    let child = self.nodes.len();
                    self.nodes.push(Node {
                        eqs: Vec::new(),
                        store: IntStore::new(),
                        status: Status::Inconsistent,
                        parents: Vec::new(),
                        children: Vec::new(),
                        action: None,
                        bindings: BindingList::new(),
                        weight: 0,
                        int_model: None,
                    });
                    self.stats.nodes_created += 1;
                    self.link(id, child, label);
                    kids.push(child);
                }
            }
            if self.found.is_some() {
                break;
            }
        }
        self.trace.push(TraceEvent::Expanded { node: id, action: action.name, children: kids });
        self.propagate_inconsistency(id);
    }

    fn propagate_inconsistency(&mut self, id: usize) {
        let mut work = vec![id];
        while let Some(n) = work.pop() {
            let node = &self.nodes[n];
            if node.status != Status::Extended || !node.children.iter().all(|&c| self.nodes[c].status == Status::Inconsistent) {
                continue;
            }
            self.nodes[n].status = Status::Inconsistent;
            work.extend(self.nodes[n].parents.iter().copied());
        }
    }

    fn choose_action(&mut self, eqs: &[StringEquation], store: &IntStore) -> Option<Action> {
        if self.config.powers {
            if let Some(chain) = detect_chain(eqs) {
                let branches = introduce(&chain, store, &mut self.solver, &mut self.vocab);
                self.stats.powers_introduced += 1;
                *self.stats.rules.entry("power").or_default() += 1;
                return Some(Action { name: format!("power introduction over {} equation(s)", chain.links.len()), replace: None, branches });
            }
        }
        let cp = self.vocab.checkpoint();
        let apps = {
            let mut ctx = Ctx { solver: &mut self.solver, store, vocab: &mut self.vocab };
            candidates(eqs, &mut ctx)
        };
        self.vocab.rollback(cp);
        let single: Vec<RuleApplication> = apps.iter().filter(|a| a.look_ahead && a.effect.branch_count() == 1).cloned().collect();
        if let Some(a) = self.pick(single) {
            return Some(self.instantiate(eqs, store, &a));
        }
        if self.config.decompose {
            if let Some(a) = self.decompose_action(eqs, store) {
                return Some(a);
            }
        }
        let a = self.pick(apps)?;
        Some(self.instantiate(eqs, store, &a))
    }

    fn pick(&mut self, apps: Vec<RuleApplication>) -> Option<RuleApplication> {
        match self.rng.as_mut() {
            Some(rng) => {
                let mut f = |n: usize| rng.random_range(0..n);
                rule_priority(apps, Some(&mut f))
            }
            None => rule_priority(apps, None),
        }
    }

    /// Recomputes the chosen application so that only its fresh names are
    /// allocated.
    fn instantiate(&mut self, eqs: &[StringEquation], store: &IntStore, chosen: &RuleApplication) -> Action {
        let mut ctx = Ctx { solver: &mut self.solver, store, vocab: &mut self.vocab };
        let i = chosen.eq_index;
        let app = match_rule(&eqs[i], i, chosen.orientation, &mut ctx).map(|a| look_ahead(eqs, a, &mut ctx)).expect("chosen rule still applies");
        *self.stats.rules.entry(app.category.name()).or_default() += 1;
        let name = format!("{} {} on equation {}{}", app.rule, app.category.name(), i, if app.orientation.is_reversed() { " (suffix)" } else { "" });
        match app.effect {
            Effect::Conflict => Action { name, replace: None, branches: Vec::new() },
            Effect::Replace(new, cs) => Action { name, replace: Some(i), branches: vec![Branch { bindings: Vec::new(), constraints: cs, equations: new }] },
            Effect::Generate(branches) => Action { name, replace: None, branches },
        }
    }

    fn decompose_action(&mut self, eqs: &[StringEquation], store: &IntStore) -> Option<Action> {
        let probes = Probes::new(store, &mut self.solver)?;
        let mut order: Vec<usize> = (0..eqs.len()).collect();
        order.sort_by_key(|&i| std::cmp::Reverse(eqs[i].lhs.symbolic_length() + eqs[i].rhs.symbolic_length()));
        for i in order {
            if let Some(split) = find_split(&eqs[i], store, &mut self.solver, &probes) {
                let parts = decompose(&eqs[i], split, &mut self.vocab);
                self.stats.decompositions += 1;
                *self.stats.rules.entry("decompose").or_default() += 1;
                return Some(Action {
                    name: format!("decompose equation {i} at ({}, {}) with d = {}", split.i, split.j, split.d),
                    replace: Some(i),
                    branches: vec![Branch { bindings: Vec::new(), constraints: Vec::new(), equations: parts }],
                });
            }
        }
        None
    }

    /// Composes the bindings on the path to a satisfied node and checks the
    /// result against the input.
    fn extract_model(&self, id: usize) -> Option<Model> {
        let n = &self.nodes[id];
        let least = self.vocab.least_char();
        let ints = n.int_model.clone().unwrap_or_default();
        let mut m = Model::new();
        let mut bound = BTreeSet::new();
        let mut residual = BTreeSet::new();
        for b in n.bindings.iter() {
            match b {
                Binding::Str(x, t) => {
                    bound.insert(*x);
                    residual.extend(t.vars());
                }
                Binding::Sym(..) | Binding::Int(..) => {}
            }
        }
        for e in &self.input {
            residual.extend(e.vars());
        }
        for (a, v) in &ints {
            if let Atom::Int(k) = a {
                m.ints.insert(*k, *v);
            }
        }
        for x in residual.difference(&bound) {
            let len = ints.get(&Atom::Len(*x)).copied().unwrap_or(0).max(0) as usize;
            m.strings.insert(*x, std::iter::repeat_n(least, len).collect());
        }
        for b in n.bindings.iter() {
            match b {
                Binding::Str(x, t) => {
                    let s = m.eval_term(t, least).ok()?;
                    m.strings.insert(*x, s);
                }
                Binding::Sym(o, t) => {
                    if let Token::Char(c) = t {
                        m.chars.insert(*o, *c);
                    }
                }
                Binding::Int(k, t) => {
                    let v = t.eval(&|a| m.int_value(a));
                    m.ints.insert(*k, v as i64);
                }
            }
        }
        let mut out = Model::new();
        for e in &self.input {
            for x in e.vars() {
                out.strings.insert(x, m.strings.get(&x).cloned().unwrap_or_default());
            }
        }
        out.satisfies_all(&self.input, least).then_some(out)
    }
}
