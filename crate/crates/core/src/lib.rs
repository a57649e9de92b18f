//! Word equation solver.

pub mod error;
pub mod int;
pub mod intsolver;
pub mod notation;
pub mod subst;
pub mod term;
pub mod rewrite;
pub mod parikh;
pub mod powers;
pub mod rules;
pub mod decompose;
pub mod oracle;
pub mod graph;
pub mod smtlib;
pub mod harness;

pub use error::{HarnessError, ParseError, TermError};
pub use graph::{solve, Outcome, SearchConfig, Stats, Strategy, UnknownReason, Verdict};
pub use int::{Atom, IntConstraint, IntTerm};
pub use intsolver::{IntSolver, IntSolverConfig, IntStore};
pub use subst::{Binding, Model, Substitution};
pub use term::{IntVar, StrVar, StringEquation, StringTerm, SymChar, Token, Vocab};
