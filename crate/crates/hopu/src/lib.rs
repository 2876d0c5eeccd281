//! A logic programming engine for a higher-order hereditary Harrop
//! language, organized around higher-order pattern unification over
//! explicit-substitution (suspension calculus) lambda terms.
//!
//! The crate exposes:
//!
//! * a term kernel with destructive binding and a trail ([`term`]),
//! * head normalization and full normalization ([`normalize`]),
//! * higher-order pattern unification with residual constraints
//!   ([`unify`]),
//! * polymorphic types, type unification and the static analyses that
//!   trim runtime type annotations ([`ty`], [`typecheck`]),
//! * a concrete syntax front end with clause elaboration, disjunction
//!   elimination and de Bruijn encoding ([`lexer`], [`parser`],
//!   [`ast`], [`compile`]),
//! * the depth-first backtracking interpreter ([`engine`]),
//! * and an interactive/batch driver ([`cli`]).
//!
//! See the `examples/` directory for one runnable example per major
//! capability, and the `corpus/` directory for the bundled programs.

pub mod ast;
pub mod cli;
pub mod compile;
pub mod engine;
pub mod lexer;
pub mod normalize;
pub mod parser;
pub mod pretty;
pub mod term;
pub mod ty;
pub mod typecheck;
pub mod unify;

pub use engine::{Answer, Config, Engine, SolveLimits, SolveOutcome, Solver};
pub use normalize::{full_normalize, head_norm, Nf};
pub use term::{Store, TermId};
