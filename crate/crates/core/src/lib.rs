//! Model checking for the quantitative μ-calculus over finite probabilistic
//! game structures.

pub mod compile;
pub mod eval;
pub mod examples;
pub mod formula;
pub mod game;
pub mod io;
pub mod model;
pub mod oracle;
pub mod strategy;

pub use compile::{CompileError, NodeId};
pub use eval::{
    evaluate, evaluate_fix, evaluate_resolved, evaluate_with_strategies, unfold_with_strategies, ConstantStrategy,
    EvalConfig, EvalError, EvalReport, FnStrategy, Memoriless, PathStep, PathStrategy,
};
pub use formula::{parse, reduce, FixKind, Formula};
pub use game::{estimate, expand_tree, play, Game, PlayoutResult};
pub use model::{pre_expectation, Expectation, Model, ModelError, Predicate, Row, StateSpace, Transition, Valuation};
pub use strategy::{specialize, synthesize, verify_strategy, MemorilessStrategy, Sides};
