//! Built-in models: the futures market and the two-state counterexample to
//! `AF AX atB`, together with the tables computed from them.

mod futures;
mod tables;
mod vardi;

pub use futures::{
    atleast6_formula, futures_formula, futures_model, futures_state, FuturesState, FUTURES_STATES,
};
pub use tables::{futures_tables, Table, TableError, TableRow, TABLE_NAMES};
pub use vardi::{vardi_model, vardi_reach_formula};
