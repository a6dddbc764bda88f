//! Rows over the initial share value `v = 0..=10` at `p = 0.5`, `c = 10`.

use serde::Serialize;
use thiserror::Error;

use super::futures::{atleast6_formula, futures_formula, futures_model, futures_state};
use crate::eval::{evaluate, EvalConfig, EvalError};
use crate::formula::{reduce, ReduceError};
use crate::model::{pre_expectation, Expectation, Model, ModelError};
use crate::strategy::{specialize_symbols, StrategyError};

pub const TABLE_NAMES: [&str; 4] = ["optimal", "yield", "onemonth", "probability"];

#[derive(Debug, Error)]
pub enum TableError {
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Reduce(#[from] ReduceError),
    #[error(transparent)]
    Strategy(#[from] StrategyError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("evaluation for table `{0}` did not converge")]
    NotConverged(&'static str),
    #[error("unknown table `{0}`")]
    Unknown(String),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TableRow {
    pub label: String,
    /// Unrounded values, already scaled for display.
    pub values: Vec<f64>,
}

impl TableRow {
    /// Values rounded half-up to two decimals.
    pub fn rounded(&self) -> Vec<f64> {
        self.values.iter().map(|x| (x * 100.0).round() / 100.0).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table {
    pub name: &'static str,
    pub title: &'static str,
    pub rows: Vec<TableRow>,
}

impl Table {
    /// Comma-separated, a header `row,v0,...,v10` and one line per row,
    /// values to two decimals.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("row");
        for v in 0..=10 {
            out.push_str(&format!(",v{v}"));
        }
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.label);
            for x in row.rounded() {
                out.push_str(&format!(",{x:.2}"));
            }
            out.push('\n');
        }
        out
    }

    /// One JSON record per row, with rounded values.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "table": self.name,
            "title": self.title,
            "rows": self.rows.iter().map(|r| serde_json::json!({
                "label": r.label,
                "values": r.rounded(),
            })).collect::<Vec<_>>(),
        })
    }
}

fn row_of(e: &Expectation, scale: f64) -> Vec<f64> {
    (0..=10).map(|v| scale * e.get(futures_state(v, 5, 10))).collect()
}

struct Ctx {
    model: Model,
    cfg: EvalConfig,
}

impl Ctx {
    fn value(&self, text_max: Option<&str>, payoff: &str, name: &'static str) -> Result<Expectation, TableError> {
        let full = match payoff {
            "Sold" => futures_formula(),
            _ => atleast6_formula(),
        };
        let mut phi = reduce(&full, &self.model.valuation)?;
        if let Some(pred) = text_max {
            phi = specialize_symbols(&phi, None, Some(&[pred.to_string()]))?;
        }
        let r = evaluate(&phi, &self.model, &self.cfg)?;
        if !r.converged {
            return Err(TableError::NotConverged(name));
        }
        Ok(r.result)
    }

    fn table(&self, name: &str) -> Result<Table, TableError> {
        Ok(match name {
            "optimal" => Table {
                name: "optimal",
                title: "optimal expected sale",
                rows: vec![TableRow {
                    label: "optimal".into(),
                    values: row_of(&self.value(None, "Sold", "optimal")?, 10.0),
                }],
            },
            "yield" => Table {
                name: "yield",
                title: "expected sale reserving only when v >= c",
                rows: vec![TableRow {
                    label: "v>=c".into(),
                    values: row_of(&self.value(Some("vGeC"), "Sold", "yield")?, 10.0),
                }],
            },
            "onemonth" => {
                let v = &self.model.valuation;
                let month = v.transition("month")?;
                let sold = v.expectation("Sold")?;
                let values = (0..=10)
                    .map(|x| pre_expectation(month, futures_state(x, 5, 10), sold).map(|y| 10.0 * y))
                    .collect::<Result<_, _>>()?;
                Table {
                    name: "onemonth",
                    title: "expected share value in one month",
                    rows: vec![TableRow {
                        label: "one month".into(),
                        values,
                    }],
                }
            }
            "probability" => Table {
                name: "probability",
                title: "probability of achieving v >= 6",
                rows: vec![
                    TableRow {
                        label: "optimal".into(),
                        values: row_of(&self.value(None, "atLeast6", "probability")?, 1.0),
                    },
                    TableRow {
                        label: "intuitive".into(),
                        values: row_of(&self.value(Some("intuitive"), "atLeast6", "probability")?, 1.0),
                    },
                ],
            },
            other => return Err(TableError::Unknown(other.to_string())),
        })
    }
}

/// Computes the named tables (all of [`TABLE_NAMES`] when `names` is empty).
pub fn futures_tables(cfg: &EvalConfig, names: &[&str]) -> Result<Vec<Table>, TableError> {
    let ctx = Ctx {
        model: futures_model(),
        cfg: *cfg,
    };
    let names = if names.is_empty() { &TABLE_NAMES[..] } else { names };
    names.iter().map(|n| ctx.table(n)).collect()
}
