//! The `qmu-model/1` JSON model format.
//!
//! ```json
//! {
//!   "schema": "qmu-model/1",
//!   "states": ["A", "B"],
//!   "transitions": {
//!     "k": [
//!       { "to": [[0, 0.5], [1, 0.5]], "payoff_weight": 0.0 },
//!       { "to": [[0, 1.0]], "payoff_weight": 0.0 }
//!     ]
//!   },
//!   "expectations": { "atB": [0.0, 1.0] },
//!   "predicates": { "atA": [true, false] },
//!   "transition_sets": {}
//! }
//! ```
//!
//! Numbers are written in shortest round-trip form, so a model read back
//! from its own output is bit-identical.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Diagnostic, Expectation, Model, ModelError, Predicate, Row, StateSpace, Transition, Valuation};

pub const MODEL_SCHEMA: &str = "qmu-model/1";

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported schema `{0}`, expected `{MODEL_SCHEMA}`")]
    Schema(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("invalid model:\n{}", format_diagnostics(.0))]
    Invalid(Vec<Diagnostic>),
}

fn format_diagnostics(d: &[Diagnostic]) -> String {
    d.iter().map(|d| format!("  {d}")).collect::<Vec<_>>().join("\n")
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFile {
    schema: String,
    states: Vec<String>,
    #[serde(default)]
    transitions: BTreeMap<String, Vec<RowFile>>,
    #[serde(default)]
    expectations: BTreeMap<String, Vec<f64>>,
    #[serde(default)]
    predicates: BTreeMap<String, Vec<bool>>,
    #[serde(default)]
    transition_sets: BTreeMap<String, Vec<String>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RowFile {
    to: Vec<(usize, f64)>,
    #[serde(default)]
    payoff_weight: f64,
}

/// Renders a model as pretty-printed JSON with a trailing newline.
pub fn model_to_json(model: &Model) -> String {
    let v = &model.valuation;
    let file = ModelFile {
        schema: MODEL_SCHEMA.to_string(),
        states: model.space.labels().to_vec(),
        transitions: v
            .transitions
            .iter()
            .map(|(name, t)| {
                let rows = t
                    .rows()
                    .iter()
                    .map(|r| RowFile {
                        to: r.successors.clone(),
                        payoff_weight: r.payoff_weight,
                    })
                    .collect();
                (name.clone(), rows)
            })
            .collect(),
        expectations: v
            .expectations
            .iter()
            .map(|(k, e)| (k.clone(), e.values().to_vec()))
            .collect(),
        predicates: v
            .predicates
            .iter()
            .map(|(k, p)| (k.clone(), p.values().to_vec()))
            .collect(),
        transition_sets: v.transition_sets.clone(),
    };
    let mut out = serde_json::to_string_pretty(&file).expect("model serialises");
    out.push('\n');
    out
}

/// Parses and validates a model. Rows are taken as written; duplicate or
/// zero-probability edges are reported by validation rather than repaired.
pub fn model_from_json(text: &str) -> Result<Model, IoError> {
    let file: ModelFile = serde_json::from_str(text)?;
    if file.schema != MODEL_SCHEMA {
        return Err(IoError::Schema(file.schema));
    }
    let space = StateSpace::new(file.states)?;
    let mut v = Valuation::default();
    for (name, rows) in file.transitions {
        let rows = rows.into_iter().map(|r| Row::new(r.to, r.payoff_weight)).collect();
        v.transitions.insert(name, Transition::from_rows_raw(rows));
    }
    for (name, values) in file.expectations {
        v.expectations.insert(name, Expectation::new_unchecked(values));
    }
    for (name, values) in file.predicates {
        v.predicates.insert(name, Predicate::new(values));
    }
    v.transition_sets = file.transition_sets;
    let model = Model::new(space, v);
    let diagnostics = model.validate();
    if !diagnostics.is_empty() {
        return Err(IoError::Invalid(diagnostics));
    }
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;

    const VARDI: &str = r#"{
      "schema": "qmu-model/1",
      "states": ["A", "B"],
      "transitions": {
        "k": [
          { "to": [[0, 0.5], [1, 0.5]], "payoff_weight": 0.0 },
          { "to": [[0, 1.0]] }
        ]
      },
      "expectations": { "atB": [0.0, 1.0] },
      "predicates": { "atA": [true, false] }
    }"#;

    #[test]
    fn reads_and_round_trips() {
        let m = model_from_json(VARDI).unwrap();
        assert_eq!(m.size(), 2);
        assert_eq!(model_from_json(&model_to_json(&m)).unwrap(), m);
    }

    #[test]
    fn awkward_floats_are_bit_exact() {
        let mut m = model_from_json(VARDI).unwrap();
        let x = 0.1 + 0.2;
        m.valuation
            .expectations
            .insert("odd".into(), Expectation::new(vec![x, 1.0 / 3.0]).unwrap());
        let back = model_from_json(&model_to_json(&m)).unwrap();
        assert_eq!(back.valuation.expectations["odd"].values()[0].to_bits(), x.to_bits());
    }

    #[test]
    fn rejects_bad_schema_and_invalid_rows() {
        let wrong = VARDI.replace("qmu-model/1", "qmu-model/2");
        assert!(matches!(model_from_json(&wrong), Err(IoError::Schema(_))));
        let over = VARDI.replace("[[0, 1.0]]", "[[0, 1.0], [1, 0.5]]");
        match model_from_json(&over) {
            Err(IoError::Invalid(d)) => assert_eq!(d[0].state, Some(1)),
            other => panic!("{other:?}"),
        }
        assert!(matches!(model_from_json("{"), Err(IoError::Json(_))));
    }
}
