//! State spaces, expectations, predicates and probabilistic transitions with a
//! payoff state.
//!
//! A [`Transition`] gives, for every state, a sub-distribution over successor
//! states together with a *payoff weight*: the expected immediate payoff
//! realised by the deficit `1 - Σ p`. The weight is stored pre-multiplied by
//! the deficit, so the pre-expectation of a post-expectation `A` is simply
//! `weight + Σ p·A(s')`.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

/// Slack allowed on probability sums.
pub const EPS_REPR: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("state index {index} out of range for {size} states")]
    StateOutOfRange { index: usize, size: usize },
    #[error("duplicate state label `{0}`")]
    DuplicateLabel(String),
    #[error("empty state space")]
    EmptySpace,
    #[error("unknown state label `{0}`")]
    UnknownLabel(String),
    #[error("expectation entry {value} at state {state} is outside [0,1]")]
    OutOfUnitInterval { state: usize, value: f64 },
    #[error("length mismatch: expected {expected} entries, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("transition is not normal at state {state} (probabilities sum to {sum}, weight {weight})")]
    NotNormal { state: usize, sum: f64, weight: f64 },
    #[error("discount factor {0} is outside [0,1]")]
    BadDiscount(f64),
    #[error("unknown {kind} symbol `{name}`")]
    UnknownSymbol { kind: SymbolKind, name: String },
    #[error("model is invalid: {}", .0.first().map(|d| d.to_string()).unwrap_or_default())]
    Invalid(Vec<Diagnostic>),
}

/// The four symbol namespaces of a valuation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SymbolKind {
    Expectation,
    Transition,
    TransitionSet,
    Predicate,
}

impl fmt::Display for SymbolKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SymbolKind::Expectation => "expectation",
            SymbolKind::Transition => "transition",
            SymbolKind::TransitionSet => "transition set",
            SymbolKind::Predicate => "predicate",
        })
    }
}

/// A finite, labelled state space. States are addressed by dense index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateSpace {
    labels: Vec<String>,
}

impl StateSpace {
    pub fn new<I, S>(labels: I) -> Result<Self, ModelError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.is_empty() {
            return Err(ModelError::EmptySpace);
        }
        let mut seen = std::collections::HashSet::new();
        for l in &labels {
            if !seen.insert(l.as_str()) {
                return Err(ModelError::DuplicateLabel(l.clone()));
            }
        }
        Ok(StateSpace { labels })
    }

    /// States labelled `s0`, `s1`, ...
    pub fn indexed(size: usize) -> Self {
        StateSpace {
            labels: (0..size.max(1)).map(|i| format!("s{i}")).collect(),
        }
    }

    pub fn size(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, index: usize) -> &str {
        &self.labels[index]
    }

    pub fn index_of(&self, label: &str) -> Result<usize, ModelError> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| ModelError::UnknownLabel(label.to_string()))
    }
}

/// A one-bounded function from states to reals.
#[derive(Debug, Clone, PartialEq)]
pub struct Expectation {
    values: Vec<f64>,
}

impl Expectation {
    pub fn new(values: Vec<f64>) -> Result<Self, ModelError> {
        for (state, &value) in values.iter().enumerate() {
            if !(0.0..=1.0).contains(&value) {
                return Err(ModelError::OutOfUnitInterval { state, value });
            }
        }
        Ok(Expectation { values })
    }

    /// Builds an expectation without range checks; [`Model::validate`]
    /// reports any violation.
    pub fn new_unchecked(values: Vec<f64>) -> Self {
        Expectation { values }
    }

    pub fn constant(size: usize, x: f64) -> Self {
        Expectation {
            values: vec![x; size],
        }
    }

    pub fn zero(size: usize) -> Self {
        Self::constant(size, 0.0)
    }

    pub fn one(size: usize) -> Self {
        Self::constant(size, 1.0)
    }

    /// The characteristic function of a predicate.
    pub fn indicator(pred: &Predicate) -> Self {
        Expectation {
            values: pred
                .values()
                .iter()
                .map(|&b| if b { 1.0 } else { 0.0 })
                .collect(),
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, state: usize) -> f64 {
        self.values[state]
    }

    /// Sup-norm distance.
    pub fn distance(&self, other: &Expectation) -> f64 {
        sup_distance(&self.values, &other.values)
    }

    /// Pointwise `self ≤ other + slack`.
    pub fn le(&self, other: &Expectation, slack: f64) -> bool {
        self.values
            .iter()
            .zip(&other.values)
            .all(|(a, b)| *a <= *b + slack)
    }
}

pub(crate) fn sup_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

impl std::ops::Index<usize> for Expectation {
    type Output = f64;
    fn index(&self, state: usize) -> &f64 {
        &self.values[state]
    }
}

/// A Boolean function of states.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Predicate {
    values: Vec<bool>,
}

impl Predicate {
    pub fn new(values: Vec<bool>) -> Self {
        Predicate { values }
    }

    pub fn constant(size: usize, b: bool) -> Self {
        Predicate {
            values: vec![b; size],
        }
    }

    pub fn from_fn(size: usize, f: impl FnMut(usize) -> bool) -> Self {
        Predicate {
            values: (0..size).map(f).collect(),
        }
    }

    pub fn values(&self) -> &[bool] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, state: usize) -> bool {
        self.values[state]
    }

    pub fn set(&mut self, state: usize, value: bool) {
        self.values[state] = value;
    }
}

/// One state's row of a transition: successors with positive probability,
/// plus the payoff weight routed to `$`.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub successors: Vec<(usize, f64)>,
    pub payoff_weight: f64,
}

impl Row {
    pub fn new(successors: Vec<(usize, f64)>, payoff_weight: f64) -> Self {
        Row {
            successors,
            payoff_weight,
        }
    }

    pub fn mass(&self) -> f64 {
        self.successors.iter().map(|&(_, p)| p).sum()
    }

    /// Whether the successor probabilities sum to one.
    pub fn is_total(&self) -> bool {
        self.mass() >= 1.0 - EPS_REPR
    }
}

/// An element of `PR(S)`: one [`Row`] per state.
#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    rows: Vec<Row>,
}

impl Transition {
    /// Builds a transition in canonical form: duplicate targets are merged
    /// and zero-probability edges are dropped. Invariants on sums and weights
    /// are left to [`Model::validate`].
    pub fn new(rows: Vec<Row>) -> Self {
        let rows = rows
            .into_iter()
            .map(|row| {
                let mut merged: BTreeMap<usize, f64> = BTreeMap::new();
                for (to, p) in row.successors {
                    *merged.entry(to).or_insert(0.0) += p;
                }
                Row {
                    successors: merged.into_iter().filter(|&(_, p)| p != 0.0).collect(),
                    payoff_weight: row.payoff_weight,
                }
            })
            .collect();
        Transition { rows }
    }

    /// Stores rows exactly as given (no merging).
    pub fn from_rows_raw(rows: Vec<Row>) -> Self {
        Transition { rows }
    }

    pub fn rows(&self) -> &[Row] {
        &self.rows
    }

    pub fn row(&self, state: usize) -> Result<&Row, ModelError> {
        self.rows.get(state).ok_or(ModelError::StateOutOfRange {
            index: state,
            size: self.rows.len(),
        })
    }

    pub fn size(&self) -> usize {
        self.rows.len()
    }
}

/// The pre-expectation `t.s.$ + Σ t.s.s'·A.s'` of `post` before taking `t`
/// from `state`.
pub fn pre_expectation(t: &Transition, state: usize, post: &Expectation) -> Result<f64, ModelError> {
    let row = t.row(state)?;
    let mut acc = row.payoff_weight;
    for &(to, p) in &row.successors {
        let a = post.values.get(to).ok_or(ModelError::StateOutOfRange {
            index: to,
            size: post.len(),
        })?;
        acc += p * a;
    }
    Ok(acc.clamp(0.0, 1.0))
}

/// The payoff actually received on an immediate halt, i.e. the weight divided
/// by the probability of halting. Zero when the row has no deficit.
pub fn halt_payoff(t: &Transition, state: usize) -> Result<f64, ModelError> {
    Ok(row_halt_payoff(t.row(state)?))
}

pub(crate) fn row_halt_payoff(row: &Row) -> f64 {
    let deficit = 1.0 - row.mass();
    if deficit <= EPS_REPR {
        0.0
    } else {
        (row.payoff_weight / deficit).clamp(0.0, 1.0)
    }
}

/// Scales a normal transition by `alpha`. The lost mass either halts with
/// payoff zero (`keep_deficit = false`) or carries weight `1 - alpha`.
pub fn make_discounted(t: &Transition, alpha: f64, keep_deficit: bool) -> Result<Transition, ModelError> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(ModelError::BadDiscount(alpha));
    }
    let mut rows = Vec::with_capacity(t.rows.len());
    for (state, row) in t.rows.iter().enumerate() {
        let sum = row.mass();
        if (sum - 1.0).abs() > EPS_REPR || row.payoff_weight != 0.0 {
            return Err(ModelError::NotNormal {
                state,
                sum,
                weight: row.payoff_weight,
            });
        }
        rows.push(Row {
            successors: row
                .successors
                .iter()
                .map(|&(to, p)| (to, alpha * p))
                .filter(|&(_, p)| p > 0.0)
                .collect(),
            payoff_weight: if keep_deficit { 1.0 - alpha } else { 0.0 },
        });
    }
    Ok(Transition { rows })
}

/// Binds the symbols a formula may mention.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Valuation {
    pub expectations: BTreeMap<String, Expectation>,
    pub transitions: BTreeMap<String, Transition>,
    pub transition_sets: BTreeMap<String, Vec<String>>,
    pub predicates: BTreeMap<String, Predicate>,
}

impl Valuation {
    pub fn expectation(&self, name: &str) -> Result<&Expectation, ModelError> {
        self.expectations.get(name).ok_or_else(|| ModelError::UnknownSymbol {
            kind: SymbolKind::Expectation,
            name: name.to_string(),
        })
    }

    pub fn transition(&self, name: &str) -> Result<&Transition, ModelError> {
        self.transitions.get(name).ok_or_else(|| ModelError::UnknownSymbol {
            kind: SymbolKind::Transition,
            name: name.to_string(),
        })
    }

    pub fn predicate(&self, name: &str) -> Result<&Predicate, ModelError> {
        self.predicates.get(name).ok_or_else(|| ModelError::UnknownSymbol {
            kind: SymbolKind::Predicate,
            name: name.to_string(),
        })
    }
}

/// A state space together with a valuation over it.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub space: StateSpace,
    pub valuation: Valuation,
}

/// One violated invariant.
#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostic {
    pub symbol: String,
    pub state: Option<usize>,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.state {
            Some(s) => write!(f, "{} (state {}): {}", self.symbol, s, self.message),
            None => write!(f, "{}: {}", self.symbol, self.message),
        }
    }
}

impl Model {
    pub fn new(space: StateSpace, valuation: Valuation) -> Self {
        Model { space, valuation }
    }

    pub fn size(&self) -> usize {
        self.space.size()
    }

    /// Checks every invariant and reports one diagnostic per violation.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn validate(&self) -> Vec<Diagnostic> {
        let n = self.size();
        let mut out = Vec::new();
        let mut diag = |symbol: &str, state: Option<usize>, message: String| {
            out.push(Diagnostic {
                symbol: symbol.to_string(),
                state,
                message,
            })
        };
        let v = &self.valuation;
        for (name, e) in &v.expectations {
            if e.len() != n {
                diag(name, None, format!("expected {n} entries, found {}", e.len()));
            }
            for (s, &x) in e.values().iter().enumerate() {
                if !(0.0..=1.0).contains(&x) {
                    diag(name, Some(s), format!("value {x} is outside [0,1]"));
                }
            }
        }
        for (name, p) in &v.predicates {
            if p.len() != n {
                diag(name, None, format!("expected {n} entries, found {}", p.len()));
            }
        }
        for (name, t) in &v.transitions {
            if t.size() != n {
                diag(name, None, format!("expected {n} rows, found {}", t.size()));
            }
            for (s, row) in t.rows().iter().enumerate() {
                let mut seen = std::collections::HashSet::new();
                for &(to, p) in &row.successors {
                    if to >= n {
                        diag(name, Some(s), format!("successor {to} out of range"));
                    }
                    if !seen.insert(to) {
                        diag(name, Some(s), format!("duplicate successor {to}"));
                    }
                    if !(p > 0.0) {
                        diag(name, Some(s), format!("probability {p} must be positive"));
                    }
                }
                let w = row.payoff_weight;
                if !(w >= 0.0) {
                    diag(name, Some(s), format!("payoff weight {w} must be non-negative"));
                }
                let sum = row.mass();
                if (sum - 1.0).abs() <= EPS_REPR && w > 0.0 {
                    diag(
                        name,
                        Some(s),
                        "payoff weight must be zero when probabilities sum to 1".to_string(),
                    );
                } else if sum + w.max(0.0) > 1.0 + EPS_REPR {
                    diag(
                        name,
                        Some(s),
                        format!("probability sum {sum} plus payoff weight {w} exceeds 1"),
                    );
                }
            }
        }
        for (name, members) in &v.transition_sets {
            if members.is_empty() {
                diag(name, None, "transition set is empty".to_string());
            }
            for m in members {
                if !v.transitions.contains_key(m) {
                    diag(name, None, format!("unknown transition `{m}`"));
                }
            }
        }
        out
    }

    pub fn ensure_valid(&self) -> Result<(), ModelError> {
        let d = self.validate();
        if d.is_empty() {
            Ok(())
        } else {
            Err(ModelError::Invalid(d))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    // s -> H 1/4, T 1/4, payoff weight 2/5 (halt payoff 0.8 with prob 1/2)
    fn coin() -> Transition {
        Transition::new(vec![
            Row::new(vec![(1, 0.25), (2, 0.25)], 0.4),
            Row::new(vec![], 0.0),
            Row::new(vec![], 0.0),
        ])
    }

    #[test]
    fn pre_expectation_of_coin() {
        let t = coin();
        let p0 = pre_expectation(&t, 0, &Expectation::zero(3)).unwrap();
        assert!((p0 - 0.4).abs() < 1e-15);
        let p1 = pre_expectation(&t, 0, &Expectation::one(3)).unwrap();
        assert!((p1 - 0.9).abs() < 1e-15);
        let p2 = pre_expectation(&t, 1, &Expectation::one(3)).unwrap();
        assert_eq!(p2, 0.0);
        assert!(pre_expectation(&t, 7, &Expectation::one(3)).is_err());
    }

    #[test]
    fn halt_payoffs() {
        let t = coin();
        assert!((halt_payoff(&t, 0).unwrap() - 0.8).abs() < 1e-15);
        let total = Transition::new(vec![Row::new(vec![(0, 1.0)], 0.0)]);
        assert_eq!(halt_payoff(&total, 0).unwrap(), 0.0);
        let stop = Transition::new(vec![Row::new(vec![], 0.3)]);
        assert_eq!(halt_payoff(&stop, 0).unwrap(), 0.3);
    }

    #[test]
    fn discounting() {
        let t = Transition::new(vec![
            Row::new(vec![(0, 0.5), (1, 0.5)], 0.0),
            Row::new(vec![(1, 1.0)], 0.0),
        ]);
        assert_eq!(make_discounted(&t, 1.0, false).unwrap(), t);
        let d = make_discounted(&t, 0.8, false).unwrap();
        assert_eq!(d.rows()[0].successors, vec![(0, 0.4), (1, 0.4)]);
        assert_eq!(d.rows()[0].payoff_weight, 0.0);
        let z = make_discounted(&t, 0.0, true).unwrap();
        assert!(z.rows()[0].successors.is_empty());
        assert_eq!(z.rows()[0].payoff_weight, 1.0);
        assert!(make_discounted(&coin(), 0.5, false).is_err());
    }

    #[test]
    fn canonical_form_merges_and_drops_zero_edges() {
        let t = Transition::new(vec![Row::new(vec![(0, 0.25), (1, 0.0), (0, 0.25)], 0.0)]);
        assert_eq!(t.rows()[0].successors, vec![(0, 0.5)]);
    }

    fn model_with(t: Transition) -> Model {
        let mut v = Valuation::default();
        v.transitions.insert("t".into(), t);
        Model::new(StateSpace::indexed(2), v)
    }

    #[test]
    fn validate_reports_violations() {
        let over = model_with(Transition::new(vec![
            Row::new(vec![(0, 0.6), (1, 0.6)], 0.0),
            Row::new(vec![], 0.0),
        ]));
        let d = over.validate();
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].state, Some(0));
        assert!(d[0].message.contains("exceeds"));

        let weighted = model_with(Transition::new(vec![
            Row::new(vec![(1, 1.0)], 0.1),
            Row::new(vec![], 0.0),
        ]));
        let d = weighted.validate();
        assert!(d.iter().any(|d| d.message.contains("payoff weight must be zero")));

        let ok = model_with(Transition::new(vec![
            Row::new(vec![(1, 1.0)], 0.0),
            Row::new(vec![], 0.5),
        ]));
        assert!(ok.validate().is_empty());
    }

    #[test]
    fn validate_checks_sets_and_ranges() {
        let mut m = model_with(Transition::new(vec![
            Row::new(vec![(1, 1.0)], 0.0),
            Row::new(vec![], 0.0),
        ]));
        m.valuation
            .transition_sets
            .insert("K".into(), vec!["t".into(), "missing".into()]);
        m.valuation
            .expectations
            .insert("A".into(), Expectation::new_unchecked(vec![0.5, 1.5]));
        let d = m.validate();
        assert_eq!(d.len(), 2);
    }

    fn arb_row(n: usize) -> impl Strategy<Value = Row> {
        (proptest::collection::vec(0.01f64..1.0, n), 0.0f64..1.0, 0.0f64..1.0).prop_map(
            move |(ws, mass, w)| {
                let total: f64 = ws.iter().sum();
                let succ = ws
                    .iter()
                    .enumerate()
                    .map(|(i, x)| (i, x / total * mass))
                    .collect();
                Row::new(succ, (1.0 - mass) * w)
            },
        )
    }

    proptest! {
        #[test]
        fn pre_expectation_bounded_monotone_affine(
            row in arb_row(3),
            a in proptest::collection::vec(0.0f64..=1.0, 3),
            b in proptest::collection::vec(0.0f64..=1.0, 3),
            lambda in 0.0f64..=1.0,
        ) {
            let t = Transition::new(vec![row, Row::new(vec![], 0.0), Row::new(vec![], 0.0)]);
            let ea = Expectation::new(a.clone()).unwrap();
            let eb = Expectation::new(b.clone()).unwrap();
            let pa = pre_expectation(&t, 0, &ea).unwrap();
            let pb = pre_expectation(&t, 0, &eb).unwrap();
            prop_assert!((0.0..=1.0).contains(&pa));
            let hi = Expectation::new(a.iter().zip(&b).map(|(x, y)| x.max(*y)).collect()).unwrap();
            prop_assert!(pa <= pre_expectation(&t, 0, &hi).unwrap() + 1e-15);
            let mix = Expectation::new(a.iter().zip(&b).map(|(x, y)| lambda * x + (1.0 - lambda) * y).collect()).unwrap();
            let pm = pre_expectation(&t, 0, &mix).unwrap();
            prop_assert!((pm - (lambda * pa + (1.0 - lambda) * pb)).abs() <= 1e-12);
        }

        #[test]
        fn halt_payoff_times_deficit_is_weight(row in arb_row(2)) {
            let mass = row.mass();
            let w = row.payoff_weight;
            let t = Transition::new(vec![row, Row::new(vec![], 0.0)]);
            if mass < 1.0 - 1e-9 {
                let y = halt_payoff(&t, 0).unwrap();
                prop_assert!((y * (1.0 - mass) - w).abs() <= 1e-12);
            }
        }
    }
}
