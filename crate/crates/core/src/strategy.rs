//! Memoriless strategies: synthesis, specialisation into formulae, and
//! verification.
//!
//! A memoriless strategy holds one predicate per junction site. At a min
//! site `true` means Min takes the left operand in that state; likewise for
//! max sites and Max.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::compile::{CompileError, Plan};
use crate::eval::{evaluate, evaluate_resolved, Engine, EvalConfig, EvalError, EvalReport, Memoriless};
use crate::formula::Formula;
use crate::model::{pre_expectation, Expectation, Model, ModelError, Predicate, Valuation};

const STRATEGY_FORMAT: &str = "qmu-strategy/1";

#[derive(Debug, Error)]
pub enum StrategyError {
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("evaluation did not converge")]
    NotConverged(Box<EvalReport>),
    #[error("{kind} side has {found} predicates, the formula has {expected} sites")]
    SiteCount {
        kind: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("predicate symbol `{0}` is already bound")]
    SymbolClash(String),
    #[error("formula has no max junction whose left operand is `{{k}} A`")]
    NoImmediateOption,
    #[error("strategy file was synthesized for a different formula (fingerprint {found}, expected {expected})")]
    FingerprintMismatch { expected: String, found: String },
    #[error("malformed strategy file: {0}")]
    Malformed(String),
}

impl From<CompileError> for StrategyError {
    fn from(e: CompileError) -> Self {
        StrategyError::Eval(e.into())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MemorilessStrategy {
    pub min_choices: Vec<Predicate>,
    pub max_choices: Vec<Predicate>,
}

impl MemorilessStrategy {
    pub fn empty() -> Self {
        MemorilessStrategy {
            min_choices: Vec::new(),
            max_choices: Vec::new(),
        }
    }

    pub fn min_side(&self) -> Memoriless<'_> {
        Memoriless(&self.min_choices)
    }

    pub fn max_side(&self) -> Memoriless<'_> {
        Memoriless(&self.max_choices)
    }

    pub fn is_empty(&self) -> bool {
        self.min_choices.is_empty() && self.max_choices.is_empty()
    }
}

/// Which players' choices are fixed by a strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sides {
    Both,
    MinOnly,
    MaxOnly,
}

impl Sides {
    fn pick(self, s: &MemorilessStrategy) -> (Option<&[Predicate]>, Option<&[Predicate]>) {
        match self {
            Sides::Both => (Some(&s.min_choices), Some(&s.max_choices)),
            Sides::MinOnly => (Some(&s.min_choices), None),
            Sides::MaxOnly => (None, Some(&s.max_choices)),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Synthesis {
    pub strategy: MemorilessStrategy,
    pub value: Expectation,
    pub report: EvalReport,
    /// Tied choices that had to be moved off the left operand because the
    /// left choice did not achieve the value.
    pub repaired: usize,
}

/// Extracts optimal memoriless choices from the converged operand values.
///
/// At a max site the predicate holds where the left operand is at least the
/// right one minus the tolerance; at a min site where it is at most the right
/// one plus the tolerance. Ties go left.
///
/// A tie can hide a choice that only achieves the value in the limit, for
/// instance staying inside a least fixed point forever. Each side is
/// therefore checked on its own against an adversarial opponent, and if it
/// falls short its tied choices are flipped, greedily and then exhaustively
/// when there are few of them, until it achieves the value.
pub fn synthesize(phi: &Formula, model: &Model, cfg: &EvalConfig) -> Result<Synthesis, StrategyError> {
    cfg.check()?;
    let plan = Plan::compile(phi, model)?;
    let mut engine = Engine::new(&plan, *cfg, false).recording();
    let result = engine.eval(plan.root())?;
    let (min_ops, max_ops) = engine.take_record().expect("recording engine");
    let report = engine.report(result);
    if !report.converged {
        return Err(StrategyError::NotConverged(Box::new(report)));
    }
    let tol = cfg.tolerance;
    let extract = |ops: &[(Vec<f64>, Vec<f64>)], left_wins: &dyn Fn(f64, f64) -> bool| -> Vec<Predicate> {
        ops.iter()
            .map(|(l, r)| Predicate::from_fn(plan.states, |s| left_wins(l[s], r[s])))
            .collect()
    };
    let mut strategy = MemorilessStrategy {
        min_choices: extract(&min_ops, &|l, r| l <= r + tol),
        max_choices: extract(&max_ops, &|l, r| l >= r - tol),
    };
    let window = (1e3 * tol).max(1e-6);
    let ties = |ops: &[(Vec<f64>, Vec<f64>)]| -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (site, (l, r)) in ops.iter().enumerate() {
            for s in 0..plan.states {
                if (l[s] - r[s]).abs() <= window {
                    out.push((site, s));
                }
            }
        }
        out
    };
    let value = report.result.clone();
    let mut repaired = 0;
    repaired += repair(phi, model, cfg, &value, &mut strategy, Sides::MaxOnly, &ties(&max_ops))?;
    repaired += repair(phi, model, cfg, &value, &mut strategy, Sides::MinOnly, &ties(&min_ops))?;
    Ok(Synthesis {
        strategy,
        value,
        report,
        repaired,
    })
}

fn one_sided_residual(
    phi: &Formula,
    model: &Model,
    cfg: &EvalConfig,
    value: &Expectation,
    strategy: &MemorilessStrategy,
    side: Sides,
) -> Result<f64, StrategyError> {
    let (min, max) = side.pick(strategy);
    let r = evaluate_resolved(phi, model, min, max, cfg)?;
    Ok(r.result.distance(value))
}

fn repair(
    phi: &Formula,
    model: &Model,
    cfg: &EvalConfig,
    value: &Expectation,
    strategy: &mut MemorilessStrategy,
    side: Sides,
    ties: &[(usize, usize)],
) -> Result<usize, StrategyError> {
    let bound = 10.0 * cfg.tolerance;
    let mut best = one_sided_residual(phi, model, cfg, value, strategy, side)?;
    if best <= bound || ties.is_empty() {
        return Ok(0);
    }
    let flip = |st: &mut MemorilessStrategy, (site, s): (usize, usize)| {
        let preds = match side {
            Sides::MinOnly => &mut st.min_choices,
            _ => &mut st.max_choices,
        };
        let b = preds[site].get(s);
        preds[site].set(s, !b);
    };
    let mut flipped = vec![false; ties.len()];
    let mut improved = true;
    while improved && best > bound {
        improved = false;
        for (i, &t) in ties.iter().enumerate() {
            flip(strategy, t);
            let r = one_sided_residual(phi, model, cfg, value, strategy, side)?;
            if r < best {
                best = r;
                flipped[i] = !flipped[i];
                improved = true;
            } else {
                flip(strategy, t);
            }
        }
    }
    if best > bound && ties.len() <= 12 {
        let base = strategy.clone();
        for mask in 1u32..(1 << ties.len()) {
            let mut trial = base.clone();
            for (i, &t) in ties.iter().enumerate() {
                if mask >> i & 1 == 1 {
                    flip(&mut trial, t);
                }
            }
            let r = one_sided_residual(phi, model, cfg, value, &trial, side)?;
            if r < best {
                best = r;
                for (i, f) in flipped.iter_mut().enumerate() {
                    *f ^= mask >> i & 1 == 1;
                }
                *strategy = trial;
                if best <= bound {
                    break;
                }
            }
        }
    }
    Ok(flipped.iter().filter(|f| **f).count())
}

/// A formula with junctions replaced by conditionals on fresh predicate
/// symbols, and the bindings for those symbols.
#[derive(Debug, Clone, PartialEq)]
pub struct Specialized {
    pub formula: Formula,
    pub extension: BTreeMap<String, Predicate>,
}

impl Specialized {
    /// The valuation extended with the fresh predicate symbols.
    pub fn extend(&self, valuation: &Valuation) -> Result<Valuation, StrategyError> {
        let mut v = valuation.clone();
        for (name, p) in &self.extension {
            if v.predicates.insert(name.clone(), p.clone()).is_some() {
                return Err(StrategyError::SymbolClash(name.clone()));
            }
        }
        Ok(v)
    }

    /// The model with its valuation extended.
    pub fn extend_model(&self, model: &Model) -> Result<Model, StrategyError> {
        Ok(Model::new(model.space.clone(), self.extend(&model.valuation)?))
    }
}

/// Fresh symbol naming the predicate of a min site.
pub fn min_site_symbol(site: usize) -> String {
    format!("min_site{site}")
}

/// Fresh symbol naming the predicate of a max site.
pub fn max_site_symbol(site: usize) -> String {
    format!("max_site{site}")
}

/// Replaces the junctions of the sides given as `Some` by conditionals.
///
/// Site `i` of the min side becomes `if min_site{i} then left else right`,
/// and likewise for max. Sides given as `None` keep their junctions.
pub fn specialize(
    phi: &Formula,
    min: Option<&[Predicate]>,
    max: Option<&[Predicate]>,
) -> Result<Specialized, StrategyError> {
    let names = |preds: Option<&[Predicate]>, name: fn(usize) -> String| {
        preds.map(|p| (0..p.len()).map(name).collect::<Vec<_>>())
    };
    let min_names = names(min, min_site_symbol);
    let max_names = names(max, max_site_symbol);
    let formula = specialize_symbols(phi, min_names.as_deref(), max_names.as_deref())?;
    let mut extension = BTreeMap::new();
    for (names, preds) in [(min_names, min), (max_names, max)] {
        if let (Some(names), Some(preds)) = (names, preds) {
            extension.extend(names.into_iter().zip(preds.iter().cloned()));
        }
    }
    Ok(Specialized { formula, extension })
}

/// Replaces junctions by conditionals on the given predicate symbols, one
/// per site.
pub fn specialize_symbols(
    phi: &Formula,
    min: Option<&[String]>,
    max: Option<&[String]>,
) -> Result<Formula, StrategyError> {
    let (min_sites, max_sites) = phi.choice_sites();
    for (kind, names, expected) in [("min", min, min_sites), ("max", max, max_sites)] {
        if let Some(names) = names {
            if names.len() != expected {
                return Err(StrategyError::SiteCount {
                    kind,
                    expected,
                    found: names.len(),
                });
            }
        }
    }
    Ok(replace(phi, min, max).numbered())
}

fn replace(phi: &Formula, min: Option<&[String]>, max: Option<&[String]>) -> Formula {
    let go = |f: &Formula| replace(f, min, max);
    match phi {
        Formula::Var(_) | Formula::Const(_) => phi.clone(),
        Formula::Modal { transition, body } => Formula::modal(transition.clone(), go(body)),
        Formula::Angelic { set, body } => Formula::angelic(set.clone(), go(body)),
        Formula::Demonic { set, body } => Formula::demonic(set.clone(), go(body)),
        Formula::MinJ { site, left, right } => match min {
            Some(names) => Formula::cond(names[*site].clone(), go(left), go(right)),
            None => Formula::min(go(left), go(right)),
        },
        Formula::MaxJ { site, left, right } => match max {
            Some(names) => Formula::cond(names[*site].clone(), go(left), go(right)),
            None => Formula::max(go(left), go(right)),
        },
        Formula::Cond {
            predicate,
            then,
            otherwise,
        } => Formula::cond(predicate.clone(), go(then), go(otherwise)),
        Formula::Fixpoint { kind, var, body } => Formula::fixpoint(*kind, var.clone(), go(body)),
    }
}

/// Sup-norm distance between the value of `phi` and the value of its
/// specialisation by `strategy` on the chosen sides. Sides left open are
/// played adversarially.
pub fn verify_strategy(
    phi: &Formula,
    model: &Model,
    strategy: &MemorilessStrategy,
    sides: Sides,
    cfg: &EvalConfig,
) -> Result<f64, StrategyError> {
    let value = evaluate(phi, model, cfg)?.result;
    let (min, max) = sides.pick(strategy);
    let spec = specialize(phi, min, max)?;
    let extended = spec.extend_model(model)?;
    let fixed = evaluate(&spec.formula, &extended, cfg)?.result;
    Ok(fixed.distance(&value))
}

/// Whether stopping now is optimal at state `s`.
///
/// `phi` must have a max junction whose left operand is `{k} A`, the
/// immediate option. The advice is to take it exactly when its
/// pre-expectation is within `tolerance` of the game value.
pub fn one_step_advice(
    phi: &Formula,
    model: &Model,
    value: &Expectation,
    s: usize,
    tolerance: f64,
) -> Result<bool, StrategyError> {
    let mut option = None;
    phi.walk(&mut |f| {
        if option.is_some() {
            return;
        }
        if let Formula::MaxJ { left, .. } = f {
            if let Formula::Modal { transition, body } = left.as_ref() {
                if let Formula::Const(a) = body.as_ref() {
                    option = Some((transition.clone(), a.clone()));
                }
            }
        }
    });
    let (k, a) = option.ok_or(StrategyError::NoImmediateOption)?;
    let v = &model.valuation;
    let now = pre_expectation(v.transition(&k)?, s, v.expectation(&a)?)?;
    Ok(now >= value.get(s) - tolerance)
}

#[derive(Serialize, Deserialize)]
struct StrategyFile {
    format: String,
    fingerprint: String,
    formula: String,
    min: BTreeMap<usize, Vec<bool>>,
    max: BTreeMap<usize, Vec<bool>>,
}

/// Serialises a strategy together with the fingerprint of the reduced
/// formula it resolves.
pub fn strategy_to_json(strategy: &MemorilessStrategy, phi: &Formula) -> String {
    let sides = |ps: &[Predicate]| ps.iter().map(|p| p.values().to_vec()).enumerate().collect();
    let file = StrategyFile {
        format: STRATEGY_FORMAT.to_string(),
        fingerprint: phi.fingerprint(),
        formula: phi.to_string(),
        min: sides(&strategy.min_choices),
        max: sides(&strategy.max_choices),
    };
    let mut out = serde_json::to_string_pretty(&file).expect("strategy serialises");
    out.push('\n');
    out
}

/// Reads a strategy file, rejecting files made for another formula or of
/// the wrong shape.
pub fn strategy_from_json(text: &str, phi: &Formula, states: usize) -> Result<MemorilessStrategy, StrategyError> {
    let file: StrategyFile = serde_json::from_str(text).map_err(|e| StrategyError::Malformed(e.to_string()))?;
    if file.format != STRATEGY_FORMAT {
        return Err(StrategyError::Malformed(format!("unknown format `{}`", file.format)));
    }
    let expected = phi.fingerprint();
    if file.fingerprint != expected {
        return Err(StrategyError::FingerprintMismatch {
            expected,
            found: file.fingerprint,
        });
    }
    let (min_sites, max_sites) = phi.choice_sites();
    let side = |kind: &'static str, map: BTreeMap<usize, Vec<bool>>, sites: usize| {
        if map.len() != sites || map.keys().enumerate().any(|(i, k)| i != *k) {
            return Err(StrategyError::SiteCount {
                kind,
                expected: sites,
                found: map.len(),
            });
        }
        map.into_values()
            .map(|v| {
                if v.len() == states {
                    Ok(Predicate::new(v))
                } else {
                    Err(StrategyError::Malformed(format!(
                        "{kind} predicate has {} entries for {states} states",
                        v.len()
                    )))
                }
            })
            .collect::<Result<Vec<_>, _>>()
    };
    Ok(MemorilessStrategy {
        min_choices: side("min", file.min, min_sites)?,
        max_choices: side("max", file.max, max_sites)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse;
    use crate::model::{Row, StateSpace, Transition};

    fn vardi() -> Model {
        let mut v = Valuation::default();
        v.transitions.insert(
            "k".into(),
            Transition::new(vec![
                Row::new(vec![(0, 0.5), (1, 0.5)], 0.0),
                Row::new(vec![(0, 1.0)], 0.0),
            ]),
        );
        v.expectations
            .insert("atB".into(), Expectation::new(vec![0.0, 1.0]).unwrap());
        v.predicates.insert("atA".into(), Predicate::new(vec![true, false]));
        Model::new(StateSpace::new(["A", "B"]).unwrap(), v)
    }

    #[test]
    fn vardi_strategy_is_at_a() {
        let phi = parse("mu X . {k} atB \\/ {k} X").unwrap();
        let syn = synthesize(&phi, &vardi(), &EvalConfig::default()).unwrap();
        assert_eq!(syn.strategy.max_choices, vec![Predicate::new(vec![true, false])]);
        assert!(syn.strategy.min_choices.is_empty());
        assert_eq!(syn.repaired, 0);
    }

    #[test]
    fn specialize_with_named_predicate() {
        let phi = parse("mu X . {k} atB \\/ {k} X").unwrap();
        let f = specialize_symbols(&phi, None, Some(&["atA".to_string()])).unwrap();
        assert_eq!(f.to_string(), "mu X . if atA then {k} atB else {k} X");
        let r = evaluate(&f, &vardi(), &EvalConfig::default()).unwrap();
        for x in r.result.values() {
            assert!((x - 0.5).abs() < 1e-6);
        }
    }

    #[test]
    fn empty_partial_strategy_is_identity() {
        let phi = parse("mu X . {k} atB \\/ {k} X /\\ X").unwrap();
        assert_eq!(specialize(&phi, None, None).unwrap().formula, phi);
    }

    #[test]
    fn site_count_mismatch() {
        let phi = parse("{k} atB \\/ atB").unwrap();
        assert!(matches!(
            specialize(&phi, None, Some(&[])),
            Err(StrategyError::SiteCount { .. })
        ));
    }

    #[test]
    fn fresh_symbols_clash() {
        let phi = parse("{k} atB \\/ atB").unwrap();
        let spec = specialize(&phi, None, Some(&[Predicate::constant(2, true)])).unwrap();
        let mut m = vardi();
        m.valuation
            .predicates
            .insert(max_site_symbol(0), Predicate::constant(2, true));
        assert!(matches!(spec.extend_model(&m), Err(StrategyError::SymbolClash(_))));
    }

    #[test]
    fn tied_loop_is_repaired() {
        // At state 0 both operands are worth 1 in the limit, but taking X
        // forever earns nothing under mu.
        let mut v = Valuation::default();
        v.transitions
            .insert("stay".into(), Transition::new(vec![Row::new(vec![(0, 1.0)], 0.0)]));
        v.expectations.insert("one".into(), Expectation::one(1));
        let m = Model::new(StateSpace::indexed(1), v);
        let phi = parse("mu X . {stay} X \\/ one").unwrap();
        let cfg = EvalConfig::default();
        let syn = synthesize(&phi, &m, &cfg).unwrap();
        assert_eq!(syn.repaired, 1);
        assert_eq!(syn.strategy.max_choices[0].values(), &[false]);
        let r = verify_strategy(&phi, &m, &syn.strategy, Sides::Both, &cfg).unwrap();
        assert!(r <= 1e-8);
    }

    #[test]
    fn strategy_file_round_trip_and_fingerprint() {
        let phi = parse("mu X . {k} atB \\/ {k} X").unwrap();
        let s = MemorilessStrategy {
            min_choices: vec![],
            max_choices: vec![Predicate::new(vec![true, false])],
        };
        let text = strategy_to_json(&s, &phi);
        assert_eq!(strategy_from_json(&text, &phi, 2).unwrap(), s);
        let other = parse("mu X . {k} X \\/ {k} atB").unwrap();
        assert!(matches!(
            strategy_from_json(&text, &other, 2),
            Err(StrategyError::FingerprintMismatch { .. })
        ));
        assert!(matches!(
            strategy_from_json(&text, &phi, 3),
            Err(StrategyError::Malformed(_))
        ));
    }

    #[test]
    fn advice_needs_an_immediate_option() {
        let phi = parse("mu X . {k} X \\/ atB").unwrap();
        let value = Expectation::zero(2);
        assert!(matches!(
            one_step_advice(&phi, &vardi(), &value, 0, 1e-9),
            Err(StrategyError::NoImmediateOption)
        ));
        let phi = parse("mu X . {k} atB \\/ {k} X").unwrap();
        let value = Expectation::new(vec![0.5, 0.5]).unwrap();
        assert!(one_step_advice(&phi, &vardi(), &value, 0, 1e-9).unwrap());
        assert!(!one_step_advice(&phi, &vardi(), &value, 1, 1e-9).unwrap());
    }
}
