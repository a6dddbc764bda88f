//! Denotational evaluation by nested fixed-point iteration.
//!
//! Every node denotes an expectation. Constants, modalities, junctions and
//! conditionals are computed pointwise; a binder is solved by Kleene
//! iteration of its body from the canonical seed (`0̄` for `mu`, `1̄` for
//! `nu`, `x̄` for `fix(x)`) until the sup-norm change falls to the configured
//! tolerance. Nested binders are re-solved from their seed at every outer
//! iterate, so alternation needs no special handling.
//!
//! A nested binder is solved to a tolerance a hundred times tighter than its
//! parent's. Otherwise the error an inner solve leaves behind, which is of
//! the order of the tolerance, feeds into every outer iterate and can keep
//! the outer residual above the tolerance indefinitely.
//!
//! Strategy-resolved evaluation comes in two flavours:
//!
//! * memoriless strategies turn every junction into a conditional, so the
//!   exact fixed point of the resulting purely probabilistic system is
//!   computed by the same iteration;
//! * history-dependent strategies are evaluated on the depth-bounded
//!   unfolding of the formula, where a binder unfolded more than `depth`
//!   times contributes its seed value.

use std::collections::HashMap;

use thiserror::Error;

use crate::compile::{CompileError, Node, NodeId, Plan};
use crate::formula::{FixKind, Formula};
use crate::model::{Expectation, Model, Predicate};

/// Tolerance ratio between a binder and the binders nested inside it.
const NESTED_TIGHTENING: f64 = 1e-2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalConfig {
    /// Sup-norm change at which an iteration counts as converged.
    pub tolerance: f64,
    /// Iteration cap for each individual fixed-point solve.
    pub max_iterations: usize,
    /// Cap on visited positions for depth-bounded unfoldings and trees.
    pub node_cap: usize,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            tolerance: 1e-9,
            max_iterations: 1_000_000,
            node_cap: 50_000_000,
        }
    }
}

impl EvalConfig {
    pub fn with_tolerance(tolerance: f64) -> Self {
        EvalConfig {
            tolerance,
            ..Self::default()
        }
    }

    // Negated so that NaN is rejected too.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub(crate) fn check(&self) -> Result<(), EvalError> {
        if !(self.tolerance > 0.0) || self.max_iterations == 0 {
            return Err(EvalError::BadConfig);
        }
        Ok(())
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error(transparent)]
    Compile(#[from] CompileError),
    #[error("tolerance must be positive and max_iterations at least 1")]
    BadConfig,
    #[error("fix body of `{0}` contains min/max choices; pass force to iterate it anyway")]
    NondeterministicFixBody(String),
    #[error("fix iteration of `{binder}` is not converging (residual stuck at {residual})")]
    Divergence { binder: String, residual: f64 },
    #[error("strategy has {found} predicates for {expected} {kind} sites")]
    StrategyShape {
        kind: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("unfolding visited more than {0} positions")]
    NodeCap(usize),
}

/// Iteration statistics for one binder, accumulated over all of its solves.
#[derive(Debug, Clone, PartialEq)]
pub struct FixpointStats {
    pub binder: String,
    pub kind: FixKind,
    /// How many times the binder was solved (more than once when nested).
    pub solves: usize,
    pub total_iterations: usize,
    /// Largest iteration count of a single solve.
    pub max_iterations: usize,
    /// Residual at the end of the most recent solve.
    pub final_residual: f64,
    /// Largest end-of-solve residual seen.
    pub worst_residual: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub result: Expectation,
    pub fixpoints: Vec<FixpointStats>,
    pub converged: bool,
}

/// Vectorised evaluator over a compiled plan.
pub(crate) struct Engine<'p, 'a> {
    plan: &'p Plan<'a>,
    cfg: EvalConfig,
    force: bool,
    env: Vec<Vec<f64>>,
    stats: Vec<FixpointStats>,
    /// When set, junctions follow these predicates instead of taking min/max.
    resolve_min: Option<&'p [Predicate]>,
    resolve_max: Option<&'p [Predicate]>,
    /// Last operand values seen at each min and max site, when recording.
    record: Option<(Vec<Operands>, Vec<Operands>)>,
}

/// Left and right operand values of one junction.
pub(crate) type Operands = (Vec<f64>, Vec<f64>);

impl<'p, 'a> Engine<'p, 'a> {
    pub fn new(plan: &'p Plan<'a>, cfg: EvalConfig, force: bool) -> Self {
        Engine {
            plan,
            cfg,
            force,
            env: vec![Vec::new(); plan.binders.len()],
            stats: plan
                .binders
                .iter()
                .map(|b| FixpointStats {
                    binder: b.name.clone(),
                    kind: b.kind,
                    solves: 0,
                    total_iterations: 0,
                    max_iterations: 0,
                    final_residual: 0.0,
                    worst_residual: 0.0,
                    converged: true,
                })
                .collect(),
            resolve_min: None,
            resolve_max: None,
            record: None,
        }
    }

    /// Keeps the operands of every junction from its latest evaluation. The
    /// latest evaluation happens inside the final iterate of every enclosing
    /// binder, so the recorded values are those at the converged environment.
    pub fn recording(mut self) -> Self {
        self.record = Some((
            vec![Default::default(); self.plan.min_sites],
            vec![Default::default(); self.plan.max_sites],
        ));
        self
    }

    pub fn take_record(&mut self) -> Option<(Vec<Operands>, Vec<Operands>)> {
        self.record.take()
    }

    pub fn resolving(mut self, min: Option<&'p [Predicate]>, max: Option<&'p [Predicate]>) -> Self {
        self.resolve_min = min;
        self.resolve_max = max;
        self
    }

    pub fn report(self, result: Vec<f64>) -> EvalReport {
        let converged = self.stats.iter().all(|s| s.converged);
        EvalReport {
            result: Expectation::new_unchecked(result),
            fixpoints: self.stats,
            converged,
        }
    }

    pub fn eval(&mut self, id: NodeId) -> Result<Vec<f64>, EvalError> {
        let n = self.plan.states;
        Ok(match self.plan.nodes[id] {
            Node::Var { binder } => self.env[binder].clone(),
            Node::Const { values } => values.to_vec(),
            Node::Modal { transition, body } => {
                let post = self.eval(body)?;
                transition
                    .rows()
                    .iter()
                    .map(|row| {
                        let mut acc = row.payoff_weight;
                        for &(to, p) in &row.successors {
                            acc += p * post[to];
                        }
                        acc
                    })
                    .collect()
            }
            Node::Min { site, left, right } => {
                let l = self.eval(left)?;
                let r = self.eval(right)?;
                if let Some((rec, _)) = &mut self.record {
                    rec[site] = (l.clone(), r.clone());
                }
                match self.resolve_min {
                    Some(preds) => select(&preds[site], l, r),
                    None => l.iter().zip(&r).map(|(a, b)| a.min(*b)).collect(),
                }
            }
            Node::Max { site, left, right } => {
                let l = self.eval(left)?;
                let r = self.eval(right)?;
                if let Some((_, rec)) = &mut self.record {
                    rec[site] = (l.clone(), r.clone());
                }
                match self.resolve_max {
                    Some(preds) => select(&preds[site], l, r),
                    None => l.iter().zip(&r).map(|(a, b)| a.max(*b)).collect(),
                }
            }
            Node::Cond {
                predicate,
                then,
                otherwise,
            } => {
                let t = self.eval(then)?;
                let e = self.eval(otherwise)?;
                select(predicate, t, e)
            }
            Node::Bind { binder, body } => {
                debug_assert_eq!(self.plan.binders[binder].body, body);
                self.solve(binder, n)?
            }
        })
    }

    fn solve(&mut self, binder: usize, n: usize) -> Result<Vec<f64>, EvalError> {
        let info = &self.plan.binders[binder];
        let resolved = self.resolve_min.is_some() && self.resolve_max.is_some();
        let watch = matches!(info.kind, FixKind::Fix(_)) && info.nondeterministic && !resolved;
        if watch && !self.force {
            return Err(EvalError::NondeterministicFixBody(info.name.clone()));
        }
        let body = info.body;
        let tolerance = self.cfg.tolerance * NESTED_TIGHTENING.powi(info.depth as i32);
        let saved = std::mem::take(&mut self.env[binder]);
        let mut x = vec![info.kind.seed(); n];
        let mut iterations = 0;
        let mut residual = f64::INFINITY;
        let mut converged = false;
        let mut previous = f64::INFINITY;
        let mut stuck = 0usize;
        while iterations < self.cfg.max_iterations {
            self.env[binder] = x;
            let mut y = self.eval(body)?;
            for v in &mut y {
                *v = v.clamp(0.0, 1.0);
            }
            x = std::mem::take(&mut self.env[binder]);
            residual = crate::model::sup_distance(&x, &y);
            x = y;
            iterations += 1;
            if residual <= tolerance {
                converged = true;
                break;
            }
            if watch {
                if residual >= previous {
                    stuck += 1;
                    if stuck >= 50 {
                        return Err(EvalError::Divergence {
                            binder: self.plan.binders[binder].name.clone(),
                            residual,
                        });
                    }
                } else {
                    stuck = 0;
                }
                previous = residual;
            }
        }
        self.env[binder] = saved;
        let s = &mut self.stats[binder];
        s.solves += 1;
        s.total_iterations += iterations;
        s.max_iterations = s.max_iterations.max(iterations);
        s.final_residual = residual;
        s.worst_residual = s.worst_residual.max(residual);
        s.converged &= converged;
        Ok(x)
    }
}

fn select(pred: &Predicate, then: Vec<f64>, otherwise: Vec<f64>) -> Vec<f64> {
    let mut out = then;
    for (s, v) in out.iter_mut().enumerate() {
        if !pred.get(s) {
            *v = otherwise[s];
        }
    }
    out
}

fn run(phi: &Formula, model: &Model, cfg: &EvalConfig, force: bool) -> Result<EvalReport, EvalError> {
    cfg.check()?;
    let plan = Plan::compile(phi, model)?;
    let mut engine = Engine::new(&plan, *cfg, force);
    let result = engine.eval(plan.root())?;
    Ok(engine.report(result))
}

/// Evaluates a closed, reduced formula.
///
/// Non-convergence is not an error: the report carries the last iterate and
/// `converged == false`. Intermediate `fix(x)` binders are accepted only when
/// their body has no min/max choices (see [`evaluate_fix`]).
pub fn evaluate(phi: &Formula, model: &Model, cfg: &EvalConfig) -> Result<EvalReport, EvalError> {
    run(phi, model, cfg, false)
}

/// Evaluates a formula containing intermediate `fix(x)` binders, iterating
/// each from the constant expectation `x̄`.
///
/// Convergence is only known for bodies without min/max choices. With
/// `force`, other bodies are iterated too, and a run of 50 iterates whose
/// residual never decreases aborts with [`EvalError::Divergence`].
pub fn evaluate_fix(phi: &Formula, model: &Model, cfg: &EvalConfig, force: bool) -> Result<EvalReport, EvalError> {
    run(phi, model, cfg, force)
}

/// Evaluates with some junctions resolved by per-site predicates.
///
/// A side given as `Some` has each of its junctions replaced by the
/// conditional on that site's predicate; a side given as `None` keeps its
/// min or max. This is the value of the specialised formula without building
/// it.
pub fn evaluate_resolved(
    phi: &Formula,
    model: &Model,
    min: Option<&[Predicate]>,
    max: Option<&[Predicate]>,
    cfg: &EvalConfig,
) -> Result<EvalReport, EvalError> {
    cfg.check()?;
    let plan = Plan::compile(phi, model)?;
    if let Some(p) = min {
        check_side("min", p, plan.min_sites, plan.states)?;
    }
    if let Some(p) = max {
        check_side("max", p, plan.max_sites, plan.states)?;
    }
    let mut engine = Engine::new(&plan, *cfg, false).resolving(min, max);
    let result = engine.eval(plan.root())?;
    Ok(engine.report(result))
}

/// One position of a game path as presented to strategies.
///
/// Positions are colour-insensitive: re-entering a fixed point through its
/// colour shows up as `Recur` of the binder, whichever colour was used.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PathStep {
    Node { node: NodeId, state: usize },
    Recur { binder: NodeId, state: usize },
}

/// Resolves the choices of one player.
pub trait PathStrategy {
    /// `true` selects the left operand of junction `site`. `path` ends with
    /// the junction position itself.
    fn choose(&self, site: usize, path: &[PathStep], state: usize) -> bool;

    /// The per-site predicates, when the choice depends only on the state.
    fn as_memoriless(&self) -> Option<&[Predicate]> {
        None
    }
}

/// A memoriless side: one predicate per site.
#[derive(Debug, Clone, Copy)]
pub struct Memoriless<'a>(pub &'a [Predicate]);

impl PathStrategy for Memoriless<'_> {
    fn choose(&self, site: usize, _path: &[PathStep], state: usize) -> bool {
        self.0[site].get(state)
    }

    fn as_memoriless(&self) -> Option<&[Predicate]> {
        Some(self.0)
    }
}

/// Always the left operand (or always the right).
#[derive(Debug, Clone, Copy)]
pub struct ConstantStrategy(pub bool);

impl PathStrategy for ConstantStrategy {
    fn choose(&self, _site: usize, _path: &[PathStep], _state: usize) -> bool {
        self.0
    }
}

/// A history-dependent strategy given by a closure.
pub struct FnStrategy<F>(pub F);

impl<F> PathStrategy for FnStrategy<F>
where
    F: Fn(usize, &[PathStep], usize) -> bool,
{
    fn choose(&self, site: usize, path: &[PathStep], state: usize) -> bool {
        (self.0)(site, path, state)
    }
}

fn check_side(kind: &'static str, preds: &[Predicate], sites: usize, states: usize) -> Result<(), EvalError> {
    if preds.len() != sites {
        return Err(EvalError::StrategyShape {
            kind,
            expected: sites,
            found: preds.len(),
        });
    }
    if let Some(p) = preds.iter().find(|p| p.len() != states) {
        return Err(EvalError::StrategyShape {
            kind,
            expected: states,
            found: p.len(),
        });
    }
    Ok(())
}

/// Value of the game with both players' choices fixed, as a
/// `(lower, upper)` pair.
///
/// When both sides are memoriless (or have no sites to resolve) the exact
/// fixed point of the resolved system is returned twice. Otherwise the
/// result is the depth-bounded unfolding of [`unfold_with_strategies`].
pub fn evaluate_with_strategies(
    phi: &Formula,
    model: &Model,
    sigma_min: &dyn PathStrategy,
    sigma_max: &dyn PathStrategy,
    cfg: &EvalConfig,
    depth: usize,
) -> Result<(Expectation, Expectation), EvalError> {
    cfg.check()?;
    let plan = Plan::compile(phi, model)?;
    let n = plan.states;
    let min = memoriless_side(sigma_min, plan.min_sites);
    let max = memoriless_side(sigma_max, plan.max_sites);
    if let (Some(min), Some(max)) = (&min, &max) {
        check_side("min", min, plan.min_sites, n)?;
        check_side("max", max, plan.max_sites, n)?;
        let mut engine = Engine::new(&plan, *cfg, false).resolving(Some(min), Some(max));
        let result = Expectation::new_unchecked(engine.eval(plan.root())?);
        return Ok((result.clone(), result));
    }
    let v = unfold_plan(&plan, sigma_min, sigma_max, depth, cfg.node_cap)?;
    Ok((v.clone(), v))
}

fn memoriless_side(s: &dyn PathStrategy, sites: usize) -> Option<Vec<Predicate>> {
    if sites == 0 {
        return Some(Vec::new());
    }
    s.as_memoriless().map(<[Predicate]>::to_vec)
}

/// The depth-bounded unfolding of the strategy-resolved semantics.
///
/// A binder may be unfolded at most `depth` times along any path; past that,
/// the occurrence contributes the binder's seed (0 for `mu`, 1 for `nu`,
/// `x` for `fix(x)`). This is the n-fold Kleene approximant, computed per
/// state with the full path available to the strategies. For `mu`-only
/// formulae it approaches the exact value from below, for `nu`-only ones from
/// above.
pub fn unfold_with_strategies(
    phi: &Formula,
    model: &Model,
    sigma_min: &dyn PathStrategy,
    sigma_max: &dyn PathStrategy,
    depth: usize,
    node_cap: usize,
) -> Result<Expectation, EvalError> {
    let plan = Plan::compile(phi, model)?;
    unfold_plan(&plan, sigma_min, sigma_max, depth, node_cap)
}

fn unfold_plan(
    plan: &Plan<'_>,
    sigma_min: &dyn PathStrategy,
    sigma_max: &dyn PathStrategy,
    depth: usize,
    node_cap: usize,
) -> Result<Expectation, EvalError> {
    let memo = (plan.min_sites == 0 || sigma_min.as_memoriless().is_some())
        && (plan.max_sites == 0 || sigma_max.as_memoriless().is_some());
    let mut u = Unfolder {
        plan,
        sigma_min,
        sigma_max,
        depth,
        levels: vec![0; plan.binders.len()],
        path: Vec::new(),
        memo: memo.then(HashMap::new),
        visited: 0,
        node_cap,
    };
    let values = (0..plan.states)
        .map(|s| u.value(plan.root(), s))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Expectation::new_unchecked(values))
}

/// A position with the remaining unfoldings of the binders in scope.
pub(crate) type MemoKey = (NodeId, usize, Vec<usize>);

struct Unfolder<'p, 'a, 's> {
    plan: &'p Plan<'a>,
    sigma_min: &'s dyn PathStrategy,
    sigma_max: &'s dyn PathStrategy,
    depth: usize,
    /// Remaining body evaluations per binder: the entry plus `depth` re-entries.
    levels: Vec<usize>,
    path: Vec<PathStep>,
    memo: Option<HashMap<MemoKey, f64>>,
    visited: usize,
    node_cap: usize,
}

impl Unfolder<'_, '_, '_> {
    fn value(&mut self, id: NodeId, state: usize) -> Result<f64, EvalError> {
        let key = match &self.memo {
            Some(memo) => {
                let key = (
                    id,
                    state,
                    self.plan.scope[id].iter().map(|&b| self.levels[b]).collect::<Vec<_>>(),
                );
                if let Some(&v) = memo.get(&key) {
                    return Ok(v);
                }
                Some(key)
            }
            None => None,
        };
        self.visited += 1;
        if self.visited > self.node_cap {
            return Err(EvalError::NodeCap(self.node_cap));
        }
        let mark = self.path.len();
        let v = match self.plan.nodes[id] {
            Node::Var { binder } => self.unfold(binder, state, true)?,
            Node::Const { values } => values[state],
            Node::Modal { transition, body } => {
                self.path.push(PathStep::Node { node: id, state });
                let row = &transition.rows()[state];
                let mut acc = row.payoff_weight;
                for &(to, p) in &row.successors {
                    acc += p * self.value(body, to)?;
                }
                acc
            }
            Node::Min { site, left, right } => {
                self.path.push(PathStep::Node { node: id, state });
                let go_left = self.sigma_min.choose(site, &self.path, state);
                self.value(if go_left { left } else { right }, state)?
            }
            Node::Max { site, left, right } => {
                self.path.push(PathStep::Node { node: id, state });
                let go_left = self.sigma_max.choose(site, &self.path, state);
                self.value(if go_left { left } else { right }, state)?
            }
            Node::Cond {
                predicate,
                then,
                otherwise,
            } => {
                self.path.push(PathStep::Node { node: id, state });
                self.value(if predicate.get(state) { then } else { otherwise }, state)?
            }
            Node::Bind { binder, .. } => {
                self.path.push(PathStep::Node { node: id, state });
                let saved = self.levels[binder];
                self.levels[binder] = self.depth + 1;
                let v = self.unfold(binder, state, false);
                self.levels[binder] = saved;
                v?
            }
        };
        self.path.truncate(mark);
        let v = v.clamp(0.0, 1.0);
        if let (Some(memo), Some(key)) = (&mut self.memo, key) {
            memo.insert(key, v);
        }
        Ok(v)
    }

    /// Enters the body of `binder`; `reentry` marks a visit through its
    /// variable, which the path records as `Recur`.
    fn unfold(&mut self, binder: usize, state: usize, reentry: bool) -> Result<f64, EvalError> {
        let info = &self.plan.binders[binder];
        let level = self.levels[binder];
        if level == 0 {
            return Ok(info.kind.seed());
        }
        let (node, body) = (info.node, info.body);
        let mark = self.path.len();
        if reentry {
            self.path.push(PathStep::Recur { binder: node, state });
        }
        self.levels[binder] = level - 1;
        let v = self.value(body, state);
        self.levels[binder] = level;
        self.path.truncate(mark);
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse;
    use crate::model::{Row, StateSpace, Transition, Valuation};

    fn two_state() -> Model {
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
        v.expectations
            .insert("half".into(), Expectation::new(vec![0.5, 0.25]).unwrap());
        v.predicates.insert("atA".into(), Predicate::new(vec![true, false]));
        Model::new(StateSpace::new(["A", "B"]).unwrap(), v)
    }

    fn eval(text: &str) -> EvalReport {
        evaluate(&parse(text).unwrap(), &two_state(), &EvalConfig::default()).unwrap()
    }

    #[test]
    fn identity_bodies() {
        assert_eq!(eval("mu X . X").result.values(), &[0.0, 0.0]);
        assert_eq!(eval("nu X . X").result.values(), &[1.0, 1.0]);
        let r = eval("fix(0.3) X . X");
        assert_eq!(r.result.values(), &[0.3, 0.3]);
    }

    #[test]
    fn reach_formulas() {
        let r = eval("mu X . {k} atB \\/ {k} X");
        for v in r.result.values() {
            assert!((v - 0.5).abs() < 1e-6, "{v}");
        }
        assert!(r.converged);
        let r = eval("mu X . {k} (atB \\/ X)");
        for v in r.result.values() {
            assert!((v - 1.0).abs() < 1e-6, "{v}");
        }
    }

    #[test]
    fn junctions_are_pointwise() {
        let r = eval("atB \\/ half");
        assert_eq!(r.result.values(), &[0.5, 1.0]);
        let r = eval("atB /\\ half");
        assert_eq!(r.result.values(), &[0.0, 0.25]);
        let r = eval("if atA then atB else half");
        assert_eq!(r.result.values(), &[0.0, 0.25]);
    }

    #[test]
    fn non_convergence_is_reported() {
        let cfg = EvalConfig {
            max_iterations: 2,
            ..EvalConfig::default()
        };
        let r = evaluate(&parse("mu X . {k} atB \\/ {k} X").unwrap(), &two_state(), &cfg).unwrap();
        assert!(!r.converged);
        assert_eq!(r.fixpoints[0].max_iterations, 2);
    }

    #[test]
    fn fix_on_choice_body_needs_force() {
        let phi = parse("fix(0.5) X . {k} X \\/ half").unwrap();
        let m = two_state();
        let cfg = EvalConfig::default();
        assert!(matches!(
            evaluate_fix(&phi, &m, &cfg, false),
            Err(EvalError::NondeterministicFixBody(_))
        ));
        let r = evaluate_fix(&phi, &m, &cfg, true).unwrap();
        assert!(r.converged);
    }

    #[test]
    fn depth_zero_unfolding_gives_seeds() {
        let m = two_state();
        let l = ConstantStrategy(true);
        for (text, want) in [("mu X . X", 0.0), ("nu X . X", 1.0)] {
            let phi = parse(text).unwrap();
            let (lo, hi) = evaluate_with_strategies(&phi, &m, &l, &l, &EvalConfig::default(), 0).unwrap();
            assert_eq!(lo.values(), &[want, want]);
            assert_eq!(hi.values(), &[want, want]);
            let u = unfold_with_strategies(&phi, &m, &FnStrategy(|_, _: &[PathStep], _| true), &l, 0, 1000).unwrap();
            assert_eq!(u.values(), &[want, want]);
        }
    }

    #[test]
    fn unfolding_approaches_fixpoint() {
        let m = two_state();
        let phi = parse("mu X . {k} atB \\/ {k} X").unwrap();
        let left = FnStrategy(|_, _: &[PathStep], s: usize| s == 0);
        let min = ConstantStrategy(true);
        let shallow = unfold_with_strategies(&phi, &m, &min, &left, 1, 1000).unwrap();
        let deep = unfold_with_strategies(&phi, &m, &min, &left, 30, 1_000_000).unwrap();
        assert!(shallow.le(&deep, 0.0));
        assert!((deep[0] - 0.5).abs() < 1e-9);
    }
}
