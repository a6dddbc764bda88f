//! Brute-force ground truth on tiny instances.
//!
//! [`brute_minimax`] evaluates a formula under every pair of memoriless
//! strategy tuples and takes the minimax and maximin pointwise. Each inner
//! evaluation is of a purely probabilistic system, so the result depends on
//! the evaluator only through plain fixed-point iteration, not through its
//! handling of min and max.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::compile::Plan;
use crate::eval::{evaluate, Engine, EvalConfig, EvalError};
use crate::formula::{parse, reduce, FixKind, Formula};
use crate::io::model_to_json;
use crate::model::{Expectation, Model, Predicate, Row, StateSpace, Transition, Valuation};

/// Largest strategy space [`brute_minimax`] will enumerate.
pub const MAX_STRATEGY_BITS: usize = 20;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("strategy space of 2^{0} tuples exceeds 2^{MAX_STRATEGY_BITS}")]
    Budget(usize),
    #[error("evaluation under a fixed strategy pair did not converge")]
    NotConverged,
    #[error("size bounds exceed the tiny-instance limits")]
    Bounds,
    #[error("writing counterexample: {0}")]
    Dump(#[from] std::io::Error),
}

/// Size limits for generated instances.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SizeBounds {
    pub max_states: usize,
    pub max_min_sites: usize,
    pub max_max_sites: usize,
    pub max_binders: usize,
}

impl Default for SizeBounds {
    fn default() -> Self {
        SizeBounds {
            max_states: 4,
            max_min_sites: 2,
            max_max_sites: 2,
            max_binders: 2,
        }
    }
}

impl SizeBounds {
    fn check(&self) -> Result<(), OracleError> {
        if self.max_states == 0 || self.max_states > 4 || self.max_min_sites > 2 || self.max_max_sites > 2 || self.max_binders > 2 {
            return Err(OracleError::Bounds);
        }
        Ok(())
    }
}

/// A model of at most four states with a reduced formula of at most two
/// sites of each kind and two binders.
#[derive(Debug, Clone, PartialEq)]
pub struct TinyInstance {
    pub model: Model,
    pub phi: Formula,
}

/// Shapes drawn on alongside fully random formulae. The first nests a `nu`
/// inside a `mu` with both variables under the same modality.
const TEMPLATES: [&str; 5] = [
    "mu X . nu Y . {k0} (X \\/ b /\\ Y)",
    "mu X . {k0} a \\/ {k1} X",
    "mu X . {k0} a \\/ {k0} (X /\\ {k1} X)",
    "nu X . a /\\ [K] X",
    "mu X . if g then {k0} X \\/ b else {k1} (a /\\ X)",
];

fn random_row(rng: &mut impl Rng, n: usize) -> Row {
    let mut targets: Vec<usize> = (0..n).filter(|_| rng.gen_bool(0.6)).collect();
    if targets.is_empty() {
        targets.push(rng.gen_range(0..n));
    }
    let total = rng.gen_bool(0.5);
    let mass = if total { 1.0 } else { rng.gen_range(0.2..0.9) };
    let weights: Vec<f64> = targets.iter().map(|_| rng.gen_range(0.1..1.0)).collect();
    let sum: f64 = weights.iter().sum();
    let successors = targets
        .into_iter()
        .zip(weights)
        .map(|(t, w)| (t, mass * w / sum))
        .collect();
    let payoff = if total || rng.gen_bool(0.5) {
        0.0
    } else {
        rng.gen_range(0.0..(1.0 - mass))
    };
    Row::new(successors, payoff)
}

/// A random model over `n` states binding `k0`, `k1`, the set `K = {k0, k1}`,
/// expectations `a` and `b`, and the predicate `g`.
pub fn random_model(rng: &mut impl Rng, n: usize) -> Model {
    let mut v = Valuation::default();
    for k in ["k0", "k1"] {
        v.transitions
            .insert(k.into(), Transition::new((0..n).map(|_| random_row(rng, n)).collect()));
    }
    v.transition_sets
        .insert("K".into(), vec!["k0".into(), "k1".into()]);
    for a in ["a", "b"] {
        let values = (0..n).map(|_| rng.gen_range(0.0..=1.0)).collect();
        v.expectations.insert(a.into(), Expectation::new_unchecked(values));
    }
    v.predicates
        .insert("g".into(), Predicate::from_fn(n, |_| rng.gen_bool(0.5)));
    Model::new(StateSpace::indexed(n), v)
}

struct Budget {
    min: usize,
    max: usize,
    binders: usize,
    nodes: usize,
    fresh: usize,
}

fn gen(rng: &mut impl Rng, scope: &mut Vec<String>, b: &mut Budget, depth: usize, kinds: &[FixKind]) -> Formula {
    let leaf = depth >= 5 || b.nodes == 0;
    b.nodes = b.nodes.saturating_sub(1);
    let mut options = vec![0u8];
    if !scope.is_empty() {
        options.extend([1, 1]);
    }
    if !leaf {
        options.extend([2, 2, 5]);
        if b.min > 0 {
            options.extend([3, 3]);
        }
        if b.max > 0 {
            options.extend([4, 4]);
        }
        if b.binders > 0 {
            options.extend([6, 6]);
        }
    }
    match *options.choose(rng).expect("non-empty") {
        0 => Formula::constant(if rng.gen_bool(0.5) { "a" } else { "b" }),
        1 => Formula::var(scope.choose(rng).expect("scope").clone()),
        2 => {
            let k = if rng.gen_bool(0.5) { "k0" } else { "k1" };
            Formula::modal(k, gen(rng, scope, b, depth + 1, kinds))
        }
        3 => {
            b.min -= 1;
            let l = gen(rng, scope, b, depth + 1, kinds);
            Formula::min(l, gen(rng, scope, b, depth + 1, kinds))
        }
        4 => {
            b.max -= 1;
            let l = gen(rng, scope, b, depth + 1, kinds);
            Formula::max(l, gen(rng, scope, b, depth + 1, kinds))
        }
        5 => {
            let t = gen(rng, scope, b, depth + 1, kinds);
            Formula::cond("g", t, gen(rng, scope, b, depth + 1, kinds))
        }
        _ => {
            b.binders -= 1;
            b.fresh += 1;
            let name = format!("X{}", b.fresh);
            scope.push(name.clone());
            let body = gen(rng, scope, b, depth + 1, kinds);
            scope.pop();
            Formula::fixpoint(*kinds.choose(rng).expect("kinds"), name, body)
        }
    }
}

/// A random closed, reduced formula over the symbols of [`random_model`]
/// within the given site and binder bounds.
pub fn random_formula(rng: &mut impl Rng, bounds: &SizeBounds) -> Formula {
    random_formula_with(rng, bounds, &[FixKind::Mu, FixKind::Nu])
}

fn random_formula_with(rng: &mut impl Rng, bounds: &SizeBounds, kinds: &[FixKind]) -> Formula {
    let mut b = Budget {
        min: bounds.max_min_sites,
        max: bounds.max_max_sites,
        binders: bounds.max_binders,
        nodes: 14,
        fresh: 0,
    };
    gen(rng, &mut Vec::new(), &mut b, 0, kinds).numbered()
}

/// A random body with free variable `X` and no min/max junctions, for
/// comparing binders of different kinds over the same body.
pub fn random_probabilistic_body(rng: &mut impl Rng) -> Formula {
    let bounds = SizeBounds {
        max_states: 4,
        max_min_sites: 0,
        max_max_sites: 0,
        max_binders: 1,
    };
    let mut b = Budget {
        min: 0,
        max: 0,
        binders: bounds.max_binders,
        nodes: 14,
        fresh: 0,
    };
    let mut scope = vec!["X".to_string()];
    gen(rng, &mut scope, &mut b, 1, &[FixKind::Mu, FixKind::Nu]).numbered()
}

fn fits(phi: &Formula, bounds: &SizeBounds) -> bool {
    let (min, max) = phi.choice_sites();
    let binders = phi.binder_names().len();
    min <= bounds.max_min_sites && max <= bounds.max_max_sites && binders <= bounds.max_binders
}

/// A random instance, deterministic in `seed`. About half the formulae come
/// from a fixed set of shapes, among them a `nu` nested in a `mu`; the rest
/// are drawn from the grammar.
pub fn random_instance(seed: u64, bounds: &SizeBounds) -> Result<TinyInstance, OracleError> {
    bounds.check()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(1..=bounds.max_states);
    let model = random_model(&mut rng, n);
    let pick = rng.gen_range(0..2 * TEMPLATES.len());
    let phi = TEMPLATES
        .get(pick)
        .map(|t| reduce(&parse(t).expect("template parses"), &model.valuation).expect("template reduces"))
        .filter(|phi| fits(phi, bounds))
        .unwrap_or_else(|| random_formula(&mut rng, bounds));
    Ok(TinyInstance { model, phi })
}

/// Whether some binder of one kind has a binder of another kind in its body.
pub fn has_alternation(phi: &Formula) -> bool {
    fn go(f: &Formula, outer: Option<FixKind>) -> bool {
        match f {
            Formula::Fixpoint { kind, body, .. } => {
                let differs = outer.is_some_and(|o| std::mem::discriminant(&o) != std::mem::discriminant(kind));
                differs || go(body, Some(*kind))
            }
            _ => f.children().into_iter().any(|c| go(c, outer)),
        }
    }
    go(phi, None)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BruteResult {
    /// Pointwise min over Min tuples of max over Max tuples.
    pub minimax: Expectation,
    /// Pointwise max over Max tuples of min over Min tuples.
    pub maximin: Expectation,
    /// A Min tuple (in enumeration order) achieving the minimax at every
    /// state, if there is one.
    pub uniform_min: Option<Vec<Predicate>>,
    /// A Max tuple achieving the maximin at every state, if there is one.
    pub uniform_max: Option<Vec<Predicate>>,
    pub evaluations: usize,
}

/// The `index`-th tuple in lexicographic order of its `(site, state)`
/// booleans, `false` before `true`.
fn tuple(index: usize, sites: usize, n: usize) -> Vec<Predicate> {
    let bits = sites * n;
    (0..sites)
        .map(|site| Predicate::from_fn(n, |s| index >> (bits - 1 - (site * n + s)) & 1 == 1))
        .collect()
}

/// Exact minimax and maximin over all memoriless strategy tuples.
pub fn brute_minimax(inst: &TinyInstance, cfg: &EvalConfig) -> Result<BruteResult, OracleError> {
    cfg.check()?;
    let plan = Plan::compile(&inst.phi, &inst.model).map_err(EvalError::from)?;
    let n = plan.states;
    let bits = (plan.min_sites + plan.max_sites) * n;
    if bits > MAX_STRATEGY_BITS {
        return Err(OracleError::Budget(bits));
    }
    let n_min = 1usize << (plan.min_sites * n);
    let n_max = 1usize << (plan.max_sites * n);
    let min_tuples: Vec<_> = (0..n_min).map(|i| tuple(i, plan.min_sites, n)).collect();
    let max_tuples: Vec<_> = (0..n_max).map(|i| tuple(i, plan.max_sites, n)).collect();
    let mut values = Vec::with_capacity(n_min * n_max);
    for lo in &min_tuples {
        for hi in &max_tuples {
            let mut engine = Engine::new(&plan, *cfg, false).resolving(Some(lo), Some(hi));
            let v = engine.eval(plan.root())?;
            if !engine.report(Vec::new()).converged {
                return Err(OracleError::NotConverged);
            }
            values.push(v);
        }
    }
    let at = |i: usize, j: usize| &values[i * n_max + j];

    // Max-inner then Min-outer, and the other way round.
    let best_reply_max: Vec<Vec<f64>> = (0..n_min)
        .map(|i| (0..n)
            .map(|s| (0..n_max).map(|j| at(i, j)[s]).fold(f64::NEG_INFINITY, f64::max))
            .collect())
        .collect();
    let minimax: Vec<f64> = (0..n)
        .map(|s| best_reply_max.iter().map(|r| r[s]).fold(f64::INFINITY, f64::min))
        .collect();
    let best_reply_min: Vec<Vec<f64>> = (0..n_max)
        .map(|j| (0..n)
            .map(|s| (0..n_min).map(|i| at(i, j)[s]).fold(f64::INFINITY, f64::min))
            .collect())
        .collect();
    let maximin: Vec<f64> = (0..n)
        .map(|s| best_reply_min.iter().map(|r| r[s]).fold(f64::NEG_INFINITY, f64::max))
        .collect();

    let uniform = |replies: &[Vec<f64>], target: &[f64]| {
        replies
            .iter()
            .position(|r| r.iter().zip(target).all(|(a, b)| (a - b).abs() <= 1e-9))
    };
    Ok(BruteResult {
        uniform_min: uniform(&best_reply_max, &minimax).map(|i| min_tuples[i].clone()),
        uniform_max: uniform(&best_reply_min, &maximin).map(|j| max_tuples[j].clone()),
        minimax: Expectation::new_unchecked(minimax),
        maximin: Expectation::new_unchecked(maximin),
        evaluations: values.len(),
    })
}

/// Signature of an evaluator under test.
pub type Evaluator<'e> = dyn Fn(&Formula, &Model, &EvalConfig) -> Result<Expectation, EvalError> + 'e;

/// The evaluator of this crate.
pub fn kozen(phi: &Formula, model: &Model, cfg: &EvalConfig) -> Result<Expectation, EvalError> {
    Ok(evaluate(phi, model, cfg)?.result)
}

#[derive(Debug, Clone)]
pub struct Counterexample {
    pub seed: u64,
    pub instance: TinyInstance,
    pub minimax: Expectation,
    pub maximin: Expectation,
    pub evaluated: Expectation,
    /// Largest pointwise disagreement among the three.
    pub gap: f64,
    /// Files written for replay, if a dump directory was given.
    pub files: Vec<PathBuf>,
}

#[derive(Debug, Clone, Default)]
pub struct CrosscheckReport {
    pub checks: usize,
    pub alternating: usize,
    pub worst_gap: f64,
    pub failures: Vec<Counterexample>,
}

impl CrosscheckReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn summary(&self) -> String {
        let mut s = String::new();
        let _ = write!(
            s,
            "{} {} instances ({} alternating), worst gap {:.3e}",
            if self.passed() { "pass" } else { "FAIL" },
            self.checks,
            self.alternating,
            self.worst_gap
        );
        for f in &self.failures {
            let _ = write!(s, "\n  seed {}: gap {:.3e} for {}", f.seed, f.gap, f.instance.phi);
            for p in &f.files {
                let _ = write!(s, "\n    {}", p.display());
            }
        }
        s
    }
}

/// Checks minimax = maximin = `evaluator` on `count` instances with seeds
/// `seed`, `seed + 1`, ... Disagreements beyond `slack` are collected and,
/// given `dump`, written there as a model file and formula text.
pub fn crosscheck(
    count: usize,
    seed: u64,
    bounds: &SizeBounds,
    cfg: &EvalConfig,
    slack: f64,
    evaluator: &Evaluator<'_>,
    dump: Option<&Path>,
) -> Result<CrosscheckReport, OracleError> {
    let mut report = CrosscheckReport::default();
    for i in 0..count as u64 {
        let s = seed.wrapping_add(i);
        let inst = random_instance(s, bounds)?;
        let brute = brute_minimax(&inst, cfg)?;
        let evaluated = evaluator(&inst.phi, &inst.model, cfg)?;
        let gap = brute
            .minimax
            .distance(&brute.maximin)
            .max(brute.minimax.distance(&evaluated))
            .max(brute.maximin.distance(&evaluated));
        report.checks += 1;
        report.alternating += usize::from(has_alternation(&inst.phi));
        report.worst_gap = report.worst_gap.max(gap);
        if gap > slack {
            let mut files = Vec::new();
            if let Some(dir) = dump {
                std::fs::create_dir_all(dir)?;
                let model = dir.join(format!("counterexample-{s}.json"));
                let formula = dir.join(format!("counterexample-{s}.qmu"));
                std::fs::write(&model, model_to_json(&inst.model))?;
                std::fs::write(&formula, format!("{}\n", inst.phi))?;
                files = vec![model, formula];
            }
            report.failures.push(Counterexample {
                seed: s,
                instance: inst,
                minimax: brute.minimax,
                maximin: brute.maximin,
                evaluated,
                gap,
                files,
            });
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::examples::vardi_model;

    #[test]
    fn tuples_enumerate_lexicographically() {
        assert_eq!(tuple(0, 2, 2)[0].values(), &[false, false]);
        let t = tuple(0b1000, 2, 2);
        assert_eq!(t[0].values(), &[true, false]);
        assert_eq!(t[1].values(), &[false, false]);
        assert_eq!(tuple(0b0001, 2, 2)[1].values(), &[false, true]);
    }

    #[test]
    fn vardi_minimax() {
        let (model, full) = vardi_model();
        let phi = reduce(&full, &model.valuation).unwrap();
        let r = brute_minimax(&TinyInstance { model, phi }, &EvalConfig::default()).unwrap();
        for x in r.minimax.values().iter().chain(r.maximin.values()) {
            assert!((x - 0.5).abs() < 1e-6);
        }
        assert_eq!(r.uniform_max.unwrap()[0].values(), &[true, false]);
        assert_eq!(r.evaluations, 4);
    }

    #[test]
    fn same_seed_same_instance() {
        let b = SizeBounds::default();
        assert_eq!(random_instance(11, &b).unwrap(), random_instance(11, &b).unwrap());
    }

    #[test]
    fn generated_models_validate() {
        let b = SizeBounds::default();
        for seed in 0..1000 {
            let inst = random_instance(seed, &b).unwrap();
            assert!(inst.model.validate().is_empty(), "seed {seed}");
            assert!(inst.phi.is_closed() && inst.phi.is_reduced());
            assert!(fits(&inst.phi, &b), "seed {seed}: {}", inst.phi);
        }
    }

    #[test]
    fn single_state_without_sites_is_constant() {
        let b = SizeBounds {
            max_states: 1,
            max_min_sites: 0,
            max_max_sites: 0,
            max_binders: 2,
        };
        for seed in 0..20 {
            let inst = random_instance(seed, &b).unwrap();
            assert_eq!(inst.phi.choice_sites(), (0, 0));
            let r = brute_minimax(&inst, &EvalConfig::default()).unwrap();
            assert_eq!(r.evaluations, 1);
            assert_eq!(r.minimax, r.maximin);
        }
    }

    #[test]
    fn budget_is_enforced() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let model = random_model(&mut rng, 4);
        let phi = parse("a /\\ b /\\ a /\\ b \\/ (a \\/ b \\/ a)").unwrap();
        assert!(matches!(
            brute_minimax(&TinyInstance { model, phi }, &EvalConfig::default()),
            Err(OracleError::Budget(24))
        ));
    }

    #[test]
    fn faulty_evaluator_is_caught() {
        let dir = tempfile::tempdir().unwrap();
        let flipped = |phi: &Formula, m: &Model, cfg: &EvalConfig| {
            kozen(&swap_junctions(phi), m, cfg)
        };
        let r = crosscheck(30, 1, &SizeBounds::default(), &EvalConfig::default(), 1e-6, &flipped, Some(dir.path())).unwrap();
        assert!(!r.passed());
        let first = &r.failures[0];
        assert_eq!(first.files.len(), 2);
        let text = std::fs::read_to_string(&first.files[0]).unwrap();
        assert_eq!(crate::io::model_from_json(&text).unwrap(), first.instance.model);
    }

    fn swap_junctions(phi: &Formula) -> Formula {
        match phi {
            Formula::MaxJ { left, right, .. } => Formula::min(swap_junctions(left), swap_junctions(right)),
            Formula::MinJ { left, right, .. } => Formula::max(swap_junctions(left), swap_junctions(right)),
            Formula::Modal { transition, body } => Formula::modal(transition.clone(), swap_junctions(body)),
            Formula::Cond { predicate, then, otherwise } => {
                Formula::cond(predicate.clone(), swap_junctions(then), swap_junctions(otherwise))
            }
            Formula::Fixpoint { kind, var, body } => Formula::fixpoint(*kind, var.clone(), swap_junctions(body)),
            other => other.clone(),
        }
    }
}
