//! The formula game, played out.
//!
//! A position is a formula node at a state, or a final payoff. Constants end
//! the game with their value, modalities move to a sampled successor or halt
//! with the transition's halt payoff, junctions are resolved by the two
//! strategies, conditionals by their predicate. Entering a binder creates a
//! fresh colour, identified by the binder and the path length at creation;
//! reaching the binder's variable re-enters the body under that colour.
//!
//! A playout stops once some colour has been re-entered more than
//! `max_depth` times, and the path is scored as if it went on forever under
//! that colour: 0 for `mu`, 1 for `nu`, `x` for `fix(x)`. A secondary step
//! budget of `max_depth` times the formula size reports `(0, 1)`.

use std::collections::HashMap;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::compile::{CompileError, Node, NodeId, Plan};
use crate::eval::{MemoKey, PathStep, PathStrategy};
use crate::formula::{FixKind, Formula};
use crate::model::{row_halt_payoff, Model, EPS_REPR};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GameError {
    #[error(transparent)]
    Compile(#[from] CompileError),
    #[error("state {0} is out of range")]
    BadState(usize),
    #[error("max_depth must be at least 1")]
    BadDepth,
    #[error("n_paths must be at least 1")]
    NoPaths,
    #[error("game tree exceeded {0} positions")]
    NodeCap(usize),
}

/// Why a playout was cut short.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Truncation {
    /// A colour of this binder kind was re-entered too often.
    Colour(FixKind),
    /// The step budget ran out.
    Budget,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlayoutResult {
    pub value_low: f64,
    pub value_high: f64,
    pub terminated: bool,
    /// Positions on the path, the final payoff included.
    pub steps: usize,
    pub truncation: Option<Truncation>,
}

impl PlayoutResult {
    fn payoff(y: f64, steps: usize) -> Self {
        PlayoutResult {
            value_low: y,
            value_high: y,
            terminated: true,
            steps,
            truncation: None,
        }
    }

    fn cut(low: f64, high: f64, steps: usize, why: Truncation) -> Self {
        PlayoutResult {
            value_low: low,
            value_high: high,
            terminated: false,
            steps,
            truncation: Some(why),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Estimate {
    pub mean_low: f64,
    pub mean_high: f64,
    /// Standard error of the mean of the upper values.
    pub std_error: f64,
    pub n_truncated: usize,
    pub n_paths: usize,
}

#[derive(Debug, Clone, Copy)]
struct Colour {
    binder: usize,
    created: usize,
    count: usize,
}

/// A formula compiled against a model, ready to be played.
pub struct Game<'a> {
    plan: Plan<'a>,
}

impl<'a> Game<'a> {
    pub fn new(phi: &Formula, model: &'a Model) -> Result<Self, GameError> {
        Ok(Game {
            plan: Plan::compile(phi, model)?,
        })
    }

    fn check(&self, s0: usize, max_depth: usize) -> Result<(), GameError> {
        if s0 >= self.plan.states {
            return Err(GameError::BadState(s0));
        }
        if max_depth == 0 {
            return Err(GameError::BadDepth);
        }
        Ok(())
    }

    /// Plays one game from `s0`, drawing one uniform number per modality.
    pub fn play<R: Rng + ?Sized>(
        &self,
        s0: usize,
        sigma_min: &dyn PathStrategy,
        sigma_max: &dyn PathStrategy,
        max_depth: usize,
        rng: &mut R,
    ) -> Result<PlayoutResult, GameError> {
        self.check(s0, max_depth)?;
        let plan = &self.plan;
        let budget = max_depth.saturating_mul(plan.nodes.len());
        let mut colours: Vec<Colour> = Vec::new();
        let mut current = vec![usize::MAX; plan.binders.len()];
        let mut path = Vec::new();
        let (mut node, mut state) = (plan.root(), s0);
        let mut steps = 0;
        loop {
            steps += 1;
            if steps > budget {
                return Ok(PlayoutResult::cut(0.0, 1.0, steps - 1, Truncation::Budget));
            }
            match plan.nodes[node] {
                Node::Const { values } => return Ok(PlayoutResult::payoff(values[state], steps + 1)),
                Node::Modal { transition, body } => {
                    path.push(PathStep::Node { node, state });
                    let row = &transition.rows()[state];
                    match sample(&row.successors, row.is_total(), rng.gen::<f64>()) {
                        Some(to) => {
                            state = to;
                            node = body;
                        }
                        None => return Ok(PlayoutResult::payoff(row_halt_payoff(row), steps + 1)),
                    }
                }
                Node::Min { site, left, right } => {
                    path.push(PathStep::Node { node, state });
                    node = if sigma_min.choose(site, &path, state) { left } else { right };
                }
                Node::Max { site, left, right } => {
                    path.push(PathStep::Node { node, state });
                    node = if sigma_max.choose(site, &path, state) { left } else { right };
                }
                Node::Cond {
                    predicate,
                    then,
                    otherwise,
                } => {
                    path.push(PathStep::Node { node, state });
                    node = if predicate.get(state) { then } else { otherwise };
                }
                Node::Bind { binder, body } => {
                    path.push(PathStep::Node { node, state });
                    current[binder] = colours.len();
                    colours.push(Colour {
                        binder,
                        created: steps - 1,
                        count: 0,
                    });
                    node = body;
                }
                Node::Var { binder } => {
                    let info = &plan.binders[binder];
                    let colour = &mut colours[current[binder]];
                    debug_assert_eq!(colour.binder, binder);
                    debug_assert!(colour.created < steps);
                    colour.count += 1;
                    if colour.count > max_depth {
                        let y = info.kind.seed();
                        return Ok(PlayoutResult::cut(y, y, steps, Truncation::Colour(info.kind)));
                    }
                    path.push(PathStep::Recur {
                        binder: info.node,
                        state,
                    });
                    node = info.body;
                }
            }
        }
    }

    /// Averages `n_paths` playouts. Path `i` draws from the ChaCha8 stream
    /// `i` of `seed`, so the result does not depend on evaluation order.
    pub fn estimate(
        &self,
        s0: usize,
        sigma_min: &dyn PathStrategy,
        sigma_max: &dyn PathStrategy,
        n_paths: usize,
        max_depth: usize,
        seed: u64,
    ) -> Result<Estimate, GameError> {
        if n_paths == 0 {
            return Err(GameError::NoPaths);
        }
        let (mut low, mut high, mut high_sq) = (0.0, 0.0, 0.0);
        let mut n_truncated = 0;
        for i in 0..n_paths {
            let mut rng = path_rng(seed, i as u64);
            let r = self.play(s0, sigma_min, sigma_max, max_depth, &mut rng)?;
            low += r.value_low;
            high += r.value_high;
            high_sq += r.value_high * r.value_high;
            n_truncated += usize::from(!r.terminated);
        }
        let n = n_paths as f64;
        let mean_high = high / n;
        let std_error = if n_paths > 1 {
            let var = (high_sq - n * mean_high * mean_high).max(0.0) / (n - 1.0);
            (var / n).sqrt()
        } else {
            0.0
        };
        Ok(Estimate {
            mean_low: low / n,
            mean_high,
            std_error,
            n_truncated,
            n_paths,
        })
    }

    /// Exact expected value of the playout, by expanding every probabilistic
    /// branch. Colour truncation is as in [`Game::play`]; there is no step
    /// budget, only the cap on expanded positions.
    ///
    /// Subtrees are shared when both strategies are memoriless, since their
    /// value then depends only on the position and the colour counts.
    pub fn expand_tree(
        &self,
        s0: usize,
        sigma_min: &dyn PathStrategy,
        sigma_max: &dyn PathStrategy,
        depth: usize,
        node_cap: usize,
    ) -> Result<(f64, f64), GameError> {
        if s0 >= self.plan.states {
            return Err(GameError::BadState(s0));
        }
        let memo = (self.plan.min_sites == 0 || sigma_min.as_memoriless().is_some())
            && (self.plan.max_sites == 0 || sigma_max.as_memoriless().is_some());
        let mut t = Tree {
            plan: &self.plan,
            sigma_min,
            sigma_max,
            depth,
            node_cap,
            expanded: 0,
            counts: vec![0; self.plan.binders.len()],
            path: Vec::new(),
            memo: memo.then(HashMap::new),
        };
        t.value(self.plan.root(), s0)
    }
}

fn path_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Picks the successor whose cumulative bin holds `u`; a draw on a bin edge
/// goes to the lower index. `None` is a halt.
fn sample(successors: &[(usize, f64)], total: bool, u: f64) -> Option<usize> {
    let mut cum = 0.0;
    for &(to, p) in successors {
        cum += p;
        if u <= cum {
            return Some(to);
        }
    }
    if total {
        successors.last().map(|&(to, _)| to)
    } else {
        None
    }
}

struct Tree<'p, 'a, 's> {
    plan: &'p Plan<'a>,
    sigma_min: &'s dyn PathStrategy,
    sigma_max: &'s dyn PathStrategy,
    depth: usize,
    node_cap: usize,
    expanded: usize,
    /// Re-entries of the current colour of each binder.
    counts: Vec<usize>,
    path: Vec<PathStep>,
    memo: Option<HashMap<MemoKey, (f64, f64)>>,
}

impl Tree<'_, '_, '_> {
    fn value(&mut self, node: NodeId, state: usize) -> Result<(f64, f64), GameError> {
        let key = match &self.memo {
            Some(memo) => {
                let counts = self.plan.scope[node].iter().map(|&b| self.counts[b]).collect();
                let key = (node, state, counts);
                if let Some(&v) = memo.get(&key) {
                    return Ok(v);
                }
                Some(key)
            }
            None => None,
        };
        self.expanded += 1;
        if self.expanded > self.node_cap {
            return Err(GameError::NodeCap(self.node_cap));
        }
        let mark = self.path.len();
        let v = match self.plan.nodes[node] {
            Node::Const { values } => (values[state], values[state]),
            Node::Modal { transition, body } => {
                self.path.push(PathStep::Node { node, state });
                let row = &transition.rows()[state];
                let (mut lo, mut hi) = (0.0, 0.0);
                for &(to, p) in &row.successors {
                    let (l, h) = self.value(body, to)?;
                    lo += p * l;
                    hi += p * h;
                }
                if 1.0 - row.mass() > EPS_REPR {
                    lo += row.payoff_weight;
                    hi += row.payoff_weight;
                }
                (lo, hi)
            }
            Node::Min { site, left, right } => {
                self.path.push(PathStep::Node { node, state });
                let next = if self.sigma_min.choose(site, &self.path, state) { left } else { right };
                self.value(next, state)?
            }
            Node::Max { site, left, right } => {
                self.path.push(PathStep::Node { node, state });
                let next = if self.sigma_max.choose(site, &self.path, state) { left } else { right };
                self.value(next, state)?
            }
            Node::Cond {
                predicate,
                then,
                otherwise,
            } => {
                self.path.push(PathStep::Node { node, state });
                self.value(if predicate.get(state) { then } else { otherwise }, state)?
            }
            Node::Bind { binder, body } => {
                self.path.push(PathStep::Node { node, state });
                let saved = std::mem::replace(&mut self.counts[binder], 0);
                let v = self.value(body, state);
                self.counts[binder] = saved;
                v?
            }
            Node::Var { binder } => {
                let info = &self.plan.binders[binder];
                if self.counts[binder] >= self.depth {
                    let y = info.kind.seed();
                    (y, y)
                } else {
                    let body = info.body;
                    self.path.push(PathStep::Recur {
                        binder: info.node,
                        state,
                    });
                    self.counts[binder] += 1;
                    let v = self.value(body, state);
                    self.counts[binder] -= 1;
                    v?
                }
            }
        };
        self.path.truncate(mark);
        if let (Some(memo), Some(key)) = (&mut self.memo, key) {
            memo.insert(key, v);
        }
        Ok(v)
    }
}

/// Plays one game; see [`Game::play`].
pub fn play<R: Rng + ?Sized>(
    phi: &Formula,
    model: &Model,
    s0: usize,
    sigma_min: &dyn PathStrategy,
    sigma_max: &dyn PathStrategy,
    max_depth: usize,
    rng: &mut R,
) -> Result<PlayoutResult, GameError> {
    Game::new(phi, model)?.play(s0, sigma_min, sigma_max, max_depth, rng)
}

/// Monte-Carlo estimate of the game value; see [`Game::estimate`].
#[allow(clippy::too_many_arguments)]
pub fn estimate(
    phi: &Formula,
    model: &Model,
    s0: usize,
    sigma_min: &dyn PathStrategy,
    sigma_max: &dyn PathStrategy,
    n_paths: usize,
    max_depth: usize,
    seed: u64,
) -> Result<Estimate, GameError> {
    Game::new(phi, model)?.estimate(s0, sigma_min, sigma_max, n_paths, max_depth, seed)
}

/// Exact value of the depth-truncated game; see [`Game::expand_tree`].
pub fn expand_tree(
    phi: &Formula,
    model: &Model,
    s0: usize,
    sigma_min: &dyn PathStrategy,
    sigma_max: &dyn PathStrategy,
    depth: usize,
    node_cap: usize,
) -> Result<(f64, f64), GameError> {
    Game::new(phi, model)?.expand_tree(s0, sigma_min, sigma_max, depth, node_cap)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::ConstantStrategy;
    use crate::formula::parse;
    use crate::model::{Expectation, Row, StateSpace, Transition, Valuation};

    fn coin() -> Model {
        let mut v = Valuation::default();
        v.transitions.insert(
            "t".into(),
            Transition::new(vec![
                Row::new(vec![(0, 0.25), (1, 0.25)], 0.4),
                Row::new(vec![(1, 1.0)], 0.0),
            ]),
        );
        v.expectations
            .insert("tips".into(), Expectation::new(vec![0.2, 0.6]).unwrap());
        Model::new(StateSpace::new(["H", "T"]).unwrap(), v)
    }

    const LEFT: ConstantStrategy = ConstantStrategy(true);

    #[test]
    fn constant_terminates_in_two_steps() {
        let m = coin();
        let r = play(&parse("tips").unwrap(), &m, 1, &LEFT, &LEFT, 5, &mut path_rng(0, 0)).unwrap();
        assert_eq!(r, PlayoutResult::payoff(0.6, 2));
    }

    #[test]
    fn mu_identity_truncates_to_zero() {
        let m = coin();
        let r = play(&parse("mu X . X").unwrap(), &m, 0, &LEFT, &LEFT, 3, &mut path_rng(0, 0)).unwrap();
        assert_eq!((r.value_low, r.value_high, r.terminated), (0.0, 0.0, false));
        assert_eq!(r.truncation, Some(Truncation::Colour(FixKind::Mu)));
        let r = play(&parse("nu X . X").unwrap(), &m, 0, &LEFT, &LEFT, 3, &mut path_rng(0, 0)).unwrap();
        assert_eq!((r.value_low, r.value_high), (1.0, 1.0));
    }

    #[test]
    fn tree_of_one_transition() {
        let m = coin();
        let (lo, hi) = expand_tree(&parse("{t} tips").unwrap(), &m, 0, &LEFT, &LEFT, 4, 100).unwrap();
        let want = 0.4 + 0.25 * 0.2 + 0.25 * 0.6;
        assert!((lo - want).abs() < 1e-15 && (hi - want).abs() < 1e-15);
    }

    #[test]
    fn sampling_ties_go_low() {
        let succ = [(3, 0.25), (7, 0.25)];
        assert_eq!(sample(&succ, false, 0.25), Some(3));
        assert_eq!(sample(&succ, false, 0.2500001), Some(7));
        assert_eq!(sample(&succ, false, 0.9), None);
        assert_eq!(sample(&[(1, 0.5), (2, 0.5 - 1e-17)], true, 0.999_999_999_999_999_9), Some(2));
    }

    #[test]
    fn estimate_is_seed_deterministic() {
        let m = coin();
        let phi = parse("mu X . {t} (tips \\/ X)").unwrap();
        let a = estimate(&phi, &m, 0, &LEFT, &LEFT, 200, 10, 9).unwrap();
        let b = estimate(&phi, &m, 0, &LEFT, &LEFT, 200, 10, 9).unwrap();
        assert_eq!(a, b);
        let one = estimate(&phi, &m, 0, &LEFT, &LEFT, 1, 10, 9).unwrap();
        let r = play(&phi, &m, 0, &LEFT, &LEFT, 10, &mut path_rng(9, 0)).unwrap();
        assert_eq!((one.mean_low, one.mean_high), (r.value_low, r.value_high));
    }

    #[test]
    fn node_cap_is_reported() {
        let m = coin();
        let phi = parse("mu X . {t} X").unwrap();
        let path_dependent = crate::eval::FnStrategy(|_, _: &[PathStep], _| true);
        assert_eq!(
            expand_tree(&phi, &m, 0, &path_dependent, &LEFT, 40, 50),
            Err(GameError::NodeCap(50))
        );
    }
}
