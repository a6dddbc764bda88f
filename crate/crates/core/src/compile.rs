//! Resolution of a reduced formula against a model into an indexed arena.
//!
//! Node ids are preorder positions in the formula tree, so they are stable
//! for a given formula and usable in game paths and strategy files.

use thiserror::Error;

use crate::formula::{FixKind, Formula};
use crate::model::{Model, ModelError, Predicate, SymbolKind, Transition};

/// Preorder index of a node in a reduced formula.
pub type NodeId = usize;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CompileError {
    #[error("formula contains set modalities; reduce it first")]
    NotReduced,
    #[error("free variable `{0}`")]
    FreeVariable(String),
    #[error("{kind} `{name}` has {found} entries, the model has {expected} states")]
    SizeMismatch {
        kind: SymbolKind,
        name: String,
        expected: usize,
        found: usize,
    },
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, Copy)]
pub(crate) enum Node<'a> {
    Var {
        binder: usize,
    },
    Const {
        values: &'a [f64],
    },
    Modal {
        transition: &'a Transition,
        body: NodeId,
    },
    Min {
        site: usize,
        left: NodeId,
        right: NodeId,
    },
    Max {
        site: usize,
        left: NodeId,
        right: NodeId,
    },
    Cond {
        predicate: &'a Predicate,
        then: NodeId,
        otherwise: NodeId,
    },
    Bind {
        binder: usize,
        body: NodeId,
    },
}

#[derive(Debug, Clone)]
pub(crate) struct Binder {
    pub kind: FixKind,
    pub node: NodeId,
    pub body: NodeId,
    pub name: String,
    /// Number of enclosing binders.
    pub depth: usize,
    /// Whether the body contains a min or max junction.
    pub nondeterministic: bool,
}

#[derive(Debug, Clone)]
pub(crate) struct Plan<'a> {
    pub nodes: Vec<Node<'a>>,
    pub binders: Vec<Binder>,
    /// Binders in scope at each node, outermost first.
    pub scope: Vec<Vec<usize>>,
    pub states: usize,
    pub min_sites: usize,
    pub max_sites: usize,
}

impl<'a> Plan<'a> {
    pub fn compile(phi: &Formula, model: &'a Model) -> Result<Self, CompileError> {
        let mut plan = Plan {
            nodes: Vec::with_capacity(phi.size()),
            binders: Vec::new(),
            scope: Vec::new(),
            states: model.size(),
            min_sites: 0,
            max_sites: 0,
        };
        let mut scope = Vec::new();
        plan.go(phi, model, &mut scope)?;
        let (min, max) = phi.choice_sites();
        plan.min_sites = min;
        plan.max_sites = max;
        Ok(plan)
    }

    pub fn root(&self) -> NodeId {
        0
    }

    fn go(&mut self, phi: &Formula, model: &'a Model, scope: &mut Vec<(String, usize)>) -> Result<NodeId, CompileError> {
        let id = self.nodes.len();
        // placeholder, patched once the children have ids
        self.nodes.push(Node::Var { binder: usize::MAX });
        self.scope.push(scope.iter().map(|(_, b)| *b).collect());
        let v = &model.valuation;
        let node = match phi {
            Formula::Var(x) => {
                let binder = scope
                    .iter()
                    .rev()
                    .find(|(name, _)| name == x)
                    .map(|(_, b)| *b)
                    .ok_or_else(|| CompileError::FreeVariable(x.clone()))?;
                Node::Var { binder }
            }
            Formula::Const(c) => {
                let e = v.expectation(c)?;
                check_len(SymbolKind::Expectation, c, e.len(), self.states)?;
                Node::Const { values: e.values() }
            }
            Formula::Modal { transition, body } => {
                let t = v.transition(transition)?;
                check_len(SymbolKind::Transition, transition, t.size(), self.states)?;
                let body = self.go(body, model, scope)?;
                Node::Modal { transition: t, body }
            }
            Formula::Angelic { .. } | Formula::Demonic { .. } => return Err(CompileError::NotReduced),
            Formula::MinJ { site, left, right } => {
                let left = self.go(left, model, scope)?;
                let right = self.go(right, model, scope)?;
                Node::Min {
                    site: *site,
                    left,
                    right,
                }
            }
            Formula::MaxJ { site, left, right } => {
                let left = self.go(left, model, scope)?;
                let right = self.go(right, model, scope)?;
                Node::Max {
                    site: *site,
                    left,
                    right,
                }
            }
            Formula::Cond {
                predicate,
                then,
                otherwise,
            } => {
                let p = v.predicate(predicate)?;
                check_len(SymbolKind::Predicate, predicate, p.len(), self.states)?;
                let then = self.go(then, model, scope)?;
                let otherwise = self.go(otherwise, model, scope)?;
                Node::Cond {
                    predicate: p,
                    then,
                    otherwise,
                }
            }
            Formula::Fixpoint { kind, var, body } => {
                let binder = self.binders.len();
                self.binders.push(Binder {
                    kind: *kind,
                    node: id,
                    body: id + 1,
                    name: var.clone(),
                    depth: scope.len(),
                    nondeterministic: !body.is_probabilistic(),
                });
                scope.push((var.clone(), binder));
                let body = self.go(body, model, scope);
                scope.pop();
                Node::Bind { binder, body: body? }
            }
        };
        self.nodes[id] = node;
        Ok(id)
    }
}

fn check_len(kind: SymbolKind, name: &str, found: usize, expected: usize) -> Result<(), CompileError> {
    if found != expected {
        return Err(CompileError::SizeMismatch {
            kind,
            name: name.to_string(),
            expected,
            found,
        });
    }
    Ok(())
}
