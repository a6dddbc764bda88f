//! Syntax of the quantitative μ-calculus.
//!
//! The full language has set modalities `<K>φ` (angelic) and `[K]φ`
//! (demonic). [`reduce`] rewrites them into explicit max/min junctions of
//! single-transition modalities `{k}φ`, which is the form every evaluator in
//! this crate consumes.
//!
//! Every min- and max-junction carries a *site* number. Sites are numbered in
//! left-to-right preorder, separately for each junction kind, and identify
//! the choice points a strategy resolves.

mod parse;
mod print;
mod reduce;

use std::collections::HashSet;

use sha2::{Digest, Sha256};

pub use parse::{parse, ParseError, ParseErrorKind};
pub use reduce::{reduce, ReduceError};

/// The kind of a fixed-point binder.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FixKind {
    /// Least fixed point, iterated from the all-zero expectation.
    Mu,
    /// Greatest fixed point, iterated from the all-one expectation.
    Nu,
    /// Intermediate fixed point, iterated from the constant expectation `x`.
    Fix(f64),
}

impl FixKind {
    /// The constant the iteration starts from, which is also the value given
    /// to paths on which this binder recurs forever.
    pub fn seed(self) -> f64 {
        match self {
            FixKind::Mu => 0.0,
            FixKind::Nu => 1.0,
            FixKind::Fix(x) => x,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Formula {
    Var(String),
    Const(String),
    /// `{k}φ`: a single transition.
    Modal {
        transition: String,
        body: Box<Formula>,
    },
    /// `<K>φ`: best member of a transition set. Removed by [`reduce`].
    Angelic { set: String, body: Box<Formula> },
    /// `[K]φ`: worst member of a transition set. Removed by [`reduce`].
    Demonic { set: String, body: Box<Formula> },
    MinJ {
        site: usize,
        left: Box<Formula>,
        right: Box<Formula>,
    },
    MaxJ {
        site: usize,
        left: Box<Formula>,
        right: Box<Formula>,
    },
    Cond {
        predicate: String,
        then: Box<Formula>,
        otherwise: Box<Formula>,
    },
    Fixpoint {
        kind: FixKind,
        var: String,
        body: Box<Formula>,
    },
}

impl Formula {
    pub fn var(name: impl Into<String>) -> Self {
        Formula::Var(name.into())
    }

    pub fn constant(name: impl Into<String>) -> Self {
        Formula::Const(name.into())
    }

    pub fn modal(transition: impl Into<String>, body: Formula) -> Self {
        Formula::Modal {
            transition: transition.into(),
            body: Box::new(body),
        }
    }

    pub fn angelic(set: impl Into<String>, body: Formula) -> Self {
        Formula::Angelic {
            set: set.into(),
            body: Box::new(body),
        }
    }

    pub fn demonic(set: impl Into<String>, body: Formula) -> Self {
        Formula::Demonic {
            set: set.into(),
            body: Box::new(body),
        }
    }

    /// A min-junction with a placeholder site; call [`Formula::numbered`] on
    /// the finished tree.
    pub fn min(left: Formula, right: Formula) -> Self {
        Formula::MinJ {
            site: 0,
            left: Box::new(left),
            right: Box::new(right),
        }
    }

    pub fn max(left: Formula, right: Formula) -> Self {
        Formula::MaxJ {
            site: 0,
            left: Box::new(left),
            right: Box::new(right),
        }
    }

    pub fn cond(predicate: impl Into<String>, then: Formula, otherwise: Formula) -> Self {
        Formula::Cond {
            predicate: predicate.into(),
            then: Box::new(then),
            otherwise: Box::new(otherwise),
        }
    }

    pub fn fixpoint(kind: FixKind, var: impl Into<String>, body: Formula) -> Self {
        Formula::Fixpoint {
            kind,
            var: var.into(),
            body: Box::new(body),
        }
    }

    pub fn mu(var: impl Into<String>, body: Formula) -> Self {
        Self::fixpoint(FixKind::Mu, var, body)
    }

    pub fn nu(var: impl Into<String>, body: Formula) -> Self {
        Self::fixpoint(FixKind::Nu, var, body)
    }

    pub fn fix(x: f64, var: impl Into<String>, body: Formula) -> Self {
        Self::fixpoint(FixKind::Fix(x), var, body)
    }

    /// Renumbers junction sites in preorder, min and max separately.
    pub fn numbered(mut self) -> Self {
        let (mut min, mut max) = (0, 0);
        self.renumber(&mut min, &mut max);
        self
    }

    fn renumber(&mut self, min: &mut usize, max: &mut usize) {
        match self {
            Formula::Var(_) | Formula::Const(_) => {}
            Formula::Modal { body, .. }
            | Formula::Angelic { body, .. }
            | Formula::Demonic { body, .. }
            | Formula::Fixpoint { body, .. } => body.renumber(min, max),
            Formula::MinJ { site, left, right } => {
                *site = *min;
                *min += 1;
                left.renumber(min, max);
                right.renumber(min, max);
            }
            Formula::MaxJ { site, left, right } => {
                *site = *max;
                *max += 1;
                left.renumber(min, max);
                right.renumber(min, max);
            }
            Formula::Cond {
                then, otherwise, ..
            } => {
                then.renumber(min, max);
                otherwise.renumber(min, max);
            }
        }
    }

    /// Direct subformulae, left to right.
    pub fn children(&self) -> Vec<&Formula> {
        match self {
            Formula::Var(_) | Formula::Const(_) => vec![],
            Formula::Modal { body, .. }
            | Formula::Angelic { body, .. }
            | Formula::Demonic { body, .. }
            | Formula::Fixpoint { body, .. } => vec![body],
            Formula::MinJ { left, right, .. } | Formula::MaxJ { left, right, .. } => {
                vec![left, right]
            }
            Formula::Cond {
                then, otherwise, ..
            } => vec![then, otherwise],
        }
    }

    /// Number of nodes.
    pub fn size(&self) -> usize {
        1 + self.children().into_iter().map(Formula::size).sum::<usize>()
    }

    /// `(min sites, max sites)`.
    pub fn choice_sites(&self) -> (usize, usize) {
        let mut counts = (0, 0);
        self.walk(&mut |f| match f {
            Formula::MinJ { .. } => counts.0 += 1,
            Formula::MaxJ { .. } => counts.1 += 1,
            _ => {}
        });
        counts
    }

    /// Preorder traversal.
    pub fn walk<'a>(&'a self, visit: &mut impl FnMut(&'a Formula)) {
        visit(self);
        for c in self.children() {
            c.walk(visit);
        }
    }

    /// Whether the formula is in the reduced language (no set modalities).
    pub fn is_reduced(&self) -> bool {
        let mut ok = true;
        self.walk(&mut |f| {
            if matches!(f, Formula::Angelic { .. } | Formula::Demonic { .. }) {
                ok = false;
            }
        });
        ok
    }

    /// Whether the formula contains no min/max junctions and no set
    /// modalities.
    pub fn is_probabilistic(&self) -> bool {
        let mut ok = true;
        self.walk(&mut |f| {
            if matches!(
                f,
                Formula::MinJ { .. }
                    | Formula::MaxJ { .. }
                    | Formula::Angelic { .. }
                    | Formula::Demonic { .. }
            ) {
                ok = false;
            }
        });
        ok
    }

    /// Variables occurring free.
    pub fn free_vars(&self) -> Vec<String> {
        fn go(f: &Formula, bound: &mut Vec<String>, out: &mut Vec<String>) {
            match f {
                Formula::Var(x) => {
                    if !bound.contains(x) && !out.contains(x) {
                        out.push(x.clone());
                    }
                }
                Formula::Fixpoint { var, body, .. } => {
                    bound.push(var.clone());
                    go(body, bound, out);
                    bound.pop();
                }
                _ => {
                    for c in f.children() {
                        go(c, bound, out);
                    }
                }
            }
        }
        let mut out = Vec::new();
        go(self, &mut Vec::new(), &mut out);
        out
    }

    pub fn is_closed(&self) -> bool {
        self.free_vars().is_empty()
    }

    /// Maximum number of binders on any root-to-leaf path.
    pub fn binder_depth(&self) -> usize {
        let below = self
            .children()
            .into_iter()
            .map(Formula::binder_depth)
            .max()
            .unwrap_or(0);
        below + usize::from(matches!(self, Formula::Fixpoint { .. }))
    }

    /// Structural equality up to consistent renaming of bound variables.
    pub fn alpha_eq(&self, other: &Formula) -> bool {
        fn go<'a>(a: &'a Formula, b: &'a Formula, env: &mut Vec<(&'a str, &'a str)>) -> bool {
            use Formula::*;
            match (a, b) {
                (Var(x), Var(y)) => {
                    let bx = env.iter().rev().find(|(l, _)| *l == x.as_str());
                    let by = env.iter().rev().find(|(_, r)| *r == y.as_str());
                    match (bx, by) {
                        (Some(p), Some(q)) => std::ptr::eq(p, q),
                        (None, None) => x == y,
                        _ => false,
                    }
                }
                (Const(x), Const(y)) => x == y,
                (
                    Modal {
                        transition: t1,
                        body: b1,
                    },
                    Modal {
                        transition: t2,
                        body: b2,
                    },
                ) => t1 == t2 && go(b1, b2, env),
                (Angelic { set: s1, body: b1 }, Angelic { set: s2, body: b2 })
                | (Demonic { set: s1, body: b1 }, Demonic { set: s2, body: b2 }) => {
                    s1 == s2 && go(b1, b2, env)
                }
                (
                    MinJ {
                        site: s1,
                        left: l1,
                        right: r1,
                    },
                    MinJ {
                        site: s2,
                        left: l2,
                        right: r2,
                    },
                )
                | (
                    MaxJ {
                        site: s1,
                        left: l1,
                        right: r1,
                    },
                    MaxJ {
                        site: s2,
                        left: l2,
                        right: r2,
                    },
                ) => s1 == s2 && go(l1, l2, env) && go(r1, r2, env),
                (
                    Cond {
                        predicate: p1,
                        then: t1,
                        otherwise: e1,
                    },
                    Cond {
                        predicate: p2,
                        then: t2,
                        otherwise: e2,
                    },
                ) => p1 == p2 && go(t1, t2, env) && go(e1, e2, env),
                (
                    Fixpoint {
                        kind: k1,
                        var: v1,
                        body: b1,
                    },
                    Fixpoint {
                        kind: k2,
                        var: v2,
                        body: b2,
                    },
                ) => {
                    if k1 != k2 {
                        return false;
                    }
                    env.push((v1, v2));
                    let r = go(b1, b2, env);
                    env.pop();
                    r
                }
                _ => false,
            }
        }
        go(self, other, &mut Vec::new())
    }

    /// Hex SHA-256 of the pretty-printed formula.
    pub fn fingerprint(&self) -> String {
        let digest = Sha256::digest(self.to_string().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Binder names, in preorder.
    pub fn binder_names(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.walk(&mut |f| {
            if let Formula::Fixpoint { var, .. } = f {
                out.push(var.as_str());
            }
        });
        out
    }
}

/// Whether `name` has the lexical form of a fixed-point variable: one
/// upper-case letter optionally followed by digits and underscores.
/// Every other identifier in formula position is a constant symbol.
pub fn is_variable_name(name: &str) -> bool {
    let mut chars = name.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_uppercase())
        && chars.all(|c| c.is_ascii_digit() || c == '_')
}

/// Renames binders so that every binder name in the formula is distinct.
pub fn alpha_rename(f: &Formula) -> Formula {
    fn fresh(name: &str, used: &mut HashSet<String>) -> String {
        if used.insert(name.to_string()) {
            return name.to_string();
        }
        let mut i = 1;
        loop {
            let candidate = format!("{name}_{i}");
            if used.insert(candidate.clone()) {
                return candidate;
            }
            i += 1;
        }
    }
    fn go(f: &Formula, scope: &mut Vec<(String, String)>, used: &mut HashSet<String>) -> Formula {
        match f {
            Formula::Var(x) => Formula::Var(
                scope
                    .iter()
                    .rev()
                    .find(|(src, _)| src == x)
                    .map(|(_, dst)| dst.clone())
                    .unwrap_or_else(|| x.clone()),
            ),
            Formula::Const(c) => Formula::Const(c.clone()),
            Formula::Modal { transition, body } => Formula::Modal {
                transition: transition.clone(),
                body: Box::new(go(body, scope, used)),
            },
            Formula::Angelic { set, body } => Formula::Angelic {
                set: set.clone(),
                body: Box::new(go(body, scope, used)),
            },
            Formula::Demonic { set, body } => Formula::Demonic {
                set: set.clone(),
                body: Box::new(go(body, scope, used)),
            },
            Formula::MinJ { site, left, right } => Formula::MinJ {
                site: *site,
                left: Box::new(go(left, scope, used)),
                right: Box::new(go(right, scope, used)),
            },
            Formula::MaxJ { site, left, right } => Formula::MaxJ {
                site: *site,
                left: Box::new(go(left, scope, used)),
                right: Box::new(go(right, scope, used)),
            },
            Formula::Cond {
                predicate,
                then,
                otherwise,
            } => Formula::Cond {
                predicate: predicate.clone(),
                then: Box::new(go(then, scope, used)),
                otherwise: Box::new(go(otherwise, scope, used)),
            },
            Formula::Fixpoint { kind, var, body } => {
                let new = fresh(var, used);
                scope.push((var.clone(), new.clone()));
                let body = go(body, scope, used);
                scope.pop();
                Formula::Fixpoint {
                    kind: *kind,
                    var: new,
                    body: Box::new(body),
                }
            }
        }
    }
    let mut used: HashSet<String> = f.free_vars().into_iter().collect();
    go(f, &mut Vec::new(), &mut used)
}
