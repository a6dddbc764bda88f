use thiserror::Error;

use super::Formula;
use crate::model::Valuation;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ReduceError {
    #[error("unknown transition set `{0}`")]
    UnknownSet(String),
}

/// Expands set modalities into junctions of single-transition modalities.
///
/// `<K>φ` becomes a right-nested max-junction of `{k}φ` over the members of
/// `K` in declared order, `[K]φ` likewise with min-junctions. A singleton
/// set gives a bare modality. A name that is not a transition set but is a
/// transition symbol is read as the singleton containing it. Binders copied
/// by the expansion are renamed apart and sites renumbered canonically.
pub fn reduce(phi: &Formula, valuation: &Valuation) -> Result<Formula, ReduceError> {
    Ok(super::alpha_rename(&go(phi, valuation)?).numbered())
}

fn members<'a>(set: &'a str, v: &'a Valuation) -> Result<Vec<&'a str>, ReduceError> {
    if let Some(ms) = v.transition_sets.get(set) {
        if ms.is_empty() {
            return Err(ReduceError::UnknownSet(set.to_string()));
        }
        Ok(ms.iter().map(String::as_str).collect())
    } else if v.transitions.contains_key(set) {
        Ok(vec![set])
    } else {
        Err(ReduceError::UnknownSet(set.to_string()))
    }
}

fn expand(set: &str, body: Formula, v: &Valuation, angelic: bool) -> Result<Formula, ReduceError> {
    let ms = members(set, v)?;
    let mut iter = ms.into_iter().rev();
    let last = iter.next().expect("non-empty set");
    let mut acc = Formula::modal(last, body.clone());
    for k in iter {
        let m = Formula::modal(k, body.clone());
        acc = if angelic {
            Formula::max(m, acc)
        } else {
            Formula::min(m, acc)
        };
    }
    Ok(acc)
}

fn go(phi: &Formula, v: &Valuation) -> Result<Formula, ReduceError> {
    Ok(match phi {
        Formula::Var(_) | Formula::Const(_) => phi.clone(),
        Formula::Modal { transition, body } => Formula::modal(transition.clone(), go(body, v)?),
        Formula::Angelic { set, body } => expand(set, go(body, v)?, v, true)?,
        Formula::Demonic { set, body } => expand(set, go(body, v)?, v, false)?,
        Formula::MinJ { left, right, .. } => Formula::min(go(left, v)?, go(right, v)?),
        Formula::MaxJ { left, right, .. } => Formula::max(go(left, v)?, go(right, v)?),
        Formula::Cond {
            predicate,
            then,
            otherwise,
        } => Formula::cond(predicate.clone(), go(then, v)?, go(otherwise, v)?),
        Formula::Fixpoint { kind, var, body } => Formula::fixpoint(*kind, var.clone(), go(body, v)?),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse;
    use crate::model::{Row, Transition};

    fn valuation() -> Valuation {
        let t = Transition::new(vec![Row::new(vec![(0, 1.0)], 0.0)]);
        let mut v = Valuation::default();
        v.transitions.insert("k1".into(), t.clone());
        v.transitions.insert("k2".into(), t.clone());
        v.transitions.insert("k3".into(), t);
        v.transition_sets.insert("K".into(), vec!["k1".into(), "k2".into()]);
        v.transition_sets.insert("S".into(), vec!["k3".into()]);
        v.transition_sets
            .insert("T".into(), vec!["k1".into(), "k2".into(), "k3".into()]);
        v
    }

    #[test]
    fn singleton_is_a_bare_modality() {
        let f = reduce(&parse("<S> a").unwrap(), &valuation()).unwrap();
        assert_eq!(f, Formula::modal("k3", Formula::constant("a")));
        let g = reduce(&parse("[k1] a").unwrap(), &valuation()).unwrap();
        assert_eq!(g, Formula::modal("k1", Formula::constant("a")));
    }

    #[test]
    fn pair_expands_to_junction() {
        let f = reduce(&parse("<K> a").unwrap(), &valuation()).unwrap();
        assert_eq!(
            f,
            Formula::max(
                Formula::modal("k1", Formula::constant("a")),
                Formula::modal("k2", Formula::constant("a"))
            )
        );
    }

    #[test]
    fn chains_nest_to_the_right_and_sites_are_canonical() {
        let f = reduce(&parse("[T] a \\/ <K> b").unwrap(), &valuation()).unwrap();
        assert_eq!(f.choice_sites(), (2, 2));
        assert_eq!(
            f.to_string(),
            "{k1} a /\\ ({k2} a /\\ {k3} a) \\/ ({k1} b \\/ {k2} b)"
        );
        assert!(f.is_reduced());
    }

    #[test]
    fn reduced_input_is_unchanged() {
        let f = parse("mu X . {k1} X \\/ a /\\ X").unwrap();
        assert_eq!(reduce(&f, &valuation()).unwrap(), f);
    }

    #[test]
    fn unknown_set() {
        assert_eq!(
            reduce(&parse("<Q> a").unwrap(), &valuation()),
            Err(ReduceError::UnknownSet("Q".into()))
        );
    }
}
