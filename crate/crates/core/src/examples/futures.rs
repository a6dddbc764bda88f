//! The futures market.
//!
//! A state is `(v, p, c)`: the share value `v` in dollars, the chance `p` of
//! a rise in tenths, and the cap `c` in dollars, all in `0..=10`. One
//! `month` makes three independent probabilistic moves, each guarded by the
//! state at the start of the month:
//!
//! 1. `v := min(v+1, c)` with probability `p/10`, else `max(v-1, 0)`;
//! 2. `p` moves according to `v`: below 5 it rises with probability 2/3,
//!    above 5 it falls with probability 2/3, at 5 either way with 1/2
//!    (clamped to `0..=10`);
//! 3. `c := max(c-1, 0)` with probability 1/2, else unchanged.
//!
//! Guarding the move of `p` by the month-start `v`, rather than by the `v`
//! just computed, is the reading under which the optimal-sale values come
//! out as 4.16, 4.30, ..., 9.50; the other reading gives 4.13, 4.26, ...,
//! with waiting preferred at `v = 6`.
//!
//! The cap only clamps `v` on a rise, so `v` can sit above a cap that has
//! fallen until its next move.

use crate::formula::{parse, Formula};
use crate::model::{Expectation, Model, Predicate, Row, StateSpace, Transition, Valuation};

pub const FUTURES_STATES: usize = 11 * 11 * 11;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FuturesState {
    pub v: u8,
    pub p: u8,
    pub c: u8,
}

impl FuturesState {
    pub fn new(v: u8, p: u8, c: u8) -> Self {
        assert!(v <= 10 && p <= 10 && c <= 10, "futures coordinates lie in 0..=10");
        FuturesState { v, p, c }
    }

    pub fn index(self) -> usize {
        self.v as usize * 121 + self.p as usize * 11 + self.c as usize
    }

    pub fn from_index(i: usize) -> Self {
        assert!(i < FUTURES_STATES);
        FuturesState::new((i / 121) as u8, (i / 11 % 11) as u8, (i % 11) as u8)
    }

    pub fn label(self) -> String {
        format!("v{}_p{}_c{}", self.v, self.p, self.c)
    }

    fn all() -> impl Iterator<Item = FuturesState> {
        (0..FUTURES_STATES).map(FuturesState::from_index)
    }
}

/// Index of the state `(v, p, c)`.
pub fn futures_state(v: u8, p: u8, c: u8) -> usize {
    FuturesState::new(v, p, c).index()
}

fn month_row(s: FuturesState) -> Row {
    let rise = s.p as f64 / 10.0;
    let mut atoms = Vec::with_capacity(8);
    for (v, pv) in [((s.v + 1).min(s.c), rise), (s.v.saturating_sub(1), 1.0 - rise)] {
        if pv == 0.0 {
            continue;
        }
        let up = (s.p + 1).min(10);
        let down = s.p.saturating_sub(1);
        let p_moves = match s.v {
            0..=4 => [(up, 2.0 / 3.0), (down, 1.0 / 3.0)],
            5 => [(down, 0.5), (up, 0.5)],
            _ => [(down, 2.0 / 3.0), (up, 1.0 / 3.0)],
        };
        for (p, pp) in p_moves {
            for c in [s.c.saturating_sub(1), s.c] {
                atoms.push((FuturesState::new(v, p, c).index(), pv * pp * 0.5));
            }
        }
    }
    Row::new(atoms, 0.0)
}

/// The 1331-state market with `month`, `Sold = v/10`, `atLeast6`, and the
/// predicates `vGeC` (`v ≥ c`) and `intuitive` (`v ≥ 5` and `p ≥ 0.5`).
pub fn futures_model() -> Model {
    let space = StateSpace::new(FuturesState::all().map(FuturesState::label)).expect("labels are distinct");
    let mut val = Valuation::default();
    val.transitions
        .insert("month".into(), Transition::new(FuturesState::all().map(month_row).collect()));
    let expectation = |f: fn(FuturesState) -> f64| {
        Expectation::new(FuturesState::all().map(f).collect()).expect("values in [0,1]")
    };
    val.expectations
        .insert("Sold".into(), expectation(|s| s.v as f64 / 10.0));
    val.expectations
        .insert("atLeast6".into(), expectation(|s| if s.v >= 6 { 1.0 } else { 0.0 }));
    let predicate = |f: fn(FuturesState) -> bool| Predicate::new(FuturesState::all().map(f).collect());
    val.predicates.insert("vGeC".into(), predicate(|s| s.v >= s.c));
    val.predicates
        .insert("intuitive".into(), predicate(|s| s.v >= 5 && s.p >= 5));
    Model::new(space, val)
}

/// `mu X . <month> Sold \/ <month> (X /\ <month> X)`: reserve now, or wait a
/// month and let the market decide whether to bar the next reservation.
pub fn futures_formula() -> Formula {
    parse("mu X . <month> Sold \\/ <month> (X /\\ <month> X)").expect("well-formed")
}

/// The futures game scored by whether the delivered shares are worth at
/// least $6.
pub fn atleast6_formula() -> Formula {
    parse("mu X . <month> atLeast6 \\/ <month> (X /\\ <month> X)").expect("well-formed")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::pre_expectation;

    #[test]
    fn indexing() {
        assert_eq!(futures_state(6, 5, 10), 6 * 121 + 5 * 11 + 10);
        for i in [0, 17, 800, 1330] {
            assert_eq!(FuturesState::from_index(i).index(), i);
        }
    }

    #[test]
    fn month_rows_are_distributions() {
        let m = futures_model();
        assert!(m.validate().is_empty());
        for row in m.valuation.transitions["month"].rows() {
            assert!((row.mass() - 1.0).abs() < 1e-12);
            assert_eq!(row.payoff_weight, 0.0);
            assert!(row.successors.len() <= 8);
        }
    }

    #[test]
    fn p_moves_with_month_start_value() {
        // From v = 5 a fall to 4 must not make p rise with probability 2/3.
        let m = futures_model();
        let row = m.valuation.transitions["month"].row(futures_state(5, 0, 10)).unwrap();
        let to = |v, p, c| {
            row.successors
                .iter()
                .find(|(s, _)| *s == futures_state(v, p, c))
                .map_or(0.0, |(_, pr)| *pr)
        };
        assert!((to(4, 1, 10) - 0.25).abs() < 1e-15);
        assert!((to(4, 0, 10) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn one_month_expected_value() {
        let m = futures_model();
        let month = &m.valuation.transitions["month"];
        let sold = &m.valuation.expectations["Sold"];
        let at = |v| 10.0 * pre_expectation(month, futures_state(v, 5, 10), sold).unwrap();
        assert!((at(1) - 1.0).abs() < 1e-12);
        assert!((at(10) - 9.5).abs() < 1e-12);
        assert!((at(0) - 0.5).abs() < 1e-12);
    }
}
