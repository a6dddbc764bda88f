use crate::formula::{parse, Formula};
use crate::model::{Expectation, Model, Predicate, Row, StateSpace, Transition, Valuation};

/// Two states `A` and `B`. From `A` the transition `k` goes to `A` or `B`
/// with probability 1/2 each; from `B` it returns to `A`. Also binds `atB`
/// and the predicate `atA`.
///
/// The returned formula `mu X . <k> atB \/ <k> X` asks for the best chance of
/// stopping at `B`, choosing when to stop. Its value is 1/2 everywhere.
pub fn vardi_model() -> (Model, Formula) {
    let space = StateSpace::new(["A", "B"]).expect("distinct labels");
    let mut val = Valuation::default();
    val.transitions.insert(
        "k".into(),
        Transition::new(vec![
            Row::new(vec![(0, 0.5), (1, 0.5)], 0.0),
            Row::new(vec![(0, 1.0)], 0.0),
        ]),
    );
    val.expectations
        .insert("atB".into(), Expectation::new(vec![0.0, 1.0]).expect("in range"));
    val.predicates
        .insert("atA".into(), Predicate::new(vec![true, false]));
    let phi = parse("mu X . <k> atB \\/ <k> X").expect("well-formed");
    (Model::new(space, val), phi)
}

/// `mu X . <k> (atB \/ X)`: reaching `B` eventually, which happens almost
/// surely.
pub fn vardi_reach_formula() -> Formula {
    parse("mu X . <k> (atB \\/ X)").expect("well-formed")
}
