use qmu::io::{model_from_json, model_to_json};
use qmu::oracle::{random_instance, SizeBounds};
use qmu::{evaluate, evaluate_with_strategies, expand_tree, EvalConfig, Memoriless, Predicate};

#[test]
fn saved_models_evaluate_identically() {
    let cfg = EvalConfig::default();
    for seed in 0..50 {
        let inst = random_instance(seed, &SizeBounds::default()).unwrap();
        let back = model_from_json(&model_to_json(&inst.model)).unwrap();
        let a = evaluate(&inst.phi, &inst.model, &cfg).unwrap().result;
        let b = evaluate(&inst.phi, &back, &cfg).unwrap().result;
        let bits = |e: &qmu::Expectation| e.values().iter().map(|x| x.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&a), bits(&b), "seed {seed}");
    }
}

#[test]
fn tree_brackets_tighten_with_depth() {
    let cfg = EvalConfig::default();
    for seed in 0..20 {
        let inst = random_instance(seed, &SizeBounds { max_states: 3, ..SizeBounds::default() }).unwrap();
        let n = inst.model.size();
        let (mins, maxs) = inst.phi.choice_sites();
        let left = vec![Predicate::from_fn(n, |s| s % 2 == 0); mins];
        let right = vec![Predicate::from_fn(n, |_| false); maxs];
        let (smin, smax) = (Memoriless(&left), Memoriless(&right));
        let (exact, _) = evaluate_with_strategies(&inst.phi, &inst.model, &smin, &smax, &cfg, 1).unwrap();
        for s in 0..inst.model.size() {
            let mut prev = (0.0, 1.0);
            for depth in [2, 12, 60, 250] {
                let (lo, hi) = expand_tree(&inst.phi, &inst.model, s, &smin, &smax, depth, 50_000_000).unwrap();
                assert!(lo <= hi + 1e-12);
                assert!(hi - lo <= prev.1 - prev.0 + 1e-12, "seed {seed} depth {depth}");
                prev = (lo, hi);
            }
            let gap = (prev.0 - exact.get(s)).abs().max((prev.1 - exact.get(s)).abs());
            assert!(gap < 1e-6, "seed {seed} state {s}: {prev:?} vs {}", exact.get(s));
        }
    }
}

#[test]
fn path_strategies_see_the_same_paths() {
    use qmu::examples::vardi_model;
    use qmu::{reduce, FnStrategy, Game, PathStep};

    let (model, phi) = vardi_model();
    let phi = reduce(&phi, &model.valuation).unwrap();
    let after_recursion = FnStrategy(|_: usize, path: &[PathStep], _: usize| {
        path.iter().any(|p| matches!(p, PathStep::Recur { .. }))
    });
    let min = FnStrategy(|_: usize, _: &[PathStep], _: usize| true);
    let game = Game::new(&phi, &model).unwrap();
    for depth in [1, 3, 10] {
        let (lo, hi) = evaluate_with_strategies(&phi, &model, &min, &after_recursion, &EvalConfig::default(), depth)
            .unwrap();
        for s in 0..2 {
            let tree = game.expand_tree(s, &min, &after_recursion, depth, 1_000_000).unwrap();
            assert_eq!((lo.get(s), hi.get(s)), tree, "depth {depth} state {s}");
        }
    }
    // Waiting once from A, then betting: half the time still in A.
    assert_eq!(game.expand_tree(0, &min, &after_recursion, 5, 1_000).unwrap(), (0.25, 0.25));
}
