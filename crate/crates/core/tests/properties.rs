use proptest::prelude::*;
use qmu::oracle::{random_formula, random_model, SizeBounds};
use qmu::{evaluate, parse, reduce, EvalConfig, FixKind, Formula, Model};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn arb_formula() -> impl Strategy<Value = Formula> {
    let leaf = prop_oneof![
        prop::sample::select(vec!["X", "Y", "Z1", "W_2"]).prop_map(Formula::var),
        prop::sample::select(vec!["a", "b", "atB", "half"]).prop_map(Formula::constant),
    ];
    leaf.prop_recursive(5, 40, 2, |inner| {
        let kind = prop_oneof![
            Just(FixKind::Mu),
            Just(FixKind::Nu),
            prop::sample::select(vec![0.0, 0.25, 0.5, 0.1, 1.0]).prop_map(FixKind::Fix),
        ];
        prop_oneof![
            (prop::sample::select(vec!["k", "k0", "move"]), inner.clone()).prop_map(|(k, b)| Formula::modal(k, b)),
            (prop::sample::select(vec!["K", "all"]), inner.clone()).prop_map(|(k, b)| Formula::angelic(k, b)),
            (prop::sample::select(vec!["K", "all"]), inner.clone()).prop_map(|(k, b)| Formula::demonic(k, b)),
            (inner.clone(), inner.clone()).prop_map(|(l, r)| Formula::min(l, r)),
            (inner.clone(), inner.clone()).prop_map(|(l, r)| Formula::max(l, r)),
            (prop::sample::select(vec!["g", "atA"]), inner.clone(), inner.clone())
                .prop_map(|(p, t, e)| Formula::cond(p, t, e)),
            (kind, prop::sample::select(vec!["X", "Y", "Z1"]), inner).prop_map(|(k, x, b)| Formula::fixpoint(k, x, b)),
        ]
    })
    .prop_map(close)
}

fn close(phi: Formula) -> Formula {
    phi.free_vars()
        .into_iter()
        .fold(phi, |body, x| Formula::nu(x, body))
        .numbered()
}

fn instance(seed: u64) -> (Model, Formula) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = 1 + (seed % 4) as usize;
    let model = random_model(&mut rng, n);
    let phi = random_formula(&mut rng, &SizeBounds::default());
    (model, phi)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn printing_round_trips(phi in arb_formula()) {
        let text = phi.to_string();
        let back = parse(&text).map_err(|e| TestCaseError::fail(format!("{text}: {e}")))?;
        prop_assert!(back.alpha_eq(&phi), "{text} reparsed as {back}");
    }

    #[test]
    fn angelic_is_best_member(seed in 0u64..10_000) {
        let (model, body) = instance(seed);
        let cfg = EvalConfig::default();
        let set = reduce(&parse(&format!("<K> ({body})")).unwrap(), &model.valuation).unwrap();
        let demonic = reduce(&parse(&format!("[K] ({body})")).unwrap(), &model.valuation).unwrap();
        let k0 = evaluate(&parse(&format!("{{k0}} ({body})")).unwrap().numbered(), &model, &cfg).unwrap().result;
        let k1 = evaluate(&parse(&format!("{{k1}} ({body})")).unwrap().numbered(), &model, &cfg).unwrap().result;
        let best = evaluate(&set, &model, &cfg).unwrap().result;
        let worst = evaluate(&demonic, &model, &cfg).unwrap().result;
        for s in 0..model.size() {
            prop_assert!((best.get(s) - k0.get(s).max(k1.get(s))).abs() < 1e-8);
            prop_assert!((worst.get(s) - k0.get(s).min(k1.get(s))).abs() < 1e-8);
        }
    }

    #[test]
    fn values_stay_in_unit_interval(seed in 0u64..10_000) {
        let (model, phi) = instance(seed);
        let r = evaluate(&phi, &model, &EvalConfig::default()).unwrap();
        prop_assert!(r.converged);
        prop_assert!(r.result.values().iter().all(|x| (0.0..=1.0).contains(x)));
    }

    #[test]
    fn reduce_is_idempotent(seed in 0u64..10_000) {
        let (model, phi) = instance(seed);
        let once = reduce(&phi, &model.valuation).unwrap();
        prop_assert_eq!(reduce(&once, &model.valuation).unwrap(), once);
    }
}
