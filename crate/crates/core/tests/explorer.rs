use vault_model::properties::{check_trace, explore, violated, ExploreConfig, PropertyId};
use vault_model::{Action, ArithmeticMode, Mutation, Trace};

#[test]
fn every_mutant_is_caught_by_its_property() {
    for (mutation, property) in Mutation::ALL.into_iter().zip(PropertyId::ALL) {
        let config = ExploreConfig {
            mutation: Some(mutation),
            ..ExploreConfig::default()
        };
        let report = explore(&config).unwrap();
        assert!(
            report.violated().contains(&property),
            "{mutation:?} should violate {property}, got {:?}",
            report.violated()
        );
        // Each reported witness reproduces its violation from scratch.
        let initial = config.initial_state().unwrap();
        for v in &report.violations {
            let found = check_trace(&initial, &Trace(v.witness.clone())).unwrap();
            assert!(
                violated(&found).contains(&v.property),
                "{mutation:?}: witness for {} does not reproduce",
                v.property
            );
        }
    }
}

#[test]
fn correct_vault_holds_everything_at_default_bounds() {
    let report = explore(&ExploreConfig::default()).unwrap();
    assert_eq!(report.summary(), "18/18 properties hold");
    assert!(report.states_visited > 10_000);
    assert_eq!(report.depth_reached, 6);
}

#[test]
fn legacy_witness_is_minimal_and_shaped_like_the_attack() {
    let config = ExploreConfig {
        mode: ArithmeticMode::Legacy,
        ..ExploreConfig::default()
    };
    let report = explore(&config).unwrap();
    assert_eq!(report.violated(), vec![PropertyId::SOLVENT]);
    let witness = &report.violations[0].witness;
    assert_eq!(witness.len(), 3);
    assert!(matches!(witness[1].action, Action::Request { .. }));
    assert!(matches!(witness[2].action, Action::Request { .. }));

    // Nothing shorter exists.
    let shallow = explore(&ExploreConfig { max_depth: 2, ..config }).unwrap();
    assert!(shallow.violations.is_empty());
}

#[test]
fn exploration_is_deterministic() {
    let config = ExploreConfig {
        mode: ArithmeticMode::Legacy,
        max_depth: 5,
        ..ExploreConfig::default()
    };
    let a = serde_json::to_string(&explore(&config).unwrap()).unwrap();
    let b = serde_json::to_string(&explore(&config).unwrap()).unwrap();
    assert_eq!(a, b);
}

#[test]
fn single_worker_matches_parallel_run() {
    let config = ExploreConfig {
        mutation: Some(Mutation::CancelSelfIgnoresInitiator),
        max_depth: 5,
        ..ExploreConfig::default()
    };
    let parallel = explore(&config).unwrap();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let serial = pool.install(|| explore(&config).unwrap());
    assert_eq!(parallel, serial);
}
