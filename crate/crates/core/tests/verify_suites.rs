use caputo_pme::verify::{run_suite, Suite, VerifyOptions};

#[test]
fn all_suites_pass_and_repeat_exactly() {
    let opts = VerifyOptions::default();
    let a = run_suite(Suite::All, &opts).unwrap();
    assert!(a.passed, "{:?}", a.first_failure);
    assert_eq!(a, run_suite(Suite::All, &opts).unwrap());
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&run_suite(Suite::All, &opts).unwrap()).unwrap());
}

#[test]
fn other_seeds_pass() {
    for seed in [1, 7, 2024] {
        let r = run_suite(Suite::Compactness, &VerifyOptions { seed, perturb_weight: None }).unwrap();
        assert!(r.passed, "seed {seed}: {:?}", r.first_failure);
    }
}

#[test]
fn perturbed_weight_breaks_the_identity() {
    let opts = VerifyOptions { perturb_weight: Some((10, 1e-6)), ..Default::default() };
    let r = run_suite(Suite::Weights, &opts).unwrap();
    assert!(!r.passed);
    assert!(r.first_failure.as_deref().unwrap().contains("identity"), "{:?}", r.first_failure);
    let failed: Vec<_> = r.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
    assert!(failed.iter().any(|n| n.contains("identity alpha=0.5")));
}
