use rigadic::suite::run_acceptance;

#[test]
fn acceptance() {
    let outcomes = run_acceptance();
    assert_eq!(outcomes.len(), 9);
    let mut all = true;
    for o in &outcomes {
        let tag = if o.passed { "PASS" } else { "FAIL" };
        println!("[{tag}] criterion {}: {} ({})", o.index, o.label, o.detail);
        all &= o.passed;
    }
    assert!(all, "one or more acceptance criteria failed");
}
