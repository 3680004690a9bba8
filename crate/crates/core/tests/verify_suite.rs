use canonical_fock::verify::{run_suite, Fault, Suite, VerifyOptions, DEFAULT_SEED};

fn print_failures(report: &canonical_fock::verify::VerifyReport) {
    for r in &report.results {
        println!(
            "{:<28} {} worst={:e} tol={:e} n={} {}",
            r.name,
            if r.passed { "ok  " } else { "FAIL" },
            r.worst_error,
            r.tolerance,
            r.checked,
            r.detail.as_deref().unwrap_or("")
        );
    }
}

#[test]
fn fast_suite_passes() {
    let report = run_suite(VerifyOptions::default());
    print_failures(&report);
    assert!(report.all_passed());
}

#[test]
fn fault_injection_breaks_only_conjugate_symmetry() {
    let report = run_suite(VerifyOptions {
        suite: Suite::Fast,
        seed: DEFAULT_SEED,
        fault: Some(Fault::NegateConjugatePhase),
    });
    let failed: Vec<&str> = report.failed().map(|r| r.name.as_str()).collect();
    assert_eq!(failed, vec!["kernel_conjugate_symmetry"]);
}

#[test]
fn suite_is_deterministic_for_a_seed() {
    let opts = VerifyOptions {
        seed: 7,
        ..VerifyOptions::default()
    };
    let a = serde_json::to_string(&run_suite(opts).to_json()).unwrap();
    let b = serde_json::to_string(&run_suite(opts).to_json()).unwrap();
    assert_eq!(a, b);
}
