//! Full-scale acceptance run. Each test prints one PASS/FAIL line.
//!
//! `cargo test -p resilient-filters --test acceptance -- --nocapture --test-threads 1`

use resilient_filters::criteria::{find, run_criterion, CriterionReport, SuiteConfig};

fn check(id: &str) -> CriterionReport {
    let criterion = find(id).expect("known criterion");
    let report = run_criterion(criterion, &SuiteConfig::default()).expect("criterion runs");
    println!("{report}");
    report
}

#[test]
fn c01_completeness() {
    assert!(check("1").passed);
}

#[test]
fn c02_baseline_calibration() {
    assert!(check("2").passed);
}

#[test]
fn c03_steady_filters_are_not_resilient() {
    assert!(check("3").passed);
}

#[test]
fn c04_shield_efficacy() {
    assert!(check("4").passed);
}

#[test]
fn c05_cuckoo_resilience() {
    assert!(check("5").passed);
}

#[test]
fn c06_memory_bound() {
    assert!(check("6").passed);
}

#[test]
fn c07_comparison_telemetry() {
    assert!(check("7").passed);
}

#[test]
fn c07b_per_function_load() {
    assert!(check("7b").passed);
}

#[test]
fn c08_exact_pairwise_independence() {
    assert!(check("8").passed);
}

#[test]
fn c09_permutation_bijectivity() {
    assert!(check("9").passed);
}

#[test]
fn c10_random_query_model() {
    assert!(check("10").passed);
}

#[test]
fn c11_positive_mass_statistics() {
    assert!(check("11").passed);
}
