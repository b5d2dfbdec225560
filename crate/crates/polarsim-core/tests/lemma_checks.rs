//! Runs the full analytic check sweep end to end, printing one verdict line
//! per check and holding the whole sweep to the runtime budget the harness
//! suite enforces.

use polarsim_core::checks;
use std::time::Instant;

#[test]
fn full_check_sweep_passes_within_budget() {
    let start = Instant::now();
    let reports = checks::all_default(42);
    let elapsed = start.elapsed();
    for report in &reports {
        println!("{report}");
    }
    println!("sweep finished in {elapsed:.2?}");
    assert_eq!(reports.len(), 10, "expected every check to report");
    let failed: Vec<&str> = reports.iter().filter(|r| !r.passed).map(|r| r.name).collect();
    assert!(failed.is_empty(), "failing checks: {failed:?}");
    assert!(elapsed.as_secs() < 300, "sweep exceeded the five minute budget: {elapsed:.2?}");
}
