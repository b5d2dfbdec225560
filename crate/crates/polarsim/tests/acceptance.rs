//! End-to-end acceptance gate.
//!
//! Each test exercises one headline claim at its documented tolerance and
//! prints a single verdict line, so `cargo test --test acceptance -- --nocapture`
//! reads as a checklist. Suite-backed tests run the same canned experiments
//! the CLI exposes, at the default seed; the rest drive the core library
//! directly against independently computed oracles.

use polarsim::suites::{run_suite, SuiteReport, DEFAULT_SUITE_SEED};
use rand::Rng;
use polarsim_core::diagnostics::{balls_in_bins_simulate, decay_rate_fit, DecayModel};
use polarsim_core::dynamics::{orthonormal_closed_form, step, ModelSpec};
use polarsim_core::geometry::{haar_unit_vector, Configuration, UnitVector};
use polarsim_core::rng::RngStream;

fn verdict(criterion: u32, label: &str, passed: bool, details: &str) {
    println!(
        "acceptance {criterion} {label}: {} ({details})",
        if passed { "pass" } else { "FAIL" }
    );
    assert!(passed, "acceptance {criterion} {label} failed: {details}");
}

fn suite_verdict(criterion: u32, label: &str, report: &SuiteReport) {
    let gates = report.outcomes.iter().filter(|o| o.passed).count();
    for outcome in report.outcomes.iter().filter(|o| !o.passed) {
        eprintln!("  {outcome}");
    }
    verdict(
        criterion,
        label,
        report.passed(),
        &format!("{gates}/{} suite gates passed", report.outcomes.len()),
    );
}

#[test]
fn signed_model_strongly_polarizes_from_haar_and_tilted_starts() {
    let dir = tempfile::tempdir().unwrap();
    let report = run_suite("signed-hjmr", DEFAULT_SUITE_SEED, dir.path(), None).unwrap();
    suite_verdict(1, "signed strong polarization", &report);
}

#[test]
fn party_model_polarizes_on_an_irreducible_influence_cycle() {
    let dir = tempfile::tempdir().unwrap();
    let report = run_suite("party", DEFAULT_SUITE_SEED, dir.path(), None).unwrap();
    suite_verdict(2, "party strong polarization", &report);
}

#[test]
fn basis_issue_pairs_weakly_but_not_strongly_polarize() {
    let dir = tempfile::tempdir().unwrap();
    let report =
        run_suite("ortho-weak-not-strong", DEFAULT_SUITE_SEED, dir.path(), None).unwrap();
    suite_verdict(3, "weak but not strong polarization", &report);
}

#[test]
fn iterative_dynamics_match_the_count_based_closed_form() {
    const TRIALS: usize = 100;
    const STEPS: usize = 1000;
    const TOL: f64 = 1e-10;

    let mut rng = RngStream::new(DEFAULT_SUITE_SEED, 9004);
    let mut worst_closed = 0.0f64;
    let mut worst_permuted = 0.0f64;
    for _ in 0..TRIALS {
        let d = rng.random_range(2..6usize);
        let v0 = haar_unit_vector(d, &mut rng).unwrap();
        let eta = 0.05 + 1.5 * rng.random::<f64>();
        let model = ModelSpec::Correlation { eta };
        let issues: Vec<usize> = (0..STEPS).map(|_| rng.random_range(0..d)).collect();

        let run = |order: &[usize]| -> Vec<f64> {
            let mut x = Configuration::new(vec![v0.clone()]).unwrap();
            for &axis in order {
                let issue = UnitVector::basis(d, axis).unwrap();
                x = step(&model, &x, &issue).unwrap();
            }
            x.agent(0).coords().to_vec()
        };
        let iterated = run(&issues);

        let mut counts = vec![0u64; d];
        for &axis in &issues {
            counts[axis] += 1;
        }
        let closed = orthonormal_closed_form(&v0, eta, &counts).unwrap();
        for (a, b) in iterated.iter().zip(closed.coords()) {
            worst_closed = worst_closed.max((a - b).abs());
        }

        let mut shuffled = issues.clone();
        for i in (1..shuffled.len()).rev() {
            shuffled.swap(i, rng.random_range(0..=i));
        }
        for (a, b) in iterated.iter().zip(run(&shuffled)) {
            worst_permuted = worst_permuted.max((a - b).abs());
        }
    }
    verdict(
        4,
        "count closed form oracle",
        worst_closed <= TOL && worst_permuted <= TOL,
        &format!(
            "{TRIALS} trials of {STEPS} steps: worst closed-form gap {worst_closed:.2e}, \
             worst reorder gap {worst_permuted:.2e}, tolerance {TOL:.0e}"
        ),
    );
}

/// `C(100, 50) / 2^100`, kept exact in integers until the final division.
fn binomial_tie_probability_at_100() -> f64 {
    let mut c: u128 = 1;
    for k in 0..50u128 {
        c = c * (100 - k) / (k + 1);
    }
    c as f64 / 2f64.powi(100)
}

#[test]
fn tie_probability_matches_the_binomial_oracle_and_decays_like_inverse_sqrt() {
    const POINT_REPLICAS: u64 = 1_000_000;
    const CURVE_REPLICAS: u64 = 30_000;
    const CURVE_TIMES: [u64; 5] = [100, 316, 1000, 3162, 10_000];

    let exact = binomial_tie_probability_at_100();
    let mut rng = RngStream::new(DEFAULT_SUITE_SEED, 9005);
    let mut ties = 0u64;
    for _ in 0..POINT_REPLICAS {
        let path = balls_in_bins_simulate(2, None, 100, &mut rng).unwrap();
        ties += u64::from(path.counts_at(100)[0] == 50);
    }
    let estimate = ties as f64 / POINT_REPLICAS as f64;
    let se = (exact * (1.0 - exact) / POINT_REPLICAS as f64).sqrt();
    let gap = (estimate - exact).abs();

    let mut tie_counts = [0u64; CURVE_TIMES.len()];
    for _ in 0..CURVE_REPLICAS {
        let path = balls_in_bins_simulate(2, None, *CURVE_TIMES.last().unwrap(), &mut rng).unwrap();
        for (slot, &t) in tie_counts.iter_mut().zip(&CURVE_TIMES) {
            let counts = path.counts_at(t);
            *slot += u64::from(counts[0] == counts[1]);
        }
    }
    let points: Vec<(f64, f64)> = CURVE_TIMES
        .iter()
        .zip(&tie_counts)
        .map(|(&t, &k)| (t as f64, k as f64 / CURVE_REPLICAS as f64))
        .collect();
    let fit = decay_rate_fit(&points, DecayModel::PowerLaw).unwrap();

    verdict(
        5,
        "tie-gap decay oracle",
        gap <= 3.0 * se && (-0.6..=-0.4).contains(&fit.rate),
        &format!(
            "tie probability at t=100: {estimate:.5} vs exact {exact:.5} ({:.2} se); \
             fitted exponent {:.4}, window [-0.6, -0.4]",
            gap / se,
            fit.rate
        ),
    );
}

#[test]
fn lemma_check_sweep_passes_within_its_runtime_budget() {
    let dir = tempfile::tempdir().unwrap();
    let report = run_suite("lemma-checks", DEFAULT_SUITE_SEED, dir.path(), None).unwrap();
    suite_verdict(6, "lemma property sweep", &report);
}

#[test]
fn terminal_clusterings_are_uniform_and_consensus_has_the_predicted_share() {
    let dir = tempfile::tempdir().unwrap();
    let report = run_suite("consensus-remark", DEFAULT_SUITE_SEED, dir.path(), None).unwrap();
    suite_verdict(7, "cluster pattern uniformity", &report);
}

#[test]
fn suite_artifacts_are_byte_identical_across_worker_counts() {
    let serial_dir = tempfile::tempdir().unwrap();
    let pooled_dir = tempfile::tempdir().unwrap();
    let serial = run_suite("party", DEFAULT_SUITE_SEED, serial_dir.path(), Some(1)).unwrap();
    let pooled = run_suite("party", DEFAULT_SUITE_SEED, pooled_dir.path(), Some(8)).unwrap();
    assert!(serial.passed() && pooled.passed());

    let mut compared = 0usize;
    let mut identical = true;
    for phase in ["cycle", "disconnected"] {
        for file in ["series.csv", "summary.csv"] {
            let relative = format!("party/{phase}/{file}");
            let a = std::fs::read(serial_dir.path().join(&relative)).unwrap();
            let b = std::fs::read(pooled_dir.path().join(&relative)).unwrap();
            identical &= a == b;
            compared += 1;
        }
    }
    verdict(
        8,
        "worker-count determinism",
        identical,
        &format!("{compared} CSV artifacts byte-identical between 1 and 8 workers"),
    );
}
