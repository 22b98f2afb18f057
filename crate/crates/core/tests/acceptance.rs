//! One line per acceptance criterion, with the tolerances stated next to
//! each check. Criterion 10 reruns criteria 1 to 9 twice and compares the
//! serialized reports byte for byte.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use hfl_core::suite::{run_criterion, run_suite, CriterionResult, CRITERIA};

const SEED: u64 = 2024;

fn metric(c: &CriterionResult, key: &str) -> f64 {
    *c.metrics
        .get(key)
        .unwrap_or_else(|| panic!("criterion {} has no metric `{key}`", c.id))
}

/// Tolerances restated here so a change in the library cannot loosen them.
fn pinned(c: &CriterionResult) -> Result<(), String> {
    let ok = |cond: bool, what: &str| if cond { Ok(()) } else { Err(what.to_string()) };
    match c.id {
        1 => {
            ok(metric(c, "laplacian_norm") <= 1e-12, "|Δf(e)| <= 1e-12")?;
            ok(metric(c, "max_abs_error") <= 1e-9, "|E^(n) - n E| <= 1e-9")
        }
        2 => ok(metric(c, "max_excess") <= 1e-10, "lhs - rhs <= 1e-10"),
        3 => ok(metric(c, "max_lhs_over_rhs") <= 1.0 + 1e-10, "E_n <= (2/λ₁) E_1"),
        4 => {
            ok(metric(c, "max_isometric_residual") <= 1e-8, "isometric residual <= 1e-8")?;
            ok(metric(c, "nonisometric_residual") > 0.01, "fixture residual > 0.01")
        }
        5 => ok(c.failures.is_empty(), "no inconsistencies"),
        6 => {
            ok(metric(c, "max_mass_error") <= 1e-12, "mass error <= 1e-12")?;
            ok(metric(c, "label_mismatches") == 0.0, "walk labels reduce to geodesic labels")
        }
        7 => {
            ok((metric(c, "n1_w1") - 1.0).abs() <= 1e-9, "n=1: w1 = 1")?;
            ok(metric(c, "n1_residual_tv") < 0.02, "n=1: residual < 0.02")?;
            ok(metric(c, "n2_residual_tv") < 0.05, "n=2: residual < 0.05")?;
            ok(metric(c, "n2_w1") < 0.02, "n=2: odd weight < 0.02")
        }
        8 => {
            ok(metric(c, "max_complete_error") <= 1e-8, "complete links within 1e-8")?;
            ok(metric(c, "max_search_error") <= 1e-6, "Rayleigh search within 1e-6")?;
            ok(
                metric(c, "criterion_agreements") == metric(c, "criterion_checks"),
                "certified iff C κ₂ < √2",
            )
        }
        9 => ok(metric(c, "mismatches") == 0.0, "cyclic reduction = brute force"),
        _ => Ok(()),
    }
}

fn limit(id: u8) -> Duration {
    Duration::from_secs(match id {
        1 => 1,
        2 | 7 => 60,
        3 => 120,
        6 => 30,
        10 => 300,
        _ => 10,
    })
}

fn main() -> ExitCode {
    let mut failed = Vec::new();
    for (id, name) in CRITERIA.iter().take(9) {
        let start = Instant::now();
        let c = run_criterion(*id, SEED).expect("criterion runs");
        let took = start.elapsed();
        let verdict = pinned(&c)
            .and_then(|_| if c.pass { Ok(()) } else { Err(c.failures.join("; ")) })
            .and_then(|_| {
                if took <= limit(*id) {
                    Ok(())
                } else {
                    Err(format!("runtime above the {}s budget", limit(*id).as_secs()))
                }
            });
        let pass = verdict.is_ok();
        println!(
            "criterion {id:>2} {:<4} {name} ({:.2}s, limit {}s){}",
            if pass { "PASS" } else { "FAIL" },
            took.as_secs_f64(),
            limit(*id).as_secs(),
            verdict.err().map(|e| format!(": {e}")).unwrap_or_default()
        );
        if !pass {
            failed.push(*id);
        }
    }

    let start = Instant::now();
    let first = run_suite(SEED).expect("suite runs").to_json();
    let second = run_suite(SEED).expect("suite runs").to_json();
    let took = start.elapsed();
    let same = first == second && took <= 2 * limit(10);
    println!(
        "criterion 10 {:<4} determinism ({:.2}s for two runs, limit {}s per run)",
        if same { "PASS" } else { "FAIL" },
        took.as_secs_f64(),
        limit(10).as_secs()
    );
    if !same {
        failed.push(10);
    }
    if failed.is_empty() {
        println!("acceptance: all 10 criteria pass");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: failed criteria {failed:?}");
        ExitCode::FAILURE
    }
}
