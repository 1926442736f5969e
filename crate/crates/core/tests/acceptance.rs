//! The twelve reproduction checks, one PASS/FAIL line each.
//!
//! Runs without the libtest harness so every line is printed; the process
//! fails if any check fails.

use std::process::ExitCode;
use std::time::Instant;

use gwforest::verify::CRITERIA;

fn main() -> ExitCode {
    let filter: Option<usize> = std::env::args().skip(1).find_map(|a| a.parse().ok());
    let started = Instant::now();
    let mut failed = Vec::new();
    for (k, check) in CRITERIA.iter().enumerate() {
        if filter.is_some_and(|f| f != k + 1) {
            continue;
        }
        let outcome = check();
        println!("{outcome}");
        if !outcome.passed {
            failed.push(outcome.id);
        }
    }
    println!("acceptance finished in {:.1} s", started.elapsed().as_secs_f64());
    if failed.is_empty() {
        println!("acceptance: all checks passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: failed checks {failed:?}");
        ExitCode::FAILURE
    }
}
