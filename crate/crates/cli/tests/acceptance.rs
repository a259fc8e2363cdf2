//! Acceptance suite: one PASS/FAIL line per criterion, followed by the
//! measured values. Exits non-zero if any criterion fails.

use std::process::Command;
use std::time::Instant;

use jcsim_core::validation::Suite;

/// Wall-clock budget for the headless `jcsim validate` run.
const VALIDATE_BUDGET_S: f64 = 15.0 * 60.0;

fn criterion_10(failed: &mut Vec<u8>) {
    let dir = tempfile::tempdir().expect("temp dir");
    let start = Instant::now();
    let status = Command::new(env!("CARGO_BIN_EXE_jcsim"))
        .args(["validate", "--quiet", "--out"])
        .arg(dir.path())
        .output()
        .expect("jcsim runs")
        .status;
    let secs = start.elapsed().as_secs_f64();

    // exit 1 only reports failed criteria; the suite itself ran to the end
    let finished = matches!(status.code(), Some(0) | Some(1));
    let n_reported = std::fs::read_to_string(dir.path().join("validate_summary.json"))
        .ok()
        .and_then(|s| serde_json::from_str::<serde_json::Value>(&s).ok())
        .and_then(|v| v["criteria"].as_array().map(Vec::len))
        .unwrap_or(0);
    let pass = finished && n_reported == 9 && secs < VALIDATE_BUDGET_S;
    println!(
        "criterion 10 [{}] headless `jcsim validate` ({secs:.1} s)",
        if pass { "PASS" } else { "FAIL" }
    );
    println!(
        "    [{}] exit status {:?}, {n_reported} of 9 criteria reported",
        if finished && n_reported == 9 { "ok" } else { "x" },
        status.code()
    );
    println!(
        "    [{}] wall time = {secs:.1} s (need < {VALIDATE_BUDGET_S:.0} s)",
        if secs < VALIDATE_BUDGET_S { "ok" } else { "x" }
    );
    if !pass {
        failed.push(10);
    }
}

fn main() {
    let mut suite = Suite::new();
    let mut failed = Vec::new();
    for id in 1..=9u8 {
        match suite.criterion(id) {
            Ok(r) => {
                println!("{}", r.render());
                if !r.passed() {
                    failed.push(id);
                }
            }
            Err(e) => {
                println!("criterion {id} [FAIL] error: {e}");
                failed.push(id);
            }
        }
    }
    criterion_10(&mut failed);

    println!("acceptance: {} of 10 criteria passed", 10 - failed.len());
    if !failed.is_empty() {
        println!("acceptance: failed criteria {failed:?}");
        std::process::exit(1);
    }
}
