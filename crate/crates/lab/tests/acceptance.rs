//! Runs the full acceptance suite and prints one PASS/FAIL line per
//! criterion. No libtest harness, so the lines show without `--nocapture`.

use std::process::ExitCode;

use jmgt_lab::acceptance::run_all;

fn main() -> ExitCode {
    let work = tempfile::tempdir().expect("temporary work directory");
    let results = run_all(work.path());
    for r in &results {
        println!("{r}");
    }
    let failed = results.iter().filter(|r| !r.passed).count();
    println!("acceptance: {} of {} criteria passed", results.len() - failed, results.len());
    if failed == 0 && results.len() == 10 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
