//! Acceptance suite: one pass/fail line per criterion, non-zero exit if any fails.

use std::path::Path;
use std::process::Command;
use std::time::Instant;

use chernlab_cli::config::RunConfig;
use chernlab_cli::report::Record;
use chernlab_cli::suite::{run_criterion, CRITERIA};

const SEED: u64 = 7;

fn summary(records: &[Record]) -> String {
    match records.iter().find(|r| !r.passed()) {
        Some(r) => match (&r.error, r.measured) {
            (Some(e), _) => format!("{}: {e}", r.name),
            (None, m) => format!(
                "{}: measured {:e}, threshold {:e}",
                r.name,
                m.unwrap_or(f64::NAN),
                r.threshold
            ),
        },
        None => format!("{} records", records.len()),
    }
}

fn verify_all_bytes(dir: &Path, tag: &str, threads: &str) -> Result<Vec<u8>, String> {
    let out = dir.join(format!("{tag}.json"));
    let status = Command::new(env!("CARGO_BIN_EXE_chernlab"))
        .args(["verify", "all", "--seed", &SEED.to_string(), "--out"])
        .arg(&out)
        .env("RAYON_NUM_THREADS", threads)
        .stderr(std::process::Stdio::null())
        .status()
        .map_err(|e| e.to_string())?;
    if status.code() != Some(0) {
        return Err(format!("verify all exited with {status}"));
    }
    std::fs::read(&out).map_err(|e| e.to_string())
}

fn determinism() -> Result<String, String> {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let first = verify_all_bytes(dir.path(), "first", "4")?;
    let second = verify_all_bytes(dir.path(), "second", "4")?;
    let single = verify_all_bytes(dir.path(), "single", "1")?;
    if first != second {
        return Err("two runs with 4 threads differ".into());
    }
    if first != single {
        return Err("1 and 4 threads differ".into());
    }
    Ok(format!("{} identical bytes across 3 runs", first.len()))
}

fn main() {
    let cfg = RunConfig::with_seed(SEED);
    let mut failures = 0;
    for (k, title) in CRITERIA.iter().enumerate() {
        let id = k + 1;
        let start = Instant::now();
        let (ok, detail) = if id <= 12 {
            let records = run_criterion(id, &cfg);
            (
                records.iter().all(Record::passed) && !records.is_empty(),
                summary(&records),
            )
        } else {
            match determinism() {
                Ok(s) => (true, s),
                Err(s) => (false, s),
            }
        };
        if !ok {
            failures += 1;
        }
        println!(
            "[{}] {id:>2} {title} ({detail}; {:.1} s)",
            if ok { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {} passed, {failures} failed", CRITERIA.len() - failures);
    if failures > 0 {
        std::process::exit(1);
    }
}
