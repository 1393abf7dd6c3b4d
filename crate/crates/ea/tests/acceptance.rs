//! Acceptance criteria 1 to 12, one PASS/FAIL line each.
//!
//! Pass criterion numbers as arguments to run a subset:
//! `cargo test -p ea --test acceptance -- 3 9`.

use std::fs;
use std::process::{Command, ExitCode};

use ea::config::DEFAULT_SEED;
use ea::validation::{criterion, title, Status, ValidationOptions, CRITERIA};

/// Runs the binary twice with the same seed and compares every CSV byte for byte.
fn rerun_binary() -> Result<String, String> {
    let dirs = [tempfile::tempdir().map_err(|e| e.to_string())?, tempfile::tempdir().map_err(|e| e.to_string())?];
    let mut outputs = Vec::new();
    for d in &dirs {
        let status = Command::new(env!("CARGO_BIN_EXE_ea"))
            .args(["fig4", "--seed", "42", "--out"])
            .arg(d.path())
            .output()
            .map_err(|e| e.to_string())?;
        if !status.status.success() {
            return Err(format!("ea fig4 exited with {}", status.status));
        }
        let mut files: Vec<_> = fs::read_dir(d.path())
            .map_err(|e| e.to_string())?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "csv"))
            .collect();
        files.sort();
        let bytes: Vec<_> = files
            .iter()
            .map(|p| Ok((p.file_name().unwrap().to_owned(), fs::read(p)?)))
            .collect::<std::io::Result<_>>()
            .map_err(|e| e.to_string())?;
        outputs.push(bytes);
    }
    if outputs[0].is_empty() {
        return Err("no CSV written".into());
    }
    if outputs[0] != outputs[1] {
        return Err("CSV output differs between runs".into());
    }
    Ok(format!("{} CSV files identical across two runs of the binary", outputs[0].len()))
}

fn main() -> ExitCode {
    let wanted: Vec<u8> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let opts = ValidationOptions::new(DEFAULT_SEED);
    let mut failed = Vec::new();
    for id in 1..=CRITERIA {
        if !wanted.is_empty() && !wanted.contains(&id) {
            continue;
        }
        let (status, line, details) = match criterion(id, &opts) {
            Ok(mut r) => {
                if id == 12 {
                    match rerun_binary() {
                        Ok(msg) => r.details.push(msg),
                        Err(msg) => {
                            r.status = Status::Fail;
                            r.details.push(msg);
                        }
                    }
                }
                (r.status, format!("{} | measured {} | expected {}", r.title, r.measured, r.expected), r.details)
            }
            Err(e) => (Status::Fail, format!("{}: error {e}", title(id)), Vec::new()),
        };
        println!("criterion {id}: {status} {line}");
        for d in details {
            println!("    {d}");
        }
        if status != Status::Pass {
            failed.push(id);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: not passing: {failed:?}");
        ExitCode::FAILURE
    }
}
