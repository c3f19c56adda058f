//! Acceptance criteria, one line per criterion.

use std::process::ExitCode;

use infodesign::selftest::{self, KNOWN_UNATTAINABLE};

fn main() -> ExitCode {
    let reports = selftest::run_all();
    println!();
    for r in &reports {
        println!("{}", r.line());
        for c in &r.checks {
            let mark = if c.passed { "ok  " } else { "FAIL" };
            println!("    {mark} {} {}", c.label, c.detail);
        }
    }
    let passed = reports.iter().filter(|r| r.passed()).count();
    println!("\n{passed}/{} criteria pass", reports.len());

    for (id, label) in KNOWN_UNATTAINABLE {
        println!("known unattainable, reported but not fatal: [{id}] {label}");
    }
    let unexpected = selftest::unexpected_failures(&reports);
    if unexpected.is_empty() {
        ExitCode::SUCCESS
    } else {
        for (id, c) in unexpected {
            eprintln!("unexpected failure in [{id}]: {} ({})", c.label, c.detail);
        }
        ExitCode::FAILURE
    }
}
