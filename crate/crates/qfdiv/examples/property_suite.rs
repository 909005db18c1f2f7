//! Runs the property suite (or the checks named on the command line) on a
//! small ensemble and prints the margin table.

use qfdiv::checks::{check_names, render_table, run_check, theorems_pass, EnsembleSpec};
use qfdiv::quad::QuadratureSpec;

fn main() -> qfdiv::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let trials = std::env::var("TRIALS").ok().and_then(|t| t.parse().ok()).unwrap_or(5);
    let ens = EnsembleSpec::default().with_trials(trials);
    let spec = QuadratureSpec::default();
    let names: Vec<String> = if args.is_empty() {
        check_names().into_iter().map(String::from).collect()
    } else {
        args
    };
    let mut reports = Vec::new();
    for name in &names {
        reports.extend(run_check(name, &ens, &spec)?);
    }
    print!("{}", render_table(&reports));
    println!("theorem-grade checks pass: {}", theorems_pass(&reports));
    Ok(())
}
