//! Rényi curves of the fixture pair over alpha in [0.1, 3], written as CSV.
//! Pass a path to write a file instead of printing.

use qfdiv::operator::{load_state, StatePair};
use qfdiv::quad::QuadratureSpec;
use qfdiv::sweep::{parse_range, sweep, to_csv};

fn main() -> qfdiv::Result<()> {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures");
    let pair = StatePair::new(
        load_state(format!("{dir}/rho_a.json"))?,
        load_state(format!("{dir}/sigma_a.json"))?,
    )?;
    let rows = sweep(&parse_range("0.1:3:0.1")?, &pair, &QuadratureSpec::default(), false)?;
    let csv = to_csv(&rows);
    match std::env::args().nth(1) {
        Some(path) => std::fs::write(&path, csv)?,
        None => print!("{csv}"),
    }
    Ok(())
}
