//! Symmetric discrimination of a random qubit pair: error probabilities of
//! n-copy states against the Chernoff bound.

use qfdiv::closed::{chernoff, error_probability};
use qfdiv::linalg::kron;
use qfdiv::operator::{random_density, DensityState, StatePair};

fn power(s: &DensityState, n: usize) -> qfdiv::Result<DensityState> {
    let mut m = s.matrix().clone();
    for _ in 1..n {
        m = kron(&m, s.matrix());
    }
    DensityState::new(m)
}

fn main() -> qfdiv::Result<()> {
    let pair = StatePair::new(random_density(2, 2, 5)?, random_density(2, 2, 6)?)?;
    let ch = chernoff(&pair)?;
    println!("Chernoff information {:.10} at alpha* = {:.6}", ch.value, ch.alpha_star);

    println!("\n{:>2} {:>14} {:>14} {:>14}", "n", "p_e total", "p_e prior 1/2", "q_min^n");
    for n in 1..=6 {
        let pe = error_probability(&power(&pair.rho, n)?, &power(&pair.sigma, n)?);
        println!("{n:>2} {:>14.10} {:>14.10} {:>14.10}", pe.total, pe.equal_prior, ch.q_min.powi(n as i32));
    }
    Ok(())
}
