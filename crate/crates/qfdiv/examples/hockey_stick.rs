//! The hockey-stick profile of the fixture pair: kinks, the support bound from
//! D_max, and the values E_gamma takes between them.

use qfdiv::integral::{hockey_stick, hockey_stick_tilde};
use qfdiv::operator::{load_state, StatePair};

fn main() -> qfdiv::Result<()> {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures");
    let pair = StatePair::new(
        load_state(format!("{dir}/rho_a.json"))?,
        load_state(format!("{dir}/sigma_a.json"))?,
    )?;
    println!("D_max(rho||sigma) = {:.6}", pair.dmax_rho_sigma);
    println!("D_max(sigma||rho) = {:.6}", pair.dmax_sigma_rho);
    println!("kinks of E_gamma(rho||sigma): {:?}", pair.kinks_rho_sigma);

    let top = pair.dmax_rho_sigma.exp() * 1.1;
    println!("\n{:>8} {:>14} {:>14} {:>14}", "gamma", "E(rho||sigma)", "E(sigma||rho)", "E~(rho||sigma)");
    for i in 0..=20 {
        let g = 1.0 + (top - 1.0) * i as f64 / 20.0;
        println!(
            "{g:>8.4} {:>14.10} {:>14.10} {:>14.10}",
            hockey_stick(g, &pair.rho, &pair.sigma)?,
            hockey_stick(g, &pair.sigma, &pair.rho)?,
            hockey_stick_tilde(g, &pair.rho, &pair.sigma)?
        );
    }
    Ok(())
}
