//! Every catalog divergence of the fixture pair A, from the hockey-stick
//! integral next to the corresponding closed form.

use qfdiv::closed::{chi2_logmean, lecam, petz, sandwiched, umegaki};
use qfdiv::generator::{ChiPower, Generator, Hellinger, LeCam, RelativeEntropy};
use qfdiv::integral::{f_divergence, renyi};
use qfdiv::operator::{load_state, StatePair};
use qfdiv::quad::QuadratureSpec;

fn main() -> qfdiv::Result<()> {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures");
    let pair = StatePair::new(
        load_state(format!("{dir}/rho_a.json"))?,
        load_state(format!("{dir}/sigma_a.json"))?,
    )?;
    let spec = QuadratureSpec::default();

    let rows: Vec<(Box<dyn Generator>, Option<f64>)> = vec![
        (Box::new(RelativeEntropy), Some(umegaki(&pair).value)),
        (Box::new(Hellinger::new(0.5)?), None),
        (Box::new(Hellinger::new(2.0)?), Some(chi2_logmean(&pair).value)),
        (Box::new(LeCam::new(0.3)?), Some(lecam(0.3, &pair)?)),
        (Box::new(ChiPower::new(3)?), None),
    ];
    println!("{:<28} {:>16} {:>10} {:>16}", "generator", "integral", "est_err", "closed form");
    for (f, closed) in rows {
        let v = f_divergence(f.as_ref(), &pair, &spec)?;
        let closed = closed.map_or("-".to_string(), |c| format!("{c:.12}"));
        println!("{:<28} {:>16.12} {:>10.1e} {:>16}", f.name(), v.value, v.est_error, closed);
    }

    println!("\n{:>5} {:>14} {:>14} {:>14}", "alpha", "D_alpha", "petz", "sandwiched");
    for alpha in [0.5, 2.0, 3.0] {
        println!(
            "{alpha:>5} {:>14.10} {:>14.10} {:>14.10}",
            renyi(alpha, &pair, &spec)?.value,
            petz(alpha, &pair)?.renyi,
            sandwiched(alpha, &pair)?.renyi
        );
    }
    Ok(())
}
