//! H_alpha of a random qutrit pair three ways: the hockey-stick integral, the
//! resolvent trace form (alpha > 1) and the double-integral form (alpha < 1).

use qfdiv::closed::{hellinger_fractional_trace, hellinger_trace, integer_trace_integral};
use qfdiv::integral::hellinger;
use qfdiv::operator::{random_density, StatePair};
use qfdiv::quad::QuadratureSpec;

fn main() -> qfdiv::Result<()> {
    let pair = StatePair::new(random_density(3, 3, 11)?, random_density(3, 3, 12)?)?;
    let spec = QuadratureSpec::default();

    println!("{:>5} {:>18} {:>18} {:>10}", "alpha", "integral", "trace form", "rel diff");
    for alpha in [0.25, 0.5, 0.75, 1.5, 2.0, 2.5, 3.0, 4.0] {
        let q = hellinger(alpha, &pair, &spec)?.value;
        let t = if alpha > 1.0 {
            hellinger_trace(alpha, &pair, &spec)?.value
        } else {
            hellinger_fractional_trace(alpha, &pair, &spec)?.value
        };
        println!("{alpha:>5} {q:>18.12} {t:>18.12} {:>10.2e}", (q - t).abs() / (1.0 + q.abs()));
    }

    println!("\nT_k = int_0^inf Tr(rho (sigma+s)^-1)^k ds");
    for k in 2..=5 {
        println!("  T_{k} = {:.12}", integer_trace_integral(k, &pair)?);
    }
    Ok(())
}
