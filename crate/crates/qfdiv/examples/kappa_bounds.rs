//! Comparing two divergences through the extremes of their generators on the
//! range where E_gamma is supported.

use qfdiv::closed::{chi2_logmean, kappa_bar, kappa_extrema, umegaki};
use qfdiv::generator::{Generator, Hellinger, Normalized, RelativeEntropy};
use qfdiv::operator::{random_density, StatePair};
use std::sync::Arc;

fn main() -> qfdiv::Result<()> {
    let pair = StatePair::new(random_density(3, 3, 21)?, random_density(3, 3, 22)?)?;
    let kl = RelativeEntropy;
    let k = kappa_extrema(&kl, &pair)?;
    let chi2 = chi2_logmean(&pair).value;
    let d = umegaki(&pair).value;
    println!("f'' of x log x ranges over [{:.6}, {:.6}] on [{:.4}, {:.4}]", k.kappa_down, k.kappa_up, k.lo, k.hi);
    println!("{:.10} <= D = {d:.10} <= {:.10}", 0.5 * k.kappa_down * chi2, 0.5 * k.kappa_up * chi2);

    let f = Normalized::new(Arc::new(RelativeEntropy))?;
    let g = Normalized::new(Arc::new(Hellinger::new(2.0)?))?;
    let bar = kappa_bar(&f, &g, &pair)?;
    println!(
        "\nsup {} / {} = {:.10} at x = {:.4}, so D <= {:.10}",
        f.name(),
        g.name(),
        bar.value,
        bar.arg,
        bar.value * chi2
    );
    Ok(())
}
