//! Derivatives of lambda -> D(rho_lambda||sigma) along the mixture
//! rho_lambda = lambda rho + (1 - lambda) sigma, by finite differences and by
//! integrating the shifted generators.

use qfdiv::closed::{chi2_logmean, umegaki};
use qfdiv::generator::{Generator, RelativeEntropy, Shifted};
use qfdiv::integral::f_divergence;
use qfdiv::operator::{random_density, DensityState, StatePair};
use qfdiv::quad::QuadratureSpec;
use std::sync::Arc;

fn kl_along(rho: &DensityState, sigma: &DensityState, l: f64) -> qfdiv::Result<f64> {
    let mix = sigma.mix(rho, l)?;
    Ok(umegaki(&StatePair::new(mix, sigma.clone())?).value)
}

fn main() -> qfdiv::Result<()> {
    let rho = random_density(2, 2, 31)?;
    let sigma = random_density(2, 2, 32)?;
    let pair = StatePair::new(rho.clone(), sigma.clone())?;
    let spec = QuadratureSpec::default();
    let h = 1e-3;
    let l = 0.5;

    let d = |x: f64| kl_along(&rho, &sigma, x);
    let fd1 = (d(l - 2.0 * h)? - 8.0 * d(l - h)? + 8.0 * d(l + h)? - d(l + 2.0 * h)?) / (12.0 * h);
    let fd2 = (-d(l - 2.0 * h)? + 16.0 * d(l - h)? - 30.0 * d(l)? + 16.0 * d(l + h)? - d(l + 2.0 * h)?)
        / (12.0 * h * h);
    let base: Arc<dyn Generator> = Arc::new(RelativeEntropy);
    for (k, fd) in [(1usize, fd1), (2, fd2)] {
        let shifted = Shifted::new(base.clone(), k, l)?;
        let exact = f_divergence(&shifted, &pair, &spec)?.value;
        println!("order {k}: finite difference {fd:.10}, shifted generator {exact:.10}");
    }
    let at_zero = f_divergence(&Shifted::new(base, 2, 0.0)?, &pair, &spec)?.value;
    println!("order 2 at lambda = 0: {at_zero:.10}, f''(1) chi^2 = {:.10}", chi2_logmean(&pair).value);
    Ok(())
}
