//! The functions Gamma_+ and Gamma_- attached to a pair (phi, r), checked
//! against trapezoidal quadrature on the circle.

use rankone::cpoly::{Poly, C64};
use rankone::hardy::{self, quadrature};
use rankone::staralg::PhiContext;
use rankone::{RatFunc, ToleranceConfig};

fn main() -> Result<(), rankone::Error> {
    let tol = ToleranceConfig::default();
    let c = |re: f64, im: f64| C64::new(re, im);

    // phi = (z - 0.3)(z + 0.2i) / (1 - 0.4 z)
    let phi = RatFunc::from_parts(
        Poly::from_roots(&[c(0.3, 0.0), c(0.0, -0.2)]),
        [rankone::Pole { at: c(2.5, 0.0), mult: 1 }],
    )
    .scale(c(-2.5, 0.0));
    let r = RatFunc::pole_term(c(0.7, -0.1), c(-1.6, 0.4), 1);
    let ctx = PhiContext::new(phi.clone(), &tol)?;

    let gp = ctx.gamma_plus(&r);
    let gm = ctx.gamma_minus_fn(&r)?;
    println!("Gamma_+ = {gp}");
    println!("Gamma_- = {gm}");

    for w in [c(0.0, 0.0), c(0.4, -0.3), c(-0.6, 0.5)] {
        let dp = (gp.eval(w) - quadrature::gamma_plus(&phi, &r, w)).norm();
        let dm = (gm.eval(w) - quadrature::gamma_minus(&phi, &r, w)).norm();
        println!("w = {w:.2}: |closed - quadrature| = {dp:.1e} (+), {dm:.1e} (-)");
    }

    for z in hardy::zeros_in_closed_disc(&hardy::one_minus(&gp), &tol)? {
        println!("1 - Gamma_+ vanishes at {:.4} with multiplicity {}", z.location, z.multiplicity);
    }
    for z in ctx.zeros() {
        let ord = hardy::ord_at(&hardy::one_minus(&gm), z.a, z.order, &tol)?;
        println!("zero {:.3} of phi (order {}): ord of 1 - Gamma_- is {}", z.a, z.order, ord.ord);
    }
    Ok(())
}
