//! Decomposition of r into its symbol and local nilpotent components at
//! the zeros of phi, and reassembly.

use rankone::cpoly::{Poly, C64};
use rankone::gen::InstanceGen;
use rankone::staralg::{PhiContext, RESIDUAL_TERMS};
use rankone::{RatFunc, ToleranceConfig};

fn main() -> Result<(), rankone::Error> {
    let tol = ToleranceConfig::default();
    let c = |re: f64, im: f64| C64::new(re, im);
    // double zero at 0.2 - 0.5i, simple zero at -0.3 + 0.1i
    let phi = RatFunc::poly(Poly::from_roots(&[c(0.2, -0.5), c(0.2, -0.5), c(-0.3, 0.1)]));
    let ctx = PhiContext::new(phi, &tol)?;

    for z in ctx.zeros() {
        println!(
            "zero {:.3} of order {}: sign {}, bezout residual {:.1e}, unit residual {:.1e}",
            z.a, z.order, z.sigma, z.bezout_residual, z.unit_residual
        );
        println!("  e_a = {}", z.e);
    }

    let r = InstanceGen::new(11).ratd();
    let v = ctx.to_structure(&r)?;
    println!("symbol component: {}", v.symbol);
    for el in &v.locals {
        let coeffs: Vec<String> = el.coeffs.iter().map(|x| format!("{x:.4}")).collect();
        println!("local component at {:.3}: [{}]", el.node, coeffs.join(", "));
    }
    let back = ctx.from_structure(&v)?;
    println!("round trip residual: {:.1e}", back.residual(&r, RESIDUAL_TERMS));
    Ok(())
}
