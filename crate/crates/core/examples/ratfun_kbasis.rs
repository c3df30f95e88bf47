//! Rational functions in factored form, their kernel expansion and the
//! Riesz projection onto H^2.

use rankone::cpoly::{bezout, Poly, C64};
use rankone::{RatFunc, ToleranceConfig};

fn main() -> Result<(), rankone::Error> {
    let tol = ToleranceConfig::default();
    let c = |re: f64, im: f64| C64::new(re, im);

    // (1 + z) / ((z - 2)(z + 1.5i)^2)
    let f = RatFunc::from_parts(
        Poly::new(vec![c(1.0, 0.0), c(1.0, 0.0)]),
        [
            rankone::Pole { at: c(2.0, 0.0), mult: 1 },
            rankone::Pole { at: c(0.0, -1.5), mult: 2 },
        ],
    );
    println!("f = {f}");
    println!("f(0.3i) = {}", f.eval(c(0.0, 0.3)));

    let k = f.to_kbasis(&tol)?;
    for term in &k.terms {
        println!("node {:.4}: {} kernel coefficients", term.node, term.coeffs.len());
    }
    let back = RatFunc::from_kbasis(&k);
    println!("kernel round trip residual: {:.2e}", back.residual(&f, 64));

    // z^2 + 1/(z - 0.5): the projection drops the pole inside the disc
    let g = &RatFunc::monomial(2) + &RatFunc::pole_term(c(1.0, 0.0), c(0.5, 0.0), 1);
    println!("P_+ (z^2 + 1/(z - 0.5)) = {}", g.project_plus(&tol)?);

    let p = Poly::from_roots(&[c(0.5, 0.0), c(-1.0, 0.0)]);
    let q = Poly::from_roots(&[c(0.5, 0.0), c(2.0, 1.0)]);
    let b = bezout(&p, &q, &tol)?;
    println!("gcd = {}, bezout residual {:.2e}", RatFunc::poly(b.g), b.residual);
    Ok(())
}
