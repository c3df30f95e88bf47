//! Kernel dimensions of (U_r - w)^k and its adjoint: closed formula against
//! singular values of finite sections.

use rankone::hardy;
use rankone::operators::{self, Side};
use rankone::staralg::PhiContext;
use rankone::{RatFunc, ToleranceConfig, C64};

fn main() -> Result<(), rankone::Error> {
    let tol = ToleranceConfig::default();
    let ctx = PhiContext::new(RatFunc::z(), &tol)?;
    let r = RatFunc::pole_term(C64::new(-1.8, 0.3), C64::new(1.5, 0.5), 1);

    let mut points: Vec<C64> = hardy::zeros_in_closed_disc(&hardy::one_minus(&ctx.gamma_plus(&r)), &tol)?
        .into_iter()
        .filter(|z| z.location.norm() < 1.0)
        .map(|z| z.location)
        .collect();
    points.extend([C64::new(0.0, 0.0), C64::new(0.3, -0.2)]);

    println!("{:>20} {:>8} {:>2} {:>9} {:>8}", "w", "side", "k", "numerical", "formula");
    for w in points {
        for side in [Side::Forward, Side::Adjoint] {
            for k in 1..=2 {
                let formula = operators::kernel_dim_formula(&ctx, &r, w, k, side)?;
                let numerical = operators::kernel_dim(&ctx, &r, w, k, side, 96)?;
                println!("{:>20} {:>8} {k:>2} {numerical:>9} {formula:>8}", format!("{w:.4}"), format!("{side:?}"));
            }
        }
    }

    if let Some(w) = hardy::zeros_in_closed_disc(&hardy::one_minus(&ctx.gamma_plus(&r)), &tol)?.first() {
        let chain = operators::jordan_chain(&ctx, &r, w.location, 1, Side::Forward)?;
        println!("eigenvector at {:.4}: {}", w.location, chain[0]);
    }
    Ok(())
}
