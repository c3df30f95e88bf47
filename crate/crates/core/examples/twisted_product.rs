//! The twisted product r x s and the circle product r o s = r + s - r x s.

use rankone::cpoly::C64;
use rankone::gen::InstanceGen;
use rankone::staralg::{PhiContext, RESIDUAL_TERMS};
use rankone::ToleranceConfig;

fn main() -> Result<(), rankone::Error> {
    let tol = ToleranceConfig::default();
    let mut g = InstanceGen::new(7);
    let ctx = PhiContext::new(g.phi(), &tol)?;
    let (r, s, t) = (g.ratd(), g.ratd(), g.ratd());
    println!("phi = {}", ctx.phi());
    println!("r = {r}\ns = {s}");

    let rs = ctx.times(&r, &s);
    println!("r x s = {rs}");
    println!("commutativity residual: {:.1e}", rs.residual(&ctx.times(&s, &r), RESIDUAL_TERMS));
    let assoc = ctx.times(&r, &ctx.times(&s, &t)).residual(&ctx.times(&rs, &t), RESIDUAL_TERMS);
    println!("associativity residual: {assoc:.1e}");
    let hom = ctx
        .gamma_plus(&rs)
        .residual(&(&ctx.gamma_plus(&r) * &ctx.gamma_plus(&s)), RESIDUAL_TERMS);
    println!("Gamma_+(r x s) = Gamma_+(r) Gamma_+(s) residual: {hom:.1e}");

    let unit = rankone::RatFunc::constant(C64::new(0.0, 0.0));
    println!("r o 0 = r residual: {:.1e}", ctx.circle(&r, &unit).residual(&r, RESIDUAL_TERMS));
    Ok(())
}
