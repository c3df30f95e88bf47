//! Deciding similarity of U + r (x) phi and U + s (x) phi, with a witness
//! when the answer is yes.

use rankone::gen::InstanceGen;
use rankone::staralg::{PhiContext, Verdict, RESIDUAL_TERMS};
use rankone::{RatFunc, ToleranceConfig};

fn main() -> Result<(), rankone::Error> {
    let tol = ToleranceConfig::default();

    let ctx = PhiContext::new(RatFunc::one(), &tol)?;
    for r in [RatFunc::real(0.5), RatFunc::real(2.0)] {
        let rep = ctx.similar(&r, &RatFunc::zero())?;
        println!("phi = 1, r = {r}, s = 0: {:?}", rep.verdict);
        if let Some(t) = &rep.witness {
            println!("  witness t = {t}");
        }
    }

    let ctx = PhiContext::new(RatFunc::z(), &tol)?;
    let rep = ctx.similar(&RatFunc::real(-1.0), &RatFunc::zero())?;
    println!("phi = z, r = -1, s = 0: {:?}", rep.verdict);
    for row in &rep.cond_b {
        println!("  at {}: order {}, ord_r {}, ord_s {}", row.node, row.order, row.ord_r, row.ord_s);
    }

    // s = r o t is always similar to r
    let mut g = InstanceGen::new(5);
    let ctx = PhiContext::new(g.phi(), &tol)?;
    let r = g.ratd();
    let t = g.circle_invertible(&ctx)?;
    let s = ctx.circle(&r, &t);
    let rep = ctx.similar(&r, &s)?;
    assert_eq!(rep.verdict, Verdict::Yes);
    let w = rep.witness.expect("witness for a yes verdict");
    println!("random instance: YES, r o t_found = s residual {:.1e}", ctx.circle(&r, &w).residual(&s, RESIDUAL_TERMS));
    Ok(())
}
