//! Circle inverses: t o t' = 0, and the matching operator identity
//! (I - K_t)(I - K_t') = I on the trusted window.

use nalgebra::DMatrix;
use rankone::gen::InstanceGen;
use rankone::operators::{self, TruncatedOperator};
use rankone::staralg::{PhiContext, RESIDUAL_TERMS};
use rankone::{ToleranceConfig, C64};

fn main() -> Result<(), rankone::Error> {
    let tol = ToleranceConfig::default();
    let mut g = InstanceGen::new(3);
    let ctx = PhiContext::new(g.phi(), &tol)?;
    let t = g.circle_invertible(&ctx)?;
    let check = ctx.is_circle_invertible(&t)?;
    println!("t = {t}\ncircle invertible: {}", check.invertible);

    let inv = ctx.circle_inverse(&t)?;
    println!("t' = {inv}");
    println!("t o t' residual: {:.1e}", ctx.circle(&t, &inv).taylor_norm(RESIDUAL_TERMS));

    let n = 48;
    let id = DMatrix::<C64>::identity(n, n);
    let a = &id - operators::k_matrix_via_times(&ctx, &t, n)?.matrix;
    let b = &id - operators::k_matrix_via_times(&ctx, &inv, n)?.matrix;
    println!(
        "(I - K_t)(I - K_t') - I on the leading 16 degrees: {:.1e}",
        TruncatedOperator::window_norm(&(a * b - id), 16)
    );
    Ok(())
}
