//! Finite sections of U_r and K_r, the identities they satisfy on the
//! trusted window, and their CSV export.

use nalgebra::{DMatrix, DVector};
use rankone::gen::InstanceGen;
use rankone::operators::{self, TruncatedOperator};
use rankone::staralg::PhiContext;
use rankone::ToleranceConfig;

fn main() -> Result<(), rankone::Error> {
    let tol = ToleranceConfig::default();
    let mut g = InstanceGen::new(21);
    let ctx = PhiContext::new(g.phi(), &tol)?;
    let (r, s) = (g.ratd(), g.ratd());
    let n = 64;

    let u = operators::shift_matrix(n);
    let kr = operators::k_matrix_via_times(&ctx, &r, n)?;
    let rt = r.taylor_coeffs(n);
    let pt = ctx.phi().taylor_coeffs(n);
    let rank_one = DMatrix::from_fn(n, n, |i, j| rt[i] * pt[j].conj());
    let comm = &u * &kr.matrix - &kr.matrix * &u - rank_one;
    println!("[U, K_r] = r (x) phi: {:.1e}", TruncatedOperator::window_norm(&comm, 24));
    let ann = kr.matrix.adjoint() * DVector::from_vec(pt);
    println!("K_r* phi = 0: {:.1e}", ann.rows(0, 24).norm());
    let kt = operators::k_matrix_via_toeplitz(&ctx, &r, n)?;
    println!("two constructions of K_r agree: {:.1e}", TruncatedOperator::window_norm(&(&kt.matrix - &kr.matrix), 24));
    println!("intertwining residual: {:.1e}", operators::intertwine_residual(&ctx, &r, &s, n, 24)?);

    let small = operators::truncate_u_r(&ctx, &r, 4)?;
    let mut out = std::io::stdout().lock();
    small.write_csv(&mut out)?;
    Ok(())
}
