//! Finite sections of `U`, `U_r = U + r (x) phi` and `K_r` in the monomial
//! basis, Jordan chains in exact rational arithmetic, and kernel
//! dimensions by singular values.

use std::io::Write;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::cpoly::{C64, ONE, ZERO};
use crate::error::{Error, Result};
use crate::hardy::{self, Symbol};
use crate::ratfun::RatFunc;
use crate::staralg::PhiContext;
use crate::tol::ToleranceConfig;

/// Smallest section the constructions accept.
pub const MIN_DIM: usize = 4;
/// Extra rows in the rectangular adjoint compression.
const ADJOINT_PAD: usize = 8;

#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedOperator {
    pub matrix: DMatrix<C64>,
    pub n: usize,
    /// Leading degrees on which the section is exact or trusted.
    pub window: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Forward,
    Adjoint,
}

#[derive(Serialize)]
struct MatrixJson {
    n: usize,
    window: usize,
    entries: Vec<Vec<[f64; 2]>>,
}

impl TruncatedOperator {
    fn new(matrix: DMatrix<C64>, window: usize) -> Self {
        let n = matrix.nrows();
        Self { matrix, n, window }
    }

    pub fn to_json(&self) -> serde_json::Value {
        let entries = self
            .matrix
            .row_iter()
            .map(|row| row.iter().map(|c| [c.re, c.im]).collect())
            .collect();
        serde_json::to_value(MatrixJson {
            n: self.n,
            window: self.window,
            entries,
        })
        .expect("matrix serializes")
    }

    /// Row-major CSV: a `# n=.. window=..` comment line, a header of `re,im`
    /// pairs, then one line per row.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let io = |e: std::io::Error| Error::InvalidArgument(e.to_string());
        let csv_err = |e: csv::Error| Error::InvalidArgument(e.to_string());
        let mut out = out;
        writeln!(out, "# n={} window={}", self.n, self.window).map_err(io)?;
        let mut w = csv::Writer::from_writer(out);
        let header: Vec<&str> = (0..self.matrix.ncols()).flat_map(|_| ["re", "im"]).collect();
        w.write_record(&header).map_err(csv_err)?;
        for row in self.matrix.row_iter() {
            let rec: Vec<String> = row
                .iter()
                .flat_map(|c| [c.re.to_string(), c.im.to_string()])
                .collect();
            w.write_record(&rec).map_err(csv_err)?;
        }
        w.flush().map_err(io)
    }

    /// Largest 2-norm over columns `j < w` of the leading `w x w` block.
    pub fn window_norm(m: &DMatrix<C64>, w: usize) -> f64 {
        let w = w.min(m.nrows()).min(m.ncols());
        (0..w)
            .map(|j| m.view((0, j), (w, 1)).norm())
            .fold(0.0, f64::max)
    }
}

fn check_dim(n: usize) -> Result<()> {
    if n < MIN_DIM {
        return Err(Error::InvalidArgument(format!(
            "truncation dimension must be at least {MIN_DIM}, got {n}"
        )));
    }
    Ok(())
}

/// Backward shift: ones on the superdiagonal.
pub fn shift_matrix(n: usize) -> DMatrix<C64> {
    DMatrix::from_fn(n, n, |i, j| if j == i + 1 { ONE } else { ZERO })
}

/// `f -> <f, b> a` on the first `n` monomials.
fn rank_one(a: &[C64], b: &[C64]) -> DMatrix<C64> {
    DMatrix::from_fn(a.len(), b.len(), |i, j| a[i] * b[j].conj())
}

pub fn truncate_u_r(ctx: &PhiContext, r: &RatFunc, n: usize) -> Result<TruncatedOperator> {
    check_dim(n)?;
    r.validate_in_ratd(ctx.tol())?;
    let m = shift_matrix(n) + rank_one(&r.taylor_coeffs(n), &ctx.phi().taylor_coeffs(n));
    Ok(TruncatedOperator::new(m, n))
}

/// Column `m` is the coefficient vector of `r x z^m`.
pub fn k_matrix_via_times(ctx: &PhiContext, r: &RatFunc, n: usize) -> Result<TruncatedOperator> {
    check_dim(n)?;
    r.validate_in_ratd(ctx.tol())?;
    let mut m = DMatrix::zeros(n, n);
    for j in 0..n {
        let col = ctx.times(r, &RatFunc::monomial(j)).taylor_coeffs(n);
        m.column_mut(j).copy_from_slice(&col);
    }
    Ok(TruncatedOperator::new(m, n))
}

/// Section of the analytic Toeplitz operator `T_f`: `(i, j) -> f_(i-j)`.
fn analytic_toeplitz(coeffs: &[C64]) -> DMatrix<C64> {
    let n = coeffs.len();
    DMatrix::from_fn(n, n, |i, j| if i >= j { coeffs[i - j] } else { ZERO })
}

/// `K_r = T_{zr} T_conj(phi) + T_g - T_{z r conj(phi)}` with `g = gamma_+(r)`.
///
/// The first factor is lower triangular, so its product with the section of
/// `T_conj(phi)` is exact; the symbol of the last term has Fourier
/// coefficients `Taylor_k(T_conj(phi)(zr))` for `k >= 0` and
/// `conj(Taylor_k(T_conj(zr) phi))` at `-k`. The section is exact on all `n`
/// degrees.
pub fn k_matrix_via_toeplitz(ctx: &PhiContext, r: &RatFunc, n: usize) -> Result<TruncatedOperator> {
    check_dim(n)?;
    let tol = ctx.tol();
    r.validate_in_ratd(tol)?;
    let zr = r.mul_z();
    let zr_t = zr.taylor_coeffs(n);
    let phi_t = ctx.phi().taylor_coeffs(n);
    let co_phi = DMatrix::from_fn(n, n, |i, j| if j >= i { phi_t[j - i].conj() } else { ZERO });
    let first = analytic_toeplitz(&zr_t) * co_phi;
    let g = analytic_toeplitz(&ctx.gamma_plus(r).taylor_coeffs(n));
    let pos = ctx.toeplitz(&zr).taylor_coeffs(n);
    let neg = if zr.is_zero() {
        vec![ZERO; n]
    } else {
        hardy::toeplitz_conj_apply(&Symbol::new(zr, tol)?, ctx.phi()).taylor_coeffs(n)
    };
    let mixed = DMatrix::from_fn(n, n, |i, j| if i >= j { pos[i - j] } else { neg[j - i].conj() });
    Ok(TruncatedOperator::new(first + g - mixed, n))
}

/// Window norm of `(I - K_r)(U + s (x) phi) - (U + (r o s) (x) phi)(I - K_r)`.
pub fn intertwine_residual(
    ctx: &PhiContext,
    r: &RatFunc,
    s: &RatFunc,
    n: usize,
    window: usize,
) -> Result<f64> {
    let id = DMatrix::<C64>::identity(n, n);
    let k = id.clone() - k_matrix_via_times(ctx, r, n)?.matrix;
    let us = truncate_u_r(ctx, s, n)?.matrix;
    let urs = truncate_u_r(ctx, &ctx.circle(r, s), n)?.matrix;
    let diff = &k * us - urs * &k;
    Ok(TruncatedOperator::window_norm(&diff, window))
}

/// `(z f(z) - w f(w)) / (z - w)`, the resolvent `(1 - w U)^(-1)` on Rat(D).
fn forward_step(f: &RatFunc, w: C64) -> RatFunc {
    let fw = f.eval(w);
    let g = &f.mul_z() - &RatFunc::constant(w * fw);
    divide_by_linear(&g, w)
}

/// `(f - f(w)) / (z - w)`
fn adjoint_step(f: &RatFunc, w: C64) -> RatFunc {
    let g = &(*f).clone() - &RatFunc::constant(f.eval(w));
    divide_by_linear(&g, w)
}

/// `g / (z - w)` for `g` vanishing at `w`.
fn divide_by_linear(g: &RatFunc, w: C64) -> RatFunc {
    RatFunc::from_parts(g.num().deflate(w).0, g.poles().iter().copied())
}

fn vanishes(v: C64, scale: f64, tol: &ToleranceConfig) -> bool {
    v.norm() <= tol.tau_ord * scale.max(1.0)
}

/// The chain `B f, B^2 f, ..., B^k f` spanning `ker(1 - w U_r)^k` (forward,
/// `f = r`) or `ker(U_r^* - w)^k` (adjoint, `f = phi`). Fails with
/// `ChainBreaks(i)` when the chain conditions fail at step `i`.
pub fn jordan_chain(
    ctx: &PhiContext,
    r: &RatFunc,
    w: C64,
    k: usize,
    side: Side,
) -> Result<Vec<RatFunc>> {
    let tol = ctx.tol();
    let phi = ctx.phi();
    r.validate_in_ratd(tol)?;
    let bound = match side {
        Side::Forward => 1.0 + tol.delta_boundary,
        Side::Adjoint => 1.0,
    };
    if w.norm() > bound || (side == Side::Adjoint && w.norm() >= 1.0) {
        return Err(Error::InvalidArgument(format!("|w| = {} is outside the admissible disc", w.norm())));
    }
    let mut chain: Vec<RatFunc> = Vec::with_capacity(k);
    let mut prev = match side {
        Side::Forward => r.clone(),
        Side::Adjoint => phi.clone(),
    };
    for i in 1..=k {
        let next = match side {
            Side::Forward => forward_step(&prev, w),
            Side::Adjoint => {
                // (B^{i-1} phi)(w) = 0
                let v = prev.eval(w);
                if !vanishes(v, prev.taylor_norm(16), tol) {
                    return Err(Error::ChainBreaks(i));
                }
                adjoint_step(&prev, w)
            }
        };
        let ok = match side {
            Side::Forward => {
                let p = hardy::inner_product(&next, phi, tol)?;
                if i == 1 {
                    vanishes(ONE - w * p, 1.0, tol)
                } else {
                    vanishes(p, next.taylor_norm(16), tol)
                }
            }
            Side::Adjoint => {
                let p = hardy::inner_product(&next, r, tol)?;
                if i == 1 {
                    vanishes(p + ONE, 1.0, tol)
                } else {
                    vanishes(p, next.taylor_norm(16), tol)
                }
            }
        };
        if !ok {
            return Err(Error::ChainBreaks(i));
        }
        chain.push(next.clone());
        prev = next;
    }
    Ok(chain)
}

/// Closed-form kernel dimension: `min(k, ord_w(1 - Gamma_+(.; r)))`
/// forward, `min(k, ord_w(phi), ord_w(1 - Gamma_-(.; r)))` adjoint.
pub fn kernel_dim_formula(ctx: &PhiContext, r: &RatFunc, w: C64, k: usize, side: Side) -> Result<usize> {
    let tol = ctx.tol();
    match side {
        Side::Forward => {
            let f = hardy::one_minus(&ctx.gamma_plus(r));
            Ok(hardy::ord_at(&f, w, k, tol)?.ord.min(k))
        }
        Side::Adjoint => {
            let phi_ord = hardy::ord_at(ctx.phi(), w, k, tol)?.ord;
            let f = hardy::one_minus(&ctx.gamma_minus_fn(r)?);
            Ok(hardy::ord_at(&f, w, k, tol)?.ord.min(phi_ord).min(k))
        }
    }
}

/// Geometric tail bound `rho^(-n) n^(m-1)` for the data entering the
/// section, with `rho` the smallest pole modulus and `m` the largest order.
fn tail_estimate(fs: &[&RatFunc], n: usize) -> f64 {
    fs.iter()
        .filter(|f| !f.is_polynomial())
        .map(|f| {
            let rho = f.min_pole_modulus();
            let m = f.max_pole_order();
            rho.powf(-(n as f64)) * (n as f64).powi(m as i32 - 1)
        })
        .fold(0.0, f64::max)
}

/// Number of singular values below `sigma_svd`, with a gap check.
fn count_small(m: &DMatrix<C64>, tol: &ToleranceConfig) -> Result<usize> {
    let sv = m.clone().singular_values();
    let sigma = tol.sigma_svd;
    let small = sv.iter().filter(|s| **s < sigma).count();
    let max_small = sv.iter().copied().filter(|s| *s < sigma).fold(0.0, f64::max);
    let min_large = sv.iter().copied().filter(|s| *s >= sigma).fold(f64::INFINITY, f64::min);
    if max_small >= sigma || min_large <= 10.0 * sigma {
        return Err(Error::Indeterminate);
    }
    Ok(small)
}

/// Kernel dimension of `(1 - w U_r)^k` (forward) or `(U_r^* - w)^k`
/// (adjoint) from singular values of finite sections.
///
/// Forward points in the boundary band are handled by exact Jordan chains.
/// The adjoint uses an `(n + k + pad) x n` compression, since a square
/// section of the forward shift minus `w` is nearly singular.
pub fn kernel_dim(
    ctx: &PhiContext,
    r: &RatFunc,
    w: C64,
    k: usize,
    side: Side,
    n: usize,
) -> Result<usize> {
    check_dim(n)?;
    let tol = ctx.tol();
    r.validate_in_ratd(tol)?;
    if k == 0 {
        return Ok(0);
    }
    if side == Side::Forward && w.norm() >= 1.0 - tol.delta_boundary {
        return match jordan_chain(ctx, r, w, k, side) {
            Ok(chain) => Ok(chain.len()),
            Err(Error::ChainBreaks(i)) => Ok(i - 1),
            Err(e) => Err(e),
        };
    }
    if side == Side::Adjoint && w.norm() >= 1.0 {
        return Err(Error::InvalidArgument("adjoint kernels need |w| < 1".into()));
    }
    let tail = tail_estimate(&[r, ctx.phi()], n);
    let limit = tol.sigma_svd / 10.0;
    if tail > limit {
        return Err(Error::TruncationUnsound { tail, limit });
    }
    let m = match side {
        Side::Forward => {
            let a = DMatrix::<C64>::identity(n, n) - truncate_u_r(ctx, r, n)?.matrix * w;
            (0..k - 1).fold(a.clone(), |acc, _| &acc * &a)
        }
        Side::Adjoint => {
            let l = n + k + ADJOINT_PAD;
            let phi_t = ctx.phi().taylor_coeffs(l);
            let r_t = r.taylor_coeffs(l);
            // U_r^* = S + phi (x) r
            let s = shift_matrix(l).adjoint();
            let a = s + rank_one(&phi_t, &r_t) - DMatrix::<C64>::identity(l, l) * w;
            let p = (0..k - 1).fold(a.clone(), |acc, _| &acc * &a);
            p.columns(0, n).into_owned()
        }
    };
    count_small(&m, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cpoly::Poly;
    use crate::gen::InstanceGen;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn ctx(phi: RatFunc) -> PhiContext {
        PhiContext::new(phi, &ToleranceConfig::default()).unwrap()
    }

    fn max_abs(m: &DMatrix<C64>) -> f64 {
        m.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn u_r_examples() {
        let k = ctx(RatFunc::one());
        let u = truncate_u_r(&k, &RatFunc::zero(), 6).unwrap();
        assert_eq!(u.matrix, shift_matrix(6));
        let u = truncate_u_r(&k, &RatFunc::real(2.0), 4).unwrap();
        let mut want = shift_matrix(4);
        want[(0, 0)] = c(2.0, 0.0);
        assert_eq!(u.matrix, want);
        let k = ctx(RatFunc::z());
        let u = truncate_u_r(&k, &RatFunc::one(), 4).unwrap();
        let mut want = shift_matrix(4);
        want[(0, 1)] += ONE;
        assert_eq!(u.matrix, want);
        assert!(truncate_u_r(&k, &RatFunc::one(), 3).is_err());
    }

    #[test]
    fn k_examples() {
        let k = ctx(RatFunc::one());
        let fwd = DMatrix::from_fn(8, 8, |i, j| if i == j + 1 { ONE } else { ZERO });
        assert!(max_abs(&(k_matrix_via_times(&k, &RatFunc::one(), 8).unwrap().matrix - &fwd)) < 1e-15);
        assert!(max_abs(&(k_matrix_via_toeplitz(&k, &RatFunc::one(), 8).unwrap().matrix - &fwd)) < 1e-15);
        let k = ctx(RatFunc::z());
        let mut want = DMatrix::zeros(8, 8);
        want[(0, 0)] = -ONE;
        assert!(max_abs(&(k_matrix_via_times(&k, &RatFunc::one(), 8).unwrap().matrix - &want)) < 1e-15);
        assert!(max_abs(&(k_matrix_via_toeplitz(&k, &RatFunc::one(), 8).unwrap().matrix - &want)) < 1e-15);
        assert_eq!(max_abs(&k_matrix_via_times(&k, &RatFunc::zero(), 8).unwrap().matrix), 0.0);
        assert_eq!(max_abs(&k_matrix_via_toeplitz(&k, &RatFunc::zero(), 8).unwrap().matrix), 0.0);
    }

    #[test]
    fn k_one_matches_quadrature() {
        // phi = z, r = 1: K_1 f = -f(0)
        let k = ctx(RatFunc::z());
        let f = RatFunc::pole_term(c(0.5, 0.2), c(1.5, -0.5), 1);
        let got = k.times(&RatFunc::one(), &f);
        let q = hardy::quadrature::pairing(|z| f.eval(z), |_| ONE);
        assert!(got.residual(&RatFunc::constant(-q), 32) < 1e-12);
    }

    #[test]
    fn intertwine_examples() {
        let k = ctx(RatFunc::one());
        assert_eq!(intertwine_residual(&k, &RatFunc::zero(), &RatFunc::zero(), 16, 8).unwrap(), 0.0);
        let res = intertwine_residual(&k, &RatFunc::real(0.5), &RatFunc::zero(), 64, 32).unwrap();
        assert!(res < 1e-10, "{res:e}");
        let k = ctx(RatFunc::z());
        let mut g = InstanceGen::new(3);
        let (r, s) = (g.ratd(), g.ratd());
        let res = intertwine_residual(&k, &r, &s, 64, 24).unwrap();
        assert!(res < 1e-8, "{res:e}");
    }

    #[test]
    fn chain_examples() {
        let k = ctx(RatFunc::one());
        assert!(jordan_chain(&k, &RatFunc::real(2.0), c(0.5, 0.0), 0, Side::Forward).unwrap().is_empty());
        let ch = jordan_chain(&k, &RatFunc::real(2.0), c(0.5, 0.0), 1, Side::Forward).unwrap();
        assert!(ch[0].residual(&RatFunc::real(2.0), 8) < 1e-14);
        let ch = jordan_chain(&k, &RatFunc::one(), ONE, 1, Side::Forward).unwrap();
        assert!(ch[0].residual(&RatFunc::one(), 8) < 1e-14);
        assert_eq!(
            jordan_chain(&k, &RatFunc::real(2.0), c(0.5, 0.0), 2, Side::Forward).unwrap_err(),
            Error::ChainBreaks(2)
        );
        assert_eq!(
            jordan_chain(&k, &RatFunc::real(0.5), c(0.3, 0.0), 1, Side::Forward).unwrap_err(),
            Error::ChainBreaks(1)
        );
        let k = ctx(RatFunc::z());
        let ch = jordan_chain(&k, &RatFunc::real(-1.0), ZERO, 1, Side::Adjoint).unwrap();
        assert!(ch[0].residual(&RatFunc::one(), 8) < 1e-14);
    }

    #[test]
    fn kernel_dim_examples() {
        let k = ctx(RatFunc::one());
        assert_eq!(kernel_dim(&k, &RatFunc::real(2.0), c(0.5, 0.0), 1, Side::Forward, 64).unwrap(), 1);
        assert_eq!(kernel_dim(&k, &RatFunc::real(0.5), c(0.3, 0.0), 2, Side::Forward, 64).unwrap(), 0);
        assert_eq!(kernel_dim(&k, &RatFunc::one(), ONE, 2, Side::Forward, 64).unwrap(), 1);
        let k = ctx(RatFunc::z());
        assert_eq!(kernel_dim(&k, &RatFunc::real(-1.0), ZERO, 1, Side::Adjoint, 64).unwrap(), 1);
        assert_eq!(kernel_dim_formula(&k, &RatFunc::real(-1.0), ZERO, 1, Side::Adjoint).unwrap(), 1);
        assert_eq!(kernel_dim(&k, &RatFunc::zero(), ZERO, 1, Side::Adjoint, 64).unwrap(), 0);
    }

    #[test]
    fn truncation_soundness() {
        let k = ctx(RatFunc::one());
        let r = RatFunc::pole_term(ONE, c(1.05, 0.0), 2);
        assert!(matches!(
            kernel_dim(&k, &r, c(0.2, 0.0), 1, Side::Forward, 32),
            Err(Error::TruncationUnsound { .. })
        ));
    }

    #[test]
    fn matrix_exports() {
        let k = ctx(RatFunc::z());
        let u = truncate_u_r(&k, &RatFunc::poly(Poly::from_real(&[1.0, 0.5])), 4).unwrap();
        let mut buf = Vec::new();
        u.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("# n=4 window=4"));
        assert_eq!(lines.next(), Some("re,im,re,im,re,im,re,im"));
        assert_eq!(lines.count(), 4);
        let js = u.to_json();
        assert_eq!(js["n"], 4);
        assert_eq!(js["entries"][0][1][0], 2.0);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        const N: usize = 64;
        const W: usize = 24;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(12))]

            #[test]
            fn operator_identities(seed in any::<u64>()) {
                let mut g = InstanceGen::new(seed);
                let k = ctx(g.phi());
                let (r, s) = (g.ratd(), g.ratd());
                let u = shift_matrix(N);
                let kr = k_matrix_via_times(&k, &r, N).unwrap().matrix;
                let comm = &u * &kr - &kr * &u - rank_one(&r.taylor_coeffs(N), &k.phi().taylor_coeffs(N));
                prop_assert!(TruncatedOperator::window_norm(&comm, W) < 1e-10);
                let phi = nalgebra::DVector::from_vec(k.phi().taylor_coeffs(N));
                let ann = kr.adjoint() * phi;
                prop_assert!(ann.rows(0, W).norm() < 1e-8);
                let ks = k_matrix_via_times(&k, &s, N).unwrap().matrix;
                let krs = k_matrix_via_times(&k, &k.times(&r, &s), N).unwrap().matrix;
                prop_assert!(TruncatedOperator::window_norm(&(&kr * &ks - krs), W) < 1e-8);
                let kt = k_matrix_via_toeplitz(&k, &r, N).unwrap().matrix;
                prop_assert!(TruncatedOperator::window_norm(&(kt - &kr), W) < 1e-8);
                prop_assert!(intertwine_residual(&k, &r, &s, N, W).unwrap() < 1e-8);
            }

            #[test]
            fn kernel_dim_matches_formula(seed in any::<u64>()) {
                let mut g = InstanceGen::new(seed);
                let k = ctx(g.phi());
                let r = g.ratd();
                let w = g.disc(0.9);
                for side in [Side::Forward, Side::Adjoint] {
                    for kk in 1..=2 {
                        let dim = kernel_dim(&k, &r, w, kk, side, 96).unwrap();
                        prop_assert_eq!(dim, kernel_dim_formula(&k, &r, w, kk, side).unwrap());
                    }
                }
            }
        }
    }
}
