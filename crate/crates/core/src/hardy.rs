//! Hardy-space operations on rational data: the H^2 pairing, the
//! co-analytic Toeplitz action `T_conj(phi)`, the functions `Gamma_+` and
//! `Gamma_-` as rational functions of `w`, and zero orders.

use serde::{Deserialize, Serialize};

use crate::cpoly::{factorial, Poly, Region, ZeroDatum, C64, ONE, ZERO};
use crate::error::{Error, Result};
use crate::ratfun::{HTerm, RatFunc};
use crate::tol::ToleranceConfig;

/// A symbol `phi` in Rat(D) together with its scaled-kernel expansion.
#[derive(Debug, Clone)]
pub struct Symbol {
    phi: RatFunc,
    hterms: Vec<HTerm>,
}

impl Symbol {
    pub fn new(phi: RatFunc, tol: &ToleranceConfig) -> Result<Self> {
        let hterms = phi.hbasis(tol)?;
        Ok(Self { phi, hterms })
    }

    pub fn phi(&self) -> &RatFunc {
        &self.phi
    }
}

/// Sum of `coeff * (num_k / den)` over numerators sharing `den`, with the
/// cancellation ratio needed by [`RatFunc::reduce`].
struct CommonDen {
    acc: Poly,
    size: f64,
}

impl CommonDen {
    fn new() -> Self {
        Self {
            acc: Poly::zero(),
            size: 0.0,
        }
    }

    fn push(&mut self, c: C64, p: &Poly) {
        let term = p.scale(c);
        self.size = self.size.max(term.max_abs());
        self.acc = self.acc.add_cancelling(&term);
    }

    fn finish(self, den_of: &RatFunc) -> RatFunc {
        let amp = self.size / self.acc.max_abs().max(f64::MIN_POSITIVE);
        RatFunc::reduce(self.acc, den_of.poles().to_vec(), amp.max(1.0))
    }
}

/// Numerators of the divided differences `(F - T_n(F; b)) / (z - b)^(n+1)`
/// over the denominator of `F`, for `n < count`. `num` is the numerator of
/// `F` and `taylor` its Taylor coefficients at `b`.
fn divided_differences(num: &Poly, den: &Poly, b: C64, taylor: &[C64]) -> Vec<Poly> {
    let mut out = Vec::with_capacity(taylor.len());
    let mut q = num.clone();
    for &t in taylor {
        let diff = q.add_cancelling(&den.scale(-t));
        q = diff.deflate(b).0;
        out.push(q.clone());
    }
    out
}

/// `<f, g>` in H^2, conjugate-linear in `g`.
pub fn inner_product(f: &RatFunc, g: &RatFunc, tol: &ToleranceConfig) -> Result<C64> {
    f.validate_in_ratd(tol)?;
    let mut acc = ZERO;
    for term in g.hbasis(tol)? {
        let t = f.taylor_at(term.node, term.coeffs.len());
        acc += term
            .coeffs
            .iter()
            .zip(&t)
            .map(|(c, v)| c.conj() * v)
            .sum::<C64>();
    }
    Ok(acc)
}

/// `T_conj(phi) r = P_+(conj(phi) r)`.
///
/// For `phi = h_b^(n)` one has `conj(phi) = z / (z - b)^(n+1)` on the
/// circle, so `T_conj(phi) r` is the divided difference of `G = z r` of
/// order `n + 1` at `b`. The result shares the denominator of `r`.
pub fn toeplitz_conj_apply(sym: &Symbol, r: &RatFunc) -> RatFunc {
    if r.is_zero() {
        return RatFunc::zero();
    }
    let g = r.mul_z();
    let den = g.den();
    let mut sum = CommonDen::new();
    for term in &sym.hterms {
        let taylor = g.taylor_at(term.node, term.coeffs.len());
        let diffs = divided_differences(g.num(), &den, term.node, &taylor);
        for (c, q) in term.coeffs.iter().zip(&diffs) {
            if *c != ZERO {
                sum.push(c.conj(), q);
            }
        }
    }
    sum.finish(&g)
}

/// `T_conj(phi) r` computed blockwise on the kernel expansion of `r`:
/// `T_conj(phi) h_a^(n) = sum_j conj(phi_j(a)) h_a^(n-j)` with `phi_j` the
/// Taylor coefficients of `phi` at `a`. Loses accuracy when the expansion of
/// `r` cancels (high-degree numerators); kept as an independent check.
pub fn toeplitz_conj_apply_blockwise(
    sym: &Symbol,
    r: &RatFunc,
    tol: &ToleranceConfig,
) -> Result<RatFunc> {
    let terms = r
        .hbasis(tol)?
        .into_iter()
        .map(|t| {
            let m = t.coeffs.len();
            let phi = sym.phi.taylor_at(t.node, m);
            let coeffs = (0..m)
                .map(|k| (k..m).map(|n| t.coeffs[n] * phi[n - k].conj()).sum())
                .collect();
            HTerm {
                node: t.node,
                coeffs,
            }
        })
        .collect::<Vec<_>>();
    Ok(RatFunc::from_hbasis(&terms))
}

/// `gamma_+(r) = z T_conj(phi) r`, so that `Gamma_+(w; r)` is its value at `w`.
pub fn gamma_plus(sym: &Symbol, r: &RatFunc) -> RatFunc {
    toeplitz_conj_apply(sym, r).mul_z()
}

/// `Gamma_-(w; r) = <phi / (w - z), r>` as a rational function of `w`.
///
/// With `r = sum c_{a,n} h_a^(n)` this is
/// `-sum conj(c_{a,n}) (phi(w) - T_n(phi; a)(w)) / (w - a)^(n+1)`,
/// which shares the denominator of `phi`. Conjugate-linear in `r`.
pub fn gamma_minus_fn(sym: &Symbol, r: &RatFunc, tol: &ToleranceConfig) -> Result<RatFunc> {
    let den = sym.phi.den();
    let mut sum = CommonDen::new();
    for term in r.hbasis(tol)? {
        let taylor = sym.phi.taylor_at(term.node, term.coeffs.len());
        let diffs = divided_differences(sym.phi.num(), &den, term.node, &taylor);
        for (c, q) in term.coeffs.iter().zip(&diffs) {
            if *c != ZERO {
                sum.push(-c.conj(), q);
            }
        }
    }
    Ok(sum.finish(&sym.phi))
}

/// Zero order of `f` at a point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrdReport {
    pub point: C64,
    pub ord: usize,
    /// `f(w), f'(w), ...` up to the first nonvanishing one.
    pub derivative_values: Vec<C64>,
}

/// Order of vanishing of `f` at `w`, capped: returns `cap + 1` when the
/// first `cap + 1` Taylor coefficients all vanish. A coefficient vanishes
/// when its modulus is at most `tau_ord` times the largest of them (or 1).
pub fn ord_at(f: &RatFunc, w: C64, cap: usize, tol: &ToleranceConfig) -> Result<OrdReport> {
    if let Some(p) = f
        .poles()
        .iter()
        .find(|p| (p.at - w).norm() <= tol.delta_boundary)
    {
        return Err(Error::PoleAt(p.at));
    }
    let taylor = f.taylor_at(w, cap + 1);
    let scale = taylor.iter().map(|c| c.norm()).fold(1.0, f64::max);
    let ord = taylor
        .iter()
        .position(|c| c.norm() > tol.tau_ord * scale)
        .unwrap_or(cap + 1);
    let derivative_values = taylor
        .iter()
        .take(ord + 1)
        .enumerate()
        .map(|(j, c)| c * factorial(j))
        .collect();
    Ok(OrdReport {
        point: w,
        ord,
        derivative_values,
    })
}

/// Zeros of `f` in the closed disc, boundary-band zeros included and
/// flagged by their region.
pub fn zeros_in_closed_disc(f: &RatFunc, tol: &ToleranceConfig) -> Result<Vec<ZeroDatum>> {
    if f.is_zero() {
        return Err(Error::IdenticallyZero);
    }
    Ok(f.num()
        .roots(tol)
        .into_iter()
        .filter(|z| z.region != Region::Exterior)
        .collect())
}

/// `1 - f`
pub fn one_minus(f: &RatFunc) -> RatFunc {
    &RatFunc::constant(ONE) - f
}

/// Trapezoid-rule evaluation of the pairings on the unit circle. Slow and
/// only accurate away from the boundary; used as an independent check of the
/// closed forms.
pub mod quadrature {
    use super::*;

    pub const NODES: usize = 2048;

    fn nodes() -> impl Iterator<Item = C64> {
        (0..NODES).map(|j| C64::from_polar(1.0, std::f64::consts::TAU * j as f64 / NODES as f64))
    }

    /// Trapezoid rule for `<f, g>` given pointwise evaluators.
    pub fn pairing(f: impl Fn(C64) -> C64, g: impl Fn(C64) -> C64) -> C64 {
        nodes().map(|z| f(z) * g(z).conj()).sum::<C64>() / NODES as f64
    }

    /// `<phi / (w - z), r>`
    pub fn gamma_minus(phi: &RatFunc, r: &RatFunc, w: C64) -> C64 {
        pairing(|z| phi.eval(z) / (w - z), |z| r.eval(z))
    }

    /// `w <r, phi k_w>`
    pub fn gamma_plus(phi: &RatFunc, r: &RatFunc, w: C64) -> C64 {
        w * pairing(|z| r.eval(z), |z| phi.eval(z) / (ONE - w.conj() * z))
    }

    /// Taylor coefficients of `P_+(f)` for `f` given on the circle.
    pub fn projected_coeffs(f: impl Fn(C64) -> C64, n: usize) -> Vec<C64> {
        (0..n)
            .map(|k| nodes().map(|z| f(z) * z.powu(k as u32).conj()).sum::<C64>() / NODES as f64)
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratfun::{KBasisExpansion, KTerm, Pole};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn r(x: f64) -> C64 {
        c(x, 0.0)
    }

    fn tol() -> ToleranceConfig {
        ToleranceConfig::default()
    }

    fn sym(phi: RatFunc) -> Symbol {
        Symbol::new(phi, &tol()).unwrap()
    }

    fn kernel(w: C64, n: usize) -> RatFunc {
        let mut coeffs = vec![ZERO; n + 1];
        coeffs[n] = ONE;
        RatFunc::from_kbasis(&KBasisExpansion {
            terms: vec![KTerm { node: w, coeffs }],
        })
    }

    fn sample_r() -> RatFunc {
        &(&RatFunc::pole_term(c(0.7, -0.2), c(1.4, 0.6), 2) + &RatFunc::pole_term(c(-0.3, 0.5), c(-1.8, -0.3), 1))
            + &RatFunc::poly(Poly::new(vec![c(0.2, 0.1), c(-0.5, 0.0), c(0.0, 0.3)]))
    }

    fn sample_phi() -> RatFunc {
        // (z - 0.3)^2 (z + 0.2i) (z - 2) / (z - 1.5i)
        let num = Poly::from_roots(&[r(0.3), r(0.3), c(0.0, -0.2), r(2.0)]);
        RatFunc::from_parts(num, [Pole { at: c(0.0, 1.5), mult: 1 }])
    }

    #[test]
    fn inner_product_examples() {
        let t = tol();
        assert!((inner_product(&RatFunc::one(), &RatFunc::one(), &t).unwrap() - ONE).norm() < 1e-15);
        assert_eq!(inner_product(&RatFunc::z(), &RatFunc::one(), &t).unwrap(), ZERO);
        let k = kernel(r(0.5), 0);
        let v = inner_product(&k, &k, &t).unwrap();
        assert!((v - r(4.0 / 3.0)).norm() < 1e-14);
        // truncated coefficient sum oracle
        let a = k.taylor_coeffs(64);
        let s: C64 = a.iter().map(|x| x * x.conj()).sum();
        assert!((v - s).norm() < 1e-14);
    }

    #[test]
    fn reproducing_property() {
        let f = sample_r();
        for (w, n) in [(c(0.2, -0.3), 0), (c(-0.5, 0.1), 1), (c(0.1, 0.6), 2), (r(0.0), 3)] {
            let v = inner_product(&f, &kernel(w, n), &tol()).unwrap();
            let want = f.derivatives_at(w, n + 1)[n];
            assert!((v - want).norm() < 1e-9 * (1.0 + want.norm()));
        }
    }

    #[test]
    fn toeplitz_examples() {
        let f = sample_r();
        let id = toeplitz_conj_apply(&sym(RatFunc::one()), &f);
        assert!(id.residual(&f, 48) < 1e-14);

        let a = c(0.4, -0.3);
        let k = kernel(a, 0);
        let got = toeplitz_conj_apply(&sym(RatFunc::z()), &k);
        assert!(got.residual(&k.scale(a.conj()), 48) < 1e-14);

        let got = toeplitz_conj_apply(&sym(RatFunc::z()), &RatFunc::monomial(2));
        assert!(got.residual(&RatFunc::z(), 8) < 1e-15);
    }

    #[test]
    fn toeplitz_matches_quadrature_and_blockwise() {
        let phi = sample_phi();
        let f = sample_r();
        let s = sym(phi.clone());
        let got = toeplitz_conj_apply(&s, &f);
        let want = quadrature::projected_coeffs(|z| phi.eval(z).conj() * f.eval(z), 24);
        for (x, y) in got.taylor_coeffs(24).iter().zip(&want) {
            assert!((x - y).norm() < 1e-10, "{x} vs {y}");
        }
        let block = toeplitz_conj_apply_blockwise(&s, &f, &tol()).unwrap();
        assert!(block.residual(&got, 48) < 1e-10);
        assert!(got.is_in_ratd(&tol()));
    }

    #[test]
    fn toeplitz_high_degree_input() {
        // z^40 / (z - 3): the kernel expansion of r cancels badly here
        let f = RatFunc::from_parts(Poly::monomial(40, ONE), [Pole { at: r(3.0), mult: 1 }]);
        let phi = sample_phi();
        let got = toeplitz_conj_apply(&sym(phi.clone()), &f);
        let want = quadrature::projected_coeffs(|z| phi.eval(z).conj() * f.eval(z), 48);
        for (x, y) in got.taylor_coeffs(48).iter().zip(&want) {
            assert!((x - y).norm() < 1e-10, "{x} vs {y}");
        }
    }

    #[test]
    fn gamma_plus_examples() {
        let cst = c(0.3, -1.2);
        let g = gamma_plus(&sym(RatFunc::one()), &RatFunc::constant(cst));
        assert!(g.residual(&RatFunc::z().scale(cst), 8) < 1e-15);
        assert!(gamma_plus(&sym(RatFunc::z()), &RatFunc::one()).is_zero());
        let g = gamma_plus(&sym(RatFunc::z()), &RatFunc::z());
        assert!(g.residual(&RatFunc::z(), 8) < 1e-15);
    }

    #[test]
    fn gamma_plus_matches_quadrature() {
        let phi = sample_phi();
        let f = sample_r();
        let g = gamma_plus(&sym(phi.clone()), &f);
        assert_eq!(g.eval(ZERO), ZERO);
        for w in [c(0.1, 0.2), c(-0.6, 0.3), c(0.0, -0.8), r(0.45), c(0.6, 0.6)] {
            let q = quadrature::gamma_plus(&phi, &f, w);
            assert!((g.eval(w) - q).norm() < 1e-9, "{} vs {q}", g.eval(w));
        }
    }

    #[test]
    fn gamma_minus_examples() {
        let t = tol();
        let f = sample_r();
        assert!(gamma_minus_fn(&sym(RatFunc::one()), &f, &t).unwrap().taylor_norm(16) < 1e-14);
        let q = quadrature::gamma_minus(&RatFunc::one(), &f, r(0.3));
        assert!(q.norm() < 1e-12);

        let g = gamma_minus_fn(&sym(RatFunc::z()), &RatFunc::one(), &t).unwrap();
        assert!(g.residual(&RatFunc::real(-1.0), 8) < 1e-15);
        let q = quadrature::gamma_minus(&RatFunc::z(), &RatFunc::one(), r(0.3));
        assert!((q + ONE).norm() < 1e-12);

        let g = gamma_minus_fn(&sym(RatFunc::monomial(2)), &RatFunc::z(), &t).unwrap();
        assert!(g.residual(&RatFunc::real(-1.0), 8) < 1e-15);
    }

    #[test]
    fn gamma_minus_matches_quadrature() {
        let phi = sample_phi();
        let f = sample_r();
        let g = gamma_minus_fn(&sym(phi.clone()), &f, &tol()).unwrap();
        for w in [c(0.1, 0.2), c(-0.6, 0.3), c(0.0, -0.8), r(0.45)] {
            let q = quadrature::gamma_minus(&phi, &f, w);
            assert!((g.eval(w) - q).norm() < 1e-9, "{} vs {q}", g.eval(w));
        }
    }

    #[test]
    fn gamma_linearity() {
        let t = tol();
        let s = sym(sample_phi());
        let f = sample_r();
        let i = c(0.0, 1.0);
        let gp = gamma_plus(&s, &f.scale(i));
        assert!(gp.residual(&gamma_plus(&s, &f).scale(i), 48) < 1e-10);
        let gm = gamma_minus_fn(&s, &f.scale(i), &t).unwrap();
        let want = gamma_minus_fn(&s, &f, &t).unwrap().scale(-i);
        assert!(gm.residual(&want, 48) < 1e-10);
    }

    #[test]
    fn ord_examples() {
        let t = tol();
        let f = RatFunc::poly(Poly::from_real(&[1.0, -2.0]));
        assert_eq!(ord_at(&f, r(0.5), 3, &t).unwrap().ord, 1);
        assert_eq!(ord_at(&RatFunc::real(2.0), c(0.1, 0.4), 3, &t).unwrap().ord, 0);
        let sq = RatFunc::poly(Poly::from_roots(&[r(0.3), r(0.3)]));
        let rep = ord_at(&sq, r(0.3), 4, &t).unwrap();
        assert_eq!(rep.ord, 2);
        assert_eq!(rep.derivative_values.len(), 3);
        assert!((rep.derivative_values[2] - r(2.0)).norm() < 1e-14);
        assert_eq!(ord_at(&RatFunc::zero(), ZERO, 2, &t).unwrap().ord, 3);
        let pole = RatFunc::pole_term(ONE, r(2.0), 1);
        assert_eq!(ord_at(&pole, r(2.0), 2, &t), Err(Error::PoleAt(r(2.0))));
    }

    #[test]
    fn zeros_examples() {
        let t = tol();
        let z = zeros_in_closed_disc(&RatFunc::poly(Poly::from_real(&[1.0, -2.0])), &t).unwrap();
        assert_eq!(z.len(), 1);
        assert!((z[0].location - r(0.5)).norm() < 1e-15);
        assert_eq!((z[0].multiplicity, z[0].region), (1, Region::Interior));
        let z = zeros_in_closed_disc(&RatFunc::poly(Poly::from_real(&[1.0, -0.5])), &t).unwrap();
        assert!(z.is_empty());
        let z = zeros_in_closed_disc(&RatFunc::poly(Poly::from_real(&[1.0, -1.0])), &t).unwrap();
        assert_eq!(z[0].region, Region::Boundary);
        assert_eq!(zeros_in_closed_disc(&RatFunc::zero(), &t), Err(Error::IdenticallyZero));
    }
}
