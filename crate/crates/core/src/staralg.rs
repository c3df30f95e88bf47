//! The algebra `(Rat(D), x)` attached to a symbol `phi`: twisted product,
//! circle composition, local units at the zeros of `phi`, the structure
//! isomorphism, the circle group and the similarity decision.
//!
//! Local computations at a zero `a` of order `N` go through the map
//! `rho(y) = conj(Taylor_a(Gamma_-(.; y), N))`, which carries the local
//! ideal `S_a^N` onto `C[X]/(X^N)` as unital algebras with `rho(e_a) = 1`.

use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::cpoly::{factorial, series_inv, series_mul, Poly, Region, ZeroDatum, C64, ONE, ZERO};
use crate::error::{Error, Result};
use crate::hardy::{self, Symbol};
use crate::ratfun::{HTerm, Pole, RatFunc};
use crate::tol::ToleranceConfig;

/// Taylor terms compared when measuring coefficient residuals.
pub const RESIDUAL_TERMS: usize = 64;

/// `h_a^(n) = k_a^(n) / n!`
fn scaled_kernel(a: C64, n: usize) -> RatFunc {
    let mut coeffs = vec![ZERO; n + 1];
    coeffs[n] = ONE;
    RatFunc::from_hbasis(&[HTerm { node: a, coeffs }])
}

/// Unit vector `(1, 0, ..., 0)` of length `n`.
fn unit_vec(n: usize) -> Vec<C64> {
    let mut v = vec![ZERO; n];
    if n > 0 {
        v[0] = ONE;
    }
    v
}

fn solve(m: &DMatrix<C64>, rhs: &[C64]) -> Result<Vec<C64>> {
    m.clone()
        .lu()
        .solve(&DVector::from_column_slice(rhs))
        .map(|x| x.iter().copied().collect())
        .ok_or(Error::Singular)
}

/// Newton refinement of a zero of multiplicity `n` through the derivative
/// of order `n - 1`, where it is simple.
fn refine_multiple_root(p: &Poly, mut a: C64, n: usize) -> C64 {
    if n < 2 {
        return a;
    }
    let mut d = p.clone();
    for _ in 0..n - 1 {
        d = d.derivative();
    }
    let dd = d.derivative();
    for _ in 0..3 {
        let step = d.eval(a) / dd.eval(a);
        if !step.is_finite() {
            break;
        }
        let next = a - step;
        if d.eval(next).norm() >= d.eval(a).norm() {
            break;
        }
        a = next;
    }
    a
}

/// Local data at an interior zero `a` of `phi` of order `N`.
#[derive(Debug, Clone)]
pub struct LocalZero {
    pub a: C64,
    pub order: usize,
    /// `((z - a) / (1 - conj(a) z))^N`
    pub u: RatFunc,
    /// `phi / u`
    pub psi: RatFunc,
    pub alpha: RatFunc,
    pub beta: RatFunc,
    /// Unit of the local ideal `S_a^N`.
    pub e: RatFunc,
    /// Sign in `alpha psi - u beta = sigma`.
    pub sigma: f64,
    pub bezout_residual: f64,
    pub unit_residual: f64,
    /// Columns `rho(h_a^(n))`, `n < N`.
    rho: DMatrix<C64>,
    /// Columns `rho(e), rho(x), rho(x)^2, ...`.
    basis: DMatrix<C64>,
}

impl LocalZero {
    fn build(sym: &Symbol, a: C64, order: usize, tol: &ToleranceConfig) -> Result<Self> {
        let phi = sym.phi();
        let n = order;
        let (u, cofactor) = if a == ZERO {
            (RatFunc::monomial(n), Poly::one())
        } else {
            let c = (-a.conj()).powu(n as u32);
            let p = ONE / a.conj();
            let u = RatFunc::from_parts(
                Poly::linear(a).pow(n).scale(ONE / c),
                [Pole { at: p, mult: n }],
            );
            (u, Poly::linear(p).pow(n).scale(c))
        };
        let mut q = phi.num().clone();
        for _ in 0..n {
            q = q.deflate(a).0;
        }
        let psi = &RatFunc::from_parts(q, phi.poles().iter().copied()) * &RatFunc::poly(cofactor.clone());

        // alpha in span{h_a^(j)}: Taylor_a(alpha psi) = (1, 0, ..., 0) mod (z - a)^N
        let psi_t = psi.taylor_at(a, n);
        let kernels: Vec<RatFunc> = (0..n).map(|j| scaled_kernel(a, j)).collect();
        let mut m = DMatrix::<C64>::zeros(n, n);
        for (j, h) in kernels.iter().enumerate() {
            let col = series_mul(&h.taylor_at(a, n), &psi_t, n);
            m.set_column(j, &DVector::from_vec(col));
        }
        let coeffs = solve(&m, &unit_vec(n))?;
        let alpha = RatFunc::from_hbasis(&[HTerm { node: a, coeffs }]);

        // beta = (alpha psi - 1) / u
        let f = &(&alpha * &psi) - &RatFunc::one();
        let mut qb = f.num().clone();
        for _ in 0..n {
            qb = qb.deflate(a).0;
        }
        let beta = &RatFunc::from_parts(qb, f.poles().iter().copied()) * &RatFunc::poly(cofactor);
        let bezout = &(&alpha * &psi) - &(&u * &beta);
        let bezout_residual = bezout.residual(&RatFunc::one(), RESIDUAL_TERMS);
        if bezout_residual > tol.eps_bezout {
            return Err(Error::IllConditionedBezout {
                residual: bezout_residual,
            });
        }

        let e = (&alpha.mul_z().conj_reflect() * &u).project_plus(tol)?;

        // calibrate the sign so that e is the unit of S_a^N
        let unit_error = |e: &RatFunc| {
            kernels
                .iter()
                .map(|h| twisted_product(sym, e, h).residual(h, RESIDUAL_TERMS))
                .fold(0.0, f64::max)
        };
        let plus = unit_error(&e);
        let (sigma, unit_residual) = if plus < tol.tau_unit {
            (1.0, plus)
        } else {
            let minus = unit_error(&-&e);
            if minus >= tol.tau_unit {
                return Err(Error::UnitCalibration {
                    node: a,
                    residual: plus.min(minus),
                });
            }
            (-1.0, minus)
        };
        let s = C64::new(sigma, 0.0);

        // rho(h_a^(j))_k = -conj(phi_{k+j+1}(a))
        let phi_t = phi.taylor_at(a, 2 * n + 1);
        let rho = DMatrix::from_fn(n, n, |k, j| -phi_t[k + j + 1].conj());
        let mut basis = DMatrix::<C64>::zeros(n, n);
        basis[(0, 0)] = ONE;
        if n >= 2 {
            let x: Vec<C64> = rho.column(n - 2).iter().map(|c| c * factorial(n - 2)).collect();
            let mut pow = x.clone();
            for j in 1..n {
                basis.set_column(j, &DVector::from_column_slice(&pow));
                pow = series_mul(&pow, &x, n);
            }
        }
        Ok(Self {
            a,
            order: n,
            u,
            psi,
            alpha: alpha.scale(s),
            beta: beta.scale(s),
            e: e.scale(s),
            sigma,
            bezout_residual,
            unit_residual,
            rho,
            basis,
        })
    }

    /// The element of `S_a^N` with the given `rho` image.
    fn lift_rho(&self, rho: &[C64]) -> Result<RatFunc> {
        let coeffs = solve(&self.rho, rho)?;
        Ok(RatFunc::from_hbasis(&[HTerm {
            node: self.a,
            coeffs,
        }]))
    }

    fn coords_from_rho(&self, rho: &[C64]) -> Result<LocalNilElement> {
        Ok(LocalNilElement {
            node: self.a,
            coeffs: solve(&self.basis, rho)?,
        })
    }

    fn rho_from_coords(&self, el: &LocalNilElement) -> Vec<C64> {
        (&self.basis * DVector::from_column_slice(&el.coeffs))
            .iter()
            .copied()
            .collect()
    }

    /// The generator `x = k_a^(N-2)` of the nilpotent part (`N >= 2`).
    pub fn nilpotent_generator(&self) -> Option<RatFunc> {
        (self.order >= 2).then(|| scaled_kernel(self.a, self.order - 2).scale(C64::new(factorial(self.order - 2), 0.0)))
    }
}

/// `r x s = z r T(s) + z s T(r) - T(z r s)` with `T = T_conj(phi)`.
fn twisted_product(sym: &Symbol, r: &RatFunc, s: &RatFunc) -> RatFunc {
    if r.is_zero() || s.is_zero() {
        return RatFunc::zero();
    }
    let tr = hardy::toeplitz_conj_apply(sym, r);
    let ts = hardy::toeplitz_conj_apply(sym, s);
    let trs = hardy::toeplitz_conj_apply(sym, &(r * s).mul_z());
    &(&(r * &ts).mul_z() + &(s * &tr).mul_z()) - &trs
}

/// Element `lambda e_a + sum c_j x^j` of the unitized local algebra,
/// stored as `(lambda, c_1, ..., c_{N-1})`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalNilElement {
    pub node: C64,
    pub coeffs: Vec<C64>,
}

impl LocalNilElement {
    pub fn unit(node: C64, order: usize) -> Self {
        Self {
            node,
            coeffs: unit_vec(order),
        }
    }

    pub fn zero(node: C64, order: usize) -> Self {
        Self {
            node,
            coeffs: vec![ZERO; order],
        }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len()
    }

    pub fn lambda(&self) -> C64 {
        self.coeffs.first().copied().unwrap_or(ZERO)
    }

    /// Index of the first coefficient above `eps` times the largest (or 1);
    /// the order `N` for the zero element.
    pub fn valuation(&self, eps: f64) -> usize {
        let scale = self.coeffs.iter().map(|c| c.norm()).fold(1.0, f64::max);
        self.coeffs
            .iter()
            .position(|c| c.norm() > eps * scale)
            .unwrap_or(self.order())
    }

    pub fn is_unit(&self, eps: f64) -> bool {
        self.lambda().norm() > eps
    }

    /// Inverse by truncated power series; `None` when `lambda = 0`.
    pub fn inverse(&self) -> Option<Self> {
        (self.lambda() != ZERO).then(|| Self {
            node: self.node,
            coeffs: series_inv(&self.coeffs, self.order()),
        })
    }

    pub fn scale(&self, c: C64) -> Self {
        Self {
            node: self.node,
            coeffs: self.coeffs.iter().map(|x| x * c).collect(),
        }
    }

    fn zip_with(&self, other: &Self, f: impl Fn(C64, C64) -> C64) -> Self {
        assert_eq!(self.order(), other.order(), "local elements of different orders");
        Self {
            node: self.node,
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| f(*a, *b))
                .collect(),
        }
    }
}

impl Add for &LocalNilElement {
    type Output = LocalNilElement;
    fn add(self, rhs: &LocalNilElement) -> LocalNilElement {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl Sub for &LocalNilElement {
    type Output = LocalNilElement;
    fn sub(self, rhs: &LocalNilElement) -> LocalNilElement {
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl Neg for &LocalNilElement {
    type Output = LocalNilElement;
    fn neg(self) -> LocalNilElement {
        self.scale(-ONE)
    }
}

impl Mul for &LocalNilElement {
    type Output = LocalNilElement;
    fn mul(self, rhs: &LocalNilElement) -> LocalNilElement {
        assert_eq!(self.order(), rhs.order(), "local elements of different orders");
        LocalNilElement {
            node: self.node,
            coeffs: series_mul(&self.coeffs, &rhs.coeffs, self.order()),
        }
    }
}

/// Coordinates of an element under the isomorphism `(gamma_-, gamma_+)`.
#[derive(Debug, Clone, Serialize)]
pub struct StructureVector {
    /// One entry per interior zero of `phi`, in context order.
    pub locals: Vec<LocalNilElement>,
    /// `gamma_+(r)`, an element of `z Rat(D)`.
    pub symbol: RatFunc,
}

/// Why an element fails to be circle invertible.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Obstruction {
    /// `1 - Gamma_+(.; t)` vanishes in the closed disc (boundary-band zeros
    /// carry `Region::Boundary`).
    SymbolZero { zero: ZeroDatum },
    /// `Gamma_-(a; t)` equals 1 at a zero `a` of `phi`.
    LocalNonUnit { node: C64, gamma_minus: C64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Invertibility {
    pub invertible: bool,
    pub obstructions: Vec<Obstruction>,
}

impl Invertibility {
    /// Every obstruction is a zero inside the boundary band.
    pub fn is_boundary_ambiguous(&self) -> bool {
        !self.obstructions.is_empty()
            && self.obstructions.iter().all(|o| {
                matches!(o, Obstruction::SymbolZero { zero } if zero.region == Region::Boundary)
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Yes,
    No,
    BoundaryAmbiguous,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MatchStatus {
    Matched,
    /// Unmatched zero, or matched with a different multiplicity, inside the disc.
    Mismatch,
    /// As `Mismatch` but involving a boundary-band zero.
    Ambiguous,
}

/// One row of the condition (a) table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZeroPair {
    pub r: Option<ZeroDatum>,
    pub s: Option<ZeroDatum>,
    pub status: MatchStatus,
}

/// One row of the condition (b) table: `min(N, ord_r)` against `min(N, ord_s)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrdTriple {
    pub node: C64,
    pub order: usize,
    pub ord_r: usize,
    pub ord_s: usize,
}

impl OrdTriple {
    pub fn holds(&self) -> bool {
        self.ord_r == self.ord_s
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SimilarityReport {
    pub verdict: Verdict,
    pub cond_a: Vec<ZeroPair>,
    pub cond_b: Vec<OrdTriple>,
    pub witness: Option<RatFunc>,
    pub residual: Option<f64>,
}

/// Conditions of the similarity test, before any witness is built.
struct Conditions {
    verdict: Verdict,
    cond_a: Vec<ZeroPair>,
    cond_b: Vec<OrdTriple>,
    one_minus_r: RatFunc,
    one_minus_s: RatFunc,
}

/// A nonzero symbol `phi` in Rat(D) with its local data.
#[derive(Debug, Clone)]
pub struct PhiContext {
    sym: Symbol,
    zeros: Vec<LocalZero>,
    tol: ToleranceConfig,
}

impl PhiContext {
    pub fn new(phi: RatFunc, tol: &ToleranceConfig) -> Result<Self> {
        tol.validate()?;
        if phi.is_zero() {
            return Err(Error::PhiZero);
        }
        phi.validate_in_ratd(tol)?;
        let sym = Symbol::new(phi, tol)?;
        let num = sym.phi().num().clone();
        let zeros = num
            .roots(tol)
            .into_iter()
            .filter(|z| z.region == Region::Interior)
            .map(|z| {
                let mut a = refine_multiple_root(&num, z.location, z.multiplicity);
                if a.norm() <= tol.eps_zero {
                    a = ZERO;
                }
                LocalZero::build(&sym, a, z.multiplicity, tol)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            sym,
            zeros,
            tol: *tol,
        })
    }

    pub fn phi(&self) -> &RatFunc {
        self.sym.phi()
    }

    pub fn symbol(&self) -> &Symbol {
        &self.sym
    }

    pub fn zeros(&self) -> &[LocalZero] {
        &self.zeros
    }

    pub fn tol(&self) -> &ToleranceConfig {
        &self.tol
    }

    fn zero_at(&self, a: C64) -> Result<&LocalZero> {
        self.zeros
            .iter()
            .find(|z| (z.a - a).norm() <= self.tol.cluster_radius(a.norm()))
            .ok_or(Error::UnknownNode(a))
    }

    /// `T_conj(phi) r`
    pub fn toeplitz(&self, r: &RatFunc) -> RatFunc {
        hardy::toeplitz_conj_apply(&self.sym, r)
    }

    /// `gamma_+(r) = z T_conj(phi) r`
    pub fn gamma_plus(&self, r: &RatFunc) -> RatFunc {
        hardy::gamma_plus(&self.sym, r)
    }

    /// `Gamma_-(.; r)` as a rational function.
    pub fn gamma_minus_fn(&self, r: &RatFunc) -> Result<RatFunc> {
        hardy::gamma_minus_fn(&self.sym, r, &self.tol)
    }

    pub fn times(&self, r: &RatFunc, s: &RatFunc) -> RatFunc {
        twisted_product(&self.sym, r, s)
    }

    /// `r o s = r + s - r x s`
    pub fn circle(&self, r: &RatFunc, s: &RatFunc) -> RatFunc {
        &(r + s) - &self.times(r, s)
    }

    fn rho(&self, zero: &LocalZero, r: &RatFunc) -> Result<Vec<C64>> {
        Ok(self
            .gamma_minus_fn(r)?
            .taylor_at(zero.a, zero.order)
            .into_iter()
            .map(|c| c.conj())
            .collect())
    }

    /// Coordinates of `e_a x r` in the basis `e_a, x, ..., x^(N-1)`.
    pub fn local_coords(&self, r: &RatFunc, a: C64) -> Result<LocalNilElement> {
        let zero = self.zero_at(a)?;
        zero.coords_from_rho(&self.rho(zero, r)?)
    }

    /// The element of `S_a^N` with the given local coordinates.
    pub fn local_lift(&self, el: &LocalNilElement) -> Result<RatFunc> {
        let zero = self.zero_at(el.node)?;
        if el.order() != zero.order {
            return Err(Error::InvalidArgument(format!(
                "local element of order {} at a zero of order {}",
                el.order(),
                zero.order
            )));
        }
        zero.lift_rho(&zero.rho_from_coords(el))
    }

    /// `gamma_-(r) = sum_a e_a x r`
    pub fn gamma_minus(&self, r: &RatFunc) -> Result<RatFunc> {
        self.zeros.iter().try_fold(RatFunc::zero(), |acc, z| {
            Ok(&acc + &z.lift_rho(&self.rho(z, r)?)?)
        })
    }

    pub fn to_structure(&self, r: &RatFunc) -> Result<StructureVector> {
        let locals = self
            .zeros
            .iter()
            .map(|z| z.coords_from_rho(&self.rho(z, r)?))
            .collect::<Result<_>>()?;
        Ok(StructureVector {
            locals,
            symbol: self.gamma_plus(r),
        })
    }

    pub fn from_structure(&self, v: &StructureVector) -> Result<RatFunc> {
        if v.locals.len() != self.zeros.len() {
            return Err(Error::InvalidArgument(format!(
                "{} local components for {} zeros of phi",
                v.locals.len(),
                self.zeros.len()
            )));
        }
        let rhos = self
            .zeros
            .iter()
            .zip(&v.locals)
            .map(|(z, el)| {
                if (z.a - el.node).norm() > self.tol.cluster_radius(z.a.norm()) {
                    return Err(Error::UnknownNode(el.node));
                }
                Ok(z.rho_from_coords(el))
            })
            .collect::<Result<Vec<_>>>()?;
        self.assemble(&v.symbol, &rhos)
    }

    /// Element with `gamma_+ = symbol` and local `rho` images `rhos`.
    fn assemble(&self, symbol: &RatFunc, rhos: &[Vec<C64>]) -> Result<RatFunc> {
        let t0 = self.lift_symbol(symbol)?;
        let mut out = &t0 - &self.gamma_minus(&t0)?;
        for (z, rho) in self.zeros.iter().zip(rhos) {
            out = &out + &z.lift_rho(rho)?;
        }
        Ok(out)
    }

    /// Some `t0` with `gamma_+(t0) = q`, for `q(0) = 0`.
    pub fn lift_symbol(&self, q: &RatFunc) -> Result<RatFunc> {
        let scale = q.taylor_norm(16).max(1.0);
        if q.eval(ZERO).norm() > self.tol.tau_unit * scale {
            return Err(Error::InvalidArgument("symbol must vanish at 0".into()));
        }
        let d = RatFunc::from_parts(q.num().deflate(ZERO).0, q.poles().iter().copied());
        let phi = self.phi();
        let phi_scale = phi.taylor_norm(16).max(1.0);
        let mut out = Vec::new();
        for term in d.hbasis(&self.tol)? {
            let (b, dk) = (term.node, &term.coeffs);
            let m = dk.len();
            let shift = self
                .zeros
                .iter()
                .find(|z| (z.a - b).norm() <= self.tol.cluster_radius(b.norm()))
                .map_or(0, |z| z.order);
            let len = m + shift;
            let phi_t = phi.taylor_at(b, len);
            let pivot = phi_t[shift];
            if pivot.norm() < self.tol.tau_unit * phi_scale {
                return Err(Error::SingularBlock {
                    node: b,
                    pivot: pivot.norm(),
                });
            }
            // d_k = sum_{n >= k + shift} t_n conj(phi_{n-k}(b))
            let mut t = vec![ZERO; len];
            for k in (0..m).rev() {
                let mut acc = dk[k];
                for n in k + shift + 1..len {
                    acc -= t[n] * phi_t[n - k].conj();
                }
                t[k + shift] = acc / pivot.conj();
            }
            out.push(HTerm { node: b, coeffs: t });
        }
        Ok(RatFunc::from_hbasis(&out))
    }

    pub fn is_circle_invertible(&self, t: &RatFunc) -> Result<Invertibility> {
        let f = hardy::one_minus(&self.gamma_plus(t));
        let mut obstructions: Vec<Obstruction> = hardy::zeros_in_closed_disc(&f, &self.tol)?
            .into_iter()
            .map(|zero| Obstruction::SymbolZero { zero })
            .collect();
        let gm = self.gamma_minus_fn(t)?;
        for z in &self.zeros {
            let v = gm.eval(z.a);
            if (v - ONE).norm() <= self.tol.tau_unit {
                obstructions.push(Obstruction::LocalNonUnit {
                    node: z.a,
                    gamma_minus: v,
                });
            }
        }
        Ok(Invertibility {
            invertible: obstructions.is_empty(),
            obstructions,
        })
    }

    /// The inverse of `t` in the circle group.
    pub fn circle_inverse(&self, t: &RatFunc) -> Result<RatFunc> {
        let inv = self.is_circle_invertible(t)?;
        if inv.is_boundary_ambiguous() {
            return Err(Error::BoundaryAmbiguous);
        }
        if !inv.invertible {
            return Err(Error::NotCircleInvertible);
        }
        // 1 - gamma_+(t') = 1 / (1 - gamma_+(t))
        let f = hardy::one_minus(&self.gamma_plus(t));
        let symbol = &RatFunc::one() - &f.recip(&self.tol)?;
        let rhos = self
            .zeros
            .iter()
            .map(|z| {
                let unit = unit_vec(z.order);
                let a: Vec<C64> = unit
                    .iter()
                    .zip(self.rho(z, t)?)
                    .map(|(u, x)| u - x)
                    .collect();
                let ainv = series_inv(&a, z.order);
                Ok(unit.iter().zip(ainv).map(|(u, x)| u - x).collect())
            })
            .collect::<Result<Vec<_>>>()?;
        self.assemble(&symbol, &rhos)
    }

    fn conditions(&self, r: &RatFunc, s: &RatFunc) -> Result<Conditions> {
        let tol = &self.tol;
        let one_minus_r = hardy::one_minus(&self.gamma_plus(r));
        let one_minus_s = hardy::one_minus(&self.gamma_plus(s));
        let loose = |f: &RatFunc| -> Vec<ZeroDatum> {
            f.num()
                .roots(tol)
                .into_iter()
                .filter(|z| z.location.norm() < 1.0 + tol.delta_match.max(tol.delta_boundary))
                .collect()
        };
        let zr = loose(&one_minus_r);
        let zs = loose(&one_minus_s);
        let cond_a = match_zeros(&zr, &zs, tol);

        let mut cond_b = Vec::with_capacity(self.zeros.len());
        if !self.zeros.is_empty() {
            let gr = hardy::one_minus(&self.gamma_minus_fn(r)?);
            let gs = hardy::one_minus(&self.gamma_minus_fn(s)?);
            for z in &self.zeros {
                cond_b.push(OrdTriple {
                    node: z.a,
                    order: z.order,
                    ord_r: hardy::ord_at(&gr, z.a, z.order, tol)?.ord.min(z.order),
                    ord_s: hardy::ord_at(&gs, z.a, z.order, tol)?.ord.min(z.order),
                });
            }
        }

        let verdict = if cond_a.iter().any(|p| p.status == MatchStatus::Mismatch)
            || cond_b.iter().any(|t| !t.holds())
        {
            Verdict::No
        } else if cond_a.iter().any(|p| p.status == MatchStatus::Ambiguous) {
            Verdict::BoundaryAmbiguous
        } else {
            Verdict::Yes
        };
        Ok(Conditions {
            verdict,
            cond_a,
            cond_b,
            one_minus_r,
            one_minus_s,
        })
    }

    fn witness(&self, r: &RatFunc, s: &RatFunc, cond: &Conditions) -> Result<RatFunc> {
        let mut nr = cond.one_minus_r.num().clone();
        let mut ns = cond.one_minus_s.num().clone();
        for pair in &cond.cond_a {
            if let (Some(a), Some(b)) = (pair.r, pair.s) {
                for _ in 0..a.multiplicity {
                    nr = nr.deflate(a.location).0;
                    ns = ns.deflate(b.location).0;
                }
            }
        }
        // h = (1 - gamma_+ s) / (1 - gamma_+ r) with the common zeros removed
        let denom = RatFunc::from_parts(nr, cond.one_minus_r.poles().iter().copied());
        let numer = RatFunc::from_parts(ns, cond.one_minus_s.poles().iter().copied());
        let h = &numer * &denom.recip(&self.tol)?;
        let h = h.scale(ONE / h.eval(ZERO));
        let symbol = &RatFunc::one() - &h;

        let rhos = self
            .zeros
            .iter()
            .zip(&cond.cond_b)
            .map(|(z, ords)| {
                let n = z.order;
                let unit = unit_vec(n);
                let m = ords.ord_r.min(n);
                if m == n {
                    return Ok(vec![ZERO; n]);
                }
                let a: Vec<C64> = unit.iter().zip(self.rho(z, r)?).map(|(u, x)| u - x).collect();
                let b: Vec<C64> = unit.iter().zip(self.rho(z, s)?).map(|(u, x)| u - x).collect();
                // (e - r_a)(e - t_a) = e - s_a after dividing out X^m
                let v = series_mul(&b[m..], &series_inv(&a[m..], n - m), n - m);
                let mut t = unit;
                for (tj, vj) in t.iter_mut().zip(v) {
                    *tj -= vj;
                }
                Ok(t)
            })
            .collect::<Result<Vec<_>>>()?;
        self.assemble(&symbol, &rhos)
    }

    /// A circle-invertible `t` with `r o t = s`, when `r` and `s` satisfy
    /// the similarity conditions.
    pub fn solve_circle(&self, r: &RatFunc, s: &RatFunc) -> Result<Option<RatFunc>> {
        let cond = self.conditions(r, s)?;
        match cond.verdict {
            Verdict::No => Ok(None),
            Verdict::BoundaryAmbiguous => Err(Error::BoundaryAmbiguous),
            Verdict::Yes => self.witness(r, s, &cond).map(Some),
        }
    }

    pub fn similar(&self, r: &RatFunc, s: &RatFunc) -> Result<SimilarityReport> {
        let cond = self.conditions(r, s)?;
        let (witness, residual) = if cond.verdict == Verdict::Yes {
            let t = self.witness(r, s, &cond)?;
            let residual = self.circle(r, &t).residual(s, RESIDUAL_TERMS);
            if residual >= self.tol.eps_witness {
                return Err(Error::WitnessFailed { residual });
            }
            (Some(t), Some(residual))
        } else {
            (None, None)
        };
        Ok(SimilarityReport {
            verdict: cond.verdict,
            cond_a: cond.cond_a,
            cond_b: cond.cond_b,
            witness,
            residual,
        })
    }
}

/// Nearest-neighbour pairing of two zero lists within `delta_match`.
fn match_zeros(zr: &[ZeroDatum], zs: &[ZeroDatum], tol: &ToleranceConfig) -> Vec<ZeroPair> {
    let mut candidates: Vec<(f64, usize, usize)> = zr
        .iter()
        .enumerate()
        .flat_map(|(i, a)| {
            zs.iter()
                .enumerate()
                .map(move |(j, b)| ((a.location - b.location).norm(), i, j))
        })
        .filter(|(d, _, _)| *d <= tol.delta_match)
        .collect();
    candidates.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut used_r = vec![false; zr.len()];
    let mut used_s = vec![false; zs.len()];
    let mut pairs = Vec::new();
    let status_of = |zs: &[&ZeroDatum]| {
        if zs.iter().any(|z| z.region == Region::Boundary) {
            MatchStatus::Ambiguous
        } else {
            MatchStatus::Mismatch
        }
    };
    for (_, i, j) in candidates {
        if used_r[i] || used_s[j] {
            continue;
        }
        used_r[i] = true;
        used_s[j] = true;
        let (a, b) = (zr[i], zs[j]);
        let status = if a.multiplicity == b.multiplicity {
            MatchStatus::Matched
        } else {
            status_of(&[&a, &b])
        };
        pairs.push(ZeroPair {
            r: Some(a),
            s: Some(b),
            status,
        });
    }
    let singles_r = zr.iter().zip(&used_r).filter(|(_, u)| !**u).map(|(z, _)| (Some(*z), None));
    let singles_s = zs.iter().zip(&used_s).filter(|(_, u)| !**u).map(|(z, _)| (None, Some(*z)));
    for (r, s) in singles_r.chain(singles_s) {
        let z: ZeroDatum = r.or(s).expect("one side present");
        if z.region == Region::Exterior {
            continue;
        }
        pairs.push(ZeroPair {
            r,
            s,
            status: status_of(&[&z]),
        });
    }
    pairs
}
