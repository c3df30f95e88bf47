//! Rational functions with poles off the closed unit disc.
//!
//! A [`RatFunc`] keeps its denominator in factored form: a numerator
//! polynomial over `prod (z - p)^m` for a list of distinct poles. The monic
//! denominator polynomial is derived on demand. Keeping the factorization
//! makes sums exact over the least common denominator and lets removable
//! poles be cancelled one factor at a time.
//!
//! The reproducing kernels are `k_w^(n) = n! z^n / (1 - conj(w) z)^(n+1)`.
//! Internally the scaled kernels `h_w^(n) = k_w^(n) / n!` are used, since
//! their coefficients stay bounded for large `n`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cpoly::{binomial, factorial, series_mul, Poly, C64, ONE, ZERO};
use crate::error::{Error, Result};
use crate::tol::ToleranceConfig;

/// Two poles closer than this (relative) are the same pole. This only
/// absorbs rounding; genuine clustering uses `ToleranceConfig`.
const SAME_POLE: f64 = 1e-12;
/// A numerator Taylor coefficient at a pole this small relative to its
/// rounding scale counts as an exact zero.
const CANCEL_REL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pole {
    pub at: C64,
    pub mult: usize,
}

#[derive(Clone, PartialEq)]
pub struct RatFunc {
    num: Poly,
    poles: Vec<Pole>,
}

impl fmt::Debug for RatFunc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RatFunc")
            .field("num", &self.num)
            .field("poles", &self.poles)
            .finish()
    }
}

fn same_pole(a: C64, b: C64) -> bool {
    (a - b).norm() <= SAME_POLE * a.norm().max(1.0)
}

/// `|c_i|` of a polynomial as a real-coefficient "noise" polynomial.
fn abs_poly(p: &Poly) -> Vec<f64> {
    p.coeffs().iter().map(|c| c.norm()).collect()
}

/// Taylor coefficients at `r >= 0` of a nonnegative polynomial.
fn abs_shift(coeffs: &[f64], r: f64) -> Vec<f64> {
    let mut c = coeffs.to_vec();
    let n = c.len();
    for i in 0..n {
        for j in (i..n.saturating_sub(1)).rev() {
            let next = c[j + 1];
            c[j] += r * next;
        }
    }
    c
}

impl RatFunc {
    pub fn zero() -> Self {
        Self::poly(Poly::zero())
    }

    pub fn one() -> Self {
        Self::constant(ONE)
    }

    pub fn constant(c: C64) -> Self {
        Self::poly(Poly::constant(c))
    }

    pub fn real(c: f64) -> Self {
        Self::constant(C64::new(c, 0.0))
    }

    pub fn poly(num: Poly) -> Self {
        Self {
            num,
            poles: Vec::new(),
        }
    }

    /// The identity function `z`.
    pub fn z() -> Self {
        Self::monomial(1)
    }

    /// `z^n`
    pub fn monomial(n: usize) -> Self {
        Self::poly(Poly::monomial(n, ONE))
    }

    /// `num / prod (z - p)^m`. Coinciding poles are merged; no cancellation
    /// is attempted.
    pub fn from_parts(num: Poly, poles: impl IntoIterator<Item = Pole>) -> Self {
        let mut merged: Vec<Pole> = Vec::new();
        for p in poles.into_iter().filter(|p| p.mult > 0) {
            match merged.iter_mut().find(|q| same_pole(q.at, p.at)) {
                Some(q) => q.mult += p.mult,
                None => merged.push(p),
            }
        }
        if num.is_zero() {
            merged.clear();
        }
        Self { num, poles: merged }
    }

    /// `c / (z - p)^m`
    pub fn pole_term(c: C64, p: C64, m: usize) -> Self {
        Self::from_parts(Poly::constant(c), [Pole { at: p, mult: m }])
    }

    /// Builds `num / den` by factoring `den` with clustered roots and
    /// cancelling numerator zeros that fall within the cluster radius of a
    /// pole.
    pub fn from_num_den(num: Poly, den: Poly, tol: &ToleranceConfig) -> Result<Self> {
        let den = den.normalized(tol);
        if den.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let num = num.normalized(tol).scale(ONE / den.leading());
        let poles = den
            .roots(tol)
            .into_iter()
            .map(|z| Pole {
                at: z.location,
                mult: z.multiplicity,
            })
            .collect::<Vec<_>>();
        Ok(Self::from_parts(num, poles).cancel(tol))
    }

    pub fn num(&self) -> &Poly {
        &self.num
    }

    pub fn poles(&self) -> &[Pole] {
        &self.poles
    }

    /// Monic denominator `prod (z - p)^m`.
    pub fn den(&self) -> Poly {
        self.poles
            .iter()
            .fold(Poly::one(), |acc, p| &acc * &Poly::linear(p.at).pow(p.mult))
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_polynomial(&self) -> bool {
        self.poles.is_empty()
    }

    /// Total pole order.
    pub fn den_degree(&self) -> usize {
        self.poles.iter().map(|p| p.mult).sum()
    }

    /// Smallest pole modulus, `+inf` for polynomials.
    pub fn min_pole_modulus(&self) -> f64 {
        self.poles
            .iter()
            .map(|p| p.at.norm())
            .fold(f64::INFINITY, f64::min)
    }

    /// Largest pole multiplicity among poles of minimal modulus.
    pub fn max_pole_order(&self) -> usize {
        self.poles.iter().map(|p| p.mult).max().unwrap_or(0)
    }

    pub fn eval(&self, z: C64) -> C64 {
        let mut v = self.num.eval(z);
        for p in &self.poles {
            v /= (z - p.at).powu(p.mult as u32);
        }
        v
    }

    pub fn scale(&self, c: C64) -> Self {
        if c == ZERO || self.is_zero() {
            return Self::zero();
        }
        Self {
            num: self.num.scale(c),
            poles: self.poles.clone(),
        }
    }

    /// `z^n f`
    pub fn mul_z_pow(&self, n: usize) -> Self {
        Self::reduce(
            self.num.shift_up(n),
            self.poles.clone(),
            1.0,
        )
    }

    pub fn mul_z(&self) -> Self {
        self.mul_z_pow(1)
    }

    /// Coefficientwise conjugate.
    pub fn conj_coeffs(&self) -> Self {
        Self {
            num: self.num.conj(),
            poles: self
                .poles
                .iter()
                .map(|p| Pole {
                    at: p.at.conj(),
                    mult: p.mult,
                })
                .collect(),
        }
    }

    /// Cancels numerator zeros lying within the cluster radius of a pole.
    pub fn cancel(&self, tol: &ToleranceConfig) -> Self {
        let mut num = self.num.clone();
        let mut poles = Vec::with_capacity(self.poles.len());
        for p in &self.poles {
            let mut mult = p.mult;
            while mult > 0 && !num.is_zero() {
                let t = num.taylor_shift(p.at);
                // distance to the nearest numerator root, up to a factor 2
                let dist = t
                    .iter()
                    .enumerate()
                    .skip(1)
                    .filter(|(_, c)| c.norm() > 0.0)
                    .map(|(j, c)| (t[0].norm() / c.norm()).powf(1.0 / j as f64))
                    .fold(f64::INFINITY, f64::min);
                if t[0] != ZERO && dist > tol.cluster_radius(p.at.norm()) {
                    break;
                }
                num = num.deflate(p.at).0;
                mult -= 1;
            }
            if mult > 0 {
                poles.push(Pole { at: p.at, mult });
            }
        }
        Self::from_parts(num, poles)
    }

    /// Removes pole factors at which `num` vanishes to rounding accuracy.
    /// `amp` is the ratio of operand size to result size in the computation
    /// that produced `num`.
    pub(crate) fn reduce(num: Poly, poles: Vec<Pole>, amp: f64) -> Self {
        if num.is_zero() {
            return Self::zero();
        }
        let mut num = num;
        let mut kept = Vec::with_capacity(poles.len());
        for p in poles {
            let mut mult = p.mult;
            while mult > 0 {
                if num.is_zero() {
                    return Self::zero();
                }
                let value = num.eval(p.at).norm();
                let scale = abs_shift(&abs_poly(&num), p.at.norm())[0];
                if value > CANCEL_REL * amp * scale {
                    break;
                }
                num = num.deflate(p.at).0;
                mult -= 1;
            }
            if mult > 0 {
                kept.push(Pole { at: p.at, mult });
            }
        }
        Self::from_parts(num, kept)
    }

    /// `num(f) * L / den(f)` coefficients for a common multiple `L` of the
    /// denominators, given as a pole list containing every pole of `f`.
    fn lifted_num(&self, lcm: &[Pole]) -> Poly {
        let mut num = self.num.clone();
        for q in lcm {
            let own = self
                .poles
                .iter()
                .find(|p| same_pole(p.at, q.at))
                .map_or(0, |p| p.mult);
            for _ in own..q.mult {
                num = num.mul_linear(q.at);
            }
        }
        num
    }

    fn lcm_poles(&self, other: &Self) -> Vec<Pole> {
        let mut lcm = self.poles.clone();
        for p in &other.poles {
            match lcm.iter_mut().find(|q| same_pole(q.at, p.at)) {
                Some(q) => q.mult = q.mult.max(p.mult),
                None => lcm.push(*p),
            }
        }
        lcm
    }

    fn add_impl(&self, other: &Self) -> Self {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        let lcm = self.lcm_poles(other);
        let a = self.lifted_num(&lcm);
        let b = other.lifted_num(&lcm);
        let num = a.add_cancelling(&b);
        let amp = a.max_abs().max(b.max_abs()) / num.max_abs().max(f64::MIN_POSITIVE);
        Self::reduce(num, lcm, amp.max(1.0))
    }

    fn mul_impl(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let num = &self.num * &other.num;
        let poles = self.poles.iter().chain(&other.poles).copied();
        let merged = Self::from_parts(Poly::one(), poles).poles;
        Self::reduce(num, merged, 1.0)
    }

    /// Taylor coefficients of `f(a + u)`, `n` of them. `a` must not be a pole.
    pub fn taylor_at(&self, a: C64, n: usize) -> Vec<C64> {
        let mut series = vec![ZERO; n];
        if n == 0 {
            return series;
        }
        let shifted = self.num.taylor_shift(a);
        for (i, c) in shifted.into_iter().take(n).enumerate() {
            series[i] = c;
        }
        for p in &self.poles {
            let c = a - p.at;
            let inv: Vec<C64> = (0..n)
                .map(|k| {
                    let s = if k % 2 == 0 { 1.0 } else { -1.0 };
                    C64::new(s, 0.0) / c.powu(k as u32 + 1)
                })
                .collect();
            for _ in 0..p.mult {
                series = series_mul(&series, &inv, n);
            }
        }
        series
    }

    /// First `n` Maclaurin coefficients.
    pub fn taylor_coeffs(&self, n: usize) -> Vec<C64> {
        self.taylor_at(ZERO, n)
    }

    /// `f^(j)(a)` for `j < n`.
    pub fn derivatives_at(&self, a: C64, n: usize) -> Vec<C64> {
        self.taylor_at(a, n)
            .into_iter()
            .enumerate()
            .map(|(j, c)| c * factorial(j))
            .collect()
    }

    /// Quotient rule with the factored denominator: for `f = N / Q`,
    /// `f' = (N' L - N sum_p m_p L / (z - p)) / (Q L)` where `L` is the
    /// product of the distinct linear factors.
    pub fn derivative(&self) -> Self {
        if self.poles.is_empty() {
            return Self::poly(self.num.derivative());
        }
        let radical = Poly::from_roots(self.poles.iter().map(|p| &p.at));
        let mut sum = Poly::zero();
        for p in &self.poles {
            let (cofactor, _) = radical.deflate(p.at);
            sum = &sum + &cofactor.scale(C64::new(p.mult as f64, 0.0));
        }
        let a = &self.num.derivative() * &radical;
        let b = &self.num * &sum;
        let num = a.add_cancelling(&(-&b));
        let poles = self
            .poles
            .iter()
            .map(|p| Pole {
                at: p.at,
                mult: p.mult + 1,
            })
            .collect();
        let amp = a.max_abs().max(b.max_abs()) / num.max_abs().max(f64::MIN_POSITIVE);
        Self::reduce(num, poles, amp.max(1.0))
    }

    /// `g*(z) = conj(g)(1/z)`: on the unit circle this is the complex
    /// conjugate of `g`. Poles `p != 0` move to `1 / conj(p)`.
    pub fn conj_reflect(&self) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        let d = self.num.degree().unwrap_or(0);
        // conj(num)(1/z) = z^{-d} rev(conj num)(z)
        let mut num = Poly::new(self.num.conj().coeffs()[..=d].iter().rev().copied().collect());
        let mut z_power: isize = -(d as isize);
        let mut scale = ONE;
        let mut poles = Vec::new();
        for p in &self.poles {
            // (1/z - conj p)^m
            if p.at == ZERO {
                z_power += p.mult as isize;
            } else {
                let pc = p.at.conj();
                scale *= (-pc).powu(p.mult as u32);
                z_power += p.mult as isize;
                poles.push(Pole {
                    at: ONE / pc,
                    mult: p.mult,
                });
            }
        }
        if z_power >= 0 {
            num = num.shift_up(z_power as usize);
        } else {
            poles.push(Pole {
                at: ZERO,
                mult: (-z_power) as usize,
            });
        }
        Self::reduce(num.scale(ONE / scale), poles, 1.0)
    }

    /// `1 / f`, with poles at the clustered roots of the numerator.
    pub fn recip(&self, tol: &ToleranceConfig) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let poles = self
            .num
            .roots(tol)
            .into_iter()
            .map(|z| Pole {
                at: z.location,
                mult: z.multiplicity,
            })
            .collect::<Vec<_>>();
        let num = self.den().scale(ONE / self.num.leading());
        Ok(Self::from_parts(num, poles))
    }

    /// Laurent coefficients `A_1..A_m` of the principal part
    /// `sum_j A_j (z - p)^{-j}` at pole `index`.
    pub fn principal_part(&self, index: usize) -> Vec<C64> {
        let pole = self.poles[index];
        let m = pole.mult;
        let rest = Self {
            num: self.num.clone(),
            poles: self
                .poles
                .iter()
                .enumerate()
                .filter(|(i, _)| *i != index)
                .map(|(_, p)| *p)
                .collect(),
        };
        let g = rest.taylor_at(pole.at, m);
        (1..=m).map(|j| g[m - j]).collect()
    }

    /// Polynomial part of the partial-fraction decomposition.
    pub fn polynomial_part(&self) -> Poly {
        if self.poles.is_empty() {
            return self.num.clone();
        }
        self.num
            .divmod(&self.den())
            .expect("denominator is nonzero")
            .0
    }

    /// Checks membership in Rat(D): every pole has modulus `>= 1 + tau_pole`.
    pub fn validate_in_ratd(&self, tol: &ToleranceConfig) -> Result<()> {
        let bad: Vec<C64> = self
            .poles
            .iter()
            .filter(|p| p.at.norm() < 1.0 + tol.tau_pole)
            .map(|p| p.at)
            .collect();
        if bad.is_empty() {
            Ok(())
        } else {
            Err(Error::PoleInDisc(bad))
        }
    }

    pub fn is_in_ratd(&self, tol: &ToleranceConfig) -> bool {
        self.validate_in_ratd(tol).is_ok()
    }

    /// Expansion in the scaled kernels `h_w^(n)`.
    pub(crate) fn hbasis(&self, tol: &ToleranceConfig) -> Result<Vec<HTerm>> {
        self.validate_in_ratd(tol)?;
        let mut terms = Vec::new();
        let poly = self.polynomial_part();
        if !poly.is_zero() {
            terms.push(HTerm {
                node: ZERO,
                coeffs: poly.coeffs().to_vec(),
            });
        }
        for (i, pole) in self.poles.iter().enumerate() {
            let laurent = self.principal_part(i);
            terms.push(HTerm {
                node: ONE / pole.at.conj(),
                coeffs: laurent_to_h(pole.at, &laurent),
            });
        }
        Ok(terms)
    }

    /// Coordinates in the decomposition `Rat(D) = sum_w S_w`.
    pub fn to_kbasis(&self, tol: &ToleranceConfig) -> Result<KBasisExpansion> {
        Ok(KBasisExpansion {
            terms: self
                .hbasis(tol)?
                .into_iter()
                .map(|t| KTerm {
                    node: t.node,
                    coeffs: t
                        .coeffs
                        .iter()
                        .enumerate()
                        .map(|(n, c)| c / factorial(n))
                        .collect(),
                })
                .collect(),
        })
    }

    pub fn from_kbasis(e: &KBasisExpansion) -> Self {
        let terms: Vec<HTerm> = e
            .terms
            .iter()
            .map(|t| HTerm {
                node: t.node,
                coeffs: t
                    .coeffs
                    .iter()
                    .enumerate()
                    .map(|(n, c)| c * factorial(n))
                    .collect(),
            })
            .collect();
        Self::from_hbasis(&terms)
    }

    pub(crate) fn from_hbasis(terms: &[HTerm]) -> Self {
        terms
            .iter()
            .map(|t| h_block(t.node, &t.coeffs))
            .fold(Self::zero(), |acc, f| &acc + &f)
    }

    /// The Riesz projection onto H^2 for a rational symbol with no pole on
    /// the unit circle: keeps the polynomial part and the principal parts at
    /// exterior poles, drops those at interior poles.
    pub fn project_plus(&self, tol: &ToleranceConfig) -> Result<Self> {
        let band = tol.delta_boundary.max(tol.tau_pole);
        let on_circle: Vec<C64> = self
            .poles
            .iter()
            .filter(|p| (p.at.norm() - 1.0).abs() <= band)
            .map(|p| p.at)
            .collect();
        if !on_circle.is_empty() {
            return Err(Error::PoleOnCircle(on_circle));
        }
        if self.poles.iter().all(|p| p.at.norm() > 1.0) {
            return Ok(self.clone());
        }
        let mut out = Self::poly(self.polynomial_part());
        for (i, p) in self.poles.iter().enumerate() {
            if p.at.norm() < 1.0 {
                continue;
            }
            let laurent = self.principal_part(i);
            for (j, a) in laurent.iter().enumerate() {
                out = &out + &Self::pole_term(*a, p.at, j + 1);
            }
        }
        Ok(out)
    }

    /// Largest modulus among the first `n` Taylor coefficients.
    pub fn taylor_norm(&self, n: usize) -> f64 {
        self.taylor_coeffs(n)
            .iter()
            .map(|c| c.norm())
            .fold(0.0, f64::max)
    }

    /// Coefficient residual between two elements of Rat(D): the largest
    /// difference among the first `n` Taylor coefficients, relative to
    /// `max(1, size of either operand)`.
    pub fn residual(&self, other: &Self, n: usize) -> f64 {
        let a = self.taylor_coeffs(n);
        let b = other.taylor_coeffs(n);
        let scale = a
            .iter()
            .chain(&b)
            .map(|c| c.norm())
            .fold(1.0, f64::max);
        a.iter()
            .zip(&b)
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
            / scale
    }

    /// Wire form with the denominator scaled to `den(0) = 1` when possible.
    pub fn to_json(&self) -> RatFuncJson {
        let den = self.den();
        let d0 = den.coeffs().first().copied().unwrap_or(ONE);
        let scale = if d0 == ZERO { ONE } else { ONE / d0 };
        let pairs = |p: &Poly| p.coeffs().iter().map(|c| c * scale).map(|c| [c.re, c.im]).collect();
        RatFuncJson {
            num: pairs(&self.num),
            den: pairs(&den),
        }
    }
}

/// Coefficients of the scaled kernels at one node.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct HTerm {
    pub node: C64,
    pub coeffs: Vec<C64>,
}

/// One node of a [`KBasisExpansion`]: `sum_n coeffs[n] k_node^(n)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KTerm {
    pub node: C64,
    pub coeffs: Vec<C64>,
}

/// Finite sum `sum_{w,n} c_{w,n} k_w^(n)`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct KBasisExpansion {
    pub terms: Vec<KTerm>,
}

impl KBasisExpansion {
    /// Coefficients at the node closest to `w`, if one lies within `radius`.
    pub fn at(&self, w: C64, radius: f64) -> Option<&[C64]> {
        self.terms
            .iter()
            .filter(|t| (t.node - w).norm() <= radius)
            .min_by(|a, b| (a.node - w).norm().total_cmp(&(b.node - w).norm()))
            .map(|t| t.coeffs.as_slice())
    }
}

/// `sum_n c_n h_w^(n)` as a rational function.
fn h_block(w: C64, coeffs: &[C64]) -> RatFunc {
    let top = coeffs.iter().rposition(|c| *c != ZERO);
    let Some(top) = top else {
        return RatFunc::zero();
    };
    if w == ZERO {
        return RatFunc::poly(Poly::new(coeffs[..=top].to_vec()));
    }
    // h^(n) = z^n (-conj w)^{-(n+1)} (z - p)^{-(n+1)},  p = 1 / conj w
    let p = ONE / w.conj();
    let m = top + 1;
    let neg_p = -p;
    let base = Poly::linear(p);
    let mut num = Poly::zero();
    for (n, &c) in coeffs[..m].iter().enumerate() {
        if c == ZERO {
            continue;
        }
        let term = Poly::monomial(n, c * neg_p.powu(n as u32 + 1));
        num = &num + &(&term * &base.pow(m - 1 - n));
    }
    RatFunc::from_parts(num, [Pole { at: p, mult: m }])
}

/// Solves for `h`-coefficients at node `1 / conj(p)` from the Laurent
/// coefficients `A_j` of `(z - p)^{-j}`.
fn laurent_to_h(p: C64, laurent: &[C64]) -> Vec<C64> {
    let m = laurent.len();
    // coefficient of (z-p)^{-j} in h^(n): (-p)^{n+1} C(n, n+1-j) p^{j-1}
    let entry = |n: usize, j: usize| -> C64 {
        if n + 1 < j {
            return ZERO;
        }
        (-p).powu(n as u32 + 1) * binomial(n, n + 1 - j) * p.powu(j as u32 - 1)
    };
    let mut x = vec![ZERO; m];
    for j in (1..=m).rev() {
        let mut acc = laurent[j - 1];
        for (n, xn) in x.iter().enumerate().skip(j) {
            acc -= xn * entry(n, j);
        }
        x[j - 1] = acc / entry(j - 1, j);
    }
    x
}

impl Add for &RatFunc {
    type Output = RatFunc;
    fn add(self, rhs: &RatFunc) -> RatFunc {
        self.add_impl(rhs)
    }
}

impl Sub for &RatFunc {
    type Output = RatFunc;
    fn sub(self, rhs: &RatFunc) -> RatFunc {
        self.add_impl(&-rhs)
    }
}

impl Mul for &RatFunc {
    type Output = RatFunc;
    fn mul(self, rhs: &RatFunc) -> RatFunc {
        self.mul_impl(rhs)
    }
}

impl Neg for &RatFunc {
    type Output = RatFunc;
    fn neg(self) -> RatFunc {
        self.scale(-ONE)
    }
}

macro_rules! forward_owned {
    ($($tr:ident :: $m:ident),*) => {$(
        impl $tr for RatFunc {
            type Output = RatFunc;
            fn $m(self, rhs: RatFunc) -> RatFunc { (&self).$m(&rhs) }
        }
    )*};
}
forward_owned!(Add::add, Sub::sub, Mul::mul);

impl fmt::Display for RatFunc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn term(c: C64) -> String {
            if c.im == 0.0 {
                format!("{}", c.re)
            } else if c.re == 0.0 {
                format!("{}i", c.im)
            } else {
                format!("({}{:+}i)", c.re, c.im)
            }
        }
        fn poly(p: &Poly) -> String {
            if p.is_zero() {
                return "0".into();
            }
            p.coeffs()
                .iter()
                .enumerate()
                .filter(|(_, c)| **c != ZERO)
                .map(|(i, c)| match i {
                    0 => term(*c),
                    1 => format!("{}*z", term(*c)),
                    _ => format!("{}*z^{}", term(*c), i),
                })
                .collect::<Vec<_>>()
                .join(" + ")
        }
        if self.poles.is_empty() {
            return write!(f, "{}", poly(&self.num));
        }
        let den = self
            .poles
            .iter()
            .map(|p| {
                let at = p.at;
                let base = if at.im == 0.0 && at.re < 0.0 {
                    format!("(z + {})", -at.re)
                } else if at.re == 0.0 && at.im < 0.0 {
                    format!("(z + {}i)", -at.im)
                } else {
                    format!("(z - {})", term(at))
                };
                if p.mult == 1 {
                    base
                } else {
                    format!("{base}^{}", p.mult)
                }
            })
            .collect::<Vec<_>>()
            .join(" ");
        write!(f, "({}) / ({})", poly(&self.num), den)
    }
}

impl Serialize for RatFunc {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json().serialize(serializer)
    }
}

/// Wire format: `{"num": [[re, im], ...], "den": [[re, im], ...]}` with
/// coefficients in ascending degree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatFuncJson {
    pub num: Vec<[f64; 2]>,
    pub den: Vec<[f64; 2]>,
}

impl RatFuncJson {
    pub fn to_ratfunc(&self, tol: &ToleranceConfig) -> Result<RatFunc> {
        let conv = |v: &[[f64; 2]]| -> Result<Poly> {
            if v.iter().flatten().any(|x| !x.is_finite()) {
                return Err(Error::InvalidArgument("non-finite coefficient".into()));
            }
            Ok(Poly::new(v.iter().map(|[re, im]| Complex64::new(*re, *im)).collect()))
        };
        RatFunc::from_num_den(conv(&self.num)?, conv(&self.den)?, tol)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn r(x: f64) -> C64 {
        c(x, 0.0)
    }

    fn tol() -> ToleranceConfig {
        ToleranceConfig::default()
    }

    /// `1 / (z - p)`
    fn simple(p: C64) -> RatFunc {
        RatFunc::pole_term(ONE, p, 1)
    }

    fn sample_points() -> Vec<C64> {
        (0..10)
            .map(|k| {
                let t = k as f64 * 0.61;
                c(0.7 * t.cos(), 0.6 * (1.3 * t).sin())
            })
            .collect()
    }

    fn agree_pointwise(a: &RatFunc, b: &RatFunc, eps: f64) {
        for z in sample_points() {
            let (x, y) = (a.eval(z), b.eval(z));
            assert!((x - y).norm() <= eps * (1.0 + x.norm()), "{x} vs {y} at {z}");
        }
    }

    #[test]
    fn validate_accepts_exterior_and_polynomials() {
        assert!(simple(r(2.0)).validate_in_ratd(&tol()).is_ok());
        assert!(RatFunc::monomial(3).validate_in_ratd(&tol()).is_ok());
        assert_eq!(
            simple(r(0.5)).validate_in_ratd(&tol()),
            Err(Error::PoleInDisc(vec![r(0.5)]))
        );
    }

    #[test]
    fn from_num_den_cancels_common_factor() {
        let num = Poly::from_real(&[-0.5, 1.0]);
        let den = &Poly::from_real(&[-0.5, 1.0]) * &Poly::from_real(&[-2.0, 1.0]);
        let f = RatFunc::from_num_den(num, den, &tol()).unwrap();
        assert_eq!(f.poles().len(), 1);
        assert!((f.poles()[0].at - r(2.0)).norm() < 1e-12);
        assert!(f.validate_in_ratd(&tol()).is_ok());
    }

    #[test]
    fn kbasis_simple_pole() {
        let e = simple(r(2.0)).to_kbasis(&tol()).unwrap();
        assert_eq!(e.terms.len(), 1);
        assert!((e.terms[0].node - r(0.5)).norm() < 1e-15);
        assert!((e.terms[0].coeffs[0] - r(-0.5)).norm() < 1e-15);
    }

    #[test]
    fn kbasis_monomial() {
        let e = RatFunc::monomial(3).to_kbasis(&tol()).unwrap();
        assert_eq!(e.terms.len(), 1);
        assert_eq!(e.terms[0].node, ZERO);
        let want = [0.0, 0.0, 0.0, 1.0 / 6.0];
        for (got, w) in e.terms[0].coeffs.iter().zip(want) {
            assert!((got - r(w)).norm() < 1e-15);
        }
    }

    #[test]
    fn kbasis_double_pole() {
        // oracle: (1/4) k + (1/8) k^(1) against 1/(z-2)^2 at sample points
        let f = RatFunc::pole_term(ONE, r(2.0), 2);
        let e = f.to_kbasis(&tol()).unwrap();
        let coeffs = e.at(r(0.5), 1e-12).unwrap();
        assert!((coeffs[0] - r(0.25)).norm() < 1e-14);
        assert!((coeffs[1] - r(0.125)).norm() < 1e-14);
        for z in sample_points() {
            let k0 = ONE / (ONE - 0.5 * z);
            let k1 = z / (ONE - 0.5 * z).powu(2);
            let lhs = 0.25 * k0 + 0.125 * k1;
            assert!((lhs - f.eval(z)).norm() < 1e-13);
        }
    }

    #[test]
    fn kbasis_round_trip_mixed() {
        let f = &(&RatFunc::pole_term(c(1.0, -0.5), c(1.5, 0.7), 2)
            + &RatFunc::pole_term(c(0.3, 0.2), c(-2.0, 0.1), 1))
            + &RatFunc::poly(Poly::new(vec![c(0.2, 0.0), c(0.0, 1.0), c(-0.4, 0.3)]));
        let e = f.to_kbasis(&tol()).unwrap();
        let back = RatFunc::from_kbasis(&e);
        assert!(back.residual(&f, 48) < 1e-12);
        agree_pointwise(&back, &f, 1e-12);
    }

    #[test]
    fn taylor_examples() {
        let geo = simple(r(2.0)).scale(r(-2.0)); // 1/(1 - z/2)
        let t = geo.taylor_coeffs(4);
        for (got, want) in t.iter().zip([1.0, 0.5, 0.25, 0.125]) {
            assert!((got - r(want)).norm() < 1e-15);
        }
        let t = RatFunc::monomial(2).taylor_coeffs(4);
        assert_eq!(t, vec![ZERO, ZERO, ONE, ZERO]);
        // 1/(z-2) = -(1/2) sum (z/2)^n; series at z = 0.1 against the function
        let f = simple(r(2.0));
        let t = f.taylor_coeffs(40);
        for (got, want) in t.iter().zip([-0.5, -0.25, -0.125]) {
            assert!((got - r(want)).norm() < 1e-15);
        }
        let z = r(0.1);
        let series: C64 = t.iter().enumerate().map(|(n, a)| a * z.powu(n as u32)).sum();
        assert!((series - f.eval(z)).norm() < 1e-15);
    }

    #[test]
    fn project_plus_examples() {
        let t = tol();
        let f = simple(r(2.0));
        assert!(f.project_plus(&t).unwrap().residual(&f, 32) < 1e-15);
        assert!(simple(r(0.5)).project_plus(&t).unwrap().is_zero());
        assert!(simple(ZERO).project_plus(&t).unwrap().is_zero());
        assert!(matches!(
            simple(c(0.0, 1.0)).project_plus(&t),
            Err(Error::PoleOnCircle(_))
        ));
    }

    #[test]
    fn project_plus_matches_quadrature() {
        // <g, z^k> by a 2048-node trapezoid rule for g = 1/(z-0.5) + 1/(z-3)
        let g = &simple(r(0.5)) + &simple(r(3.0));
        let p = g.project_plus(&tol()).unwrap();
        let coeffs = p.taylor_coeffs(9);
        let m = 2048;
        for (k, ck) in coeffs.iter().enumerate() {
            let mut acc = ZERO;
            for j in 0..m {
                let th = 2.0 * std::f64::consts::PI * j as f64 / m as f64;
                let z = C64::from_polar(1.0, th);
                acc += g.eval(z) * z.powu(k as u32).conj();
            }
            acc /= m as f64;
            assert!((acc - ck).norm() < 1e-12, "k={k}: {acc} vs {ck}");
        }
    }

    #[test]
    fn kernel_series_coefficients() {
        // coefficient of z^m in k_w^(n) is (m+n)!/m! conj(w)^m
        let w = c(0.3, -0.4);
        for n in 0..4 {
            let mut coeffs = vec![ZERO; n + 1];
            coeffs[n] = ONE;
            let f = RatFunc::from_kbasis(&KBasisExpansion {
                terms: vec![KTerm { node: w, coeffs }],
            });
            let t = f.taylor_coeffs(12);
            for (j, tj) in t.iter().enumerate() {
                let want = if j < n {
                    ZERO
                } else {
                    let m = j - n;
                    factorial(m + n) / factorial(m) * w.conj().powu(m as u32)
                };
                assert!((tj - want).norm() < 1e-12 * (1.0 + want.norm()));
            }
        }
    }

    #[test]
    fn conj_reflect_on_circle() {
        let f = &RatFunc::pole_term(c(1.0, 0.5), c(1.5, -0.4), 2)
            + &RatFunc::poly(Poly::new(vec![c(0.1, 0.2), c(0.3, 0.0)]));
        let g = f.conj_reflect();
        for k in 0..7 {
            let z = C64::from_polar(1.0, 0.9 * k as f64);
            assert!((g.eval(z) - f.eval(z).conj()).norm() < 1e-12);
        }
    }

    #[test]
    fn derivative_quotient_rule() {
        let f = &RatFunc::pole_term(c(1.0, 0.5), c(1.5, -0.4), 2) * &RatFunc::z();
        let d = f.derivative();
        for z in sample_points() {
            let h = 1e-6;
            let fd = (f.eval(z + h) - f.eval(z - h)) / (2.0 * h);
            assert!((d.eval(z) - fd).norm() < 1e-6);
            assert!((d.eval(z) - f.derivatives_at(z, 2)[1]).norm() < 1e-12);
        }
    }

    #[test]
    fn arithmetic_cancels_exact_differences() {
        let f = &simple(r(2.0)) + &RatFunc::z();
        let zero = &f - &f;
        assert!(zero.is_zero());
        let g = &(&f * &RatFunc::poly(Poly::linear(r(2.0)))) - &RatFunc::one();
        // (1/(z-2) + z)(z-2) - 1 = z^2 - 2z
        assert!(g.is_polynomial());
        assert!(g.residual(&RatFunc::poly(Poly::from_real(&[0.0, -2.0, 1.0])), 8) < 1e-15);
    }

    #[test]
    fn json_round_trip() {
        let f = &RatFunc::pole_term(c(1.0, 0.5), c(1.5, -0.4), 1) + &RatFunc::z();
        let js = serde_json::to_string(&f.to_json()).unwrap();
        let back: RatFuncJson = serde_json::from_str(&js).unwrap();
        let g = back.to_ratfunc(&tol()).unwrap();
        assert!(g.residual(&f, 48) < 1e-12);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn arb_c(radius: f64) -> impl Strategy<Value = C64> {
            (-radius..radius, -radius..radius).prop_map(|(a, b)| C64::new(a, b))
        }

        fn arb_pole() -> impl Strategy<Value = C64> {
            (1.2f64..3.0, 0.0f64..std::f64::consts::TAU).prop_map(|(m, t)| C64::from_polar(m, t))
        }

        prop_compose! {
            fn arb_ratd()(num in prop::collection::vec(arb_c(1.0), 1..5),
                          poles in prop::collection::vec(arb_pole(), 0..3)) -> RatFunc {
                RatFunc::from_parts(Poly::new(num), poles.into_iter().map(|at| Pole { at, mult: 1 }))
            }
        }

        proptest! {
            #[test]
            fn project_plus_fixes_ratd(f in arb_ratd()) {
                let p = f.project_plus(&ToleranceConfig::default()).unwrap();
                prop_assert!(p.residual(&f, 32) < 1e-12);
            }

            #[test]
            fn kbasis_round_trip(f in arb_ratd()) {
                let e = f.to_kbasis(&ToleranceConfig::default()).unwrap();
                prop_assert!(RatFunc::from_kbasis(&e).residual(&f, 48) < 1e-9);
            }

            #[test]
            fn kbasis_is_linear(f in arb_ratd(), g in arb_ratd(), a in arb_c(2.0)) {
                let tol = ToleranceConfig::default();
                let lhs = RatFunc::from_kbasis(&(&f.scale(a) + &g).to_kbasis(&tol).unwrap());
                let rhs = &f.scale(a) + &g;
                prop_assert!(lhs.residual(&rhs, 48) < 1e-9);
            }

            #[test]
            fn project_plus_is_linear(f in arb_ratd(), p in arb_c(0.9), a in arb_c(2.0)) {
                let tol = ToleranceConfig::default();
                let inner = RatFunc::pole_term(ONE, p, 1);
                let g = &f.scale(a) + &inner;
                let lhs = g.project_plus(&tol).unwrap();
                let rhs = &f.project_plus(&tol).unwrap().scale(a)
                    + &inner.project_plus(&tol).unwrap();
                prop_assert!(lhs.residual(&rhs, 32) < 1e-9);
            }
        }
    }
}
