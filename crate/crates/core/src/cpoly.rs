//! Dense complex polynomials: arithmetic, root finding with multiplicity
//! clustering, and extended-Euclid Bezout identities.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, Schur};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tol::ToleranceConfig;

pub type C64 = Complex64;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);

/// Multiple of machine epsilon below which a coefficient produced by
/// cancellation is rounding noise.
const ROUNDOFF: f64 = 64.0 * f64::EPSILON;

/// Polynomial with coefficients in ascending degree. The zero polynomial
/// has no coefficients; otherwise the leading coefficient is nonzero.
#[derive(Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Poly {
    coeffs: Vec<C64>,
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Poly{:?}", self.coeffs)
    }
}

impl Poly {
    pub fn new(coeffs: Vec<C64>) -> Self {
        let mut p = Self { coeffs };
        p.trim_exact();
        p
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Self::new(coeffs.iter().map(|&c| C64::new(c, 0.0)).collect())
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(ONE)
    }

    pub fn constant(c: C64) -> Self {
        Self::new(vec![c])
    }

    /// `c * z^n`
    pub fn monomial(n: usize, c: C64) -> Self {
        let mut coeffs = vec![ZERO; n + 1];
        coeffs[n] = c;
        Self::new(coeffs)
    }

    /// `z - a`
    pub fn linear(a: C64) -> Self {
        Self::new(vec![-a, ONE])
    }

    /// `prod (z - a_i)`
    pub fn from_roots<'a>(roots: impl IntoIterator<Item = &'a C64>) -> Self {
        roots
            .into_iter()
            .fold(Self::one(), |acc, &a| acc.mul_linear(a))
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<C64> {
        self.coeffs
    }

    /// Coefficient of `z^i`, zero beyond the degree.
    pub fn coeff(&self, i: usize) -> C64 {
        self.coeffs.get(i).copied().unwrap_or(ZERO)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> C64 {
        self.coeffs.last().copied().unwrap_or(ZERO)
    }

    /// Largest coefficient modulus.
    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    fn trim_exact(&mut self) {
        while self.coeffs.last().is_some_and(|c| *c == ZERO) {
            self.coeffs.pop();
        }
    }

    /// Drops coefficients below `eps * scale` from the top and zeroes
    /// interior ones of that size.
    fn trim_below(&mut self, threshold: f64) {
        for c in &mut self.coeffs {
            if c.norm() <= threshold {
                *c = ZERO;
            }
        }
        self.trim_exact();
    }

    /// Trims trailing coefficients smaller than `eps_zero` relative to the
    /// largest coefficient.
    pub fn normalized(mut self, tol: &ToleranceConfig) -> Self {
        let threshold = tol.eps_zero * self.max_abs();
        while self.coeffs.last().is_some_and(|c| c.norm() <= threshold) {
            self.coeffs.pop();
        }
        self
    }

    pub fn eval(&self, z: C64) -> C64 {
        self.coeffs.iter().rev().fold(ZERO, |acc, &c| acc * z + c)
    }

    /// `sum |c_i| |z|^i`, the natural scale of rounding errors in `eval`.
    pub fn eval_abs(&self, z: C64) -> f64 {
        let r = z.norm();
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * r + c.norm())
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, &c)| c * i as f64)
                .collect(),
        )
    }

    pub fn scale(&self, c: C64) -> Self {
        if c == ZERO {
            return Self::zero();
        }
        Self::new(self.coeffs.iter().map(|&x| x * c).collect())
    }

    /// Coefficientwise complex conjugate.
    pub fn conj(&self) -> Self {
        Self::new(self.coeffs.iter().map(|c| c.conj()).collect())
    }

    /// `z^n * self`
    pub fn shift_up(&self, n: usize) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        let mut coeffs = vec![ZERO; n];
        coeffs.extend_from_slice(&self.coeffs);
        Self { coeffs }
    }

    /// `z^d p(1/z)` for `d = degree(p)`.
    pub fn reversed(&self) -> Self {
        Self::new(self.coeffs.iter().rev().copied().collect())
    }

    pub fn mul_linear(&self, a: C64) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        let mut out = vec![ZERO; self.coeffs.len() + 1];
        for (i, &c) in self.coeffs.iter().enumerate() {
            out[i + 1] += c;
            out[i] -= a * c;
        }
        Self::new(out)
    }

    pub fn pow(&self, n: usize) -> Self {
        (0..n).fold(Self::one(), |acc, _| &acc * self)
    }

    /// Sum that treats cancellation down to rounding level as exact zero.
    pub fn add_cancelling(&self, other: &Self) -> Self {
        let scale = self.max_abs().max(other.max_abs());
        let mut out = self + other;
        out.trim_below(ROUNDOFF * scale);
        out
    }

    /// Euclidean division: `self = q * divisor + r` with `deg r < deg divisor`.
    pub fn divmod(&self, divisor: &Self) -> Result<(Self, Self)> {
        let dd = divisor.degree().ok_or(Error::DivisionByZero)?;
        let Some(nd) = self.degree() else {
            return Ok((Self::zero(), Self::zero()));
        };
        if nd < dd {
            return Ok((Self::zero(), self.clone()));
        }
        let lead = divisor.leading();
        let mut rem = self.coeffs.clone();
        let mut quot = vec![ZERO; nd - dd + 1];
        for k in (0..=nd - dd).rev() {
            let q = rem[k + dd] / lead;
            quot[k] = q;
            for (j, &d) in divisor.coeffs.iter().enumerate() {
                rem[k + j] -= q * d;
            }
            rem[k + dd] = ZERO;
        }
        rem.truncate(dd);
        let mut r = Self::new(rem);
        r.trim_below(ROUNDOFF * self.max_abs());
        Ok((Self::new(quot), r))
    }

    /// Divides by `(z - a)` with synthetic division and returns the quotient
    /// together with the discarded remainder `p(a)`. The recurrence runs from
    /// the top for `|a| <= 1` and from the constant term otherwise, which is
    /// the stable direction in each case.
    pub fn deflate(&self, a: C64) -> (Self, C64) {
        let n = self.coeffs.len();
        if n == 0 {
            return (Self::zero(), ZERO);
        }
        if n == 1 {
            return (Self::zero(), self.coeffs[0]);
        }
        let c = &self.coeffs;
        let mut q = vec![ZERO; n - 1];
        if a.norm() <= 1.0 {
            q[n - 2] = c[n - 1];
            for k in (0..n - 2).rev() {
                q[k] = c[k + 1] + a * q[k + 1];
            }
            let rem = c[0] + a * q[0];
            (Self::new(q), rem)
        } else {
            // c_0 = -a q_0, c_k = q_{k-1} - a q_k
            q[0] = -c[0] / a;
            for k in 1..n - 1 {
                q[k] = (q[k - 1] - c[k]) / a;
            }
            let rem = c[n - 1] - q[n - 2];
            (Self::new(q), rem)
        }
    }

    /// Coefficients of `p(a + u)` in powers of `u`.
    pub fn taylor_shift(&self, a: C64) -> Vec<C64> {
        let mut c = self.coeffs.clone();
        let n = c.len();
        for i in 0..n {
            for j in (i..n - 1).rev() {
                let next = c[j + 1];
                c[j] += a * next;
            }
        }
        c
    }

    /// Inverse of [`Poly::taylor_shift`]: builds `q(z) = sum c_i (z - a)^i`.
    pub fn from_shifted(shifted: &[C64], a: C64) -> Self {
        Self::new(Self::new(shifted.to_vec()).taylor_shift(-a))
    }

    /// Roots with multiplicities (see [`roots`]).
    pub fn roots(&self, tol: &ToleranceConfig) -> Vec<ZeroDatum> {
        roots(self, tol)
    }
}

impl From<Vec<C64>> for Poly {
    fn from(coeffs: Vec<C64>) -> Self {
        Self::new(coeffs)
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Poly::new((0..n).map(|i| self.coeff(i) + rhs.coeff(i)).collect())
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Poly::new((0..n).map(|i| self.coeff(i) - rhs.coeff(i)).collect())
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        if self.is_zero() || rhs.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![ZERO; self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly::new(out)
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly::new(self.coeffs.iter().map(|c| -c).collect())
    }
}

macro_rules! forward_owned {
    ($($tr:ident :: $m:ident),*) => {$(
        impl $tr for Poly {
            type Output = Poly;
            fn $m(self, rhs: Poly) -> Poly { (&self).$m(&rhs) }
        }
    )*};
}
forward_owned!(Add::add, Sub::sub, Mul::mul);

/// The operation selector of [`poly_arith`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PolyOp {
    Add,
    Sub,
    Mul,
    DivMod,
    Derivative,
    Eval,
    Scale,
}

/// Second operand of [`poly_arith`].
#[derive(Debug, Clone)]
pub enum Operand {
    Poly(Poly),
    Scalar(C64),
    None,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ArithResult {
    Poly(Poly),
    Pair(Poly, Poly),
    Scalar(C64),
}

/// Dispatching front end over the polynomial ring operations.
pub fn poly_arith(op: PolyOp, a: &Poly, b: &Operand) -> Result<ArithResult> {
    let bad = || Error::InvalidArgument(format!("operand mismatch for {op:?}"));
    Ok(match (op, b) {
        (PolyOp::Add, Operand::Poly(b)) => ArithResult::Poly(a + b),
        (PolyOp::Sub, Operand::Poly(b)) => ArithResult::Poly(a - b),
        (PolyOp::Mul, Operand::Poly(b)) => ArithResult::Poly(a * b),
        (PolyOp::DivMod, Operand::Poly(b)) => {
            let (q, r) = a.divmod(b)?;
            ArithResult::Pair(q, r)
        }
        (PolyOp::Derivative, _) => ArithResult::Poly(a.derivative()),
        (PolyOp::Eval, Operand::Scalar(z)) => ArithResult::Scalar(a.eval(*z)),
        (PolyOp::Scale, Operand::Scalar(c)) => ArithResult::Poly(a.scale(*c)),
        _ => return Err(bad()),
    })
}

/// Position of a point relative to the unit circle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Region {
    Interior,
    Boundary,
    Exterior,
}

impl Region {
    pub fn classify(z: C64, tol: &ToleranceConfig) -> Self {
        let r = z.norm();
        if (r - 1.0).abs() <= tol.delta_boundary {
            Region::Boundary
        } else if r < 1.0 {
            Region::Interior
        } else {
            Region::Exterior
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZeroDatum {
    pub location: C64,
    pub multiplicity: usize,
    pub region: Region,
}

/// Roots of `p` from the eigenvalues of its companion matrix, polished by
/// Newton steps and merged into clusters of radius `delta_cluster`.
pub fn roots(p: &Poly, tol: &ToleranceConfig) -> Vec<ZeroDatum> {
    let p = p.clone().normalized(tol);
    let Some(deg) = p.degree() else {
        return Vec::new();
    };
    let low = p.coeffs.iter().take_while(|c| **c == ZERO).count();
    let mut raw: Vec<C64> = vec![ZERO; low];
    let reduced = Poly::new(p.coeffs[low..].to_vec());
    let n = deg - low;
    if n == 1 {
        raw.push(-reduced.coeffs[0] / reduced.coeffs[1]);
    } else if n > 1 {
        let lead = reduced.leading();
        let mut m = DMatrix::<C64>::zeros(n, n);
        for i in 1..n {
            m[(i, i - 1)] = ONE;
        }
        for i in 0..n {
            m[(i, n - 1)] = -reduced.coeffs[i] / lead;
        }
        let eig = Schur::new(m)
            .eigenvalues()
            .expect("complex Schur form is triangular");
        let dp = reduced.derivative();
        raw.extend(eig.iter().map(|&z0| polish(&reduced, &dp, z0)));
    }
    cluster(raw, tol)
}

fn polish(p: &Poly, dp: &Poly, z0: C64) -> C64 {
    let mut z = z0;
    let mut best = p.eval(z).norm();
    for _ in 0..4 {
        let d = dp.eval(z);
        if d == ZERO {
            break;
        }
        let cand = z - p.eval(z) / d;
        let val = p.eval(cand).norm();
        // stop on stagnation or NaN
        if val.partial_cmp(&best) != Some(std::cmp::Ordering::Less) {
            break;
        }
        best = val;
        z = cand;
    }
    z
}

fn cluster(mut raw: Vec<C64>, tol: &ToleranceConfig) -> Vec<ZeroDatum> {
    raw.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    // union-find over pairs within the cluster radius
    let n = raw.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while parent[r] != r {
            r = parent[r];
        }
        parent[i] = r;
        r
    }
    for i in 0..n {
        for j in i + 1..n {
            let radius = tol.cluster_radius(raw[i].norm().max(raw[j].norm()));
            if (raw[i] - raw[j]).norm() <= radius {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                parent[b] = a;
            }
        }
    }
    let mut groups: Vec<(usize, Vec<C64>)> = Vec::new();
    for (i, &x) in raw.iter().enumerate() {
        let root = find(&mut parent, i);
        match groups.iter_mut().find(|(r, _)| *r == root) {
            Some((_, g)) => g.push(x),
            None => groups.push((root, vec![x])),
        }
    }
    groups
        .into_iter()
        .map(|(_, g)| {
            let location = g.iter().sum::<C64>() / g.len() as f64;
            ZeroDatum {
                location,
                multiplicity: g.len(),
                region: Region::classify(location, tol),
            }
        })
        .collect()
}

/// Result of [`bezout`]: `u p + v q = g`.
#[derive(Debug, Clone, PartialEq)]
pub struct Bezout {
    pub g: Poly,
    pub u: Poly,
    pub v: Poly,
    pub residual: f64,
}

/// Extended Euclid over complex coefficients. A remainder is dropped once
/// its coefficients fall below `eps_bezout` relative to the inputs. The
/// returned gcd is monic; when `q` divides `p` the convention is
/// `(g, u, v) = (q / lc(q), 0, 1 / lc(q))`, and symmetric inputs such as
/// `bezout(z^2, z^2)` therefore give `(z^2, 0, 1)`.
pub fn bezout(p: &Poly, q: &Poly, tol: &ToleranceConfig) -> Result<Bezout> {
    if p.is_zero() && q.is_zero() {
        return Err(Error::InvalidArgument("bezout of two zero polynomials".into()));
    }
    let scale = p.max_abs().max(q.max_abs());
    let threshold = tol.eps_bezout * scale;
    let (mut r0, mut r1) = (p.clone(), q.clone());
    let (mut s0, mut s1) = (Poly::one(), Poly::zero());
    let (mut t0, mut t1) = (Poly::zero(), Poly::one());
    while !r1.is_zero() {
        let (quot, mut rem) = r0.divmod(&r1)?;
        rem.trim_below(threshold);
        let s2 = &s0 - &(&quot * &s1);
        let t2 = &t0 - &(&quot * &t1);
        r0 = std::mem::replace(&mut r1, rem);
        s0 = std::mem::replace(&mut s1, s2);
        t0 = std::mem::replace(&mut t1, t2);
    }
    let lead = r0.leading();
    let inv = ONE / lead;
    let g = r0.scale(inv);
    let u = s0.scale(inv);
    let v = t0.scale(inv);
    let check = &(&(&u * p) + &(&v * q)) - &g;
    let residual = check.max_abs() / scale.max(1.0);
    if residual > tol.eps_bezout {
        return Err(Error::IllConditionedBezout { residual });
    }
    Ok(Bezout { g, u, v, residual })
}

/// Truncated product of two power series.
pub(crate) fn series_mul(a: &[C64], b: &[C64], n: usize) -> Vec<C64> {
    let mut out = vec![ZERO; n];
    for (i, &x) in a.iter().enumerate().take(n) {
        if x == ZERO {
            continue;
        }
        for (j, &y) in b.iter().enumerate().take(n - i) {
            out[i + j] += x * y;
        }
    }
    out
}

/// Truncated reciprocal of a power series with nonzero constant term.
pub(crate) fn series_inv(a: &[C64], n: usize) -> Vec<C64> {
    let mut out = vec![ZERO; n];
    if n == 0 {
        return out;
    }
    let a0 = a[0];
    out[0] = ONE / a0;
    for k in 1..n {
        let mut acc = ZERO;
        for j in 1..=k.min(a.len() - 1) {
            acc += a[j] * out[k - j];
        }
        out[k] = -acc / a0;
    }
    out
}

pub(crate) fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

pub(crate) fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, i| acc * i as f64)
}
