//! Seeded random instances with controlled conditioning: poles of modulus
//! in `[1.2, 3]`, numerators of degree at most 4, and symbols with at most
//! two interior zeros of order at most 2.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cpoly::{Poly, C64};
use crate::error::Result;
use crate::ratfun::{Pole, RatFunc};
use crate::staralg::PhiContext;

pub const POLE_MODULUS: (f64, f64) = (1.2, 3.0);
pub const MAX_NUM_DEGREE: usize = 4;
pub const MAX_INTERIOR_ZERO: f64 = 0.7;

#[derive(Debug, Clone)]
pub struct InstanceGen {
    rng: ChaCha8Rng,
}

impl InstanceGen {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Uniform in the square `[-r, r]^2`.
    pub fn complex(&mut self, r: f64) -> C64 {
        C64::new(self.rng.random_range(-r..r), self.rng.random_range(-r..r))
    }

    /// Uniform modulus in `[lo, hi]`, uniform argument.
    pub fn annulus(&mut self, lo: f64, hi: f64) -> C64 {
        let m = self.rng.random_range(lo..hi);
        let t = self.rng.random_range(0.0..std::f64::consts::TAU);
        C64::from_polar(m, t)
    }

    /// A point of the disc of radius `r`, uniform in area.
    pub fn disc(&mut self, r: f64) -> C64 {
        let m = r * self.rng.random_range(0.0f64..1.0).sqrt();
        let t = self.rng.random_range(0.0..std::f64::consts::TAU);
        C64::from_polar(m, t)
    }

    fn exterior_point(&mut self) -> C64 {
        self.annulus(POLE_MODULUS.0, POLE_MODULUS.1)
    }

    /// Element of Rat(D) with one or two simple poles.
    pub fn ratd(&mut self) -> RatFunc {
        let degree = self.rng.random_range(0..=MAX_NUM_DEGREE);
        let num = Poly::new((0..=degree).map(|_| self.complex(1.0)).collect());
        let npoles = self.rng.random_range(1..=2);
        let poles: Vec<Pole> = (0..npoles)
            .map(|_| Pole {
                at: self.exterior_point(),
                mult: 1,
            })
            .collect();
        RatFunc::from_parts(num, poles)
    }

    /// Symbol with up to two well-separated interior zeros of order up to 2,
    /// up to one exterior zero and up to one pole.
    pub fn phi(&mut self) -> RatFunc {
        let mut roots: Vec<C64> = Vec::new();
        let nzeros = self.rng.random_range(0..=2);
        let mut interior: Vec<C64> = Vec::new();
        while interior.len() < nzeros {
            let a = self.disc(MAX_INTERIOR_ZERO);
            if interior.iter().all(|b| (a - b).norm() > 0.25) {
                interior.push(a);
            }
        }
        for a in interior {
            let order = self.rng.random_range(1..=2);
            roots.extend(std::iter::repeat_n(a, order));
        }
        if self.rng.random_bool(0.5) {
            roots.push(self.exterior_point());
        }
        let lead = self.annulus(0.5, 1.5);
        let num = Poly::from_roots(&roots).scale(lead);
        let poles: Vec<Pole> = if self.rng.random_bool(0.5) {
            vec![Pole {
                at: self.exterior_point(),
                mult: 1,
            }]
        } else {
            Vec::new()
        };
        RatFunc::from_parts(num, poles)
    }

    /// A circle-invertible element with some margin: `1 - Gamma_+(.; t)`
    /// has no zero of modulus below 1.1 and `|Gamma_-(a; t) - 1| > 0.05` at
    /// every zero of `phi`. Shrinks a random element until both hold.
    pub fn circle_invertible(&mut self, ctx: &PhiContext) -> Result<RatFunc> {
        let mut t = self.ratd();
        loop {
            if well_invertible(ctx, &t)? {
                return Ok(t);
            }
            t = t.scale(C64::new(0.5, 0.0));
        }
    }
}

fn well_invertible(ctx: &PhiContext, t: &RatFunc) -> Result<bool> {
    if t.is_zero() {
        return Ok(true);
    }
    let f = crate::hardy::one_minus(&ctx.gamma_plus(t));
    let near = f
        .num()
        .roots(ctx.tol())
        .iter()
        .any(|z| z.location.norm() < 1.1);
    if near {
        return Ok(false);
    }
    let gm = ctx.gamma_minus_fn(t)?;
    Ok(ctx
        .zeros()
        .iter()
        .all(|z| (gm.eval(z.a) - C64::new(1.0, 0.0)).norm() > 0.05))
}
