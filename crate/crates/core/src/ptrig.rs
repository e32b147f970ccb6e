//! Generalized trigonometric functions.
//!
//! For an exponent `p > 1`, `sin_p` is the inverse of
//! `s ↦ ∫_0^s (1 - σ^p)^{-1/p} dσ` on `[-π_p/2, π_p/2]`, continued by the
//! reflection `sin_p(t) = sin_p(π_p - t)` and `2π_p`-periodicity, and
//! `cos_p = sin_p'`. The pair satisfies `|sin_p|^p + |cos_p|^p = 1`.
//!
//! The incomplete integral is evaluated by two convergent power series:
//! a binomial series in `y = s^p` for `y ≤ 1/2`, and an endpoint series in
//! `x = 1 - s^p = |cos_p|^p` for `x ≤ 1/2`, where the singular factor
//! `x^{-1/p}` has been integrated in closed form. Inversion is a bracketed
//! Newton iteration on each branch, seeded from a small per-`p` table.
//!
//! Working in `x` near the turning point gives `cos_p` with full relative
//! accuracy where `1 - sin_p^p` would otherwise cancel.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::quad;

/// An exponent `p > 1`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct PExponent(f64);

impl PExponent {
    pub fn new(p: f64) -> Result<Self> {
        if p.is_finite() && p > 1.0 {
            Ok(PExponent(p))
        } else {
            Err(Error::Domain(format!("exponent p must satisfy p > 1, got {p}")))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// Hölder conjugate `p / (p - 1)`.
    pub fn conjugate(self) -> f64 {
        self.0 / (self.0 - 1.0)
    }
}

/// `π_p = 2π / (p sin(π/p))`.
pub fn pi_p(p: PExponent) -> f64 {
    let p = p.value();
    2.0 * PI / (p * (PI / p).sin())
}

/// `π_p` from its defining integral `∫_{-1}^{1} (1 - s^p)^{-1/p} ds`, by
/// adaptive quadrature. Independent of the closed form and of the series
/// used by [`PTrig`].
///
/// The piece on `[2^{-1/p}, 1]` is mapped through `s^p = 1 - v^{p/(p-1)}`,
/// which removes the endpoint singularity.
pub fn pi_p_quadrature(p: PExponent) -> Result<f64> {
    let pv = p.value();
    let r = p.conjugate();
    let s_split = 0.5f64.powf(1.0 / pv);
    let v_split = 0.5f64.powf(1.0 / r);
    let (inner, _) = quad::integrate(|s| (1.0 - s.powf(pv)).powf(-1.0 / pv), 0.0, s_split, 1e-15, 1e-15)?;
    let (outer, _) = quad::integrate(
        |v| (1.0 - v.powf(r)).powf(1.0 / pv - 1.0),
        0.0,
        v_split,
        1e-15,
        1e-15,
    )?;
    Ok(2.0 * (inner + outer / (pv - 1.0)))
}

/// Values of the p-trigonometric pair at one argument.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SinCos {
    pub sin: f64,
    pub cos: f64,
    /// Signed power `cos_p^{(p-1)} = |cos_p|^{p-2} cos_p`.
    pub cos_pm1: f64,
    /// `|cos_p|^p`, computed without cancellation.
    pub cos_abs_p: f64,
}

const SEED_KNOTS: usize = 64;

/// Per-exponent evaluator for `sin_p`, `cos_p`, `arcsin_p`.
///
/// Construction precomputes series coefficients and Newton seeds; the
/// struct is immutable afterwards and can be shared across threads.
#[derive(Debug, Clone)]
pub struct PTrig {
    p: PExponent,
    inv_p: f64,
    // p/(p-1)
    r: f64,
    pi_p: f64,
    half_pi: f64,
    split_t: f64,
    s_split: f64,
    z_split: f64,
    // F(s) = s * Σ lower[k] y^k with y = s^p
    lower: Vec<f64>,
    // π_p/2 - F(s) = z * Σ upper[k] x^k with x = 1 - s^p, z = x^{(p-1)/p}
    upper: Vec<f64>,
    lower_seed: Vec<f64>,
    upper_seed: Vec<f64>,
}

fn series(first: f64, pochhammer: f64, denom: impl Fn(usize) -> f64) -> Vec<f64> {
    // (pochhammer)_k / k!, truncated once the tail is below 1e-18 at ratio 1/2
    let mut coeffs = Vec::new();
    let mut b = first;
    let mut k = 0usize;
    loop {
        let c = b / denom(k);
        coeffs.push(c);
        if (c * 0.5f64.powi(k as i32)).abs() < 1e-18 * coeffs[0].abs() || k >= 400 {
            break;
        }
        b *= (pochhammer + k as f64) / (k as f64 + 1.0);
        k += 1;
    }
    coeffs
}

/// Evaluates `Σ c_k u^k` and its derivative in `u`.
#[inline]
fn horner(coeffs: &[f64], u: f64) -> (f64, f64) {
    let mut val = 0.0;
    let mut der = 0.0;
    for &c in coeffs.iter().rev() {
        der = der * u + val;
        val = val * u + c;
    }
    (val, der)
}

/// Bracketed Newton for an increasing function on `[lo, hi]`.
#[inline]
fn newton_increasing<F: Fn(f64) -> (f64, f64)>(f: F, mut lo: f64, mut hi: f64, mut x: f64) -> f64 {
    for _ in 0..100 {
        let (fx, dfx) = f(x);
        if fx == 0.0 {
            return x;
        }
        if fx < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let mut next = x - fx / dfx;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - x).abs() <= 2.0 * f64::EPSILON * next.abs() || hi - lo <= f64::EPSILON * hi {
            return next;
        }
        x = next;
    }
    x
}

impl PTrig {
    pub fn new(p: PExponent) -> Self {
        let pv = p.value();
        let inv_p = 1.0 / pv;
        let r = p.conjugate();
        let pi = pi_p(p);
        let lower = series(1.0, inv_p, |k| pv * k as f64 + 1.0);
        let upper: Vec<f64> = series(1.0, 1.0 - inv_p, |k| k as f64 + 1.0 - inv_p)
            .into_iter()
            .map(|c| c * inv_p)
            .collect();
        let s_split = 0.5f64.powf(inv_p);
        let z_split = 0.5f64.powf(1.0 / r);
        let split_t = s_split * horner(&lower, 0.5).0;
        let mut trig = PTrig {
            p,
            inv_p,
            r,
            pi_p: pi,
            half_pi: 0.5 * pi,
            split_t,
            s_split,
            z_split,
            lower,
            upper,
            lower_seed: Vec::new(),
            upper_seed: Vec::new(),
        };
        let g_split = trig.half_pi - split_t;
        let lower_seed: Vec<f64> = (0..=SEED_KNOTS)
            .map(|i| {
                let t = split_t * i as f64 / SEED_KNOTS as f64;
                trig.solve_lower(t, t.min(s_split))
            })
            .collect();
        let upper_seed: Vec<f64> = (0..=SEED_KNOTS)
            .map(|i| {
                let g = g_split * i as f64 / SEED_KNOTS as f64;
                trig.solve_upper(g, ((pv - 1.0) * g).min(z_split))
            })
            .collect();
        trig.lower_seed = lower_seed;
        trig.upper_seed = upper_seed;

        #[cfg(debug_assertions)]
        if let Ok(q) = pi_p_quadrature(p) {
            debug_assert!(
                (q - pi).abs() <= 1e-10 * pi.max(1.0),
                "pi_p closed form {pi} disagrees with quadrature {q} at p = {pv}"
            );
        }
        trig
    }

    pub fn p(&self) -> PExponent {
        self.p
    }

    pub fn pi_p(&self) -> f64 {
        self.pi_p
    }

    pub fn half_pi_p(&self) -> f64 {
        self.half_pi
    }

    fn solve_lower(&self, t: f64, seed: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        let pv = self.p.value();
        newton_increasing(
            |s| {
                let y = s.powf(pv);
                let (v, d) = horner(&self.lower, y);
                (s * v - t, v + pv * y * d)
            },
            0.0,
            self.s_split,
            seed,
        )
    }

    fn solve_upper(&self, g: f64, seed: f64) -> f64 {
        if g <= 0.0 {
            return 0.0;
        }
        newton_increasing(
            |z| {
                let x = z.powf(self.r);
                let (v, d) = horner(&self.upper, x);
                (z * v - g, v + self.r * x * d)
            },
            0.0,
            self.z_split,
            seed,
        )
    }

    fn seed(table: &[f64], u: f64, span: f64) -> f64 {
        let pos = (u / span * SEED_KNOTS as f64).clamp(0.0, SEED_KNOTS as f64);
        let i = (pos as usize).min(SEED_KNOTS - 1);
        let frac = pos - i as f64;
        table[i] + frac * (table[i + 1] - table[i])
    }

    /// `(sin_p t, |cos_p t|^{p-1}, |cos_p t|^p)` for `t ∈ [0, π_p/2]`.
    fn first_quadrant(&self, t: f64) -> (f64, f64, f64) {
        if t <= self.split_t {
            let s = self.solve_lower(t, Self::seed(&self.lower_seed, t, self.split_t));
            let x = 1.0 - s.powf(self.p.value());
            (s, x.powf(1.0 / self.r), x)
        } else {
            let g = (self.half_pi - t).max(0.0);
            let z = self.solve_upper(g, Self::seed(&self.upper_seed, g, self.half_pi - self.split_t));
            let x = z.powf(self.r);
            ((1.0 - x).powf(self.inv_p), z, x)
        }
    }

    /// Evaluates the p-trigonometric pair at any finite `t`.
    pub fn eval(&self, t: f64) -> SinCos {
        let h = self.half_pi;
        // sin_p is odd and cos_p even; reduce |t| so both hold exactly
        let mut u = t.abs();
        if u > 3.0 * h {
            u = u.rem_euclid(2.0 * self.pi_p);
            if u > 3.0 * h {
                u -= 2.0 * self.pi_p;
            }
        }
        let (mirrored, u) = if u > h { (true, self.pi_p - u) } else { (false, u) };
        let (s, z, x) = self.first_quadrant(u.abs().min(h));
        let sin = if t < 0.0 { -s.copysign(u) } else { s.copysign(u) };
        let cos_sign = if mirrored { -1.0 } else { 1.0 };
        SinCos {
            sin,
            cos: cos_sign * x.powf(self.inv_p),
            cos_pm1: cos_sign * z,
            cos_abs_p: x,
        }
    }

    pub fn sin(&self, t: f64) -> f64 {
        self.eval(t).sin
    }

    pub fn cos(&self, t: f64) -> f64 {
        self.eval(t).cos
    }

    /// Inverse of `sin_p` onto `[-π_p/2, π_p/2]`.
    pub fn arcsin(&self, s: f64) -> Result<f64> {
        if !(-1.0..=1.0).contains(&s) {
            return Err(Error::Domain(format!("arcsin_p argument must lie in [-1, 1], got {s}")));
        }
        let a = s.abs();
        let y = a.powf(self.p.value());
        let t = if y <= 0.5 {
            a * horner(&self.lower, y).0
        } else {
            let x = 1.0 - y;
            self.half_pi - x.powf(1.0 / self.r) * horner(&self.upper, x).0
        };
        Ok(t.copysign(s))
    }
}

/// `sin_p(t)`. Builds a fresh [`PTrig`]; reuse one for repeated calls.
pub fn sin_p(p: PExponent, t: f64) -> f64 {
    PTrig::new(p).sin(t)
}

/// `cos_p(t) = d/dt sin_p(t)`.
pub fn cos_p(p: PExponent, t: f64) -> f64 {
    PTrig::new(p).cos(t)
}

pub fn arcsin_p(p: PExponent, s: f64) -> Result<f64> {
    PTrig::new(p).arcsin(s)
}
