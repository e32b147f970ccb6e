//! Problem data and the one-dimensional comparison models.
//!
//! Each model is the drifted half-linear equation
//!
//! ```text
//! d/dt (w')^{(p-1)} - T(t) (w')^{(p-1)} + λ w^{(p-1)} = 0
//! ```
//!
//! with one of four drifts, written through a warping function `τ` and the
//! weight `μ = τ^{n-1}`:
//!
//! | family | τ(t)          | T(t)                          | domain            |
//! |--------|---------------|-------------------------------|-------------------|
//! | 0      | cos(√κ t)     | (n-1)√κ tan(√κ t)             | (-π/2√κ, π/2√κ)   |
//! | 1      | sinh(√-κ t)   | -(n-1)√-κ coth(√-κ t)         | (0, ∞)            |
//! | 2      | exp(√-κ t)    | -(n-1)√-κ                     | ℝ                 |
//! | 3      | cosh(√-κ t)   | -(n-1)√-κ tanh(√-κ t)         | ℝ                 |
//!
//! Family 0 is the positive-curvature model, families 1–3 need `κ < 0`. In
//! every case `T = -μ'/μ`, so the equation is `(μ (w')^{(p-1)})' + λ μ
//! w^{(p-1)} = 0` in divergence form, and `T` solves the Riccati equation
//! `T' = T²/(n-1) + (n-1)κ`.

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::ptrig::{PExponent, PTrig};

/// Signed power `x^{(q)} = |x|^{q-1} x`.
pub fn signed_pow(x: f64, q: f64) -> Result<f64> {
    if !(q > 0.0) {
        return Err(Error::Domain(format!("signed power needs q > 0, got {q}")));
    }
    Ok(spow(x, q))
}

#[inline]
pub(crate) fn spow(x: f64, q: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x.abs().powf(q).copysign(x)
    }
}

/// Problem parameters shared by every solver.
///
/// `n` is the dimension parameter of the curvature-dimension condition and
/// may be any real `n ≥ 1`. The diameter is optional until an eigenvalue
/// problem is posed.
#[derive(Clone)]
pub struct Params {
    p: PExponent,
    n: f64,
    kappa: f64,
    diameter: Option<f64>,
    trig: Arc<PTrig>,
}

impl fmt::Debug for Params {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Params")
            .field("p", &self.p.value())
            .field("n", &self.n)
            .field("kappa", &self.kappa)
            .field("diameter", &self.diameter)
            .finish()
    }
}

impl Params {
    pub fn new(p: f64, n: f64, kappa: f64) -> Result<Self> {
        let p = PExponent::new(p)?;
        if !(n.is_finite() && n >= 1.0) {
            return Err(Error::Domain(format!("dimension parameter must satisfy n >= 1, got {n}")));
        }
        if !kappa.is_finite() || kappa == 0.0 {
            return Err(Error::Domain(format!("curvature must be finite and nonzero, got {kappa}")));
        }
        Ok(Params {
            p,
            n,
            kappa,
            diameter: None,
            trig: Arc::new(PTrig::new(p)),
        })
    }

    /// Attaches a diameter. For `κ > 0` the diameter may not exceed `π/√κ`.
    pub fn with_diameter(mut self, d: f64) -> Result<Self> {
        if !(d.is_finite() && d > 0.0) {
            return Err(Error::Domain(format!("diameter must be positive, got {d}")));
        }
        if self.kappa > 0.0 {
            let max = std::f64::consts::PI / self.kappa.sqrt();
            if d > max * (1.0 + 1e-12) {
                return Err(Error::Domain(format!(
                    "diameter {d} exceeds pi/sqrt(kappa) = {max}; the bound requires D <= pi/sqrt(kappa) when kappa > 0"
                )));
            }
            self.diameter = Some(d.min(max));
        } else {
            self.diameter = Some(d);
        }
        Ok(self)
    }

    pub fn p(&self) -> f64 {
        self.p.value()
    }

    pub fn exponent(&self) -> PExponent {
        self.p
    }

    pub fn n(&self) -> f64 {
        self.n
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn diameter(&self) -> Option<f64> {
        self.diameter
    }

    pub fn require_diameter(&self) -> Result<f64> {
        self.diameter
            .ok_or_else(|| Error::Domain("a diameter is required for this problem".into()))
    }

    pub fn trig(&self) -> &PTrig {
        &self.trig
    }

    pub fn pi_p(&self) -> f64 {
        self.trig.pi_p()
    }

    pub fn sqrt_abs_kappa(&self) -> f64 {
        self.kappa.abs().sqrt()
    }

    /// Prüfer frequency `α = (λ/(p-1))^{1/p}`.
    pub fn alpha_of_lambda(&self, lambda: f64) -> f64 {
        let p = self.p();
        (lambda / (p - 1.0)).powf(1.0 / p)
    }

    pub fn lambda_of_alpha(&self, alpha: f64) -> f64 {
        let p = self.p();
        (p - 1.0) * alpha.powf(p)
    }
}

/// Open interval, possibly unbounded.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn contains(&self, t: f64) -> bool {
        t > self.lo && t < self.hi
    }

    pub fn contains_closed(&self, t: f64) -> bool {
        t >= self.lo && t <= self.hi
    }
}

/// The four drift models.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelFamily {
    /// `τ₀ = cos(√κ t)`, positive curvature.
    Cos,
    /// `τ₁ = sinh(√-κ t)`.
    Sinh,
    /// `τ₂ = exp(√-κ t)`, constant drift.
    Exp,
    /// `τ₃ = cosh(√-κ t)`, the negative-curvature Neumann model.
    Cosh,
}

impl ModelFamily {
    pub const ALL: [ModelFamily; 4] = [ModelFamily::Cos, ModelFamily::Sinh, ModelFamily::Exp, ModelFamily::Cosh];

    pub fn index(self) -> usize {
        match self {
            ModelFamily::Cos => 0,
            ModelFamily::Sinh => 1,
            ModelFamily::Exp => 2,
            ModelFamily::Cosh => 3,
        }
    }

    pub fn from_index(i: usize) -> Result<Self> {
        ModelFamily::ALL
            .get(i)
            .copied()
            .ok_or_else(|| Error::Domain(format!("model family must be 0, 1, 2 or 3, got {i}")))
    }

    /// The family whose Neumann problem defines `λ_D` for this curvature sign.
    pub fn neumann_model(kappa: f64) -> Self {
        if kappa > 0.0 {
            ModelFamily::Cos
        } else {
            ModelFamily::Cosh
        }
    }

    pub fn check_curvature(self, params: &Params) -> Result<()> {
        let ok = match self {
            ModelFamily::Cos => params.kappa > 0.0,
            _ => params.kappa < 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Domain(format!(
                "family {} requires kappa {} 0, got kappa = {}",
                self.index(),
                if self == ModelFamily::Cos { ">" } else { "<" },
                params.kappa
            )))
        }
    }

    pub fn domain(self, params: &Params) -> Interval {
        match self {
            ModelFamily::Cos => {
                let edge = FRAC_PI_2 / params.kappa.sqrt();
                Interval { lo: -edge, hi: edge }
            }
            ModelFamily::Sinh => Interval { lo: 0.0, hi: f64::INFINITY },
            ModelFamily::Exp | ModelFamily::Cosh => Interval {
                lo: f64::NEG_INFINITY,
                hi: f64::INFINITY,
            },
        }
    }

    /// Left endpoint where the drift blows up like `-(n-1)/(t - a)`, if any.
    pub fn singular_start(self, params: &Params) -> Option<f64> {
        match self {
            ModelFamily::Cos => Some(self.domain(params).lo),
            ModelFamily::Sinh => Some(0.0),
            _ => None,
        }
    }

    pub fn tau(self, params: &Params, t: f64) -> f64 {
        let s = params.sqrt_abs_kappa();
        match self {
            ModelFamily::Cos => (s * t).cos(),
            ModelFamily::Sinh => (s * t).sinh(),
            ModelFamily::Exp => (s * t).exp(),
            ModelFamily::Cosh => (s * t).cosh(),
        }
    }

    /// `μ = τ^{n-1}`; `t` should lie in the closure of the family domain.
    pub fn weight_mu(self, params: &Params, t: f64) -> f64 {
        self.tau(params, t).max(0.0).powf(params.n - 1.0)
    }

    /// `T(t)`, checking that `t` lies strictly inside the family domain.
    pub fn drift(self, params: &Params, t: f64) -> Result<f64> {
        self.check_curvature(params)?;
        let dom = self.domain(params);
        if self.singular_start(params) == Some(t) || (self == ModelFamily::Cos && t == dom.hi) {
            return Err(Error::Singularity { family: self.index(), t });
        }
        if !dom.contains(t) {
            return Err(Error::Domain(format!(
                "t = {t} lies outside the domain ({}, {}) of family {}",
                dom.lo,
                dom.hi,
                self.index()
            )));
        }
        Ok(self.drift_unchecked(params.n, params.sqrt_abs_kappa(), t))
    }

    #[inline]
    pub(crate) fn drift_unchecked(self, n: f64, s: f64, t: f64) -> f64 {
        let c = (n - 1.0) * s;
        if c == 0.0 {
            return 0.0;
        }
        match self {
            ModelFamily::Cos => c * (s * t).tan(),
            ModelFamily::Sinh => -c / (s * t).tanh(),
            ModelFamily::Exp => -c,
            ModelFamily::Cosh => -c * (s * t).tanh(),
        }
    }
}

impl fmt::Display for ModelFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.index())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn params_validation() {
        assert!(Params::new(1.0, 2.0, 1.0).is_err());
        assert!(Params::new(2.0, 0.5, 1.0).is_err());
        assert!(Params::new(2.0, 2.0, 0.0).is_err());
        assert!(Params::new(2.0, 1.0, -1.0).is_ok());
        assert!(Params::new(2.0, 2.5, -1.0).is_ok());
        let pos = Params::new(2.0, 2.0, 1.0).unwrap();
        assert!(pos.clone().with_diameter(4.0).is_err());
        assert!(pos.clone().with_diameter(PI).is_ok());
        assert!(pos.clone().with_diameter(-1.0).is_err());
        assert!(Params::new(2.0, 2.0, -1.0).unwrap().with_diameter(40.0).is_ok());
    }

    #[test]
    fn alpha_lambda_round_trip() {
        let params = Params::new(3.0, 2.0, -1.0).unwrap();
        for lambda in [1e-3, 0.7, 4.0, 123.0] {
            let a = params.alpha_of_lambda(lambda);
            assert!((params.lambda_of_alpha(a) - lambda).abs() <= 4.0 * f64::EPSILON * lambda);
        }
    }

    #[test]
    fn drift_examples() {
        let pos = Params::new(2.0, 2.0, 1.0).unwrap();
        assert_eq!(ModelFamily::Cos.drift(&pos, 0.0).unwrap(), 0.0);
        assert!((ModelFamily::Cos.drift(&pos, PI / 4.0).unwrap() - 1.0).abs() < 1e-15);
        let neg = Params::new(2.0, 3.0, -1.0).unwrap();
        for t in [-5.0, 0.0, 2.5] {
            assert_eq!(ModelFamily::Exp.drift(&neg, t).unwrap(), -2.0);
        }
    }

    #[test]
    fn drift_domain_errors() {
        let pos = Params::new(2.0, 2.0, 1.0).unwrap();
        let neg = Params::new(2.0, 2.0, -1.0).unwrap();
        assert!(matches!(
            ModelFamily::Cos.drift(&pos, -FRAC_PI_2),
            Err(Error::Singularity { family: 0, .. })
        ));
        assert!(matches!(ModelFamily::Cos.drift(&pos, 2.0), Err(Error::Domain(_))));
        assert!(matches!(
            ModelFamily::Sinh.drift(&neg, 0.0),
            Err(Error::Singularity { family: 1, .. })
        ));
        assert!(matches!(ModelFamily::Sinh.drift(&neg, -1.0), Err(Error::Domain(_))));
        assert!(ModelFamily::Cosh.drift(&pos, 0.0).is_err());
        assert!(ModelFamily::Cos.drift(&neg, 0.0).is_err());
    }

    #[test]
    fn weight_examples() {
        let neg = Params::new(2.0, 2.0, -1.0).unwrap();
        assert_eq!(ModelFamily::Cosh.weight_mu(&neg, 0.0), 1.0);
        assert_eq!(ModelFamily::Sinh.weight_mu(&neg, 0.0), 0.0);
        let pos = Params::new(2.0, 3.0, 1.0).unwrap();
        assert_eq!(ModelFamily::Cos.weight_mu(&pos, 0.0), 1.0);
    }

    #[test]
    fn drift_is_minus_log_derivative_of_weight() {
        let h = 1e-6;
        for (family, kappa) in [
            (ModelFamily::Cos, 1.3),
            (ModelFamily::Sinh, -0.7),
            (ModelFamily::Exp, -0.7),
            (ModelFamily::Cosh, -2.0),
        ] {
            let params = Params::new(2.0, 3.5, kappa).unwrap();
            for t in [0.2, 0.5, 0.9] {
                let mu = |t| family.weight_mu(&params, t).ln();
                let fd = (mu(t + h) - mu(t - h)) / (2.0 * h);
                let drift = family.drift(&params, t).unwrap();
                assert!((drift + fd).abs() < 1e-7, "family {family} at t = {t}");
            }
        }
    }

    #[test]
    fn riccati_identity() {
        let h = 1e-5;
        for (family, kappa) in [
            (ModelFamily::Cos, 0.8),
            (ModelFamily::Sinh, -1.0),
            (ModelFamily::Exp, -1.5),
            (ModelFamily::Cosh, -0.3),
        ] {
            for n in [1.5, 2.0, 4.0] {
                let params = Params::new(2.0, n, kappa).unwrap();
                for t in [0.1, 0.4, 1.1] {
                    let drift = |t| family.drift(&params, t).unwrap();
                    let fd = (drift(t + h) - drift(t - h)) / (2.0 * h);
                    let rhs = drift(t).powi(2) / (n - 1.0) + (n - 1.0) * kappa;
                    assert!((fd - rhs).abs() < 1e-6 * (1.0 + rhs.abs()), "family {family}, n = {n}, t = {t}");
                }
            }
        }
    }

    #[test]
    fn signed_pow_examples() {
        assert_eq!(signed_pow(2.0, 2.0).unwrap(), 4.0);
        assert_eq!(signed_pow(-2.0, 2.0).unwrap(), -4.0);
        assert_eq!(signed_pow(0.0, 0.3).unwrap(), 0.0);
        assert!((signed_pow(-0.5, 0.5).unwrap() + 0.5f64.sqrt()).abs() < 1e-15);
        for x in [-3.5, -0.1, 0.25, 7.0] {
            assert_eq!(signed_pow(x, 1.0).unwrap(), x);
        }
        assert!(signed_pow(1.0, 0.0).is_err());
        assert!(signed_pow(1.0, -1.0).is_err());
    }

    mod props {
        use super::super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn signed_pow_is_odd(x in -1e3f64..1e3, q in 0.05f64..6.0) {
                prop_assert_eq!(spow(-x, q), -spow(x, q));
            }

            #[test]
            fn signed_pow_is_increasing(x in -1e3f64..1e3, dx in 1e-6f64..10.0, q in 0.05f64..6.0) {
                prop_assert!(spow(x + dx, q) > spow(x, q));
            }
        }
    }
}
