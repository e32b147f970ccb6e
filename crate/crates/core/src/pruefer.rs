//! Shooting for the model equation in Prüfer coordinates.
//!
//! With `α = (λ/(p-1))^{1/p}` the substitution `α w = e sin_p(φ)`,
//! `w' = e cos_p(φ)` turns the model equation into the decoupled system
//!
//! ```text
//! φ'          = α - T/(p-1) · cos_p^{(p-1)}(φ) · sin_p(φ)
//! (log e)'    = T/(p-1) · |cos_p(φ)|^p
//! ```
//!
//! started from `φ(a) = -π_p/2`, `e(a) = α`, i.e. `w(a) = -1`, `w'(a) = 0`.
//! The first critical point after `a` is the first time `φ` reaches
//! `π_p/2`. All integration happens in `(φ, log e)`; `(w, w')` are only
//! reconstructed afterwards.

use crate::error::{Error, Result};
use crate::model::{spow, ModelFamily, Params};
use crate::ode::{DormandPrince, Stop};

pub const DEFAULT_TOL: f64 = 1e-10;

/// Number of uniform intervals in a reconstructed profile.
pub const PROFILE_INTERVALS: usize = 1024;

/// Phase–amplitude state at one time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrueferState {
    pub t: f64,
    pub phi: f64,
    pub log_e: f64,
}

/// Right-hand side of the Prüfer system for one model and one `α`.
#[derive(Clone, Copy)]
pub(crate) struct PhaseSystem<'a> {
    params: &'a Params,
    family: ModelFamily,
    alpha: f64,
    n: f64,
    s: f64,
    inv_pm1: f64,
}

impl<'a> PhaseSystem<'a> {
    pub(crate) fn new(params: &'a Params, family: ModelFamily, alpha: f64) -> Self {
        PhaseSystem {
            params,
            family,
            alpha,
            n: params.n(),
            s: params.sqrt_abs_kappa(),
            inv_pm1: 1.0 / (params.p() - 1.0),
        }
    }

    #[inline]
    pub(crate) fn rhs(&self, t: f64, y: &[f64; 2]) -> [f64; 2] {
        let sc = self.params.trig().eval(y[0]);
        let drift = self.family.drift_unchecked(self.n, self.s, t) * self.inv_pm1;
        [self.alpha - drift * sc.cos_pm1 * sc.sin, drift * sc.cos_abs_p]
    }
}

/// What ends a shot.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Halt {
    /// Stop at the first time `φ = π_p/2`.
    FirstCritical,
    /// Integrate through to the end time regardless of the phase.
    EndTime,
}

/// An integrated Prüfer path.
#[derive(Debug, Clone)]
pub struct Trajectory {
    params: Params,
    family: ModelFamily,
    a: f64,
    lambda: f64,
    alpha: f64,
    tol: f64,
    start_offset: f64,
    samples: Vec<PrueferState>,
    reached_critical: bool,
}

impl Trajectory {
    pub fn params(&self) -> &Params {
        &self.params
    }

    pub fn family(&self) -> ModelFamily {
        self.family
    }

    /// Start of the initial value problem.
    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    /// Offset `ε` of a regularized start at a singular endpoint, zero otherwise.
    /// When positive, the first sample sits at `a + ε`.
    pub fn start_offset(&self) -> f64 {
        self.start_offset
    }

    /// Accepted integrator states, strictly increasing in `t`.
    pub fn samples(&self) -> &[PrueferState] {
        &self.samples
    }

    pub fn end(&self) -> PrueferState {
        *self.samples.last().expect("trajectory has at least one sample")
    }

    /// True if the phase reached `π_p/2`, i.e. a first critical point exists
    /// before the horizon.
    pub fn reached_critical(&self) -> bool {
        self.reached_critical
    }

    /// Interpolates the state at `t` by one exact integrator step from the
    /// preceding sample. Inside a regularized start, the leading-order
    /// singular solution is used.
    pub fn state_at(&self, t: f64) -> Result<PrueferState> {
        let first = self.samples[0];
        let last = self.end();
        if t < self.a || t > last.t {
            return Err(Error::Domain(format!(
                "t = {t} outside the integrated range [{}, {}]",
                self.a, last.t
            )));
        }
        if t < first.t {
            return Ok(regularized_state(&self.params, self.alpha, self.a, t - self.a));
        }
        let k = self.samples.partition_point(|s| s.t <= t) - 1;
        let base = self.samples[k];
        if base.t == t {
            return Ok(base);
        }
        let system = PhaseSystem::new(&self.params, self.family, self.alpha);
        let rhs = |t: f64, y: &[f64; 2]| system.rhs(t, y);
        let y0 = [base.phi, base.log_e];
        let k1 = rhs(base.t, &y0);
        let (y, _, _) = DormandPrince::new(self.tol).step(&rhs, base.t, &y0, &k1, t - base.t);
        Ok(PrueferState {
            t,
            phi: y[0],
            log_e: y[1],
        })
    }

    /// `(w, w')` at `t`.
    pub fn w_at(&self, t: f64) -> Result<(f64, f64)> {
        let st = self.state_at(t)?;
        Ok(to_w(&self.params, self.alpha, &st))
    }
}

fn to_w(params: &Params, alpha: f64, st: &PrueferState) -> (f64, f64) {
    let sc = params.trig().eval(st.phi);
    let e = st.log_e.exp();
    (e * sc.sin / alpha, e * sc.cos)
}

/// Leading-order solution near a start where the drift behaves like
/// `-(n-1)/(t-a)`: `φ ≈ -π_p/2 + α(t-a)/n`, with the matching amplitude
/// correction.
fn regularized_state(params: &Params, alpha: f64, a: f64, eps: f64) -> PrueferState {
    let n = params.n();
    let p = params.p();
    let q = p / (p - 1.0);
    let lift = (p - 1.0) * alpha * eps / n;
    PrueferState {
        t: a + eps,
        phi: -params.trig().half_pi_p() + alpha * eps / n,
        log_e: alpha.ln() - (n - 1.0) / (p - 1.0) * lift.powf(q) / q,
    }
}

fn length_scale(params: &Params, alpha: f64) -> f64 {
    (1.0 / params.sqrt_abs_kappa()).min(params.pi_p() / alpha)
}

/// Default start offset for a regularized singular start.
pub(crate) fn default_start_offset(params: &Params, alpha: f64, tol: f64) -> f64 {
    1e-8f64.max(tol.sqrt()) * length_scale(params, alpha)
}

/// Start specification for a shot.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Start {
    pub a: f64,
    pub phi: f64,
    pub log_e: f64,
    // > 0 for a regularized singular start
    pub offset: f64,
}

impl Start {
    /// `φ(a) = -π_p/2`, `e(a) = α`, regularized at a singular endpoint.
    pub(crate) fn neumann(params: &Params, family: ModelFamily, a: f64, alpha: f64, tol: f64) -> Self {
        Self::neumann_with_offset(params, family, a, alpha, default_start_offset(params, alpha, tol))
    }

    pub(crate) fn neumann_with_offset(params: &Params, family: ModelFamily, a: f64, alpha: f64, offset: f64) -> Self {
        let singular = params.n() > 1.0 && family.singular_start(params).is_some_and(|s| is_at(a, s, params));
        if singular {
            let st = regularized_state(params, alpha, a, offset);
            Start {
                a,
                phi: st.phi,
                log_e: st.log_e,
                offset,
            }
        } else {
            Start {
                a,
                phi: -params.trig().half_pi_p(),
                log_e: alpha.ln(),
                offset: 0.0,
            }
        }
    }
}

fn is_at(t: f64, point: f64, params: &Params) -> bool {
    (t - point).abs() <= 1e-12 * (1.0 / params.sqrt_abs_kappa()).max(1.0)
}

/// Validates `a` and the horizon for a family, returning the usable end time.
fn admissible_end(params: &Params, family: ModelFamily, a: f64, t_max: f64) -> Result<f64> {
    family.check_curvature(params)?;
    let dom = family.domain(params);
    if !dom.contains_closed(a) || (family == ModelFamily::Cos && is_at(a, dom.hi, params)) {
        return Err(Error::Domain(format!(
            "start a = {a} outside the closure of the domain ({}, {}) of family {}",
            dom.lo,
            dom.hi,
            family.index()
        )));
    }
    if !(t_max > a) {
        return Err(Error::Domain(format!("horizon {t_max} must exceed the start {a}")));
    }
    Ok(if family == ModelFamily::Cos {
        // stay off the right singularity of tan
        t_max.min(dom.hi - 1e-9 * (1.0 / params.sqrt_abs_kappa()))
    } else {
        t_max
    })
}

pub(crate) fn shoot(
    params: &Params,
    family: ModelFamily,
    start: Start,
    lambda: f64,
    t_end: f64,
    tol: f64,
    halt: Halt,
) -> Result<Trajectory> {
    shoot_with(PhaseSystem::new(params, family, params.alpha_of_lambda(lambda)), start, lambda, t_end, tol, halt)
}

pub(crate) fn shoot_with(
    system: PhaseSystem<'_>,
    start: Start,
    lambda: f64,
    t_end: f64,
    tol: f64,
    halt: Halt,
) -> Result<Trajectory> {
    let params = system.params;
    let alpha = system.alpha;
    let half_pi = params.trig().half_pi_p();
    let rhs = |t: f64, y: &[f64; 2]| system.rhs(t, y);
    let event = match halt {
        Halt::FirstCritical => Some(move |_t: f64, y: &[f64; 2]| y[0] - half_pi),
        Halt::EndTime => None,
    };
    // Steps approaching the turning point are limited to half the remaining
    // phase, with a floor so the boundary is still crossed in finite steps.
    let floor = 1e-3 * params.pi_p() / alpha;
    let cap = move |_t: f64, y: &[f64; 2], dy: &[f64; 2]| {
        let gap = half_pi - y[0];
        if gap > 0.0 && dy[0] > 0.0 {
            (0.5 * gap / dy[0]).max(floor)
        } else {
            f64::INFINITY
        }
    };
    let t0 = start.a + start.offset;
    let mut samples = Vec::with_capacity(256);
    let outcome = DormandPrince::new(tol).integrate(&rhs, t0, [start.phi, start.log_e], t_end, event, cap, |t, y| {
        samples.push(PrueferState {
            t,
            phi: y[0],
            log_e: y[1],
        })
    });
    match outcome {
        Ok(out) => {
            debug_assert!(samples.last().is_some_and(|s| s.t == out.t && s.phi == out.y[0]));
            Ok(Trajectory {
            params: params.clone(),
            family: system.family,
            a: start.a,
            lambda,
            alpha,
            tol,
            start_offset: start.offset,
            samples,
            reached_critical: out.stop == Stop::Event,
            })
        }
        Err(fail) => Err(Error::Integration {
            reason: fail.reason,
            last: PrueferState {
                t: fail.t,
                phi: fail.y[0],
                log_e: fail.y[1],
            },
        }),
    }
}

/// Integrates the model IVP from `a` until the phase reaches `π_p/2` or
/// `t_max`, whichever comes first.
///
/// Singular starts (the left endpoint of family 0, `a = 0` for family 1)
/// begin at `a + ε` on the leading-order singular solution.
pub fn integrate_pruefer(
    family: ModelFamily,
    params: &Params,
    a: f64,
    lambda: f64,
    t_max: f64,
    tol: f64,
) -> Result<Trajectory> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::Domain(format!("lambda must be positive, got {lambda}")));
    }
    if !(tol > 0.0) {
        return Err(Error::Domain(format!("tolerance must be positive, got {tol}")));
    }
    let t_end = admissible_end(params, family, a, t_max)?;
    let alpha = params.alpha_of_lambda(lambda);
    let start = Start::neumann(params, family, a, alpha, tol);
    shoot(params, family, start, lambda, t_end, tol, Halt::FirstCritical)
}

/// Default horizon `a + 50 π_p/α`.
pub fn default_horizon(params: &Params, a: f64, lambda: f64) -> f64 {
    a + 50.0 * params.pi_p() / params.alpha_of_lambda(lambda)
}

/// One reconstructed sample of the solution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfilePoint {
    pub t: f64,
    pub w: f64,
    pub w_prime: f64,
    pub phi: f64,
    pub log_e: f64,
}

/// The solution `w` between its start and first critical point.
#[derive(Debug, Clone)]
pub struct SolutionProfile {
    pub family: ModelFamily,
    pub a: f64,
    pub lambda: f64,
    pub alpha: f64,
    /// First critical point after `a`; infinite when not reached.
    pub b: f64,
    pub delta: f64,
    /// `w(b)`; NaN when not reached.
    pub m: f64,
    /// First zero of `w` in `(a, b)`, if the phase crossed zero.
    pub t0: Option<f64>,
    pub converged: bool,
    pub points: Vec<ProfilePoint>,
}

fn critical_values(traj: &Trajectory) -> (f64, f64) {
    let end = traj.end();
    (end.t, end.log_e.exp() / traj.alpha)
}

/// Reconstructs `w`, `w'` on a uniform grid over `[a, b]` and reports
/// `b`, `δ = b - a` and `m = w(b) = e(b)/α`.
pub fn reconstruct_profile(traj: &Trajectory) -> Result<SolutionProfile> {
    reconstruct_profile_with(traj, PROFILE_INTERVALS)
}

pub fn reconstruct_profile_with(traj: &Trajectory, intervals: usize) -> Result<SolutionProfile> {
    let params = traj.params();
    let alpha = traj.alpha;
    let converged = traj.reached_critical;
    let (b, m) = if converged {
        critical_values(traj)
    } else {
        (f64::INFINITY, f64::NAN)
    };

    let t_last = traj.end().t;
    let t0 = first_phase_zero(traj)?;
    let mut grid: Vec<f64> = (0..=intervals)
        .map(|i| traj.a + (t_last - traj.a) * i as f64 / intervals as f64)
        .collect();
    *grid.last_mut().unwrap() = t_last;
    if let Some(z) = t0 {
        let pos = grid.partition_point(|&t| t < z);
        if grid.get(pos) != Some(&z) {
            grid.insert(pos, z);
        }
    }
    let mut points = Vec::with_capacity(grid.len());
    for &t in &grid {
        let st = if t == traj.a {
            PrueferState {
                t,
                phi: -params.trig().half_pi_p(),
                log_e: alpha.ln(),
            }
        } else {
            traj.state_at(t)?
        };
        let (w, w_prime) = to_w(params, alpha, &st);
        points.push(ProfilePoint {
            t,
            w,
            w_prime,
            phi: st.phi,
            log_e: st.log_e,
        });
    }
    Ok(SolutionProfile {
        family: traj.family,
        a: traj.a,
        lambda: traj.lambda,
        alpha,
        b,
        delta: b - traj.a,
        m,
        t0,
        converged,
        points,
    })
}

/// Time where the phase first crosses zero, i.e. the first zero of `w`.
fn first_phase_zero(traj: &Trajectory) -> Result<Option<f64>> {
    let samples = traj.samples();
    let Some(k) = samples.iter().position(|s| s.phi >= 0.0) else {
        return Ok(None);
    };
    if k == 0 {
        return Ok(Some(samples[0].t));
    }
    let (mut lo, mut hi) = (samples[k - 1].t, samples[k].t);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if traj.state_at(mid)?.phi < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Some(0.5 * (lo + hi)))
}

/// Sampled values of the envelope function
///
/// ```text
/// E(s) = -exp(∫_{t0}^{s} w^{(p-1)} / (w')^{(p-1)} dt) · ∫_a^s w^{(p-1)} μ dt
/// ```
///
/// on the part of the profile grid where both integrals are finite.
#[derive(Debug, Clone)]
pub struct EnvelopeDiagnostic {
    pub t0: f64,
    /// `(s, E(s))` pairs, increasing in `s`.
    pub values: Vec<(f64, f64)>,
    /// Index into `values` of the sample at `t0`.
    pub t0_index: usize,
}

impl EnvelopeDiagnostic {
    /// Largest decrease before `t0` and largest increase after it, relative
    /// to `max |E|`. Both vanish for an envelope of the expected shape.
    pub fn shape_violations(&self) -> (f64, f64) {
        let scale = self.values.iter().fold(0.0f64, |m, v| m.max(v.1.abs())).max(f64::MIN_POSITIVE);
        let mut before = 0.0f64;
        let mut after = 0.0f64;
        for (i, pair) in self.values.windows(2).enumerate() {
            let step = pair[1].1 - pair[0].1;
            if i < self.t0_index {
                before = before.max(-step);
            } else {
                after = after.max(step);
            }
        }
        (before / scale, after / scale)
    }

    pub fn argmax(&self) -> f64 {
        self.values
            .iter()
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .map(|v| v.0)
            .unwrap_or(f64::NAN)
    }
}

/// Evaluates the envelope function by trapezoid sums on the profile grid.
///
/// The exponent integral diverges at both `a` and `b`, where `w' = 0`; it is
/// accumulated outward from `t0` and each side stops at the first
/// non-finite partial sum.
pub fn e_function(profile: &SolutionProfile, family: ModelFamily, params: &Params) -> Result<EnvelopeDiagnostic> {
    if !profile.converged {
        return Err(Error::State("envelope needs a profile that reaches its critical point".into()));
    }
    let t0 = profile
        .t0
        .ok_or_else(|| Error::State("profile has no zero of w before its critical point".into()))?;
    let pts = &profile.points;
    let i0 = pts
        .iter()
        .position(|pt| pt.t == t0)
        .ok_or_else(|| Error::State("zero of w is not on the profile grid".into()))?;
    let q = params.p() - 1.0;
    let ratio: Vec<f64> = pts.iter().map(|pt| spow(pt.w, q) / spow(pt.w_prime, q)).collect();

    let mut exponent = vec![f64::NAN; pts.len()];
    exponent[i0] = 0.0;
    for j in i0 + 1..pts.len() {
        let v = exponent[j - 1] + 0.5 * (pts[j].t - pts[j - 1].t) * (ratio[j] + ratio[j - 1]);
        if !v.is_finite() {
            break;
        }
        exponent[j] = v;
    }
    for j in (0..i0).rev() {
        let v = exponent[j + 1] - 0.5 * (pts[j + 1].t - pts[j].t) * (ratio[j] + ratio[j + 1]);
        if !v.is_finite() {
            break;
        }
        exponent[j] = v;
    }

    let mut mass = vec![0.0; pts.len()];
    let weighted: Vec<f64> = pts.iter().map(|pt| spow(pt.w, q) * family.weight_mu(params, pt.t)).collect();
    for j in 1..pts.len() {
        mass[j] = mass[j - 1] + 0.5 * (pts[j].t - pts[j - 1].t) * (weighted[j] + weighted[j - 1]);
    }

    let mut values = Vec::new();
    let mut t0_index = 0;
    for j in 0..pts.len() {
        let e = -exponent[j].exp() * mass[j];
        if exponent[j].is_finite() && e.is_finite() {
            if j == i0 {
                t0_index = values.len();
            }
            values.push((pts[j].t, e));
        }
    }
    Ok(EnvelopeDiagnostic { t0, values, t0_index })
}
