//! Eigenvalue-level solvers built on the Prüfer shot.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{ModelFamily, Params};
use crate::pruefer::{self, default_horizon, Halt, PhaseSystem, Start};

/// Most geometric bracket expansions before giving up.
pub const MAX_DOUBLINGS: usize = 60;

const MAX_ROOT_ITERATIONS: usize = 200;

/// First nonzero Neumann eigenvalue of the model on `[-D/2, D/2]`.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenResult {
    pub lambda: f64,
    pub alpha: f64,
    /// Final phase mismatch at the right end.
    pub residual: f64,
    pub iterations: usize,
    pub bracket: (f64, f64),
    pub family: ModelFamily,
    pub diameter: f64,
}

/// Integration tolerance used for a requested residual tolerance.
fn shot_tol(tol: f64) -> f64 {
    (1e-2 * tol).clamp(1e-13, 1e-6)
}

/// The symmetric Neumann shot for a fixed diameter.
struct NeumannShot<'a> {
    params: &'a Params,
    family: ModelFamily,
    half: f64,
    // right end is the singular point of the cos model
    singular_end: bool,
    int_tol: f64,
}

impl<'a> NeumannShot<'a> {
    fn new(params: &'a Params, family: ModelFamily, int_tol: f64) -> Result<Self> {
        let d = params.require_diameter()?;
        family.check_curvature(params)?;
        let half = 0.5 * d;
        let singular_end = family == ModelFamily::Cos && {
            let edge = family.domain(params).hi;
            half >= edge * (1.0 - 1e-12)
        };
        let half = if singular_end { family.domain(params).hi } else { half };
        if !matches!(family, ModelFamily::Cos | ModelFamily::Cosh) {
            return Err(Error::Domain(format!(
                "the Neumann problem on [-D/2, D/2] is posed for families 0 and 3, got {}",
                family.index()
            )));
        }
        Ok(NeumannShot {
            params,
            family,
            half,
            singular_end,
            int_tol,
        })
    }

    fn residual(&self, lambda: f64) -> Result<f64> {
        let params = self.params;
        let alpha = params.alpha_of_lambda(lambda);
        let start = Start::neumann(params, self.family, -self.half, alpha, self.int_tol);
        if self.singular_end {
            // The right end is a mirror image of the start, where the phase
            // of a non-eigenfunction blows up; the odd eigenfunction is
            // matched at the midpoint instead.
            let traj = pruefer::shoot(params, self.family, start, lambda, 0.0, self.int_tol, Halt::EndTime)?;
            return Ok(2.0 * traj.end().phi);
        }
        let traj = pruefer::shoot(params, self.family, start, lambda, self.half, self.int_tol, Halt::EndTime)?;
        Ok(traj.end().phi - params.trig().half_pi_p())
    }
}

/// `g(λ) = φ_λ(D/2) - π_p/2` for a shot from `φ(-D/2) = -π_p/2`.
pub fn neumann_phase_residual(params: &Params, family: ModelFamily, lambda: f64) -> Result<f64> {
    neumann_phase_residual_with(params, family, lambda, pruefer::DEFAULT_TOL)
}

pub fn neumann_phase_residual_with(params: &Params, family: ModelFamily, lambda: f64, tol: f64) -> Result<f64> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::Domain(format!("lambda must be positive, got {lambda}")));
    }
    NeumannShot::new(params, family, shot_tol(tol))?.residual(lambda)
}

/// Solves the Neumann problem of the curvature sign's model family on
/// `[-D/2, D/2]` for its first nonzero eigenvalue.
///
/// `g` is increasing in `λ`; a bracket is grown geometrically from
/// `(p-1)(π_p/(2D))^p/4` and refined by Illinois false position in `α`,
/// where `g` is close to linear.
#[allow(non_snake_case)]
pub fn lambda_D(params: &Params, tol: f64) -> Result<EigenResult> {
    if !(tol > 0.0) {
        return Err(Error::Domain(format!("tolerance must be positive, got {tol}")));
    }
    let d = params.require_diameter()?;
    let family = ModelFamily::neumann_model(params.kappa());
    let shot = NeumannShot::new(params, family, shot_tol(tol))?;
    let p = params.p();

    let mut lo = (p - 1.0) * (params.pi_p() / (2.0 * d)).powf(p) / 4.0;
    let mut g_lo = shot.residual(lo)?;
    let mut doublings = 0;
    while g_lo >= 0.0 {
        if doublings == MAX_DOUBLINGS {
            return Err(Error::BracketNotFound { doublings });
        }
        lo *= 0.5;
        g_lo = shot.residual(lo)?;
        doublings += 1;
    }
    let mut hi = 2.0 * lo;
    let mut g_hi = shot.residual(hi)?;
    doublings = 0;
    while g_hi <= 0.0 {
        if doublings == MAX_DOUBLINGS {
            return Err(Error::BracketNotFound { doublings });
        }
        lo = hi;
        g_lo = g_hi;
        hi *= 2.0;
        g_hi = shot.residual(hi)?;
        doublings += 1;
    }

    let (mut a_lo, mut a_hi) = (params.alpha_of_lambda(lo), params.alpha_of_lambda(hi));
    let mut side = 0i8;
    for it in 1..=MAX_ROOT_ITERATIONS {
        let mut a = (a_lo * g_hi - a_hi * g_lo) / (g_hi - g_lo);
        if !(a > a_lo && a < a_hi) {
            a = 0.5 * (a_lo + a_hi);
        }
        let lambda = params.lambda_of_alpha(a);
        let g = shot.residual(lambda)?;
        let collapsed = a_hi - a_lo <= 4.0 * f64::EPSILON * a_hi;
        if g.abs() <= tol || collapsed {
            if g.abs() > tol {
                return Err(Error::NonConvergence {
                    what: "neumann phase residual",
                    iterations: it,
                });
            }
            return Ok(EigenResult {
                lambda,
                alpha: a,
                residual: g,
                iterations: it,
                bracket: (params.lambda_of_alpha(a_lo), params.lambda_of_alpha(a_hi)),
                family,
                diameter: d,
            });
        }
        if g < 0.0 {
            a_lo = a;
            g_lo = g;
            if side == -1 {
                g_hi *= 0.5;
            }
            side = -1;
        } else {
            a_hi = a;
            g_hi = g;
            if side == 1 {
                g_lo *= 0.5;
            }
            side = 1;
        }
    }
    Err(Error::NonConvergence {
        what: "neumann phase residual",
        iterations: MAX_ROOT_ITERATIONS,
    })
}

/// Start radius of the odd model solution: `ā` for family 3, `â` for family 0.
#[derive(Debug, Clone, PartialEq)]
pub struct OddSolutionRadius {
    pub a_bar: f64,
    pub family: ModelFamily,
    pub alpha: f64,
}

impl OddSolutionRadius {
    /// `max |w(t) + w(-t)|` over `n_points` uniform samples of the solution
    /// started at `-ā`.
    pub fn oddness_defect(&self, params: &Params, n_points: usize, tol: f64) -> Result<f64> {
        let lambda = params.lambda_of_alpha(self.alpha);
        let traj = pruefer::integrate_pruefer(self.family, params, -self.a_bar, lambda, self.a_bar, tol)?;
        let mut worst = 0.0f64;
        let reach = traj.end().t.min(self.a_bar);
        for i in 0..=n_points {
            let t = (reach * i as f64 / n_points as f64).min(reach);
            let (w_right, _) = traj.w_at(t)?;
            let (w_left, _) = traj.w_at(-t)?;
            worst = worst.max((w_right + w_left).abs());
        }
        Ok(worst)
    }
}

/// Integrates from `φ(0) = 0` until `φ = π_p/2`.
pub fn odd_solution_radius(family: ModelFamily, params: &Params, alpha: f64) -> Result<OddSolutionRadius> {
    odd_solution_radius_with(family, params, alpha, pruefer::DEFAULT_TOL)
}

pub fn odd_solution_radius_with(family: ModelFamily, params: &Params, alpha: f64, tol: f64) -> Result<OddSolutionRadius> {
    if !matches!(family, ModelFamily::Cos | ModelFamily::Cosh) {
        return Err(Error::Domain(format!(
            "odd solutions exist for families 0 and 3, got {}",
            family.index()
        )));
    }
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::Domain(format!("alpha must be positive, got {alpha}")));
    }
    family.check_curvature(params)?;
    let lambda = params.lambda_of_alpha(alpha);
    let t_end = match family {
        // φ' ≥ α on the way up, so the radius is at most π_p/(2α)
        ModelFamily::Cosh => params.pi_p() / alpha,
        _ => family.domain(params).hi * (1.0 - 1e-10),
    };
    let start = Start {
        a: 0.0,
        phi: 0.0,
        log_e: 0.0,
        offset: 0.0,
    };
    let traj = pruefer::shoot(params, family, start, lambda, t_end, tol, Halt::FirstCritical)?;
    if !traj.reached_critical() {
        return match family {
            ModelFamily::Cos => Err(Error::BelowLambda0 { t: traj.end().t }),
            _ => Err(Error::NonConvergence {
                what: "odd solution radius",
                iterations: traj.samples().len(),
            }),
        };
    }
    Ok(OddSolutionRadius {
        a_bar: traj.end().t,
        family,
        alpha,
    })
}

/// One sample of the maximum map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaxMapEntry {
    pub a: f64,
    /// `w(b)`; NaN when no critical point was reached.
    pub m: f64,
    pub delta: f64,
    pub converged: bool,
}

/// `a ↦ m(i, a)` over a list of starts.
#[derive(Debug, Clone)]
pub struct MaxMap {
    pub family: ModelFamily,
    pub lambda: f64,
    pub entries: Vec<MaxMapEntry>,
    /// The translation-invariant value of the exp model, for `κ < 0`.
    pub m2: Option<f64>,
}

impl MaxMap {
    pub fn unconverged(&self) -> impl Iterator<Item = &MaxMapEntry> {
        self.entries.iter().filter(|e| !e.converged)
    }
}

fn profile_endpoint(family: ModelFamily, params: &Params, a: f64, lambda: f64, tol: f64) -> Result<MaxMapEntry> {
    let traj = pruefer::integrate_pruefer(family, params, a, lambda, default_horizon(params, a, lambda), tol)?;
    let prof = pruefer::reconstruct_profile_with(&traj, 1)?;
    Ok(MaxMapEntry {
        a,
        m: prof.m,
        delta: prof.delta,
        converged: prof.converged,
    })
}

/// Evaluates `m(i, a)` for each start, concurrently, in input order.
pub fn max_map(family: ModelFamily, params: &Params, lambda: f64, a_samples: &[f64]) -> Result<MaxMap> {
    max_map_with(family, params, lambda, a_samples, pruefer::DEFAULT_TOL)
}

pub fn max_map_with(family: ModelFamily, params: &Params, lambda: f64, a_samples: &[f64], tol: f64) -> Result<MaxMap> {
    let entries = a_samples
        .par_iter()
        .map(|&a| profile_endpoint(family, params, a, lambda, tol))
        .collect::<Result<Vec<_>>>()?;
    let m2 = if params.kappa() < 0.0 {
        Some(profile_endpoint(ModelFamily::Exp, params, 0.0, lambda, tol)?.m)
    } else {
        None
    };
    Ok(MaxMap {
        family,
        lambda,
        entries,
        m2,
    })
}

/// Verdict of the oscillation detector at one `α`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Oscillation {
    /// Every sampled start reaches a critical point before the horizon.
    Finite,
    /// Some start has its phase settle below zero.
    Stalled,
    Inconclusive,
}

/// Threshold `ᾱ` between stalled and oscillating family-3 solutions.
#[derive(Debug, Clone, PartialEq)]
pub struct CriticalAlpha {
    pub alpha_bar: f64,
    pub bracket: (f64, f64),
    pub width: f64,
    pub horizon: f64,
}

/// Default starts `{0, 1, 2, 5, 10, 20}/√-κ` for the detector.
pub fn detector_starts(params: &Params) -> Vec<f64> {
    let scale = 1.0 / params.sqrt_abs_kappa();
    [0.0, 1.0, 2.0, 5.0, 10.0, 20.0].iter().map(|k| k * scale).collect()
}

/// Default detector horizon `100/√-κ`.
pub fn default_detector_horizon(params: &Params) -> f64 {
    100.0 / params.sqrt_abs_kappa()
}

/// Runs family 3 from each start for `horizon` and classifies `α`.
pub fn classify_alpha(params: &Params, alpha: f64, starts: &[f64], horizon: f64) -> Result<Oscillation> {
    ModelFamily::Cosh.check_curvature(params)?;
    let lambda = params.lambda_of_alpha(alpha);
    let verdicts = starts
        .par_iter()
        .map(|&a| -> Result<Oscillation> {
            let traj = pruefer::integrate_pruefer(ModelFamily::Cosh, params, a, lambda, a + horizon, 1e-10)?;
            if traj.reached_critical() {
                return Ok(Oscillation::Finite);
            }
            let end = traj.end();
            let speed = PhaseSystem::new(params, ModelFamily::Cosh, alpha).rhs(end.t, &[end.phi, end.log_e])[0];
            if end.phi < 0.0 && speed.abs() <= 0.1 * alpha {
                Ok(Oscillation::Stalled)
            } else {
                Ok(Oscillation::Inconclusive)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(if verdicts.contains(&Oscillation::Stalled) {
        Oscillation::Stalled
    } else if verdicts.iter().all(|v| *v == Oscillation::Finite) {
        Oscillation::Finite
    } else {
        Oscillation::Inconclusive
    })
}

/// Locates `ᾱ` by bisection to an absolute bracket width `tol`.
pub fn critical_alpha(params: &Params, horizon: f64, tol: f64) -> Result<CriticalAlpha> {
    if params.kappa() >= 0.0 {
        return Err(Error::Domain("the oscillation threshold is defined for kappa < 0".into()));
    }
    if !(horizon > 0.0 && tol > 0.0) {
        return Err(Error::Domain(format!(
            "horizon and tolerance must be positive, got {horizon} and {tol}"
        )));
    }
    let starts = detector_starts(params);
    // Near the threshold the phase lingers in a bottleneck, so an
    // inconclusive run is retried with longer horizons.
    let classify = |alpha: f64| -> Result<Oscillation> {
        let mut h = horizon;
        for _ in 0..4 {
            match classify_alpha(params, alpha, &starts, h)? {
                Oscillation::Inconclusive => h *= 2.0,
                v => return Ok(v),
            }
        }
        Err(Error::Inconclusive(format!(
            "alpha = {alpha}: a start neither reached a critical point nor stalled within horizon {h}"
        )))
    };
    let mut guess = params.sqrt_abs_kappa();
    let (mut lo, mut hi);
    let mut expansions = 0;
    if classify(guess)? == Oscillation::Finite {
        hi = guess;
        loop {
            guess *= 0.5;
            if classify(guess)? == Oscillation::Stalled {
                lo = guess;
                break;
            }
            hi = guess;
            expansions += 1;
            if expansions == MAX_DOUBLINGS {
                return Err(Error::BracketNotFound { doublings: expansions });
            }
        }
    } else {
        lo = guess;
        loop {
            guess *= 2.0;
            if classify(guess)? == Oscillation::Finite {
                hi = guess;
                break;
            }
            lo = guess;
            expansions += 1;
            if expansions == MAX_DOUBLINGS {
                return Err(Error::BracketNotFound { doublings: expansions });
            }
        }
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if classify(mid)? == Oscillation::Finite {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(CriticalAlpha {
        alpha_bar: 0.5 * (lo + hi),
        bracket: (lo, hi),
        width: hi - lo,
        horizon,
    })
}

/// Smallest first-critical-point distance over all starts: `2ā` for
/// `κ < 0`, `2â` for `κ > 0`.
pub fn min_diameter(params: &Params, lambda: f64) -> Result<f64> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::Domain(format!("lambda must be positive, got {lambda}")));
    }
    let family = ModelFamily::neumann_model(params.kappa());
    Ok(2.0 * odd_solution_radius(family, params, params.alpha_of_lambda(lambda))?.a_bar)
}

/// `λ_D` along an increasing diameter grid.
#[derive(Debug, Clone)]
pub struct DiameterTable {
    pub rows: Vec<EigenResult>,
    /// Indices `i` where `λ(D_i) ≥ λ(D_{i-1})`.
    pub violations: Vec<usize>,
}

impl DiameterTable {
    pub fn strictly_decreasing(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn lambda_of_diameter_table(params: &Params, d_grid: &[f64], tol: f64) -> Result<DiameterTable> {
    if d_grid.is_empty() {
        return Err(Error::Domain("diameter grid is empty".into()));
    }
    if d_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Domain("diameter grid must be strictly increasing".into()));
    }
    let rows = d_grid
        .par_iter()
        .map(|&d| lambda_D(&params.clone().with_diameter(d)?, tol))
        .collect::<Result<Vec<_>>>()?;
    let violations = (1..rows.len()).filter(|&i| rows[i].lambda >= rows[i - 1].lambda).collect();
    Ok(DiameterTable { rows, violations })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn params(p: f64, n: f64, kappa: f64, d: f64) -> Params {
        Params::new(p, n, kappa).unwrap().with_diameter(d).unwrap()
    }

    fn closed_form_alpha_bar(p: &Params) -> f64 {
        (p.n() - 1.0) * p.sqrt_abs_kappa() / (p.p() * (p.p() - 1.0).powf(1.0 / p.p()))
    }

    #[test]
    fn flat_limit_matches_interval() {
        for kappa in [1e-8, -1e-8] {
            let r = lambda_D(&params(2.0, 2.0, kappa, std::f64::consts::PI), 1e-10).unwrap();
            assert!((r.lambda - 1.0).abs() < 1e-3);
            let q = params(3.0, 2.0, kappa, 1.0);
            let r = lambda_D(&q, 1e-10).unwrap();
            let expected = 2.0 * q.pi_p().powi(3);
            assert!((r.lambda / expected - 1.0).abs() < 1e-3);
        }
    }

    #[test]
    fn result_satisfies_contract() {
        let q = params(2.5, 3.0, -1.0, 1.5);
        let r = lambda_D(&q, 1e-10).unwrap();
        assert!(r.residual.abs() <= 1e-10);
        assert!(r.bracket.0 <= r.lambda && r.lambda <= r.bracket.1);
        assert!((r.alpha - q.alpha_of_lambda(r.lambda)).abs() < 1e-14 * r.alpha);
        assert!(neumann_phase_residual(&q, r.family, 0.5 * r.lambda).unwrap() < 0.0);
        assert!(neumann_phase_residual(&q, r.family, 2.0 * r.lambda).unwrap() > 0.0);
    }

    #[test]
    fn full_round_sphere() {
        // first nonzero eigenvalue of the round 3-sphere
        let q = params(2.0, 3.0, 1.0, std::f64::consts::PI);
        let r = lambda_D(&q, 1e-10).unwrap();
        assert!((r.lambda - 3.0).abs() < 1e-6, "{}", r.lambda);
        // Legendre: l(l+1) with l = 1 on the 2-sphere
        let q = params(2.0, 2.0, 1.0, std::f64::consts::PI);
        assert!((lambda_D(&q, 1e-10).unwrap().lambda - 2.0).abs() < 1e-6);
    }

    #[test]
    fn lambda_d_errors() {
        assert!(Params::new(2.0, 2.0, 1.0).unwrap().with_diameter(4.0).unwrap_err().is_domain());
        let no_d = Params::new(2.0, 2.0, -1.0).unwrap();
        assert!(lambda_D(&no_d, 1e-10).is_err());
        assert!(lambda_D(&params(2.0, 2.0, -1.0, 1.0), 0.0).is_err());
    }

    #[test]
    fn odd_radius_flat_and_oddness() {
        let q = Params::new(2.0, 2.0, -1e-12).unwrap();
        let r = odd_solution_radius(ModelFamily::Cosh, &q, 1.7).unwrap();
        assert!((r.a_bar - q.pi_p() / (2.0 * 1.7)).abs() < 1e-6);

        let q = Params::new(2.0, 2.0, -1.0).unwrap();
        let r = odd_solution_radius(ModelFamily::Cosh, &q, 2.0).unwrap();
        assert!(r.oddness_defect(&q, 200, 1e-11).unwrap() < 1e-8);
    }

    #[test]
    fn odd_radius_sphere_cases() {
        let q = Params::new(2.0, 2.0, 1.0).unwrap();
        let r = odd_solution_radius(ModelFamily::Cos, &q, q.alpha_of_lambda(2.5)).unwrap();
        assert!(r.a_bar < std::f64::consts::FRAC_PI_2);
        // λ₀ = 2 on this model, so below it the phase stalls
        let err = odd_solution_radius(ModelFamily::Cos, &q, q.alpha_of_lambda(1.5)).unwrap_err();
        assert!(matches!(err, Error::BelowLambda0 { .. }));
        assert!(odd_solution_radius(ModelFamily::Exp, &q, 1.0).is_err());
    }

    #[test]
    fn exp_model_max_is_translation_invariant() {
        let q = Params::new(2.0, 3.0, -1.0).unwrap();
        let map = max_map(ModelFamily::Exp, &q, 4.0, &[-3.0, -1.0, 0.0, 2.5, 7.0]).unwrap();
        let m2 = map.m2.unwrap();
        for e in &map.entries {
            assert!(e.converged);
            assert!((e.m - m2).abs() < 1e-8);
        }
        assert_eq!(map.unconverged().count(), 0);
    }

    #[test]
    fn oscillation_detector_brackets_threshold() {
        let q = Params::new(2.0, 2.0, -1.0).unwrap();
        let starts = detector_starts(&q);
        let h = default_detector_horizon(&q);
        let est = closed_form_alpha_bar(&q);
        assert_eq!(classify_alpha(&q, 2.0 * est, &starts, h).unwrap(), Oscillation::Finite);
        assert_eq!(classify_alpha(&q, 0.5 * est, &starts, h).unwrap(), Oscillation::Stalled);
        let crit = critical_alpha(&q, h, 1e-4).unwrap();
        assert!(crit.width <= 1e-4);
        assert!((crit.alpha_bar / est - 1.0).abs() < 1e-2, "{} vs {est}", crit.alpha_bar);
        assert!(critical_alpha(&Params::new(2.0, 2.0, 1.0).unwrap(), 10.0, 1e-3).is_err());
    }

    #[test]
    fn diameter_table() {
        let q = Params::new(2.0, 2.0, -1.0).unwrap();
        let t = lambda_of_diameter_table(&q, &[0.5, 1.0, 2.0, 4.0], 1e-10).unwrap();
        assert!(t.strictly_decreasing());
        assert_eq!(lambda_of_diameter_table(&q, &[1.0], 1e-10).unwrap().rows.len(), 1);
        assert!(lambda_of_diameter_table(&q, &[], 1e-10).is_err());
        assert!(lambda_of_diameter_table(&q, &[2.0, 1.0], 1e-10).is_err());

        let flat = Params::new(2.5, 2.0, -1e-8).unwrap();
        let t = lambda_of_diameter_table(&flat, &[1.0, 2.0], 1e-10).unwrap();
        let ratio = t.rows[0].lambda / t.rows[1].lambda;
        assert!((ratio / 2f64.powf(2.5) - 1.0).abs() < 1e-3);
    }

    #[test]
    fn min_diameter_against_flat_and_models() {
        let flat = Params::new(3.0, 2.0, -1e-12).unwrap();
        let lambda = 5.0;
        let d = min_diameter(&flat, lambda).unwrap();
        assert!((d - flat.pi_p() / flat.alpha_of_lambda(lambda)).abs() < 1e-6);

        let q = Params::new(2.0, 2.0, -1.0).unwrap();
        let alpha = 2.0;
        let lambda = q.lambda_of_alpha(alpha);
        let d = min_diameter(&q, lambda).unwrap();
        assert!(d < q.pi_p() / alpha);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(20))]

        #[test]
        fn phase_residual_increases(
            p in 1.3f64..4.0,
            n in 1.0f64..4.0,
            kappa in prop_oneof![-2.0f64..-0.1, 0.1f64..2.0],
            frac in 0.1f64..0.95,
        ) {
            let base = Params::new(p, n, kappa).unwrap();
            let d = if kappa > 0.0 { frac * std::f64::consts::PI / kappa.sqrt() } else { 4.0 * frac };
            let q = base.with_diameter(d).unwrap();
            let family = ModelFamily::neumann_model(kappa);
            let mut prev = f64::NEG_INFINITY;
            for k in 0..12 {
                let lambda = 0.05 * 2f64.powi(k);
                let g = neumann_phase_residual(&q, family, lambda).unwrap();
                prop_assert!(g > prev);
                prev = g;
            }
        }
    }
}
