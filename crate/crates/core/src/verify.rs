//! Property suites behind the `verify` command.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::{ModelFamily, Params};
use crate::oracle::{fd_eigenvalue_p2, rayleigh_minimize_p, warped_p2_eigenvalue, Warp, WarpedMesh, WeightedGrid};
use crate::ptrig::{pi_p, pi_p_quadrature, PExponent, PTrig};
use crate::pruefer::{e_function, integrate_pruefer, reconstruct_profile, reconstruct_profile_with};
use crate::spectrum::{lambda_D, lambda_of_diameter_table, neumann_phase_residual, odd_solution_radius};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Suite {
    Ptrig,
    Model,
    Pruefer,
    Spectrum,
    Oracle,
}

impl Suite {
    pub const ALL: [Suite; 5] = [Suite::Ptrig, Suite::Model, Suite::Pruefer, Suite::Spectrum, Suite::Oracle];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Ptrig => "ptrig",
            Suite::Model => "model",
            Suite::Pruefer => "pruefer",
            Suite::Spectrum => "spectrum",
            Suite::Oracle => "oracle",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|suite| suite.name() == s)
            .ok_or_else(|| Error::Domain(format!("unknown suite '{s}' (expected ptrig, model, pruefer, spectrum or oracle)")))
    }
}

/// Deliberate defects used to confirm that the suites can fail.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mutation {
    /// Flip the sign of the cosh-model drift.
    FlipCoshDrift,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub suite: Suite,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

type Check = fn(Option<Mutation>) -> Result<(bool, String)>;

fn checks(suite: Suite) -> &'static [(&'static str, Check)] {
    match suite {
        Suite::Ptrig => &[
            ("pythagorean identity", ptrig_identity),
            ("pi_p closed form vs quadrature", ptrig_pi),
            ("sin_p odd and 2pi_p periodic", ptrig_symmetry),
        ],
        Suite::Model => &[
            ("riccati drift identity", riccati_identity),
            ("drift is -(log mu)'", drift_log_derivative),
        ],
        Suite::Pruefer => &[
            ("ode residual second order", ode_residual),
            ("zero drift phase", zero_drift),
            ("exp model amplitude nonincreasing", amplitude_law),
        ],
        Suite::Spectrum => &[
            ("g monotone in lambda", g_monotone),
            ("odd solution", oddness),
            ("delta(1,a), delta(2,a) > pi_p/alpha", delta_lower_bounds),
            ("delta(3,a) >= 2 a_bar, delta(3,-a_bar) < pi_p/alpha", delta_cosh_minimum),
            ("lambda_D decreasing in D", lambda_decreasing),
            ("E increasing then decreasing", envelope_shape),
        ],
        Suite::Oracle => &[
            ("finite differences vs shooting", fd_agreement),
            ("rayleigh upper bound", rayleigh_bound),
            ("warped cylinder vs shooting", warped_agreement),
        ],
    }
}

/// Runs the requested suites in order.
pub fn run(suites: &[Suite], mutation: Option<Mutation>) -> Vec<CheckOutcome> {
    let mut out = Vec::new();
    for &suite in suites {
        for (name, check) in checks(suite) {
            let (passed, detail) = match check(mutation) {
                Ok(r) => r,
                Err(e) => (false, format!("error: {e}")),
            };
            out.push(CheckOutcome {
                suite,
                name,
                passed,
                detail,
            });
        }
    }
    out
}

fn verdict(worst: f64, limit: f64, what: &str) -> (bool, String) {
    (worst < limit, format!("{what} {worst:.3e} (limit {limit:.0e})"))
}

fn ptrig_identity(_: Option<Mutation>) -> Result<(bool, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let p = rng.random_range(1.0f64..10.0).max(1.0 + 1e-6);
        let trig = PTrig::new(PExponent::new(p)?);
        let t = rng.random_range(-4.0..4.0) * trig.pi_p();
        let sc = trig.eval(t);
        worst = worst.max((sc.sin.abs().powf(p) + sc.cos.abs().powf(p) - 1.0).abs());
    }
    Ok(verdict(worst, 1e-10, "max defect"))
}

fn ptrig_pi(_: Option<Mutation>) -> Result<(bool, String)> {
    let mut worst = 0.0f64;
    for p in [1.1, 1.5, 2.0, 3.0, 7.0] {
        let e = PExponent::new(p)?;
        worst = worst.max((pi_p(e) - pi_p_quadrature(e)?).abs() / pi_p(e));
    }
    Ok(verdict(worst, 1e-10, "max relative gap"))
}

fn ptrig_symmetry(_: Option<Mutation>) -> Result<(bool, String)> {
    let mut worst = 0.0f64;
    for p in [1.3, 2.0, 4.5] {
        let trig = PTrig::new(PExponent::new(p)?);
        for k in 0..50 {
            let t = 0.137 * k as f64;
            worst = worst.max((trig.sin(-t) + trig.sin(t)).abs());
            worst = worst.max((trig.sin(t + 2.0 * trig.pi_p()) - trig.sin(t)).abs());
        }
    }
    Ok(verdict(worst, 1e-12, "max defect"))
}

fn drift_with(mutation: Option<Mutation>, family: ModelFamily, params: &Params, t: f64) -> Result<f64> {
    let d = family.drift(params, t)?;
    Ok(match (mutation, family) {
        (Some(Mutation::FlipCoshDrift), ModelFamily::Cosh) => -d,
        _ => d,
    })
}

fn riccati_identity(mutation: Option<Mutation>) -> Result<(bool, String)> {
    let h = 1e-5;
    let mut worst = 0.0f64;
    for (family, kappa) in [
        (ModelFamily::Cos, 0.8),
        (ModelFamily::Sinh, -1.0),
        (ModelFamily::Exp, -1.5),
        (ModelFamily::Cosh, -0.3),
    ] {
        for n in [1.5, 2.0, 4.0] {
            let params = Params::new(2.0, n, kappa)?;
            for t in [0.1, 0.4, 1.1] {
                let fd = (drift_with(mutation, family, &params, t + h)? - drift_with(mutation, family, &params, t - h)?) / (2.0 * h);
                let rhs = drift_with(mutation, family, &params, t)?.powi(2) / (n - 1.0) + (n - 1.0) * kappa;
                worst = worst.max((fd - rhs).abs() / (1.0 + rhs.abs()));
            }
        }
    }
    Ok(verdict(worst, 1e-6, "max relative defect"))
}

fn drift_log_derivative(mutation: Option<Mutation>) -> Result<(bool, String)> {
    let h = 1e-6;
    let mut worst = 0.0f64;
    for (family, kappa) in [
        (ModelFamily::Cos, 1.3),
        (ModelFamily::Sinh, -0.7),
        (ModelFamily::Exp, -0.7),
        (ModelFamily::Cosh, -2.0),
    ] {
        let params = Params::new(2.0, 3.5, kappa)?;
        for t in [0.2, 0.5, 0.9] {
            let log_mu = |t| family.weight_mu(&params, t).ln();
            let fd = (log_mu(t + h) - log_mu(t - h)) / (2.0 * h);
            worst = worst.max((drift_with(mutation, family, &params, t)? + fd).abs());
        }
    }
    Ok(verdict(worst, 1e-7, "max defect"))
}

fn ode_residual(_: Option<Mutation>) -> Result<(bool, String)> {
    let params = Params::new(2.0, 3.0, -1.0)?;
    let lambda = 6.0;
    let traj = integrate_pruefer(ModelFamily::Cosh, &params, -0.7, lambda, 10.0, 1e-12)?;
    let mut residuals = Vec::new();
    for intervals in [256, 512, 1024] {
        let profile = reconstruct_profile_with(&traj, intervals)?;
        let pts = &profile.points;
        let mut worst = 0.0f64;
        for k in 1..pts.len() - 1 {
            let (left, right) = (pts[k].t - pts[k - 1].t, pts[k + 1].t - pts[k].t);
            if (left - right).abs() > 1e-9 * right {
                continue;
            }
            let deriv = (pts[k + 1].w_prime - pts[k - 1].w_prime) / (left + right);
            let drift = ModelFamily::Cosh.drift(&params, pts[k].t)?;
            worst = worst.max((deriv - drift * pts[k].w_prime + lambda * pts[k].w).abs());
        }
        residuals.push(worst);
    }
    let order = (residuals[1] / residuals[2]).log2();
    Ok((order > 1.9, format!("residuals {:.2e} {:.2e} {:.2e}, observed order {order:.3}", residuals[0], residuals[1], residuals[2])))
}

fn zero_drift(_: Option<Mutation>) -> Result<(bool, String)> {
    let params = Params::new(2.7, 2.0, -1e-16)?;
    let traj = integrate_pruefer(ModelFamily::Exp, &params, 0.0, 3.0, 100.0, 1e-10)?;
    let profile = reconstruct_profile(&traj)?;
    let worst = (profile.delta - params.pi_p() / profile.alpha).abs().max((profile.m - 1.0).abs());
    Ok(verdict(worst, 1e-6, "max deviation of delta, m"))
}

fn amplitude_law(_: Option<Mutation>) -> Result<(bool, String)> {
    let params = Params::new(1.7, 3.0, -2.0)?;
    let traj = integrate_pruefer(ModelFamily::Exp, &params, 1.0, 5.0, 30.0, 1e-10)?;
    let worst = traj.samples().windows(2).fold(0.0f64, |m, w| m.max(w[1].log_e - w[0].log_e));
    Ok(verdict(worst, 1e-14, "largest increase of log e"))
}

fn g_monotone(_: Option<Mutation>) -> Result<(bool, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut bad = 0;
    for _ in 0..20 {
        let p = rng.random_range(1.3..4.0);
        let n = rng.random_range(1.0..4.0);
        let kappa: f64 = if rng.random_bool(0.5) { rng.random_range(0.1..2.0) } else { -rng.random_range(0.1..2.0) };
        let frac = rng.random_range(0.1..0.95);
        let d = if kappa > 0.0 { frac * std::f64::consts::PI / kappa.sqrt() } else { 4.0 * frac };
        let params = Params::new(p, n, kappa)?.with_diameter(d)?;
        let family = ModelFamily::neumann_model(kappa);
        let mut prev = f64::NEG_INFINITY;
        for k in 0..12 {
            let g = neumann_phase_residual(&params, family, 0.05 * 2f64.powi(k))?;
            if g <= prev {
                bad += 1;
            }
            prev = g;
        }
    }
    Ok((bad == 0, format!("{bad} non-increasing steps over 20 draws")))
}

fn oddness(_: Option<Mutation>) -> Result<(bool, String)> {
    let mut worst = 0.0f64;
    for (p, alpha) in [(2.0, 2.0), (3.0, 1.5), (1.5, 2.5)] {
        let params = Params::new(p, 2.0, -1.0)?;
        let odd = odd_solution_radius(ModelFamily::Cosh, &params, alpha)?;
        worst = worst.max(odd.oddness_defect(&params, 200, 1e-11)?);
    }
    Ok(verdict(worst, 1e-8, "max |w(t) + w(-t)|"))
}

fn delta_of(family: ModelFamily, params: &Params, a: f64, lambda: f64) -> Result<f64> {
    let traj = integrate_pruefer(family, params, a, lambda, a + 200.0, 1e-11)?;
    Ok(reconstruct_profile_with(&traj, 1)?.delta)
}

fn delta_lower_bounds(_: Option<Mutation>) -> Result<(bool, String)> {
    let params = Params::new(2.5, 3.0, -1.0)?;
    let alpha = 2.0;
    let lambda = params.lambda_of_alpha(alpha);
    let flat = params.pi_p() / alpha;
    let mut worst = f64::INFINITY;
    for a in [0.0, 0.5, 2.0, 5.0] {
        worst = worst.min(delta_of(ModelFamily::Sinh, &params, a, lambda)? - flat);
        worst = worst.min(delta_of(ModelFamily::Exp, &params, a - 3.0, lambda)? - flat);
    }
    Ok((worst > 0.0, format!("min delta - pi_p/alpha = {worst:.3e}")))
}

fn delta_cosh_minimum(_: Option<Mutation>) -> Result<(bool, String)> {
    let params = Params::new(2.0, 2.0, -1.0)?;
    let alpha = 2.0;
    let lambda = params.lambda_of_alpha(alpha);
    let a_bar = odd_solution_radius(ModelFamily::Cosh, &params, alpha)?.a_bar;
    let at_odd = delta_of(ModelFamily::Cosh, &params, -a_bar, lambda)?;
    let mut margin = f64::INFINITY;
    for a in [-3.0, -1.5, -1.0, -0.5, 0.0, 0.5, 1.0, 3.0] {
        margin = margin.min(delta_of(ModelFamily::Cosh, &params, a, lambda)? - 2.0 * a_bar);
    }
    let ok = margin > -1e-6 && (at_odd - 2.0 * a_bar).abs() < 1e-6 && at_odd < params.pi_p() / alpha;
    Ok((
        ok,
        format!("min delta - 2a_bar = {margin:.3e}, delta(-a_bar) - 2a_bar = {:.3e}", at_odd - 2.0 * a_bar),
    ))
}

fn lambda_decreasing(_: Option<Mutation>) -> Result<(bool, String)> {
    let params = Params::new(3.0, 2.0, -1.0)?;
    let grid: Vec<f64> = (1..=10).map(|k| 0.4 * k as f64).collect();
    let table = lambda_of_diameter_table(&params, &grid, 1e-10)?;
    Ok((table.strictly_decreasing(), format!("{} violations", table.violations.len())))
}

fn envelope_shape(_: Option<Mutation>) -> Result<(bool, String)> {
    let params = Params::new(2.0, 2.0, -1.0)?.with_diameter(1.0)?;
    let lambda = lambda_D(&params, 1e-10)?.lambda;
    let traj = integrate_pruefer(ModelFamily::Cosh, &params, -0.5, lambda, 10.0, 1e-11)?;
    let env = e_function(&reconstruct_profile(&traj)?, ModelFamily::Cosh, &params)?;
    let (before, after) = env.shape_violations();
    Ok(verdict(before.max(after), 1e-6, "max relative violation"))
}

fn fd_agreement(_: Option<Mutation>) -> Result<(bool, String)> {
    let mut worst = 0.0f64;
    for (n, kappa, d) in [(2.0, -1.0, 1.0), (3.0, 1.0, 2.0)] {
        let params = Params::new(2.0, n, kappa)?.with_diameter(d)?;
        let shot = lambda_D(&params, 1e-12)?.lambda;
        let fd = fd_eigenvalue_p2(&WeightedGrid::new(&params, 4096)?)?;
        worst = worst.max((fd - shot).abs() / shot);
    }
    Ok(verdict(worst, 1e-5, "max relative gap"))
}

fn rayleigh_bound(_: Option<Mutation>) -> Result<(bool, String)> {
    let mut worst = f64::INFINITY;
    for (p, n, kappa, d) in [(3.0, 2.0, -1.0, 2.0), (1.5, 3.0, 1.0, 1.0)] {
        let params = Params::new(p, n, kappa)?.with_diameter(d)?;
        let shot = lambda_D(&params, 1e-10)?.lambda;
        let r = rayleigh_minimize_p(&WeightedGrid::new(&params, 512)?, p, 5000)?;
        worst = worst.min((r.lambda0 - shot) / shot);
    }
    Ok((worst >= -1e-2, format!("min (rayleigh - shot)/shot = {worst:.3e}")))
}

fn warped_agreement(_: Option<Mutation>) -> Result<(bool, String)> {
    let params = Params::new(2.0, 2.0, -1.0)?.with_diameter(1.0)?;
    let shot = lambda_D(&params, 1e-10)?.lambda;
    let mesh = WarpedMesh {
        diameter: 1.0,
        kappa: -1.0,
        scale: 1.0 / 20.0,
        nt: 256,
        ntheta: 64,
        warp: Warp::Cosh,
    };
    let warped = warped_p2_eigenvalue(&mesh)?;
    Ok(verdict((warped - shot).abs() / shot, 5e-2, "relative gap"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
        assert!("nope".parse::<Suite>().is_err());
    }

    #[test]
    fn model_suite_catches_flipped_drift() {
        let clean = run(&[Suite::Model], None);
        assert!(clean.iter().all(|c| c.passed), "{clean:?}");
        let broken = run(&[Suite::Model], Some(Mutation::FlipCoshDrift));
        let riccati = broken.iter().find(|c| c.name == "riccati drift identity").unwrap();
        assert!(!riccati.passed);
    }

    #[test]
    fn ptrig_suite_only() {
        let out = run(&[Suite::Ptrig], None);
        assert_eq!(out.len(), 3);
        assert!(out.iter().all(|c| c.suite == Suite::Ptrig && c.passed), "{out:?}");
    }

    #[test]
    fn default_run_passes() {
        let out = run(&Suite::ALL, None);
        let failed: Vec<_> = out.iter().filter(|c| !c.passed).collect();
        assert!(failed.is_empty(), "{failed:#?}");
    }
}
