//! Acceptance suite. Runs without the libtest harness so every check prints
//! its `PASS` or `FAIL` line even when it passes.

use std::f64::consts::PI;
use std::sync::atomic::{AtomicBool, Ordering};
use std::time::{Duration, Instant};

use plap::model::{ModelFamily, Params};
use plap::oracle::{fd_eigenvalue_p2, rayleigh_minimize_p, warped_p2_eigenvalue, Warp, WarpedMesh, WeightedGrid};
use plap::ptrig::{PExponent, PTrig};
use plap::pruefer::{e_function, integrate_pruefer, reconstruct_profile, reconstruct_profile_with};
use plap::spectrum::{lambda_D, lambda_of_diameter_table, max_map, min_diameter, odd_solution_radius};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

static REPORTED: AtomicBool = AtomicBool::new(false);

fn report(name: &str, ok: bool, detail: String) {
    REPORTED.store(true, Ordering::SeqCst);
    println!("{} {name}: {detail}", if ok { "PASS" } else { "FAIL" });
    assert!(ok, "{name}: {detail}");
}

fn main() {
    let checks: [(&str, fn()); 10] = [
        ("ptrig identity", ptrig_identity),
        ("flat curvature limit", flat_curvature_limit),
        ("finite difference agreement", finite_difference_agreement),
        ("round sphere limit", round_sphere_limit),
        ("warped cylinder sharpness", warped_cylinder_sharpness),
        ("monotone ladders", monotone_ladders),
        ("model inequalities", model_inequalities),
        ("envelope shape", envelope_shape),
        ("rayleigh upper bound", rayleigh_upper_bound),
        ("oddness and maximum map", oddness_and_maximum_map),
    ];
    std::panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (name, check) in checks {
        REPORTED.store(false, Ordering::SeqCst);
        if let Err(cause) = std::panic::catch_unwind(check) {
            failed += 1;
            if !REPORTED.load(Ordering::SeqCst) {
                let msg = cause
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| cause.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_default();
                println!("FAIL {name}: {msg}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", checks.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}

fn within(start: Instant, limit: Duration) -> (bool, String) {
    let e = start.elapsed();
    (e < limit, format!("{:.2}s of {}s", e.as_secs_f64(), limit.as_secs()))
}

fn lambda_at(p: f64, n: f64, kappa: f64, d: f64, tol: f64) -> f64 {
    lambda_D(&Params::new(p, n, kappa).unwrap().with_diameter(d).unwrap(), tol).unwrap().lambda
}

fn ptrig_identity() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let p = loop {
            let p = rng.random_range(1.0..=10.0);
            if p > 1.0 {
                break p;
            }
        };
        let trig = PTrig::new(PExponent::new(p).unwrap());
        let t = rng.random_range(-20.0..20.0);
        let sc = trig.eval(t);
        worst = worst.max((sc.sin.abs().powf(p) + sc.cos.abs().powf(p) - 1.0).abs());
    }
    let (fast, time) = within(start, Duration::from_secs(5));
    report("ptrig identity", worst < 1e-10 && fast, format!("max defect {worst:.3e}, {time}"));
}

fn flat_curvature_limit() {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for p in [1.5, 2.0, 3.0] {
        let pi_p = PTrig::new(PExponent::new(p).unwrap()).pi_p();
        for n in [2.0, 3.0] {
            for d in [1.0, 2.0] {
                for kappa in [1e-8, -1e-8] {
                    let lam = lambda_at(p, n, kappa, d, 1e-10);
                    let flat = (p - 1.0) * pi_p.powf(p) / d.powf(p);
                    worst = worst.max((lam / flat - 1.0).abs());
                }
            }
        }
    }
    let (fast, time) = within(start, Duration::from_secs(30));
    report("flat curvature limit", worst < 1e-3 && fast, format!("max relative gap {worst:.3e}, {time}"));
}

fn finite_difference_agreement() {
    let start = Instant::now();
    let mut worst_gap = 0.0f64;
    let mut worst_order = f64::INFINITY;
    for kappa in [1.0, -1.0] {
        for n in [2.0, 3.0] {
            for d in [1.0, 2.0] {
                let params = Params::new(2.0, n, kappa).unwrap().with_diameter(d).unwrap();
                let shot = lambda_D(&params, 1e-12).unwrap().lambda;
                let errors: Vec<f64> = [512, 1024, 2048, 4096]
                    .iter()
                    .map(|&j| (fd_eigenvalue_p2(&WeightedGrid::new(&params, j).unwrap()).unwrap() - shot).abs())
                    .collect();
                worst_gap = worst_gap.max(errors[3] / shot);
                for w in errors.windows(2) {
                    worst_order = worst_order.min((w[0] / w[1]).log2());
                }
            }
        }
    }
    let (fast, time) = within(start, Duration::from_secs(60));
    report(
        "finite difference agreement",
        worst_gap < 1e-5 && worst_order >= 1.9 && fast,
        format!("max relative gap {worst_gap:.3e}, min observed order {worst_order:.3}, {time}"),
    );
}

fn round_sphere_limit() {
    let eps = [0.1, 0.05, 0.025];
    let lam: Vec<f64> = eps.iter().map(|e| lambda_at(2.0, 3.0, 1.0, PI - e, 1e-12)).collect();
    // quadratic through the three samples, evaluated at zero
    let mut extrapolated = 0.0;
    for i in 0..3 {
        let mut basis = 1.0;
        for j in 0..3 {
            if i != j {
                basis *= eps[j] / (eps[j] - eps[i]);
            }
        }
        extrapolated += basis * lam[i];
    }
    let gap = (extrapolated - 3.0).abs() / 3.0;
    report(
        "round sphere limit",
        gap < 1e-3,
        format!("samples {:.7} {:.7} {:.7}, extrapolated {extrapolated:.8}, relative gap {gap:.3e}", lam[0], lam[1], lam[2]),
    );
}

fn warped_cylinder_sharpness() {
    let start = Instant::now();
    let target = lambda_at(2.0, 2.0, -1.0, 1.0, 1e-12);
    let mesh = |scale: f64, nt: usize| WarpedMesh {
        diameter: 1.0,
        kappa: -1.0,
        scale,
        nt,
        ntheta: 64,
        warp: Warp::Cosh,
    };
    let values: Vec<f64> = [1.0 / 5.0, 1.0 / 10.0, 1.0 / 20.0]
        .iter()
        .map(|&c| warped_p2_eigenvalue(&mesh(c, 256)).unwrap())
        .collect();
    let fine = warped_p2_eigenvalue(&mesh(1.0 / 20.0, 512)).unwrap();
    let finest = values[2];
    // Richardson error of the coarse grid, with the usual 1.25 safety factor
    let grid_error = 1.25 * (finest - fine).abs() * 4.0 / 3.0;
    let above = finest >= target - grid_error && finest <= 1.05 * target;
    let distances: Vec<f64> = values.iter().map(|v| (v - target).abs()).collect();
    let ordered = distances.windows(2).all(|w| w[1] <= w[0] + 1e-12 * target);
    let (fast, time) = within(start, Duration::from_secs(120));
    report(
        "warped cylinder sharpness",
        above && ordered && fast,
        format!(
            "lambda_D {target:.9}, scales 1/5 1/10 1/20 give {:.9} {:.9} {:.9}, grid error {grid_error:.2e}, {time}",
            values[0], values[1], values[2]
        ),
    );
}

fn monotone_ladders() {
    let mut notes = Vec::new();
    let mut ok = true;
    for (p, n, kappa, d_max) in [(2.0, 2.0, -1.0, 4.0), (3.0, 2.0, -1.0, 4.0), (2.0, 3.0, 1.0, 0.98 * PI)] {
        let params = Params::new(p, n, kappa).unwrap();
        let grid: Vec<f64> = (1..=20).map(|k| d_max * k as f64 / 20.0).collect();
        let table = lambda_of_diameter_table(&params, &grid, 1e-10).unwrap();
        ok &= table.strictly_decreasing();
        notes.push(format!("({p},{n},{kappa}) {} violations", table.violations.len()));
    }
    let params = Params::new(2.0, 2.0, -1.0).unwrap();
    let diameters: Vec<f64> = (1..=10).map(|k| min_diameter(&params, k as f64).unwrap()).collect();
    let shrinking = diameters.windows(2).all(|w| w[1] < w[0]);
    ok &= shrinking;
    notes.push(format!("min diameter over lambda 1..10 decreasing: {shrinking}"));
    report("monotone ladders", ok, notes.join("; "));
}

fn delta_of(family: ModelFamily, params: &Params, a: f64, lambda: f64) -> f64 {
    let traj = integrate_pruefer(family, params, a, lambda, a + 200.0, 1e-11).unwrap();
    let prof = reconstruct_profile_with(&traj, 1).unwrap();
    assert!(prof.converged, "no critical point from a = {a}");
    prof.delta
}

fn model_inequalities() {
    let mut ok = true;
    let mut notes = Vec::new();
    for (p, n, alpha) in [(2.0, 3.0, 2.0), (2.5, 2.0, 1.5), (1.6, 4.0, 3.0)] {
        let params = Params::new(p, n, -1.0).unwrap();
        let lambda = params.lambda_of_alpha(alpha);
        let flat = params.pi_p() / alpha;
        let mut sinh_margin = f64::INFINITY;
        let mut exp_margin = f64::INFINITY;
        for k in 0..8 {
            let a = 0.1 + 0.6 * k as f64;
            sinh_margin = sinh_margin.min(delta_of(ModelFamily::Sinh, &params, a, lambda) - flat);
            exp_margin = exp_margin.min(delta_of(ModelFamily::Exp, &params, a - 2.0, lambda) - flat);
        }
        let a_bar = odd_solution_radius(ModelFamily::Cosh, &params, alpha).unwrap().a_bar;
        let at_odd = delta_of(ModelFamily::Cosh, &params, -a_bar, lambda);
        let mut cosh_margin = f64::INFINITY;
        for k in 0..13 {
            let a = -3.0 + 0.5 * k as f64;
            if (a + a_bar).abs() < 1e-3 {
                continue;
            }
            cosh_margin = cosh_margin.min(delta_of(ModelFamily::Cosh, &params, a, lambda) - 2.0 * a_bar);
        }
        let equality = (at_odd - 2.0 * a_bar).abs();
        ok &= sinh_margin > 0.0 && exp_margin > 0.0 && cosh_margin > 0.0 && equality < 1e-6 && at_odd < flat;
        notes.push(format!(
            "p={p}: sinh {sinh_margin:.2e}, exp {exp_margin:.2e}, cosh {cosh_margin:.2e}, |delta(-a_bar)-2a_bar| {equality:.1e}, pi_p/alpha - delta(-a_bar) {:.3e}",
            flat - at_odd
        ));
    }
    report("model inequalities", ok, notes.join("; "));
}

fn envelope_shape() {
    let mut worst = 0.0f64;
    let mut count = 0;
    for (p, n, kappa, d) in [
        (2.0, 2.0, -1.0, 1.0),
        (2.0, 3.0, -1.0, 2.0),
        (3.0, 2.0, -1.0, 1.5),
        (1.5, 3.0, -0.5, 1.0),
        (2.5, 4.0, -2.0, 0.8),
    ] {
        let params = Params::new(p, n, kappa).unwrap().with_diameter(d).unwrap();
        let lambda = lambda_D(&params, 1e-11).unwrap().lambda;
        let traj = integrate_pruefer(ModelFamily::Cosh, &params, -0.5 * d, lambda, 10.0 * d, 1e-11).unwrap();
        let profile = reconstruct_profile(&traj).unwrap();
        if !profile.converged {
            continue;
        }
        count += 1;
        let (before, after) = e_function(&profile, ModelFamily::Cosh, &params).unwrap().shape_violations();
        worst = worst.max(before).max(after);
    }
    report(
        "envelope shape",
        count == 5 && worst <= 1e-6,
        format!("{count} converged profiles, max relative violation {worst:.3e}"),
    );
}

fn rayleigh_upper_bound() {
    let mut worst = f64::INFINITY;
    let mut worst_fd = 0.0f64;
    for (p, n, kappa, d) in [
        (2.0, 2.0, -1.0, 1.0),
        (2.0, 3.0, 1.0, 2.0),
        (3.0, 2.0, -1.0, 2.0),
        (1.5, 3.0, 1.0, 1.0),
        (2.5, 2.0, 0.5, 3.0),
        (4.0, 3.0, -1.0, 1.0),
    ] {
        let params = Params::new(p, n, kappa).unwrap().with_diameter(d).unwrap();
        let shot = lambda_D(&params, 1e-10).unwrap().lambda;
        let grid = WeightedGrid::new(&params, 512).unwrap();
        let r = rayleigh_minimize_p(&grid, p, 5000).unwrap();
        worst = worst.min((r.lambda0 - shot) / shot);
        if p == 2.0 {
            let fd = fd_eigenvalue_p2(&grid).unwrap();
            worst_fd = worst_fd.max((r.lambda0 - fd).abs() / fd);
        }
    }
    report(
        "rayleigh upper bound",
        worst >= -1e-2 && worst_fd < 1e-3,
        format!("min (rayleigh - shot)/shot {worst:.3e}, max p=2 gap to finite differences {worst_fd:.3e}"),
    );
}

fn oddness_and_maximum_map() {
    let params = Params::new(2.0, 3.0, -1.0).unwrap();
    let alpha = 5f64.sqrt();
    let lambda = params.lambda_of_alpha(alpha);
    let odd = odd_solution_radius(ModelFamily::Cosh, &params, alpha).unwrap();
    let defect = odd.oddness_defect(&params, 400, 1e-11).unwrap();

    let far = 20.0 / params.sqrt_abs_kappa();
    let exp_starts: Vec<f64> = (0..9).map(|k| -4.0 + k as f64).collect();
    let exp_map = max_map(ModelFamily::Exp, &params, lambda, &exp_starts).unwrap();
    let exp_m: Vec<f64> = exp_map.entries.iter().map(|e| e.m).collect();
    let spread = exp_m.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b)) - exp_m.iter().fold(f64::INFINITY, |a, &b| a.min(b));
    let m2 = exp_map.m2.unwrap();

    let cosh_starts: Vec<f64> = [-2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0, 4.0, 8.0, far].to_vec();
    let cosh = max_map(ModelFamily::Cosh, &params, lambda, &cosh_starts).unwrap();
    let sinh_starts: Vec<f64> = [0.05, 0.2, 0.5, 1.0, 2.0, 4.0, 8.0, far].to_vec();
    let sinh = max_map(ModelFamily::Sinh, &params, lambda, &sinh_starts).unwrap();
    let all_converged = cosh.unconverged().count() + sinh.unconverged().count() + exp_map.unconverged().count() == 0;
    let cosh_down = cosh.entries.windows(2).all(|w| w[1].m < w[0].m);
    let sinh_up = sinh.entries.windows(2).all(|w| w[1].m > w[0].m);
    let cosh_tail = (cosh.entries.last().unwrap().m - m2).abs();
    let sinh_tail = (sinh.entries.last().unwrap().m - m2).abs();

    let ok = defect < 1e-8 && spread < 1e-8 && all_converged && cosh_down && sinh_up && cosh_tail < 1e-4 && sinh_tail < 1e-4;
    report(
        "oddness and maximum map",
        ok,
        format!(
            "oddness {defect:.2e}, exp spread {spread:.2e}, cosh decreasing {cosh_down}, sinh increasing {sinh_up}, tails {cosh_tail:.2e} {sinh_tail:.2e}"
        ),
    );
}
