//! Discretized solvers that never touch the Prüfer shot: a weighted
//! Sturm–Liouville finite-difference eigensolver at `p = 2`, a discrete
//! Rayleigh-quotient minimizer for general `p`, and the Laplacian on a
//! warped cylinder.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::{spow, Params};

const INVERSE_TOL: f64 = 1e-12;
const INVERSE_MAX_ITER: usize = 500;
const RANDOM_START_SEED: u64 = 0x5eed_0f0a_c1e5;

/// Uniform grid on `[-D/2, D/2]` with a positive weight.
///
/// Fluxes use the weight at cell midpoints. Node masses average the weight
/// over the dual cell at quarter points, so they stay positive where the
/// weight vanishes at an end of the interval.
#[derive(Debug, Clone)]
pub struct WeightedGrid {
    diameter: f64,
    h: f64,
    nodes: Vec<f64>,
    weight: Vec<f64>,
    flux: Vec<f64>,
    mass: Vec<f64>,
}

impl WeightedGrid {
    /// `J` intervals with the model weight: `cos^{n-1}(√κ t)` for `κ > 0`,
    /// `cosh^{n-1}(√-κ t)` for `κ < 0`.
    pub fn new(params: &Params, intervals: usize) -> Result<Self> {
        let d = params.require_diameter()?;
        let s = params.sqrt_abs_kappa();
        let e = params.n() - 1.0;
        if params.kappa() > 0.0 {
            Self::with_weight(d, intervals, |t| (s * t).cos().max(0.0).powf(e))
        } else {
            Self::with_weight(d, intervals, |t| (s * t).cosh().powf(e))
        }
    }

    pub fn with_weight(diameter: f64, intervals: usize, rho: impl Fn(f64) -> f64) -> Result<Self> {
        if !(diameter > 0.0 && diameter.is_finite()) {
            return Err(Error::Domain(format!("diameter must be positive, got {diameter}")));
        }
        if intervals < 16 {
            return Err(Error::Domain(format!("grid needs at least 16 intervals, got {intervals}")));
        }
        let h = diameter / intervals as f64;
        let lo = -0.5 * diameter;
        let nodes: Vec<f64> = (0..=intervals).map(|j| lo + h * j as f64).collect();
        let weight: Vec<f64> = nodes.iter().map(|&t| rho(t)).collect();
        let flux: Vec<f64> = (0..intervals).map(|j| rho(lo + h * (j as f64 + 0.5))).collect();
        let mass: Vec<f64> = (0..=intervals)
            .map(|j| {
                let t = nodes[j];
                let left = if j > 0 { rho(t - 0.25 * h) } else { 0.0 };
                let right = if j < intervals { rho(t + 0.25 * h) } else { 0.0 };
                0.5 * h * (left + right)
            })
            .collect();
        if flux.iter().chain(&mass).any(|v| !(*v > 0.0 && v.is_finite())) {
            return Err(Error::Domain("weight must be positive and finite inside the interval".into()));
        }
        Ok(WeightedGrid {
            diameter,
            h,
            nodes,
            weight,
            flux,
            mass,
        })
    }

    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    pub fn intervals(&self) -> usize {
        self.flux.len()
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// The weight at the nodes.
    pub fn weight(&self) -> &[f64] {
        &self.weight
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    /// Symmetrized operator `M^{-1/2} A M^{-1/2}` as (diagonal, off-diagonal),
    /// where `A` is the Neumann stiffness matrix.
    fn symmetric_operator(&self) -> (Vec<f64>, Vec<f64>) {
        let nn = self.nodes.len();
        let inv_h = 1.0 / self.h;
        let mut diag = vec![0.0; nn];
        let mut off = vec![0.0; nn - 1];
        for j in 0..nn - 1 {
            let k = self.flux[j] * inv_h;
            diag[j] += k;
            diag[j + 1] += k;
            off[j] = -k / (self.mass[j] * self.mass[j + 1]).sqrt();
        }
        for j in 0..nn {
            diag[j] /= self.mass[j];
        }
        (diag, off)
    }
}

/// Solves a tridiagonal system with partial pivoting.
fn solve_tridiagonal(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    let mut d = diag.to_vec();
    let mut du = sup.to_vec();
    let mut dl = sub.to_vec();
    let mut du2 = vec![0.0; n.saturating_sub(2)];
    let mut x = rhs.to_vec();
    for i in 0..n - 1 {
        if dl[i].abs() > d[i].abs() {
            // swap rows i and i+1
            let f = d[i] / dl[i];
            d[i] = dl[i];
            let tmp = d[i + 1];
            d[i + 1] = du[i] - f * tmp;
            if i + 2 < n {
                du2[i] = du[i + 1];
                du[i + 1] = -f * du2[i];
            }
            du[i] = tmp;
            dl[i] = f;
            x.swap(i, i + 1);
            x[i + 1] -= f * x[i];
        } else {
            if d[i] == 0.0 {
                return Err(Error::NonConvergence {
                    what: "tridiagonal solve",
                    iterations: i,
                });
            }
            let f = dl[i] / d[i];
            d[i + 1] -= f * du[i];
            dl[i] = f;
            x[i + 1] -= f * x[i];
        }
    }
    if d[n - 1] == 0.0 {
        return Err(Error::NonConvergence {
            what: "tridiagonal solve",
            iterations: n,
        });
    }
    x[n - 1] /= d[n - 1];
    if n > 1 {
        x[n - 2] = (x[n - 2] - du[n - 2] * x[n - 1]) / d[n - 2];
    }
    for i in (0..n.saturating_sub(2)).rev() {
        x[i] = (x[i] - du[i] * x[i + 1] - du2[i] * x[i + 2]) / d[i];
    }
    Ok(x)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalize(x: &mut [f64]) {
    let norm = dot(x, x).sqrt();
    x.iter_mut().for_each(|v| *v /= norm);
}

fn apply_symmetric(diag: &[f64], off: &[f64], x: &[f64]) -> Vec<f64> {
    let n = diag.len();
    (0..n)
        .map(|i| {
            let mut v = diag[i] * x[i];
            if i > 0 {
                v += off[i - 1] * x[i - 1];
            }
            if i + 1 < n {
                v += off[i] * x[i + 1];
            }
            v
        })
        .collect()
}

/// Smallest eigenpair of a symmetric tridiagonal matrix on the orthogonal
/// complement of `deflate`: shifted inverse iteration until the Rayleigh
/// quotient settles, then Rayleigh quotient iteration.
fn smallest_eigenpair(diag: &[f64], off: &[f64], deflate: Option<&[f64]>, start: Vec<f64>) -> Result<(f64, Vec<f64>)> {
    let project = |x: &mut Vec<f64>| {
        if let Some(q) = deflate {
            let c = dot(q, x) / dot(q, q);
            x.iter_mut().zip(q).for_each(|(v, qi)| *v -= c * qi);
        }
        normalize(x);
    };
    let mut x = start;
    project(&mut x);
    let rq = |x: &[f64]| dot(x, &apply_symmetric(diag, off, x));
    let mut theta = rq(&x);
    let mut shift = -0.01 * theta.abs();
    let mut refining = false;
    for it in 1..=INVERSE_MAX_ITER {
        let shifted: Vec<f64> = diag.iter().map(|d| d - shift).collect();
        let mut y = match solve_tridiagonal(off, &shifted, off, &x) {
            Ok(y) => y,
            // exact hit on an eigenvalue
            Err(_) if refining => return Ok((theta, x)),
            Err(e) => return Err(e),
        };
        if y.iter().any(|v| !v.is_finite()) {
            if refining {
                return Ok((theta, x));
            }
            return Err(Error::NonConvergence {
                what: "inverse iteration",
                iterations: it,
            });
        }
        project(&mut y);
        x = y;
        let next = rq(&x);
        let change = (next - theta).abs();
        theta = next;
        if refining {
            if change <= INVERSE_TOL * theta.abs() {
                return Ok((theta, x));
            }
            shift = theta;
        } else if change <= 1e-6 * theta.abs() {
            refining = true;
            shift = theta;
        }
    }
    Err(Error::NonConvergence {
        what: "inverse iteration",
        iterations: INVERSE_MAX_ITER,
    })
}

/// First nonzero Neumann eigenvalue of `(ρw')' + λρw = 0` on the grid.
pub fn fd_eigenvalue_p2(grid: &WeightedGrid) -> Result<f64> {
    let (diag, off) = grid.symmetric_operator();
    let q: Vec<f64> = grid.mass.iter().map(|m| m.sqrt()).collect();
    let start: Vec<f64> = grid.nodes.iter().zip(&q).map(|(t, qi)| t * qi).collect();
    smallest_eigenpair(&diag, &off, Some(&q), start).map(|(theta, _)| theta)
}

/// Outcome of the discrete Rayleigh-quotient minimization.
#[derive(Debug, Clone)]
pub struct RayleighResult {
    /// Smallest quotient found, an upper bound for the discrete eigenvalue.
    pub lambda0: f64,
    /// Minimizer at the nodes, sup-norm 1.
    pub w: Vec<f64>,
    /// `Σ m_j w_j^{(p-1)}` relative to `Σ m_j |w_j|^{p-1}`.
    pub constraint_residual: f64,
    /// True if the best run stopped on the iteration budget or a failed
    /// line search rather than on its convergence test.
    pub stagnated: bool,
    pub iterations: usize,
}

struct Quotient<'a> {
    grid: &'a WeightedGrid,
    p: f64,
}

impl Quotient<'_> {
    fn numerator(&self, v: &[f64]) -> f64 {
        let g = self.grid;
        let scale = g.h.powf(1.0 - self.p);
        v.windows(2).zip(&g.flux).map(|(w, r)| r * (w[1] - w[0]).abs().powf(self.p)).sum::<f64>() * scale
    }

    fn denominator(&self, w: &[f64]) -> f64 {
        w.iter().zip(&self.grid.mass).map(|(x, m)| m * x.abs().powf(self.p)).sum()
    }

    /// The shift `c` minimizing `Σ m |v - c|^p`, i.e. the root of
    /// `Σ m (v - c)^{(p-1)}`.
    fn centre(&self, v: &[f64]) -> f64 {
        let q = self.p - 1.0;
        let m = &self.grid.mass;
        let h = |c: f64| -> (f64, f64) {
            let mut val = 0.0;
            let mut der = 0.0;
            for (x, mi) in v.iter().zip(m) {
                let r = x - c;
                val += mi * spow(r, q);
                der += mi * q * r.abs().powf(q - 1.0);
            }
            (val, der)
        };
        let (mut lo, mut hi) = v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
        if hi - lo <= 0.0 {
            return lo;
        }
        let mut c = 0.5 * (lo + hi);
        for _ in 0..200 {
            let (val, der) = h(c);
            if val > 0.0 {
                lo = c;
            } else {
                hi = c;
            }
            let newton = c + val / der;
            let next = if der.is_finite() && der > 0.0 && newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
            if (next - c).abs() <= 1e-15 * (1.0 + c.abs()) || hi - lo <= 1e-15 * (1.0 + c.abs()) {
                return next;
            }
            c = next;
        }
        c
    }

    /// `F(v) = N(v) / min_c D(v - c)` with its gradient.
    fn value_and_gradient(&self, v: &[f64]) -> (f64, Vec<f64>, Vec<f64>) {
        let c = self.centre(v);
        let w: Vec<f64> = v.iter().map(|x| x - c).collect();
        let num = self.numerator(v);
        let den = self.denominator(&w);
        let f = num / den;
        let g = self.grid;
        let p = self.p;
        let scale = p * g.h.powf(1.0 - p);
        let mut grad = vec![0.0; v.len()];
        for (j, r) in g.flux.iter().enumerate() {
            let flux = r * scale * spow(v[j + 1] - v[j], p - 1.0);
            grad[j] -= flux;
            grad[j + 1] += flux;
        }
        for (j, gj) in grad.iter_mut().enumerate() {
            *gj = (*gj - f * p * g.mass[j] * spow(w[j], p - 1.0)) / den;
        }
        (f, grad, w)
    }

    /// Lagged-diffusivity tridiagonal preconditioner at the current iterate.
    fn precondition(&self, w: &[f64], f: f64, grad: &[f64]) -> Result<Vec<f64>> {
        let g = self.grid;
        let p = self.p;
        let slopes: Vec<f64> = w.windows(2).map(|x| (x[1] - x[0]) / g.h).collect();
        let smax = slopes.iter().fold(0.0f64, |a, s| a.max(s.abs())).max(1e-300);
        let eta2 = (1e-3 * smax).powi(2);
        let wmax = w.iter().fold(0.0f64, |a, x| a.max(x.abs())).max(1e-300);
        let zeta2 = (1e-3 * wmax).powi(2);
        let nn = w.len();
        let mut diag = vec![0.0; nn];
        let mut off = vec![0.0; nn - 1];
        for j in 0..nn - 1 {
            let k = (p - 1.0) * g.flux[j] * (slopes[j] * slopes[j] + eta2).powf(0.5 * (p - 2.0)) / g.h;
            diag[j] += k;
            diag[j + 1] += k;
            off[j] = -k;
        }
        for j in 0..nn {
            diag[j] += 0.1 * f * g.mass[j] * (w[j] * w[j] + zeta2).powf(0.5 * (p - 2.0));
        }
        solve_tridiagonal(&off, &diag, &off, grad)
    }
}

/// Minimizes `Σ ρ |Δw/h|^p h / Σ ρ |w|^p h` over grid functions with
/// `Σ ρ w^{(p-1)} h = 0`.
///
/// The constraint is removed by minimizing `N(v) / min_c D(v - c)`, whose
/// minimizer `v - c` satisfies it. Preconditioned descent with Armijo
/// backtracking runs from an odd linear profile, a `sin_p` profile and a
/// fixed-seed random vector; the smallest value wins.
pub fn rayleigh_minimize_p(grid: &WeightedGrid, p: f64, iters: usize) -> Result<RayleighResult> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(Error::Domain(format!("p must exceed 1, got {p}")));
    }
    let trig = crate::ptrig::PTrig::new(crate::ptrig::PExponent::new(p)?);
    let d = grid.diameter;
    let mut rng = ChaCha8Rng::seed_from_u64(RANDOM_START_SEED);
    let starts = [
        grid.nodes.iter().map(|t| t / d).collect::<Vec<_>>(),
        grid.nodes.iter().map(|t| trig.sin(trig.pi_p() * t / d)).collect(),
        grid.nodes.iter().map(|_| rng.random_range(-1.0..1.0)).collect(),
    ];
    let quotient = Quotient { grid, p };
    let mut best: Option<RayleighResult> = None;
    for start in starts {
        let run = descend(&quotient, start, iters)?;
        if best.as_ref().is_none_or(|b| run.lambda0 < b.lambda0) {
            best = Some(run);
        }
    }
    Ok(best.expect("at least one start"))
}

fn descend(quotient: &Quotient<'_>, start: Vec<f64>, iters: usize) -> Result<RayleighResult> {
    let mut v = start;
    let (mut f, mut grad, mut w) = quotient.value_and_gradient(&v);
    let mut stagnated = true;
    let mut quiet = 0;
    let mut step: f64 = 1.0;
    let mut done = 0;
    for it in 1..=iters {
        done = it;
        let dir = quotient.precondition(&w, f, &grad)?;
        let slope = dot(&grad, &dir);
        if !(slope > 0.0) {
            stagnated = false;
            break;
        }
        let mut accepted = None;
        let mut s = (2.0 * step).min(1.0);
        for _ in 0..60 {
            let trial: Vec<f64> = v.iter().zip(&dir).map(|(x, dx)| x - s * dx).collect();
            let (ft, gt, wt) = quotient.value_and_gradient(&trial);
            if ft.is_finite() && ft <= f - 1e-4 * s * slope {
                accepted = Some((trial, ft, gt, wt));
                break;
            }
            s *= 0.5;
        }
        let Some((trial, ft, gt, wt)) = accepted else {
            break;
        };
        step = s;
        let decrease = f - ft;
        // rescale to sup-norm 1; the quotient is homogeneous of degree zero
        let sup = wt.iter().fold(0.0f64, |a, x| a.max(x.abs()));
        let c = trial[0] - wt[0];
        v = trial.iter().map(|x| (x - c) / sup).collect();
        w = wt.iter().map(|x| x / sup).collect();
        grad = gt.iter().map(|g| g * sup).collect();
        f = ft;
        if decrease <= 1e-14 * f {
            quiet += 1;
            if quiet >= 3 {
                stagnated = false;
                break;
            }
        } else {
            quiet = 0;
        }
    }
    let q = quotient.p - 1.0;
    let m = &quotient.grid.mass;
    let signed: f64 = w.iter().zip(m).map(|(x, mi)| mi * spow(*x, q)).sum();
    let total: f64 = w.iter().zip(m).map(|(x, mi)| mi * x.abs().powf(q)).sum();
    Ok(RayleighResult {
        lambda0: f,
        w,
        constraint_residual: signed.abs() / total,
        stagnated,
        iterations: done,
    })
}

/// Radial profile of a warped cylinder.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Warp {
    /// `f(t) = c cosh(√-κ t)`.
    Cosh,
    /// `f(t) = c`.
    Constant,
}

/// Grid on `[-D/2, D/2] × [0, 2π)` for the metric `dt² + f(t)² dθ²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WarpedMesh {
    pub diameter: f64,
    pub kappa: f64,
    /// Warp scale `c`.
    pub scale: f64,
    pub nt: usize,
    pub ntheta: usize,
    pub warp: Warp,
}

impl WarpedMesh {
    fn profile(&self) -> impl Fn(f64) -> f64 + '_ {
        let s = (-self.kappa).sqrt();
        move |t| match self.warp {
            Warp::Cosh => (s * t).cosh(),
            Warp::Constant => 1.0,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.kappa < 0.0) {
            return Err(Error::Domain(format!("warped cylinder needs kappa < 0, got {}", self.kappa)));
        }
        if !(self.scale > 0.0 && self.scale.is_finite()) {
            return Err(Error::Domain(format!("warp scale must be positive, got {}", self.scale)));
        }
        if self.ntheta < 3 {
            return Err(Error::Domain(format!("need at least 3 angular nodes, got {}", self.ntheta)));
        }
        Ok(())
    }

    /// Eigenvalue of the periodic second difference in `θ` for Fourier mode `k`.
    pub fn angular_eigenvalue(&self, k: usize) -> f64 {
        let h = std::f64::consts::TAU / self.ntheta as f64;
        let s = (std::f64::consts::PI * k as f64 / self.ntheta as f64).sin();
        4.0 * s * s / (h * h)
    }

    /// Applies the assembled 2-D five-point operator `-Δ` to `u[j][i]`
    /// (`j` in `t`, `i` in `θ`).
    pub fn apply_laplacian(&self, u: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        self.validate()?;
        let f = self.profile();
        let grid = WeightedGrid::with_weight(self.diameter, self.nt, &f)?;
        let k = self.ntheta;
        let ht = std::f64::consts::TAU / k as f64;
        let nn = grid.nodes.len();
        let mut out = vec![vec![0.0; k]; nn];
        for j in 0..nn {
            let fj = self.scale * f(grid.nodes[j]);
            for i in 0..k {
                let mut flux = 0.0;
                if j > 0 {
                    flux += grid.flux[j - 1] * (u[j][i] - u[j - 1][i]) / grid.h;
                }
                if j + 1 < nn {
                    flux += grid.flux[j] * (u[j][i] - u[j + 1][i]) / grid.h;
                }
                let ang = (2.0 * u[j][i] - u[j][(i + 1) % k] - u[j][(i + k - 1) % k]) / (ht * ht);
                out[j][i] = flux / grid.mass[j] + ang / (fj * fj);
            }
        }
        Ok(out)
    }
}

/// First nonzero eigenvalue of `-Δ` on the warped cylinder, Neumann in `t`
/// and periodic in `θ`.
///
/// The five-point operator commutes with rotations in `θ`, so it splits
/// exactly into one weighted problem in `t` per Fourier mode `k`, with
/// potential `ν_k / f²`. Since `ν_k` grows with `k` up to `K/2`, the answer
/// is the smaller of the first nonzero `k = 0` eigenvalue and the lowest
/// `k = 1` eigenvalue.
pub fn warped_p2_eigenvalue(mesh: &WarpedMesh) -> Result<f64> {
    let (radial, angular) = warped_modes(mesh)?;
    Ok(radial.min(angular))
}

/// (first nonzero `k = 0` eigenvalue, lowest `k = 1` eigenvalue).
pub fn warped_modes(mesh: &WarpedMesh) -> Result<(f64, f64)> {
    mesh.validate()?;
    let f = mesh.profile();
    // the scale c only enters through the angular potential
    let grid = WeightedGrid::with_weight(mesh.diameter, mesh.nt, &f)?;
    let radial = fd_eigenvalue_p2(&grid)?;
    let (mut diag, off) = grid.symmetric_operator();
    let nu = mesh.angular_eigenvalue(1);
    for (dj, t) in diag.iter_mut().zip(&grid.nodes) {
        let fj = mesh.scale * f(*t);
        *dj += nu / (fj * fj);
    }
    let start: Vec<f64> = grid.mass.iter().map(|m| m.sqrt()).collect();
    let (angular, _) = smallest_eigenpair(&diag, &off, None, start)?;
    Ok((radial, angular))
}

/// `λ₀`: the weighted Rayleigh infimum of the cos model over its whole
/// interval `(-π/(2√κ), π/(2√κ))`, whose odd minimizer vanishes at 0.
/// Finite differences at `p = 2`, the Rayleigh minimizer otherwise.
pub fn lambda0(params: &Params, intervals: usize, iters: usize) -> Result<f64> {
    if params.kappa() <= 0.0 {
        return Err(Error::Domain("lambda0 is defined for kappa > 0".into()));
    }
    let full = params.clone().with_diameter(std::f64::consts::PI / params.sqrt_abs_kappa())?;
    let grid = WeightedGrid::new(&full, intervals)?;
    if params.p() == 2.0 {
        fd_eigenvalue_p2(&grid)
    } else {
        Ok(rayleigh_minimize_p(&grid, params.p(), iters)?.lambda0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;
    use std::f64::consts::PI;

    #[test]
    fn tridiagonal_solver_pivots() {
        let sub = [1.0, 5.0, -2.0];
        let diag = [1e-14, 2.0, 1.0, 4.0];
        let sup = [3.0, 1.0, 0.5];
        let x_true = [1.0, -2.0, 0.5, 3.0];
        let rhs: Vec<f64> = (0..4)
            .map(|i| {
                let mut v = diag[i] * x_true[i];
                if i > 0 {
                    v += sub[i - 1] * x_true[i - 1];
                }
                if i < 3 {
                    v += sup[i] * x_true[i + 1];
                }
                v
            })
            .collect();
        let x = solve_tridiagonal(&sub, &diag, &sup, &rhs).unwrap();
        for (a, b) in x.iter().zip(x_true) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn unit_weight_interval() {
        // discrete Neumann spectrum is (4/h²) sin²(πh/(2D))
        for j in [64, 256] {
            let grid = WeightedGrid::with_weight(PI, j, |_| 1.0).unwrap();
            let h = grid.h();
            let exact = 4.0 / (h * h) * (PI * h / (2.0 * PI)).sin().powi(2);
            let lambda = fd_eigenvalue_p2(&grid).unwrap();
            assert!((lambda - exact).abs() < 1e-10, "{lambda} vs {exact}");
            assert!((lambda - 1.0).abs() < 2.0 / (j * j) as f64);
        }
    }

    #[test]
    fn matches_dense_solver() {
        let params = Params::new(2.0, 3.0, -1.0).unwrap().with_diameter(2.0).unwrap();
        let grid = WeightedGrid::new(&params, 64).unwrap();
        let (diag, off) = grid.symmetric_operator();
        let n = diag.len();
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = diag[i];
            if i + 1 < n {
                m[(i, i + 1)] = off[i];
                m[(i + 1, i)] = off[i];
            }
        }
        let mut eig: Vec<f64> = m.symmetric_eigen().eigenvalues.iter().copied().collect();
        eig.sort_by(f64::total_cmp);
        assert!(eig[0].abs() < 1e-9);
        let lambda = fd_eigenvalue_p2(&grid).unwrap();
        assert!((lambda - eig[1]).abs() < 1e-9 * eig[1]);
    }

    #[test]
    fn sphere_weight_approaches_three() {
        let mut prev = 0.0;
        for j in [128, 256, 512] {
            let params = Params::new(2.0, 3.0, 1.0).unwrap().with_diameter(PI).unwrap();
            let lambda = fd_eigenvalue_p2(&WeightedGrid::new(&params, j).unwrap()).unwrap();
            assert!((lambda - 3.0).abs() < 20.0 / (j * j) as f64, "{lambda}");
            if prev != 0.0 {
                assert!((lambda - 3.0).abs() < (prev - 3.0f64).abs());
            }
            prev = lambda;
        }
    }

    #[test]
    fn grid_rejects_bad_input() {
        assert!(WeightedGrid::with_weight(1.0, 8, |_| 1.0).is_err());
        assert!(WeightedGrid::with_weight(-1.0, 32, |_| 1.0).is_err());
        assert!(WeightedGrid::with_weight(1.0, 32, |t| t).is_err());
    }

    #[test]
    fn rayleigh_classical_cases() {
        let grid = WeightedGrid::with_weight(PI, 256, |_| 1.0).unwrap();
        let r = rayleigh_minimize_p(&grid, 2.0, 2000).unwrap();
        assert!((r.lambda0 - 1.0).abs() < 1e-3);
        assert!(r.constraint_residual < 1e-10);
        assert!((r.lambda0 - fd_eigenvalue_p2(&grid).unwrap()).abs() < 1e-8);

        let grid = WeightedGrid::with_weight(1.0, 512, |_| 1.0).unwrap();
        let r = rayleigh_minimize_p(&grid, 3.0, 4000).unwrap();
        let pi3 = crate::ptrig::pi_p(crate::ptrig::PExponent::new(3.0).unwrap());
        let expected = 2.0 * pi3.powi(3);
        assert!((r.lambda0 / expected - 1.0).abs() < 1e-2, "{} vs {expected}", r.lambda0);
        let sup = r.w.iter().fold(0.0f64, |a, x| a.max(x.abs()));
        assert!((sup - 1.0).abs() < 1e-12);
        assert!(rayleigh_minimize_p(&grid, 1.0, 10).is_err());
    }

    #[test]
    fn rayleigh_is_deterministic() {
        let grid = WeightedGrid::with_weight(2.0, 128, |t: f64| t.cosh()).unwrap();
        let a = rayleigh_minimize_p(&grid, 1.7, 500).unwrap();
        let b = rayleigh_minimize_p(&grid, 1.7, 500).unwrap();
        assert_eq!(a.lambda0, b.lambda0);
        assert_eq!(a.w, b.w);
    }

    #[test]
    fn product_cylinder() {
        for (scale, d) in [(1.0, 1.0), (0.5, 1.0), (1.0, 4.0)] {
            let mesh = WarpedMesh {
                diameter: d,
                kappa: -1.0,
                scale,
                nt: 256,
                ntheta: 128,
                warp: Warp::Constant,
            };
            let lambda = warped_p2_eigenvalue(&mesh).unwrap();
            let expected = (PI * PI / (d * d)).min(1.0 / (scale * scale));
            assert!((lambda / expected - 1.0).abs() < 1e-3, "{lambda} vs {expected}");
        }
    }

    #[test]
    fn separated_modes_solve_assembled_operator() {
        let mesh = WarpedMesh {
            diameter: 1.0,
            kappa: -1.0,
            scale: 0.3,
            nt: 64,
            ntheta: 16,
            warp: Warp::Cosh,
        };
        let f = mesh.profile();
        let grid = WeightedGrid::with_weight(mesh.diameter, mesh.nt, &f).unwrap();
        let (mut diag, off) = grid.symmetric_operator();
        let nu = mesh.angular_eigenvalue(1);
        for (dj, t) in diag.iter_mut().zip(&grid.nodes) {
            *dj += nu / (mesh.scale * f(*t)).powi(2);
        }
        let start: Vec<f64> = grid.mass.iter().map(|m| m.sqrt()).collect();
        let (theta, x) = smallest_eigenpair(&diag, &off, None, start).unwrap();
        let ht = std::f64::consts::TAU / mesh.ntheta as f64;
        let u: Vec<Vec<f64>> = x
            .iter()
            .zip(&grid.mass)
            .map(|(xj, m)| (0..mesh.ntheta).map(|i| xj / m.sqrt() * (ht * i as f64).cos()).collect())
            .collect();
        let lu = mesh.apply_laplacian(&u).unwrap();
        let scale = u.iter().flatten().fold(0.0f64, |a, v| a.max(v.abs()));
        for (row_l, row_u) in lu.iter().zip(&u) {
            for (a, b) in row_l.iter().zip(row_u) {
                assert!((a - theta * b).abs() < 1e-8 * theta * scale);
            }
        }
    }

    #[test]
    fn lambda0_on_the_two_sphere_model() {
        let params = Params::new(2.0, 2.0, 1.0).unwrap();
        assert!((lambda0(&params, 512, 0).unwrap() - 2.0).abs() < 1e-4);
        assert!(lambda0(&Params::new(2.0, 2.0, -1.0).unwrap(), 64, 0).is_err());
    }
}
