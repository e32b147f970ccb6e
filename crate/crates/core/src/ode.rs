//! Dormand–Prince 5(4) integrator with step-size control and upward
//! zero-crossing detection, specialised to small fixed-size systems.

#[derive(Debug, Clone, Copy)]
pub(crate) struct DormandPrince {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
    pub h_max: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Stop {
    End,
    Event,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Outcome<const N: usize> {
    pub t: f64,
    pub y: [f64; N],
    pub stop: Stop,
}

#[derive(Debug, Clone)]
pub(crate) struct Failure<const N: usize> {
    pub t: f64,
    pub y: [f64; N],
    pub reason: String,
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

#[inline]
fn comb<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for i in 0..N {
        let mut acc = 0.0;
        for (c, k) in terms {
            acc += c * k[i];
        }
        out[i] += h * acc;
    }
    out
}

impl DormandPrince {
    pub fn new(tol: f64) -> Self {
        DormandPrince {
            rtol: tol,
            atol: tol,
            max_steps: 10_000_000,
            h_max: f64::INFINITY,
        }
    }

    /// One step of size `h` from `(t, y)` with `k1 = f(t, y)`. Returns the
    /// fifth-order solution, its derivative and the scaled error norm.
    #[inline]
    pub fn step<F, const N: usize>(&self, f: &F, t: f64, y: &[f64; N], k1: &[f64; N], h: f64) -> ([f64; N], [f64; N], f64)
    where
        F: Fn(f64, &[f64; N]) -> [f64; N],
    {
        let k2 = f(t + C2 * h, &comb(y, h, &[(A21, k1)]));
        let k3 = f(t + C3 * h, &comb(y, h, &[(A31, k1), (A32, &k2)]));
        let k4 = f(t + C4 * h, &comb(y, h, &[(A41, k1), (A42, &k2), (A43, &k3)]));
        let k5 = f(t + C5 * h, &comb(y, h, &[(A51, k1), (A52, &k2), (A53, &k3), (A54, &k4)]));
        let k6 = f(
            t + h,
            &comb(y, h, &[(A61, k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
        );
        let y_new = comb(y, h, &[(B1, k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
        let k7 = f(t + h, &y_new);
        let mut err = 0.0;
        for i in 0..N {
            let e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let scale = self.atol + self.rtol * y[i].abs().max(y_new[i].abs());
            err += (e / scale).powi(2);
        }
        (y_new, k7, (err / N as f64).sqrt())
    }

    /// Integrates from `t0` to `t_end`, stopping early at the first upward
    /// zero crossing of `event` if one is given. `cap` bounds the step size
    /// from the current state; `observe` sees every accepted state,
    /// including the initial and the final one.
    pub fn integrate<F, G, C, O, const N: usize>(
        &self,
        f: &F,
        t0: f64,
        y0: [f64; N],
        t_end: f64,
        event: Option<G>,
        cap: C,
        mut observe: O,
    ) -> Result<Outcome<N>, Failure<N>>
    where
        F: Fn(f64, &[f64; N]) -> [f64; N],
        G: Fn(f64, &[f64; N]) -> f64,
        C: Fn(f64, &[f64; N], &[f64; N]) -> f64,
        O: FnMut(f64, &[f64; N]),
    {
        let mut t = t0;
        let mut y = y0;
        let mut k1 = f(t, &y);
        observe(t, &y);
        let span = t_end - t0;
        if span <= 0.0 {
            return Ok(Outcome { t, y, stop: Stop::End });
        }
        let mut h = self.initial_step(&k1, &y, span);
        let mut g_prev = event.as_ref().map(|g| g(t, &y));
        let mut rejected_last = false;
        for _ in 0..self.max_steps {
            let remaining = t_end - t;
            let h_try = h.min(remaining).min(self.h_max).min(cap(t, &y, &k1).max(1e-300));
            if h_try <= 1e-14 * t.abs().max(1.0) && remaining > 1e-14 * t.abs().max(1.0) {
                return Err(Failure {
                    t,
                    y,
                    reason: format!("step size underflow (h = {h_try:e})"),
                });
            }
            let (y_new, k_new, err) = self.step(f, t, &y, &k1, h_try);
            if !err.is_finite() || y_new.iter().any(|v| !v.is_finite()) {
                h = 0.1 * h_try;
                rejected_last = true;
                continue;
            }
            if err > 1.0 {
                h = h_try * (0.9 * err.powf(-0.2)).max(0.1);
                rejected_last = true;
                continue;
            }
            let t_new = if h_try >= remaining { t_end } else { t + h_try };
            if let (Some(g), Some(gp)) = (event.as_ref(), g_prev) {
                let g_new = g(t_new, &y_new);
                if gp < 0.0 && g_new >= 0.0 {
                    let (te, ye) = self.locate(f, g, t, &y, &k1, h_try, gp, g_new);
                    observe(te, &ye);
                    return Ok(Outcome { t: te, y: ye, stop: Stop::Event });
                }
                g_prev = Some(g_new);
            }
            t = t_new;
            y = y_new;
            k1 = k_new;
            observe(t, &y);
            if t >= t_end {
                return Ok(Outcome { t, y, stop: Stop::End });
            }
            let mut factor = 0.9 * err.max(1e-10).powf(-0.2);
            factor = factor.clamp(0.2, 5.0);
            if rejected_last {
                factor = factor.min(1.0);
            }
            rejected_last = false;
            h = h_try * factor;
        }
        Err(Failure {
            t,
            y,
            reason: format!("step limit of {} reached", self.max_steps),
        })
    }

    fn initial_step<const N: usize>(&self, k1: &[f64; N], y: &[f64; N], span: f64) -> f64 {
        let mut d0 = 0.0f64;
        let mut d1 = 0.0f64;
        for i in 0..N {
            let sc = self.atol + self.rtol * y[i].abs();
            d0 = d0.max((y[i] / sc).abs());
            d1 = d1.max((k1[i] / sc).abs());
        }
        let h = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
        h.min(span).min(self.h_max).min(0.01 * span).max(1e-12 * span)
    }

    /// Finds the first zero of the event on a step that is known to cross it,
    /// by Illinois regula falsi on the step length with exact re-stepping.
    #[allow(clippy::too_many_arguments)]
    fn locate<F, G, const N: usize>(
        &self,
        f: &F,
        g: &G,
        t: f64,
        y: &[f64; N],
        k1: &[f64; N],
        h: f64,
        g_lo: f64,
        g_hi: f64,
    ) -> (f64, [f64; N])
    where
        F: Fn(f64, &[f64; N]) -> [f64; N],
        G: Fn(f64, &[f64; N]) -> f64,
    {
        let (mut a, mut b) = (0.0, h);
        let (mut ga, mut gb) = (g_lo, g_hi);
        let mut best = (t + h, self.step(f, t, y, k1, h).0);
        let mut side = 0i8;
        for _ in 0..200 {
            let mut m = b - gb * (b - a) / (gb - ga);
            if !(m > a && m < b) {
                m = 0.5 * (a + b);
            }
            let ym = self.step(f, t, y, k1, m).0;
            let gm = g(t + m, &ym);
            best = (t + m, ym);
            if gm == 0.0 || (b - a) <= 4.0 * f64::EPSILON * (t.abs() + h) {
                break;
            }
            if gm < 0.0 {
                a = m;
                ga = gm;
                if side == -1 {
                    gb *= 0.5;
                }
                side = -1;
            } else {
                b = m;
                gb = gm;
                if side == 1 {
                    ga *= 0.5;
                }
                side = 1;
            }
            if gm.abs() < 1e-15 {
                break;
            }
        }
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn no_event(_: f64, _: &[f64; 2]) -> f64 {
        -1.0
    }

    #[test]
    fn harmonic_oscillator_accuracy() {
        let f = |_t: f64, y: &[f64; 2]| [y[1], -y[0]];
        let dp = DormandPrince::new(1e-11);
        let out = dp
            .integrate(&f, 0.0, [0.0, 1.0], 10.0, None::<fn(f64, &[f64; 2]) -> f64>, |_, _, _| f64::INFINITY, |_, _| {})
            .unwrap();
        assert_eq!(out.stop, Stop::End);
        assert!((out.y[0] - 10f64.sin()).abs() < 1e-9);
        assert!((out.y[1] - 10f64.cos()).abs() < 1e-9);
    }

    #[test]
    fn locates_zero_crossing() {
        // y = sin t crosses 0.5 upward at t = π/6
        let f = |_t: f64, y: &[f64; 2]| [y[1], -y[0]];
        let dp = DormandPrince::new(1e-12);
        let out = dp
            .integrate(&f, 0.0, [0.0, 1.0], 10.0, Some(|_t: f64, y: &[f64; 2]| y[0] - 0.5), |_, _, _| f64::INFINITY, |_, _| {})
            .unwrap();
        assert_eq!(out.stop, Stop::Event);
        assert!((out.t - std::f64::consts::FRAC_PI_6).abs() < 1e-11);
    }

    #[test]
    fn observer_sees_monotone_times() {
        let f = |t: f64, _y: &[f64; 2]| [t.cos(), 1.0];
        let dp = DormandPrince::new(1e-9);
        let mut ts = Vec::new();
        let out = dp
            .integrate(&f, 0.0, [0.0, 0.0], 5.0, Some(no_event), |_, _, _| 0.05, |t, _| ts.push(t))
            .unwrap();
        assert_eq!(out.t, 5.0);
        assert!(ts.windows(2).all(|w| w[1] > w[0]));
        assert!(ts.windows(2).all(|w| w[1] - w[0] <= 0.05 + 1e-15));
    }

    #[test]
    fn reports_step_limit() {
        let f = |_t: f64, y: &[f64; 2]| [y[1], -y[0]];
        let mut dp = DormandPrince::new(1e-10);
        dp.max_steps = 3;
        let err = dp
            .integrate(&f, 0.0, [0.0, 1.0], 100.0, None::<fn(f64, &[f64; 2]) -> f64>, |_, _, _| f64::INFINITY, |_, _| {})
            .unwrap_err();
        assert!(err.reason.contains("step limit"));
        assert!(err.t > 0.0);
    }
}
