//! Dormand–Prince 5(4) integrator with PI step-size control and terminal
//! event location.

/// Autonomous or time-dependent first-order system of fixed dimension.
pub trait OdeSystem<const N: usize> {
    fn rhs(&self, t: f64, y: &[f64; N]) -> [f64; N];
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub h_init: Option<f64>,
    pub h_max: f64,
    pub max_steps: usize,
}

impl OdeOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self { rtol: tol, atol: tol, h_init: None, h_max: f64::INFINITY, max_steps: 5_000_000 }
    }
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self::with_tol(1e-10)
    }
}

/// Observer verdict after each accepted step.
pub enum Control<T> {
    Continue,
    Stop(T),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OdeFailure {
    StepUnderflow { t: f64 },
    MaxSteps { t: f64 },
    NonFinite { t: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub enum Finish<T> {
    /// Reached `t_end`.
    End,
    /// Terminal event function crossed zero.
    Event,
    /// Observer asked to stop.
    Observer(T),
}

#[derive(Debug, Clone)]
pub struct OdeRun<T, const N: usize> {
    pub t: f64,
    pub y: [f64; N],
    pub accepted: usize,
    pub rejected: usize,
    pub finish: Finish<T>,
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
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

fn comb<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for (c, k) in terms {
        if *c != 0.0 {
            for i in 0..N {
                out[i] += h * c * k[i];
            }
        }
    }
    out
}

/// One Dormand–Prince step from `(t, y)` with derivative `k1 = f(t, y)`.
/// Returns the fifth-order solution, its derivative and the error vector.
pub fn dopri5_step<S: OdeSystem<N>, const N: usize>(
    sys: &S,
    t: f64,
    y: &[f64; N],
    k1: &[f64; N],
    h: f64,
) -> ([f64; N], [f64; N], [f64; N]) {
    let k2 = sys.rhs(t + C2 * h, &comb(y, h, &[(A21, k1)]));
    let k3 = sys.rhs(t + C3 * h, &comb(y, h, &[(A31, k1), (A32, &k2)]));
    let k4 = sys.rhs(t + C4 * h, &comb(y, h, &[(A41, k1), (A42, &k2), (A43, &k3)]));
    let k5 = sys.rhs(t + C5 * h, &comb(y, h, &[(A51, k1), (A52, &k2), (A53, &k3), (A54, &k4)]));
    let k6 = sys.rhs(
        t + h,
        &comb(y, h, &[(A61, k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
    );
    let y_new = comb(y, h, &[(A71, k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
    let k7 = sys.rhs(t + h, &y_new);
    let mut err = [0.0; N];
    for i in 0..N {
        err[i] = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
    }
    (y_new, k7, err)
}

fn err_norm<const N: usize>(y: &[f64; N], y_new: &[f64; N], err: &[f64; N], o: &OdeOptions) -> f64 {
    let s: f64 = (0..N)
        .map(|i| {
            let sc = o.atol + o.rtol * y[i].abs().max(y_new[i].abs());
            (err[i] / sc).powi(2)
        })
        .sum();
    (s / N as f64).sqrt()
}

fn initial_step<S: OdeSystem<N>, const N: usize>(
    sys: &S,
    t: f64,
    y: &[f64; N],
    f0: &[f64; N],
    dir: f64,
    o: &OdeOptions,
) -> f64 {
    let sc = |i: usize| o.atol + o.rtol * y[i].abs();
    let d0 = ((0..N).map(|i| (y[i] / sc(i)).powi(2)).sum::<f64>() / N as f64).sqrt();
    let d1 = ((0..N).map(|i| (f0[i] / sc(i)).powi(2)).sum::<f64>() / N as f64).sqrt();
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    let y1 = comb(y, dir * h0, &[(1.0, f0)]);
    let f1 = sys.rhs(t + dir * h0, &y1);
    let d2 = ((0..N).map(|i| ((f1[i] - f0[i]) / sc(i)).powi(2)).sum::<f64>() / N as f64).sqrt() / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    (100.0 * h0).min(h1).min(o.h_max)
}

/// Integrates from `t0` towards `t_end`. Integration stops at `t_end`, when
/// `event` changes sign (located to near machine precision), or when the
/// observer returns [`Control::Stop`].
pub fn integrate<S, T, E, F, const N: usize>(
    sys: &S,
    t0: f64,
    y0: [f64; N],
    t_end: f64,
    opts: &OdeOptions,
    event: E,
    mut observe: F,
) -> Result<OdeRun<T, N>, OdeFailure>
where
    S: OdeSystem<N>,
    E: Fn(f64, &[f64; N]) -> f64,
    F: FnMut(f64, &[f64; N]) -> Control<T>,
{
    const SAFETY: f64 = 0.9;
    const BETA: f64 = 0.04;
    const ALPHA: f64 = 0.2 - 0.75 * BETA;
    let dir = if t_end >= t0 { 1.0 } else { -1.0 };
    let mut t = t0;
    let mut y = y0;
    let mut k1 = sys.rhs(t, &y);
    let mut h = opts.h_init.unwrap_or_else(|| initial_step(sys, t, &y, &k1, dir, opts)).abs();
    let mut err_prev: f64 = 1e-4;
    let mut g_prev = event(t, &y);
    let (mut accepted, mut rejected) = (0usize, 0usize);
    loop {
        if accepted + rejected >= opts.max_steps {
            return Err(OdeFailure::MaxSteps { t });
        }
        let remaining = (t_end - t).abs();
        let mut last = false;
        if h >= remaining {
            h = remaining;
            last = true;
        }
        if h <= 1e-14 * t.abs().max(1.0) && !last {
            return Err(OdeFailure::StepUnderflow { t });
        }
        let (y_new, k_new, err) = dopri5_step(sys, t, &y, &k1, dir * h);
        let en = err_norm(&y, &y_new, &err, opts);
        if !en.is_finite() {
            rejected += 1;
            h *= 0.2;
            continue;
        }
        if en > 1.0 {
            rejected += 1;
            h *= (SAFETY * en.powf(-ALPHA)).max(0.2);
            continue;
        }
        let t_new = if last { t_end } else { t + dir * h };
        let g_new = event(t_new, &y_new);
        if g_prev != 0.0 && g_new.signum() != g_prev.signum() {
            let (te, ye) = locate_event(sys, t, &y, &k1, dir * h, g_prev, g_new, &event);
            return Ok(OdeRun { t: te, y: ye, accepted: accepted + 1, rejected, finish: Finish::Event });
        }
        accepted += 1;
        t = t_new;
        y = y_new;
        k1 = k_new;
        g_prev = g_new;
        if y.iter().any(|v| !v.is_finite()) {
            return Err(OdeFailure::NonFinite { t });
        }
        if let Control::Stop(v) = observe(t, &y) {
            return Ok(OdeRun { t, y, accepted, rejected, finish: Finish::Observer(v) });
        }
        if last {
            return Ok(OdeRun { t, y, accepted, rejected, finish: Finish::End });
        }
        let en = en.max(1e-10);
        let fac = SAFETY * en.powf(-ALPHA) * err_prev.powf(BETA);
        h = (h * fac.clamp(0.2, 10.0)).min(opts.h_max);
        err_prev = en;
    }
}

/// Finds the step fraction where the event changes sign by Illinois
/// regula falsi on single Runge–Kutta steps from the accepted state.
#[allow(clippy::too_many_arguments)]
fn locate_event<S, E, const N: usize>(
    sys: &S,
    t: f64,
    y: &[f64; N],
    k1: &[f64; N],
    h: f64,
    g0: f64,
    g1: f64,
    event: &E,
) -> (f64, [f64; N])
where
    S: OdeSystem<N>,
    E: Fn(f64, &[f64; N]) -> f64,
{
    let (mut a, mut fa) = (0.0, g0);
    let (mut b, mut fb) = (h, g1);
    let mut side = 0i8;
    let mut best = (b, dopri5_step(sys, t, y, k1, b).0);
    for _ in 0..100 {
        let c = (a * fb - b * fa) / (fb - fa);
        let yc = dopri5_step(sys, t, y, k1, c).0;
        let fc = event(t + c, &yc);
        best = (c, yc);
        if fc == 0.0 || (b - a).abs() <= 1e-15 * h.abs() {
            break;
        }
        if fc.signum() == fb.signum() {
            b = c;
            fb = fc;
            if side == -1 {
                fa *= 0.5;
            }
            side = -1;
        } else {
            a = c;
            fa = fc;
            if side == 1 {
                fb *= 0.5;
            }
            side = 1;
        }
        if fc.abs() <= 1e-15 * (fa.abs().max(fb.abs())) {
            break;
        }
    }
    (t + best.0, best.1)
}
