//! Dormand–Prince 5(4) with PI step-size control.
//!
//! The integrator steps exactly onto every requested output abscissa, so
//! samples carry the full one-step accuracy and need no interpolation.

/// Why an integration stopped early.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OdeFailure {
    /// The controller asked for a step below the representable minimum.
    StepUnderflow { t: f64, h: f64 },
    /// The step budget ran out before reaching the last output.
    MaxSteps { t: f64 },
    /// The right-hand side produced a non-finite value.
    NonFinite { t: f64 },
}

#[derive(Debug, Clone, Copy)]
pub struct Dopri5 {
    pub rtol: f64,
    pub atol: f64,
    /// When set, the absolute tolerance of each component is scaled by the
    /// largest magnitude that component has reached so far.
    pub running_scale: bool,
    pub max_steps: usize,
    pub safety: f64,
}

impl Default for Dopri5 {
    fn default() -> Self {
        Self { rtol: 1e-12, atol: 1e-12, running_scale: false, max_steps: 200_000, safety: 0.9 }
    }
}

#[derive(Debug, Clone, Default)]
pub struct Stats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
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

const BETA: f64 = 0.04;
const EXPO: f64 = 0.2 - BETA * 0.75;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;

fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for (i, o) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        for (c, k) in terms {
            acc += c * k[i];
        }
        *o += h * acc;
    }
    out
}

impl Dopri5 {
    fn scales<const N: usize>(&self, peak: &[f64; N], a: &[f64; N], b: &[f64; N]) -> [f64; N] {
        let mut sc = [0.0; N];
        for i in 0..N {
            let mag = a[i].abs().max(b[i].abs());
            let atol = if self.running_scale { self.atol * peak[i].max(mag) } else { self.atol };
            sc[i] = atol + self.rtol * mag;
        }
        sc
    }

    fn norm<const N: usize>(err: &[f64; N], sc: &[f64; N]) -> f64 {
        let mut sum = 0.0;
        for i in 0..N {
            if err[i] != 0.0 {
                let r = err[i] / sc[i].max(f64::MIN_POSITIVE);
                sum += r * r;
            }
        }
        (sum / N as f64).sqrt()
    }

    fn initial_step<F, const N: usize>(&self, f: &mut F, t0: f64, y0: &[f64; N], f0: &[f64; N], peak: &[f64; N], span: f64) -> f64
    where
        F: FnMut(f64, &[f64; N]) -> [f64; N],
    {
        let sc = self.scales(peak, y0, y0);
        let d0 = Self::norm(y0, &sc);
        let d1 = Self::norm(f0, &sc);
        let mut h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
        h0 = h0.min(span);
        let y1 = axpy(y0, h0, &[(1.0, f0)]);
        let f1 = f(t0 + h0, &y1);
        let mut diff = [0.0; N];
        for i in 0..N {
            diff[i] = f1[i] - f0[i];
        }
        let d2 = Self::norm(&diff, &sc) / h0;
        let h1 = if d1.max(d2) <= 1e-15 {
            (h0 * 1e-3).max(1e-6)
        } else {
            (0.01 / d1.max(d2)).powf(0.2)
        };
        (100.0 * h0).min(h1).min(span)
    }

    /// Integrates `y' = f(t, y)` from `(t0, y0)` and returns the state at each
    /// of `outputs`, which must be non-decreasing and `>= t0`.
    pub fn solve<F, const N: usize>(
        &self,
        f: F,
        t0: f64,
        y0: [f64; N],
        outputs: &[f64],
        stats: &mut Stats,
    ) -> Result<Vec<[f64; N]>, OdeFailure>
    where
        F: FnMut(f64, &[f64; N]) -> [f64; N],
    {
        self.solve_until(f, |_| false, t0, y0, outputs, stats)
    }

    /// Like [`Dopri5::solve`], but stops after the first accepted step whose
    /// state satisfies `stop`. The returned vector then holds only the
    /// outputs reached before stopping.
    pub fn solve_until<F, S, const N: usize>(
        &self,
        mut f: F,
        stop: S,
        t0: f64,
        y0: [f64; N],
        outputs: &[f64],
        stats: &mut Stats,
    ) -> Result<Vec<[f64; N]>, OdeFailure>
    where
        F: FnMut(f64, &[f64; N]) -> [f64; N],
        S: Fn(&[f64; N]) -> bool,
    {
        let mut result = Vec::with_capacity(outputs.len());
        let mut t = t0;
        let mut y = y0;
        let mut peak = y0.map(f64::abs);
        let mut next = 0;
        while next < outputs.len() && outputs[next] <= t {
            result.push(y);
            next += 1;
        }
        if next == outputs.len() {
            return Ok(result);
        }
        let t_end = outputs[outputs.len() - 1];
        let mut k1 = f(t, &y);
        stats.evaluations += 1;
        if k1.iter().any(|v| !v.is_finite()) {
            return Err(OdeFailure::NonFinite { t });
        }
        let mut h = self.initial_step(&mut f, t, &y, &k1, &peak, t_end - t);
        stats.evaluations += 1;
        let mut err_old: f64 = 1e-4;
        let mut rejected_last = false;

        for _ in 0..self.max_steps {
            let target = outputs[next];
            let mut hits_target = false;
            let h_proposed = h;
            if t + h >= target || (target - t - h) < 1e-12 * target.abs().max(1.0) {
                h = target - t;
                hits_target = true;
            }
            if h.abs() <= 16.0 * f64::EPSILON * t.abs().max(1.0) {
                return Err(OdeFailure::StepUnderflow { t, h });
            }

            let y2 = axpy(&y, h, &[(A21, &k1)]);
            let k2 = f(t + C2 * h, &y2);
            let y3 = axpy(&y, h, &[(A31, &k1), (A32, &k2)]);
            let k3 = f(t + C3 * h, &y3);
            let y4 = axpy(&y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]);
            let k4 = f(t + C4 * h, &y4);
            let y5 = axpy(&y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]);
            let k5 = f(t + C5 * h, &y5);
            let y6 = axpy(&y, h, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]);
            let t_new = if hits_target { target } else { t + h };
            let k6 = f(t_new, &y6);
            let y_new = axpy(&y, h, &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
            let k7 = f(t_new, &y_new);
            stats.evaluations += 6;

            if y_new.iter().chain(k7.iter()).any(|v| !v.is_finite()) {
                // Treat like a rejected step with a hard shrink.
                stats.rejected += 1;
                h *= FAC_MIN;
                rejected_last = true;
                continue;
            }

            let mut err = [0.0; N];
            for i in 0..N {
                err[i] = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            }
            let sc = self.scales(&peak, &y, &y_new);
            let e = Self::norm(&err, &sc);

            let fac11 = e.powf(EXPO);
            if e <= 1.0 {
                stats.accepted += 1;
                let mut fac = fac11 / err_old.powf(BETA);
                fac = (fac / self.safety).clamp(1.0 / FAC_MAX, 1.0 / FAC_MIN);
                let mut h_new = h / fac;
                if rejected_last {
                    h_new = h_new.min(h);
                }
                err_old = e.max(1e-4);
                rejected_last = false;
                t = t_new;
                y = y_new;
                k1 = k7;
                for i in 0..N {
                    peak[i] = peak[i].max(y[i].abs());
                }
                while next < outputs.len() && outputs[next] <= t {
                    result.push(y);
                    next += 1;
                }
                if next == outputs.len() || stop(&y) {
                    return Ok(result);
                }
                // Do not let a shortened landing step shrink the next one.
                h = if hits_target { h_new.max(h_proposed) } else { h_new };
            } else {
                stats.rejected += 1;
                h /= (fac11 / self.safety).min(1.0 / FAC_MIN);
                rejected_last = true;
            }
        }
        Err(OdeFailure::MaxSteps { t })
    }
}
