//! Dormand–Prince 5(4) with cubic Hermite dense output.

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Largest allowed |step|.
    pub h_max: f64,
    /// Smallest allowed |step|; going below means the solution is blowing up.
    pub h_min: f64,
    pub max_steps: usize,
    /// Any state component beyond this magnitude aborts the run.
    pub blowup: f64,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-12,
            h_max: 0.5,
            h_min: 1e-12,
            max_steps: 1_000_000,
            blowup: 1e8,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OdeError {
    #[error("step size underflow at t = {t}: the solution is blowing up")]
    StepUnderflow { t: f64, y: Vec<f64> },
    #[error("state left the bounded region at t = {t}")]
    BlowUp { t: f64, y: Vec<f64> },
    #[error("step budget exhausted at t = {t}")]
    MaxSteps { t: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepControl {
    Continue,
    Stop,
}

/// Accepted steps of one run, with derivatives for Hermite interpolation.
#[derive(Debug, Clone)]
pub struct OdeSolution<const N: usize> {
    pub t: Vec<f64>,
    pub y: Vec<[f64; N]>,
    pub dy: Vec<[f64; N]>,
}

impl<const N: usize> OdeSolution<N> {
    /// Cubic Hermite interpolant on the step containing `t` (clamped to the
    /// covered range).
    pub fn interpolate(&self, t: f64) -> [f64; N] {
        let n = self.t.len();
        if n == 1 {
            return self.y[0];
        }
        let forward = self.t[n - 1] >= self.t[0];
        // index of the step [t_i, t_{i+1}] containing t
        let i = if forward {
            self.t.partition_point(|s| *s <= t)
        } else {
            self.t.partition_point(|s| *s >= t)
        }
        .clamp(1, n - 1)
            - 1;
        self.hermite(i, t)
    }

    /// Hermite interpolant on step `i` evaluated at `t`.
    pub fn hermite(&self, i: usize, t: f64) -> [f64; N] {
        let (t0, t1) = (self.t[i], self.t[i + 1]);
        let h = t1 - t0;
        let s = (t - t0) / h;
        let h00 = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s);
        let h10 = s * (1.0 - s) * (1.0 - s);
        let h01 = s * s * (3.0 - 2.0 * s);
        let h11 = s * s * (s - 1.0);
        let mut out = [0.0; N];
        for k in 0..N {
            out[k] = h00 * self.y[i][k]
                + h * h10 * self.dy[i][k]
                + h01 * self.y[i + 1][k]
                + h * h11 * self.dy[i + 1][k];
        }
        out
    }
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

fn combine<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for (c, k) in terms {
        for i in 0..N {
            out[i] += h * c * k[i];
        }
    }
    out
}

fn error_norm<const N: usize>(
    err: &[f64; N],
    y: &[f64; N],
    y_new: &[f64; N],
    o: &OdeOptions,
) -> f64 {
    let mut acc = 0.0;
    for i in 0..N {
        let sc = o.atol + o.rtol * y[i].abs().max(y_new[i].abs());
        acc += (err[i] / sc).powi(2);
    }
    (acc / N as f64).sqrt()
}

fn rms<const N: usize>(v: &[f64; N], y: &[f64; N], o: &OdeOptions) -> f64 {
    let mut acc = 0.0;
    for i in 0..N {
        let sc = o.atol + o.rtol * y[i].abs();
        acc += (v[i] / sc).powi(2);
    }
    (acc / N as f64).sqrt()
}

/// Integrates `y' = f(t, y)` from `t0` towards `t_end` (either direction).
///
/// `observer` sees every accepted step and may stop the run early.
pub fn dopri5<const N: usize, F, O>(
    mut f: F,
    t0: f64,
    y0: [f64; N],
    t_end: f64,
    opts: &OdeOptions,
    mut observer: O,
) -> Result<OdeSolution<N>, OdeError>
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
    O: FnMut(f64, &[f64; N]) -> StepControl,
{
    let dir = if t_end >= t0 { 1.0 } else { -1.0 };
    let mut t = t0;
    let mut y = y0;
    let mut k1 = f(t, &y);
    let mut sol = OdeSolution {
        t: vec![t],
        y: vec![y],
        dy: vec![k1],
    };
    if t_end == t0 || observer(t, &y) == StepControl::Stop {
        return Ok(sol);
    }

    // Hairer's starting step heuristic
    let d0 = rms(&y, &y, opts);
    let d1 = rms(&k1, &y, opts);
    let mut h = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    };
    h = h.min(opts.h_max).min((t_end - t0).abs());
    let y1 = combine(&y, dir * h, &[(1.0, &k1)]);
    let f1 = f(t + dir * h, &y1);
    let mut diff = [0.0; N];
    for i in 0..N {
        diff[i] = f1[i] - k1[i];
    }
    let d2 = rms(&diff, &y, opts) / h;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    h = (100.0 * h).min(h1).min(opts.h_max).max(opts.h_min);

    let mut steps = 0;
    let mut last_rejected = false;
    loop {
        if steps >= opts.max_steps {
            return Err(OdeError::MaxSteps { t });
        }
        steps += 1;
        let remaining = (t_end - t).abs();
        let mut last = false;
        if h >= remaining {
            h = remaining;
            last = true;
        }
        let hs = dir * h;
        let k2 = f(t + C2 * hs, &combine(&y, hs, &[(A21, &k1)]));
        let k3 = f(t + C3 * hs, &combine(&y, hs, &[(A31, &k1), (A32, &k2)]));
        let k4 = f(
            t + C4 * hs,
            &combine(&y, hs, &[(A41, &k1), (A42, &k2), (A43, &k3)]),
        );
        let k5 = f(
            t + C5 * hs,
            &combine(&y, hs, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
        );
        let k6 = f(
            t + hs,
            &combine(
                &y,
                hs,
                &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
            ),
        );
        let y_new = combine(
            &y,
            hs,
            &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)],
        );
        let k7 = f(t + hs, &y_new);
        let mut err = [0.0; N];
        for i in 0..N {
            err[i] =
                hs * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
        }
        let en = error_norm(&err, &y, &y_new, opts);

        if !en.is_finite() || y_new.iter().any(|v| !v.is_finite()) {
            h *= 0.2;
            if h < opts.h_min {
                return Err(OdeError::StepUnderflow { t, y: y.to_vec() });
            }
            last_rejected = true;
            continue;
        }

        if en <= 1.0 {
            t = if last { t_end } else { t + hs };
            y = y_new;
            k1 = k7;
            sol.t.push(t);
            sol.y.push(y);
            sol.dy.push(k1);
            if y.iter().any(|v| v.abs() > opts.blowup) {
                return Err(OdeError::BlowUp { t, y: y.to_vec() });
            }
            if last || observer(t, &y) == StepControl::Stop {
                return Ok(sol);
            }
            let mut fac = if en == 0.0 { 10.0 } else { 0.9 * en.powf(-0.2) };
            fac = fac.clamp(0.2, 10.0);
            if last_rejected {
                fac = fac.min(1.0);
            }
            h = (h * fac).min(opts.h_max);
            last_rejected = false;
        } else {
            h *= (0.9 * en.powf(-0.2)).max(0.2);
            last_rejected = true;
        }
        if h < opts.h_min {
            return Err(OdeError::StepUnderflow { t, y: y.to_vec() });
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator_period() {
        let opts = OdeOptions::default();
        let sol = dopri5(
            |_, y: &[f64; 2]| [y[1], -y[0]],
            0.0,
            [1.0, 0.0],
            2.0 * std::f64::consts::PI,
            &opts,
            |_, _| StepControl::Continue,
        )
        .unwrap();
        let end = sol.y.last().unwrap();
        assert!((end[0] - 1.0).abs() < 1e-9);
        assert!(end[1].abs() < 1e-9);
        // dense output between steps
        let mid = sol.interpolate(1.0);
        assert!((mid[0] - 1f64.cos()).abs() < 1e-6);
    }

    #[test]
    fn backward_exponential() {
        let sol = dopri5(
            |_, y: &[f64; 1]| [y[0]],
            0.0,
            [1.0],
            -3.0,
            &OdeOptions::default(),
            |_, _| StepControl::Continue,
        )
        .unwrap();
        assert_eq!(*sol.t.last().unwrap(), -3.0);
        assert!((sol.y.last().unwrap()[0] - (-3f64).exp()).abs() < 1e-10);
        assert!((sol.interpolate(-1.5)[0] - (-1.5f64).exp()).abs() < 1e-6);
    }

    #[test]
    fn finite_time_blowup_is_detected() {
        // y' = y², y(0) = 1 blows up at t = 1
        let err = dopri5(
            |_, y: &[f64; 1]| [y[0] * y[0]],
            0.0,
            [1.0],
            2.0,
            &OdeOptions::default(),
            |_, _| StepControl::Continue,
        )
        .unwrap_err();
        assert!(matches!(
            err,
            OdeError::BlowUp { .. } | OdeError::StepUnderflow { .. }
        ));
    }
}
