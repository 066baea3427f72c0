//! Adaptive Dormand–Prince 5(4) integration of autonomous-in-spirit systems
//! `y' = f(t, y)` with a fixed-size state.

use crate::error::{Error, Result};

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
// Error coefficients: fifth-order weights minus the embedded fourth-order ones.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 5.0;
const DEFAULT_MAX_STEPS: usize = 5_000_000;

fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for (c, k) in terms {
        for i in 0..N {
            out[i] += h * c * k[i];
        }
    }
    out
}

/// Stateful integrator that can be advanced to successive target times while
/// keeping its adapted step size.
pub struct Dopri5<F, const N: usize> {
    f: F,
    t: f64,
    y: [f64; N],
    k1: [f64; N],
    h: f64,
    tol: f64,
    max_steps: usize,
    steps: usize,
}

impl<F, const N: usize> Dopri5<F, N>
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
{
    /// Absolute and relative tolerance are both `tol`.
    pub fn new(mut f: F, t0: f64, y0: [f64; N], tol: f64) -> Result<Self> {
        if !(tol > 0.0) {
            return Err(Error::InvalidInput(format!("tolerance must be positive, got {tol}")));
        }
        let k1 = f(t0, &y0);
        Ok(Self { f, t: t0, y: y0, k1, h: 0.0, tol, max_steps: DEFAULT_MAX_STEPS, steps: 0 })
    }

    pub fn with_max_steps(mut self, max_steps: usize) -> Self {
        self.max_steps = max_steps;
        self
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn state(&self) -> &[f64; N] {
        &self.y
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    fn error_norm(&self, y_new: &[f64; N], err: &[f64; N]) -> f64 {
        let mut acc = 0.0;
        for i in 0..N {
            let sc = self.tol + self.tol * self.y[i].abs().max(y_new[i].abs());
            acc += (err[i] / sc).powi(2);
        }
        (acc / N as f64).sqrt()
    }

    /// Hairer's starting step heuristic.
    fn initial_step(&mut self, dir: f64) -> f64 {
        let norm = |v: &[f64; N], y: &[f64; N], tol: f64| {
            (v.iter().zip(y).map(|(a, b)| (a / (tol + tol * b.abs())).powi(2)).sum::<f64>() / N as f64).sqrt()
        };
        let d0 = norm(&self.y, &self.y, self.tol);
        let d1 = norm(&self.k1, &self.y, self.tol);
        let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
        let y1 = axpy(&self.y, dir * h0, &[(1.0, &self.k1)]);
        let k2 = (self.f)(self.t + dir * h0, &y1);
        let diff: [f64; N] = std::array::from_fn(|i| k2[i] - self.k1[i]);
        let d2 = norm(&diff, &self.y, self.tol) / h0;
        let h1 = if d1.max(d2) <= 1e-15 { (h0 * 1e-3).max(1e-6) } else { (0.01 / d1.max(d2)).powf(0.2) };
        (100.0 * h0).min(h1)
    }

    /// Integrates up to `t_target` exactly (the last step is shortened).
    pub fn advance_to(&mut self, t_target: f64) -> Result<&[f64; N]> {
        let span = t_target - self.t;
        if span == 0.0 {
            return Ok(&self.y);
        }
        let dir = span.signum();
        if self.h == 0.0 || self.h.signum() != dir {
            self.h = dir * self.initial_step(dir);
        }
        let mut h_carry = self.h;
        while (t_target - self.t) * dir > 0.0 {
            if self.steps >= self.max_steps {
                return Err(Error::IntegrationFailure { t_reached: self.t, reason: "step limit reached".into() });
            }
            let remaining = t_target - self.t;
            let last = h_carry.abs() >= remaining.abs();
            let h = if last { remaining } else { h_carry };
            let h_min = 1e-14 * self.t.abs().max(1.0);
            if h.abs() < h_min && !last {
                return Err(Error::IntegrationFailure { t_reached: self.t, reason: "step size underflow".into() });
            }
            let (t, y, k1) = (self.t, self.y, self.k1);
            let k2 = (self.f)(t + C2 * h, &axpy(&y, h, &[(A21, &k1)]));
            let k3 = (self.f)(t + C3 * h, &axpy(&y, h, &[(A31, &k1), (A32, &k2)]));
            let k4 = (self.f)(t + C4 * h, &axpy(&y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
            let k5 = (self.f)(t + C5 * h, &axpy(&y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]));
            let k6 = (self.f)(t + h, &axpy(&y, h, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]));
            let y_new = axpy(&y, h, &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
            let k7 = (self.f)(t + h, &y_new);
            let err: [f64; N] = std::array::from_fn(|i| {
                h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i])
            });
            let en = self.error_norm(&y_new, &err);
            if !en.is_finite() || y_new.iter().any(|v| v.is_nan()) {
                h_carry = h * FAC_MIN;
                if h_carry.abs() < h_min {
                    return Err(Error::IntegrationFailure { t_reached: t, reason: "non-finite state".into() });
                }
                continue;
            }
            let fac = if en == 0.0 { FAC_MAX } else { (SAFETY * en.powf(-0.2)).clamp(FAC_MIN, FAC_MAX) };
            if en <= 1.0 {
                self.t = if last { t_target } else { t + h };
                self.y = y_new;
                self.k1 = k7;
                self.steps += 1;
                if !last {
                    h_carry = h * fac;
                    self.h = h_carry;
                }
            } else {
                h_carry = h * fac.min(1.0);
                if h_carry.abs() < h_min {
                    return Err(Error::IntegrationFailure { t_reached: t, reason: "step size underflow".into() });
                }
            }
        }
        Ok(&self.y)
    }

    /// Replaces the state (e.g. after a projection); the step size is kept.
    pub fn reset_state(&mut self, y: [f64; N]) {
        self.k1 = (self.f)(self.t, &y);
        self.y = y;
    }
}

/// One-shot integration from `t0` to `t1`.
pub fn integrate<F, const N: usize>(f: F, t0: f64, y0: [f64; N], t1: f64, tol: f64) -> Result<[f64; N]>
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
{
    let mut ode = Dopri5::new(f, t0, y0, tol)?;
    ode.advance_to(t1)?;
    Ok(*ode.state())
}
