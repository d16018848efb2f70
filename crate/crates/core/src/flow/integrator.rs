//! Dormand–Prince 5(4) with PI step control and the classical continuous extension.
//!
//! Backward runs integrate in `s = |t − t₀|` against the negated right-hand
//! side; everything stored or reported uses the real time `t`.

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

const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

const SAFE: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;
const BETA: f64 = 0.04;
const EXPO1: f64 = 0.2 - BETA * 0.75;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepControl {
    pub rtol: f64,
    pub atol: f64,
    /// Largest admissible |step|; `None` means the whole span.
    pub h_max: Option<f64>,
    pub h_init: Option<f64>,
    pub max_steps: usize,
}

impl Default for StepControl {
    fn default() -> Self {
        Self { rtol: 1e-9, atol: 1e-12, h_max: None, h_init: None, max_steps: 1_000_000 }
    }
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct Stats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

/// What the observer wants after an accepted step.
pub enum Control<T> {
    Continue,
    Stop(T),
}

pub struct Accepted<'a> {
    pub t: f64,
    pub y: &'a [f64],
    pub dydt: &'a [f64],
    pub h: f64,
}

/// Dense interpolant of the step just taken, in real time.
pub struct StepInterpolant<'a> {
    t_old: f64,
    t_new: f64,
    rcont: &'a [Vec<f64>; 5],
}

impl StepInterpolant<'_> {
    pub fn eval(&self, t: f64, out: &mut [f64]) {
        let theta = (t - self.t_old) / (self.t_new - self.t_old);
        let theta1 = 1.0 - theta;
        let [r1, r2, r3, r4, r5] = self.rcont;
        for i in 0..out.len() {
            out[i] = r1[i] + theta * (r2[i] + theta1 * (r3[i] + theta * (r4[i] + theta1 * r5[i])));
        }
    }

    /// States at `pieces − 1` equally spaced interior times of the step.
    pub fn interior(&self, pieces: usize) -> Vec<(f64, Vec<f64>)> {
        (1..pieces)
            .map(|i| {
                let t = self.t_old + (self.t_new - self.t_old) * i as f64 / pieces as f64;
                let mut y = vec![0.0; self.rcont[0].len()];
                self.eval(t, &mut y);
                (t, y)
            })
            .collect()
    }

    pub fn contains(&self, t: f64) -> bool {
        let (lo, hi) = if self.t_old <= self.t_new { (self.t_old, self.t_new) } else { (self.t_new, self.t_old) };
        t >= lo && t <= hi
    }
}

pub enum Outcome<T> {
    Finished,
    Stopped(T),
    Underflow,
}

fn err_norm(err: &[f64], y: &[f64], ynew: &[f64], c: &StepControl) -> f64 {
    let n = err.len().max(1) as f64;
    let s: f64 = err
        .iter()
        .zip(y)
        .zip(ynew)
        .map(|((e, a), b)| {
            let sc = c.atol + c.rtol * a.abs().max(b.abs());
            (e / sc).powi(2)
        })
        .sum();
    (s / n).sqrt()
}

fn initial_step(
    f: &mut dyn FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
    t0: f64,
    dir: f64,
    y0: &[f64],
    f0: &[f64],
    c: &StepControl,
    h_max: f64,
    stats: &mut Stats,
) -> Result<f64> {
    let sc: Vec<f64> = y0.iter().map(|y| c.atol + c.rtol * y.abs()).collect();
    let rms = |v: &[f64]| -> f64 {
        (v.iter().zip(&sc).map(|(x, s)| (x / s).powi(2)).sum::<f64>() / v.len().max(1) as f64).sqrt()
    };
    let d0 = rms(y0);
    let d1 = rms(f0);
    let mut h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    h0 = h0.min(h_max);
    let y1: Vec<f64> = y0.iter().zip(f0).map(|(y, k)| y + dir * h0 * k).collect();
    let mut f1 = vec![0.0; y0.len()];
    f(t0 + dir * h0, &y1, &mut f1)?;
    stats.evaluations += 1;
    let diff: Vec<f64> = f1.iter().zip(f0).map(|(a, b)| a - b).collect();
    let d2 = rms(&diff) / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    Ok((100.0 * h0).min(h1).min(h_max))
}

/// Integrates `y' = f(t, y)` from `t0` to `t_end`.
///
/// `on_step` sees every accepted step together with its dense interpolant and
/// may stop the run early.
pub fn solve<T>(
    f: &mut dyn FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
    t0: f64,
    y0: &[f64],
    t_end: f64,
    control: &StepControl,
    on_step: &mut dyn FnMut(&Accepted, &StepInterpolant) -> Result<Control<T>>,
    stats: &mut Stats,
) -> Result<Outcome<T>> {
    let dim = y0.len();
    let span = (t_end - t0).abs();
    if span == 0.0 {
        return Ok(Outcome::Finished);
    }
    let dir = if t_end > t0 { 1.0 } else { -1.0 };
    let h_max = control.h_max.unwrap_or(span).min(span);

    let mut y = y0.to_vec();
    let mut k1 = vec![0.0; dim];
    f(t0, &y, &mut k1)?;
    stats.evaluations += 1;

    let mut h = match control.h_init {
        Some(h) => h.abs().min(h_max),
        None => initial_step(f, t0, dir, &y, &k1, control, h_max, stats)?,
    };

    let mut k2 = vec![0.0; dim];
    let mut k3 = vec![0.0; dim];
    let mut k4 = vec![0.0; dim];
    let mut k5 = vec![0.0; dim];
    let mut k6 = vec![0.0; dim];
    let mut k7 = vec![0.0; dim];
    let mut ys = vec![0.0; dim];
    let mut ynew = vec![0.0; dim];
    let mut err = vec![0.0; dim];
    let mut rcont: [Vec<f64>; 5] = std::array::from_fn(|_| vec![0.0; dim]);

    let mut s = 0.0_f64;
    let mut facold = 1e-4_f64;
    let mut last_rejected = false;
    let mut steps = 0usize;

    loop {
        if steps >= control.max_steps {
            return Err(Error::StepLimit(control.max_steps));
        }
        steps += 1;
        let remaining = span - s;
        let mut last = false;
        if h >= remaining * (1.0 - 1e-12) {
            h = remaining;
            last = true;
        }
        let t = t0 + dir * s;
        if h < 4.0 * f64::EPSILON * t.abs().max(1.0) {
            return Ok(Outcome::Underflow);
        }
        // real-time step is dir*h; stage derivatives are dy/dt, so the s-derivative is dir*k
        let dh = dir * h;
        let mut stage = |coef: &[(f64, &Vec<f64>)], out_t: f64, out: &mut Vec<f64>| -> Result<()> {
            for i in 0..dim {
                let mut acc = y[i];
                for (a, k) in coef {
                    acc += dh * a * k[i];
                }
                ys[i] = acc;
            }
            f(out_t, &ys, out)
        };
        stage(&[(A21, &k1)], t + C2 * dh, &mut k2)?;
        stage(&[(A31, &k1), (A32, &k2)], t + C3 * dh, &mut k3)?;
        stage(&[(A41, &k1), (A42, &k2), (A43, &k3)], t + C4 * dh, &mut k4)?;
        stage(&[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)], t + C5 * dh, &mut k5)?;
        stage(&[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)], t + dh, &mut k6)?;
        for i in 0..dim {
            ynew[i] = y[i] + dh * (A71 * k1[i] + A73 * k3[i] + A74 * k4[i] + A75 * k5[i] + A76 * k6[i]);
        }
        let t_new = if last { t_end } else { t + dh };
        f(t_new, &ynew, &mut k7)?;
        stats.evaluations += 6;

        for i in 0..dim {
            err[i] = dh * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
        }
        let en = err_norm(&err, &y, &ynew, control);
        if !en.is_finite() {
            stats.rejected += 1;
            h *= FAC_MIN;
            last_rejected = true;
            continue;
        }

        let fac11 = en.powf(EXPO1);
        let fac = (fac11 / facold.powf(BETA) / SAFE).clamp(1.0 / FAC_MAX, 1.0 / FAC_MIN);
        let mut h_new = h / fac;

        if en <= 1.0 {
            facold = en.max(1e-4);
            stats.accepted += 1;
            for i in 0..dim {
                let ydiff = ynew[i] - y[i];
                let bspl = dh * k1[i] - ydiff;
                rcont[0][i] = y[i];
                rcont[1][i] = ydiff;
                rcont[2][i] = bspl;
                rcont[3][i] = ydiff - dh * k7[i] - bspl;
                rcont[4][i] = dh * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]);
            }
            let interp = StepInterpolant { t_old: t, t_new, rcont: &rcont };
            let acc = Accepted { t: t_new, y: &ynew, dydt: &k7, h };
            let ctl = on_step(&acc, &interp)?;
            std::mem::swap(&mut y, &mut ynew);
            std::mem::swap(&mut k1, &mut k7);
            s = if last { span } else { s + h };
            if let Control::Stop(v) = ctl {
                return Ok(Outcome::Stopped(v));
            }
            if last {
                return Ok(Outcome::Finished);
            }
            h_new = h_new.min(h_max);
            if last_rejected {
                h_new = h_new.min(h);
            }
            last_rejected = false;
        } else {
            h_new = h / (fac11 / SAFE).min(1.0 / FAC_MIN);
            stats.rejected += 1;
            last_rejected = true;
        }
        h = h_new;
    }
}

/// Cubic Hermite interpolation through stored `(t, y, y')` knots.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct Knots {
    pub t: Vec<f64>,
    pub y: Vec<Vec<f64>>,
    pub dydt: Vec<Vec<f64>>,
}

impl Knots {
    pub fn push(&mut self, t: f64, y: &[f64], dydt: &[f64]) {
        self.t.push(t);
        self.y.push(y.to_vec());
        self.dydt.push(dydt.to_vec());
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn range(&self) -> (f64, f64) {
        let (a, b) = (self.t[0], *self.t.last().unwrap());
        (a.min(b), a.max(b))
    }

    /// Index `i` with `t` between knots `i` and `i + 1`.
    fn locate(&self, t: f64) -> Result<usize> {
        let (lo, hi) = self.range();
        let slack = 1e-12 * (1.0 + lo.abs().max(hi.abs()));
        if self.t.len() < 2 || t < lo - slack || t > hi + slack {
            return Err(Error::OutOfRange { t, start: self.t[0], end: *self.t.last().unwrap() });
        }
        let forward = self.t[1] > self.t[0];
        let idx = self.t.partition_point(|&x| if forward { x <= t } else { x >= t });
        Ok(idx.clamp(1, self.t.len() - 1) - 1)
    }

    pub fn eval(&self, t: f64) -> Result<Vec<f64>> {
        let i = self.locate(t)?;
        let (t0, t1) = (self.t[i], self.t[i + 1]);
        let h = t1 - t0;
        let s = (t - t0) / h;
        let (s2, s3) = (s * s, s * s * s);
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        let (y0, y1, d0, d1) = (&self.y[i], &self.y[i + 1], &self.dydt[i], &self.dydt[i + 1]);
        Ok((0..y0.len())
            .map(|k| h00 * y0[k] + h10 * h * d0[k] + h01 * y1[k] + h11 * h * d1[k])
            .collect())
    }
}
