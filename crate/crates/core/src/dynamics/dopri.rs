//! Dormand-Prince 5(4) with step-size control and 4th-order dense output,
//! following the classic DOPRI5 layout (FSAL, Hairer's continuous extension).

use crate::{Error, Result, C64};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepperOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Upper bound on the step; `f64::INFINITY` for none.
    pub max_step: f64,
    pub max_steps: usize,
}

impl Default for StepperOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-8,
            atol: 1e-10,
            max_step: f64::INFINITY,
            max_steps: 2_000_000,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
    pub rhs_evals: usize,
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

const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

/// Integrates `dy/dt = rhs(t, y)` from `t0` to `t_end`, overwriting `y`.
///
/// `outputs` must be sorted; every output time in `[t0, t_end]` is reported
/// through `emit`, interpolated with the dense output when it falls inside a
/// step. Times outside the interval are skipped (the caller handles them).
pub fn integrate<F, E>(
    mut rhs: F,
    t0: f64,
    y: &mut [C64],
    t_end: f64,
    outputs: &[f64],
    opts: &StepperOptions,
    mut emit: E,
) -> Result<StepStats>
where
    F: FnMut(f64, &[C64], &mut [C64]),
    E: FnMut(f64, &[C64]),
{
    let n = y.len();
    let mut stats = StepStats::default();
    let mut next_out = outputs.partition_point(|&s| s < t0);
    let end_out = outputs.partition_point(|&s| s <= t_end);

    while next_out < end_out && outputs[next_out] == t0 {
        emit(t0, y);
        next_out += 1;
    }
    if t_end <= t0 || n == 0 {
        return Ok(stats);
    }

    let zero = C64::new(0.0, 0.0);
    let mut k1 = vec![zero; n];
    let mut k2 = vec![zero; n];
    let mut k3 = vec![zero; n];
    let mut k4 = vec![zero; n];
    let mut k5 = vec![zero; n];
    let mut k6 = vec![zero; n];
    let mut k7 = vec![zero; n];
    let mut ytmp = vec![zero; n];
    let mut y1 = vec![zero; n];
    let mut rcont = vec![zero; 5 * n];
    let mut yout = vec![zero; n];

    rhs(t0, y, &mut k1);
    stats.rhs_evals += 1;
    let mut h = initial_step(&mut rhs, t0, y, &k1, t_end - t0, opts, &mut ytmp, &mut k2);
    stats.rhs_evals += 1;

    let mut t = t0;
    let mut last_rejected = false;
    loop {
        if stats.accepted + stats.rejected >= opts.max_steps {
            return Err(Error::Integration {
                t,
                reason: format!("exceeded {} steps", opts.max_steps),
            });
        }
        let remaining = t_end - t;
        let mut last = false;
        if h >= remaining || (remaining - h) <= 1e-12 * t_end.abs().max(1.0) {
            h = remaining;
            last = true;
        }
        if h <= 1e-14 * t.abs().max(1.0) {
            return Err(Error::Integration {
                t,
                reason: format!("step size underflow (h = {h:e})"),
            });
        }

        for i in 0..n {
            ytmp[i] = y[i] + h * A21 * k1[i];
        }
        rhs(t + C2 * h, &ytmp, &mut k2);
        for i in 0..n {
            ytmp[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i]);
        }
        rhs(t + C3 * h, &ytmp, &mut k3);
        for i in 0..n {
            ytmp[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
        }
        rhs(t + C4 * h, &ytmp, &mut k4);
        for i in 0..n {
            ytmp[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
        }
        rhs(t + C5 * h, &ytmp, &mut k5);
        for i in 0..n {
            ytmp[i] = y[i]
                + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
        }
        let t_new = if last { t_end } else { t + h };
        rhs(t_new, &ytmp, &mut k6);
        for i in 0..n {
            y1[i] = y[i]
                + h * (A71 * k1[i] + A73 * k3[i] + A74 * k4[i] + A75 * k5[i] + A76 * k6[i]);
        }
        rhs(t_new, &y1, &mut k7);
        stats.rhs_evals += 6;

        let mut err = 0.0;
        for i in 0..n {
            let e = h
                * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let sk = opts.atol + opts.rtol * y[i].norm().max(y1[i].norm());
            err += e.norm_sqr() / (sk * sk);
        }
        let err = (err / n as f64).sqrt();
        if !err.is_finite() {
            return Err(Error::Integration {
                t,
                reason: "non-finite error estimate".into(),
            });
        }
        let fac = if err == 0.0 {
            10.0
        } else {
            (0.9 * err.powf(-0.2)).clamp(0.2, 10.0)
        };

        if err <= 1.0 {
            stats.accepted += 1;
            if next_out < end_out && outputs[next_out] <= t_new {
                for i in 0..n {
                    let ydiff = y1[i] - y[i];
                    let bspl = h * k1[i] - ydiff;
                    rcont[i] = y[i];
                    rcont[n + i] = ydiff;
                    rcont[2 * n + i] = bspl;
                    rcont[3 * n + i] = ydiff - h * k7[i] - bspl;
                    rcont[4 * n + i] = h
                        * (D1 * k1[i]
                            + D3 * k3[i]
                            + D4 * k4[i]
                            + D5 * k5[i]
                            + D6 * k6[i]
                            + D7 * k7[i]);
                }
                while next_out < end_out && outputs[next_out] <= t_new {
                    let s = outputs[next_out];
                    if s == t_new {
                        emit(s, &y1);
                    } else {
                        let th = (s - t) / h;
                        let th1 = 1.0 - th;
                        for i in 0..n {
                            yout[i] = rcont[i]
                                + th * (rcont[n + i]
                                    + th1
                                        * (rcont[2 * n + i]
                                            + th * (rcont[3 * n + i] + th1 * rcont[4 * n + i])));
                        }
                        emit(s, &yout);
                    }
                    next_out += 1;
                }
            }
            y.copy_from_slice(&y1);
            std::mem::swap(&mut k1, &mut k7);
            t = t_new;
            if last {
                return Ok(stats);
            }
            let fac = if last_rejected { fac.min(1.0) } else { fac };
            h = (h * fac).min(opts.max_step);
            last_rejected = false;
        } else {
            stats.rejected += 1;
            h *= fac.min(1.0);
            last_rejected = true;
        }
    }
}

fn rms_scaled(v: &[C64], y: &[C64], opts: &StepperOptions) -> f64 {
    let s: f64 = v
        .iter()
        .zip(y)
        .map(|(vi, yi)| {
            let sk = opts.atol + opts.rtol * yi.norm();
            vi.norm_sqr() / (sk * sk)
        })
        .sum();
    (s / v.len() as f64).sqrt()
}

/// Starting step from the first and second derivative estimates.
#[allow(clippy::too_many_arguments)]
fn initial_step<F>(
    rhs: &mut F,
    t0: f64,
    y0: &[C64],
    f0: &[C64],
    span: f64,
    opts: &StepperOptions,
    y1: &mut [C64],
    f1: &mut [C64],
) -> f64
where
    F: FnMut(f64, &[C64], &mut [C64]),
{
    let d0 = rms_scaled(y0, y0, opts);
    let d1 = rms_scaled(f0, y0, opts);
    let mut h0 = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    };
    h0 = h0.min(span).min(opts.max_step);
    for i in 0..y0.len() {
        y1[i] = y0[i] + h0 * f0[i];
    }
    rhs(t0 + h0, y1, f1);
    let diff: Vec<C64> = f1.iter().zip(f0).map(|(a, b)| a - b).collect();
    let d2 = rms_scaled(&diff, y0, opts) / h0;
    let dmax = d1.max(d2);
    let h1 = if dmax <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / dmax).powf(0.2)
    };
    (100.0 * h0).min(h1).min(span).min(opts.max_step)
}
