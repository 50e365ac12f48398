//! Dormand–Prince 5(4) with step-size control and 4th-order dense output.

use nalgebra::DVector;

use crate::{Error, Result};

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

// 5th minus embedded 4th order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

// dense output (Hairer & Wanner)
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

#[derive(Debug, Clone, PartialEq)]
pub struct Dopri5Options {
    pub rtol: f64,
    pub atol: f64,
    /// First trial step; chosen automatically when `None`.
    pub h_init: Option<f64>,
    pub h_max: f64,
    pub max_steps: usize,
    /// Times where the right-hand side may be discontinuous. Steps end
    /// exactly on them and the derivative is re-evaluated afterwards.
    pub breakpoints: Vec<f64>,
}

impl Default for Dopri5Options {
    fn default() -> Self {
        Self {
            rtol: 1e-9,
            atol: 1e-9,
            h_init: None,
            h_max: f64::INFINITY,
            max_steps: 5_000_000,
            breakpoints: Vec::new(),
        }
    }
}

impl Dopri5Options {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            rtol: tol,
            atol: tol,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Dopri5Stats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

struct Workspace {
    k: [DVector<f64>; 7],
    tmp: DVector<f64>,
}

fn axpy_into(out: &mut DVector<f64>, y: &DVector<f64>, h: f64, terms: &[(f64, &DVector<f64>)]) {
    out.copy_from(y);
    for &(c, k) in terms {
        if c != 0.0 {
            out.axpy(h * c, k, 1.0);
        }
    }
}

fn error_norm(y0: &DVector<f64>, y1: &DVector<f64>, err: &DVector<f64>, opts: &Dopri5Options) -> f64 {
    let n = y0.len().max(1) as f64;
    let sum: f64 = y0
        .iter()
        .zip(y1.iter())
        .zip(err.iter())
        .map(|((a, b), e)| {
            let sc = opts.atol + opts.rtol * a.abs().max(b.abs());
            (e / sc).powi(2)
        })
        .sum();
    (sum / n).sqrt()
}

/// Integrate `y' = f(t, y)` from `t_out[0]` and return the solution at every
/// time of `t_out` (strictly increasing).
pub fn solve_dense<F>(
    mut rhs: F,
    t_out: &[f64],
    y0: &DVector<f64>,
    opts: &Dopri5Options,
) -> Result<(Vec<DVector<f64>>, Dopri5Stats)>
where
    F: FnMut(f64, &DVector<f64>, &mut DVector<f64>) -> Result<()>,
{
    if t_out.is_empty() {
        return Ok((Vec::new(), Dopri5Stats::default()));
    }
    if t_out.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::NonMonotoneGrid);
    }
    if !(opts.rtol > 0.0 && opts.atol > 0.0) {
        return Err(Error::InvalidArgument("tolerances must be positive".into()));
    }
    let n = y0.len();
    let t_end = *t_out.last().unwrap();
    let mut t = t_out[0];
    let mut y = y0.clone();
    let mut out = Vec::with_capacity(t_out.len());
    out.push(y.clone());
    let mut next_out = 1;
    let mut stats = Dopri5Stats::default();

    let mut stops: Vec<f64> = opts
        .breakpoints
        .iter()
        .copied()
        .filter(|&b| b > t && b < t_end)
        .collect();
    stops.sort_by(f64::total_cmp);
    stops.push(t_end);
    let mut stop_idx = 0;

    let mut ws = Workspace {
        k: std::array::from_fn(|_| DVector::zeros(n)),
        tmp: DVector::zeros(n),
    };
    let mut y_new = DVector::zeros(n);
    let mut err = DVector::zeros(n);

    rhs(t, &y, &mut ws.k[0])?;
    stats.evaluations += 1;
    let mut h = match opts.h_init {
        Some(h) => h,
        None => initial_step(&mut rhs, t, &y, &ws.k[0], opts, &mut stats)?,
    }
    .min(opts.h_max)
    .min(t_end - t);

    while next_out < t_out.len() {
        if stats.accepted + stats.rejected >= opts.max_steps {
            return Err(Error::StepBudgetExhausted(t));
        }
        let stop = stops[stop_idx];
        let mut hits_stop = false;
        if t + h >= stop - 1e-14 * stop.abs().max(1.0) {
            h = stop - t;
            hits_stop = true;
        }
        if h <= 1e-14 * t.abs().max(1.0) {
            return Err(Error::StepSizeUnderflow(t));
        }

        let [k1, k2, k3, k4, k5, k6, k7] = &mut ws.k;
        axpy_into(&mut ws.tmp, &y, h, &[(A21, k1)]);
        rhs(t + C2 * h, &ws.tmp, k2)?;
        axpy_into(&mut ws.tmp, &y, h, &[(A31, k1), (A32, k2)]);
        rhs(t + C3 * h, &ws.tmp, k3)?;
        axpy_into(&mut ws.tmp, &y, h, &[(A41, k1), (A42, k2), (A43, k3)]);
        rhs(t + C4 * h, &ws.tmp, k4)?;
        axpy_into(&mut ws.tmp, &y, h, &[(A51, k1), (A52, k2), (A53, k3), (A54, k4)]);
        rhs(t + C5 * h, &ws.tmp, k5)?;
        axpy_into(
            &mut ws.tmp,
            &y,
            h,
            &[(A61, k1), (A62, k2), (A63, k3), (A64, k4), (A65, k5)],
        );
        rhs(t + h, &ws.tmp, k6)?;
        axpy_into(
            &mut y_new,
            &y,
            h,
            &[(A71, k1), (A73, k3), (A74, k4), (A75, k5), (A76, k6)],
        );
        let t_new = if hits_stop { stop } else { t + h };
        rhs(t_new, &y_new, k7)?;
        stats.evaluations += 6;

        if y_new.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite(t));
        }
        err.fill(0.0);
        for (c, k) in [(E1, &*k1), (E3, &*k3), (E4, &*k4), (E5, &*k5), (E6, &*k6), (E7, &*k7)] {
            err.axpy(h * c, k, 1.0);
        }
        let e = error_norm(&y, &y_new, &err, opts);

        if e <= 1.0 {
            stats.accepted += 1;
            // emit every requested time inside (t, t_new]
            while next_out < t_out.len() && t_out[next_out] <= t_new {
                let tau = t_out[next_out];
                if tau == t_new {
                    out.push(y_new.clone());
                } else {
                    out.push(dense_eval(
                        &y,
                        &y_new,
                        [&*k1, &*k3, &*k4, &*k5, &*k6, &*k7],
                        h,
                        (tau - t) / h,
                    ));
                }
                next_out += 1;
            }
            t = t_new;
            std::mem::swap(&mut y, &mut y_new);
            if hits_stop {
                stop_idx = (stop_idx + 1).min(stops.len() - 1);
                // derivative may jump at a breakpoint
                rhs(t, &y, k1)?;
                stats.evaluations += 1;
            } else {
                std::mem::swap(k1, k7);
            }
            let fac = if e == 0.0 {
                5.0
            } else {
                (0.9 * e.powf(-0.2)).clamp(0.2, 5.0)
            };
            h = (h * fac).min(opts.h_max);
        } else {
            stats.rejected += 1;
            h *= (0.9 * e.powf(-0.2)).clamp(0.1, 0.9);
        }
    }
    Ok((out, stats))
}

fn dense_eval(y0: &DVector<f64>, y1: &DVector<f64>, k: [&DVector<f64>; 6], h: f64, theta: f64) -> DVector<f64> {
    let [k1, k3, k4, k5, k6, k7] = k;
    let theta1 = 1.0 - theta;
    let mut out = DVector::zeros(y0.len());
    for i in 0..y0.len() {
        let ydiff = y1[i] - y0[i];
        let bspl = h * k1[i] - ydiff;
        let r4 = ydiff - h * k7[i] - bspl;
        let r5 = h * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]);
        out[i] = y0[i] + theta * (ydiff + theta1 * (bspl + theta * (r4 + theta1 * r5)));
    }
    out
}

fn initial_step<F>(
    rhs: &mut F,
    t: f64,
    y: &DVector<f64>,
    f0: &DVector<f64>,
    opts: &Dopri5Options,
    stats: &mut Dopri5Stats,
) -> Result<f64>
where
    F: FnMut(f64, &DVector<f64>, &mut DVector<f64>) -> Result<()>,
{
    let scale = |v: &DVector<f64>| -> f64 {
        let n = v.len().max(1) as f64;
        (v.iter()
            .zip(y.iter())
            .map(|(a, yi)| (a / (opts.atol + opts.rtol * yi.abs())).powi(2))
            .sum::<f64>()
            / n)
            .sqrt()
    };
    let d0 = scale(y);
    let d1 = scale(f0);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    let y1 = y + f0 * h0;
    let mut f1 = DVector::zeros(y.len());
    rhs(t + h0, &y1, &mut f1)?;
    stats.evaluations += 1;
    let d2 = scale(&(&f1 - f0)) / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    Ok((100.0 * h0).min(h1))
}
