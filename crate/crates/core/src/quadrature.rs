use crate::{Error, Result};

fn check_grid(times: &[f64], values: &[f64]) -> Result<()> {
    if times.len() != values.len() {
        return Err(Error::DimensionMismatch {
            expected: times.len(),
            found: values.len(),
        });
    }
    if times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::NonMonotoneGrid);
    }
    Ok(())
}

// Integral of the parabola through (x0,f0),(x1,f1),(x2,f2) over [x0, x2].
fn simpson_panel(x: [f64; 3], f: [f64; 3]) -> f64 {
    let h0 = x[1] - x[0];
    let h1 = x[2] - x[1];
    let hs = h0 + h1;
    hs / 6.0 * (f[0] * (2.0 - h1 / h0) + f[1] * hs * hs / (h0 * h1) + f[2] * (2.0 - h0 / h1))
}

// Integral of the same parabola over the last sub-interval [x1, x2].
fn simpson_tail(x: [f64; 3], f: [f64; 3]) -> f64 {
    let h0 = x[1] - x[0];
    let h1 = x[2] - x[1];
    let w2 = h1 * (2.0 * h1 + 3.0 * h0) / (6.0 * (h0 + h1));
    let w1 = h1 * (h1 + 3.0 * h0) / (6.0 * h0);
    let w0 = -h1 * h1 * h1 / (6.0 * h0 * (h0 + h1));
    w0 * f[0] + w1 * f[1] + w2 * f[2]
}

/// Composite Simpson rule on a (possibly non-uniform) strictly increasing grid.
///
/// An odd number of intervals is closed with the parabolic tail through the
/// last three nodes; two nodes fall back to the trapezoid rule.
pub fn simpson(times: &[f64], values: &[f64]) -> Result<f64> {
    Ok(cumulative_simpson(times, values)?.last().copied().unwrap_or(0.0))
}

/// Running integral from `times[0]` to every grid node.
pub fn cumulative_simpson(times: &[f64], values: &[f64]) -> Result<Vec<f64>> {
    check_grid(times, values)?;
    let n = times.len();
    let mut out = vec![0.0; n];
    if n < 2 {
        return Ok(out);
    }
    if n == 2 {
        out[1] = 0.5 * (times[1] - times[0]) * (values[0] + values[1]);
        return Ok(out);
    }
    for i in 1..n {
        if i % 2 == 0 {
            let x = [times[i - 2], times[i - 1], times[i]];
            let f = [values[i - 2], values[i - 1], values[i]];
            out[i] = out[i - 2] + simpson_panel(x, f);
        } else if i == 1 {
            // first half panel: integrate the parabola through nodes 0,1,2 over [x0, x1]
            let x = [times[2], times[1], times[0]];
            let f = [values[2], values[1], values[0]];
            out[1] = -simpson_tail(x, f);
        } else {
            let x = [times[i - 2], times[i - 1], times[i]];
            let f = [values[i - 2], values[i - 1], values[i]];
            out[i] = out[i - 1] + simpson_tail(x, f);
        }
    }
    Ok(out)
}
