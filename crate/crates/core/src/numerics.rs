//! Small fixed-step integrators and quadrature rules on uniform grids.

/// One classical fourth-order Runge-Kutta step for `y' = f(t, y)`.
pub fn rk4_step<const N: usize, F>(f: &F, t: f64, y: &[f64; N], h: f64) -> [f64; N]
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    let axpy = |base: &[f64; N], k: &[f64; N], s: f64| {
        let mut out = *base;
        for i in 0..N {
            out[i] += s * k[i];
        }
        out
    };
    let k1 = f(t, y);
    let k2 = f(t + 0.5 * h, &axpy(y, &k1, 0.5 * h));
    let k3 = f(t + 0.5 * h, &axpy(y, &k2, 0.5 * h));
    let k4 = f(t + h, &axpy(y, &k3, h));
    let mut out = *y;
    for i in 0..N {
        out[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    out
}

/// Uniform nodes `a + i (b - a) / n` for `i = 0..=n`; the last node is exactly `b`.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    let h = (b - a) / n as f64;
    (0..=n).map(|i| if i == n { b } else { a + i as f64 * h }).collect()
}

/// Composite trapezoid rule on uniform samples with spacing `h`.
pub fn trapezoid(samples: &[f64], h: f64) -> f64 {
    match samples.len() {
        0 | 1 => 0.0,
        n => h * (0.5 * (samples[0] + samples[n - 1]) + samples[1..n - 1].iter().sum::<f64>()),
    }
}

/// Fourth-order first derivative of uniform samples with spacing `h`.
/// Central stencils in the interior, five-point one-sided at the two
/// nodes nearest each end. Requires at least five samples.
pub fn derivative_4th(y: &[f64], h: f64) -> Vec<f64> {
    let n = y.len();
    assert!(n >= 5, "need at least five samples");
    let fwd =
        |i: usize| (-25.0 * y[i] + 48.0 * y[i + 1] - 36.0 * y[i + 2] + 16.0 * y[i + 3] - 3.0 * y[i + 4]) / (12.0 * h);
    let bwd =
        |i: usize| (25.0 * y[i] - 48.0 * y[i - 1] + 36.0 * y[i - 2] - 16.0 * y[i - 3] + 3.0 * y[i - 4]) / (12.0 * h);
    let skew_fwd =
        |i: usize| (-3.0 * y[i - 1] - 10.0 * y[i] + 18.0 * y[i + 1] - 6.0 * y[i + 2] + y[i + 3]) / (12.0 * h);
    let skew_bwd = |i: usize| (3.0 * y[i + 1] + 10.0 * y[i] - 18.0 * y[i - 1] + 6.0 * y[i - 2] - y[i - 3]) / (12.0 * h);
    (0..n)
        .map(|i| match i {
            0 => fwd(0),
            1 => skew_fwd(1),
            _ if i == n - 1 => bwd(i),
            _ if i == n - 2 => skew_bwd(i),
            _ => (y[i - 2] - 8.0 * y[i - 1] + 8.0 * y[i + 1] - y[i + 2]) / (12.0 * h),
        })
        .collect()
}

/// Weights of the first derivative at 0 of the interpolant through
/// integer `offsets` (spacing 1).
fn first_derivative_weights(offsets: &[i32]) -> Vec<f64> {
    let x: Vec<f64> = offsets.iter().map(|&o| o as f64).collect();
    (0..x.len())
        .map(|i| {
            (0..x.len())
                .filter(|&m| m != i)
                .map(|m| {
                    let prod: f64 = (0..x.len())
                        .filter(|&k| k != i && k != m)
                        .map(|k| -x[k] / (x[i] - x[k]))
                        .product();
                    prod / (x[i] - x[m])
                })
                .sum()
        })
        .collect()
}

/// Sixth-order first derivative of uniform samples with spacing `h`, using
/// seven-point stencils (central where possible, shifted near the ends).
/// Requires at least seven samples.
pub fn derivative_6th(y: &[f64], h: f64) -> Vec<f64> {
    let n = y.len();
    assert!(n >= 7, "need at least seven samples");
    let stencils: Vec<Vec<f64>> = (0..7)
        .map(|shift| first_derivative_weights(&(0..7).map(|k| k - shift).collect::<Vec<_>>()))
        .collect();
    (0..n)
        .map(|i| {
            let shift = match i {
                _ if i < 3 => i,
                _ if i + 3 >= n => 6 - (n - 1 - i),
                _ => 3,
            };
            let start = i - shift;
            stencils[shift]
                .iter()
                .enumerate()
                .map(|(k, w)| w * y[start + k])
                .sum::<f64>()
                / h
        })
        .collect()
}

/// Linear interpolation of `(xs, ys)` at `x`, clamped to the end values.
pub fn interp_linear(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let n = xs.len();
    if x <= xs[0] {
        return ys[0];
    }
    if x >= xs[n - 1] {
        return ys[n - 1];
    }
    let j = xs.partition_point(|&v| v <= x).clamp(1, n - 1);
    let (x0, x1) = (xs[j - 1], xs[j]);
    let w = (x - x0) / (x1 - x0);
    ys[j - 1] * (1.0 - w) + ys[j] * w
}
