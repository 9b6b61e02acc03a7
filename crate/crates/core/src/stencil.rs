//! Fourth-order centered finite differences and quadratures on uniform grids.

/// First derivative from the four neighbours `f[-2], f[-1], f[1], f[2]`.
#[inline]
pub fn d1(fm2: f64, fm1: f64, fp1: f64, fp2: f64, inv_h: f64) -> f64 {
    ((fm2 - fp2) + 8.0 * (fp1 - fm1)) * (inv_h / 12.0)
}

/// Second derivative, written in difference form so constants map to exactly 0.
#[inline]
pub fn d2(fm2: f64, fm1: f64, f0: f64, fp1: f64, fp2: f64, inv_h2: f64) -> f64 {
    (16.0 * ((fm1 - f0) + (fp1 - f0)) - ((fm2 - f0) + (fp2 - f0))) * (inv_h2 / 12.0)
}

/// Periodic index `i + offset` modulo `n`.
#[inline]
pub fn wrap(i: usize, offset: isize, n: usize) -> usize {
    (i as isize + offset).rem_euclid(n as isize) as usize
}

/// Periodic first derivative of a 1D array.
pub fn periodic_d1(f: &[f64], h: f64) -> Vec<f64> {
    let n = f.len();
    let inv_h = 1.0 / h;
    (0..n)
        .map(|i| d1(f[wrap(i, -2, n)], f[wrap(i, -1, n)], f[wrap(i, 1, n)], f[wrap(i, 2, n)], inv_h))
        .collect()
}

/// Periodic second derivative of a 1D array.
pub fn periodic_d2(f: &[f64], h: f64) -> Vec<f64> {
    let n = f.len();
    let inv_h2 = 1.0 / (h * h);
    (0..n)
        .map(|i| {
            d2(f[wrap(i, -2, n)], f[wrap(i, -1, n)], f[i], f[wrap(i, 1, n)], f[wrap(i, 2, n)], inv_h2)
        })
        .collect()
}

/// Rectangle rule on a periodic grid; spectrally accurate for smooth data.
pub fn periodic_sum(f: &[f64], h: f64) -> f64 {
    f.iter().sum::<f64>() * h
}

/// Fourth-order integral over `[0, L]` of values sampled at cell midpoints
/// `(k + ½)h`, using end-point derivative corrections.
pub fn midpoint_integral(g: &[f64], left_ghosts: [f64; 2], right_ghosts: [f64; 2], h: f64) -> f64 {
    let n = g.len();
    let sum: f64 = g.iter().sum();
    // derivative at the left end from g[-2], g[-1], g[0], g[1]
    let dl = (27.0 * (g[0] - left_ghosts[0]) - (g[1] - left_ghosts[1])) / (24.0 * h);
    let dr = (27.0 * (right_ghosts[0] - g[n - 1]) - (right_ghosts[1] - g[n - 2])) / (24.0 * h);
    h * sum + h * h / 24.0 * (dr - dl)
}

/// Half-node interpolation `q(k + ½)` from `q[k-1], q[k], q[k+1], q[k+2]`.
#[inline]
pub fn interp_half(qm1: f64, q0: f64, q1: f64, q2: f64) -> f64 {
    (9.0 * (q0 + q1) - (qm1 + q2)) / 16.0
}

/// Half-node derivative `q'(k + ½)` from `q[k-1], q[k], q[k+1], q[k+2]`.
#[inline]
pub fn deriv_half(qm1: f64, q0: f64, q1: f64, q2: f64, inv_h: f64) -> f64 {
    (27.0 * (q1 - q0) - (q2 - qm1)) * (inv_h / 24.0)
}

/// Periodic cumulative integral `∫_{y_0}^{y_k} q`, with `k = 0..=n`, using the
/// fourth-order cell rule `h/24·(−q[k-1] + 13q[k] + 13q[k+1] − q[k+2])`.
pub fn periodic_cumulative(q: &[f64], h: f64) -> Vec<f64> {
    let n = q.len();
    let mut out = Vec::with_capacity(n + 1);
    out.push(0.0);
    let mut acc = 0.0;
    for k in 0..n {
        let cell = 13.0 * (q[k] + q[wrap(k, 1, n)]) - (q[wrap(k, -1, n)] + q[wrap(k, 2, n)]);
        acc += cell * h / 24.0;
        out.push(acc);
    }
    out
}
