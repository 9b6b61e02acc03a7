use std::f64::consts::PI;

use crate::error::{FlowError, Result};
use crate::flow::FlowMode;
use crate::mat2::Sym2;
use crate::stencil::{d1, d2};

use super::WarpedGeometry;

/// Allowed deviation of `|f'|` from 1 at the poles.
pub const POLE_TOL: f64 = 1e-2;

/// Rotationally symmetric metric `A²(dx² + f(x)² dφ²)` on the staggered nodes
/// `x_k = (k + ½)π/n`. The profile `f` is measured in units of `A`, so a
/// rescaling touches `A` alone.
#[derive(Clone, Debug, PartialEq)]
pub struct SphereMetric {
    pub n: usize,
    pub a: f64,
    pub f: Vec<f64>,
}

/// `f` odd and `u` even across both poles.
fn extend(v: &[f64], odd: bool) -> Vec<f64> {
    let n = v.len();
    let s = if odd { -1.0 } else { 1.0 };
    let mut e = Vec::with_capacity(n + 4);
    e.push(s * v[1]);
    e.push(s * v[0]);
    e.extend_from_slice(v);
    e.push(s * v[n - 1]);
    e.push(s * v[n - 2]);
    e
}

fn derivs(e: &[f64], k: usize, inv_h: f64) -> (f64, f64) {
    let (m2, m1, c, p1, p2) = (e[k], e[k + 1], e[k + 2], e[k + 3], e[k + 4]);
    (d1(m2, m1, p1, p2, inv_h), d2(m2, m1, c, p1, p2, inv_h * inv_h))
}

impl SphereMetric {
    pub fn new(n: usize, a: f64, f: Vec<f64>) -> Result<Self> {
        if n < 8 {
            return Err(FlowError::InvalidArgument(format!("sphere grid needs n ≥ 8, got {n}")));
        }
        if f.len() != n {
            return Err(FlowError::GridMismatch(format!("profile has {} values, expected {n}", f.len())));
        }
        let m = SphereMetric { n, a, f };
        m.validate()?;
        Ok(m)
    }

    /// Round sphere of radius `r`.
    pub fn round(n: usize, r: f64) -> Result<Self> {
        let h = PI / n as f64;
        let f = (0..n).map(|k| ((k as f64 + 0.5) * h).sin()).collect();
        SphereMetric::new(n, r, f)
    }

    pub fn h(&self) -> f64 {
        PI / self.n as f64
    }

    pub fn node(&self, k: usize) -> f64 {
        (k as f64 + 0.5) * self.h()
    }

    /// `f'(0)` and `−f'(π)`.
    pub fn pole_slopes(&self) -> (f64, f64) {
        let n = self.n;
        let denom = 24.0 * self.h();
        let left = (54.0 * self.f[0] - 2.0 * self.f[1]) / denom;
        let right = (54.0 * self.f[n - 1] - 2.0 * self.f[n - 2]) / denom;
        (left, right)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a.is_finite() && self.a > 0.0) {
            return Err(FlowError::NonFinite { field: "a", node: 0 });
        }
        for (k, &v) in self.f.iter().enumerate() {
            if !v.is_finite() {
                return Err(FlowError::NonFinite { field: "f", node: k });
            }
            if v <= 0.0 {
                return Err(FlowError::NonPositiveProfile { node: k });
            }
        }
        let (l, r) = self.pole_slopes();
        if (l - 1.0).abs() > POLE_TOL {
            return Err(FlowError::PoleRegularity { pole: "x=0", ratio: l });
        }
        if (r - 1.0).abs() > POLE_TOL {
            return Err(FlowError::PoleRegularity { pole: "x=pi", ratio: -r });
        }
        Ok(())
    }

    pub fn min_spacing_sq(&self) -> f64 {
        let s = self.h() * self.a;
        s * s
    }

    pub fn scale(&self, s: f64) -> SphereMetric {
        SphereMetric { n: self.n, a: self.a / s.sqrt(), f: self.f.clone() }
    }

    /// Quadrature weights of `dV = 2π A² f dx`, exact to fourth order for
    /// integrands that are even across the poles.
    fn weights(&self) -> Vec<f64> {
        let n = self.n;
        let h = self.h();
        let mut c = vec![1.0; n];
        c[0] -= 54.0 / 576.0;
        c[n - 1] -= 54.0 / 576.0;
        c[1] += 2.0 / 576.0;
        c[n - 2] += 2.0 / 576.0;
        let a2 = self.a * self.a;
        (0..n).map(|k| 2.0 * PI * a2 * self.f[k] * h * c[k]).collect()
    }

    fn geometry_with_fx(&self, u: &[f64]) -> Result<(WarpedGeometry, Vec<f64>)> {
        let n = self.n;
        let inv_h = 1.0 / self.h();
        let fe = extend(&self.f, true);
        let ue = extend(u, false);
        let a2 = self.a * self.a;
        let mut fx_all = Vec::with_capacity(n);
        let mut geo = WarpedGeometry {
            metric: Vec::with_capacity(n),
            weights: self.weights(),
            r_m: Vec::with_capacity(n),
            grad_u: Vec::with_capacity(n),
            grad_u_sq: Vec::with_capacity(n),
            hess_u: Vec::with_capacity(n),
            lap_u: Vec::with_capacity(n),
            t_norm_sq: Vec::with_capacity(n),
        };
        for k in 0..n {
            let f = self.f[k];
            if f <= 0.0 {
                return Err(FlowError::NonPositiveProfile { node: k });
            }
            let (fx, fxx) = derivs(&fe, k, inv_h);
            let (ux, uxx) = derivs(&ue, k, inv_h);
            let gauss = -fxx / (a2 * f);
            let hess = Sym2::new(uxx, 0.0, f * fx * ux);
            let txx = (uxx + ux * ux) / a2;
            let tpp = fx * ux / (a2 * f);
            geo.metric.push(Sym2::diag(a2, a2 * (f * f)));
            geo.r_m.push(2.0 * gauss);
            geo.grad_u.push([ux, 0.0]);
            geo.grad_u_sq.push(ux * ux / a2);
            geo.hess_u.push(hess);
            geo.lap_u.push(uxx / a2 + fx * ux / (a2 * f));
            geo.t_norm_sq.push(txx * txx + tpp * tpp);
            fx_all.push(fx);
        }
        Ok((geo, fx_all))
    }

    pub(super) fn geometry(&self, u: &[f64]) -> Result<WarpedGeometry> {
        Ok(self.geometry_with_fx(u)?.0)
    }

    /// Rates `(Ȧ, f_t, u_t)` of the flow in the gauge that keeps `A` uniform:
    /// the flow velocity is corrected by the reparametrization `w ∂_x`, with
    /// `A w(x) = ∫₀ˣ (Ȧ − A_t)` and `Ȧ` the mean of the uncorrected `A_t`.
    pub(crate) fn rates(&self, u: &[f64], mode: FlowMode) -> Result<(f64, Vec<f64>, Vec<f64>)> {
        let n = self.n;
        let h = self.h();
        let (geo, fx) = self.geometry_with_fx(u)?;
        let (dg, du) = geo.flow_rates(mode);
        let at: Vec<f64> = dg.iter().map(|d| d.xx / (2.0 * self.a)).collect();
        let a_dot = at.iter().sum::<f64>() / n as f64;
        let q: Vec<f64> = at.iter().map(|v| a_dot - v).collect();
        let qa = |k: isize| q[k.clamp(0, n as isize - 1) as usize];
        let mut edges = vec![0.0; n + 1];
        for j in 0..n {
            let jj = j as isize;
            edges[j + 1] = edges[j] + h * (q[j] + (qa(jj + 1) - 2.0 * q[j] + qa(jj - 1)) / 24.0);
        }
        edges[n] = 0.0;
        let we = |j: isize| -> f64 {
            if j < 0 {
                -edges[(-j) as usize]
            } else if j > n as isize {
                -edges[2 * n - j as usize]
            } else {
                edges[j as usize]
            }
        };
        let a2 = self.a * self.a;
        let mut ft = Vec::with_capacity(n);
        let mut ut = Vec::with_capacity(n);
        for k in 0..n {
            let kk = k as isize;
            let w = (9.0 * (we(kk) + we(kk + 1)) - (we(kk - 1) + we(kk + 2))) / (16.0 * self.a);
            ft.push(dg[k].yy / (2.0 * a2 * self.f[k]) + fx[k] * w - self.f[k] * a_dot / self.a);
            ut.push(du[k] + geo.grad_u[k][0] * w);
        }
        Ok((a_dot, ft, ut))
    }
}
