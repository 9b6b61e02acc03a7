//! Warped products `h = g + e^{2u} dθ²` over a surface `M`.
//!
//! Two base discretizations are supported: a periodic `n × n` grid on the
//! torus `[0,1)²` carrying the full metric tensor, and a rotationally
//! symmetric sphere `A(t)² dx² + f(x,t)² dφ²`, `x ∈ [0,π]`, sampled at the
//! staggered nodes `x_k = (k + ½)π/n`. The sphere is kept in the gauge where
//! `A` is uniform in `x`.

mod sphere;
mod torus;

use serde::{Deserialize, Serialize};

use crate::error::{FlowError, Result};
use crate::flow::FlowMode;
use crate::mat2::Sym2;

pub use sphere::SphereMetric;
pub use torus::TorusMetric;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Topology {
    Torus,
    SphereRotsym,
}

#[derive(Clone, Debug, PartialEq)]
pub enum SurfaceMetric {
    Torus(TorusMetric),
    Sphere(SphereMetric),
}

impl SurfaceMetric {
    pub fn topology(&self) -> Topology {
        match self {
            SurfaceMetric::Torus(_) => Topology::Torus,
            SurfaceMetric::Sphere(_) => Topology::SphereRotsym,
        }
    }

    pub fn euler_characteristic(&self) -> i32 {
        match self {
            SurfaceMetric::Torus(_) => 0,
            SurfaceMetric::Sphere(_) => 2,
        }
    }

    /// Number of scalar nodes carrying `u`.
    pub fn nodes(&self) -> usize {
        match self {
            SurfaceMetric::Torus(m) => m.n * m.n,
            SurfaceMetric::Sphere(m) => m.n,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            SurfaceMetric::Torus(m) => m.validate(),
            SurfaceMetric::Sphere(m) => m.validate(),
        }
    }

    /// Squared length of the smallest grid step, measured in the metric.
    pub fn min_spacing_sq(&self) -> f64 {
        match self {
            SurfaceMetric::Torus(m) => m.min_spacing_sq(),
            SurfaceMetric::Sphere(m) => m.min_spacing_sq(),
        }
    }

    pub fn scale(&self, s: f64) -> SurfaceMetric {
        match self {
            SurfaceMetric::Torus(m) => SurfaceMetric::Torus(m.scale(s)),
            SurfaceMetric::Sphere(m) => SurfaceMetric::Sphere(m.scale(s)),
        }
    }
}

/// The pair `(g, u)` at time `t`.
#[derive(Clone, Debug, PartialEq)]
pub struct WarpedState {
    pub metric: SurfaceMetric,
    pub u: Vec<f64>,
    pub time: f64,
}

impl WarpedState {
    pub fn new(metric: SurfaceMetric, u: Vec<f64>, time: f64) -> Result<Self> {
        if u.len() != metric.nodes() {
            return Err(FlowError::GridMismatch(format!(
                "u has {} values, metric has {} nodes",
                u.len(),
                metric.nodes()
            )));
        }
        let s = WarpedState { metric, u, time };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        self.metric.validate()?;
        if let Some(node) = self.u.iter().position(|v| !v.is_finite()) {
            return Err(FlowError::NonFinite { field: "u", node });
        }
        if !self.time.is_finite() {
            return Err(FlowError::NonFinite { field: "time", node: 0 });
        }
        Ok(())
    }

    pub fn geometry(&self) -> Result<WarpedGeometry> {
        match &self.metric {
            SurfaceMetric::Torus(m) => m.geometry(&self.u),
            SurfaceMetric::Sphere(m) => m.geometry(&self.u),
        }
    }
}

/// Per-node geometric quantities of a warped state. Tensors are expressed in
/// the coordinate frame of the base discretization; `weights` are the
/// quadrature weights of `dV_g`, so `Σ weights[k]·q[k]` approximates `∫ q dV`.
#[derive(Clone, Debug)]
pub struct WarpedGeometry {
    pub metric: Vec<Sym2>,
    pub weights: Vec<f64>,
    /// Scalar curvature `R^M = 2K` of the base.
    pub r_m: Vec<f64>,
    pub grad_u: Vec<[f64; 2]>,
    pub grad_u_sq: Vec<f64>,
    pub hess_u: Vec<Sym2>,
    pub lap_u: Vec<f64>,
    /// `|Hess u + du⊗du|²`.
    pub t_norm_sq: Vec<f64>,
}

impl WarpedGeometry {
    pub fn integrate(&self, q: impl Fn(usize) -> f64) -> f64 {
        self.weights.iter().enumerate().map(|(k, w)| w * q(k)).sum()
    }

    /// `R^N = R^M − 2Δu − 2|∇u|²`.
    pub fn r_n(&self, k: usize) -> f64 {
        self.r_m[k] - 2.0 * self.lap_u[k] - 2.0 * self.grad_u_sq[k]
    }

    /// `S = R^M − |∇u|²`.
    pub fn s(&self, k: usize) -> f64 {
        self.r_m[k] - self.grad_u_sq[k]
    }

    /// `|Rm^N|² = |Rm^M|² + 2|Hess u + du⊗du|²`, with `|Rm^M|² = (R^M)²` in 2D.
    pub fn riem_norm_sq(&self, k: usize) -> f64 {
        self.r_m[k] * self.r_m[k] + 2.0 * self.t_norm_sq[k]
    }

    pub fn t_tensor(&self, k: usize) -> Sym2 {
        let [ux, uy] = self.grad_u[k];
        self.hess_u[k] + Sym2::new(ux * ux, ux * uy, uy * uy)
    }

    pub fn max_riem(&self) -> f64 {
        (0..self.r_m.len()).map(|k| self.riem_norm_sq(k)).fold(0.0, f64::max).sqrt()
    }

    /// Metric and warp rates from the reduced flow equations.
    pub fn flow_rates(&self, mode: FlowMode) -> (Vec<Sym2>, Vec<f64>) {
        let n = self.r_m.len();
        let mut dg = Vec::with_capacity(n);
        let mut du = Vec::with_capacity(n);
        for k in 0..n {
            let [ux, uy] = self.grad_u[k];
            let base = self.metric[k].scale(-self.r_m[k]);
            match mode {
                FlowMode::Modified => {
                    dg.push(base + Sym2::new(2.0 * ux * ux, 2.0 * ux * uy, 2.0 * uy * uy));
                    du.push(self.lap_u[k]);
                }
                FlowMode::Unmodified => {
                    dg.push(base + self.t_tensor(k).scale(2.0));
                    du.push(self.lap_u[k] + self.grad_u_sq[k]);
                }
            }
        }
        (dg, du)
    }
}

/// Ricci tensor of `h` at one node: the base block and the fiber component.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct WarpedRicci {
    pub base: Sym2,
    pub theta_theta: f64,
}

#[derive(Clone, Debug)]
pub struct WarpedCurvature {
    pub r_m: Vec<f64>,
    pub r_n: Vec<f64>,
    pub riem_norm_sq: Vec<f64>,
    pub ricci: Vec<WarpedRicci>,
}

pub fn curvature_warped(state: &WarpedState) -> Result<WarpedCurvature> {
    state.validate()?;
    let geo = state.geometry()?;
    let n = geo.r_m.len();
    let mut out = WarpedCurvature {
        r_m: geo.r_m.clone(),
        r_n: Vec::with_capacity(n),
        riem_norm_sq: Vec::with_capacity(n),
        ricci: Vec::with_capacity(n),
    };
    for k in 0..n {
        out.r_n.push(geo.r_n(k));
        out.riem_norm_sq.push(geo.riem_norm_sq(k));
        let gauss = 0.5 * geo.r_m[k];
        let base = geo.metric[k].scale(gauss) - geo.t_tensor(k);
        let theta_theta = -(2.0 * state.u[k]).exp() * (geo.lap_u[k] + geo.grad_u_sq[k]);
        out.ricci.push(WarpedRicci { base, theta_theta });
    }
    Ok(out)
}

/// Time derivative of `(g, u)`; metric rates are per node in the coordinate
/// frame of the base grid.
#[derive(Clone, Debug)]
pub struct WarpedRates {
    pub dg: Vec<Sym2>,
    pub du: Vec<f64>,
}

pub fn rhs_warped(state: &WarpedState, mode: FlowMode) -> Result<WarpedRates> {
    state.validate()?;
    let geo = state.geometry()?;
    let (dg, du) = geo.flow_rates(mode);
    Ok(WarpedRates { dg, du })
}

/// `∫_M R^M dV`.
pub fn gauss_bonnet(metric: &SurfaceMetric) -> Result<f64> {
    metric.validate()?;
    let u = vec![0.0; metric.nodes()];
    let geo = match metric {
        SurfaceMetric::Torus(m) => m.geometry(&u)?,
        SurfaceMetric::Sphere(m) => m.geometry(&u)?,
    };
    Ok(geo.integrate(|k| geo.r_m[k]))
}

/// Difference of diffeomorphism-invariant scalars after one step of each mode.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct GaugeProbeReport {
    pub volume_diff: f64,
    pub max_riem_diff: f64,
    pub gauss_bonnet_diff: f64,
}

pub fn lie_gauge_equivalence_probe(state: &WarpedState, dt: f64) -> Result<GaugeProbeReport> {
    let a = crate::flow::rk4_step(state, dt, FlowMode::Modified)?;
    let b = crate::flow::rk4_step(state, dt, FlowMode::Unmodified)?;
    let ga = a.geometry()?;
    let gb = b.geometry()?;
    let vol = |g: &WarpedGeometry| g.weights.iter().sum::<f64>();
    let gb_int = |g: &WarpedGeometry| g.integrate(|k| g.r_m[k]);
    Ok(GaugeProbeReport {
        volume_diff: (vol(&ga) - vol(&gb)).abs(),
        max_riem_diff: (ga.max_riem() - gb.max_riem()).abs(),
        gauss_bonnet_diff: (gb_int(&ga) - gb_int(&gb)).abs(),
    })
}

/// Length of the shortest non-contractible loop on a torus state, searched
/// over the homotopy classes `(1, k)` and `(k, 1)` on a 16-neighbour graph.
pub fn torus_systole(metric: &TorusMetric) -> f64 {
    metric.systole()
}

/// Diameter of a torus base, measured on the same graph as [`torus_systole`].
pub fn torus_diameter(metric: &TorusMetric) -> f64 {
    metric.diameter()
}

#[cfg(test)]
mod tests;
