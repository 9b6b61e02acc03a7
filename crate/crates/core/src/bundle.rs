//! Twisted T²-bundles over the circle, `h = G(y) dx dx + g_yy(y) dy²`, with
//! the gluing `G(y+1) = TᵀG(y)T`.
//!
//! The gluing matrix `T` is real with determinant one. For bundles built
//! from an integer holonomy it equals that holonomy; a real `T` lets the
//! exact Sol solution be represented in its eigenframe.

use serde::Serialize;

use crate::error::{FlowError, Result};
use crate::flow::FlowMode;
use crate::holonomy::{classify_real, Holonomy, HolonomyClass};
use crate::mat2::{Mat2, Sym2};
use crate::spd;
use crate::stencil::{d1, d2, periodic_cumulative, periodic_sum};

#[derive(Clone, Debug, PartialEq)]
pub struct BundleState {
    pub gyy: Vec<f64>,
    pub g: Vec<Sym2>,
    pub twist: Mat2,
    pub holonomy: Option<Holonomy>,
    pub time: f64,
}

/// Arrays extended by `width` ghost nodes on each side; node `k` of the
/// state sits at index `k + width`.
#[derive(Clone, Debug)]
pub struct Extended {
    pub width: usize,
    pub gyy: Vec<f64>,
    pub g: Vec<Sym2>,
}

impl BundleState {
    pub fn new(gyy: Vec<f64>, g: Vec<Sym2>, holonomy: Holonomy, time: f64) -> Result<Self> {
        let s = BundleState { gyy, g, twist: holonomy.as_mat2(), holonomy: Some(holonomy), time };
        s.validate()?;
        Ok(s)
    }

    pub fn with_twist(gyy: Vec<f64>, g: Vec<Sym2>, twist: Mat2, time: f64) -> Result<Self> {
        if (twist.det() - 1.0).abs() > 1e-12 {
            return Err(FlowError::DeterminantNotOne(twist.det()));
        }
        let s = BundleState { gyy, g, twist, holonomy: None, time };
        s.validate()?;
        Ok(s)
    }

    pub fn n(&self) -> usize {
        self.gyy.len()
    }

    pub fn h(&self) -> f64 {
        1.0 / self.n() as f64
    }

    pub fn class(&self) -> HolonomyClass {
        match &self.holonomy {
            Some(h) => h.class(),
            None => classify_real(&self.twist),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n();
        if n < 5 {
            return Err(FlowError::InvalidArgument(format!("bundle grid needs n ≥ 5, got {n}")));
        }
        if self.g.len() != n {
            return Err(FlowError::GridMismatch(format!("G has {} nodes, g_yy has {n}", self.g.len())));
        }
        for k in 0..n {
            if !self.gyy[k].is_finite() {
                return Err(FlowError::NonFinite { field: "gyy", node: k });
            }
            if self.gyy[k] <= 0.0 {
                return Err(FlowError::NonPositiveBase { node: k });
            }
            if !self.g[k].is_finite() {
                return Err(FlowError::NonFinite { field: "G", node: k });
            }
            if !self.g[k].is_positive_definite(spd::SPD_TOL) {
                return Err(FlowError::NonSpdMetric { node: k });
            }
        }
        if !self.time.is_finite() {
            return Err(FlowError::NonFinite { field: "time", node: 0 });
        }
        Ok(())
    }

    pub fn min_spacing_sq(&self) -> f64 {
        let h = self.h();
        h * h * self.gyy.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn geometry(&self) -> Result<BundleGeometry> {
        BundleGeometry::new(self)
    }
}

pub fn extend_with_holonomy(state: &BundleState, width: usize) -> Extended {
    let n = state.n();
    let t = state.twist;
    let t_inv = t.inverse().expect("gluing matrix has determinant one");
    let mut gyy = Vec::with_capacity(n + 2 * width);
    let mut g = Vec::with_capacity(n + 2 * width);
    let (ni, wi) = (n as isize, width as isize);
    for j in -wi..ni + wi {
        let src = j.rem_euclid(ni) as usize;
        let periods = j.div_euclid(ni);
        let step = if periods < 0 { &t_inv } else { &t };
        let mut v = state.g[src];
        for _ in 0..periods.unsigned_abs() {
            v = v.congruence(step);
        }
        gyy.push(state.gyy[src]);
        g.push(v);
    }
    Extended { width, gyy, g }
}

/// Pointwise derivatives and invariants of a bundle state.
#[derive(Clone, Debug)]
pub struct BundleGeometry {
    pub gyy: Vec<f64>,
    pub gyy_y: Vec<f64>,
    pub g: Vec<Sym2>,
    pub g_inv: Vec<Sym2>,
    pub g_y: Vec<Sym2>,
    /// `G_{;yy} = G_{,yy} − ½(g_yy,y / g_yy) G_{,y}`.
    pub g_cov_yy: Vec<Sym2>,
    /// `A = G⁻¹G_{,y}`.
    pub a: Vec<Mat2>,
}

impl BundleGeometry {
    pub fn new(state: &BundleState) -> Result<Self> {
        let n = state.n();
        let inv_h = 1.0 / state.h();
        let inv_h2 = inv_h * inv_h;
        let ext = extend_with_holonomy(state, 2);
        let mut out = BundleGeometry {
            gyy: state.gyy.clone(),
            gyy_y: Vec::with_capacity(n),
            g: state.g.clone(),
            g_inv: Vec::with_capacity(n),
            g_y: Vec::with_capacity(n),
            g_cov_yy: Vec::with_capacity(n),
            a: Vec::with_capacity(n),
        };
        let sym_d1 = |k: usize| -> Sym2 {
            let (m2, m1, p1, p2) = (ext.g[k], ext.g[k + 1], ext.g[k + 3], ext.g[k + 4]);
            Sym2::new(
                d1(m2.xx, m1.xx, p1.xx, p2.xx, inv_h),
                d1(m2.xy, m1.xy, p1.xy, p2.xy, inv_h),
                d1(m2.yy, m1.yy, p1.yy, p2.yy, inv_h),
            )
        };
        let sym_d2 = |k: usize| -> Sym2 {
            let (m2, m1, c, p1, p2) = (ext.g[k], ext.g[k + 1], ext.g[k + 2], ext.g[k + 3], ext.g[k + 4]);
            Sym2::new(
                d2(m2.xx, m1.xx, c.xx, p1.xx, p2.xx, inv_h2),
                d2(m2.xy, m1.xy, c.xy, p1.xy, p2.xy, inv_h2),
                d2(m2.yy, m1.yy, c.yy, p1.yy, p2.yy, inv_h2),
            )
        };
        for k in 0..n {
            let e = &ext.gyy;
            let gyy_y = d1(e[k], e[k + 1], e[k + 3], e[k + 4], inv_h);
            let g_inv = state.g[k].inverse().ok_or(FlowError::NonSpdMetric { node: k })?;
            let g_y = sym_d1(k);
            let g_yy = sym_d2(k);
            let g_cov_yy = g_yy - g_y.scale(0.5 * gyy_y / state.gyy[k]);
            out.gyy_y.push(gyy_y);
            out.a.push(g_inv.to_mat() * g_y.to_mat());
            out.g_inv.push(g_inv);
            out.g_y.push(g_y);
            out.g_cov_yy.push(g_cov_yy);
        }
        Ok(out)
    }

    pub fn n(&self) -> usize {
        self.gyy.len()
    }

    /// `ℰ = g^{yy} Tr((G⁻¹G_{,y})²)`.
    pub fn energy_density(&self, k: usize) -> f64 {
        self.a[k].trace_sq() / self.gyy[k]
    }

    /// `G_{,y} G⁻¹ G_{,y}`, symmetric.
    fn gy_ginv_gy(&self, k: usize) -> Sym2 {
        (self.g_y[k].to_mat() * self.a[k]).sym_part()
    }

    pub fn rates(&self, k: usize, mode: FlowMode) -> (f64, Sym2) {
        let ginv_gyy = 1.0 / self.gyy[k];
        let tr_a2 = self.a[k].trace_sq();
        let quad = self.gy_ginv_gy(k);
        match mode {
            FlowMode::Modified => (0.5 * tr_a2, (self.g_cov_yy[k] - quad).scale(ginv_gyy)),
            FlowMode::Unmodified => {
                let tr_cov = (self.g_inv[k].to_mat() * self.g_cov_yy[k].to_mat()).trace();
                let tr_a = self.a[k].trace();
                let dg = (self.g_cov_yy[k] + self.g_y[k].scale(0.5 * tr_a) - quad).scale(ginv_gyy);
                (tr_cov - 0.5 * tr_a2, dg)
            }
        }
    }

    pub fn curvature_at(&self, k: usize) -> BundleCurvatureNode {
        let gi = 1.0 / self.gyy[k];
        let g = self.g[k];
        let ginv = self.g_inv[k].to_mat();
        let tr_a = self.a[k].trace();
        let tr_a2 = self.a[k].trace_sq();
        let quad = self.gy_ginv_gy(k);
        let cov = self.g_cov_yy[k];
        let tr_cov = (ginv * cov.to_mat()).trace();

        let riem_fiber = -0.25 * gi * self.g_y[k].det();
        let riem_mixed = cov.scale(-0.5) + quad.scale(0.25);
        let ricci_fiber = (cov.scale(-0.5) - self.g_y[k].scale(0.25 * tr_a) + quad.scale(0.5)).scale(gi);
        let ricci_yy = -0.5 * tr_cov + 0.25 * tr_a2;
        let scalar = gi * (-tr_cov + 0.75 * tr_a2 - 0.25 * tr_a * tr_a);

        let det = g.det();
        let b = ginv * riem_mixed.to_mat();
        let riem_norm_sq = 4.0 * riem_fiber * riem_fiber / (det * det) + 4.0 * gi * gi * b.trace_sq();
        BundleCurvatureNode { riem_fiber, riem_mixed, ricci_fiber, ricci_yy, scalar, riem_norm_sq }
    }
}

/// Curvature at one node: `R_{1212}`, `B_{ij} = R_{iyjy}`, the Ricci blocks,
/// scalar curvature and `|Rm|²`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct BundleCurvatureNode {
    pub riem_fiber: f64,
    pub riem_mixed: Sym2,
    pub ricci_fiber: Sym2,
    pub ricci_yy: f64,
    pub scalar: f64,
    pub riem_norm_sq: f64,
}

impl BundleCurvatureNode {
    /// Sectional curvatures `(K₁₂, K₁y, K₂y)` of the coordinate planes.
    pub fn sectional(&self, g: &Sym2, gyy: f64) -> (f64, f64, f64) {
        (
            self.riem_fiber / g.det(),
            self.riem_mixed.xx / (g.xx * gyy),
            self.riem_mixed.yy / (g.yy * gyy),
        )
    }
}

pub fn curvature_bundle(state: &BundleState) -> Result<Vec<BundleCurvatureNode>> {
    state.validate()?;
    let geo = state.geometry()?;
    Ok((0..state.n()).map(|k| geo.curvature_at(k)).collect())
}

#[derive(Clone, Debug)]
pub struct BundleRates {
    pub dgyy: Vec<f64>,
    pub dg: Vec<Sym2>,
}

pub fn rhs_bundle(state: &BundleState, mode: FlowMode) -> Result<BundleRates> {
    state.validate()?;
    let geo = state.geometry()?;
    let (dgyy, dg) = (0..state.n()).map(|k| geo.rates(k, mode)).unzip();
    Ok(BundleRates { dgyy, dg })
}

pub fn energy_density(state: &BundleState) -> Result<Vec<f64>> {
    let geo = state.geometry()?;
    Ok((0..state.n()).map(|k| geo.energy_density(k)).collect())
}

/// `√det G` per node.
pub fn fiber_volume(state: &BundleState) -> Vec<f64> {
    state.g.iter().map(|g| g.det().sqrt()).collect()
}

/// `L = ∫ √g_yy dy`.
pub fn base_length(state: &BundleState) -> f64 {
    let s: Vec<f64> = state.gyy.iter().map(|v| v.sqrt()).collect();
    periodic_sum(&s, state.h())
}

/// Distance of the fiber-metric profile from the Sol geodesic profile.
///
/// The base is reparametrized by normalized arclength `σ ∈ [0,1)` and each
/// `G(y_k)` is compared with the point at `σ_k` on the geodesic of P(2,ℝ)
/// joining `G(y_0)` to `TᵀG(y_0)T`. Returns `None` unless the gluing is
/// hyperbolic.
pub fn sol_residual(state: &BundleState) -> Result<Option<f64>> {
    if state.class() != HolonomyClass::Hyperbolic {
        return Ok(None);
    }
    let n = state.n();
    let s: Vec<f64> = state.gyy.iter().map(|v| v.sqrt()).collect();
    let cum = periodic_cumulative(&s, state.h());
    let total = cum[n];
    let g0 = state.g[0];
    let g1 = g0.congruence(&state.twist);
    let mut worst: f64 = 0.0;
    for k in 0..n {
        let target = spd::spd_geodesic(&g0, &g1, cum[k] / total)?;
        worst = worst.max(spd::spd_distance(&state.g[k], &target)?);
    }
    Ok(Some(worst))
}
