//! Integral quantities, entropy functionals and the backward conjugate heat
//! solver.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::bundle::{self, BundleState};
use crate::error::{FlowError, Result};
use crate::flow::{FlowMode, RescaleKind, Trajectory};
use crate::stencil::{deriv_half, interp_half, periodic_d1, periodic_sum, wrap};
use crate::warped::{SurfaceMetric, WarpedState};

/// One row of scalar diagnostics. For bundles, `V = ∫√det G √g_yy dy`,
/// `E = ∫ℰ √g_yy dy` and `min_S`, `max_r`, `min_r` refer to the scalar
/// curvature of the total space. For warped products `max_r` is the maximum
/// of `R^N` and `min_r` the minimum of the base curvature `R^M`. `L` is the
/// systole on the torus and the base length on bundles.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub dt: f64,
    #[serde(rename = "V")]
    pub v: f64,
    #[serde(rename = "E")]
    pub e: f64,
    #[serde(rename = "min_S")]
    pub min_s: f64,
    pub max_gradu_sq: Option<f64>,
    pub max_riem: f64,
    pub gauss_bonnet: Option<f64>,
    #[serde(rename = "L")]
    pub l: Option<f64>,
    #[serde(rename = "detG_min")]
    pub det_g_min: Option<f64>,
    #[serde(rename = "detG_max")]
    pub det_g_max: Option<f64>,
    pub max_energy_density: Option<f64>,
    #[serde(rename = "W_plus")]
    pub w_plus: Option<f64>,
    pub u_min: Option<f64>,
    pub u_max: Option<f64>,
    pub max_r: Option<f64>,
    pub min_r: Option<f64>,
    pub dissipation: Option<f64>,
    pub sol_residual: Option<f64>,
}

pub const CSV_COLUMNS: [&str; 19] = [
    "t",
    "dt",
    "V",
    "E",
    "min_S",
    "max_gradu_sq",
    "max_riem",
    "gauss_bonnet",
    "L",
    "detG_min",
    "detG_max",
    "max_energy_density",
    "W_plus",
    "u_min",
    "u_max",
    "max_r",
    "min_r",
    "dissipation",
    "sol_residual",
];

impl DiagnosticsRecord {
    pub fn is_finite(&self) -> bool {
        let opt = |v: Option<f64>| v.is_none_or(f64::is_finite);
        [self.t, self.dt, self.v, self.e, self.min_s, self.max_riem].iter().all(|v| v.is_finite())
            && [
                self.max_gradu_sq,
                self.gauss_bonnet,
                self.l,
                self.det_g_min,
                self.det_g_max,
                self.max_energy_density,
                self.w_plus,
                self.u_min,
                self.u_max,
                self.max_r,
                self.min_r,
                self.dissipation,
                self.sol_residual,
            ]
            .into_iter()
            .all(opt)
    }

    /// The row of the rescaled solution at time `t/s`.
    pub fn rescaled(&self, s: f64, kind: RescaleKind) -> DiagnosticsRecord {
        let mul = |v: Option<f64>, f: f64| v.map(|x| x * f);
        let root = s.sqrt();
        let shift = if kind == RescaleKind::Warped3d { -0.5 * s.ln() } else { 0.0 };
        let bundle = kind == RescaleKind::Bundle;
        DiagnosticsRecord {
            t: self.t / s,
            dt: self.dt / s,
            v: if bundle { self.v / root } else { self.v / s },
            e: if bundle { self.e * root } else { self.e },
            min_s: self.min_s * s,
            max_gradu_sq: mul(self.max_gradu_sq, s),
            max_riem: self.max_riem * s,
            gauss_bonnet: self.gauss_bonnet,
            l: mul(self.l, 1.0 / root),
            det_g_min: self.det_g_min,
            det_g_max: self.det_g_max,
            max_energy_density: mul(self.max_energy_density, s),
            w_plus: self.w_plus,
            u_min: self.u_min.map(|u| u + shift),
            u_max: self.u_max.map(|u| u + shift),
            max_r: mul(self.max_r, s),
            min_r: mul(self.min_r, s),
            dissipation: mul(self.dissipation, s),
            sol_residual: self.sol_residual,
        }
    }
}

fn fold_min(it: impl Iterator<Item = f64>) -> f64 {
    it.fold(f64::INFINITY, f64::min)
}

fn fold_max(it: impl Iterator<Item = f64>) -> f64 {
    it.fold(f64::NEG_INFINITY, f64::max)
}

pub fn warped_functionals(state: &WarpedState, full: bool) -> Result<DiagnosticsRecord> {
    let geo = state.geometry()?;
    let n = geo.r_m.len();
    let l = match (&state.metric, full) {
        (SurfaceMetric::Torus(m), true) => Some(crate::warped::torus_systole(m)),
        _ => None,
    };
    Ok(DiagnosticsRecord {
        t: state.time,
        dt: 0.0,
        v: geo.weights.iter().sum(),
        e: geo.integrate(|k| geo.grad_u_sq[k]),
        min_s: fold_min((0..n).map(|k| geo.s(k))),
        max_gradu_sq: Some(fold_max(geo.grad_u_sq.iter().cloned())),
        max_riem: geo.max_riem(),
        gauss_bonnet: Some(geo.integrate(|k| geo.r_m[k])),
        l,
        u_min: Some(fold_min(state.u.iter().cloned())),
        u_max: Some(fold_max(state.u.iter().cloned())),
        max_r: Some(fold_max((0..n).map(|k| geo.r_n(k)))),
        min_r: Some(fold_min(geo.r_m.iter().cloned())),
        dissipation: Some(geo.integrate(|k| geo.grad_u_sq[k].powi(2) + 2.0 * geo.lap_u[k].powi(2))),
        ..Default::default()
    })
}

pub fn bundle_functionals(state: &BundleState, full: bool) -> Result<DiagnosticsRecord> {
    let geo = state.geometry()?;
    let n = state.n();
    let h = state.h();
    let curv: Vec<_> = (0..n).map(|k| geo.curvature_at(k)).collect();
    let ed: Vec<f64> = (0..n).map(|k| geo.energy_density(k)).collect();
    let sq: Vec<f64> = state.gyy.iter().map(|v| v.sqrt()).collect();
    let det: Vec<f64> = state.g.iter().map(|g| g.det()).collect();
    let vol: Vec<f64> = (0..n).map(|k| det[k].sqrt() * sq[k]).collect();
    let energy: Vec<f64> = (0..n).map(|k| ed[k] * sq[k]).collect();
    let min_r = fold_min(curv.iter().map(|c| c.scalar));
    Ok(DiagnosticsRecord {
        t: state.time,
        dt: 0.0,
        v: periodic_sum(&vol, h),
        e: periodic_sum(&energy, h),
        min_s: min_r,
        max_riem: fold_max(curv.iter().map(|c| c.riem_norm_sq)).sqrt(),
        l: Some(bundle::base_length(state)),
        det_g_min: Some(fold_min(det.iter().cloned())),
        det_g_max: Some(fold_max(det.iter().cloned())),
        max_energy_density: Some(fold_max(ed.iter().cloned())),
        max_r: Some(fold_max(curv.iter().map(|c| c.scalar))),
        min_r: Some(min_r),
        sol_residual: if full { bundle::sol_residual(state)? } else { None },
        ..Default::default()
    })
}

/// Diagnostics of either kind of state.
pub trait BasicFunctionals {
    fn basic_functionals(&self) -> Result<DiagnosticsRecord>;
}

impl BasicFunctionals for WarpedState {
    fn basic_functionals(&self) -> Result<DiagnosticsRecord> {
        self.validate()?;
        warped_functionals(self, true)
    }
}

impl BasicFunctionals for BundleState {
    fn basic_functionals(&self) -> Result<DiagnosticsRecord> {
        self.validate()?;
        bundle_functionals(self, true)
    }
}

pub fn basic_functionals<S: BasicFunctionals>(state: &S) -> Result<DiagnosticsRecord> {
    state.basic_functionals()
}

/// `∫(|∇u|⁴ + 2(Δu)²) dV`.
pub fn dissipation(state: &WarpedState) -> Result<f64> {
    let geo = state.geometry()?;
    Ok(geo.integrate(|k| geo.grad_u_sq[k].powi(2) + 2.0 * geo.lap_u[k].powi(2)))
}

/// Diameter enclosure of a warped torus at one time. The total space
/// satisfies `base_diameter ≤ diam ≤ upper_bound`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiameterSample {
    pub t: f64,
    pub base_diameter: f64,
    /// `π e^{max u}`, the largest fiber diameter.
    pub max_fiber_diameter: f64,
    pub upper_bound: f64,
    pub systole: f64,
    pub v: f64,
    /// `L · diam / V`, with the base diameter.
    pub l_diam_over_v: f64,
    /// `upper_bound / √t`; absent at `t = 0`.
    pub upper_over_sqrt_t: Option<f64>,
}

pub fn diameter_sample(state: &WarpedState) -> Result<Option<DiameterSample>> {
    let SurfaceMetric::Torus(m) = &state.metric else {
        return Ok(None);
    };
    let geo = state.geometry()?;
    let base_diameter = crate::warped::torus_diameter(m);
    let max_fiber_diameter = PI * fold_max(state.u.iter().cloned()).exp();
    let upper_bound = base_diameter + 2.0 * max_fiber_diameter;
    let systole = crate::warped::torus_systole(m);
    let v = geo.weights.iter().sum::<f64>();
    Ok(Some(DiameterSample {
        t: state.time,
        base_diameter,
        max_fiber_diameter,
        upper_bound,
        systole,
        v,
        l_diam_over_v: systole * base_diameter / v,
        upper_over_sqrt_t: (state.time > 0.0).then(|| upper_bound / state.time.sqrt()),
    }))
}

/// [`diameter_sample`] at every snapshot of a torus trajectory; empty otherwise.
pub fn diameter_diagnostics(traj: &Trajectory<WarpedState>) -> Result<Vec<DiameterSample>> {
    let mut out = Vec::new();
    for s in &traj.snapshots {
        match diameter_sample(s)? {
            Some(d) => out.push(d),
            None => break,
        }
    }
    Ok(out)
}

/// `∫[τ(|∇f|² + R − |∇u|²) + f − 2](4πτ)⁻¹e^{−f} dV`, after shifting `f` by
/// the constant that makes `∫(4πτ)⁻¹e^{−f} dV = 1`.
pub fn w_functional(state: &WarpedState, f: &[f64], tau: f64) -> Result<f64> {
    if !(tau > 0.0) {
        return Err(FlowError::InvalidArgument(format!("tau must be positive, got {tau}")));
    }
    let geo = state.geometry()?;
    if f.len() != geo.r_m.len() {
        return Err(FlowError::GridMismatch(format!("f has {} values, expected {}", f.len(), geo.r_m.len())));
    }
    let fmin = fold_min(f.iter().cloned());
    let mass = geo.integrate(|k| (fmin - f[k]).exp()) / (4.0 * PI * tau);
    let shift = mass.ln() - fmin;
    let f: Vec<f64> = f.iter().map(|v| v + shift).collect();
    let f_geo = WarpedState { u: f.clone(), ..state.clone() }.geometry()?;
    Ok(geo.integrate(|k| {
        let density = (-f[k]).exp() / (4.0 * PI * tau);
        (tau * (f_geo.grad_u_sq[k] + geo.r_m[k] - geo.grad_u_sq[k]) + f[k] - 2.0) * density
    }))
}

/// A positive solution `ũ` of the conjugate heat equation at one time, with
/// `ũ = (4πt)^{−1/2} e^{−f̃}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConjugateHeatField {
    pub time: f64,
    pub u: Vec<f64>,
}

impl ConjugateHeatField {
    /// `ũ = 1/L` on the given state.
    pub fn terminal(state: &BundleState) -> Self {
        let l = bundle::base_length(state);
        ConjugateHeatField { time: state.time, u: vec![1.0 / l; state.n()] }
    }

    pub fn f_tilde(&self) -> Vec<f64> {
        let c = (4.0 * PI * self.time).sqrt();
        self.u.iter().map(|u| -(u * c).ln()).collect()
    }

    /// `∫ ũ √g_yy dy`.
    pub fn mass(&self, gyy: &[f64]) -> f64 {
        let h = 1.0 / gyy.len() as f64;
        self.u.iter().zip(gyy).map(|(u, g)| u * g.sqrt()).sum::<f64>() * h
    }
}

/// `d m/dτ` for the density `m = ũ√g_yy` in reversed time: a conservative
/// fourth-order discretization of `∂_y(ũ_y/√g_yy)`.
fn density_rate(m: &[f64], sqrt_gyy: &[f64], inv_h: f64) -> Vec<f64> {
    let n = m.len();
    let u: Vec<f64> = (0..n).map(|k| m[k] / sqrt_gyy[k]).collect();
    let r: Vec<f64> = sqrt_gyy.iter().map(|s| 1.0 / s).collect();
    // flux at k + ½
    let flux: Vec<f64> = (0..n)
        .map(|k| {
            let (a, b, c, d) = (wrap(k, -1, n), k, wrap(k, 1, n), wrap(k, 2, n));
            deriv_half(u[a], u[b], u[c], u[d], inv_h) * interp_half(r[a], r[b], r[c], r[d])
        })
        .collect();
    (0..n)
        .map(|k| {
            let (fm2, fm1, f0, f1) = (flux[wrap(k, -2, n)], flux[wrap(k, -1, n)], flux[k], flux[wrap(k, 1, n)]);
            deriv_half(fm2, fm1, f0, f1, inv_h)
        })
        .collect()
}

/// Solves `∂ũ/∂t = −Δũ − ¼ℰũ` backward from the last snapshot of a
/// modified-flow bundle trajectory, starting from `terminal`. The metric
/// between snapshots is interpolated linearly in time. Returns one field per
/// stored snapshot, in snapshot order.
pub fn conjugate_heat_backward(
    traj: &Trajectory<BundleState>,
    terminal: &ConjugateHeatField,
) -> Result<Vec<ConjugateHeatField>> {
    if traj.mode != FlowMode::Modified {
        return Err(FlowError::InvalidArgument("conjugate heat solve needs a modified-flow trajectory".into()));
    }
    let snaps = &traj.snapshots;
    let last = snaps.last().ok_or_else(|| FlowError::InsufficientSamples("no snapshots".into()))?;
    let n = last.n();
    if terminal.u.len() != n {
        return Err(FlowError::GridMismatch(format!("terminal field has {} values, grid has {n}", terminal.u.len())));
    }
    if (terminal.time - last.time).abs() > 1e-12 * (1.0 + last.time.abs()) {
        return Err(FlowError::InvalidArgument("terminal time differs from the last snapshot".into()));
    }
    let h = 1.0 / n as f64;
    let inv_h = 1.0 / h;
    let sqrt_of = |s: &BundleState| -> Vec<f64> { s.gyy.iter().map(|v| v.sqrt()).collect() };

    let mut m: Vec<f64> = (0..n).map(|k| terminal.u[k] * last.gyy[k].sqrt()).collect();
    let mut out = vec![ConjugateHeatField { time: last.time, u: terminal.u.clone() }];
    for idx in (0..snaps.len() - 1).rev() {
        let (a, b) = (&snaps[idx], &snaps[idx + 1]);
        let span = b.time - a.time;
        let gmin = a.gyy.iter().chain(&b.gyy).cloned().fold(f64::INFINITY, f64::min);
        let dt_max = 0.25 * h * h * gmin;
        let steps = (span / dt_max).ceil().max(1.0) as usize;
        let dt = span / steps as f64;
        let metric_at = |t: f64| -> Vec<f64> {
            let w = (t - a.time) / span;
            (0..n).map(|k| ((1.0 - w) * a.gyy[k] + w * b.gyy[k]).sqrt()).collect()
        };
        for s in 0..steps {
            let t0 = b.time - s as f64 * dt;
            let (g0, g1, g2) = (metric_at(t0), metric_at(t0 - 0.5 * dt), metric_at(t0 - dt));
            let k1 = density_rate(&m, &g0, inv_h);
            let y2: Vec<f64> = (0..n).map(|k| m[k] + 0.5 * dt * k1[k]).collect();
            let k2 = density_rate(&y2, &g1, inv_h);
            let y3: Vec<f64> = (0..n).map(|k| m[k] + 0.5 * dt * k2[k]).collect();
            let k3 = density_rate(&y3, &g1, inv_h);
            let y4: Vec<f64> = (0..n).map(|k| m[k] + dt * k3[k]).collect();
            let k4 = density_rate(&y4, &g2, inv_h);
            for k in 0..n {
                m[k] += dt / 6.0 * (k1[k] + 2.0 * (k2[k] + k3[k]) + k4[k]);
            }
        }
        if let Some(_) = m.iter().position(|v| !(*v > 0.0)) {
            return Err(FlowError::NegativeDensity { time: a.time, index: idx });
        }
        let sq = sqrt_of(a);
        out.push(ConjugateHeatField { time: a.time, u: (0..n).map(|k| m[k] / sq[k]).collect() });
    }
    out.reverse();
    Ok(out)
}

/// `∫[t(|∇f̃|² − ¼ℰ) − f̃ + 1](4πt)^{−1/2}e^{−f̃}√g_yy dy`.
pub fn w_plus(state: &BundleState, f: &[f64], t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(FlowError::InvalidArgument(format!("t must be positive, got {t}")));
    }
    let n = state.n();
    if f.len() != n {
        return Err(FlowError::GridMismatch(format!("f has {} values, grid has {n}", f.len())));
    }
    let ed = bundle::energy_density(state)?;
    let fy = periodic_d1(f, state.h());
    let norm = (4.0 * PI * t).sqrt();
    let integrand: Vec<f64> = (0..n)
        .map(|k| {
            let grad_sq = fy[k] * fy[k] / state.gyy[k];
            (t * (grad_sq - 0.25 * ed[k]) - f[k] + 1.0) * (-f[k]).exp() / norm * state.gyy[k].sqrt()
        })
        .collect();
    Ok(periodic_sum(&integrand, state.h()))
}

/// `W₊` at every snapshot, paired with the conjugate heat fields returned by
/// [`conjugate_heat_backward`].
pub fn w_plus_series(traj: &Trajectory<BundleState>, fields: &[ConjugateHeatField]) -> Result<Vec<(f64, f64)>> {
    if fields.len() != traj.snapshots.len() {
        return Err(FlowError::GridMismatch("one conjugate heat field per snapshot expected".into()));
    }
    traj.snapshots
        .iter()
        .zip(fields)
        .map(|(s, u)| Ok((s.time, w_plus(s, &u.f_tilde(), s.time)?)))
        .collect()
}
