//! Named presets and the initial data they start from.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::bundle::BundleState;
use crate::error::{FlowError, Result};
use crate::flow::{FlowMode, StepController, StopReason};
use crate::holonomy::{classify_real, Holonomy, HolonomyClass};
use crate::mat2::{Mat2, Sym2};
use crate::spd;
use crate::warped::{SphereMetric, SurfaceMetric, TorusMetric, WarpedState};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    /// Round sphere with constant warp; shrinks to a point.
    SphereCollapse,
    /// Non-round sphere with a non-constant warp.
    SpherePerturbed,
    /// Warped product over a bumpy flat torus.
    FlatTorusWarped,
    /// The exact Sol solution `g_yy = 4c²(t+a)`, `G = diag(e^{2cy}, e^{−2cy})`.
    SolExact,
    /// Perturbed data with hyperbolic holonomy.
    SolHyperbolic,
    /// Perturbed data with elliptic holonomy.
    FlatElliptic,
    /// Perturbed data with parabolic holonomy.
    NilParabolic,
}

pub const PRESETS: [Preset; 7] = [
    Preset::SphereCollapse,
    Preset::SpherePerturbed,
    Preset::FlatTorusWarped,
    Preset::SolExact,
    Preset::SolHyperbolic,
    Preset::FlatElliptic,
    Preset::NilParabolic,
];

impl Preset {
    pub fn name(&self) -> &'static str {
        match self {
            Preset::SphereCollapse => "sphere-collapse",
            Preset::SpherePerturbed => "sphere-perturbed",
            Preset::FlatTorusWarped => "flat-torus-warped",
            Preset::SolExact => "sol-exact",
            Preset::SolHyperbolic => "sol-hyperbolic",
            Preset::FlatElliptic => "flat-elliptic",
            Preset::NilParabolic => "nil-parabolic",
        }
    }

    pub fn is_bundle(&self) -> bool {
        matches!(self, Preset::SolExact | Preset::SolHyperbolic | Preset::FlatElliptic | Preset::NilParabolic)
    }

    pub fn expected_stop(&self) -> StopReason {
        match self {
            Preset::SphereCollapse | Preset::SpherePerturbed => StopReason::CurvatureBlowup,
            _ => StopReason::ReachedTEnd,
        }
    }

    /// Whether `t·max|Rm|` should approach a nonzero constant rather than decay.
    pub fn curvature_scale_invariant(&self) -> bool {
        matches!(self, Preset::SolExact | Preset::SolHyperbolic)
    }
}

impl std::str::FromStr for Preset {
    type Err = FlowError;
    fn from_str(s: &str) -> Result<Self> {
        PRESETS
            .iter()
            .find(|p| p.name() == s)
            .copied()
            .ok_or_else(|| FlowError::Config(format!("unknown scenario '{s}'")))
    }
}

impl std::fmt::Display for Preset {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Parameters of the initial data. Each preset reads the subset it needs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InitialParams {
    /// Sphere radius `r₀`.
    pub radius: f64,
    /// Bump `b` of the sphere radius profile `r₀ sin x (1 + b cos 2x)`.
    pub bump: f64,
    /// Warp amplitude.
    pub u_amp: f64,
    /// Torus scale `λ` in `g = λ² e^{2w} [[1, σ], [σ, 1]]`.
    pub lambda: f64,
    pub sigma: f64,
    /// Conformal bump `w = w_amp cos 2πx cos 4πy`.
    pub w_amp: f64,
    pub holonomy: Holonomy,
    /// Gluing exponent of the exact Sol preset, twist `diag(e^c, e^{−c})`.
    pub c: f64,
    pub a: f64,
    pub t_start: f64,
    /// Relative perturbation `ε cos 2πy` of `g_yy`.
    pub eps: f64,
    /// Reparametrization `y ↦ y + δ sin 2πy` of the fiber profile.
    pub delta: f64,
    /// Trace-free perturbation of the fiber metric.
    pub s_amp: f64,
    /// Perturbation `det G ∝ e^{2·det_amp·cos 2πy}`.
    pub det_amp: f64,
    /// Base length for flat and parabolic presets.
    pub length: f64,
}

impl Default for InitialParams {
    fn default() -> Self {
        InitialParams {
            radius: 1.0,
            bump: 0.0,
            u_amp: 0.0,
            lambda: 1.0,
            sigma: 0.0,
            w_amp: 0.0,
            holonomy: Holonomy::identity(),
            c: 1.0,
            a: 0.0,
            t_start: 0.0,
            eps: 0.0,
            delta: 0.0,
            s_amp: 0.0,
            det_amp: 0.0,
            length: 1.0,
        }
    }
}

/// Everything needed to start a run of a preset, with defaults per preset.
#[derive(Clone, Debug, PartialEq)]
pub struct PresetDefaults {
    pub n: usize,
    pub mode: FlowMode,
    pub initial: InitialParams,
    pub controller: StepController,
    pub snapshot_dt: f64,
}

pub fn preset_defaults(p: Preset) -> PresetDefaults {
    let ctl = StepController::default();
    match p {
        Preset::SphereCollapse => PresetDefaults {
            n: 128,
            mode: FlowMode::Modified,
            initial: InitialParams::default(),
            controller: StepController { cfl: 0.2, t_end: 10.0, ..ctl },
            snapshot_dt: 0.01,
        },
        Preset::SpherePerturbed => PresetDefaults {
            n: 128,
            mode: FlowMode::Modified,
            initial: InitialParams { bump: 0.1, u_amp: 0.05, ..Default::default() },
            controller: StepController { cfl: 0.2, t_end: 10.0, ..ctl },
            snapshot_dt: 0.01,
        },
        Preset::FlatTorusWarped => PresetDefaults {
            n: 32,
            mode: FlowMode::Modified,
            initial: InitialParams { lambda: 5.0, w_amp: 0.1, u_amp: 0.1, ..Default::default() },
            controller: StepController { cfl: 0.2, t_end: 10.0, ..ctl },
            snapshot_dt: 0.5,
        },
        Preset::SolExact => PresetDefaults {
            n: 256,
            mode: FlowMode::Modified,
            initial: InitialParams { c: 1.0, a: 0.0, t_start: 1.0, ..Default::default() },
            controller: StepController { cfl: 0.4, t_end: 10.0, ..ctl },
            snapshot_dt: 0.1,
        },
        Preset::SolHyperbolic => PresetDefaults {
            n: 256,
            mode: FlowMode::Modified,
            initial: InitialParams {
                holonomy: Holonomy::new(2, 1, 1, 1).expect("unimodular"),
                t_start: 1.0,
                eps: 0.1,
                delta: 0.05,
                s_amp: 0.1,
                det_amp: 0.05,
                ..Default::default()
            },
            controller: StepController { cfl: 0.4, t_end: 100.0, ..ctl },
            snapshot_dt: 0.5,
        },
        Preset::FlatElliptic => PresetDefaults {
            n: 64,
            mode: FlowMode::Modified,
            initial: InitialParams {
                holonomy: Holonomy::new(0, -1, 1, 0).expect("unimodular"),
                eps: 0.1,
                delta: 0.05,
                s_amp: 0.1,
                det_amp: 0.05,
                length: 5.0,
                ..Default::default()
            },
            controller: StepController { cfl: 0.4, t_end: 50.0, ..ctl },
            snapshot_dt: 1.0,
        },
        Preset::NilParabolic => PresetDefaults {
            n: 64,
            mode: FlowMode::Modified,
            initial: InitialParams {
                holonomy: Holonomy::new(1, 1, 0, 1).expect("unimodular"),
                eps: 0.1,
                delta: 0.05,
                s_amp: 0.1,
                det_amp: 0.05,
                length: 1.0,
                ..Default::default()
            },
            controller: StepController { cfl: 0.4, t_end: 50.0, ..ctl },
            snapshot_dt: 1.0,
        },
    }
}

/// Round or bumped sphere: `A = r₀(1 + b)`, `A f = r₀ sin x (1 + b cos 2x)`,
/// `u = u_amp cos x`.
pub fn sphere_state(n: usize, p: &InitialParams) -> Result<WarpedState> {
    if !(p.bump.abs() < 1.0 && p.radius > 0.0) {
        return Err(FlowError::Config("sphere needs radius > 0 and |bump| < 1".into()));
    }
    let h = PI / n as f64;
    let x = |k: usize| (k as f64 + 0.5) * h;
    let f = (0..n).map(|k| x(k).sin() * (1.0 + p.bump * (2.0 * x(k)).cos()) / (1.0 + p.bump)).collect();
    let metric = SphereMetric::new(n, p.radius * (1.0 + p.bump), f)?;
    let u = (0..n).map(|k| p.u_amp * x(k).cos()).collect();
    WarpedState::new(SurfaceMetric::Sphere(metric), u, 0.0)
}

/// `g = λ² e^{2w} [[1, σ], [σ, 1]]` with `w = w_amp cos 2πx cos 4πy` and
/// `u = u_amp (cos 2πx + ½ sin 2πy)`.
pub fn torus_state(n: usize, p: &InitialParams) -> Result<WarpedState> {
    if !(p.sigma.abs() < 1.0 && p.lambda > 0.0) {
        return Err(FlowError::Config("torus needs lambda > 0 and |sigma| < 1".into()));
    }
    let nn = n * n;
    let (mut g11, mut g12, mut g22, mut u) =
        (Vec::with_capacity(nn), Vec::with_capacity(nn), Vec::with_capacity(nn), Vec::with_capacity(nn));
    for j in 0..n {
        for i in 0..n {
            let (x, y) = (i as f64 / n as f64, j as f64 / n as f64);
            let w = p.w_amp * (2.0 * PI * x).cos() * (4.0 * PI * y).cos();
            let s = p.lambda * p.lambda * (2.0 * w).exp();
            g11.push(s);
            g12.push(s * p.sigma);
            g22.push(s);
            u.push(p.u_amp * ((2.0 * PI * x).cos() + 0.5 * (2.0 * PI * y).sin()));
        }
    }
    WarpedState::new(SurfaceMetric::Torus(TorusMetric::new(n, g11, g12, g22)?), u, 0.0)
}

/// Base point `P₀` fixed by the gluing: the Sol profile's value at `y = 0`
/// for hyperbolic `H`, an `H`-invariant metric for elliptic `H`, and the
/// identity otherwise.
fn base_point(h: &Mat2) -> Result<Sym2> {
    match classify_real(h) {
        HolonomyClass::Hyperbolic => {
            let half = 0.5 * h.trace();
            let disc = (half * half - 1.0).sqrt();
            let eig = |lam: f64| -> (f64, f64) {
                let (p, q) = ((h.b, lam - h.a), (lam - h.d, h.c));
                if p.0.hypot(p.1) >= q.0.hypot(q.1) {
                    p
                } else {
                    q
                }
            };
            let (v1, v2) = (eig(half + disc), eig(half - disc));
            let s = Mat2::new(v1.0, v2.0, v1.1, v2.1);
            let si = s.inverse().ok_or(FlowError::NotHyperbolic)?;
            let p = Sym2::IDENTITY.congruence(&si);
            Ok(p.scale(1.0 / p.det().sqrt()))
        }
        HolonomyClass::Elliptic => {
            let mut acc = Sym2::ZERO;
            let mut m = Mat2::IDENTITY;
            let mut count = 0;
            loop {
                acc += Sym2::IDENTITY.congruence(&m);
                count += 1;
                m = m * *h;
                if (m - Mat2::IDENTITY).max_abs() < 1e-9 || count > 12 {
                    break;
                }
            }
            Ok(acc.scale(1.0 / acc.det().sqrt()))
        }
        HolonomyClass::Parabolic => Ok(Sym2::IDENTITY),
    }
}

/// Fiber profile `G(y) = M(φ)ᵀ P(φ) M(φ)` with `M(y) = exp(y log(±H))`,
/// `P(y) = P₀^{½} exp(S(y)) P₀^{½} e^{w(y)}` and `φ(y) = y + δ sin 2πy`.
fn fiber_profile(n: usize, twist: &Mat2, p: &InitialParams) -> Result<Vec<Sym2>> {
    let log = twist
        .sl2_log()
        .or_else(|| (-*twist).sl2_log())
        .ok_or_else(|| FlowError::InvalidArgument("gluing matrix has no real logarithm".into()))?;
    let p0 = base_point(twist)?;
    let root = spd::spd_power(&p0, 0.5)?;
    (0..n)
        .map(|k| {
            let y = k as f64 / n as f64;
            let phi = y + p.delta * (2.0 * PI * y).sin();
            let m = Mat2::sl2_exp(&log.scale(phi));
            let (s, c) = ((2.0 * PI * phi).sin(), (2.0 * PI * phi).cos());
            let pert = spd::sym_exp(&Sym2::new(p.s_amp * s, 0.5 * p.s_amp * c, -p.s_amp * s));
            let w = p.det_amp * (2.0 * PI * phi).cos();
            let pp = (root.to_mat() * pert.to_mat() * root.to_mat()).sym_part().scale(w.exp());
            Ok(pp.congruence(&m))
        })
        .collect()
}

pub fn bundle_state(preset: Preset, n: usize, p: &InitialParams) -> Result<BundleState> {
    let wave = |k: usize| (2.0 * PI * k as f64 / n as f64).cos();
    match preset {
        Preset::SolExact => {
            let twist = Mat2::diag(p.c.exp(), (-p.c).exp());
            let base = 4.0 * p.c * p.c * (p.t_start + p.a);
            let gyy = (0..n).map(|k| base * (1.0 + p.eps * wave(k))).collect();
            BundleState::with_twist(gyy, fiber_profile(n, &twist, p)?, twist, p.t_start)
        }
        Preset::SolHyperbolic => {
            if p.holonomy.class() != HolonomyClass::Hyperbolic {
                return Err(FlowError::Config(format!("holonomy {} is not hyperbolic", p.holonomy)));
            }
            let h = p.holonomy.as_mat2();
            let c = (0.5 * h.trace().abs()).acosh();
            let base = 4.0 * c * c * (p.t_start + p.a);
            let gyy = (0..n).map(|k| base * (1.0 + p.eps * wave(k))).collect();
            BundleState::new(gyy, fiber_profile(n, &h, p)?, p.holonomy, p.t_start)
        }
        Preset::FlatElliptic | Preset::NilParabolic => {
            let want = if preset == Preset::FlatElliptic { HolonomyClass::Elliptic } else { HolonomyClass::Parabolic };
            if p.holonomy.class() != want {
                return Err(FlowError::Config(format!("holonomy {} is not {want}", p.holonomy)));
            }
            let base = p.length * p.length;
            let gyy = (0..n).map(|k| base * (1.0 + p.eps * wave(k))).collect();
            BundleState::new(gyy, fiber_profile(n, &p.holonomy.as_mat2(), p)?, p.holonomy, p.t_start)
        }
        _ => Err(FlowError::Config(format!("{preset} is not a bundle preset"))),
    }
}

pub fn warped_state(preset: Preset, n: usize, p: &InitialParams) -> Result<WarpedState> {
    match preset {
        Preset::SphereCollapse | Preset::SpherePerturbed => sphere_state(n, p),
        Preset::FlatTorusWarped => torus_state(n, p),
        _ => Err(FlowError::Config(format!("{preset} is not a warped preset"))),
    }
}
