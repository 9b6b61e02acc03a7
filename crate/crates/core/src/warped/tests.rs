use std::f64::consts::PI;

use super::*;
use crate::flow::{FlowState, Rescale, RescaleKind};

fn torus(n: usize, g: impl Fn(f64, f64) -> (f64, f64, f64), u: impl Fn(f64, f64) -> f64) -> WarpedState {
    let nn = n * n;
    let (mut g11, mut g12, mut g22, mut uu) =
        (Vec::with_capacity(nn), Vec::with_capacity(nn), Vec::with_capacity(nn), Vec::with_capacity(nn));
    for j in 0..n {
        for i in 0..n {
            let (x, y) = (i as f64 / n as f64, j as f64 / n as f64);
            let (a, b, c) = g(x, y);
            g11.push(a);
            g12.push(b);
            g22.push(c);
            uu.push(u(x, y));
        }
    }
    WarpedState::new(SurfaceMetric::Torus(TorusMetric::new(n, g11, g12, g22).unwrap()), uu, 0.0).unwrap()
}

fn flat(x: f64, y: f64) -> (f64, f64, f64) {
    let _ = (x, y);
    (1.0, 0.0, 1.0)
}

fn sphere(n: usize, r: f64, u: impl Fn(f64) -> f64) -> WarpedState {
    let m = SphereMetric::round(n, r).unwrap();
    let uu = (0..n).map(|k| u(m.node(k))).collect();
    WarpedState::new(SurfaceMetric::Sphere(m), uu, 0.0).unwrap()
}

#[test]
fn flat_torus_is_flat() {
    let s = torus(16, flat, |_, _| 0.0);
    let c = curvature_warped(&s).unwrap();
    assert!(c.r_m.iter().chain(&c.r_n).chain(&c.riem_norm_sq).all(|&v| v == 0.0));
    for mode in [FlowMode::Modified, FlowMode::Unmodified] {
        let r = rhs_warped(&s, mode).unwrap();
        assert!(r.du.iter().all(|&v| v == 0.0));
        assert!(r.dg.iter().all(|d| d.max_abs() == 0.0));
    }
}

#[test]
fn cosine_warp_on_flat_torus() {
    let eps = 0.01;
    let s = torus(64, flat, |x, _| eps * (2.0 * PI * x).cos());
    let c = curvature_warped(&s).unwrap();
    assert!((c.r_n[0] - 8.0 * PI * PI * eps).abs() < 1e-6);
    assert!((c.r_n[0] - 0.7896).abs() < 1e-4);
    let r = rhs_warped(&s, FlowMode::Modified).unwrap();
    assert!((r.du[0] + 4.0 * PI * PI * eps).abs() < 1e-6);
    assert!((r.du[0] + 0.3948).abs() < 1e-4);
    assert!(r.dg[0].xx.abs() < 1e-15);
}

#[test]
fn round_sphere_curvature() {
    for r in [1.0, 0.5, 2.0] {
        let s = sphere(128, r, |_| 0.4);
        let c = curvature_warped(&s).unwrap();
        for k in 0..128 {
            assert!((c.r_m[k] - 2.0 / (r * r)).abs() < 1e-6 / (r * r));
            assert!((c.r_n[k] - 2.0 / (r * r)).abs() < 1e-6 / (r * r));
            assert!((c.riem_norm_sq[k] - 4.0 / r.powi(4)).abs() < 1e-5 / r.powi(4));
        }
        assert!((gauss_bonnet(&s.metric).unwrap() - 8.0 * PI).abs() < 1e-6);
    }
}

#[test]
fn round_sphere_rates() {
    let s = sphere(64, 1.0, |_| 0.0);
    let r = rhs_warped(&s, FlowMode::Modified).unwrap();
    for (d, g) in r.dg.iter().zip(s.geometry().unwrap().metric) {
        assert!((*d + g.scale(2.0)).max_abs() < 1e-6);
    }
    let rate = s.rate(FlowMode::Modified).unwrap();
    assert!((rate[0] + 1.0).abs() < 1e-6);
    assert!(rate[1..=64].iter().all(|v| v.abs() < 1e-6));
}

#[test]
fn pole_regularity_is_enforced() {
    let n = 32;
    let h = PI / n as f64;
    let f: Vec<f64> = (0..n).map(|k| 1.1 * ((k as f64 + 0.5) * h).sin()).collect();
    assert!(matches!(SphereMetric::new(n, 1.0, f), Err(FlowError::PoleRegularity { .. })));
    let g = vec![-1.0; 1];
    assert!(SphereMetric::new(n, 1.0, g).is_err());
}

#[test]
fn non_spd_node_is_located() {
    let n = 8;
    let mut g11 = vec![1.0; 64];
    g11[19] = -1.0;
    let e = TorusMetric::new(n, g11, vec![0.0; 64], vec![1.0; 64]).unwrap_err();
    assert!(matches!(e, FlowError::NonSpdMetric { node: 19 }));
}

/// Brioschi's formula for the Gauss curvature of `E dx² + 2F dxdy + G dy²`
/// with `E = 1 + a sin 2πy`, `F = b cos 2πx`, `G = 1 + c sin 2πx`.
fn brioschi(x: f64, y: f64, a: f64, b: f64, c: f64) -> f64 {
    let w = 2.0 * PI;
    let (e, f, g) = (1.0 + a * (w * y).sin(), b * (w * x).cos(), 1.0 + c * (w * x).sin());
    let (e_u, e_v, e_vv) = (0.0, w * a * (w * y).cos(), -w * w * a * (w * y).sin());
    let (f_u, f_v, f_uv) = (-w * b * (w * x).sin(), 0.0, 0.0);
    let (g_u, g_v, g_uu) = (w * c * (w * x).cos(), 0.0, -w * w * c * (w * x).sin());
    let det3 = |m: [[f64; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let m1 = [
        [-0.5 * e_vv + f_uv - 0.5 * g_uu, 0.5 * e_u, f_u - 0.5 * e_v],
        [f_v - 0.5 * g_u, e, f],
        [0.5 * g_v, f, g],
    ];
    let m2 = [[0.0, 0.5 * e_v, 0.5 * g_u], [0.5 * e_v, e, f], [0.5 * g_u, f, g]];
    (det3(m1) - det3(m2)) / (e * g - f * f).powi(2)
}

#[test]
fn gauss_curvature_matches_brioschi() {
    let (a, b, c) = (0.2, 0.15, 0.25);
    let metric = |x: f64, y: f64| (1.0 + a * (2.0 * PI * y).sin(), b * (2.0 * PI * x).cos(), 1.0 + c * (2.0 * PI * x).sin());
    let mut errs = vec![];
    for n in [32, 64] {
        let s = torus(n, metric, |_, _| 0.0);
        let c_out = curvature_warped(&s).unwrap();
        let mut err: f64 = 0.0;
        for j in 0..n {
            for i in 0..n {
                let k = 0.5 * c_out.r_m[j * n + i];
                err = err.max((k - brioschi(i as f64 / n as f64, j as f64 / n as f64, a, b, c)).abs());
            }
        }
        errs.push(err);
    }
    assert!(errs[1] < 3e-4, "{errs:?}");
    assert!(errs[0] / errs[1] > 10.0, "{errs:?}");
}

#[test]
fn ricci_contracts_to_scalar_curvature() {
    let s = torus(
        32,
        |x, y| (1.0 + 0.2 * (2.0 * PI * y).sin(), 0.1 * (2.0 * PI * x).cos(), 1.3 + 0.2 * (2.0 * PI * (x + y)).sin()),
        |x, y| 0.2 * (2.0 * PI * x).cos() * (2.0 * PI * y).sin(),
    );
    let c = curvature_warped(&s).unwrap();
    let geo = s.geometry().unwrap();
    for k in 0..32 * 32 {
        let gi = geo.metric[k].inverse().unwrap().to_mat();
        let tr = (gi * c.ricci[k].base.to_mat()).trace() + (-2.0 * s.u[k]).exp() * c.ricci[k].theta_theta;
        assert!((tr - c.r_n[k]).abs() < 1e-12 * (1.0 + c.r_n[k].abs()));
    }
}

#[test]
fn ricci_flow_rates_match_ricci() {
    let s = torus(
        16,
        |x, y| (1.0 + 0.2 * (2.0 * PI * y).sin(), 0.1 * (2.0 * PI * x).cos(), 1.0),
        |x, _| 0.1 * (2.0 * PI * x).sin(),
    );
    let c = curvature_warped(&s).unwrap();
    let r = rhs_warped(&s, FlowMode::Unmodified).unwrap();
    for k in 0..256 {
        assert!((r.dg[k] + c.ricci[k].base.scale(2.0)).max_abs() < 1e-12);
        // ∂_t e^{2u} = −2 Ric_θθ
        let lhs = 2.0 * (2.0 * s.u[k]).exp() * r.du[k];
        assert!((lhs + 2.0 * c.ricci[k].theta_theta).abs() < 1e-12);
    }
}

#[test]
fn gauss_bonnet_on_bumpy_torus() {
    let s = torus(
        48,
        |x, y| {
            let w = (0.3 * (2.0 * PI * x).sin() * (2.0 * PI * y).cos()).exp();
            (w, 0.0, w)
        },
        |_, _| 0.0,
    );
    assert!(gauss_bonnet(&s.metric).unwrap().abs() < 1e-12);
}

#[test]
fn gauge_probe() {
    let s = torus(64, flat, |x, _| 0.01 * (2.0 * PI * x).cos());
    let r = lie_gauge_equivalence_probe(&s, 1e-4).unwrap();
    assert!(r.volume_diff <= 1e-6, "{r:?}");
    assert!(r.gauss_bonnet_diff < 1e-12);
    let flat_state = torus(16, flat, |_, _| 0.0);
    let z = lie_gauge_equivalence_probe(&flat_state, 1e-3).unwrap();
    assert_eq!((z.volume_diff, z.max_riem_diff, z.gauss_bonnet_diff), (0.0, 0.0, 0.0));
    let round = sphere(64, 1.0, |_| 0.2);
    let z = lie_gauge_equivalence_probe(&round, 1e-4).unwrap();
    assert_eq!((z.volume_diff, z.max_riem_diff, z.gauss_bonnet_diff), (0.0, 0.0, 0.0));
}

#[test]
fn rescaling_scales_curvature_norm() {
    let t = torus(
        24,
        |x, y| (1.0 + 0.2 * (2.0 * PI * y).sin(), 0.1 * (2.0 * PI * x).cos(), 1.0),
        |x, y| 0.1 * (2.0 * PI * (x - y)).cos(),
    );
    let sp = sphere(32, 1.0, |x| 0.05 * x.cos());
    for state in [t, sp] {
        let base = curvature_warped(&state).unwrap();
        for s in [0.5, 4.0] {
            for kind in [RescaleKind::Warped2d, RescaleKind::Warped3d] {
                let r = curvature_warped(&state.rescale(s, kind).unwrap()).unwrap();
                for (a, b) in base.riem_norm_sq.iter().zip(&r.riem_norm_sq) {
                    assert!((b - s * s * a).abs() <= 1e-12 * b.abs());
                }
            }
        }
    }
}

#[test]
fn systole_of_flat_tori() {
    let s = TorusMetric::constant(12, 4.0, 0.0, 1.0).unwrap();
    assert!((torus_systole(&s) - 1.0).abs() < 1e-12);
    let s = TorusMetric::constant(12, 9.0, 0.0, 4.0).unwrap();
    assert!((torus_systole(&s) - 2.0).abs() < 1e-12);
    // shortest class (1,-1) has squared length 2 − 2·0.9 + 1
    let s = TorusMetric::constant(12, 2.0, 0.9, 1.0).unwrap();
    assert!((torus_systole(&s) - 1.0).abs() < 1e-12);
    let s = TorusMetric::constant(12, 1.0, 0.6, 1.0).unwrap();
    assert!((torus_systole(&s) - 0.8f64.sqrt()).abs() < 1e-12);
}

#[test]
fn diameter_of_flat_tori() {
    let s = TorusMetric::constant(16, 9.0, 0.0, 9.0).unwrap();
    assert!((torus_diameter(&s) - 1.5 * 2f64.sqrt()).abs() < 1e-12);
    let s = TorusMetric::constant(32, 1.0, 0.0, 4.0).unwrap();
    let exact = 1.25f64.sqrt();
    let d = torus_diameter(&s);
    assert!(d >= exact * (1.0 - 1e-12) && d < exact * 1.02, "{d}");
}
