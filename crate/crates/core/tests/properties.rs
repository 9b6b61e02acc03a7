use proptest::prelude::*;

use symflow::bundle::{curvature_bundle, BundleState};
use symflow::config::RunConfig;
use symflow::flow::{run, FlowMode, Rescale, RescaleKind, RunOptions, StepController};
use symflow::holonomy::{Holonomy, HolonomyClass};
use symflow::mat2::Mat2;
use symflow::scenario::{bundle_state, preset_defaults, warped_state, InitialParams, Preset, PRESETS};
use symflow::warped::{curvature_warped, WarpedState};

fn torus_params() -> impl Strategy<Value = InitialParams> {
    (0.5f64..3.0, -0.4f64..0.4, 0.0f64..0.2, -0.3f64..0.3).prop_map(|(lambda, sigma, w_amp, u_amp)| InitialParams {
        lambda,
        sigma,
        w_amp,
        u_amp,
        ..Default::default()
    })
}

fn sphere_params() -> impl Strategy<Value = InitialParams> {
    (0.5f64..2.0, -0.2f64..0.2, -0.3f64..0.3).prop_map(|(radius, bump, u_amp)| InitialParams {
        radius,
        bump,
        u_amp,
        ..Default::default()
    })
}

fn bundle_params() -> impl Strategy<Value = (Preset, InitialParams)> {
    (
        prop::sample::select(vec![Preset::SolHyperbolic, Preset::FlatElliptic, Preset::NilParabolic]),
        0.0f64..0.2,
        0.0f64..0.1,
        0.0f64..0.2,
        0.0f64..0.1,
    )
        .prop_map(|(p, eps, delta, s_amp, det_amp)| {
            let mut init = preset_defaults(p).initial;
            init.eps = eps;
            init.delta = delta;
            init.s_amp = s_amp;
            init.det_amp = det_amp;
            (p, init)
        })
}

fn short(t_end: f64) -> StepController {
    StepController { cfl: 0.2, t_end, ..Default::default() }
}

fn mode() -> impl Strategy<Value = FlowMode> {
    prop::sample::select(vec![FlowMode::Modified, FlowMode::Unmodified])
}

fn power_of_two() -> impl Strategy<Value = f64> {
    (-3i32..=3).prop_map(|k| 2f64.powi(k))
}

/// Words in the generators `[[1,1],[0,1]]` and `[[1,0],[1,1]]` and their inverses.
fn sl2z() -> impl Strategy<Value = Holonomy> {
    prop::collection::vec(0usize..4, 0..8).prop_map(|word| {
        let gens = [
            Holonomy::new(1, 1, 0, 1).unwrap(),
            Holonomy::new(1, -1, 0, 1).unwrap(),
            Holonomy::new(1, 0, 1, 1).unwrap(),
            Holonomy::new(1, 0, -1, 1).unwrap(),
        ];
        word.iter().fold(Holonomy::identity(), |h, &i| h.compose(&gens[i]))
    })
}

fn max_rel_diff(a: &[f64], b: &[f64]) -> f64 {
    let peak = a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max) / peak.max(f64::MIN_POSITIVE)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, ..ProptestConfig::default() })]

    #[test]
    fn scalar_curvature_is_the_ricci_trace(p in torus_params(), q in sphere_params()) {
        let states = [warped_state(Preset::FlatTorusWarped, 16, &p).unwrap(), warped_state(Preset::SpherePerturbed, 32, &q).unwrap()];
        for s in &states {
            let c = curvature_warped(s).unwrap();
            let geo = s.geometry().unwrap();
            for k in 0..c.r_n.len() {
                let ginv = geo.metric[k].inverse().unwrap();
                let ric = &c.ricci[k];
                let trace = ginv.xx * ric.base.xx + 2.0 * ginv.xy * ric.base.xy + ginv.yy * ric.base.yy
                    + (-2.0 * s.u[k]).exp() * ric.theta_theta;
                prop_assert!((trace - c.r_n[k]).abs() <= 1e-10 * (1.0 + c.r_n[k].abs()));
            }
        }
    }

    #[test]
    fn curvature_norm_scales_by_s_squared(p in torus_params(), q in sphere_params(), s in power_of_two(), s_any in 0.1f64..10.0) {
        let torus = warped_state(Preset::FlatTorusWarped, 16, &p).unwrap();
        let sphere = warped_state(Preset::SpherePerturbed, 32, &q).unwrap();
        for (w, s) in [(&torus, s), (&sphere, s), (&sphere, s_any)] {
            let before: Vec<f64> = curvature_warped(w).unwrap().riem_norm_sq.iter().map(|v| s * s * v).collect();
            let after = curvature_warped(&w.rescale(s, RescaleKind::Warped2d).unwrap()).unwrap().riem_norm_sq;
            prop_assert!(max_rel_diff(&before, &after) < 1e-12);
        }
    }

    #[test]
    fn bundle_curvature_norm_scales_by_s_squared((p, init) in bundle_params(), s in power_of_two()) {
        let b = bundle_state(p, 32, &init).unwrap();
        let rm = |x: &BundleState| curvature_bundle(x).unwrap().iter().map(|c| c.riem_norm_sq).collect::<Vec<_>>();
        let before: Vec<f64> = rm(&b).iter().map(|v| s * s * v).collect();
        prop_assert!(max_rel_diff(&before, &rm(&b.rescale(s, RescaleKind::Bundle).unwrap())) < 1e-12);
    }

    #[test]
    fn warp_extrema_are_monotone(p in torus_params(), m in mode()) {
        let s = warped_state(Preset::FlatTorusWarped, 16, &p).unwrap();
        let traj = run(s, &short(0.05), m, &RunOptions::default()).unwrap();
        let range = {
            let r = &traj.records[0];
            r.u_max.unwrap() - r.u_min.unwrap()
        };
        let tol = 1e-10 * range.max(1e-300);
        for w in traj.records.windows(2) {
            prop_assert!(w[1].u_max.unwrap() <= w[0].u_max.unwrap() + tol);
            prop_assert!(w[1].u_min.unwrap() >= w[0].u_min.unwrap() - tol);
        }
    }

    #[test]
    fn fiber_determinant_extrema_are_monotone((p, init) in bundle_params(), m in mode()) {
        let s = bundle_state(p, 32, &init).unwrap();
        let ctl = StepController { t_end: init.t_start + 0.05, ..short(0.0) };
        let traj = run(s, &ctl, m, &RunOptions::default()).unwrap();
        let r0 = &traj.records[0];
        let tol = 1e-10 * (r0.det_g_max.unwrap() - r0.det_g_min.unwrap()).max(1e-2 * r0.det_g_max.unwrap());
        for w in traj.records.windows(2) {
            prop_assert!(w[1].det_g_max.unwrap() <= w[0].det_g_max.unwrap() + tol);
            prop_assert!(w[1].det_g_min.unwrap() >= w[0].det_g_min.unwrap() - tol);
        }
    }

    #[test]
    fn length_is_nondecreasing((p, init) in bundle_params()) {
        let s = bundle_state(p, 32, &init).unwrap();
        let ctl = StepController { t_end: init.t_start + 0.05, ..short(0.0) };
        let traj = run(s, &ctl, FlowMode::Modified, &RunOptions::default()).unwrap();
        for w in traj.records.windows(2) {
            prop_assert!(w[1].l.unwrap() >= w[0].l.unwrap() * (1.0 - 1e-12));
        }
    }

    #[test]
    fn holonomy_classification_matches_dynamics(h in sl2z()) {
        let [a, b, c, d] = h.entries();
        prop_assert_eq!(a * d - b * c, 1);
        let tr = h.trace().abs();
        match h.class() {
            HolonomyClass::Elliptic => prop_assert!(h.order().is_some()),
            HolonomyClass::Parabolic => {
                prop_assert_eq!(tr, 2);
                prop_assert!(h.order().is_none());
            }
            HolonomyClass::Hyperbolic => {
                prop_assert!(tr > 2);
                let m: Mat2 = h.as_mat2();
                let disc = (m.trace() * m.trace() - 4.0).sqrt();
                let lam = 0.5 * (m.trace().abs() + disc);
                prop_assert!(lam > 1.0 && (1.0 / lam) < 1.0);
            }
        }
        prop_assert_eq!(h.compose(&h.inverse()), Holonomy::identity());
    }

    #[test]
    fn config_text_round_trips(
        preset in prop::sample::select(PRESETS.to_vec()),
        n in 8usize..300,
        cfl in 0.01f64..0.99,
        t_end in 0.1f64..1e3,
        eps in -0.5f64..0.5,
        h in sl2z(),
        m in mode(),
    ) {
        let mut cfg = RunConfig::preset(preset);
        cfg.n = n;
        cfg.mode = m;
        cfg.controller.cfl = cfl;
        cfg.controller.t_end = t_end;
        cfg.initial.eps = eps;
        cfg.initial.holonomy = h;
        let text = cfg.to_text();
        let back = RunConfig::parse(&text).unwrap();
        prop_assert_eq!(&back, &cfg);
        prop_assert_eq!(back.to_text(), text);
    }
}

#[test]
fn identical_configs_give_bit_identical_trajectories() {
    for p in [Preset::SpherePerturbed, Preset::FlatTorusWarped, Preset::SolHyperbolic] {
        let mut d = preset_defaults(p);
        d.n = 16;
        d.controller.t_end = d.initial.t_start + 0.02;
        let go = || {
            let opts = RunOptions { snapshot_dt: 0.01, full_diagnostics: true };
            if p.is_bundle() {
                run(bundle_state(p, d.n, &d.initial).unwrap(), &d.controller, d.mode, &opts).unwrap().records
            } else {
                run(warped_state(p, d.n, &d.initial).unwrap(), &d.controller, d.mode, &opts).unwrap().records
            }
        };
        let (a, b) = (go(), go());
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(format!("{x:?}"), format!("{y:?}"));
        }
    }
}

#[test]
fn warped_states_survive_rescale_round_trip() {
    let s: WarpedState = warped_state(Preset::SpherePerturbed, 32, &preset_defaults(Preset::SpherePerturbed).initial).unwrap();
    let back = s.rescale(4.0, RescaleKind::Warped3d).unwrap().rescale(0.25, RescaleKind::Warped3d).unwrap();
    assert_eq!(back.time, s.time);
    assert!(back.u.iter().zip(&s.u).all(|(a, b)| (a - b).abs() < 1e-15));
}
