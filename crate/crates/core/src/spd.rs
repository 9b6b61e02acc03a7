//! Geometry of the cone P(2,ℝ) of positive-definite symmetric 2×2 matrices
//! with the metric ⟨δ₁G, δ₂G⟩ = ½Tr(G⁻¹δ₁G G⁻¹δ₂G).

use serde::Serialize;

use crate::error::{FlowError, Result};
use crate::holonomy::{classify_real, Holonomy, HolonomyClass};
use crate::mat2::{Mat2, Sym2};

pub const SPD_TOL: f64 = 1e-12;

fn check_spd(g: &Sym2) -> Result<()> {
    if g.is_positive_definite(SPD_TOL) {
        Ok(())
    } else {
        Err(FlowError::NotSpd)
    }
}

pub fn spd_inner(g: &Sym2, da: &Sym2, db: &Sym2) -> Result<f64> {
    check_spd(g)?;
    let gi = g.inverse().ok_or(FlowError::NotSpd)?.to_mat();
    let p = gi * da.to_mat() * gi * db.to_mat();
    Ok(0.5 * p.trace())
}

/// `G^{s}` for real `s` via the eigen-decomposition.
pub fn spd_power(g: &Sym2, s: f64) -> Result<Sym2> {
    check_spd(g)?;
    Ok(g.map_eigen(|l| l.powf(s)))
}

/// Geodesic distance `sqrt(½ Σ ln²λᵢ)`, λᵢ the eigenvalues of `A⁻¹B`.
pub fn spd_distance(a: &Sym2, b: &Sym2) -> Result<f64> {
    check_spd(a)?;
    check_spd(b)?;
    let w = a.map_eigen(|l| 1.0 / l.sqrt());
    let c = b.congruence(&w.to_mat());
    let e = c.eigen();
    if e.lo <= 0.0 {
        return Err(FlowError::NotSpd);
    }
    let (l1, l2) = (e.hi.ln(), e.lo.ln());
    Ok((0.5 * (l1 * l1 + l2 * l2)).sqrt())
}

pub fn sym_log(a: &Sym2) -> Result<Sym2> {
    check_spd(a)?;
    Ok(a.map_eigen(f64::ln))
}

pub fn sym_exp(x: &Sym2) -> Sym2 {
    x.map_eigen(f64::exp)
}

/// Point at parameter `s` on the geodesic from `a` (s = 0) to `b` (s = 1).
pub fn spd_geodesic(a: &Sym2, b: &Sym2, s: f64) -> Result<Sym2> {
    check_spd(a)?;
    check_spd(b)?;
    let half = a.map_eigen(f64::sqrt);
    let inv_half = a.map_eigen(|l| 1.0 / l.sqrt());
    let y = sym_log(&b.congruence(&inv_half.to_mat()))?;
    Ok(sym_exp(&y.scale(s)).congruence(&half.to_mat()))
}

/// `e^u MᵀM`, the splitting of P(2,ℝ) as ℝ × SL(2,ℝ)/SO(2).
pub fn phi_map(u: f64, m: &Mat2) -> Result<Sym2> {
    let det = m.det();
    if (det - 1.0).abs() > 1e-12 * m.max_abs().max(1.0).powi(2) {
        return Err(FlowError::DeterminantNotOne(det));
    }
    Ok(Sym2::IDENTITY.congruence(m).scale(u.exp()))
}

/// Limit data of the Sol attractor for hyperbolic gluing.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct SolLimit {
    /// Symmetric `X` with `e^X = HᵀH`.
    pub x: Sym2,
    /// `½Tr(X²)`.
    pub slope: f64,
    /// `c` with `H` having eigenvalues `±e^{±c}`.
    pub c: f64,
    /// `4c²`, which is invariant under conjugation of `H`.
    pub slope_conjugation_invariant: f64,
}

pub fn sol_limit_data(h: &Holonomy) -> Result<SolLimit> {
    if h.class() != HolonomyClass::Hyperbolic {
        return Err(FlowError::NotHyperbolic);
    }
    sol_limit_data_real(&h.as_mat2())
}

/// Same as [`sol_limit_data`] for a real gluing matrix of determinant 1.
pub fn sol_limit_data_real(h: &Mat2) -> Result<SolLimit> {
    if (h.det() - 1.0).abs() > 1e-10 {
        return Err(FlowError::DeterminantNotOne(h.det()));
    }
    if classify_real(h) != HolonomyClass::Hyperbolic {
        return Err(FlowError::NotHyperbolic);
    }
    let hth = Sym2::IDENTITY.congruence(h);
    let x = sym_log(&hth)?;
    let slope = 0.5 * x.to_mat().trace_sq();
    let c = (0.5 * h.trace().abs()).acosh();
    Ok(SolLimit { x, slope, c, slope_conjugation_invariant: 4.0 * c * c })
}

/// Translation length of `G ↦ HᵀGH` on P(2,ℝ); equals `2c` for hyperbolic `H`.
pub fn translation_length(h: &Mat2) -> f64 {
    2.0 * (0.5 * h.trace().abs()).max(1.0).acosh()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn spd_strategy() -> impl Strategy<Value = Sym2> {
        (-2.0f64..2.0, -2.0f64..2.0, -3.0f64..3.0).prop_map(|(a, b, th)| {
            let (s, c) = th.sin_cos();
            let r = Mat2::new(c, -s, s, c);
            Sym2::diag(a.exp(), b.exp()).congruence(&r.transpose())
        })
    }

    fn mat_strategy() -> impl Strategy<Value = Mat2> {
        (-2.0f64..2.0, -2.0f64..2.0, -2.0f64..2.0, -2.0f64..2.0)
            .prop_map(|(a, b, c, d)| Mat2::new(a, b, c, d))
            .prop_filter("invertible", |m| m.det().abs() > 0.1)
    }

    #[test]
    fn inner_product_examples() {
        let i = Sym2::IDENTITY;
        assert_relative_eq!(spd_inner(&i, &i, &i).unwrap(), 1.0);
        let d = Sym2::diag(1.0, -1.0);
        assert_relative_eq!(spd_inner(&i, &d, &d).unwrap(), 1.0);
        assert!(spd_inner(&Sym2::diag(1.0, -1.0), &d, &d).is_err());
    }

    #[test]
    fn distance_examples() {
        let i = Sym2::IDENTITY;
        let b = Sym2::diag(2f64.exp(), (-2f64).exp());
        assert_relative_eq!(spd_distance(&i, &b).unwrap(), 2.0, epsilon = 1e-14);
        assert!(spd_distance(&b, &b).unwrap() < 1e-14);
    }

    #[test]
    fn log_exp_examples() {
        assert_eq!(sym_log(&Sym2::IDENTITY).unwrap().max_abs(), 0.0);
        let e = sym_exp(&Sym2::diag(2.0, -2.0));
        assert_relative_eq!(e.xx, 2f64.exp(), max_relative = 1e-15);
        assert_relative_eq!(e.yy, (-2f64).exp(), max_relative = 1e-15);
        assert_eq!(e.xy, 0.0);
    }

    #[test]
    fn sol_limit_for_cat_map() {
        let h = Holonomy::new(2, 1, 1, 1).unwrap();
        let lim = sol_limit_data(&h).unwrap();
        // independent oracle: eigenvalues (7 ± 3√5)/2 of HᵀH
        let lam = (7.0 + 3.0 * 5f64.sqrt()) / 2.0;
        let tr_x2 = 2.0 * lam.ln().powi(2);
        assert_relative_eq!(lam.ln(), 1.924847300238, epsilon = 1e-11);
        assert_relative_eq!(tr_x2, 7.410074258, epsilon = 1e-8);
        assert_relative_eq!(tr_x2, 7.41010, epsilon = 5e-5);
        assert_relative_eq!(lim.slope, 0.5 * tr_x2, max_relative = 1e-13);
        assert_relative_eq!(lim.slope, 3.70505, epsilon = 2e-5);
        assert_relative_eq!(lim.c, 0.962424, epsilon = 1e-6);
        assert_relative_eq!(lim.slope_conjugation_invariant, lim.slope, max_relative = 1e-12);
        let back = sym_exp(&lim.x);
        let hth = Sym2::IDENTITY.congruence(&h.as_mat2());
        assert!((back - hth).max_abs() < 1e-10);
    }

    #[test]
    fn sol_limit_diagonal_case() {
        let h = Mat2::diag(1f64.exp(), (-1f64).exp());
        let lim = sol_limit_data_real(&h).unwrap();
        assert!((lim.x - Sym2::diag(2.0, -2.0)).max_abs() < 1e-14);
        assert_relative_eq!(lim.slope, 4.0, max_relative = 1e-14);
        assert_relative_eq!(lim.c, 1.0, max_relative = 1e-14);
    }

    #[test]
    fn sol_limit_rejects_non_hyperbolic() {
        for e in [[1, 1, 0, 1], [0, -1, 1, 0], [1, 0, 0, 1]] {
            let h = Holonomy::try_from(e).unwrap();
            assert!(matches!(sol_limit_data(&h), Err(FlowError::NotHyperbolic)));
        }
    }

    #[test]
    fn conjugation_invariant_slope() {
        let h = Holonomy::new(2, 1, 1, 1).unwrap();
        let base = sol_limit_data(&h).unwrap().slope_conjugation_invariant;
        for m in [Holonomy::new(1, 2, 0, 1).unwrap(), Holonomy::new(0, -1, 1, 0).unwrap()] {
            let conj = m.inverse().compose(&h).compose(&m);
            let lim = sol_limit_data(&conj).unwrap();
            assert_relative_eq!(lim.slope_conjugation_invariant, base, max_relative = 1e-12);
        }
        // the trace-based slope ½Tr(X²) is not preserved by a non-symmetric conjugate
        let m = Holonomy::new(1, 2, 0, 1).unwrap();
        let conj = m.inverse().compose(&h).compose(&m);
        assert!(sol_limit_data(&conj).unwrap().slope > base + 0.1);
    }

    #[test]
    fn phi_map_examples() {
        assert_eq!(phi_map(0.0, &Mat2::IDENTITY).unwrap(), Sym2::IDENTITY);
        let g = phi_map(0.0, &Mat2::new(2.0, 1.0, 1.0, 1.0)).unwrap();
        assert_eq!(g, Sym2::new(5.0, 3.0, 2.0));
        assert!(phi_map(0.0, &Mat2::new(2.0, 0.0, 0.0, 1.0)).is_err());
    }

    #[test]
    fn translation_length_bounds_displacement() {
        let h = Mat2::new(2.0, 1.0, 1.0, 1.0);
        let c = translation_length(&h);
        assert_relative_eq!(c, 2.0 * 0.962424, epsilon = 1e-5);
        let axis = Sym2::IDENTITY;
        assert_relative_eq!(spd_distance(&axis, &axis.congruence(&h)).unwrap(), c, max_relative = 1e-12);
    }

    proptest! {
        #[test]
        fn inner_product_congruence_invariance(g in spd_strategy(), a in mat_strategy(),
                                               p in -1.0f64..1.0, q in -1.0f64..1.0, r in -1.0f64..1.0) {
            let da = Sym2::new(p, q, r);
            let db = Sym2::new(q, r, p);
            let lhs = spd_inner(&g.congruence(&a), &da.congruence(&a), &db.congruence(&a)).unwrap();
            let rhs = spd_inner(&g, &da, &db).unwrap();
            prop_assert!((lhs - rhs).abs() < 1e-9 * (1.0 + rhs.abs()));
        }

        #[test]
        fn inner_product_positive(g in spd_strategy(), p in -1.0f64..1.0, q in -1.0f64..1.0, r in -1.0f64..1.0) {
            let d = Sym2::new(p, q, r);
            prop_assume!(d.max_abs() > 1e-3);
            prop_assert!(spd_inner(&g, &d, &d).unwrap() > 0.0);
        }

        #[test]
        fn distance_congruence_invariance(a in spd_strategy(), b in spd_strategy(), m in mat_strategy()) {
            let d0 = spd_distance(&a, &b).unwrap();
            let d1 = spd_distance(&a.congruence(&m), &b.congruence(&m)).unwrap();
            prop_assert!((d0 - d1).abs() < 1e-8 * (1.0 + d0));
        }

        #[test]
        fn distance_triangle_inequality(a in spd_strategy(), b in spd_strategy(), c in spd_strategy()) {
            let ab = spd_distance(&a, &b).unwrap();
            let bc = spd_distance(&b, &c).unwrap();
            let ac = spd_distance(&a, &c).unwrap();
            prop_assert!(ac <= ab + bc + 1e-10);
        }

        #[test]
        fn log_exp_round_trip(a in spd_strategy()) {
            let back = sym_exp(&sym_log(&a).unwrap());
            prop_assert!((back - a).max_abs() < 1e-12 * a.max_abs().max(1.0));
        }

        #[test]
        fn phi_map_determinant(u in -2.0f64..2.0, th in -3.0f64..3.0, k in -1.5f64..1.5, s in -2.0f64..2.0) {
            let (sn, cs) = th.sin_cos();
            let m = Mat2::new(cs, -sn, sn, cs) * Mat2::diag(k.exp(), (-k).exp()) * Mat2::new(1.0, s, 0.0, 1.0);
            let g = phi_map(u, &m).unwrap();
            prop_assert!((g.det() - (2.0 * u).exp()).abs() < 1e-9 * (2.0 * u).exp());
        }

        #[test]
        fn hyperbolic_displacement_bounded_below(g in spd_strategy()) {
            let h = Mat2::new(2.0, 1.0, 1.0, 1.0);
            let d = spd_distance(&g, &g.congruence(&h)).unwrap();
            prop_assert!(d >= translation_length(&h) - 1e-9);
        }

        #[test]
        fn geodesic_endpoints(a in spd_strategy(), b in spd_strategy(), s in 0.0f64..1.0) {
            let g0 = spd_geodesic(&a, &b, 0.0).unwrap();
            let g1 = spd_geodesic(&a, &b, 1.0).unwrap();
            prop_assert!((g0 - a).max_abs() < 1e-10 * a.max_abs());
            prop_assert!((g1 - b).max_abs() < 1e-9 * b.max_abs());
            let d = spd_distance(&a, &b).unwrap();
            let mid = spd_geodesic(&a, &b, s).unwrap();
            prop_assert!((spd_distance(&a, &mid).unwrap() - s * d).abs() < 1e-8 * (1.0 + d));
        }
    }
}
