//! Property tests for the invariants of every module.

use embedconst_core::constants::{f_constant, s_constant, s_constant_pq};
use embedconst_core::interpolation::{assemble, c_pq, endpoints, m0, weak_sup_factor};
use embedconst_core::kernel::{
    cutoff_s, green_kernel_upper, kalpha_norms, kalpha_norms_quadrature, outer_sup_bound, CutoffSchedule,
    GreenKernelParams, RadialVolumeModel,
};
use embedconst_core::report::{Cell, ResultTable};
use embedconst_core::series::{mt_scaling_divergence, s_majorant_logs};
use embedconst_core::ExponentPair;
use proptest::prelude::*;

fn pair() -> impl Strategy<Value = ExponentPair> {
    (1.05f64..16.0, 0.05f64..0.95, 1u32..=6)
        .prop_map(|(p, frac, d)| ExponentPair::new(p, frac * d as f64 / p, d).unwrap())
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

proptest! {
    #[test]
    fn dual_is_an_involution(pr in pair()) {
        prop_assert_eq!(pr.dual().dual(), pr);
        prop_assert!(pr.dual().scaling_residual() < 1e-12);
    }

    #[test]
    fn s_and_f_are_dual_symmetric(pr in pair()) {
        let du = pr.dual();
        prop_assert!(rel(s_constant(&pr), s_constant(&du)) < 1e-12);
        let f = f_constant(pr.p(), pr.q()).unwrap();
        prop_assert!(rel(f, f_constant(du.p(), du.q()).unwrap()) < 1e-12);
    }

    #[test]
    fn interpolation_identities(pr in pair()) {
        let m = assemble(&pr).unwrap();
        let (rp, rq) = m.convexity_residuals();
        prop_assert!(rp < 1e-10 && rq < 1e-10);
        prop_assert!(m.theta > 0.0 && m.theta < 1.0);
        for b in m.proof_bounds() {
            prop_assert!(b.holds(), "{}: {} > {}", b.name, b.value, b.bound);
        }
        // reduced form of M0
        let q = pr.q();
        let y = pr.alpha_ratio() * (q + 1.0);
        let reduced = q * (y + 1.0 + 1.0 / q).powf(1.0 + y) * (1.0 + y).powf(-(1.0 + y)) + c_pq(pr.p(), q);
        prop_assert!(rel(m0(&pr, &endpoints(&pr).unwrap()).unwrap(), reduced) < 1e-9);
    }

    #[test]
    fn weak_sup_is_one(p in 1.05f64..20.0, gap in 0.01f64..50.0) {
        let v = weak_sup_factor(p, p + gap).unwrap();
        prop_assert!((1.0 - 1e-6..=1.0 + 1e-12).contains(&v));
    }

    #[test]
    fn cutoff_bounded_and_empties_level_set(p in 1.05f64..8.0, frac in 0.05f64..0.95, d in 1u32..5, lt in -12.0f64..12.0) {
        let t = lt.exp();
        let alpha = frac * d as f64 / p;
        let i = CutoffSchedule::integrable(p, alpha, d).unwrap();
        let e = CutoffSchedule::endpoint(alpha, d).unwrap();
        prop_assert!(cutoff_s(t, &i) <= 1.0 && cutoff_s(t, &e) <= 1.0);
        let b = outer_sup_bound(t, &i);
        prop_assert!(b <= 0.5 * t * (1.0 + 1e-9));
        prop_assert!(outer_sup_bound(t, &e) <= t * (1.0 + 1e-12));
    }

    #[test]
    fn kalpha_closed_form_matches_quadrature(d in 1u32..5, frac in 0.05f64..0.95, s in 0.01f64..1.0, r in 1.0f64..6.0, c in 0.2f64..5.0) {
        let alpha = frac * d as f64;
        let e = (alpha - d as f64) * r + d as f64;
        prop_assume!(e.abs() > 1e-3);
        let m = RadialVolumeModel { d, growth_rate: 0.0, c_local: c };
        let a = kalpha_norms(alpha, d, s, r, &m).unwrap();
        let b = kalpha_norms_quadrature(alpha, d, s, r, &m).unwrap();
        prop_assert!(rel(a.l1_inner, b.l1_inner) < 1e-8);
        prop_assert!(rel(a.lr_outer_pow, b.lr_outer_pow) < 1e-8);
    }

    #[test]
    fn envelope_decreasing(frac in 0.05f64..0.95, d in 1u32..5, lr in -8.0f64..2.5, a in 1.0f64..5.0) {
        let kp = GreenKernelParams::new(frac * d as f64, d, a, 1.0).unwrap();
        let r = lr.exp();
        let g = green_kernel_upper(r, &kp).unwrap();
        prop_assert!(green_kernel_upper(r * 1.1, &kp).unwrap() < g);
        let kp2 = GreenKernelParams { a: a * 1.5, ..kp };
        prop_assert!(green_kernel_upper(r, &kp2).unwrap() < g);
    }

    #[test]
    fn scaling_divergence_ordered(p in 1.05f64..6.0, gamma in 0.01f64..3.0, sigma in 1.0f64..5.0,
                                  moments in proptest::collection::vec(prop_oneof![Just(0.0), 0.0f64..10.0], 1..12)) {
        let s = mt_scaling_divergence(p, gamma, &moments, sigma).unwrap();
        prop_assert!(s.lhs >= s.rhs);
    }

    #[test]
    fn s_majorant(p in 1.05f64..10.0, k in 1u32..200) {
        prop_assume!(k as f64 >= p - 1.0);
        let (l, r) = s_majorant_logs(p, k).unwrap();
        prop_assert!(l <= r + 1e-12 * r.abs().max(1.0));
    }

    #[test]
    fn s_is_monotone_bounded(p in 1.05f64..10.0, extra in 0.0f64..40.0) {
        let s = s_constant_pq(p, p + extra).unwrap();
        prop_assert!(s.is_finite() && s > 0.0);
    }

    #[test]
    fn csv_round_trip(vals in proptest::collection::vec(-1e300f64..1e300, 0..20)) {
        let mut t = ResultTable::new("rt", &["i", "x"]);
        for (i, v) in vals.iter().enumerate() {
            t.push(vec![Cell::from(i), Cell::Num(*v)]);
        }
        let back = ResultTable::from_csv("rt", &t.to_csv()).unwrap();
        prop_assert_eq!(back.rows.len(), vals.len());
        for (row, v) in back.rows.iter().zip(&vals) {
            let x = row[1].as_f64().unwrap();
            prop_assert!((x - v).abs() <= 5e-12 * v.abs());
        }
        prop_assert_eq!(back.to_csv(), t.to_csv());
    }
}
