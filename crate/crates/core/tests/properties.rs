use num_complex::Complex64 as C64;
use proptest::prelude::*;
use std::sync::{Arc, OnceLock};

use teichlab::bers::{aw_section, LaurentSeries};
use teichlab::circle::CircleMapLift;
use teichlab::fields::{
    lp_norm_hyperbolic, sup_norm_weighted, BeltramiField, DiskGrid, GridSpec, HolomorphicField,
};
use teichlab::moebius::{density, Domain, MobiusMap};
use teichlab::rigidity::terms_for;
use teichlab::wp::subdivision::steps_for;
use teichlab::wp::{c_p, teich_distance};

fn grid() -> Arc<DiskGrid> {
    static G: OnceLock<Arc<DiskGrid>> = OnceLock::new();
    G.get_or_init(|| Arc::new(GridSpec::default().with_angles(32).build().unwrap()))
        .clone()
}

fn tiny() -> Arc<DiskGrid> {
    static G: OnceLock<Arc<DiskGrid>> = OnceLock::new();
    G.get_or_init(|| {
        Arc::new(
            GridSpec::default()
                .with_cutoff(4)
                .with_angles(8)
                .build()
                .unwrap(),
        )
    })
    .clone()
}

fn disk_point() -> impl Strategy<Value = C64> {
    (0.0..0.95f64, 0.0..std::f64::consts::TAU).prop_map(|(r, t)| C64::from_polar(r, t))
}

fn coeffs() -> impl Strategy<Value = Vec<C64>> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 5).prop_map(|v| {
        let mut c = vec![C64::new(0.0, 0.0); 4];
        c.extend(v.into_iter().map(|(a, b)| C64::new(a, b)));
        c
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn disk_automorphisms_are_isometries(theta in 0.0..6.28f64, p in disk_point(), z in disk_point()) {
        let m = MobiusMap::disk_automorphism(theta, p, Domain::Disk).unwrap();
        let w = m.apply(z);
        prop_assert!(w.norm() < 1.0);
        let lhs = density(Domain::Disk, w).unwrap() * m.derivative(z).norm();
        let rhs = density(Domain::Disk, z).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-9 * rhs);
        let back = m.inverse().apply(w);
        prop_assert!((back - z).norm() < 1e-10);
    }

    #[test]
    fn teichmuller_distance_is_a_metric(
        a in disk_point(), b in disk_point(), c in disk_point()
    ) {
        let g = tiny();
        let f = |k: C64| BeltramiField::constant(g.clone(), k * 0.9).unwrap();
        let (x, y, z) = (f(a), f(b), f(c));
        let xy = teich_distance(&x, &y).unwrap();
        prop_assert!((xy - teich_distance(&y, &x).unwrap()).abs() < 1e-10);
        prop_assert!(xy <= teich_distance(&x, &z).unwrap() + teich_distance(&z, &y).unwrap() + 1e-10);
        prop_assert_eq!(teich_distance(&x, &x).unwrap(), 0.0);
    }

    #[test]
    fn subdivision_count_exceeds_threshold(k in 0.0..0.99f64, d in 0.01..0.25f64) {
        let (n, th) = steps_for(k, d);
        prop_assert!(n as f64 > th);
        prop_assert!(n == 1 || (n - 1) as f64 <= th);
    }

    #[test]
    fn orbit_length_is_minimal(lambda in 0.05..0.9f64, alpha in 0.1..0.99f64, e in 2..12i32) {
        let tol = 10f64.powi(-e);
        let q = lambda.powf(alpha);
        let n = terms_for(lambda, alpha, tol);
        prop_assert!(q.powi(n as i32 + 1) / (1.0 - q) < tol);
        if n > 0 {
            prop_assert!(q.powi(n as i32) / (1.0 - q) >= tol * (1.0 - 1e-12));
        }
    }

    #[test]
    fn sup_is_controlled_by_lp(c in coeffs(), p in prop::sample::select(vec![2.0, 3.0, 4.0])) {
        let phi = HolomorphicField::from_laurent(grid(), LaurentSeries::plain(c));
        let sup = sup_norm_weighted(&phi, -2.0).unwrap().value;
        let lp = lp_norm_hyperbolic(&phi, p).unwrap().value;
        prop_assert!(sup <= c_p(p) * lp * 1.01, "{} {}", sup, c_p(p) * lp);
    }

    #[test]
    fn aw_section_is_linear(c in coeffs(), t in 0.1..1.0f64) {
        let phi = HolomorphicField::from_laurent(grid(), LaurentSeries::plain(c));
        let s = sup_norm_weighted(&phi, -2.0).unwrap().value;
        let unit = phi.scaled(C64::new(0.2 / s, 0.0));
        let a = aw_section(&unit).unwrap();
        let b = aw_section(&unit.scaled(C64::new(t, 0.0))).unwrap();
        for (x, y) in a.values().iter().zip(b.values()) {
            prop_assert!((x * t - y).norm() < 1e-12);
        }
        prop_assert!(a.sup() <= 2.0 * 0.2 + 1e-9);
    }

    #[test]
    fn circle_lift_inverse(a in -0.9..0.9f64, n in 1u32..4, x in 0.0..1.0f64) {
        let g = CircleMapLift::sine(a, n).unwrap();
        let y = g.eval(x);
        prop_assert!((g.inverse(y) - x).abs() < 1e-10);
        prop_assert!((g.eval(x + 1.0) - y - 1.0).abs() < 1e-12);
    }
}
