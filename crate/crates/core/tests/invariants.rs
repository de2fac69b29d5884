use horotorus::diophantine::{zeta, zeta_property_suite};
use horotorus::fundamental::{f_value, iota, reduce};
use horotorus::geometry::{
    diagonal_flow, horo_embed, torus_act, IntegerMatrix, SpecialLinearMatrix, SplittingSignature, TorusPoint,
};
use horotorus::lattice::{height, LatticeDescriptor};
use horotorus::measure::{ball_mass, fourier_coefficient};
use horotorus::orbit::EmpiricalTorusMeasure;
use nalgebra::DMatrix;
use proptest::prelude::*;

fn shear_word(d: usize, word: &[(usize, usize, bool)]) -> IntegerMatrix {
    let mut g = IntegerMatrix::identity(d);
    for &(i, j, up) in word {
        let (i, j) = (i % d, j % d);
        if i == j {
            continue;
        }
        let mut e = IntegerMatrix::identity(d).to_rows();
        e[i][j] = if up { 1 } else { -1 };
        g = g.mul(&IntegerMatrix::from_rows(&e).unwrap()).unwrap();
    }
    g
}

fn word() -> impl Strategy<Value = Vec<(usize, usize, bool)>> {
    prop::collection::vec((0usize..3, 0usize..3, any::<bool>()), 0..10)
}

fn planar(t: f64, x: f64) -> SpecialLinearMatrix {
    let sig = SplittingSignature::new(1, 1).unwrap();
    diagonal_flow(t, sig)
        .unwrap()
        .mul(&horo_embed(&DMatrix::from_element(1, 1, x), sig).unwrap())
        .unwrap()
}

fn rational_point() -> impl Strategy<Value = TorusPoint> {
    prop::collection::vec((0i64..50, 1i64..50), 2).prop_map(|v| TorusPoint::from_fractions(&v).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn reduction_is_a_class_function(t in 0.0f64..5.0, x in -3.0f64..3.0, w in word()) {
        let g = planar(t, x);
        let r = reduce(&g).unwrap();
        let gamma = shear_word(2, &w);
        let r2 = reduce(&g.mul_int(&gamma).unwrap()).unwrap();
        prop_assert!(r.rep.max_abs_diff(&r2.rep) < 1e-9);
        prop_assert!(r.certificate.certified);
        prop_assert!(r.fvalue <= f_value(&g) + 1e-12);
        prop_assert!(r.rep.mul_int(&r.gamma).unwrap().max_abs_diff(&g) < 1e-9 * r.fvalue.max(1.0));
        prop_assert!(r.gamma.is_in_gamma());
    }

    #[test]
    fn iota_is_idempotent(t in 0.0f64..5.0, x in -3.0f64..3.0) {
        let i1 = iota(&planar(t, x)).unwrap();
        prop_assert_eq!(iota(&i1).unwrap(), i1);
    }

    #[test]
    fn height_is_at_least_one(t in -4.0f64..4.0, x in -3.0f64..3.0) {
        prop_assert!(height(&LatticeDescriptor::new(planar(t, x))).unwrap() >= 1.0 - 1e-9);
    }

    #[test]
    fn torus_action_composes(b in rational_point(), w1 in word(), w2 in word()) {
        let g1 = shear_word(2, &w1);
        let g2 = shear_word(2, &w2);
        let lhs = torus_act(&g1.mul(&g2).unwrap(), &b).unwrap();
        let rhs = torus_act(&g1, &torus_act(&g2, &b).unwrap()).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn zeta_is_monotone_in_t(b in rational_point(), t in 1.0f64..1e5, c in 1.0f64..50.0) {
        prop_assert!(zeta(&b, t).unwrap() <= zeta(&b, c * t).unwrap());
    }

    #[test]
    fn zeta_rescaling_and_sandwich(b in rational_point(), t in 10.0f64..1e5, c in 1.01f64..100.0, w in word()) {
        let report = zeta_property_suite(&b, t, c, &shear_word(2, &w)).unwrap();
        prop_assert!(report.passed(), "{:?}", report);
    }

    #[test]
    fn fourier_coefficients_are_bounded(
        pts in prop::collection::vec(prop::collection::vec(0.0f64..1.0, 2), 1..60),
        m in prop::collection::vec(-5i64..=5, 2),
    ) {
        let points: Vec<TorusPoint> = pts.iter().map(|p| TorusPoint::float(p).unwrap()).collect();
        let nu = EmpiricalTorusMeasure::uniform(points).unwrap();
        let c = fourier_coefficient(&nu, &m).unwrap();
        prop_assert!(c.norm() <= 1.0 + 1e-12);
        let zero = fourier_coefficient(&nu, &[0, 0]).unwrap();
        prop_assert!((zero.re - 1.0).abs() < 1e-12 && zero.im.abs() < 1e-12);
    }

    #[test]
    fn ball_mass_is_monotone(
        pts in prop::collection::vec(prop::collection::vec(0.0f64..1.0, 2), 1..60),
        center in prop::collection::vec(0.0f64..1.0, 2),
        r1 in 1e-3f64..0.49, r2 in 1e-3f64..0.49,
    ) {
        let points: Vec<TorusPoint> = pts.iter().map(|p| TorusPoint::float(p).unwrap()).collect();
        let nu = EmpiricalTorusMeasure::uniform(points).unwrap();
        let p = TorusPoint::float(&center).unwrap();
        let (lo, hi) = if r1 <= r2 { (r1, r2) } else { (r2, r1) };
        prop_assert!(ball_mass(&nu, &p, lo).unwrap() <= ball_mass(&nu, &p, hi).unwrap() + 1e-15);
        prop_assert!(ball_mass(&nu, &p, hi).unwrap() <= 1.0 + 1e-12);
    }
}
