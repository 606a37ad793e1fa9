use std::f64::consts::PI;

use nalgebra::{Matrix6, Vector3, Vector6};
use num_complex::Complex64;
use proptest::prelude::*;

use cordspec::cords::{common_perpendicular, cord_of_element, lift_to_chord};
use cordspec::cylinder::{find_epsilon0, CylMetric};
use cordspec::flow::{frame, integrate_flow, omega, sasaki_metric, sasakian_j, CotangentState};
use cordspec::group::{
    apply_h3, double_coset_canonical, horoball_distance, image_horoball, GroupPresentation, Horoball, Moebius,
};
use cordspec::hyperbolic::{busemann, distance, geodesic_point, PointH3};
use cordspec::torus::{act, build_polygon, phi, tau_k};
use cordspec::triangle::{arcs_from_sides, hexagon_area};

fn fig8() -> GroupPresentation {
    GroupPresentation::from_json(cordspec::FIGURE_EIGHT_JSON).unwrap().normalized().unwrap()
}

fn point() -> impl Strategy<Value = PointH3> {
    (-3.0..3.0f64, -3.0..3.0f64, -2.0..2.0f64).prop_map(|(x, y, lz)| PointH3::new(x, y, lz.exp()).unwrap())
}

fn complex() -> impl Strategy<Value = Complex64> {
    (-2.0..2.0f64, -2.0..2.0f64).prop_map(|(a, b)| Complex64::new(a, b))
}

fn moebius() -> impl Strategy<Value = Moebius> {
    (complex(), complex(), complex()).prop_filter_map("singular", |(a, b, c)| {
        // pick d so that ad − bc = 1
        if a.norm() < 0.2 {
            return None;
        }
        let d = (Complex64::new(1.0, 0.0) + b * c) / a;
        Some(Moebius::new(a, b, c, d))
    })
}

fn word(len: usize) -> impl Strategy<Value = Vec<(usize, bool)>> {
    prop::collection::vec((0..2usize, any::<bool>()), 1..len)
}

fn eval(rep: &GroupPresentation, w: &[(usize, bool)]) -> Moebius {
    w.iter().fold(Moebius::identity(), |acc, &(g, inv)| {
        let m = &rep.generators[g];
        acc.mul(&if inv { m.inverse() } else { m.clone() })
    })
}

fn state() -> impl Strategy<Value = CotangentState> {
    (point(), -1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64)
        .prop_map(|(q, a, b, c)| CotangentState::new(q.x, q.y, q.z, a / q.z, b / q.z, c / q.z).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn generators_are_isometries(p in point(), q in point(), g in 0..2usize, inv in any::<bool>()) {
        let rep = fig8();
        let m = if inv { rep.generators[g].inverse() } else { rep.generators[g].clone() };
        let d0 = distance(&p, &q);
        let d1 = distance(&apply_h3(&m, &p), &apply_h3(&m, &q));
        prop_assert!((d0 - d1).abs() <= 1e-9 * d0.max(1.0));
    }

    #[test]
    fn busemann_is_horizontal_translation_invariant(p in point(), dx in -5.0..5.0f64, dy in -5.0..5.0f64) {
        let t = PointH3::new(p.x + dx, p.y + dy, p.z).unwrap();
        prop_assert_eq!(busemann(&t), busemann(&p));
    }

    #[test]
    fn action_is_a_homomorphism(g in moebius(), h in moebius(), q in point()) {
        let a = apply_h3(&g.mul(&h), &q);
        let b = apply_h3(&g, &apply_h3(&h, &q));
        prop_assert!((a.vec() - b.vec()).norm() <= 1e-9 * (1.0 + a.vec().norm()), "{:?} {:?}", a, b);
    }

    #[test]
    fn horoball_images_compose(g in moebius(), h in moebius(), size in 0.5..3.0f64) {
        let b = Horoball::at_infinity(size);
        let lhs = image_horoball(&g.mul(&h), &b);
        let rhs = image_horoball(&g, &image_horoball(&h, &b));
        prop_assert!(lhs.center.approx_eq(&rhs.center, 1e-8));
        prop_assert!((lhs.size - rhs.size).abs() <= 1e-8 * lhs.size.max(1.0));
    }

    #[test]
    fn canonical_form_keeps_c(w in word(7), i in -3i64..3, j in -3i64..3, k in -3i64..3, l in -3i64..3) {
        let rep = fig8();
        let g = eval(&rep, &w);
        prop_assume!(g.c.norm() > 1e-9);
        let h = rep.peripheral(i, j).mul(&g).mul(&rep.peripheral(k, l));
        let cg = double_coset_canonical(&g, &rep).unwrap();
        let ch = double_coset_canonical(&h, &rep).unwrap();
        prop_assert!((cg.c.norm() - g.c.norm()).abs() <= 1e-9 * g.c.norm());
        prop_assert!(cg.approx_eq(&ch, 1e-7));
    }

    #[test]
    fn inverse_class_has_equal_length(w in word(7)) {
        let rep = fig8();
        let g = eval(&rep, &w);
        prop_assume!(g.c.norm() > 1e-9);
        let a = cord_of_element(&g, 2.0).unwrap();
        let b = cord_of_element(&g.inverse(), 2.0).unwrap();
        prop_assert!((a.length - b.length).abs() <= 1e-10);
    }

    #[test]
    fn cord_profile_solves_its_ode(c0 in complex(), d0 in 0.1..1.0f64, c1 in complex(), d1 in 0.1..1.0f64) {
        prop_assume!((c0 - c1).norm() > 1.2 * (d0 + d1) / 2.0);
        let cord = common_perpendicular(&Horoball::finite(c0, d0), &Horoball::finite(c1, d1)).unwrap();
        let l = cord.length;
        let h = 1e-3;
        for k in 1..20 {
            let t = k as f64 / 20.0;
            let f = |t: f64| 1.0 / cord.point(t).z;
            let f2 = (f(t + h) - 2.0 * f(t) + f(t - h)) / (h * h);
            prop_assert!((f2 - l * l * f(t)).abs() <= 1e-4 * (1.0 + l * l * f(t)));
        }
        prop_assert!(cord.profile_residual(100) <= 1e-8 * cord.profile.0.max(1.0));
        prop_assert!((horoball_distance(&cord.from, &cord.to).unwrap() - l).abs() <= 1e-9);
    }

    #[test]
    fn chord_projects_back_to_cord(c0 in complex(), d0 in 0.1..1.0f64, h in 1.0..3.0f64) {
        prop_assume!(d0 < h);
        let cord = common_perpendicular(&Horoball::at_infinity(h), &Horoball::finite(c0, d0)).unwrap();
        let chord = lift_to_chord(&cord);
        for k in 0..=10 {
            let t = k as f64 / 10.0;
            prop_assert!((chord.project(t).vec() - cord.point(t).vec()).norm() <= 1e-9);
        }
    }

    #[test]
    fn geodesics_have_unit_speed(p in point(), v in (-1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64), t in 0.0..4.0f64) {
        let v = Vector3::new(v.0, v.1, v.2);
        prop_assume!(v.norm() > 1e-3);
        let r = geodesic_point(&p, &v, t).unwrap();
        prop_assert!((distance(&p, &r) - t).abs() <= 1e-8 * t.max(1.0));
    }

    #[test]
    fn sasaki_metric_in_the_frame(s in state(), x in prop::array::uniform6(-1.0..1.0f64), y in prop::array::uniform6(-1.0..1.0f64)) {
        let g = sasaki_metric(&s);
        let (x, y) = (Vector6::from(x), Vector6::from(y));
        let lhs = (x.transpose() * g * y)[(0, 0)];
        let rhs = (x.transpose() * omega() * (sasakian_j(&s) * y))[(0, 0)];
        prop_assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + lhs.abs()));
        // independent oracle: the horizontal and vertical frames are orthogonal
        // with squared lengths 1/z² and z²
        let f = frame(&s);
        let z2 = s.q.z * s.q.z;
        for i in 0..3 {
            for j in 0..3 {
                let hh = (f.horizontal(i).transpose() * g * f.horizontal(j))[(0, 0)];
                let vv = (f.vertical(i).transpose() * g * f.vertical(j))[(0, 0)];
                let hv = (f.horizontal(i).transpose() * g * f.vertical(j))[(0, 0)];
                let d = if i == j { 1.0 } else { 0.0 };
                prop_assert!((hh - d / z2).abs() <= 1e-10 / z2);
                prop_assert!((vv - d * z2).abs() <= 1e-10 * z2);
                prop_assert!(hv.abs() <= 1e-10);
            }
        }
    }

    #[test]
    fn flow_preserves_omega(s in state(), x in prop::array::uniform6(-1.0..1.0f64), y in prop::array::uniform6(-1.0..1.0f64)) {
        let dt = 1e-2;
        let step = |v: &Vector6<f64>| integrate_flow(&CotangentState::from_flat(v).unwrap(), dt, dt).unwrap().flat();
        let y0 = s.flat();
        // scale perturbations to the state so the Jacobian is well resolved
        let scale = Vector6::new(s.q.z, s.q.z, s.q.z, 1.0 / s.q.z, 1.0 / s.q.z, 1.0 / s.q.z);
        let mut jac = Matrix6::zeros();
        for k in 0..6 {
            let mut e = Vector6::zeros();
            e[k] = 1e-6 * scale[k];
            let col = (step(&(y0 + e)) - step(&(y0 - e))) / (2.0 * e[k]);
            jac.set_column(k, &col);
        }
        let (x, y) = (Vector6::from(x).component_mul(&scale), Vector6::from(y).component_mul(&scale));
        let before = (x.transpose() * omega() * y)[(0, 0)];
        let after = ((jac * x).transpose() * omega() * (jac * y))[(0, 0)];
        prop_assert!((after - before).abs() <= dt * dt * (1.0 + before.abs()), "{} {}", before, after);
    }

    #[test]
    fn rho_is_convex(a in 0.0..5.0f64, level in 1u32..4) {
        let m = CylMetric::with_eps(level, eps0());
        prop_assert!(m.rho_second(a) >= -1e-12);
        prop_assert!(m.curvature_xy(a) <= 0.0 && m.curvature_ax(a) <= 0.0);
    }

    #[test]
    fn hexagon_area_obeys_gauss_bonnet(s0 in 0.5..6.0f64, s1 in 0.5..6.0f64, s2 in 0.5..6.0f64) {
        let sides = [s0, s1, s2];
        let arcs = arcs_from_sides(sides);
        prop_assume!(arcs.iter().all(|a| *a <= 2.0));
        let area = hexagon_area(sides).unwrap();
        prop_assert!((area - (PI - arcs.iter().sum::<f64>())).abs() <= 1e-9);
    }

    #[test]
    fn rotation_conjugates_pairings(p in 3usize..8, i in 1i64..8, k in 1i64..8) {
        let poly = build_polygon(p).unwrap();
        // τ_k φ_i τ_k⁻¹ = φ_{i+k}
        let t = tau_k(&poly, k);
        let lhs = t.mul(&phi(&poly, i)).mul(&t.inverse());
        prop_assert!(lhs.approx_eq(&phi(&poly, i + k), 1e-9));
        let v = poly.half_plane_vertex(2 * i - 1);
        if let cordspec::hyperbolic::Ideal::Finite(z) = v {
            let w = act(&phi(&poly, i), z);
            prop_assert!(w.im > 0.0);
        }
    }
}

fn eps0() -> f64 {
    use std::sync::OnceLock;
    static E: OnceLock<f64> = OnceLock::new();
    *E.get_or_init(|| find_epsilon0().unwrap())
}
