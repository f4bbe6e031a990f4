use lcn_core::pou::{smoothstep, Ramp};
use lcn_core::{build_mesh, build_pou, quadrature_nodes, Cutoff, PouConfig, Surface, Vec3};
use proptest::prelude::*;

fn point(theta: f64, phi: f64) -> Vec3 {
    Vec3::new(theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn zeta_pairs_are_complementary(theta in 0.0..std::f64::consts::PI, phi in 0.0..std::f64::consts::TAU, p in 0usize..3, pick in 0usize..1000) {
        let s = Surface::unit_sphere();
        let mesh = build_mesh(&s, 1).unwrap();
        let nodes = quadrature_nodes(&s, &mesh, 2);
        let pou = build_pou(&nodes, p, mesh.h, &PouConfig::default()).unwrap();
        let x = point(theta, phi);
        let a = pick % nodes.len();
        let (z, zh) = (pou.zeta(a, x), pou.zeta_hat(a, x));
        prop_assert!((z + zh - 1.0).abs() <= 1e-15);
        prop_assert!((0.0..=1.0).contains(&z));
        let set = pou.support_set(x);
        if p >= 1 {
            prop_assert!(set.len() >= (p + 1) * (p + 2) / 2);
        }
    }

    #[test]
    fn cutoff_is_monotone_in_distance(r0 in 0.0..1.0f64, r1 in 0.0..1.0f64) {
        let c = Cutoff::standard(0.9);
        let (lo, hi) = if r0 <= r1 { (r0, r1) } else { (r1, r0) };
        prop_assert!(c.eval_distance(lo) >= c.eval_distance(hi));
        prop_assert!((0.0..=1.0).contains(&c.eval_distance(lo)));
    }

    #[test]
    fn ramps_are_symmetric(t in 0.0..1.0f64) {
        prop_assert!((smoothstep(t) + smoothstep(1.0 - t) - 1.0).abs() < 1e-14);
        prop_assert!(Ramp::Quadratic.eval(t) <= 1.0 && Ramp::Quintic.eval(t) >= 0.0);
    }
}
