use lcn_core::kernels::u_polar_at_zero;
use lcn_core::{build_mesh, LaplaceDoubleLayer, SingularKernel, Surface, SurfacePoint, Vec3};
use std::f64::consts::PI;

#[test]
fn exp_z_quadrature_converges_at_nominal_order() {
    // int_{S^2} exp(z) dA = 2 pi (e - 1/e)
    let exact = 2.0 * PI * (1f64.exp() - (-1f64).exp());
    let s = Surface::unit_sphere();
    let mut prev: Option<(f64, f64)> = None;
    let mut last_rate = 0.0;
    for level in 1..=4 {
        let mesh = build_mesh(&s, level).unwrap();
        let err = (mesh.integrate(&s, 2, |p| p.position.z().exp()) - exact).abs();
        if let Some((h0, e0)) = prev {
            last_rate = (e0 / err).ln() / (h0 / mesh.h).ln();
        }
        prev = Some((mesh.h, err));
    }
    assert!(last_rate >= 3.5, "{last_rate}");
}

#[test]
fn double_layer_value_between_orthogonal_points() {
    let x = SurfacePoint {
        position: Vec3::new(0.0, 0.0, 1.0),
        normal: Vec3::new(0.0, 0.0, 1.0),
    };
    let y = SurfacePoint {
        position: Vec3::new(1.0, 0.0, 0.0),
        normal: Vec3::new(1.0, 0.0, 0.0),
    };
    let want = -1.0 / (8.0 * PI * 2f64.sqrt());
    assert!((LaplaceDoubleLayer.eval(&x, &y) - want).abs() < 1e-16);
}

#[test]
fn ellipsoid_polar_limit_is_even() {
    let s = Surface::ellipsoid(1.5, 1.0, 0.8).unwrap();
    for x in [
        Vec3::new(1.5, 0.0, 0.0),
        s.radial_point(Vec3::new(0.3, -0.5, 0.81).normalized()),
    ] {
        for k in 0..8 {
            let t = PI * k as f64 / 8.0;
            let lim = u_polar_at_zero(&s, &LaplaceDoubleLayer, x, [t.cos(), t.sin()]).unwrap();
            assert!(lim.evenness_residual <= 1e-6, "{}", lim.evenness_residual);
        }
    }
}
