use lcn_core::correction::singular_moment;
use lcn_core::gauss::Rule1d;
use lcn_core::{Cutoff, Discretization, KernelPair, LaplaceDoubleLayer, MomentConfig, SchemeConfig, Surface, Vec3};

/// Composite Gauss-Legendre on `[a, b]`.
fn integrate_1d(a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
    let rule = Rule1d::gauss_legendre(20);
    let panels = 64;
    let h = (b - a) / panels as f64;
    let mut sum = 0.0;
    for k in 0..panels {
        let lo = a + k as f64 * h;
        for (t, w) in rule.points.iter().zip(&rule.weights) {
            sum += 0.5 * h * w * f(lo + 0.5 * h * (t + 1.0));
        }
    }
    sum
}

/// On the unit sphere `H = -1 / (8 pi r)` with `r = 2 sin(theta / 2)`, and
/// `xi = sin(theta) (cos phi, sin phi)`. Integrating out `phi` leaves these
/// one-dimensional integrals over the polar angle.
fn sphere_moment_1d(cutoff: &Cutoff, beta: (u32, u32)) -> f64 {
    let theta_max = 2.0 * (0.5 * cutoff.outer_radius()).asin();
    let eta = |t: f64| cutoff.eval_distance(2.0 * (0.5 * t).sin());
    match beta {
        (0, 0) => -0.25 * integrate_1d(0.0, theta_max, |t| eta(t) * (0.5 * t).cos()),
        (2, 0) | (0, 2) => -0.125 * integrate_1d(0.0, theta_max, |t| eta(t) * t.sin().powi(2) * (0.5 * t).cos()),
        _ => 0.0,
    }
}

fn tight() -> MomentConfig {
    MomentConfig {
        accuracy: 1e-12,
        ..MomentConfig::default()
    }
}

#[test]
fn sphere_moments_match_polar_angle_integrals() {
    let s = Surface::unit_sphere();
    let cutoff = Cutoff::standard(s.lyapunov_radius());
    let x = Vec3::new(0.0, 0.0, 1.0);
    for beta in [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)] {
        let got = singular_moment(&s, &LaplaceDoubleLayer, x, &cutoff, beta, &tight()).unwrap();
        let want = sphere_moment_1d(&cutoff, beta);
        assert!((got - want).abs() < 1e-10, "beta {beta:?}: {got} vs {want}");
    }
}

#[test]
fn odd_moments_vanish_at_any_point_and_frame() {
    let s = Surface::unit_sphere();
    let cutoff = Cutoff::standard(s.lyapunov_radius());
    let x = Vec3::new(0.48, -0.6, 0.64);
    for beta in [(1, 0), (0, 1)] {
        let got = singular_moment(&s, &LaplaceDoubleLayer, x, &cutoff, beta, &tight()).unwrap();
        assert!(got.abs() < 1e-8, "{got}");
    }
}

#[test]
fn unit_cutoff_moment_is_gauss_flux() {
    let s = Surface::unit_sphere();
    let got = singular_moment(
        &s,
        &LaplaceDoubleLayer,
        Vec3::new(0.0, 1.0, 0.0),
        &Cutoff::Unity,
        (0, 0),
        &tight(),
    )
    .unwrap();
    assert!((got + 0.5).abs() < 1e-6);
}

#[test]
fn p0_defect_shrinks_under_refinement() {
    let s = Surface::unit_sphere();
    let kernels = KernelPair::laplace_default();
    let scheme = SchemeConfig::new(0, 2);
    let coarse = Discretization::new(&s, 2, kernels, &scheme).unwrap();
    let fine = Discretization::new(&s, 4, kernels, &scheme).unwrap();
    let max_delta =
        |d: &Discretization<LaplaceDoubleLayer>| d.corrections.iter().map(|c| c.delta[0].abs()).fold(0.0, f64::max);
    assert!(max_delta(&fine) < max_delta(&coarse));
}
