use lcn_core::kernels::Completion;
use lcn_core::{
    BuiltinLu, Discretization, KernelPair, LaplaceDoubleLayer, SchemeConfig, SingularKernel, Surface, SurfacePoint,
};
use std::f64::consts::PI;

#[derive(Clone, Copy)]
struct ZeroKernel;

impl SingularKernel for ZeroKernel {
    fn smooth_factor(&self, _: &SurfacePoint, _: &SurfacePoint) -> f64 {
        0.0
    }

    fn closed_surface_integral(&self) -> Option<f64> {
        Some(0.0)
    }
}

fn sphere_disc(level: u32, p: usize) -> Discretization<LaplaceDoubleLayer> {
    Discretization::new(
        &Surface::unit_sphere(),
        level,
        KernelPair::laplace_default(),
        &SchemeConfig::new(p, 2),
    )
    .unwrap()
}

#[test]
fn identity_limit_without_kernels() {
    let kernels = KernelPair::new(Completion::None, ZeroKernel, 2.5).unwrap();
    let disc = Discretization::new(&Surface::unit_sphere(), 1, kernels, &SchemeConfig::new(0, 2)).unwrap();
    let m = disc.matrix();
    for a in 0..disc.len() {
        for b in 0..disc.len() {
            let want = if a == b { 2.5 } else { 0.0 };
            assert!((m[(a, b)] - want).abs() < 1e-15);
        }
    }
}

#[test]
fn p0_rows_of_h_sum_to_gauss_flux() {
    let disc = sphere_disc(3, 0);
    let mut row = vec![0.0; disc.len()];
    for a in 0..disc.len() {
        disc.h_row(a, &mut row);
        let sum: f64 = row.iter().sum();
        assert!((sum + 0.5).abs() < 1e-8, "row {a}: {sum}");
    }
}

#[test]
fn fast_path_matrix_matches_general_assembly() {
    let disc = sphere_disc(2, 0);
    let moments = disc.p0_moments().unwrap();
    let general = disc.matrix();
    let mut row = vec![0.0; disc.len()];
    for a in 0..disc.len() {
        disc.fill_row_p0_fast(&moments, a, &mut row);
        for (b, v) in row.iter().enumerate() {
            assert!((v - general[(a, b)]).abs() < 1e-12, "({a}, {b})");
        }
    }
}

#[test]
fn constants_are_reproduced_to_round_off() {
    let kernels = KernelPair::new(Completion::None, LaplaceDoubleLayer, 1.0).unwrap();
    let f = |_: &SurfacePoint| 1.5;
    for level in 1..=3 {
        let disc = Discretization::new(&Surface::unit_sphere(), level, kernels, &SchemeConfig::new(0, 2)).unwrap();
        let sol = disc.solve(&f, &BuiltinLu).unwrap();
        let err = sol.values.iter().map(|v| (v - 1.0).abs()).fold(0.0, f64::max);
        assert!(err < 1e-13, "level {level}: {err}");
    }
}

#[test]
fn constants_with_completion_converge() {
    let f = |_: &SurfacePoint| 1.5 - 4.0 * PI;
    let err = |level| {
        let disc = sphere_disc(level, 1);
        let sol = disc.solve(&f, &BuiltinLu).unwrap();
        sol.values.iter().map(|v| (v - 1.0).abs()).fold(0.0, f64::max)
    };
    let (coarse, fine) = (err(1), err(2));
    assert!(fine < 0.25 * coarse, "{coarse} {fine}");
}

#[test]
fn homogeneous_problem_has_zero_solution() {
    let disc = sphere_disc(1, 0);
    let f = |_: &SurfacePoint| 0.0;
    let sol = disc.solve(&f, &BuiltinLu).unwrap();
    assert!(sol.values.iter().all(|v| *v == 0.0));
    assert_eq!(sol.interpolate(lcn_core::Vec3::new(0.0, 0.6, 0.8)).unwrap(), 0.0);
}

#[test]
fn interpolant_reproduces_nodal_values() {
    for p in [0, 1] {
        let disc = sphere_disc(1, p);
        let f = |y: &SurfacePoint| (7.0 / 6.0) * y.position.z();
        let sol = disc.solve(&f, &BuiltinLu).unwrap();
        for (node, v) in disc.nodes.nodes.iter().zip(&sol.values) {
            assert!((sol.interpolate(node.position()).unwrap() - v).abs() < 1e-12);
        }
    }
}
