use lcn::invariants::run_invariants;
use lcn::problem::sphere_eigenvalue;
use lcn::study::random_surface_points;
use lcn::{Config, Manufactured, ProblemSpec, RhsMode, Solution};
use lcn_core::kernels::Completion;
use lcn_core::polar::PolarRule;
use lcn_core::{KernelPair, LaplaceDoubleLayer, Oracle, OracleConfig, Surface, SurfacePoint, Vec3};
use std::f64::consts::PI;

fn at(x: Vec3) -> SurfacePoint {
    SurfacePoint { position: x, normal: x }
}

fn spec(solution: Solution, g: Completion, rhs: RhsMode) -> ProblemSpec {
    ProblemSpec {
        surface: Surface::unit_sphere(),
        kernels: KernelPair::new(g, LaplaceDoubleLayer, 1.0).unwrap(),
        solution,
        rhs,
    }
}

#[test]
fn oracle_confirms_degree_one_eigenvalue() {
    let s = Surface::unit_sphere();
    let oracle = Oracle::new(&s, OracleConfig::default()).unwrap();
    for x in random_surface_points(&s, 6, 3) {
        let v = oracle
            .apply_h(&LaplaceDoubleLayer, &|y: &SurfacePoint| y.position.z(), &at(x), 1e-8)
            .unwrap();
        assert!((v.value - sphere_eigenvalue(1) * x.z()).abs() < 1e-6 * x.z().abs().max(1.0));
    }
    assert_eq!(sphere_eigenvalue(1), -1.0 / 6.0);
}

#[test]
fn oracle_and_analytic_right_hand_sides_agree() {
    for (solution, g) in [
        (Solution::One, Completion::Ones),
        (Solution::Y1, Completion::None),
        (Solution::Y2, Completion::Ones),
    ] {
        let analytic = Manufactured::new(spec(solution, g, RhsMode::Analytic), OracleConfig::default(), 1e-8).unwrap();
        let oracle = Manufactured::new(spec(solution, g, RhsMode::Oracle), OracleConfig::default(), 1e-8).unwrap();
        assert!(analytic.is_analytic() && !oracle.is_analytic());
        for x in random_surface_points(&Surface::unit_sphere(), 4, 9) {
            let (a, o) = (analytic.eval(&at(x)), oracle.eval(&at(x)));
            assert!((a - o).abs() < 1e-7, "{solution:?}: {a} vs {o}");
        }
        assert!(oracle.take_error().is_none());
    }
    let one = Manufactured::new(
        spec(Solution::One, Completion::Ones, RhsMode::Auto),
        OracleConfig::default(),
        1e-8,
    )
    .unwrap();
    assert!((one.eval(&at(Vec3::new(0.0, 0.0, 1.0))) - (1.5 - 4.0 * PI)).abs() < 1e-13);
}

#[test]
fn oracle_is_stable_under_panel_doubling() {
    let s = Surface::perturbed_sphere(0.1).unwrap();
    let base = OracleConfig::default();
    let doubled = OracleConfig {
        start: PolarRule {
            angles: 2 * base.start.angles,
            radial: 2 * base.start.radial,
        },
        level: base.level + 1,
        ..base
    };
    let (a, b) = (Oracle::new(&s, base).unwrap(), Oracle::new(&s, doubled).unwrap());
    let kernels = KernelPair::new(Completion::Ones, LaplaceDoubleLayer, 1.0).unwrap();
    let phi = |y: &SurfacePoint| y.position.z().exp();
    let tol = 1e-8;
    for x in random_surface_points(&s, 20, 21) {
        let x = s.point(x).unwrap();
        let (u, v) = (
            a.apply(&kernels, &phi, &x, tol).unwrap(),
            b.apply(&kernels, &phi, &x, tol).unwrap(),
        );
        assert!((u.total - v.total).abs() <= tol, "{} vs {}", u.total, v.total);
    }
}

#[test]
fn default_invariant_suite_passes_with_failing_controls() {
    let report = run_invariants(&Config::default()).unwrap();
    assert!(report.all_ok());
    assert!(!report.get("control.closed_rule.interior_nodes").unwrap().holds);
    assert!(!report.get("control.odd_kernel.evenness").unwrap().holds);
    assert!(report.get("pou.p0_overlap").unwrap().measured >= 0.5);
}

#[test]
fn p0_rates_are_stable_and_interpolant_tracks_nodes() {
    use lcn::config::SolverPath;
    use lcn::{run_convergence, FaerLu, StudyConfig};
    use lcn_core::SchemeConfig;
    let study = StudyConfig {
        scheme: SchemeConfig::new(0, 2),
        path: SolverPath::P0Fast,
        seed: 1,
        eval_points: 100,
        oracle: OracleConfig::default(),
        oracle_tolerance: 1e-8,
    };
    let report = run_convergence(
        &spec(Solution::Y1, Completion::Ones, RhsMode::Auto),
        1..=4,
        &study,
        &FaerLu,
    )
    .unwrap();
    assert!(report.eoc_spread().unwrap() <= 0.4, "{}", report.table());
    // The coarsest mesh (96 nodes) is pre-asymptotic at 3.16x.
    for row in report.rows.iter().filter(|r| r.level >= 2) {
        assert!(
            row.interp_error <= 3.0 * row.nodal_error.max(1e-300) + 1e-14,
            "{}",
            report.table()
        );
    }
}
