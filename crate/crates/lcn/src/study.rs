//! Convergence studies and per-level diagnostics.

use std::fmt::Write as _;
use std::io::Write;
use std::time::Instant;

use lcn_core::correction::{monomials, MomentConfig};
use lcn_core::geometry::{local_cartesian, TangentFrame};
use lcn_core::meshquad::{build_mesh, local_truncation};
use lcn_core::polar::PolarRule;
use lcn_core::pou::basis_size;
use lcn_core::solver::DenseBackend;
use lcn_core::{
    Discretization, LaplaceDoubleLayer, NystromSolution, OracleConfig, SchemeConfig, SingularKernel, Surface,
    SurfacePoint, Vec3,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::config::SolverPath;
use crate::output::float;
use crate::problem::{Manufactured, ProblemSpec};

#[derive(Debug, Error)]
#[error("level {level}: {source}")]
pub struct StudyError {
    pub level: u32,
    #[source]
    pub source: lcn_core::Error,
}

fn at_level(level: u32) -> impl Fn(lcn_core::Error) -> StudyError {
    move |source| StudyError { level, source }
}

/// `count` points on the surface, uniform in direction, from a seeded stream.
pub fn random_surface_points(surface: &Surface, count: usize, seed: u64) -> Vec<Vec3> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let z: f64 = rng.gen_range(-1.0..1.0);
            let t: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
            let s = (1.0 - z * z).sqrt();
            surface.radial_point(Vec3::new(s * t.cos(), s * t.sin(), z))
        })
        .collect()
}

/// Solve with the requested assembly.
pub fn solve<'d, F>(
    disc: &'d Discretization<LaplaceDoubleLayer>,
    f: &'d F,
    path: SolverPath,
    backend: &dyn DenseBackend,
) -> lcn_core::Result<NystromSolution<'d, LaplaceDoubleLayer>>
where
    F: Fn(&SurfacePoint) -> f64,
{
    match path {
        SolverPath::General => disc.solve(f, backend),
        SolverPath::P0Fast => disc.solve_p0_fast(f, backend),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LevelResult {
    pub level: u32,
    pub n: usize,
    pub h: f64,
    pub nodal_error: f64,
    pub interp_error: f64,
    pub residual: f64,
    pub seconds: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceReport {
    pub surface: Surface,
    pub solution: &'static str,
    pub p: usize,
    pub q: usize,
    pub path: SolverPath,
    pub seed: u64,
    pub eval_points: usize,
    pub rows: Vec<LevelResult>,
}

fn rate(e0: f64, e1: f64, h0: f64, h1: f64) -> f64 {
    (e0 / e1).ln() / (h0 / h1).ln()
}

impl ConvergenceReport {
    /// EOC of the nodal and interpolated errors between rows `i - 1` and `i`.
    pub fn eoc(&self, i: usize) -> Option<(f64, f64)> {
        if i == 0 || i >= self.rows.len() {
            return None;
        }
        let (a, b) = (&self.rows[i - 1], &self.rows[i]);
        Some((
            rate(a.nodal_error, b.nodal_error, a.h, b.h),
            rate(a.interp_error, b.interp_error, a.h, b.h),
        ))
    }

    /// EOC between the last two levels.
    pub fn terminal_eoc(&self) -> Option<(f64, f64)> {
        self.eoc(self.rows.len().saturating_sub(1))
    }

    pub fn write_csv<W: Write>(&self, w: W) -> csv::Result<()> {
        let mut out = crate::output::writer(w);
        out.write_record([
            "level",
            "n",
            "h",
            "nodal_error",
            "interp_error",
            "eoc_nodal",
            "eoc_interp",
            "residual",
        ])?;
        for (i, r) in self.rows.iter().enumerate() {
            let (en, ei) = self
                .eoc(i)
                .map_or((String::new(), String::new()), |(a, b)| (float(a), float(b)));
            out.write_record([
                r.level.to_string(),
                r.n.to_string(),
                float(r.h),
                float(r.nodal_error),
                float(r.interp_error),
                en,
                ei,
                float(r.residual),
            ])?;
        }
        out.flush()?;
        Ok(())
    }

    /// Difference of the nodal EOC between the last two level pairs.
    pub fn eoc_spread(&self) -> Option<f64> {
        let n = self.rows.len();
        let last = self.eoc(n.checked_sub(1)?)?.0;
        let prev = self.eoc(n.checked_sub(2)?)?.0;
        Some((last - prev).abs())
    }

    /// Least-squares slope of `ln e` against `ln h` for the nodal errors over all rows.
    pub fn fitted_rate(&self) -> Option<f64> {
        if self.rows.len() < 2 {
            return None;
        }
        let pts: Vec<(f64, f64)> = self.rows.iter().map(|r| (r.h.ln(), r.nodal_error.ln())).collect();
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        Some(sxy / sxx)
    }

    /// Aligned text table with a configuration echo.
    pub fn table(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "# surface={:?} solution={} p={} q={} path={:?} seed={} eval_points={}",
            self.surface.kind(),
            self.solution,
            self.p,
            self.q,
            self.path,
            self.seed,
            self.eval_points
        );
        let _ = writeln!(
            s,
            "{:>5} {:>7} {:>10} {:>12} {:>12} {:>7} {:>7}",
            "level", "n", "h", "nodal", "interp", "eoc_n", "eoc_i"
        );
        for (i, r) in self.rows.iter().enumerate() {
            let (en, ei) = self.eoc(i).map_or(("-".into(), "-".into()), |(a, b)| {
                (format!("{a:.2}"), format!("{b:.2}"))
            });
            let _ = writeln!(
                s,
                "{:>5} {:>7} {:>10.4e} {:>12.4e} {:>12.4e} {:>7} {:>7}",
                r.level, r.n, r.h, r.nodal_error, r.interp_error, en, ei
            );
        }
        s
    }
}

/// Settings of a convergence study besides the problem itself.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StudyConfig {
    pub scheme: SchemeConfig,
    pub path: SolverPath,
    pub seed: u64,
    pub eval_points: usize,
    pub oracle: OracleConfig,
    pub oracle_tolerance: f64,
}

/// Solve the manufactured problem at every level and tabulate max-norm errors.
pub fn run_convergence(
    spec: &ProblemSpec,
    levels: impl IntoIterator<Item = u32>,
    study: &StudyConfig,
    backend: &dyn DenseBackend,
) -> Result<ConvergenceReport, StudyError> {
    let points = random_surface_points(&spec.surface, study.eval_points, study.seed);
    let mut rows = Vec::new();
    let mut prev_level = None;
    for level in levels {
        if prev_level.is_some_and(|p| level <= p) {
            return Err(StudyError {
                level,
                source: lcn_core::Error::InvalidParameter("levels must be ascending"),
            });
        }
        prev_level = Some(level);
        let err = at_level(level);
        let start = Instant::now();
        let rhs = Manufactured::new(*spec, study.oracle, study.oracle_tolerance).map_err(&err)?;
        let disc = Discretization::new(&spec.surface, level, spec.kernels, &study.scheme).map_err(&err)?;
        let f = |y: &SurfacePoint| rhs.eval(y);
        let sol = solve(&disc, &f, study.path, backend).map_err(&err)?;
        let exact = |x: Vec3| spec.solution.eval(x);
        let nodal_error = disc
            .nodes
            .nodes
            .iter()
            .zip(&sol.values)
            .map(|(n, v)| (v - exact(n.position())).abs())
            .fold(0.0, f64::max);
        let mut interp_error: f64 = 0.0;
        for &x in &points {
            interp_error = interp_error.max((sol.interpolate(x).map_err(&err)? - exact(x)).abs());
        }
        if let Some(e) = rhs.take_error() {
            return Err(err(e));
        }
        rows.push(LevelResult {
            level,
            n: disc.len(),
            h: disc.mesh.h,
            nodal_error,
            interp_error,
            residual: sol.residual,
            seconds: start.elapsed().as_secs_f64(),
        });
    }
    Ok(ConvergenceReport {
        surface: spec.surface,
        solution: spec.solution.name(),
        p: study.scheme.p,
        q: study.scheme.q,
        path: study.path,
        seed: study.seed,
        eval_points: study.eval_points,
        rows,
    })
}

/// Rayleigh quotients `(Y, H_h Y)_W / (Y, Y)_W` for `Y = 1` and `Y = z`.
pub fn rayleigh_quotients<K: SingularKernel>(disc: &Discretization<K>) -> [f64; 2] {
    let fields: [fn(Vec3) -> f64; 2] = [|_| 1.0, |x| x.z()];
    fields.map(|y| {
        let v: Vec<f64> = disc.nodes.positions().map(y).collect();
        let hv = disc.apply_h(&v);
        let (mut num, mut den) = (0.0, 0.0);
        for ((node, vi), hi) in disc.nodes.nodes.iter().zip(&v).zip(&hv) {
            num += node.weight * vi * hi;
            den += node.weight * vi * vi;
        }
        num / den
    })
}

/// `max_a max_{b in J_{x_a}} |R_{x_a}(x_b)|`.
pub fn correction_magnitude<K>(disc: &Discretization<K>) -> f64 {
    disc.corrections
        .iter()
        .map(|c| c.max_polynomial_value(&disc.nodes))
        .fold(0.0, f64::max)
}

/// `max_a sum_b |zeta_b(x_a) H(x_a, x_b) W_b|`.
pub fn bounded_sum<K: SingularKernel>(disc: &Discretization<K>) -> f64 {
    let nodes = &disc.nodes.nodes;
    let mut worst: f64 = 0.0;
    for (a, xa) in nodes.iter().enumerate() {
        let support = &disc.corrections[a].support;
        let mut sum = 0.0;
        for (b, xb) in nodes.iter().enumerate() {
            if b == a {
                continue;
            }
            let zeta = support.iter().find(|s| s.0 == b).map_or(1.0, |s| 1.0 - s.1);
            sum += (zeta * disc.kernels.h.eval(&xa.point, &xb.point) * xb.weight).abs();
        }
        worst = worst.max(sum);
    }
    worst
}

/// Largest change of `R_x(z)` over the support set when the tangent frame at a
/// node is rotated, over `pairs` random node/angle pairs.
pub fn frame_invariance<K: SingularKernel>(disc: &Discretization<K>, pairs: usize, seed: u64) -> lcn_core::Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ctx = disc.context();
    let mut worst: f64 = 0.0;
    for _ in 0..pairs {
        let a = rng.gen_range(0..disc.len());
        let angle: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
        let x = disc.nodes.nodes[a].point;
        let frame = TangentFrame::from_normal(x.normal);
        let base = ctx.correction_with_frame(&x, &frame)?;
        let turned = ctx.correction_with_frame(&x, &frame.rotated(angle))?;
        for &(b, _) in &base.support {
            let z = disc.nodes.nodes[b].position();
            worst = worst.max((base.polynomial.eval(z) - turned.polynomial.eval(z)).abs());
        }
    }
    Ok(worst)
}

/// Resolution used for reference moments in diagnostics.
pub fn reference_moments() -> MomentConfig {
    MomentConfig {
        accuracy: 1e-12,
        analytic: true,
        start: PolarRule { angles: 64, radial: 16 },
        max_angles: 2048,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NodeMoments {
    pub node: usize,
    pub position: Vec3,
    pub support: usize,
    pub relative_min_eigenvalue: f64,
    pub max_correction: f64,
    /// `max_beta |sum_b H_b(x_a) eta(x_b) xi^beta(x_b) - int H eta xi^beta dA|`
    /// against independently computed reference moments.
    pub moment_defect: f64,
}

/// Per-node moment diagnostics.
pub fn moment_diagnostics<K: SingularKernel>(
    disc: &Discretization<K>,
    reference: &MomentConfig,
) -> lcn_core::Result<Vec<NodeMoments>> {
    let nb = basis_size(disc.p);
    let mut row = vec![0.0; disc.len()];
    let mut mono = vec![0.0; nb];
    let mut out = Vec::with_capacity(disc.len());
    for (a, node) in disc.nodes.nodes.iter().enumerate() {
        let frame = TangentFrame::from_normal(node.point.normal);
        let exact = lcn_core::correction::singular_moments(
            &disc.surface,
            &disc.kernels.h,
            &node.point,
            &frame,
            &disc.cutoff,
            disc.p,
            reference,
            disc.oracle.as_ref(),
        )?;
        disc.h_row(a, &mut row);
        let mut discrete = vec![0.0; nb];
        for (w, xb) in row.iter().zip(&disc.nodes.nodes) {
            let eta = disc.cutoff.eta(node.position(), xb.position());
            if eta == 0.0 || *w == 0.0 {
                continue;
            }
            monomials(
                disc.p,
                local_cartesian(node.position(), &frame, xb.position()).xi,
                &mut mono,
            );
            for (d, m) in discrete.iter_mut().zip(&mono) {
                *d += w * eta * m;
            }
        }
        let corr = &disc.corrections[a];
        out.push(NodeMoments {
            node: a,
            position: node.position(),
            support: corr.support.len(),
            relative_min_eigenvalue: corr.relative_min_eigenvalue,
            max_correction: corr.max_polynomial_value(&disc.nodes),
            moment_defect: discrete
                .iter()
                .zip(&exact)
                .map(|(d, e)| (d - e).abs())
                .fold(0.0, f64::max),
        });
    }
    Ok(out)
}

pub fn write_moments_csv<W: Write>(rows: &[NodeMoments], w: W) -> csv::Result<()> {
    let mut out = crate::output::writer(w);
    out.write_record([
        "node",
        "x",
        "y",
        "z",
        "support",
        "relative_min_eigenvalue",
        "max_correction",
        "moment_defect",
    ])?;
    for r in rows {
        out.write_record([
            r.node.to_string(),
            float(r.position.x()),
            float(r.position.y()),
            float(r.position.z()),
            r.support.to_string(),
            float(r.relative_min_eigenvalue),
            float(r.max_correction),
            float(r.moment_defect),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// `max_e tau(e, f)` for `f = exp(z)` at each level, with the measured `h`.
pub fn truncation_study(
    surface: &Surface,
    q: usize,
    levels: impl IntoIterator<Item = u32>,
) -> lcn_core::Result<Vec<(f64, f64)>> {
    levels
        .into_iter()
        .map(|level| {
            let mesh = build_mesh(surface, level)?;
            let worst = mesh
                .elements
                .iter()
                .map(|e| local_truncation(surface, e, |p| p.position.z().exp(), q))
                .fold(0.0, f64::max);
            Ok((mesh.h, worst))
        })
        .collect()
}

/// Rates between consecutive `(h, error)` pairs.
pub fn rates(pairs: &[(f64, f64)]) -> Vec<f64> {
    pairs.windows(2).map(|w| rate(w[0].1, w[1].1, w[0].0, w[1].0)).collect()
}
