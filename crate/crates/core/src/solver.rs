//! Assembly and solution of the nodal system
//! `c phi_a - sum_b G(x_a, x_b) W_b phi_b - sum_b H_b(x_a) phi_b = f(x_a)`
//! and the Nyström interpolant built from its solution.

use alloc::vec;
use alloc::vec::Vec;

use crate::correction::{CorrectionContext, LocalCorrection, MomentConfig};
use crate::error::{Error, Result};
use crate::gauss::Rule1d;
use crate::geometry::{Surface, SurfacePoint};
use crate::kernels::{KernelPair, SingularKernel};
use crate::linalg::{norm_inf, DenseMatrix};
use crate::meshquad::{build_mesh_with_budget, quadrature_nodes_with_rule, NodeSet, SurfaceMesh, DEFAULT_MAX_LEVEL};
use crate::oracle::{Oracle, OracleConfig};
use crate::pou::{build_pou, Cutoff, PartitionOfUnity, PouConfig};

/// Relative bound on `||A phi - f||_inf / (||A||_inf ||phi||_inf + ||f||_inf)`.
pub const RESIDUAL_TOLERANCE: f64 = 1e-10;

/// Parameters of the discretization that do not depend on the mesh level.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SchemeConfig {
    /// Correction degree.
    pub p: usize,
    /// Gauss points per direction on each element.
    pub q: usize,
    pub pou: PouConfig,
    pub moments: MomentConfig,
    pub oracle: OracleConfig,
    pub max_level: u32,
}

impl SchemeConfig {
    pub fn new(p: usize, q: usize) -> Self {
        SchemeConfig {
            p,
            q,
            pou: PouConfig::default(),
            moments: MomentConfig::default(),
            oracle: OracleConfig::default(),
            max_level: DEFAULT_MAX_LEVEL,
        }
    }
}

/// Mesh, nodes, partition of unity and per-node corrections at one level.
pub struct Discretization<K> {
    pub surface: Surface,
    pub mesh: SurfaceMesh,
    pub nodes: NodeSet,
    pub pou: PartitionOfUnity,
    pub kernels: KernelPair<K>,
    pub p: usize,
    pub cutoff: Cutoff,
    pub moments: MomentConfig,
    pub oracle: Option<Oracle>,
    pub corrections: Vec<LocalCorrection>,
}

impl<K: SingularKernel> Discretization<K> {
    /// Build everything for mesh level `level` with Gauss-Legendre nodes.
    pub fn new(surface: &Surface, level: u32, kernels: KernelPair<K>, scheme: &SchemeConfig) -> Result<Self> {
        Self::with_rule(surface, level, kernels, scheme, Rule1d::gauss_legendre(scheme.q.max(1)))
    }

    /// As [`Discretization::new`] with an arbitrary one-dimensional node rule.
    pub fn with_rule(
        surface: &Surface,
        level: u32,
        kernels: KernelPair<K>,
        scheme: &SchemeConfig,
        rule: Rule1d,
    ) -> Result<Self> {
        if scheme.q == 0 {
            return Err(Error::InvalidParameter("quad.q must be at least 1"));
        }
        let mesh = build_mesh_with_budget(surface, level, scheme.max_level)?;
        let nodes = quadrature_nodes_with_rule(surface, &mesh, rule);
        let pou = build_pou(&nodes, scheme.p, mesh.h, &scheme.pou)?;
        let cutoff = if scheme.p == 0 {
            Cutoff::Unity
        } else {
            Cutoff::standard(surface.lyapunov_radius())
        };
        let needs_oracle = scheme.p == 0 && !(scheme.moments.analytic && kernels.h.closed_surface_integral().is_some());
        let oracle = if needs_oracle {
            Some(Oracle::new(surface, scheme.oracle)?)
        } else {
            None
        };
        let mut disc = Discretization {
            surface: *surface,
            mesh,
            nodes,
            pou,
            kernels,
            p: scheme.p,
            cutoff,
            moments: scheme.moments,
            oracle,
            corrections: Vec::new(),
        };
        let corrections = {
            let ctx = disc.context();
            disc.nodes
                .nodes
                .iter()
                .map(|n| ctx.correction(&n.point))
                .collect::<Result<Vec<_>>>()?
        };
        disc.corrections = corrections;
        Ok(disc)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn context(&self) -> CorrectionContext<'_, K> {
        CorrectionContext {
            surface: &self.surface,
            kernel: &self.kernels.h,
            nodes: &self.nodes,
            pou: &self.pou,
            cutoff: self.cutoff,
            p: self.p,
            moments: self.moments,
            oracle: self.oracle.as_ref(),
        }
    }

    /// `H_b(x_a)` for all `b`.
    pub fn h_row(&self, a: usize, out: &mut [f64]) {
        self.context().corrected_weights_into(&self.corrections[a], out);
    }

    /// Row `a` of the system matrix `A = c I - G W - H`.
    pub fn fill_row(&self, a: usize, out: &mut [f64]) {
        self.h_row(a, out);
        let xa = self.nodes.nodes[a].position();
        for (o, node) in out.iter_mut().zip(&self.nodes.nodes) {
            *o = -*o - self.kernels.g.eval(xa, node.position()) * node.weight;
        }
        out[a] += self.kernels.c;
    }

    /// `(H_h v)(x_a) = sum_b H_b(x_a) v_b` for every node.
    pub fn apply_h(&self, v: &[f64]) -> Vec<f64> {
        let mut row = vec![0.0; self.len()];
        (0..self.len())
            .map(|a| {
                self.h_row(a, &mut row);
                row.iter().zip(v).map(|(w, x)| w * x).sum()
            })
            .collect()
    }

    /// Dense system matrix.
    pub fn matrix(&self) -> DenseMatrix {
        let n = self.len();
        let mut m = DenseMatrix::zeros(n, n);
        for a in 0..n {
            self.fill_row(a, m.row_mut(a));
        }
        m
    }

    /// `f(x_a)` at every node.
    pub fn sample<F: Fn(&SurfacePoint) -> f64 + ?Sized>(&self, f: &F) -> Vec<f64> {
        self.nodes.nodes.iter().map(|n| f(&n.point)).collect()
    }

    /// Solve the nodal system for right-hand side `f`.
    pub fn solve<'d, F, B>(&'d self, f: &'d F, backend: &B) -> Result<NystromSolution<'d, K>>
    where
        F: Fn(&SurfacePoint) -> f64,
        B: DenseBackend + ?Sized,
    {
        let rhs = self.sample(f);
        let values = backend.solve(self.len(), &mut |a, row| self.fill_row(a, row), &rhs)?;
        let residual = self.check_residual(&mut |a, row| self.fill_row(a, row), &values, &rhs)?;
        Ok(NystromSolution {
            disc: self,
            f,
            values,
            rhs,
            residual,
        })
    }

    /// Solve with the `p = 0` rows
    /// `gamma_a phi_a - sum_b G W_b phi_b - sum_{b != a} H(x_a, x_b) W_b (phi_b - phi_a)`,
    /// `gamma_a = c - int_Gamma H(x_a, y) dA_y`, which need no partition of unity.
    pub fn solve_p0_fast<'d, F, B>(&'d self, f: &'d F, backend: &B) -> Result<NystromSolution<'d, K>>
    where
        F: Fn(&SurfacePoint) -> f64,
        B: DenseBackend + ?Sized,
    {
        let moments = self.p0_moments()?;
        let mut fill = |a: usize, row: &mut [f64]| self.fill_row_p0_fast(&moments, a, row);
        let rhs = self.sample(f);
        let values = backend.solve(self.len(), &mut fill, &rhs)?;
        let residual = self.check_residual(&mut fill, &values, &rhs)?;
        Ok(NystromSolution {
            disc: self,
            f,
            values,
            rhs,
            residual,
        })
    }

    /// `int_Gamma H(x_a, y) dA_y` at every node, as used by the fast path.
    pub fn p0_moments(&self) -> Result<Vec<f64>> {
        if self.p != 0 {
            return Err(Error::InvalidParameter("the fast path applies to p = 0 only"));
        }
        self.nodes
            .nodes
            .iter()
            .map(|n| {
                crate::correction::singular_moments(
                    &self.surface,
                    &self.kernels.h,
                    &n.point,
                    &crate::geometry::TangentFrame::from_normal(n.point.normal),
                    &Cutoff::Unity,
                    0,
                    &self.moments,
                    self.oracle.as_ref(),
                )
                .map(|m| m[0])
            })
            .collect()
    }

    /// Row `a` of the singularity-subtraction matrix given [`Discretization::p0_moments`].
    pub fn fill_row_p0_fast(&self, moments: &[f64], a: usize, row: &mut [f64]) {
        let xa = &self.nodes.nodes[a].point;
        let mut diag = self.kernels.c - moments[a];
        for (b, (o, node)) in row.iter_mut().zip(&self.nodes.nodes).enumerate() {
            *o = -self.kernels.g.eval(xa.position, node.position()) * node.weight;
            if b != a {
                let hw = self.kernels.h.eval(xa, &node.point) * node.weight;
                *o -= hw;
                diag += hw;
            }
        }
        row[a] += diag;
    }

    fn check_residual(&self, fill: &mut dyn FnMut(usize, &mut [f64]), values: &[f64], rhs: &[f64]) -> Result<f64> {
        let n = self.len();
        let mut row = vec![0.0; n];
        let mut res: f64 = 0.0;
        let mut a_norm: f64 = 0.0;
        for (a, fa) in rhs.iter().enumerate() {
            fill(a, &mut row);
            let dot: f64 = row.iter().zip(values).map(|(m, v)| m * v).sum();
            res = res.max((dot - fa).abs());
            a_norm = a_norm.max(row.iter().map(|m| m.abs()).sum());
        }
        let bound = RESIDUAL_TOLERANCE * (a_norm * norm_inf(values) + norm_inf(rhs));
        if !(res <= bound) {
            return Err(Error::Residual { residual: res, bound });
        }
        Ok(res)
    }
}

/// Dense linear solver used for the nodal system. Rows are produced on
/// demand so that backends can fill their own storage.
pub trait DenseBackend {
    fn solve(&self, n: usize, fill_row: &mut dyn FnMut(usize, &mut [f64]), rhs: &[f64]) -> Result<Vec<f64>>;
}

/// Partial-pivot LU from [`crate::linalg`].
#[derive(Clone, Copy, Debug, Default)]
pub struct BuiltinLu;

impl DenseBackend for BuiltinLu {
    fn solve(&self, n: usize, fill_row: &mut dyn FnMut(usize, &mut [f64]), rhs: &[f64]) -> Result<Vec<f64>> {
        let mut m = DenseMatrix::zeros(n, n);
        for a in 0..n {
            fill_row(a, m.row_mut(a));
        }
        m.lu()?.solve(rhs)
    }
}

/// Nodal values together with what is needed to evaluate the interpolant.
pub struct NystromSolution<'d, K> {
    pub disc: &'d Discretization<K>,
    f: &'d dyn Fn(&SurfacePoint) -> f64,
    pub values: Vec<f64>,
    pub rhs: Vec<f64>,
    /// `||A phi - f||_inf`.
    pub residual: f64,
}

impl<K: SingularKernel> NystromSolution<'_, K> {
    /// `phi_h(x) = (f(x) + sum_b G(x, x_b) W_b phi_b + sum_b H_b(x) phi_b) / c`.
    pub fn interpolate(&self, x: crate::vec3::Vec3) -> Result<f64> {
        let point = self.disc.surface.point(x)?;
        let ctx = self.disc.context();
        let corr = ctx.correction(&point)?;
        let mut w = vec![0.0; self.disc.len()];
        ctx.corrected_weights_into(&corr, &mut w);
        let mut sum = (self.f)(&point);
        for ((wb, node), phi) in w.iter().zip(&self.disc.nodes.nodes).zip(&self.values) {
            sum += (wb + self.disc.kernels.g.eval(x, node.position()) * node.weight) * phi;
        }
        Ok(sum / self.disc.kernels.c)
    }
}
