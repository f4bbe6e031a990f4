//! Local polynomial corrections.
//!
//! At a point `x` the corrected weights are
//! `H_b(x) = zeta_b(x) H(x, x_b) W_b + zeta_hat_b(x) R_x(x_b)` where `R_x` is a
//! polynomial of degree `p` in tangent-plane coordinates at `x`. Its
//! coefficients are fixed by requiring the discrete operator to reproduce
//! `int H(x, y) eta_x(y) xi^beta(y) dA_y` for every monomial with `|beta| <= p`.
//!
//! Monomials are evaluated in scaled coordinates `xi / s`, with `s` the
//! largest `|xi(x_b)|` over the support set, so the moment matrix stays well
//! scaled under refinement. The scale does not change `R_x(z)`.

use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use crate::error::{Error, Result};
use crate::geometry::{local_cartesian, Surface, SurfacePoint, TangentFrame};
use crate::kernels::SingularKernel;
use crate::linalg::{norm_inf, DenseMatrix};
use crate::meshquad::NodeSet;
use crate::oracle::Oracle;
use crate::polar::{integrate_cap_adaptive, PolarRule};
use crate::pou::{basis_size, Cutoff, PartitionOfUnity};
use crate::vec3::Vec3;

/// Exponents `(i, j)` of `xi_1^i xi_2^j` with `i + j <= p`, ordered by total degree.
pub fn monomial_exponents(p: usize) -> Vec<(u32, u32)> {
    let mut out = Vec::with_capacity(basis_size(p));
    for deg in 0..=p as u32 {
        for j in 0..=deg {
            out.push((deg - j, j));
        }
    }
    out
}

/// Values of all monomials of degree `<= p` at `xi`, in [`monomial_exponents`] order.
pub fn monomials(p: usize, xi: [f64; 2], out: &mut [f64]) {
    debug_assert_eq!(out.len(), basis_size(p));
    let mut k = 0;
    for deg in 0..=p {
        for j in 0..=deg {
            out[k] = xi[0].powi((deg - j) as i32) * xi[1].powi(j as i32);
            k += 1;
        }
    }
}

/// Settings for the singular moment integrals.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MomentConfig {
    /// Absolute accuracy target for each moment.
    pub accuracy: f64,
    /// Use the closed-surface identity of the kernel for the `eta == 1` moment
    /// when the kernel provides one.
    pub analytic: bool,
    pub start: PolarRule,
    /// Panel budget: largest number of angular points tried.
    pub max_angles: usize,
}

impl Default for MomentConfig {
    fn default() -> Self {
        MomentConfig {
            accuracy: 1e-9,
            analytic: true,
            start: PolarRule { angles: 16, radial: 8 },
            max_angles: 1024,
        }
    }
}

/// `int_Gamma H(x, y) eta_x(y) xi^beta(y) dA_y` for every `|beta| <= p`, in
/// unscaled coordinates.
///
/// With a ramp cutoff the cap is integrated in local polar coordinates. With
/// `Cutoff::Unity` only `p = 0` is meaningful; the whole-surface integral comes
/// from the kernel's closed-surface identity or, failing that, from `oracle`.
pub fn singular_moments<K: SingularKernel>(
    surface: &Surface,
    kernel: &K,
    x: &SurfacePoint,
    frame: &TangentFrame,
    cutoff: &Cutoff,
    p: usize,
    config: &MomentConfig,
    oracle: Option<&Oracle>,
) -> Result<Vec<f64>> {
    if kernel.mu() != 1.0 {
        return Err(Error::InvalidParameter("singular moments require mu = 1"));
    }
    match *cutoff {
        Cutoff::Unity => {
            if p != 0 {
                return Err(Error::InvalidParameter("a unit cutoff is only admissible for p = 0"));
            }
            if config.analytic {
                if let Some(v) = kernel.closed_surface_integral() {
                    return Ok(vec![v]);
                }
            }
            let oracle = oracle.ok_or(Error::InvalidParameter(
                "numerical whole-surface moment needs an oracle",
            ))?;
            let r = oracle.apply_h(kernel, &|_: &SurfacePoint| 1.0, x, config.accuracy)?;
            Ok(vec![r.value])
        }
        Cutoff::Ramp { inner, outer } => {
            let nb = basis_size(p);
            let mut mono = vec![0.0; nb];
            integrate_cap_adaptive(
                surface,
                kernel,
                x,
                frame,
                &[inner, outer],
                config.start,
                config.max_angles,
                config.accuracy,
                nb,
                |s, acc| {
                    let w = s.kernel_weight * cutoff.eval_distance(s.distance);
                    monomials(p, s.xi, &mut mono);
                    for (a, m) in acc.iter_mut().zip(&mono) {
                        *a += w * m;
                    }
                },
            )
        }
    }
}

/// Single moment for the multi-index `beta = (i, j)`.
pub fn singular_moment<K: SingularKernel>(
    surface: &Surface,
    kernel: &K,
    x: Vec3,
    cutoff: &Cutoff,
    beta: (u32, u32),
    config: &MomentConfig,
) -> Result<f64> {
    let p = (beta.0 + beta.1) as usize;
    let frame = surface.tangent_frame(x)?;
    let xp = SurfacePoint {
        position: x,
        normal: frame.nu,
    };
    let all = singular_moments(surface, kernel, &xp, &frame, cutoff, p, config, None)?;
    let idx = monomial_exponents(p)
        .iter()
        .position(|&e| e == beta)
        .expect("exponent is in the basis");
    Ok(all[idx])
}

/// Degree-`p` polynomial in the tangent plane at `origin`.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalPolynomial {
    pub origin: Vec3,
    pub frame: TangentFrame,
    pub degree: usize,
    /// Coordinate scale `s`; the basis is `(xi / s)^beta`.
    pub scale: f64,
    pub coefficients: Vec<f64>,
}

impl LocalPolynomial {
    pub fn zero(origin: Vec3, frame: TangentFrame, degree: usize) -> Self {
        LocalPolynomial {
            origin,
            frame,
            degree,
            scale: 1.0,
            coefficients: vec![0.0; basis_size(degree)],
        }
    }

    pub fn eval(&self, z: Vec3) -> f64 {
        let xi = local_cartesian(self.origin, &self.frame, z).xi;
        let xi = [xi[0] / self.scale, xi[1] / self.scale];
        let mut k = 0;
        let mut sum = 0.0;
        for deg in 0..=self.degree {
            for j in 0..=deg {
                sum += self.coefficients[k] * xi[0].powi((deg - j) as i32) * xi[1].powi(j as i32);
                k += 1;
            }
        }
        sum
    }
}

/// `M[alpha][beta] = sum_b zeta_hat_b(x) eta_x(x_b) xi^alpha(x_b) xi^beta(x_b)`
/// over the support set `(b, zeta_hat_b(x))`, in coordinates scaled by `scale`.
pub fn moment_matrix(
    support: &[(usize, f64)],
    nodes: &NodeSet,
    cutoff: &Cutoff,
    x: Vec3,
    frame: &TangentFrame,
    p: usize,
    scale: f64,
) -> DenseMatrix {
    let nb = basis_size(p);
    let mut m = DenseMatrix::zeros(nb, nb);
    let mut mono = vec![0.0; nb];
    for &(b, zh) in support {
        let xb = nodes.nodes[b].position();
        let w = zh * cutoff.eta(x, xb);
        if w == 0.0 {
            continue;
        }
        let xi = local_cartesian(x, frame, xb).xi;
        monomials(p, [xi[0] / scale, xi[1] / scale], &mut mono);
        for i in 0..nb {
            let wi = w * mono[i];
            for j in 0..=i {
                m[(i, j)] += wi * mono[j];
            }
        }
    }
    for i in 0..nb {
        for j in 0..i {
            m[(j, i)] = m[(i, j)];
        }
    }
    m
}

/// `Delta^beta = moment^beta - sum_b zeta_b(x) H(x, x_b) eta_x(x_b) xi^beta(x_b) W_b`,
/// skipping the node at `x` itself. Moments are given unscaled; the result is
/// in the scaled basis.
pub fn moment_rhs<K: SingularKernel>(
    kernel: &K,
    pou: &PartitionOfUnity,
    support: &[(usize, f64)],
    nodes: &NodeSet,
    cutoff: &Cutoff,
    x: &SurfacePoint,
    frame: &TangentFrame,
    p: usize,
    scale: f64,
    moments: &[f64],
) -> Vec<f64> {
    let nb = basis_size(p);
    let exps = monomial_exponents(p);
    let mut rhs: Vec<f64> = moments
        .iter()
        .zip(&exps)
        .map(|(m, &(i, j))| m / scale.powi((i + j) as i32))
        .collect();
    let mut mono = vec![0.0; nb];
    let reach = cutoff.outer_radius();
    for (b, node) in nodes.nodes.iter().enumerate() {
        let xb = node.position();
        if xb == x.position {
            continue;
        }
        let dist = xb.distance(x.position);
        if dist >= reach {
            continue;
        }
        let eta = cutoff.eval_distance(dist);
        if eta == 0.0 {
            continue;
        }
        let zeta = match support.iter().find(|&&(s, _)| s == b) {
            Some(&(_, zh)) => 1.0 - zh,
            None => 1.0,
        };
        if zeta == 0.0 {
            continue;
        }
        let w = zeta * kernel.eval(x, &node.point) * eta * node.weight;
        let xi = local_cartesian(x.position, frame, xb).xi;
        monomials(p, [xi[0] / scale, xi[1] / scale], &mut mono);
        for (r, m) in rhs.iter_mut().zip(&mono) {
            *r -= w * m;
        }
    }
    debug_assert!(pou.degree() == p || cutoff == &Cutoff::Unity);
    rhs
}

/// Relative eigenvalue threshold `sigma_min = 1e-10 * trace(M)`.
pub const MOMENT_EIGEN_THRESHOLD: f64 = 1e-10;

/// Solve `M C = Delta` for the coefficients of `R_x`.
pub fn solve_local_polynomial(
    m: &DenseMatrix,
    delta: &[f64],
    origin: Vec3,
    frame: &TangentFrame,
    p: usize,
    scale: f64,
) -> Result<(LocalPolynomial, f64)> {
    let trace = m.trace();
    let min_eig = m.symmetric_eigenvalues()[0];
    let threshold = MOMENT_EIGEN_THRESHOLD * trace;
    if !(min_eig >= threshold) || !(trace > 0.0) {
        return Err(Error::SingularMomentSystem {
            point: origin,
            min_eigenvalue: min_eig,
            threshold,
        });
    }
    let lu = m.lu()?;
    let mut c = lu.solve(delta)?;
    // One step of iterative refinement.
    let r: Vec<f64> = m.mul_vec(&c).iter().zip(delta).map(|(a, b)| b - a).collect();
    let dc = lu.solve(&r)?;
    for (ci, d) in c.iter_mut().zip(&dc) {
        *ci += d;
    }
    let residual = norm_inf(&m.mul_vec(&c).iter().zip(delta).map(|(a, b)| a - b).collect::<Vec<_>>());
    let bound = 1e-10 * norm_inf(delta);
    if residual > bound && residual > 1e-14 * m.norm_inf() * norm_inf(&c) {
        return Err(Error::Residual { residual, bound });
    }
    Ok((
        LocalPolynomial {
            origin,
            frame: *frame,
            degree: p,
            scale,
            coefficients: c,
        },
        min_eig / trace,
    ))
}

/// Everything needed to form corrected weights at one point.
#[derive(Clone, Debug)]
pub struct LocalCorrection {
    pub point: SurfacePoint,
    pub polynomial: LocalPolynomial,
    /// `(b, zeta_hat_b(x))` for `b` in `J_x`.
    pub support: Vec<(usize, f64)>,
    /// `(b, zeta_hat_b(x) R_x(x_b))`.
    pub weights: Vec<(usize, f64)>,
    /// Singular moments `int H eta xi^beta dA` (unscaled).
    pub moments: Vec<f64>,
    /// Right-hand side of the moment system (scaled basis).
    pub delta: Vec<f64>,
    /// Smallest eigenvalue of the moment matrix relative to its trace.
    pub relative_min_eigenvalue: f64,
}

impl LocalCorrection {
    /// `max_{b in J_x} |R_x(x_b)|`.
    pub fn max_polynomial_value(&self, nodes: &NodeSet) -> f64 {
        self.support
            .iter()
            .map(|&(b, _)| self.polynomial.eval(nodes.nodes[b].position()).abs())
            .fold(0.0, f64::max)
    }
}

/// Shared read-only state for computing corrections.
pub struct CorrectionContext<'a, K> {
    pub surface: &'a Surface,
    pub kernel: &'a K,
    pub nodes: &'a NodeSet,
    pub pou: &'a PartitionOfUnity,
    pub cutoff: Cutoff,
    pub p: usize,
    pub moments: MomentConfig,
    pub oracle: Option<&'a Oracle>,
}

impl<K: SingularKernel> CorrectionContext<'_, K> {
    /// Compute `R_x` and the corrected-weight data at `x` using `frame`.
    pub fn correction_with_frame(&self, x: &SurfacePoint, frame: &TangentFrame) -> Result<LocalCorrection> {
        let support = self.pou.support_set(x.position);
        let scale = support
            .iter()
            .map(|&(b, _)| {
                let xi = local_cartesian(x.position, frame, self.nodes.nodes[b].position());
                xi.norm()
            })
            .fold(0.0, f64::max);
        let scale = if scale > 0.0 { scale } else { 1.0 };
        let m = moment_matrix(&support, self.nodes, &self.cutoff, x.position, frame, self.p, scale);
        let moments = singular_moments(
            self.surface,
            self.kernel,
            x,
            frame,
            &self.cutoff,
            self.p,
            &self.moments,
            self.oracle,
        )?;
        let delta = moment_rhs(
            self.kernel,
            self.pou,
            &support,
            self.nodes,
            &self.cutoff,
            x,
            frame,
            self.p,
            scale,
            &moments,
        );
        let (polynomial, rel) = solve_local_polynomial(&m, &delta, x.position, frame, self.p, scale)?;
        let weights = support
            .iter()
            .map(|&(b, zh)| (b, zh * polynomial.eval(self.nodes.nodes[b].position())))
            .collect();
        Ok(LocalCorrection {
            point: *x,
            polynomial,
            support,
            weights,
            moments,
            delta,
            relative_min_eigenvalue: rel,
        })
    }

    pub fn correction(&self, x: &SurfacePoint) -> Result<LocalCorrection> {
        self.correction_with_frame(x, &TangentFrame::from_normal(x.normal))
    }

    /// Write `H_b(x)` for every node `b` into `out`.
    pub fn corrected_weights_into(&self, corr: &LocalCorrection, out: &mut [f64]) {
        let x = &corr.point;
        for (o, node) in out.iter_mut().zip(&self.nodes.nodes) {
            *o = if node.position() == x.position {
                0.0
            } else {
                self.kernel.eval(x, &node.point) * node.weight
            };
        }
        // zeta_b = 1 - zeta_hat_b on the support set.
        for &(b, zh) in &corr.support {
            out[b] -= zh * out[b];
        }
        for &(b, w) in &corr.weights {
            out[b] += w;
        }
    }
}

/// `H_b(x) = zeta_b(x) H(x, x_b) W_b + zeta_hat_b(x) R_x(x_b)`, with the first
/// term defined as zero when `x == x_b`.
pub fn corrected_weight<K: SingularKernel>(
    kernel: &K,
    nodes: &NodeSet,
    pou: &PartitionOfUnity,
    corr: &LocalCorrection,
    b: usize,
) -> f64 {
    let node = &nodes.nodes[b];
    let x = &corr.point;
    let singular = if node.position() == x.position {
        0.0
    } else {
        pou.zeta(b, x.position) * kernel.eval(x, &node.point) * node.weight
    };
    let zh = corr.support.iter().find(|&&(s, _)| s == b).map_or(0.0, |&(_, v)| v);
    singular + zh * corr.polynomial.eval(node.position())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basis_ordering() {
        assert_eq!(
            monomial_exponents(2),
            vec![(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)]
        );
        let mut out = [0.0; 6];
        monomials(2, [2.0, 3.0], &mut out);
        assert_eq!(out, [1.0, 2.0, 3.0, 4.0, 6.0, 9.0]);
    }

    #[test]
    fn zero_rhs_gives_zero_polynomial() {
        let frame = TangentFrame::from_normal(Vec3::new(0.0, 0.0, 1.0));
        let m = DenseMatrix::from_fn(3, 3, |i, j| if i == j { 2.0 } else { 0.5 });
        let (poly, _) = solve_local_polynomial(&m, &[0.0; 3], Vec3::new(0.0, 0.0, 1.0), &frame, 1, 1.0).unwrap();
        assert!(poly.coefficients.iter().all(|&c| c == 0.0));
        assert_eq!(poly.eval(Vec3::new(0.3, 0.1, 0.9)), 0.0);
    }

    #[test]
    fn p0_closed_form() {
        let frame = TangentFrame::from_normal(Vec3::new(0.0, 0.0, 1.0));
        let m = DenseMatrix::from_fn(1, 1, |_, _| 0.8);
        let (poly, _) = solve_local_polynomial(&m, &[-0.2], Vec3::ZERO, &frame, 0, 1.0).unwrap();
        assert!((poly.coefficients[0] + 0.25).abs() < 1e-16);
    }

    #[test]
    fn singular_matrix_is_rejected() {
        let frame = TangentFrame::from_normal(Vec3::new(0.0, 0.0, 1.0));
        let m = DenseMatrix::from_fn(3, 3, |_, _| 1.0);
        assert!(matches!(
            solve_local_polynomial(&m, &[1.0, 0.0, 0.0], Vec3::ZERO, &frame, 1, 1.0),
            Err(Error::SingularMomentSystem { .. })
        ));
    }
}
