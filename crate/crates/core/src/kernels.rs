//! Kernel pair `(G, H)` of the second-kind equation `c phi - G phi - H phi = f`.
//!
//! `H` is weakly singular: `H(x, y) = u(x, y) / |x - y|^(2 - mu)` with a bounded
//! smooth factor `u`. Only scalar kernels are implemented.

use core::f64::consts::PI;
#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use crate::error::{Error, Result};
use crate::geometry::{LocalCartesian, Surface, SurfacePoint, TangentFrame};
use crate::vec3::Vec3;

/// Weakly singular kernel in factored form.
pub trait SingularKernel {
    /// Exponent `mu` in `(0, 1]`.
    fn mu(&self) -> f64 {
        1.0
    }

    /// The bounded factor `u(x, y)`.
    fn smooth_factor(&self, x: &SurfacePoint, y: &SurfacePoint) -> f64;

    /// `int_Gamma H(x, y) dA_y` when it is known in closed form for every
    /// closed smooth surface.
    fn closed_surface_integral(&self) -> Option<f64> {
        None
    }

    /// `H(x, y)` for `x != y`. The diagonal is never evaluated by the solver.
    #[inline]
    fn eval(&self, x: &SurfacePoint, y: &SurfacePoint) -> f64 {
        let r = x.position.distance(y.position);
        self.smooth_factor(x, y) / r.powf(2.0 - self.mu())
    }
}

/// Laplace double-layer kernel `nu(y) . (x - y) / (4 pi |x - y|^3)`, `mu = 1`.
/// With this sign `int_Gamma H(x, y) dA_y = -1/2` on closed surfaces.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct LaplaceDoubleLayer;

impl SingularKernel for LaplaceDoubleLayer {
    fn closed_surface_integral(&self) -> Option<f64> {
        Some(-0.5)
    }

    #[inline]
    fn smooth_factor(&self, x: &SurfacePoint, y: &SurfacePoint) -> f64 {
        let r = x.position - y.position;
        y.normal.dot(r) / (4.0 * PI * r.norm_squared())
    }

    #[inline]
    fn eval(&self, x: &SurfacePoint, y: &SurfacePoint) -> f64 {
        let r = x.position - y.position;
        let r2 = r.norm_squared();
        y.normal.dot(r) / (4.0 * PI * r2 * r2.sqrt())
    }
}

/// Checked scalar form of the Laplace double-layer kernel.
pub fn laplace_dl(x: Vec3, y: Vec3, nu_y: Vec3) -> Result<f64> {
    if x == y {
        return Err(Error::Diagonal);
    }
    Ok(LaplaceDoubleLayer.eval(
        &SurfacePoint {
            position: x,
            normal: nu_y,
        },
        &SurfacePoint {
            position: y,
            normal: nu_y,
        },
    ))
}

/// `1 / |x - y|` (`u == 1`, `mu = 1`); a test kernel with a closed-form integral.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct InverseDistance;

impl SingularKernel for InverseDistance {
    fn smooth_factor(&self, _: &SurfacePoint, _: &SurfacePoint) -> f64 {
        1.0
    }
}

/// `u(x, y) = t1(x) . (y - x) / |y - x|`: odd in the approach direction, so it
/// violates the evenness condition. Negative control only.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct OddTestKernel;

impl SingularKernel for OddTestKernel {
    fn smooth_factor(&self, x: &SurfacePoint, y: &SurfacePoint) -> f64 {
        let t1 = TangentFrame::from_normal(x.normal).t1;
        let r = y.position - x.position;
        t1.dot(r) / r.norm()
    }
}

/// Continuous kernel `G`: the rank-one range completion `G == 1`, or nothing.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Completion {
    Ones,
    None,
}

impl Completion {
    #[inline]
    pub fn eval(&self, _x: Vec3, _y: Vec3) -> f64 {
        match self {
            Completion::Ones => 1.0,
            Completion::None => 0.0,
        }
    }
}

/// `(G, H, c)`; `c` must be nonzero.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KernelPair<K> {
    pub g: Completion,
    pub h: K,
    pub c: f64,
}

impl<K: SingularKernel> KernelPair<K> {
    pub fn new(g: Completion, h: K, c: f64) -> Result<Self> {
        if c == 0.0 || !c.is_finite() {
            return Err(Error::InvalidParameter(
                "equation constant c must be finite and nonzero",
            ));
        }
        Ok(KernelPair { g, h, c })
    }
}

impl KernelPair<LaplaceDoubleLayer> {
    /// `c = 1`, `G == 1`, `H` the Laplace double layer.
    pub fn laplace_default() -> Self {
        KernelPair {
            g: Completion::Ones,
            h: LaplaceDoubleLayer,
            c: 1.0,
        }
    }
}

/// Limit of `u(x0, psi_{x0}(rho xi_hat))` as `rho -> 0`, with the evenness
/// residual `|u(0, xi_hat) - u(0, -xi_hat)|`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PolarLimit {
    pub value: f64,
    pub opposite: f64,
    pub evenness_residual: f64,
}

/// Richardson extrapolation of the smooth kernel factor along a ray, sampled at
/// `rho in {1e-2, 5e-3, 2.5e-3} * d`.
pub fn u_polar_at_zero<K: SingularKernel>(
    surface: &Surface,
    kernel: &K,
    x0: Vec3,
    xi_hat: [f64; 2],
) -> Result<PolarLimit> {
    if kernel.mu() != 1.0 {
        return Err(Error::InvalidParameter("polar limit is defined for mu = 1 only"));
    }
    let frame = surface.tangent_frame(x0)?;
    let x = SurfacePoint {
        position: x0,
        normal: frame.nu,
    };
    let d = surface.lyapunov_radius();
    let limit = |dir: [f64; 2]| -> Result<f64> {
        let mut samples = [0.0; 3];
        for (k, scale) in [1e-2, 5e-3, 2.5e-3].into_iter().enumerate() {
            let rho = scale * d;
            let y = surface.chart_point(x0, &frame, LocalCartesian::new(rho * dir[0], rho * dir[1]))?;
            let yp = SurfacePoint {
                position: y,
                normal: surface.normal_unchecked(y),
            };
            samples[k] = kernel.smooth_factor(&x, &yp);
        }
        let d1 = (samples[0] - samples[1]).abs();
        let d2 = (samples[1] - samples[2]).abs();
        let scale = samples.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
        // With a smooth limit the differences halve; growth signals a
        // direction-dependent jump or a singular factor.
        if d2 > 0.75 * d1 + 1e-8 * scale {
            return Err(Error::KernelRegularity { spread: d2 });
        }
        // Two-level Richardson eliminating the rho and rho^2 terms.
        let r1 = 2.0 * samples[1] - samples[0];
        let r2 = 2.0 * samples[2] - samples[1];
        Ok((4.0 * r2 - r1) / 3.0)
    };
    let value = limit(xi_hat)?;
    let opposite = limit([-xi_hat[0], -xi_hat[1]])?;
    Ok(PolarLimit {
        value,
        opposite,
        evenness_residual: (value - opposite).abs(),
    })
}
