//! Reference evaluation of `(G phi)(x)` and `(H phi)(x)` for smooth `phi`.
//!
//! The singular integral is split with a `C^inf` partition of unity in the
//! chordal distance: the part near `x` is integrated in local polar
//! coordinates, the rest with a fixed high-order tensor rule on a refined
//! mesh. Both parts are evaluated at two resolutions and the differences are
//! reported as the error estimate.

use alloc::vec::Vec;
#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use crate::error::{Error, Result};
use crate::gauss::Rule1d;
use crate::geometry::{Surface, SurfacePoint, TangentFrame};
use crate::kernels::{KernelPair, SingularKernel};
use crate::meshquad::build_mesh_with_budget;
use crate::polar::{integrate_cap_adaptive, PolarRule};

/// `C^inf` step: `0` for `t <= 0`, `1` for `t >= 1`.
pub fn smooth_step_infinite(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        let a = (-1.0 / t).exp();
        let b = (-1.0 / (1.0 - t)).exp();
        a / (a + b)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OracleConfig {
    /// Inner and outer split radii as fractions of the Lyapunov radius.
    pub inner: f64,
    pub outer: f64,
    pub start: PolarRule,
    pub max_angles: usize,
    /// Mesh level of the far-field rule.
    pub level: u32,
    /// Gauss points per direction of the coarse far-field rule; the fine
    /// rule adds four.
    pub q: usize,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            inner: 0.2,
            outer: 0.8,
            start: PolarRule { angles: 16, radial: 8 },
            max_angles: 2048,
            level: 4,
            q: 10,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OracleValue {
    pub value: f64,
    pub error_estimate: f64,
}

/// `(G phi)(x)`, `(H phi)(x)` and `(A phi)(x) = (G phi)(x) + (H phi)(x)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OracleApplication {
    pub g: OracleValue,
    pub h: OracleValue,
    pub total: f64,
}

#[derive(Clone, Debug)]
pub struct Oracle {
    surface: Surface,
    config: OracleConfig,
    coarse: Vec<(SurfacePoint, f64)>,
    fine: Vec<(SurfacePoint, f64)>,
}

impl Oracle {
    pub fn new(surface: &Surface, config: OracleConfig) -> Result<Self> {
        if !(0.0 < config.inner && config.inner < config.outer && config.outer < 1.0) {
            return Err(Error::InvalidParameter(
                "oracle split radii must satisfy 0 < inner < outer < 1",
            ));
        }
        let mesh = build_mesh_with_budget(surface, config.level, config.level)?;
        let points = |q: usize| {
            let rule = Rule1d::gauss_legendre(q);
            let mut out = Vec::with_capacity(mesh.elements.len() * q * q);
            for e in &mesh.elements {
                for (mut p, w, _) in e.quadrature(surface, &rule) {
                    p.normal = surface.normal_unchecked(p.position);
                    out.push((p, w));
                }
            }
            out
        };
        Ok(Oracle {
            surface: *surface,
            config,
            coarse: points(config.q),
            fine: points(config.q + 4),
        })
    }

    pub fn surface(&self) -> &Surface {
        &self.surface
    }

    pub fn config(&self) -> &OracleConfig {
        &self.config
    }

    fn radii(&self) -> (f64, f64) {
        let d = self.surface.lyapunov_radius();
        (self.config.inner * d, self.config.outer * d)
    }

    /// Weight of the near part at chordal distance `r`.
    fn near_weight(&self, r: f64) -> f64 {
        let (r_in, r_out) = self.radii();
        1.0 - smooth_step_infinite((r - r_in) / (r_out - r_in))
    }

    /// `int_Gamma H(x, y) phi(y) dA_y` to absolute accuracy `tol`.
    pub fn apply_h<K, F>(&self, kernel: &K, phi: &F, x: &SurfacePoint, tol: f64) -> Result<OracleValue>
    where
        K: SingularKernel,
        F: Fn(&SurfacePoint) -> f64 + ?Sized,
    {
        let (r_in, r_out) = self.radii();
        let frame = TangentFrame::from_normal(x.normal);
        let near = integrate_cap_adaptive(
            &self.surface,
            kernel,
            x,
            &frame,
            &[r_in, r_out],
            self.config.start,
            self.config.max_angles,
            0.25 * tol,
            1,
            |s, acc| acc[0] += s.kernel_weight * self.near_weight(s.distance) * phi(s.y),
        )?[0];
        let far = |pts: &[(SurfacePoint, f64)]| -> f64 {
            let mut sum = 0.0;
            for (y, w) in pts {
                let r = y.position.distance(x.position);
                if r <= r_in {
                    continue;
                }
                sum += w * kernel.eval(x, y) * (1.0 - self.near_weight(r)) * phi(y);
            }
            sum
        };
        let far_coarse = far(&self.coarse);
        let far_fine = far(&self.fine);
        let far_err = (far_fine - far_coarse).abs();
        if far_err > 0.5 * tol {
            return Err(Error::Accuracy {
                achieved: far_err,
                requested: 0.5 * tol,
            });
        }
        Ok(OracleValue {
            value: near + far_fine,
            error_estimate: far_err + 0.25 * tol,
        })
    }

    /// `int_Gamma phi(y) dA_y` with both tensor rules.
    pub fn integrate<F>(&self, phi: &F) -> OracleValue
    where
        F: Fn(&SurfacePoint) -> f64 + ?Sized,
    {
        let coarse: f64 = self.coarse.iter().map(|(y, w)| w * phi(y)).sum();
        let fine: f64 = self.fine.iter().map(|(y, w)| w * phi(y)).sum();
        OracleValue {
            value: fine,
            error_estimate: (fine - coarse).abs(),
        }
    }

    /// `(A phi)(x)` for the pair `(G, H)`.
    pub fn apply<K, F>(&self, kernels: &KernelPair<K>, phi: &F, x: &SurfacePoint, tol: f64) -> Result<OracleApplication>
    where
        K: SingularKernel,
        F: Fn(&SurfacePoint) -> f64 + ?Sized,
    {
        let g = self.integrate(&|y: &SurfacePoint| kernels.g.eval(x.position, y.position) * phi(y));
        if g.error_estimate > 0.5 * tol {
            return Err(Error::Accuracy {
                achieved: g.error_estimate,
                requested: 0.5 * tol,
            });
        }
        let h = self.apply_h(&kernels.h, phi, x, 0.5 * tol)?;
        Ok(OracleApplication {
            g,
            h,
            total: g.value + h.value,
        })
    }
}
