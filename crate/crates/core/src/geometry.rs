//! Closed analytic surfaces, tangent frames and the local coordinate maps
//! attached to a point of the surface.
//!
//! Every shipped surface is star-shaped and is described twice: implicitly by
//! a constraint `g(x) = 0` whose gradient gives the outward normal, and
//! parametrically by six cube-face charts `[-1, 1]^2 -> surface`. The charts
//! use the equiangular cube-sphere map, which keeps element areas within a
//! small ratio under uniform refinement.

use core::f64::consts::FRAC_PI_4;
#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use crate::error::{Error, Result};
use crate::vec3::Vec3;

/// Constraint residual above which a point is rejected as off-surface.
pub const ON_SURFACE_TOL: f64 = 1e-10;

const PROJECTION_MAX_ITER: usize = 50;
const PROJECTION_TOL: f64 = 1e-13;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SurfaceKind {
    UnitSphere,
    Ellipsoid {
        a: f64,
        b: f64,
        c: f64,
    },
    /// Radial graph `r(omega) = 1 + epsilon * s(omega)` over the unit sphere with
    /// `s(omega) = omega_x * omega_y + omega_z^3`.
    PerturbedSphere {
        epsilon: f64,
    },
}

/// A closed smooth surface together with its Lyapunov radius `d`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Surface {
    kind: SurfaceKind,
    lyapunov_radius: f64,
}

/// A point on the surface with its outward unit normal.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SurfacePoint {
    pub position: Vec3,
    pub normal: Vec3,
}

/// Orthonormal right-handed frame `(t1, t2, nu)` with `nu` the outward normal.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TangentFrame {
    pub t1: Vec3,
    pub t2: Vec3,
    pub nu: Vec3,
}

/// Tangent-plane coordinates `xi` of a surface point relative to an origin.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct LocalCartesian {
    pub xi: [f64; 2],
}

/// Polar form of [`LocalCartesian`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LocalPolar {
    pub rho: f64,
    pub xi_hat: [f64; 2],
}

/// Chart value with its first derivatives.
#[derive(Clone, Copy, Debug)]
pub struct ChartSample {
    pub point: Vec3,
    pub du: Vec3,
    pub dv: Vec3,
}

impl ChartSample {
    /// Area element `|x_u x x_v|`.
    pub fn area_element(&self) -> f64 {
        self.du.cross(self.dv).norm()
    }
}

fn perturbation(w: Vec3) -> f64 {
    w.x() * w.y() + w.z() * w.z() * w.z()
}

fn perturbation_gradient(w: Vec3) -> Vec3 {
    Vec3::new(w.y(), w.x(), 3.0 * w.z() * w.z())
}

impl Surface {
    pub fn new(kind: SurfaceKind, lyapunov_radius: Option<f64>) -> Result<Self> {
        match kind {
            SurfaceKind::UnitSphere => {}
            SurfaceKind::Ellipsoid { a, b, c } => {
                if !(a > 0.0 && b > 0.0 && c > 0.0) {
                    return Err(Error::InvalidParameter("ellipsoid semi-axes must be positive"));
                }
            }
            SurfaceKind::PerturbedSphere { epsilon } => {
                if !(epsilon.abs() <= 0.1) {
                    return Err(Error::InvalidParameter(
                        "perturbation amplitude must satisfy |epsilon| <= 0.1",
                    ));
                }
            }
        }
        let d = lyapunov_radius.unwrap_or(match kind {
            SurfaceKind::UnitSphere => 0.9,
            SurfaceKind::Ellipsoid { a, b, c } => 0.5 * a.min(b).min(c),
            SurfaceKind::PerturbedSphere { .. } => 0.4,
        });
        if !(d > 0.0 && d.is_finite()) {
            return Err(Error::InvalidParameter("Lyapunov radius must be positive"));
        }
        Ok(Surface {
            kind,
            lyapunov_radius: d,
        })
    }

    pub fn unit_sphere() -> Self {
        Surface {
            kind: SurfaceKind::UnitSphere,
            lyapunov_radius: 0.9,
        }
    }

    pub fn ellipsoid(a: f64, b: f64, c: f64) -> Result<Self> {
        Self::new(SurfaceKind::Ellipsoid { a, b, c }, None)
    }

    pub fn perturbed_sphere(epsilon: f64) -> Result<Self> {
        Self::new(SurfaceKind::PerturbedSphere { epsilon }, None)
    }

    pub fn kind(&self) -> SurfaceKind {
        self.kind
    }

    pub fn lyapunov_radius(&self) -> f64 {
        self.lyapunov_radius
    }

    pub fn is_unit_sphere(&self) -> bool {
        matches!(self.kind, SurfaceKind::UnitSphere)
    }

    /// Centroid used for the outward-orientation check. All shipped surfaces are
    /// centred at the origin.
    pub fn centroid(&self) -> Vec3 {
        Vec3::ZERO
    }

    /// Constraint value `g(x)`; zero on the surface and scaled like a distance.
    pub fn constraint(&self, x: Vec3) -> f64 {
        match self.kind {
            SurfaceKind::UnitSphere => x.norm() - 1.0,
            SurfaceKind::Ellipsoid { a, b, c } => {
                let q = (x.x() * x.x() / (a * a) + x.y() * x.y() / (b * b) + x.z() * x.z() / (c * c)).sqrt();
                q - 1.0
            }
            SurfaceKind::PerturbedSphere { epsilon } => {
                let r = x.norm();
                r - 1.0 - epsilon * perturbation(x / r)
            }
        }
    }

    /// Gradient of [`Surface::constraint`].
    pub fn constraint_gradient(&self, x: Vec3) -> Vec3 {
        match self.kind {
            SurfaceKind::UnitSphere => x / x.norm(),
            SurfaceKind::Ellipsoid { a, b, c } => {
                let q = (x.x() * x.x() / (a * a) + x.y() * x.y() / (b * b) + x.z() * x.z() / (c * c)).sqrt();
                Vec3::new(x.x() / (a * a), x.y() / (b * b), x.z() / (c * c)) / q
            }
            SurfaceKind::PerturbedSphere { epsilon } => {
                let r = x.norm();
                let w = x / r;
                let gs = perturbation_gradient(w);
                let tangential = gs - w * gs.dot(w);
                w - tangential * (epsilon / r)
            }
        }
    }

    /// Outward unit normal at `x` without the on-surface check.
    pub fn normal_unchecked(&self, x: Vec3) -> Vec3 {
        self.constraint_gradient(x).normalized()
    }

    pub fn check_on_surface(&self, x: Vec3) -> Result<()> {
        let residual = self.constraint(x).abs();
        if residual <= ON_SURFACE_TOL {
            Ok(())
        } else {
            Err(Error::NotOnSurface { residual })
        }
    }

    /// The surface point on the ray from the centroid in direction `dir`.
    pub fn radial_point(&self, dir: Vec3) -> Vec3 {
        let w = dir.normalized();
        match self.kind {
            SurfaceKind::UnitSphere => w,
            SurfaceKind::Ellipsoid { a, b, c } => {
                let q = (w.x() * w.x() / (a * a) + w.y() * w.y() / (b * b) + w.z() * w.z() / (c * c)).sqrt();
                w / q
            }
            SurfaceKind::PerturbedSphere { epsilon } => w * (1.0 + epsilon * perturbation(w)),
        }
    }

    /// Attach the outward normal to a surface point.
    pub fn point(&self, x: Vec3) -> Result<SurfacePoint> {
        self.check_on_surface(x)?;
        Ok(SurfacePoint {
            position: x,
            normal: self.normal_unchecked(x),
        })
    }

    /// Orthonormal right-handed frame at `x` with the outward normal.
    pub fn tangent_frame(&self, x: Vec3) -> Result<TangentFrame> {
        self.check_on_surface(x)?;
        Ok(TangentFrame::from_normal(self.normal_unchecked(x)))
    }

    /// Evaluate chart `face` (0..6) at parameters `(u, v)` in `[-1, 1]^2`.
    pub fn chart(&self, face: usize, u: f64, v: f64) -> ChartSample {
        debug_assert!(face < 6);
        let axis = face % 3;
        let sign = if face < 3 { 1.0 } else { -1.0 };
        let e0 = Vec3::axis(axis);
        let e1 = Vec3::axis((axis + 1) % 3);
        let e2 = Vec3::axis((axis + 2) % 3);
        let big_u = (FRAC_PI_4 * u).tan();
        let big_v = (FRAC_PI_4 * v).tan();
        // Flip one tangent on negative faces so every chart is positively oriented.
        let cube = e0 * sign + e1 * (sign * big_u) + e2 * big_v;
        let cube_u = e1 * (sign * FRAC_PI_4 * (1.0 + big_u * big_u));
        let cube_v = e2 * (FRAC_PI_4 * (1.0 + big_v * big_v));
        let len = cube.norm();
        let w = cube / len;
        let dw = |dc: Vec3| (dc - w * w.dot(dc)) / len;
        let (w_u, w_v) = (dw(cube_u), dw(cube_v));
        match self.kind {
            SurfaceKind::UnitSphere => ChartSample {
                point: w,
                du: w_u,
                dv: w_v,
            },
            SurfaceKind::Ellipsoid { a, b, c } => {
                let s = |p: Vec3| Vec3::new(a * p.x(), b * p.y(), c * p.z());
                ChartSample {
                    point: s(w),
                    du: s(w_u),
                    dv: s(w_v),
                }
            }
            SurfaceKind::PerturbedSphere { epsilon } => {
                let r = 1.0 + epsilon * perturbation(w);
                let gs = perturbation_gradient(w);
                ChartSample {
                    point: w * r,
                    du: w_u * r + w * (epsilon * gs.dot(w_u)),
                    dv: w_v * r + w * (epsilon * gs.dot(w_v)),
                }
            }
        }
    }

    /// The projection map `psi_{x0}`: lift tangent-plane coordinates `xi` to the
    /// surface point `x0 + xi_1 t1 + xi_2 t2 + s nu`.
    ///
    /// The offset `s` is found by damped Newton iteration from `s = 0`.
    pub fn chart_point(&self, x0: Vec3, frame: &TangentFrame, xi: LocalCartesian) -> Result<Vec3> {
        let xi_norm = xi.norm();
        let d = self.lyapunov_radius;
        if !(xi_norm < d) {
            return Err(Error::OutsidePatch { xi_norm });
        }
        let base = x0 + frame.t1 * xi.xi[0] + frame.t2 * xi.xi[1];
        self.project_along_normal(base, frame.nu, d)
            .map(|(y, _)| y)
            .ok_or(Error::OutsidePatch { xi_norm })
    }

    /// Solve `g(base + s nu) = 0` for the offset nearest to zero.
    /// Returns the point and the constraint gradient there.
    pub(crate) fn project_along_normal(&self, base: Vec3, nu: Vec3, max_offset: f64) -> Option<(Vec3, Vec3)> {
        let mut s = 0.0;
        let mut y = base;
        let mut g = self.constraint(y);
        for _ in 0..PROJECTION_MAX_ITER {
            let grad = self.constraint_gradient(y);
            if g.abs() <= 1e-15 {
                return Some((y, grad));
            }
            let slope = grad.dot(nu);
            if !(slope.abs() > 1e-12) {
                return None;
            }
            let mut step = g / slope;
            let mut accepted = false;
            for _ in 0..40 {
                let s_new = s - step;
                if s_new.abs() <= max_offset {
                    let y_new = base + nu * s_new;
                    let g_new = self.constraint(y_new);
                    if g_new.abs() < g.abs() || step.abs() <= PROJECTION_TOL {
                        s = s_new;
                        y = y_new;
                        g = g_new;
                        accepted = true;
                        break;
                    }
                }
                step *= 0.5;
            }
            if !accepted {
                return None;
            }
            if step.abs() <= PROJECTION_TOL {
                return Some((y, self.constraint_gradient(y)));
            }
        }
        if g.abs() <= 1e-13 {
            Some((y, self.constraint_gradient(y)))
        } else {
            None
        }
    }

    /// Surface point for local coordinates together with its outward normal and
    /// the area Jacobian `dA / dxi` of the graph parametrization.
    pub(crate) fn lift(&self, x0: Vec3, frame: &TangentFrame, xi: [f64; 2]) -> Option<Lifted> {
        let base = x0 + frame.t1 * xi[0] + frame.t2 * xi[1];
        let (y, grad) = self.project_along_normal(base, frame.nu, self.lyapunov_radius)?;
        let gn = grad.dot(frame.nu);
        let gnorm = grad.norm();
        Some(Lifted {
            point: SurfacePoint {
                position: y,
                normal: grad / gnorm,
            },
            jacobian: gnorm / gn.abs(),
            slope: [-grad.dot(frame.t1) / gn, -grad.dot(frame.t2) / gn],
        })
    }
}

/// A lifted tangent-plane point: the surface point, `dA/dxi`, and `ds/dxi`.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Lifted {
    pub point: SurfacePoint,
    pub jacobian: f64,
    pub slope: [f64; 2],
}

impl TangentFrame {
    /// Build a frame from a unit normal, choosing `t1` from the coordinate axis
    /// least aligned with the normal.
    pub fn from_normal(nu: Vec3) -> Self {
        let k = (0..3).min_by(|&i, &j| nu[i].abs().total_cmp(&nu[j].abs())).unwrap_or(0);
        let t1 = Vec3::axis(k).cross(nu).normalized();
        let t2 = nu.cross(t1);
        TangentFrame { t1, t2, nu }
    }

    /// Rotate the tangent pair by `angle` about the normal.
    pub fn rotated(&self, angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        TangentFrame {
            t1: self.t1 * c + self.t2 * s,
            t2: self.t2 * c - self.t1 * s,
            nu: self.nu,
        }
    }

    /// Largest deviation from the orthonormality and handedness identities.
    pub fn orthonormality_defect(&self) -> f64 {
        let checks = [
            (self.t1.norm() - 1.0).abs(),
            (self.t2.norm() - 1.0).abs(),
            (self.nu.norm() - 1.0).abs(),
            self.t1.dot(self.t2).abs(),
            self.t1.dot(self.nu).abs(),
            self.t2.dot(self.nu).abs(),
            (self.t1.cross(self.t2) - self.nu).norm(),
        ];
        checks.into_iter().fold(0.0, f64::max)
    }
}

/// Tangent-plane coordinates `xi_alpha = (y - x0) . t_alpha`.
pub fn local_cartesian(x0: Vec3, frame: &TangentFrame, y: Vec3) -> LocalCartesian {
    let r = y - x0;
    LocalCartesian {
        xi: [r.dot(frame.t1), r.dot(frame.t2)],
    }
}

impl LocalCartesian {
    pub fn new(xi1: f64, xi2: f64) -> Self {
        LocalCartesian { xi: [xi1, xi2] }
    }

    pub fn norm(&self) -> f64 {
        self.xi[0].hypot(self.xi[1])
    }

    /// Polar form; at the origin the direction is the fixed representative `(1, 0)`.
    pub fn to_polar(&self) -> LocalPolar {
        let rho = self.norm();
        if rho > 0.0 {
            LocalPolar {
                rho,
                xi_hat: [self.xi[0] / rho, self.xi[1] / rho],
            }
        } else {
            LocalPolar {
                rho: 0.0,
                xi_hat: [1.0, 0.0],
            }
        }
    }
}

impl LocalPolar {
    pub fn to_cartesian(&self) -> LocalCartesian {
        LocalCartesian {
            xi: [self.rho * self.xi_hat[0], self.rho * self.xi_hat[1]],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: Vec3, b: Vec3, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn sphere_normal_is_position() {
        let s = Surface::unit_sphere();
        let f = s.tangent_frame(Vec3::new(0.0, 0.0, 1.0)).unwrap();
        assert!(close(f.nu, Vec3::new(0.0, 0.0, 1.0), 1e-15));
        assert!(f.orthonormality_defect() < 1e-15);
    }

    #[test]
    fn ellipsoid_normal_on_axis() {
        let s = Surface::ellipsoid(2.0, 1.0, 1.0).unwrap();
        let f = s.tangent_frame(Vec3::new(2.0, 0.0, 0.0)).unwrap();
        assert!(close(f.nu, Vec3::new(1.0, 0.0, 0.0), 1e-15));
    }

    #[test]
    fn off_surface_point_is_rejected() {
        let s = Surface::unit_sphere();
        assert!(matches!(
            s.tangent_frame(Vec3::new(0.0, 0.0, 1.1)),
            Err(Error::NotOnSurface { .. })
        ));
    }

    #[test]
    fn local_cartesian_examples() {
        let x0 = Vec3::new(0.0, 0.0, 1.0);
        let frame = TangentFrame {
            t1: Vec3::new(1.0, 0.0, 0.0),
            t2: Vec3::new(0.0, 1.0, 0.0),
            nu: Vec3::new(0.0, 0.0, 1.0),
        };
        assert_eq!(local_cartesian(x0, &frame, x0).xi, [0.0, 0.0]);
        assert_eq!(local_cartesian(x0, &frame, Vec3::new(1.0, 0.0, 0.0)).xi, [1.0, 0.0]);
        // The antipode projects onto the origin as well: not injective beyond the patch.
        assert_eq!(local_cartesian(x0, &frame, -x0).xi, [0.0, 0.0]);
    }

    #[test]
    fn chart_point_examples() {
        let s = Surface::unit_sphere();
        let x0 = Vec3::new(0.0, 0.0, 1.0);
        let frame = TangentFrame {
            t1: Vec3::new(1.0, 0.0, 0.0),
            t2: Vec3::new(0.0, 1.0, 0.0),
            nu: Vec3::new(0.0, 0.0, 1.0),
        };
        assert_eq!(s.chart_point(x0, &frame, LocalCartesian::default()).unwrap(), x0);
        let y = s.chart_point(x0, &frame, LocalCartesian::new(0.6, 0.0)).unwrap();
        assert!(close(y, Vec3::new(0.6, 0.0, 0.8), 1e-14));
        assert!(matches!(
            s.chart_point(x0, &frame, LocalCartesian::new(0.95, 0.0)),
            Err(Error::OutsidePatch { .. })
        ));
    }

    #[test]
    fn polar_examples() {
        let p = LocalCartesian::new(3e-2, 4e-2).to_polar();
        assert!((p.rho - 5e-2).abs() < 1e-17);
        assert!((p.xi_hat[0] - 0.6).abs() < 1e-15 && (p.xi_hat[1] - 0.8).abs() < 1e-15);
        let z = LocalCartesian::default().to_polar();
        assert_eq!((z.rho, z.xi_hat), (0.0, [1.0, 0.0]));
        let back = p.to_cartesian();
        assert!((back.xi[0] - 3e-2).abs() < 1e-15 && (back.xi[1] - 4e-2).abs() < 1e-15);
    }

    #[test]
    fn charts_land_on_surface_with_outward_orientation() {
        let surfaces = [
            Surface::unit_sphere(),
            Surface::ellipsoid(1.5, 1.0, 0.8).unwrap(),
            Surface::perturbed_sphere(0.1).unwrap(),
        ];
        for s in surfaces {
            for face in 0..6 {
                for &(u, v) in &[(0.0, 0.0), (0.7, -0.3), (-1.0, 1.0), (0.2, 0.9)] {
                    let c = s.chart(face, u, v);
                    assert!(s.constraint(c.point).abs() < 1e-14);
                    let n = c.du.cross(c.dv);
                    assert!(n.dot(s.normal_unchecked(c.point)) > 0.0, "face {face}");
                    assert!((n.normalized() - s.normal_unchecked(c.point)).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn chart_derivatives_match_finite_differences() {
        let s = Surface::perturbed_sphere(0.08).unwrap();
        let h = 1e-6;
        for face in 0..6 {
            let (u, v) = (0.31, -0.47);
            let c = s.chart(face, u, v);
            let fu = (s.chart(face, u + h, v).point - s.chart(face, u - h, v).point) / (2.0 * h);
            let fv = (s.chart(face, u, v + h).point - s.chart(face, u, v - h).point) / (2.0 * h);
            assert!((fu - c.du).norm() < 1e-8);
            assert!((fv - c.dv).norm() < 1e-8);
        }
    }
}
