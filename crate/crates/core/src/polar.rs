//! Integration of weakly singular integrands over a surface cap around `x`
//! in local polar coordinates `xi = rho * (cos t, sin t)`.
//!
//! For `mu = 1` the area element `rho d(rho) dt` cancels the `1/|x - y|`
//! singularity, so the radial integrand is smooth and Gauss-Legendre converges
//! fast. The cap is bounded by chordal distance; radial panels break at every
//! requested chordal radius so that cutoff ramps are integrated panel-wise.
//! The angular direction uses the trapezoid rule, which is spectrally accurate
//! for the periodic angular integrand.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use crate::error::{Error, Result};
use crate::gauss::Rule1d;
use crate::geometry::{Lifted, Surface, SurfacePoint, TangentFrame};
use crate::kernels::SingularKernel;

/// Resolution of the polar product rule.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PolarRule {
    /// Trapezoid points in angle.
    pub angles: usize,
    /// Gauss points per radial panel.
    pub radial: usize,
}

impl PolarRule {
    pub fn doubled(self) -> Self {
        PolarRule {
            angles: 2 * self.angles,
            radial: 2 * self.radial,
        }
    }
}

/// A sample handed to the integrand callback.
pub struct CapSample<'a> {
    pub y: &'a SurfacePoint,
    pub xi: [f64; 2],
    /// Chordal distance `|y - x|`.
    pub distance: f64,
    /// `H(x, y) dA_y` quadrature weight.
    pub kernel_weight: f64,
}

/// Solve `|psi_x(rho xi_hat) - x| = r` for `rho`.
fn radius_for_chord(surface: &Surface, x: &SurfacePoint, frame: &TangentFrame, dir: [f64; 2], r: f64) -> Option<f64> {
    let tau = frame.t1 * dir[0] + frame.t2 * dir[1];
    let chord = |rho: f64| -> Option<(f64, f64)> {
        let l = surface.lift(x.position, frame, [rho * dir[0], rho * dir[1]])?;
        let diff = l.point.position - x.position;
        let dist = diff.norm();
        let ds = l.slope[0] * dir[0] + l.slope[1] * dir[1];
        let dy = tau + frame.nu * ds;
        Some((dist - r, diff.dot(dy) / dist))
    };
    // Projection shortens distances, so the root lies in (0, r].
    let (mut lo, mut hi) = (0.0, r);
    let mut rho = r;
    for _ in 0..60 {
        let (f, df) = chord(rho)?;
        if f.abs() <= 1e-15 * r {
            return Some(rho);
        }
        if f > 0.0 {
            hi = rho;
        } else {
            lo = rho;
        }
        let mut next = rho - f / df;
        if !(next > lo && next < hi) || !df.is_finite() || df <= 0.0 {
            next = 0.5 * (lo + hi);
        }
        if (next - rho).abs() <= 1e-15 * r {
            return Some(next);
        }
        rho = next;
    }
    Some(rho)
}

/// Integrate over the cap `|y - x| <= radii.last()`, calling `integrand` at
/// every quadrature point. `radii` must be ascending chordal breakpoints.
pub fn integrate_cap<K, F>(
    surface: &Surface,
    kernel: &K,
    x: &SurfacePoint,
    frame: &TangentFrame,
    radii: &[f64],
    rule: PolarRule,
    mut integrand: F,
) -> Result<()>
where
    K: SingularKernel,
    F: FnMut(&CapSample<'_>),
{
    let outer = *radii
        .last()
        .ok_or(Error::InvalidParameter("cap needs at least one radius"))?;
    if !(outer < surface.lyapunov_radius()) {
        return Err(Error::OutsidePatch { xi_norm: outer });
    }
    let gauss = Rule1d::gauss_legendre(rule.radial);
    let dtheta = 2.0 * PI / rule.angles as f64;
    let mut breaks = vec![0.0; radii.len() + 1];
    for k in 0..rule.angles {
        let theta = (k as f64 + 0.5) * dtheta;
        let dir = [theta.cos(), theta.sin()];
        for (j, &r) in radii.iter().enumerate() {
            breaks[j + 1] = radius_for_chord(surface, x, frame, dir, r).ok_or(Error::OutsidePatch { xi_norm: r })?;
        }
        for panel in breaks.windows(2) {
            for (rho, w) in gauss.mapped(panel[0], panel[1]) {
                let xi = [rho * dir[0], rho * dir[1]];
                let Lifted { point, jacobian, .. } = surface
                    .lift(x.position, frame, xi)
                    .ok_or(Error::OutsidePatch { xi_norm: rho })?;
                let distance = point.position.distance(x.position);
                let kernel_weight = kernel.eval(x, &point) * rho * jacobian * w * dtheta;
                integrand(&CapSample {
                    y: &point,
                    xi,
                    distance,
                    kernel_weight,
                });
            }
        }
    }
    Ok(())
}

/// Run `integrate_cap` at successively doubled resolution until two
/// consecutive results agree to `accuracy` in every component.
pub fn integrate_cap_adaptive<K, F>(
    surface: &Surface,
    kernel: &K,
    x: &SurfacePoint,
    frame: &TangentFrame,
    radii: &[f64],
    start: PolarRule,
    max_angles: usize,
    accuracy: f64,
    components: usize,
    mut integrand: F,
) -> Result<Vec<f64>>
where
    K: SingularKernel,
    F: FnMut(&CapSample<'_>, &mut [f64]),
{
    let mut run = |rule: PolarRule| -> Result<Vec<f64>> {
        let mut acc = vec![0.0; components];
        integrate_cap(surface, kernel, x, frame, radii, rule, |s| integrand(s, &mut acc))?;
        Ok(acc)
    };
    let mut rule = start;
    let mut coarse = run(rule)?;
    loop {
        rule = rule.doubled();
        let fine = run(rule)?;
        let err = coarse.iter().zip(&fine).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        if err <= accuracy {
            return Ok(fine);
        }
        if rule.angles >= max_angles {
            return Err(Error::Accuracy {
                achieved: err,
                requested: accuracy,
            });
        }
        coarse = fine;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::InverseDistance;
    use crate::vec3::Vec3;

    #[test]
    fn cap_area_of_inverse_distance_on_sphere() {
        // int_{|y-x|<=r} 1/|x-y| dA on the unit sphere equals 2 pi r.
        let s = Surface::unit_sphere();
        let x0 = Vec3::new(0.2, 0.3, -0.9).normalized();
        let x = s.point(x0).unwrap();
        let frame = s.tangent_frame(x0).unwrap();
        let mut total = 0.0;
        integrate_cap(
            &s,
            &InverseDistance,
            &x,
            &frame,
            &[0.2, 0.45],
            PolarRule { angles: 16, radial: 12 },
            |smp| total += smp.kernel_weight,
        )
        .unwrap();
        assert!((total - 2.0 * PI * 0.45).abs() < 1e-13, "{total}");
    }
}
