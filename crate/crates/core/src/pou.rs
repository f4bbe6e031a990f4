//! Nodal partition-of-unity pairs `zeta_a + zeta_hat_a = 1` and the cutoff
//! `eta_x` used to localize the moment conditions.
//!
//! Two families are provided:
//!
//! * **Nodal** (used for `p = 0`): `zeta_hat_a` is at least one half on the
//!   Euclidean Voronoi cell of `x_a`, falls to zero within an offset of
//!   `theta * eps_a / 2` outside the cell (`eps_a` the nearest-neighbour
//!   distance), and satisfies `zeta_hat_a(x_b) = delta_ab`. Inside the cell
//!   `zeta_a = (|x - x_a| / (|x - x_a| + beta_a(x)))^2 / 2` where `beta_a` is
//!   the distance to the nearest bisector plane.
//! * **Radial** (used for `p >= 1`): `zeta_a(x) = ramp(|x - x_a| / r)` with a
//!   common radius `r = kappa_p * h`.

use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use crate::error::{Error, Result};
use crate::meshquad::NodeSet;
use crate::vec3::Vec3;

/// `max_{0<t<1} S(t) / t^2` for the quintic smoothstep `S`.
pub const QUINTIC_QUADRATIC_BOUND: f64 = 2.010_018_882_638_831;

/// Quintic smoothstep `6t^5 - 15t^4 + 10t^3` clamped to `[0, 1]`; C^2 at both ends.
#[inline]
pub fn smoothstep(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        t * t * t * (10.0 + t * (-15.0 + 6.0 * t))
    }
}

/// Radial profile of `zeta` as a function of `t = |x - x_a| / r`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Ramp {
    /// `min(1, t^2)`; only continuous at `t = 1`.
    Quadratic,
    /// Quintic smoothstep; C^2.
    Quintic,
}

impl Ramp {
    #[inline]
    pub fn eval(self, t: f64) -> f64 {
        match self {
            Ramp::Quadratic => (t * t).min(1.0),
            Ramp::Quintic => smoothstep(t),
        }
    }

    /// Constant `C` with `ramp(t) <= C t^2`.
    pub fn quadratic_bound(self) -> f64 {
        match self {
            Ramp::Quadratic => 1.0,
            Ramp::Quintic => QUINTIC_QUADRATIC_BOUND,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PouConfig {
    /// Offset fraction for the nodal (`p = 0`) family; must lie in (0, 1).
    pub theta: f64,
    /// Support radius multiplier: `r = kappa_scale * (p + 1) * h` for `p >= 1`.
    pub kappa_scale: f64,
    pub ramp: Ramp,
}

impl Default for PouConfig {
    fn default() -> Self {
        PouConfig {
            theta: 0.99,
            kappa_scale: 0.35,
            ramp: Ramp::Quintic,
        }
    }
}

#[derive(Clone, Debug)]
enum Family {
    Nodal {
        theta: f64,
        /// Nearest-neighbour distance per node.
        nearest: Vec<f64>,
        /// Radius containing the support of `zeta_hat_a`.
        reach: Vec<f64>,
        /// Nodes whose bisector can bound the cell of `a`, with their distance.
        neighbors: Vec<Vec<(u32, f64)>>,
    },
    Radial {
        radius: f64,
        ramp: Ramp,
    },
}

#[derive(Clone, Debug)]
pub struct PartitionOfUnity {
    positions: Vec<Vec3>,
    p: usize,
    family: Family,
}

/// Number of monomials of total degree `<= p` in two variables.
pub fn basis_size(p: usize) -> usize {
    (p + 1) * (p + 2) / 2
}

/// Build the partition of unity for correction degree `p` on `nodes` with
/// mesh size `h`, then audit it at every node.
pub fn build_pou(nodes: &NodeSet, p: usize, h: f64, config: &PouConfig) -> Result<PartitionOfUnity> {
    let positions: Vec<Vec3> = nodes.positions().collect();
    if positions.len() < 2 {
        return Err(Error::InvalidParameter("partition of unity needs at least two nodes"));
    }
    let pou = if p == 0 {
        if !(config.theta > 0.0 && config.theta < 1.0) {
            return Err(Error::InvalidParameter("pou.theta must lie in (0, 1)"));
        }
        build_nodal(positions, h, config.theta)
    } else {
        if !(config.kappa_scale > 0.0) {
            return Err(Error::InvalidParameter("pou.kappa_scale must be positive"));
        }
        PartitionOfUnity {
            positions,
            p,
            family: Family::Radial {
                radius: config.kappa_scale * (p + 1) as f64 * h,
                ramp: config.ramp,
            },
        }
    };
    let audit_points: Vec<Vec3> = pou.positions.clone();
    pou.audit(&audit_points)?;
    Ok(pou)
}

fn build_nodal(positions: Vec<Vec3>, h: f64, theta: f64) -> PartitionOfUnity {
    let n = positions.len();
    let mut nearest = vec![f64::INFINITY; n];
    for a in 0..n {
        for b in a + 1..n {
            let d = positions[a].distance(positions[b]);
            nearest[a] = nearest[a].min(d);
            nearest[b] = nearest[b].min(d);
        }
    }
    // Every surface point lies within h of some node, so the support of
    // zeta_hat_a stays inside |x - x_a| < h + theta * eps_a, and only nodes
    // closer than eps_a + 4 * reach can realize the minimal bisector distance.
    let reach: Vec<f64> = nearest.iter().map(|&e| h + theta * e).collect();
    let mut neighbors = vec![Vec::new(); n];
    for a in 0..n {
        let lim = nearest[a] + 4.0 * reach[a];
        for b in 0..n {
            if b == a {
                continue;
            }
            let d = positions[a].distance(positions[b]);
            if d <= lim {
                neighbors[a].push((b as u32, d));
            }
        }
    }
    PartitionOfUnity {
        positions,
        p: 0,
        family: Family::Nodal {
            theta,
            nearest,
            reach,
            neighbors,
        },
    }
}

impl PartitionOfUnity {
    pub fn degree(&self) -> usize {
        self.p
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn position(&self, a: usize) -> Vec3 {
        self.positions[a]
    }

    pub fn is_nodal(&self) -> bool {
        matches!(self.family, Family::Nodal { .. })
    }

    /// Radius of a ball around `x_a` containing the support of `zeta_hat_a`.
    pub fn support_radius(&self, a: usize) -> f64 {
        match &self.family {
            Family::Nodal { reach, .. } => reach[a],
            Family::Radial { radius, .. } => *radius,
        }
    }

    /// Radius `r_a` with `zeta_a(x) <= (|x - x_a| / r_a)^2` everywhere.
    pub fn vanishing_radius(&self, a: usize) -> f64 {
        match &self.family {
            Family::Nodal { nearest, .. } => 0.5 * nearest[a],
            Family::Radial { radius, ramp } => radius / ramp.quadratic_bound().sqrt(),
        }
    }

    /// `zeta_a(x)`.
    pub fn zeta(&self, a: usize, x: Vec3) -> f64 {
        let delta = x.distance(self.positions[a]);
        match &self.family {
            Family::Radial { radius, ramp } => ramp.eval(delta / radius),
            Family::Nodal {
                theta,
                nearest,
                reach,
                neighbors,
            } => {
                if delta >= reach[a] {
                    return 1.0;
                }
                let d2 = delta * delta;
                let beta = neighbors[a]
                    .iter()
                    .map(|&(b, dist)| (x.distance(self.positions[b as usize]).powi(2) - d2) / (2.0 * dist))
                    .fold(f64::INFINITY, f64::min);
                if beta >= 0.0 {
                    if delta == 0.0 {
                        0.0
                    } else {
                        let t = delta / (delta + beta);
                        0.5 * t * t
                    }
                } else {
                    let t = -beta / (0.5 * theta * nearest[a]);
                    0.5 + 0.5 * smoothstep(t)
                }
            }
        }
    }

    /// `zeta_hat_a(x) = 1 - zeta_a(x)`.
    pub fn zeta_hat(&self, a: usize, x: Vec3) -> f64 {
        1.0 - self.zeta(a, x)
    }

    /// `J_x = { b : zeta_hat_b(x) > 0 }` with the values `zeta_hat_b(x)`.
    /// A point exactly on a support boundary is outside.
    pub fn support_set(&self, x: Vec3) -> Vec<(usize, f64)> {
        let mut out = Vec::new();
        match &self.family {
            Family::Radial { radius, ramp } => {
                let r2 = radius * radius;
                for (b, pos) in self.positions.iter().enumerate() {
                    let d2 = (x - *pos).norm_squared();
                    if d2 < r2 {
                        let zh = 1.0 - ramp.eval(d2.sqrt() / radius);
                        if zh > 0.0 {
                            out.push((b, zh));
                        }
                    }
                }
            }
            Family::Nodal { reach, .. } => {
                for (b, pos) in self.positions.iter().enumerate() {
                    if x.distance(*pos) < reach[b] {
                        let zh = self.zeta_hat(b, x);
                        if zh > 0.0 {
                            out.push((b, zh));
                        }
                    }
                }
            }
        }
        out
    }

    /// Check the coverage requirement at `points`: for `p >= 1` every point
    /// must see `(p+1)(p+2)/2` supports; for `p = 0` the sum of `zeta_hat`
    /// must be at least one half.
    pub fn audit(&self, points: &[Vec3]) -> Result<()> {
        let mut worst: Option<(Vec3, f64)> = None;
        let required = if self.p == 0 { 0.5 } else { basis_size(self.p) as f64 };
        for &x in points {
            let set = self.support_set(x);
            let found = if self.p == 0 {
                set.iter().map(|&(_, v)| v).sum::<f64>()
            } else {
                set.len() as f64
            };
            if found < required && worst.is_none_or(|(_, w)| found < w) {
                worst = Some((x, found));
            }
        }
        match worst {
            Some((point, found)) => Err(Error::SupportAudit { point, found, required }),
            None => Ok(()),
        }
    }
}

/// Cutoff `eta_x`: one on the inner ball, zero outside the outer ball, with a
/// quintic ramp in the chordal distance in between.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Cutoff {
    /// `eta == 1`; the `p = 0` choice.
    Unity,
    Ramp {
        inner: f64,
        outer: f64,
    },
}

impl Cutoff {
    /// Inner radius `d/4`, outer radius `d/2`.
    pub fn standard(lyapunov_radius: f64) -> Self {
        Cutoff::Ramp {
            inner: 0.25 * lyapunov_radius,
            outer: 0.5 * lyapunov_radius,
        }
    }

    #[inline]
    pub fn eval_distance(&self, r: f64) -> f64 {
        match *self {
            Cutoff::Unity => 1.0,
            Cutoff::Ramp { inner, outer } => 1.0 - smoothstep((r - inner) / (outer - inner)),
        }
    }

    /// `eta_x(y)`.
    #[inline]
    pub fn eta(&self, x: Vec3, y: Vec3) -> f64 {
        match self {
            Cutoff::Unity => 1.0,
            _ => self.eval_distance(x.distance(y)),
        }
    }

    /// Radius beyond which the cutoff vanishes (infinite for `Unity`).
    pub fn outer_radius(&self) -> f64 {
        match *self {
            Cutoff::Unity => f64::INFINITY,
            Cutoff::Ramp { outer, .. } => outer,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Surface;
    use crate::meshquad::{build_mesh, quadrature_nodes};

    #[test]
    fn quintic_bound_constant() {
        let mut m: f64 = 0.0;
        for i in 1..200_000 {
            let t = i as f64 / 200_000.0;
            m = m.max(smoothstep(t) / (t * t));
        }
        assert!(m <= QUINTIC_QUADRATIC_BOUND && m > QUINTIC_QUADRATIC_BOUND - 1e-9);
    }

    #[test]
    fn cutoff_plateau_support_and_midpoint() {
        let d = 0.9;
        let c = Cutoff::standard(d);
        assert_eq!(c.eval_distance(0.2 * d), 1.0);
        assert_eq!(c.eval_distance(0.25 * d), 1.0);
        assert_eq!(c.eval_distance(0.5 * d), 0.0);
        assert_eq!(c.eval_distance(0.7 * d), 0.0);
        assert!((c.eval_distance(0.375 * d) - 0.5).abs() < 1e-15);
        assert_eq!(Cutoff::Unity.eval_distance(100.0), 1.0);
    }

    fn sphere_nodes(level: u32, q: usize) -> (NodeSet, f64) {
        let s = Surface::unit_sphere();
        let m = build_mesh(&s, level).unwrap();
        (quadrature_nodes(&s, &m, q), m.h)
    }

    #[test]
    fn radial_zeta_examples() {
        let (nodes, h) = sphere_nodes(2, 2);
        let cfg = PouConfig {
            ramp: Ramp::Quadratic,
            ..PouConfig::default()
        };
        let pou = build_pou(&nodes, 1, h, &cfg).unwrap();
        let r = pou.support_radius(0);
        let xa = pou.position(0);
        assert_eq!(pou.zeta(0, xa), 0.0);
        assert_eq!(pou.zeta_hat(0, xa), 1.0);
        let t1 = crate::geometry::TangentFrame::from_normal(xa.normalized()).t1;
        assert!((pou.zeta(0, xa + t1 * (0.5 * r)) - 0.25).abs() < 1e-15);
        assert!((pou.zeta(0, xa + t1 * r) - 1.0).abs() < 1e-15);
        assert_eq!(pou.zeta(0, xa + t1 * (1.5 * r)), 1.0);
    }

    #[test]
    fn nodal_property_and_complementarity() {
        for q in [2, 3] {
            let (nodes, h) = sphere_nodes(1, q);
            let pou = build_pou(&nodes, 0, h, &PouConfig::default()).unwrap();
            for a in 0..nodes.len() {
                let xa = pou.position(a);
                let set = pou.support_set(xa);
                assert_eq!(set, vec![(a, 1.0)], "q={q} a={a}");
                for b in 0..nodes.len() {
                    let expected = if a == b { 0.0 } else { 1.0 };
                    assert_eq!(pou.zeta(b, xa), expected);
                }
            }
        }
    }

    #[test]
    fn support_audit_failure_names_a_point() {
        let (nodes, h) = sphere_nodes(1, 2);
        let cfg = PouConfig {
            kappa_scale: 0.05,
            ..PouConfig::default()
        };
        match build_pou(&nodes, 2, h, &cfg) {
            Err(Error::SupportAudit { found, required, .. }) => {
                assert_eq!(required, 6.0);
                assert!(found < 6.0);
            }
            other => panic!("expected audit failure, got {other:?}"),
        }
    }
}
