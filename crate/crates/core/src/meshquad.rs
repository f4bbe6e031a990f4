//! Uniformly refined cube-sphere decomposition of a surface and the tensor
//! Gauss-Legendre nodes built on it.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::gauss::Rule1d;
use crate::geometry::{Surface, SurfacePoint};
use crate::vec3::Vec3;

/// Refinement budget guard for the dense solver.
pub const DEFAULT_MAX_LEVEL: u32 = 7;

/// Quadrilateral element: a parameter rectangle of one cube-face chart.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Element {
    pub face: usize,
    pub u: [f64; 2],
    pub v: [f64; 2],
}

impl Element {
    /// Split into `k x k` congruent parameter sub-rectangles.
    pub fn subdivide(&self, k: usize) -> impl Iterator<Item = Element> + '_ {
        let du = (self.u[1] - self.u[0]) / k as f64;
        let dv = (self.v[1] - self.v[0]) / k as f64;
        (0..k * k).map(move |idx| {
            let (i, j) = (idx % k, idx / k);
            Element {
                face: self.face,
                u: [self.u[0] + i as f64 * du, self.u[0] + (i + 1) as f64 * du],
                v: [self.v[0] + j as f64 * dv, self.v[0] + (j + 1) as f64 * dv],
            }
        })
    }

    /// Tensor rule on this element: `(point, weight, (u, v))`, with the chart
    /// Jacobian folded into the weight.
    pub fn quadrature<'a>(
        &'a self,
        surface: &'a Surface,
        rule: &'a Rule1d,
    ) -> impl Iterator<Item = (SurfacePoint, f64, [f64; 2])> + 'a {
        rule.mapped(self.v[0], self.v[1]).flat_map(move |(v, wv)| {
            rule.mapped(self.u[0], self.u[1]).map(move |(u, wu)| {
                let c = surface.chart(self.face, u, v);
                let normal = c.du.cross(c.dv);
                let area = normal.norm();
                (
                    SurfacePoint {
                        position: c.point,
                        normal: normal / area,
                    },
                    wu * wv * area,
                    [u, v],
                )
            })
        })
    }

    /// Integrate a field over the element with a tensor rule.
    pub fn integrate(&self, surface: &Surface, rule: &Rule1d, mut f: impl FnMut(&SurfacePoint) -> f64) -> f64 {
        self.quadrature(surface, rule).map(|(p, w, _)| w * f(&p)).sum()
    }

    /// Diameter estimate from `samples` points per edge (corners included).
    pub fn diameter(&self, surface: &Surface, samples: usize) -> f64 {
        let mut pts = Vec::with_capacity(4 * samples);
        let n = samples.max(2) - 1;
        for k in 0..n {
            let t = k as f64 / n as f64;
            let u = self.u[0] + t * (self.u[1] - self.u[0]);
            let v = self.v[0] + t * (self.v[1] - self.v[0]);
            let u_rev = self.u[1] - t * (self.u[1] - self.u[0]);
            let v_rev = self.v[1] - t * (self.v[1] - self.v[0]);
            pts.push(surface.chart(self.face, u, self.v[0]).point);
            pts.push(surface.chart(self.face, self.u[1], v).point);
            pts.push(surface.chart(self.face, u_rev, self.v[1]).point);
            pts.push(surface.chart(self.face, self.u[0], v_rev).point);
        }
        let mut d: f64 = 0.0;
        for i in 0..pts.len() {
            for j in i + 1..pts.len() {
                d = d.max(pts[i].distance(pts[j]));
            }
        }
        d
    }
}

/// Element decomposition of a surface at a refinement level.
#[derive(Clone, Debug)]
pub struct SurfaceMesh {
    pub level: u32,
    pub elements: Vec<Element>,
    /// Maximum element diameter.
    pub h: f64,
    pub areas: Vec<f64>,
}

impl SurfaceMesh {
    pub fn total_area(&self) -> f64 {
        self.areas.iter().sum()
    }

    /// Ratio of the largest to the smallest element area.
    pub fn area_ratio(&self) -> f64 {
        let max = self.areas.iter().cloned().fold(0.0, f64::max);
        let min = self.areas.iter().cloned().fold(f64::INFINITY, f64::min);
        max / min
    }

    /// Integrate a field over the whole surface with `q` Gauss points per
    /// direction on every element.
    pub fn integrate(&self, surface: &Surface, q: usize, mut f: impl FnMut(&SurfacePoint) -> f64) -> f64 {
        let rule = Rule1d::gauss_legendre(q);
        self.elements.iter().map(|e| e.integrate(surface, &rule, &mut f)).sum()
    }
}

/// `6 * 4^level` elements; `level <= max_level`.
pub fn build_mesh(surface: &Surface, level: u32) -> Result<SurfaceMesh> {
    build_mesh_with_budget(surface, level, DEFAULT_MAX_LEVEL)
}

pub fn build_mesh_with_budget(surface: &Surface, level: u32, max_level: u32) -> Result<SurfaceMesh> {
    if level > max_level {
        return Err(Error::LevelOverBudget { level, max_level });
    }
    let k = 1usize << level;
    let step = 2.0 / k as f64;
    let mut elements = Vec::with_capacity(6 * k * k);
    for face in 0..6 {
        for j in 0..k {
            for i in 0..k {
                elements.push(Element {
                    face,
                    u: [-1.0 + i as f64 * step, -1.0 + (i + 1) as f64 * step],
                    v: [-1.0 + j as f64 * step, -1.0 + (j + 1) as f64 * step],
                });
            }
        }
    }
    let area_rule = Rule1d::gauss_legendre(10);
    let areas: Vec<f64> = elements
        .iter()
        .map(|e| e.integrate(surface, &area_rule, |_| 1.0))
        .collect();
    let h = elements.iter().map(|e| e.diameter(surface, 9)).fold(0.0, f64::max);
    Ok(SurfaceMesh {
        level,
        elements,
        h,
        areas,
    })
}

/// Nominal quadrature order `2q` of the tensor Gauss rule.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct QuadratureOrder {
    pub q: usize,
}

impl QuadratureOrder {
    pub fn new(q: usize) -> Result<Self> {
        if q == 0 {
            return Err(Error::InvalidParameter("quadrature needs q >= 1"));
        }
        Ok(QuadratureOrder { q })
    }

    pub fn nominal_order(&self) -> usize {
        2 * self.q
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Node {
    pub point: SurfacePoint,
    pub weight: f64,
    pub element: usize,
    /// Index within the element's tensor rule.
    pub local: usize,
    pub param: [f64; 2],
}

impl Node {
    #[inline]
    pub fn position(&self) -> Vec3 {
        self.point.position
    }
}

/// Quadrature nodes and weights for a whole mesh.
#[derive(Clone, Debug)]
pub struct NodeSet {
    pub nodes: Vec<Node>,
    pub per_element: usize,
    pub rule: Rule1d,
}

impl NodeSet {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn positions(&self) -> impl Iterator<Item = Vec3> + '_ {
        self.nodes.iter().map(|n| n.position())
    }

    /// Discrete integral `sum_b f(x_b) W_b`.
    pub fn integrate(&self, mut f: impl FnMut(&SurfacePoint) -> f64) -> f64 {
        self.nodes.iter().map(|n| n.weight * f(&n.point)).sum()
    }

    /// Per-element weight sums.
    pub fn element_weight_sums(&self, mesh: &SurfaceMesh) -> Vec<f64> {
        let mut s = alloc::vec![0.0; mesh.elements.len()];
        for n in &self.nodes {
            s[n.element] += n.weight;
        }
        s
    }

    /// Smallest parameter-space distance from a node to its element boundary,
    /// relative to the element half-width. Zero for closed rules.
    pub fn interior_margin(&self, mesh: &SurfaceMesh) -> f64 {
        self.nodes
            .iter()
            .map(|n| {
                let e = &mesh.elements[n.element];
                let hu = 0.5 * (e.u[1] - e.u[0]);
                let hv = 0.5 * (e.v[1] - e.v[0]);
                let du = (n.param[0] - e.u[0]).min(e.u[1] - n.param[0]) / hu;
                let dv = (n.param[1] - e.v[0]).min(e.v[1] - n.param[1]) / hv;
                du.min(dv)
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// Minimum pairwise node distance (brute force).
    pub fn min_separation(&self) -> f64 {
        let mut best = f64::INFINITY;
        for (i, a) in self.nodes.iter().enumerate() {
            for b in &self.nodes[i + 1..] {
                best = best.min(a.position().distance(b.position()));
            }
        }
        best
    }
}

/// Tensor Gauss-Legendre nodes with `q` points per direction on every element.
pub fn quadrature_nodes(surface: &Surface, mesh: &SurfaceMesh, q: usize) -> NodeSet {
    quadrature_nodes_with_rule(surface, mesh, Rule1d::gauss_legendre(q.max(1)))
}

/// Tensor nodes for an arbitrary one-dimensional rule.
pub fn quadrature_nodes_with_rule(surface: &Surface, mesh: &SurfaceMesh, rule: Rule1d) -> NodeSet {
    let per_element = rule.len() * rule.len();
    let mut nodes = Vec::with_capacity(mesh.elements.len() * per_element);
    for (ei, e) in mesh.elements.iter().enumerate() {
        for (local, (mut point, weight, param)) in e.quadrature(surface, &rule).enumerate() {
            // Normal from the constraint gradient, identical to what
            // `Surface::point` reports for the same position.
            point.normal = surface.normal_unchecked(point.position);
            nodes.push(Node {
                point,
                weight,
                element: ei,
                local,
                param,
            });
        }
    }
    NodeSet {
        nodes,
        per_element,
        rule,
    }
}

/// Normalized local truncation error
/// `|int_e f - sum_q f(x_q) W_q| / |e|` with a refined reference integral
/// (`q + 6` points on a `4 x 4` subdivision).
pub fn local_truncation(
    surface: &Surface,
    element: &Element,
    mut f: impl FnMut(&SurfacePoint) -> f64,
    q: usize,
) -> f64 {
    let rule = Rule1d::gauss_legendre(q);
    let fine = Rule1d::gauss_legendre(q + 6);
    let mut reference = 0.0;
    let mut area = 0.0;
    for sub in element.subdivide(4) {
        for (p, w, _) in sub.quadrature(surface, &fine) {
            reference += w * f(&p);
            area += w;
        }
    }
    let approx = element.integrate(surface, &rule, f);
    (reference - approx).abs() / area
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;

    #[test]
    fn element_counts() {
        let s = Surface::unit_sphere();
        assert_eq!(build_mesh(&s, 0).unwrap().elements.len(), 6);
        assert_eq!(build_mesh(&s, 2).unwrap().elements.len(), 96);
        assert!(matches!(
            build_mesh(&s, 8),
            Err(Error::LevelOverBudget { level: 8, .. })
        ));
    }

    #[test]
    fn sphere_area_and_second_moment() {
        let s = Surface::unit_sphere();
        let m = build_mesh(&s, 3).unwrap();
        // Reference from an independent tensor-Gauss evaluation of the
        // equiangular area element.
        let q3 = quadrature_nodes(&s, &m, 3).integrate(|_| 1.0);
        assert!((q3 - 4.0 * PI + 1.446_763_064_905_098_9e-8).abs() < 5e-13);
        let nodes = quadrature_nodes(&s, &m, 6);
        assert!((nodes.integrate(|_| 1.0) - 4.0 * PI).abs() < 1e-9);
        let z2 = nodes.integrate(|p| p.position.z() * p.position.z());
        assert!((z2 - 4.0 * PI / 3.0).abs() < 1e-8);
        assert!((m.total_area() - 4.0 * PI).abs() < 1e-8 * 4.0 * PI);
    }

    #[test]
    fn truncation_of_constants_and_linears() {
        let s = Surface::unit_sphere();
        let m = build_mesh(&s, 4).unwrap();
        let e = m.elements[37];
        // Curved elements: even constants see the mapping error at q = 2.
        let tau = local_truncation(&s, &e, |_| 1.0, 2);
        assert!((tau / 6.885_727_348_187_579e-8 - 1.0).abs() < 1e-4, "{tau}");
        assert!(local_truncation(&s, &e, |_| 1.0, 8) < 1e-12);
        let m6 = build_mesh(&s, 6).unwrap();
        let e6 = m6.elements[1000];
        let tau = local_truncation(&s, &e6, |p| p.position.x(), 2);
        assert!((tau / 5.563_494_848_868_311e-10 - 1.0).abs() < 1e-4, "{tau}");
    }

    #[test]
    fn gauss_nodes_are_interior_and_closed_nodes_are_not() {
        let s = Surface::unit_sphere();
        let m = build_mesh(&s, 1).unwrap();
        let open = quadrature_nodes(&s, &m, 2);
        let margin = Rule1d::gauss_legendre(2).boundary_margin();
        assert!(open.interior_margin(&m) >= margin - 1e-12);
        let closed = quadrature_nodes_with_rule(&s, &m, Rule1d::closed_newton_cotes(3));
        assert!(closed.interior_margin(&m) <= 1e-15);
    }
}
