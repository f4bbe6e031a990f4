//! One-dimensional quadrature rules on the reference interval [-1, 1].

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

/// A one-dimensional rule on [-1, 1].
#[derive(Clone, Debug, PartialEq)]
pub struct Rule1d {
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule1d {
    /// Gauss-Legendre rule with `q` points, exact for polynomials of degree `2q - 1`.
    pub fn gauss_legendre(q: usize) -> Self {
        assert!(q >= 1, "Gauss-Legendre rule needs at least one point");
        let mut points = vec![0.0; q];
        let mut weights = vec![0.0; q];
        let m = q.div_ceil(2);
        for i in 0..m {
            // Tricomi initial guess followed by Newton on P_q.
            let mut x = (PI * (i as f64 + 0.75) / (q as f64 + 0.5)).cos();
            let mut dp = 1.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(q, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(q, x);
            dp = if d.is_finite() { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            points[i] = -x;
            points[q - 1 - i] = x;
            weights[i] = w;
            weights[q - 1 - i] = w;
        }
        if q % 2 == 1 {
            points[q / 2] = 0.0;
        }
        Rule1d { points, weights }
    }

    /// Closed Newton-Cotes rule with `q >= 2` equispaced points including the endpoints.
    ///
    /// Only used as a negative control for the open-rule requirement.
    pub fn closed_newton_cotes(q: usize) -> Self {
        assert!(q >= 2, "closed rule needs both endpoints");
        let points: Vec<f64> = (0..q).map(|i| -1.0 + 2.0 * i as f64 / (q - 1) as f64).collect();
        // Weights from exactness on monomials; Vandermonde is tiny.
        let mut a = crate::linalg::DenseMatrix::zeros(q, q);
        let mut rhs = vec![0.0; q];
        for k in 0..q {
            for (j, &x) in points.iter().enumerate() {
                a[(k, j)] = x.powi(k as i32);
            }
            rhs[k] = if k % 2 == 0 { 2.0 / (k as f64 + 1.0) } else { 0.0 };
        }
        let weights = a
            .lu()
            .and_then(|lu| lu.solve(&rhs))
            .expect("Newton-Cotes Vandermonde is nonsingular");
        Rule1d { points, weights }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Points and weights mapped affinely onto `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.points
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (mid + half * x, half * w))
    }

    /// Smallest distance from a node to the interval ends, in reference units.
    pub fn boundary_margin(&self) -> f64 {
        self.points.iter().map(|&x| 1.0 - x.abs()).fold(f64::INFINITY, f64::min)
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_two_point_abscissae() {
        let r = Rule1d::gauss_legendre(2);
        let g = 1.0 / 3f64.sqrt();
        assert!((r.points[0] + g).abs() < 1e-15);
        assert!((r.points[1] - g).abs() < 1e-15);
        assert!((r.weights[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn gauss_exact_up_to_degree_2q_minus_1() {
        for q in 1..=20 {
            let r = Rule1d::gauss_legendre(q);
            for k in 0..2 * q {
                let s: f64 = r
                    .points
                    .iter()
                    .zip(&r.weights)
                    .map(|(&x, &w)| w * x.powi(k as i32))
                    .sum();
                let exact = if k % 2 == 0 { 2.0 / (k as f64 + 1.0) } else { 0.0 };
                assert!((s - exact).abs() < 1e-13, "q={q} k={k} s={s}");
            }
        }
    }

    #[test]
    fn gauss_is_open_and_newton_cotes_is_closed() {
        assert!(Rule1d::gauss_legendre(3).boundary_margin() > 0.1);
        let nc = Rule1d::closed_newton_cotes(3);
        assert_eq!(nc.boundary_margin(), 0.0);
        // Simpson weights.
        assert!((nc.weights[1] - 4.0 / 3.0).abs() < 1e-14);
    }
}
