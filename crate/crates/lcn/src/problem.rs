//! Manufactured problems `c phi - G phi - H phi = f` with known `phi`.

use std::cell::RefCell;
use std::collections::HashMap;
use std::str::FromStr;

use lcn_core::kernels::Completion;
use lcn_core::{KernelPair, LaplaceDoubleLayer, Oracle, OracleConfig, Surface, SurfacePoint, Vec3};

/// Double-layer eigenvalue `-1 / (2 (2n + 1))` on the unit sphere.
pub fn sphere_eigenvalue(n: usize) -> f64 {
    -1.0 / (2.0 * (2 * n + 1) as f64)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Solution {
    Zero,
    One,
    /// `z`, a degree-one harmonic on the unit sphere.
    Y1,
    /// `(3 z^2 - 1) / 2`.
    Y2,
    /// `exp(z)`; not an eigenfunction, so `f` comes from the oracle.
    ExpZ,
}

impl FromStr for Solution {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        Ok(match s {
            "zero" => Solution::Zero,
            "one" => Solution::One,
            "y1" => Solution::Y1,
            "y2" => Solution::Y2,
            "exp_z" => Solution::ExpZ,
            _ => return Err(()),
        })
    }
}

impl Solution {
    pub fn name(&self) -> &'static str {
        match self {
            Solution::Zero => "zero",
            Solution::One => "one",
            Solution::Y1 => "y1",
            Solution::Y2 => "y2",
            Solution::ExpZ => "exp_z",
        }
    }

    pub fn eval(&self, x: Vec3) -> f64 {
        let z = x.z();
        match self {
            Solution::Zero => 0.0,
            Solution::One => 1.0,
            Solution::Y1 => z,
            Solution::Y2 => 0.5 * (3.0 * z * z - 1.0),
            Solution::ExpZ => z.exp(),
        }
    }

    /// Harmonic degree and surface mean when `phi` is a spherical harmonic.
    fn harmonic(&self) -> Option<(usize, f64)> {
        match self {
            Solution::Zero => Some((0, 0.0)),
            Solution::One => Some((0, 1.0)),
            Solution::Y1 => Some((1, 0.0)),
            Solution::Y2 => Some((2, 0.0)),
            Solution::ExpZ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RhsMode {
    /// Analytic when available, otherwise the oracle.
    Auto,
    Analytic,
    Oracle,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProblemSpec {
    pub surface: Surface,
    pub kernels: KernelPair<LaplaceDoubleLayer>,
    pub solution: Solution,
    pub rhs: RhsMode,
}

/// Right-hand side `f = c phi - A phi`, evaluated analytically or through the
/// oracle with memoization per point.
pub struct Manufactured {
    spec: ProblemSpec,
    analytic: Option<(f64, f64)>,
    oracle: Option<(Oracle, f64)>,
    cache: RefCell<HashMap<[u64; 3], f64>>,
    error: RefCell<Option<lcn_core::Error>>,
}

impl Manufactured {
    pub fn new(spec: ProblemSpec, oracle: OracleConfig, tolerance: f64) -> lcn_core::Result<Self> {
        let analytic = match (spec.surface.is_unit_sphere(), spec.solution.harmonic()) {
            (true, Some((n, mean))) if spec.rhs != RhsMode::Oracle => {
                let g = match spec.kernels.g {
                    Completion::Ones => 4.0 * std::f64::consts::PI * mean,
                    Completion::None => 0.0,
                };
                // f = (c - lambda_n) phi - int phi
                Some((spec.kernels.c - sphere_eigenvalue(n), -g))
            }
            _ if spec.solution == Solution::Zero => Some((0.0, 0.0)),
            _ => None,
        };
        if analytic.is_none() && spec.rhs == RhsMode::Analytic {
            return Err(lcn_core::Error::InvalidParameter(
                "no analytic right-hand side for this surface and solution",
            ));
        }
        let oracle = match analytic {
            Some(_) => None,
            None => Some((Oracle::new(&spec.surface, oracle)?, tolerance)),
        };
        Ok(Manufactured {
            spec,
            analytic,
            oracle,
            cache: RefCell::new(HashMap::new()),
            error: RefCell::new(None),
        })
    }

    pub fn spec(&self) -> &ProblemSpec {
        &self.spec
    }

    pub fn is_analytic(&self) -> bool {
        self.analytic.is_some()
    }

    /// `f(y)`. Oracle failures yield `NaN` and are reported by [`Manufactured::take_error`].
    pub fn eval(&self, y: &SurfacePoint) -> f64 {
        let phi = self.spec.solution.eval(y.position);
        if let Some((factor, constant)) = self.analytic {
            return factor * phi + constant;
        }
        let key = y.position.0.map(f64::to_bits);
        if let Some(v) = self.cache.borrow().get(&key) {
            return *v;
        }
        let (oracle, tol) = self.oracle.as_ref().expect("oracle present without analytic form");
        let sol = self.spec.solution;
        let v = match oracle.apply(&self.spec.kernels, &|p: &SurfacePoint| sol.eval(p.position), y, *tol) {
            Ok(a) => self.spec.kernels.c * phi - a.total,
            Err(e) => {
                self.error.borrow_mut().get_or_insert(e);
                f64::NAN
            }
        };
        self.cache.borrow_mut().insert(key, v);
        v
    }

    pub fn take_error(&self) -> Option<lcn_core::Error> {
        self.error.borrow_mut().take()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn spec(solution: Solution, g: Completion) -> ProblemSpec {
        ProblemSpec {
            surface: Surface::unit_sphere(),
            kernels: KernelPair::new(g, LaplaceDoubleLayer, 1.0).unwrap(),
            solution,
            rhs: RhsMode::Auto,
        }
    }

    fn at(x: Vec3) -> SurfacePoint {
        SurfacePoint { position: x, normal: x }
    }

    #[test]
    fn analytic_right_hand_sides() {
        let x = Vec3::new(0.6, 0.0, 0.8);
        let one = Manufactured::new(spec(Solution::One, Completion::Ones), OracleConfig::default(), 1e-8).unwrap();
        assert!((one.eval(&at(x)) - (1.5 - 4.0 * PI)).abs() < 1e-14);
        let y1 = Manufactured::new(spec(Solution::Y1, Completion::None), OracleConfig::default(), 1e-8).unwrap();
        assert!((y1.eval(&at(x)) - 7.0 / 6.0 * 0.8).abs() < 1e-15);
        let zero = Manufactured::new(spec(Solution::Zero, Completion::Ones), OracleConfig::default(), 1e-8).unwrap();
        assert_eq!(zero.eval(&at(x)), 0.0);
    }
}
