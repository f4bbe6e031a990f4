//! Flat `key = value` run configuration.
//!
//! Blank lines are ignored and `#` starts a comment. Unknown keys are errors.

use std::ops::RangeInclusive;
use std::path::Path;
use std::str::FromStr;

use lcn_core::kernels::Completion;
use lcn_core::pou::Ramp;
use lcn_core::{SchemeConfig, Surface, SurfaceKind};
use thiserror::Error;

use crate::problem::{RhsMode, Solution};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`")]
    Syntax { line: usize },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: invalid value `{value}` for `{key}`")]
    Value { line: usize, key: String, value: String },
    #[error("invalid level range `{0}`; expected `a..b` with a <= b")]
    Levels(String),
    #[error(transparent)]
    Surface(#[from] lcn_core::Error),
    #[error("reading config: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolverPath {
    General,
    P0Fast,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BackendKind {
    Faer,
    Builtin,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Config {
    pub surface: Surface,
    /// Level used by `solve` and `moments`.
    pub level: u32,
    /// Levels used by `converge`, inclusive.
    pub levels: RangeInclusive<u32>,
    pub scheme: SchemeConfig,
    pub completion: Completion,
    pub c: f64,
    pub solver_path: SolverPath,
    pub backend: BackendKind,
    pub solution: Solution,
    pub rhs: RhsMode,
    /// Absolute tolerance for oracle evaluations.
    pub oracle_tolerance: f64,
    pub seed: u64,
    /// Random off-node points for the interpolation error.
    pub eval_points: usize,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            surface: Surface::unit_sphere(),
            level: 2,
            levels: 1..=4,
            scheme: SchemeConfig::new(0, 2),
            completion: Completion::Ones,
            c: 1.0,
            solver_path: SolverPath::General,
            backend: BackendKind::Faer,
            solution: Solution::Y1,
            rhs: RhsMode::Auto,
            oracle_tolerance: 1e-8,
            seed: 0,
            eval_points: 200,
        }
    }
}

/// Parse `a..b` (inclusive on both ends).
pub fn parse_levels(s: &str) -> Result<RangeInclusive<u32>, ConfigError> {
    let bad = || ConfigError::Levels(s.to_string());
    let (a, b) = s.trim().split_once("..").ok_or_else(bad)?;
    let b = b.strip_prefix('=').unwrap_or(b);
    let a: u32 = a.trim().parse().map_err(|_| bad())?;
    let b: u32 = b.trim().parse().map_err(|_| bad())?;
    if a > b {
        return Err(bad());
    }
    Ok(a..=b)
}

#[derive(Default)]
struct SurfaceKeys {
    kind: Option<String>,
    a: Option<f64>,
    b: Option<f64>,
    c: Option<f64>,
    epsilon: Option<f64>,
    lyapunov_radius: Option<f64>,
}

impl Config {
    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = Config::default();
        let mut surf = SurfaceKeys::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or(ConfigError::Syntax { line })?;
            let (key, value) = (key.trim(), value.trim());
            let bad = || ConfigError::Value {
                line,
                key: key.to_string(),
                value: value.to_string(),
            };
            fn num<T: FromStr>(v: &str, bad: impl Fn() -> ConfigError) -> Result<T, ConfigError> {
                v.parse().map_err(|_| bad())
            }
            match key {
                "surface.kind" => surf.kind = Some(value.to_string()),
                "surface.a" => surf.a = Some(num(value, bad)?),
                "surface.b" => surf.b = Some(num(value, bad)?),
                "surface.c" => surf.c = Some(num(value, bad)?),
                "surface.epsilon" => surf.epsilon = Some(num(value, bad)?),
                "surface.lyapunov_radius" => surf.lyapunov_radius = Some(num(value, bad)?),
                "mesh.level" => cfg.level = num(value, bad)?,
                "mesh.levels" => cfg.levels = parse_levels(value).map_err(|_| bad())?,
                "mesh.max_level" => cfg.scheme.max_level = num(value, bad)?,
                "quad.q" => cfg.scheme.q = num(value, bad)?,
                "correction.p" => cfg.scheme.p = num(value, bad)?,
                "pou.theta" => cfg.scheme.pou.theta = num(value, bad)?,
                "pou.kappa_scale" => cfg.scheme.pou.kappa_scale = num(value, bad)?,
                "pou.ramp" => {
                    cfg.scheme.pou.ramp = match value {
                        "quintic" => Ramp::Quintic,
                        "quadratic" => Ramp::Quadratic,
                        _ => return Err(bad()),
                    }
                }
                "kernel.type" => {
                    if value != "laplace_dl" {
                        return Err(bad());
                    }
                }
                "kernel.completion" => {
                    cfg.completion = match value {
                        "ones" => Completion::Ones,
                        "none" => Completion::None,
                        _ => return Err(bad()),
                    }
                }
                "equation.c" => cfg.c = num(value, bad)?,
                "moments.accuracy" => cfg.scheme.moments.accuracy = num(value, bad)?,
                "moments.analytic_dl" => cfg.scheme.moments.analytic = num(value, bad)?,
                "moments.max_angles" => cfg.scheme.moments.max_angles = num(value, bad)?,
                "oracle.level" => cfg.scheme.oracle.level = num(value, bad)?,
                "oracle.q" => cfg.scheme.oracle.q = num(value, bad)?,
                "oracle.tolerance" => cfg.oracle_tolerance = num(value, bad)?,
                "solver.path" => {
                    cfg.solver_path = match value {
                        "general" => SolverPath::General,
                        "p0_fast" => SolverPath::P0Fast,
                        _ => return Err(bad()),
                    }
                }
                "solver.backend" => {
                    cfg.backend = match value {
                        "faer" => BackendKind::Faer,
                        "builtin" => BackendKind::Builtin,
                        _ => return Err(bad()),
                    }
                }
                "problem.solution" => cfg.solution = value.parse().map_err(|_| bad())?,
                "problem.rhs" => {
                    cfg.rhs = match value {
                        "auto" => RhsMode::Auto,
                        "analytic" => RhsMode::Analytic,
                        "oracle" => RhsMode::Oracle,
                        _ => return Err(bad()),
                    }
                }
                "run.seed" => cfg.seed = num(value, bad)?,
                "run.eval_points" => cfg.eval_points = num(value, bad)?,
                _ => {
                    return Err(ConfigError::UnknownKey {
                        line,
                        key: key.to_string(),
                    })
                }
            }
        }
        let kind = match surf.kind.as_deref().unwrap_or("sphere") {
            "sphere" => SurfaceKind::UnitSphere,
            "ellipsoid" => SurfaceKind::Ellipsoid {
                a: surf.a.unwrap_or(1.0),
                b: surf.b.unwrap_or(1.0),
                c: surf.c.unwrap_or(1.0),
            },
            "perturbed" => SurfaceKind::PerturbedSphere {
                epsilon: surf.epsilon.unwrap_or(0.1),
            },
            other => {
                return Err(ConfigError::Value {
                    line: 0,
                    key: "surface.kind".into(),
                    value: other.into(),
                })
            }
        };
        cfg.surface = Surface::new(kind, surf.lyapunov_radius)?;
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_and_values() {
        let cfg = Config::parse(
            "# run\nsurface.kind = ellipsoid  # stretched\nsurface.a = 1.5\n\ncorrection.p = 2\nquad.q=3\nmesh.levels = 2..3\n",
        )
        .unwrap();
        assert_eq!(cfg.scheme.p, 2);
        assert_eq!(cfg.scheme.q, 3);
        assert_eq!(cfg.levels, 2..=3);
        assert_eq!(cfg.surface.kind(), SurfaceKind::Ellipsoid { a: 1.5, b: 1.0, c: 1.0 });
        assert_eq!(cfg.surface.lyapunov_radius(), 0.5);
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        assert!(matches!(
            Config::parse("mesh.lvl = 2"),
            Err(ConfigError::UnknownKey { line: 1, .. })
        ));
        assert!(matches!(
            Config::parse("\nquad.q = two"),
            Err(ConfigError::Value { line: 2, .. })
        ));
        assert!(matches!(Config::parse("quad.q"), Err(ConfigError::Syntax { line: 1 })));
        assert!(parse_levels("3..1").is_err());
        assert_eq!(parse_levels("1..4").unwrap(), 1..=4);
    }
}
