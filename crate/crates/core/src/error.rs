use core::fmt;

use crate::vec3::Vec3;

/// Errors raised by the discretization pipeline.
#[derive(Clone, Debug, PartialEq)]
pub enum Error {
    /// A point handed to a surface operation does not satisfy the surface constraint.
    NotOnSurface { residual: f64 },
    /// Projection onto the surface along the normal failed, so the requested
    /// local coordinates lie outside the Lyapunov patch.
    OutsidePatch { xi_norm: f64 },
    /// The kernel was evaluated on the diagonal `x == y`.
    Diagonal,
    /// A parameter is outside its admissible range.
    InvalidParameter(&'static str),
    /// Mesh refinement level exceeds the configured budget.
    LevelOverBudget { level: u32, max_level: u32 },
    /// Partition-of-unity support audit failed at `point`.
    SupportAudit { point: Vec3, found: f64, required: f64 },
    /// Limits of the smooth kernel factor did not settle under extrapolation.
    KernelRegularity { spread: f64 },
    /// Numerical integration could not reach the requested accuracy.
    Accuracy { achieved: f64, requested: f64 },
    /// The local moment matrix at `point` is (numerically) singular.
    SingularMomentSystem {
        point: Vec3,
        min_eigenvalue: f64,
        threshold: f64,
    },
    /// A dense factorization met a zero pivot.
    SingularMatrix { pivot: usize },
    /// The solved nodal system does not satisfy the residual bound.
    Residual { residual: f64, bound: f64 },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::NotOnSurface { residual } => {
                write!(f, "point is not on the surface (constraint residual {residual:e})")
            }
            Error::OutsidePatch { xi_norm } => write!(
                f,
                "local coordinates with |xi| = {xi_norm} are outside the Lyapunov patch"
            ),
            Error::Diagonal => write!(f, "weakly singular kernel evaluated at x = y"),
            Error::InvalidParameter(what) => write!(f, "invalid parameter: {what}"),
            Error::LevelOverBudget { level, max_level } => {
                write!(f, "mesh level {level} exceeds the configured budget of {max_level}")
            }
            Error::SupportAudit { point, found, required } => write!(
                f,
                "partition-of-unity support audit failed at ({}, {}, {}): found {found}, required {required}",
                point.x(),
                point.y(),
                point.z()
            ),
            Error::KernelRegularity { spread } => write!(
                f,
                "kernel limit extrapolation does not converge (successive differences grow, spread {spread:e})"
            ),
            Error::Accuracy { achieved, requested } => {
                write!(f, "integration reached {achieved:e}, requested accuracy {requested:e}")
            }
            Error::SingularMomentSystem {
                point,
                min_eigenvalue,
                threshold,
            } => write!(
                f,
                "moment system singular at ({}, {}, {}): min eigenvalue {min_eigenvalue:e} < {threshold:e}",
                point.x(),
                point.y(),
                point.z()
            ),
            Error::SingularMatrix { pivot } => {
                write!(f, "singular matrix at pivot {pivot}")
            }
            Error::Residual { residual, bound } => write!(f, "nodal residual {residual:e} exceeds bound {bound:e}"),
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;
