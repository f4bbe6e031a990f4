//! Locally-corrected Nyström discretization of second-kind integral equations
//! `c phi - G phi - H phi = f` with a weakly singular kernel `H` on closed
//! smooth surfaces.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::too_many_arguments)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod correction;
pub mod error;
pub mod gauss;
pub mod geometry;
pub mod kernels;
pub mod linalg;
pub mod meshquad;
pub mod oracle;
pub mod polar;
pub mod pou;
pub mod solver;
pub mod vec3;

pub use correction::{LocalCorrection, LocalPolynomial, MomentConfig};
pub use error::{Error, Result};
pub use geometry::{Surface, SurfaceKind, SurfacePoint, TangentFrame};
pub use kernels::{Completion, KernelPair, LaplaceDoubleLayer, SingularKernel};
pub use meshquad::{build_mesh, quadrature_nodes, NodeSet, SurfaceMesh};
pub use oracle::{Oracle, OracleConfig};
pub use pou::{build_pou, Cutoff, PartitionOfUnity, PouConfig};
pub use solver::{BuiltinLu, DenseBackend, Discretization, NystromSolution, SchemeConfig};
pub use vec3::Vec3;
