//! Command-line driver and studies for `lcn-core`: configuration files,
//! manufactured problems, convergence tables, invariant suites and CSV output.

pub mod backend;
pub mod config;
pub mod invariants;
pub mod output;
pub mod problem;
pub mod study;

pub use backend::FaerLu;
pub use config::Config;
pub use problem::{Manufactured, ProblemSpec, RhsMode, Solution};
pub use study::{run_convergence, ConvergenceReport, StudyConfig};

use lcn_core::{KernelPair, LaplaceDoubleLayer};

impl Config {
    pub fn kernels(&self) -> lcn_core::Result<KernelPair<LaplaceDoubleLayer>> {
        KernelPair::new(self.completion, LaplaceDoubleLayer, self.c)
    }

    pub fn problem(&self) -> lcn_core::Result<ProblemSpec> {
        Ok(ProblemSpec {
            surface: self.surface,
            kernels: self.kernels()?,
            solution: self.solution,
            rhs: self.rhs,
        })
    }

    pub fn study(&self) -> StudyConfig {
        StudyConfig {
            scheme: self.scheme,
            path: self.solver_path,
            seed: self.seed,
            eval_points: self.eval_points,
            oracle: self.scheme.oracle,
            oracle_tolerance: self.oracle_tolerance,
        }
    }
}
