//! Derivative-free global minimization that skips evaluations no admissible
//! surrogate could justify.
//!
//! The admissible surrogates are truncated tensor-Legendre expansions that
//! interpolate every evaluation so far, have variance at most one and respect
//! user-supplied upper bounds on Sobol indices. A uniformly drawn proposal is
//! evaluated only if the smallest admissible surrogate value there, obtained
//! from a small convex program, lies strictly below the incumbent.
//!
//! ```no_run
//! use sensopt::{optimizer, BasisConfig, Experiment, RunConfig};
//!
//! let cfg = RunConfig::new(BasisConfig::new(3, 4).unwrap(), 100, Experiment::C.constraints(), 1);
//! let res = optimizer::run(|u| sensopt::testbed::rosenbrock3_scaled(u).unwrap(), &cfg).unwrap();
//! println!("{} evaluations, best {}", res.n_eval, res.m_best);
//! ```

pub mod basis;
pub mod cli;
pub mod coeffs;
pub mod constraints;
pub mod error;
pub mod optimizer;
pub mod qcqp;
pub mod saltelli;
pub mod subproblem;
pub mod testbed;

pub use basis::{BasisConfig, BasisIndex, Subset, TensorBasis};
pub use coeffs::CoeffVector;
pub use constraints::{compile, CompiledConstraints, Experiment, SobolConstraint};
pub use error::{Error, Result};
pub use optimizer::{RunConfig, RunResult, Termination};
pub use qcqp::{QcqpProblem, QcqpSolution, SolveStatus, SolverOptions};
pub use subproblem::{Certifier, History, LowerBound};
