//! Z-eigenpairs of dense symmetric tensors by feasible descent and Newton
//! methods on the unit sphere.

// `!(a > b)` rejects NaN as well, which is the intent everywhere it appears.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod harness;
pub mod linalg;
pub mod render;
pub mod residual;
pub mod solver;
pub mod sphere;
pub mod tensor;

pub use error::{Error, Result};
pub use harness::{run_batch, AggregateStats, BatchOutcome, TrialBatch};
pub use linalg::DenseMatrix;
pub use residual::Eigenpair;
pub use solver::{solve, SolveReport, SolveStatus, SolverConfig, Variant};
pub use sphere::{random_unit, SignPattern, UnitVector};
pub use tensor::{make_problem, ProblemId, ProblemSpec, SymmetricTensor};
