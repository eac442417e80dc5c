//! Semidefinite programming: problem description, interior-point solver,
//! feasibility checks and a text dump format.

pub mod check;
pub mod dump;
pub mod problem;
pub mod solver;

pub use check::{check_solution, ResidualReport};
pub use dump::{dump_problem, parse_problem};
pub use problem::{Constraint, SdpProblem, SdpSolution, SolveStatus, SolverOptions, SparseSym};
pub use solver::solve;
